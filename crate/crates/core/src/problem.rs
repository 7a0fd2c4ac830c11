//! Stokes data and exact solutions.

use crate::mesh::Point;

/// A Stokes problem with known exact fields; boundary data are derived from
/// them (g_D = u, g_N = −(∇u)n + p n).
pub trait StokesCase: Sync {
    fn velocity(&self, p: Point) -> [f64; 2];
    /// g[i][j] = ∂u_i/∂x_j
    fn velocity_gradient(&self, p: Point) -> [[f64; 2]; 2];
    fn pressure(&self, p: Point) -> f64;
    fn body_force(&self, p: Point) -> [f64; 2];

    fn dirichlet(&self, p: Point) -> [f64; 2] {
        self.velocity(p)
    }

    fn neumann(&self, p: Point, n: Point) -> [f64; 2] {
        let g = self.velocity_gradient(p);
        let pr = self.pressure(p);
        [
            -(g[0][0] * n[0] + g[0][1] * n[1]) + pr * n[0],
            -(g[1][0] * n[0] + g[1][1] * n[1]) + pr * n[1],
        ]
    }
}

/// u₁ = −eˣ(y cos y + sin y), u₂ = eˣ y sin y, p = 2eˣ sin y, f = 0.
#[derive(Clone, Copy, Debug, Default)]
pub struct Manufactured2D;

impl StokesCase for Manufactured2D {
    fn velocity(&self, p: Point) -> [f64; 2] {
        let (ex, (s, c)) = (p[0].exp(), p[1].sin_cos());
        [-ex * (p[1] * c + s), ex * p[1] * s]
    }

    fn velocity_gradient(&self, p: Point) -> [[f64; 2]; 2] {
        let y = p[1];
        let (ex, (s, c)) = (p[0].exp(), y.sin_cos());
        [[-ex * (y * c + s), -ex * (2.0 * c - y * s)], [ex * y * s, ex * (s + y * c)]]
    }

    fn pressure(&self, p: Point) -> f64 {
        2.0 * p[0].exp() * p[1].sin()
    }

    fn body_force(&self, _p: Point) -> [f64; 2] {
        [0.0, 0.0]
    }
}

/// Polynomial case used for exactness checks: u = curl ψ with
/// ψ = x³y − x y² + x⁴/4 (so u ∈ P³, ∇·u = 0), p = x y + x² − y/3;
/// f = −Δu + ∇p.
#[derive(Clone, Copy, Debug, Default)]
pub struct PolynomialCase;

impl StokesCase for PolynomialCase {
    fn velocity(&self, p: Point) -> [f64; 2] {
        let (x, y) = (p[0], p[1]);
        // u = (∂ψ/∂y, −∂ψ/∂x)
        [x * x * x - 2.0 * x * y, -(3.0 * x * x * y - y * y + x * x * x)]
    }

    fn velocity_gradient(&self, p: Point) -> [[f64; 2]; 2] {
        let (x, y) = (p[0], p[1]);
        [[3.0 * x * x - 2.0 * y, -2.0 * x], [-(6.0 * x * y + 3.0 * x * x), -(3.0 * x * x - 2.0 * y)]]
    }

    fn pressure(&self, p: Point) -> f64 {
        p[0] * p[1] + p[0] * p[0] - p[1] / 3.0
    }

    fn body_force(&self, p: Point) -> [f64; 2] {
        let (x, y) = (p[0], p[1]);
        // Δu₁ = 6x, Δu₂ = −(6y − 2 + 6x)
        [-6.0 * x + y + 2.0 * x, (6.0 * y - 2.0 + 6.0 * x) + x - 1.0 / 3.0]
    }
}
