//! Quadrature on segments, triangles and star-shaped polygons.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::mesh::Point;

#[derive(Clone, Debug, Default)]
pub struct QuadratureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(*p)).sum()
    }
}

const GL_MAX: usize = 40;

/// Gauss–Legendre nodes and weights on [0, 1].
pub fn gauss_legendre(n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<Vec<(Vec<f64>, Vec<f64>)>> = OnceLock::new();
    let all = CACHE.get_or_init(|| (0..=GL_MAX).map(gl_compute).collect());
    &all[n.clamp(1, GL_MAX)]
}

fn gl_compute(n: usize) -> (Vec<f64>, Vec<f64>) {
    if n == 0 {
        return (vec![], vec![]);
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wt = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wt;
        w[n - 1 - i] = wt;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    let xs = x.iter().map(|v| 0.5 * (v + 1.0)).collect();
    let ws = w.iter().map(|v| 0.5 * v).collect();
    (xs, ws)
}

/// Gauss–Legendre rule on the segment [a, b] exact for polynomials of `degree`.
pub fn segment_rule(a: Point, b: Point, degree: usize) -> QuadratureRule {
    let (x, w) = gauss_legendre(degree / 2 + 1);
    let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
    let points = x.iter().map(|&t| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]).collect();
    let weights = w.iter().map(|&wi| wi * len).collect();
    QuadratureRule { points, weights }
}

/// Collapsed-tensor (Duffy) rule on triangle (a, b, c) exact for `degree`.
pub fn triangle_rule(a: Point, b: Point, c: Point, degree: usize) -> QuadratureRule {
    let mut r = QuadratureRule::default();
    push_triangle(&mut r, a, b, c, degree);
    r
}

fn push_triangle(r: &mut QuadratureRule, a: Point, b: Point, c: Point, degree: usize) {
    let n = (degree + 3) / 2;
    let (x, w) = gauss_legendre(n);
    let det = ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])).abs();
    for (u, wu) in x.iter().zip(w) {
        for (v, wv) in x.iter().zip(w) {
            let xi = *u;
            let eta = (1.0 - u) * v;
            r.points.push([a[0] + xi * (b[0] - a[0]) + eta * (c[0] - a[0]), a[1] + xi * (b[1] - a[1]) + eta * (c[1] - a[1])]);
            r.weights.push(wu * wv * (1.0 - u) * det);
        }
    }
}

/// Rule on a polygon: triangles directly, other polygons by a fan from the
/// area centroid. Fails when the polygon is not star-shaped w.r.t. the centroid.
pub fn polygon_rule(pts: &[Point], centroid: Point, degree: usize) -> Result<QuadratureRule> {
    if pts.len() == 3 {
        return Ok(triangle_rule(pts[0], pts[1], pts[2], degree));
    }
    let mut r = QuadratureRule::default();
    for i in 0..pts.len() {
        let (a, b) = (pts[i], pts[(i + 1) % pts.len()]);
        let s = (a[0] - centroid[0]) * (b[1] - centroid[1]) - (b[0] - centroid[0]) * (a[1] - centroid[1]);
        if s <= 0.0 {
            return Err(Error::Geometry("polygon is not star-shaped with respect to its centroid".into()));
        }
        push_triangle(&mut r, centroid, a, b, degree);
    }
    Ok(r)
}
