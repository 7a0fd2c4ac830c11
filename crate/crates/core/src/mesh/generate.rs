//! Structured, triangulated and graded mesh families on (-1,1)².

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Mesh, Point};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadKind {
    Uniform,
    Trapezoidal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TriStyle {
    SplitQuad,
    DelaunayLike,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradedShape {
    Quad,
    Tri,
}

const MAX_ATTEMPTS: u64 = 10;

fn vid(n: usize, i: usize, j: usize) -> usize {
    j * (n + 1) + i
}

fn quads(n: usize) -> Vec<Vec<usize>> {
    let mut el = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            el.push(vec![vid(n, i, j), vid(n, i + 1, j), vid(n, i + 1, j + 1), vid(n, i, j + 1)]);
        }
    }
    el
}

fn split_quads(n: usize) -> Vec<Vec<usize>> {
    let mut el = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            el.push(vec![vid(n, i, j), vid(n, i + 1, j), vid(n, i + 1, j + 1)]);
            el.push(vec![vid(n, i, j), vid(n, i + 1, j + 1), vid(n, i, j + 1)]);
        }
    }
    el
}

fn grid(xs: &[f64], ys: &[f64]) -> Vec<Point> {
    let mut v = Vec::with_capacity(xs.len() * ys.len());
    for &y in ys {
        for &x in xs {
            v.push([x, y]);
        }
    }
    v
}

fn uniform_nodes(n: usize) -> Vec<f64> {
    (0..=n).map(|i| if i == n { 1.0 } else { -1.0 + 2.0 * i as f64 / n as f64 }).collect()
}

/// n×n quadrilaterals. The trapezoidal kind tilts each interior horizontal
/// grid line, alternating the slope sign from row to row; the vertical shift
/// at x = ±1 is `distortion` times the cell height.
pub fn gen_quad_family(n: usize, distortion: f64, kind: QuadKind) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::Mesh("n must be at least 1".into()));
    }
    if !(0.0..0.5).contains(&distortion) {
        return Err(Error::Mesh(format!("distortion {distortion} outside [0, 0.5)")));
    }
    let xs = uniform_nodes(n);
    let mut v = grid(&xs, &xs);
    if kind == QuadKind::Trapezoidal {
        let h = 2.0 / n as f64;
        for j in 1..n {
            let s = if j % 2 == 1 { 1.0 } else { -1.0 };
            for i in 0..=n {
                v[vid(n, i, j)][1] += s * distortion * h * xs[i];
            }
        }
    }
    Mesh::from_elements(v, quads(n))
}

pub fn gen_tri_family(n: usize, style: TriStyle, seed: u64) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::Mesh("n must be at least 1".into()));
    }
    match style {
        TriStyle::SplitQuad => {
            let xs = uniform_nodes(n);
            Mesh::from_elements(grid(&xs, &xs), split_quads(n))
        }
        TriStyle::DelaunayLike => {
            let mut last = String::new();
            for attempt in 0..MAX_ATTEMPTS {
                match delaunay_like(n, seed.wrapping_add(attempt)) {
                    Ok(m) => return Ok(m),
                    Err(e) => last = e.to_string(),
                }
            }
            Err(Error::Mesh(format!("triangulation failed after {MAX_ATTEMPTS} attempts: {last}")))
        }
    }
}

fn delaunay_like(n: usize, seed: u64) -> Result<Mesh> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs = uniform_nodes(n);
    let h = 2.0 / n as f64;
    let mut v = grid(&xs, &xs);
    for j in 1..n {
        for i in 1..n {
            let p = &mut v[vid(n, i, j)];
            p[0] += rng.random_range(-0.3..0.3) * h;
            p[1] += rng.random_range(-0.3..0.3) * h;
        }
    }
    let pts: Vec<delaunator::Point> = v.iter().map(|p| delaunator::Point { x: p[0], y: p[1] }).collect();
    let tri = delaunator::triangulate(&pts);
    if tri.triangles.is_empty() {
        return Err(Error::Mesh("empty triangulation".into()));
    }
    let mut el = Vec::with_capacity(tri.triangles.len() / 3);
    for t in tri.triangles.chunks(3) {
        let (a, b, c) = (v[t[0]], v[t[1]], v[t[2]]);
        let area2 = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        if area2.abs() < 1e-10 * h * h {
            return Err(Error::Mesh("degenerate triangle".into()));
        }
        el.push(if area2 > 0.0 { vec![t[0], t[1], t[2]] } else { vec![t[0], t[2], t[1]] });
    }
    let m = Mesh::from_elements(v, el)?;
    let total: f64 = m.area.iter().sum();
    if (total - 4.0).abs() > 1e-10 {
        return Err(Error::Mesh(format!("triangulation covers area {total}")));
    }
    Ok(m)
}

/// Gauss–Lobatto nodes of order n (n+1 points, ascending, exactly symmetric).
pub fn gauss_lobatto_nodes(n: usize) -> Vec<f64> {
    assert!(n >= 1);
    if n == 1 {
        return vec![-1.0, 1.0];
    }
    let n1 = n + 1;
    let mut x: Vec<f64> = (0..n1).map(|i| (std::f64::consts::PI * i as f64 / n as f64).cos()).collect();
    for _ in 0..100 {
        let mut delta: f64 = 0.0;
        for xi in x.iter_mut() {
            let (mut p0, mut p1) = (1.0, *xi);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * *xi * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let step = (*xi * p1 - p0) / (n1 as f64 * p1);
            *xi -= step;
            delta = delta.max(step.abs());
        }
        if delta < 1e-16 {
            break;
        }
    }
    x.reverse();
    let mut s = x.clone();
    for i in 0..n1 {
        s[i] = 0.5 * (x[i] - x[n - i]);
    }
    s[0] = -1.0;
    s[n] = 1.0;
    if n % 2 == 0 {
        s[n / 2] = 0.0;
    }
    s
}

/// Graded mesh: Gauss–Lobatto nodes per axis, interior vertices jittered by a
/// uniform random offset of at most `jitter` times the smaller adjacent spacing
/// along each axis. Boundary vertices are not moved.
pub fn apply_grading(n: usize, shape: GradedShape, jitter: f64, seed: u64) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::Mesh("n must be at least 1".into()));
    }
    let nodes = gauss_lobatto_nodes(n);
    let spacing = |i: usize| (nodes[i] - nodes[i - 1]).min(nodes[i + 1] - nodes[i]);
    let mut last = String::new();
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
        let mut v = grid(&nodes, &nodes);
        if jitter > 0.0 {
            for j in 1..n {
                for i in 1..n {
                    let dx = rng.random_range(-1.0..=1.0) * jitter * spacing(i);
                    let dy = rng.random_range(-1.0..=1.0) * jitter * spacing(j);
                    let p = &mut v[vid(n, i, j)];
                    p[0] += dx;
                    p[1] += dy;
                }
            }
        }
        let el = match shape {
            GradedShape::Quad => quads(n),
            GradedShape::Tri => split_quads(n),
        };
        match Mesh::from_elements(v, el) {
            Ok(m) => return Ok(m),
            Err(e) => last = e.to_string(),
        }
    }
    Err(Error::Mesh(format!("graded mesh generation failed: {last}")))
}
