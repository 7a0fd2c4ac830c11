//! Hierarchical L²-orthonormal modal bases on elements and faces.
//!
//! Element bases are obtained by modified Gram–Schmidt (two passes) on scaled
//! monomials (x−x_T)^a (y−y_T)^b / (s_x^a s_y^b), where s_x, s_y are the
//! half-extents of the element around its centroid. Function i is
//! orthogonalized with a quadrature rule that depends only on its own degree,
//! so a degree-ℓ' basis is bitwise the leading block of any degree-ℓ basis.

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};
use crate::quadrature::{polygon_rule, QuadratureRule};

pub fn dim_p2(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

pub fn dim_p1(k: usize) -> usize {
    k + 1
}

/// Exponents of the scaled monomials in degree-lexicographic order.
pub fn monomial_exponents(degree: usize) -> Vec<(usize, usize)> {
    let mut e = Vec::with_capacity(dim_p2(degree));
    for d in 0..=degree {
        for b in 0..=d {
            e.push((d - b, b));
        }
    }
    e
}

#[derive(Clone, Debug)]
pub struct ElementBasis {
    degree: usize,
    center: Point,
    scale: [f64; 2],
    exps: Vec<(usize, usize)>,
    /// row-major dim×dim, lower triangular: ψ_i = Σ_{l≤i} c[i][l] m_l
    coeffs: Vec<f64>,
}

impl ElementBasis {
    pub fn new(pts: &[Point], centroid: Point, degree: usize) -> Result<Self> {
        let mut scale = [0.0f64; 2];
        for p in pts {
            scale[0] = scale[0].max((p[0] - centroid[0]).abs());
            scale[1] = scale[1].max((p[1] - centroid[1]).abs());
        }
        if scale[0] <= 0.0 || scale[1] <= 0.0 {
            return Err(Error::Geometry("degenerate element".into()));
        }
        let exps = monomial_exponents(degree);
        let n = exps.len();
        let mut basis = Self { degree, center: centroid, scale, exps, coeffs: vec![0.0; n * n] };
        let mut rule_cache: Vec<Option<QuadratureRule>> = vec![None; degree + 1];
        for i in 0..n {
            let di = basis.exps[i].0 + basis.exps[i].1;
            if rule_cache[di].is_none() {
                rule_cache[di] = Some(polygon_rule(pts, centroid, 2 * di)?);
            }
            let rule = rule_cache[di].as_ref().unwrap();
            let nq = rule.len();
            let dim_i = i + 1;
            // monomial table on this rule for the first i+1 monomials
            let mut mono = vec![0.0; nq * dim_i];
            for (q, p) in rule.points.iter().enumerate() {
                basis.monomials(*p, &mut mono[q * dim_i..(q + 1) * dim_i]);
            }
            let values_of = |c: &[f64]| -> Vec<f64> {
                (0..nq).map(|q| (0..c.len()).map(|l| c[l] * mono[q * dim_i + l]).sum()).collect()
            };
            let prev: Vec<Vec<f64>> = (0..i).map(|j| values_of(&basis.coeffs[j * n..j * n + j + 1])).collect();
            let mut c = vec![0.0; dim_i];
            c[i] = 1.0;
            let mut v: Vec<f64> = (0..nq).map(|q| mono[q * dim_i + i]).collect();
            let norm0 = weighted_norm(&v, &rule.weights);
            for _pass in 0..2 {
                for (j, pj) in prev.iter().enumerate() {
                    let r: f64 = (0..nq).map(|q| rule.weights[q] * v[q] * pj[q]).sum();
                    for q in 0..nq {
                        v[q] -= r * pj[q];
                    }
                    for l in 0..=j {
                        c[l] -= r * basis.coeffs[j * n + l];
                    }
                }
            }
            let nv = weighted_norm(&v, &rule.weights);
            if !(nv > 1e-12 * norm0) {
                return Err(Error::Geometry(format!("numerically singular Gram matrix at basis function {i}")));
            }
            for l in 0..dim_i {
                basis.coeffs[i * n + l] = c[l] / nv;
            }
        }
        Ok(basis)
    }

    pub fn for_element(mesh: &Mesh, t: usize, degree: usize) -> Result<Self> {
        Self::new(&mesh.element_vertices(t), mesh.centroid[t], degree)
            .map_err(|e| Error::Geometry(format!("element {t}: {e}")))
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.exps.len()
    }

    /// Coefficient row of function i (length dim, zero above the diagonal).
    pub fn coeff_row(&self, i: usize) -> &[f64] {
        let n = self.dim();
        &self.coeffs[i * n..(i + 1) * n]
    }

    fn local(&self, p: Point) -> (f64, f64) {
        ((p[0] - self.center[0]) / self.scale[0], (p[1] - self.center[1]) / self.scale[1])
    }

    fn powers(&self, p: Point) -> (Vec<f64>, Vec<f64>) {
        let (x, y) = self.local(p);
        let mut px = vec![1.0; self.degree + 1];
        let mut py = vec![1.0; self.degree + 1];
        for k in 1..=self.degree {
            px[k] = px[k - 1] * x;
            py[k] = py[k - 1] * y;
        }
        (px, py)
    }

    fn monomials(&self, p: Point, out: &mut [f64]) {
        let (px, py) = self.powers(p);
        for (o, &(a, b)) in out.iter_mut().zip(&self.exps) {
            *o = px[a] * py[b];
        }
    }

    /// Values of the first `out.len()` basis functions at p.
    pub fn eval(&self, p: Point, out: &mut [f64]) {
        let m = out.len();
        let mut mono = vec![0.0; m];
        self.monomials(p, &mut mono);
        let n = self.dim();
        for i in 0..m {
            let row = &self.coeffs[i * n..i * n + i + 1];
            out[i] = row.iter().zip(&mono).map(|(c, v)| c * v).sum();
        }
    }

    /// Values and physical gradients of the first `vals.len()` functions at p.
    pub fn eval_grad(&self, p: Point, vals: &mut [f64], grads: &mut [[f64; 2]]) {
        let m = vals.len();
        let (px, py) = self.powers(p);
        let mut mono = vec![0.0; m];
        let mut gx = vec![0.0; m];
        let mut gy = vec![0.0; m];
        for l in 0..m {
            let (a, b) = self.exps[l];
            mono[l] = px[a] * py[b];
            gx[l] = if a > 0 { a as f64 * px[a - 1] * py[b] / self.scale[0] } else { 0.0 };
            gy[l] = if b > 0 { b as f64 * px[a] * py[b - 1] / self.scale[1] } else { 0.0 };
        }
        let n = self.dim();
        for i in 0..m {
            let row = &self.coeffs[i * n..i * n + i + 1];
            let (mut v, mut dx, mut dy) = (0.0, 0.0, 0.0);
            for l in 0..=i {
                v += row[l] * mono[l];
                dx += row[l] * gx[l];
                dy += row[l] * gy[l];
            }
            vals[i] = v;
            grads[i] = [dx, dy];
        }
    }

    /// Values of the first `m` functions at the rule points (row-major nq×m).
    pub fn tabulate(&self, rule: &QuadratureRule, m: usize) -> Vec<f64> {
        let mut t = vec![0.0; rule.len() * m];
        for (q, p) in rule.points.iter().enumerate() {
            self.eval(*p, &mut t[q * m..(q + 1) * m]);
        }
        t
    }

    /// Values and gradients of the first `m` functions at the rule points.
    pub fn tabulate_grad(&self, rule: &QuadratureRule, m: usize) -> (Vec<f64>, Vec<[f64; 2]>) {
        let mut v = vec![0.0; rule.len() * m];
        let mut g = vec![[0.0; 2]; rule.len() * m];
        for (q, p) in rule.points.iter().enumerate() {
            self.eval_grad(*p, &mut v[q * m..(q + 1) * m], &mut g[q * m..(q + 1) * m]);
        }
        (v, g)
    }
}

fn weighted_norm(v: &[f64], w: &[f64]) -> f64 {
    v.iter().zip(w).map(|(x, wi)| wi * x * x).sum::<f64>().sqrt()
}

/// Scaled Legendre polynomials on a face, orthonormal in L²(F); the parameter
/// runs from the face's first to its second stored vertex.
#[derive(Clone, Debug)]
pub struct FaceBasis {
    a: Point,
    b: Point,
    len: f64,
    degree: usize,
}

impl FaceBasis {
    pub fn new(a: Point, b: Point, degree: usize) -> Self {
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        Self { a, b, len, degree }
    }

    pub fn for_face(mesh: &Mesh, f: usize, degree: usize) -> Self {
        let [a, b] = mesh.face_points(f);
        Self::new(a, b, degree)
    }

    pub fn dim(&self) -> usize {
        self.degree + 1
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn length(&self) -> f64 {
        self.len
    }

    pub fn start(&self) -> Point {
        self.a
    }

    pub fn end(&self) -> Point {
        self.b
    }

    pub fn eval(&self, p: Point, out: &mut [f64]) {
        let t = ((p[0] - self.a[0]) * (self.b[0] - self.a[0]) + (p[1] - self.a[1]) * (self.b[1] - self.a[1])) / (self.len * self.len);
        let s = 2.0 * t - 1.0;
        let m = out.len();
        let (mut p0, mut p1) = (1.0, s);
        for j in 0..m {
            let pj = match j {
                0 => 1.0,
                1 => s,
                _ => {
                    let p2 = ((2 * j - 1) as f64 * s * p1 - (j - 1) as f64 * p0) / j as f64;
                    p0 = p1;
                    p1 = p2;
                    p2
                }
            };
            out[j] = pj * ((2 * j + 1) as f64 / self.len).sqrt();
        }
    }

    pub fn tabulate(&self, rule: &QuadratureRule, m: usize) -> Vec<f64> {
        let mut t = vec![0.0; rule.len() * m];
        for (q, p) in rule.points.iter().enumerate() {
            self.eval(*p, &mut t[q * m..(q + 1) * m]);
        }
        t
    }
}

/// Coefficients c_i = ∫ f φ_i of the L² projection onto the first `m` functions
/// of an orthonormal basis, given the basis table on `rule`.
pub fn l2_project_table(rule: &QuadratureRule, table: &[f64], m: usize, f: impl Fn(Point) -> f64) -> Vec<f64> {
    let mut c = vec![0.0; m];
    for (q, p) in rule.points.iter().enumerate() {
        let w = rule.weights[q] * f(*p);
        for i in 0..m {
            c[i] += w * table[q * m + i];
        }
    }
    c
}

pub fn l2_project_element(basis: &ElementBasis, rule: &QuadratureRule, m: usize, f: impl Fn(Point) -> f64) -> Vec<f64> {
    l2_project_table(rule, &basis.tabulate(rule, m), m, f)
}

pub fn l2_project_face(basis: &FaceBasis, rule: &QuadratureRule, m: usize, f: impl Fn(Point) -> f64) -> Vec<f64> {
    l2_project_table(rule, &basis.tabulate(rule, m), m, f)
}
