//! Element-local DG operators: BR2 viscous form with jump liftings and a
//! stabilized equal-order pressure–velocity coupling.
//!
//! Per element the unknowns are ordered [u_x (n), u_y (n), p (n)] with
//! n = dim P^k(T). Tensors use (∇v)_{ij} = ∂_j v_i and liftings are defined
//! by ∫_T L(φ):τ = ½ ∫_F (φ ⊗ n_TF):τ.

use nalgebra::{DMatrix, DVector};

use crate::basis::{dim_p2, ElementBasis};
use crate::error::{Error, Result};
use crate::mesh::{FaceTag, Mesh, Point};
use crate::problem::StokesCase;
use crate::quadrature::{polygon_rule, segment_rule, QuadratureRule};

/// Default BR2 penalty on each face: max card F_T over incident elements, plus one.
pub fn default_face_penalty(mesh: &Mesh) -> Vec<f64> {
    mesh.faces
        .iter()
        .map(|f| {
            let mut m = mesh.element_faces[f.left].len();
            if let Some(r) = f.right {
                m = m.max(mesh.element_faces[r].len());
            }
            (m + 1) as f64
        })
        .collect()
}

/// Faces whose penalty does not exceed the coercivity bound.
pub fn weak_penalty_faces(mesh: &Mesh, eta: &[f64]) -> Vec<usize> {
    let bound = default_face_penalty(mesh);
    (0..mesh.n_faces()).filter(|&f| eta[f] <= bound[f] - 1.0).collect()
}

pub fn dg_block_size(k: usize) -> usize {
    3 * dim_p2(k)
}

/// Element bases of degree k for all elements.
pub fn dg_bases(mesh: &Mesh, k: usize) -> Result<Vec<ElementBasis>> {
    if k == 0 {
        return Err(Error::Config("DG requires k ≥ 1".into()));
    }
    (0..mesh.n_elements()).map(|t| ElementBasis::for_element(mesh, t, k)).collect()
}

/// Lifting of a vector trace on face `ef` of element `t` into P^k(T)^{2×2}:
/// coefficients c[i][j][m] with L_ij = Σ_m c[i][j][m] ψ_m.
pub fn lifting(mesh: &Mesh, basis: &ElementBasis, t: usize, face_index: usize, trace: impl Fn(Point) -> [f64; 2]) -> Vec<[[f64; 2]; 2]> {
    let ef = mesh.element_faces[t][face_index];
    let n = mesh.normal_out(ef);
    let [a, b] = mesh.face_points(ef.face);
    let nb = basis.dim();
    let rule = segment_rule(a, b, 2 * basis.degree() + 8);
    let tab = basis.tabulate(&rule, nb);
    let mut c = vec![[[0.0; 2]; 2]; nb];
    for (q, p) in rule.points.iter().enumerate() {
        let phi = trace(*p);
        for m in 0..nb {
            let w = 0.5 * rule.weights[q] * tab[q * nb + m];
            for i in 0..2 {
                for j in 0..2 {
                    c[m][i][j] += w * phi[i] * n[j];
                }
            }
        }
    }
    c
}

/// Local discrete gradient on element t of a broken polynomial field given by
/// per-element coefficients `u[t'] = [u_x modes, u_y modes]`; Dirichlet jumps use `g_d`.
pub fn discrete_gradient(
    mesh: &Mesh,
    bases: &[ElementBasis],
    t: usize,
    u: &[Vec<f64>],
    g_d: impl Fn(Point) -> [f64; 2],
) -> Vec<[[f64; 2]; 2]> {
    let basis = &bases[t];
    let nb = basis.dim();
    let rule = polygon_rule(&mesh.element_vertices(t), mesh.centroid[t], 2 * basis.degree() + 2).expect("element rule");
    let (v, g) = basis.tabulate_grad(&rule, nb);
    let mut out = vec![[[0.0; 2]; 2]; nb];
    for q in 0..rule.len() {
        let mut grad = [[0.0; 2]; 2];
        for i in 0..2 {
            for b in 0..nb {
                let c = u[t][i * nb + b];
                grad[i][0] += c * g[q * nb + b][0];
                grad[i][1] += c * g[q * nb + b][1];
            }
        }
        for m in 0..nb {
            let w = rule.weights[q] * v[q * nb + m];
            for i in 0..2 {
                for j in 0..2 {
                    out[m][i][j] += w * grad[i][j];
                }
            }
        }
    }
    let eval = |tt: usize, p: Point| -> [f64; 2] {
        let nb = bases[tt].dim();
        let mut vals = vec![0.0; nb];
        bases[tt].eval(p, &mut vals);
        let mut r = [0.0; 2];
        for i in 0..2 {
            r[i] = (0..nb).map(|b| u[tt][i * nb + b] * vals[b]).sum();
        }
        r
    };
    for (fi, ef) in mesh.element_faces[t].iter().enumerate() {
        let face = &mesh.faces[ef.face];
        let jump: Box<dyn Fn(Point) -> [f64; 2]> = match face.tag {
            FaceTag::Interior => {
                let nb_t = mesh.neighbor(t, *ef).unwrap();
                Box::new(move |p| {
                    let (a, b) = (eval(t, p), eval(nb_t, p));
                    [a[0] - b[0], a[1] - b[1]]
                })
            }
            FaceTag::Dirichlet => Box::new(|p| {
                let (a, g) = (eval(t, p), g_d(p));
                [2.0 * (a[0] - g[0]), 2.0 * (a[1] - g[1])]
            }),
            FaceTag::Neumann => continue,
        };
        let l = lifting(mesh, basis, t, fi, jump);
        for m in 0..nb {
            for i in 0..2 {
                for j in 0..2 {
                    out[m][i][j] -= l[m][i][j];
                }
            }
        }
    }
    out
}

/// Row block of element t in the global DG system: dense couplings with
/// itself and its face neighbours, plus the load vector.
#[derive(Clone, Debug)]
pub struct DgRows {
    pub element: usize,
    /// column elements; the first is `element` itself
    pub cols: Vec<usize>,
    pub blocks: Vec<DMatrix<f64>>,
    pub rhs: DVector<f64>,
}

struct Side {
    psi: Vec<f64>,
    dpsi: Vec<[f64; 2]>,
}

fn side_tables(basis: &ElementBasis, rule: &QuadratureRule) -> Side {
    let (psi, dpsi) = basis.tabulate_grad(rule, basis.dim());
    Side { psi, dpsi }
}

/// Assembles the rows of element t. `eta` holds the BR2 penalty per face.
pub fn dg_element_rows(mesh: &Mesh, bases: &[ElementBasis], t: usize, eta: &[f64], case: &dyn StokesCase) -> Result<DgRows> {
    let basis = &bases[t];
    let k = basis.degree();
    let n = basis.dim();
    let bs = 3 * n;
    let ux = |b: usize| b;
    let uy = |b: usize| n + b;
    let pp = |b: usize| 2 * n + b;
    let qdeg = 2 * k + 4;
    let mut cols = vec![t];
    let mut blocks = vec![DMatrix::zeros(bs, bs)];
    let mut rhs = DVector::zeros(bs);

    let rule = polygon_rule(&mesh.element_vertices(t), mesh.centroid[t], qdeg)
        .map_err(|e| Error::Geometry(format!("element {t}: {e}")))?;
    let me = side_tables(basis, &rule);
    {
        let a = &mut blocks[0];
        for q in 0..rule.len() {
            let w = rule.weights[q];
            let (ps, dp) = (&me.psi[q * n..(q + 1) * n], &me.dpsi[q * n..(q + 1) * n]);
            let fv = case.body_force(rule.points[q]);
            for i in 0..n {
                rhs[ux(i)] += w * fv[0] * ps[i];
                rhs[uy(i)] += w * fv[1] * ps[i];
                for j in 0..n {
                    let s = w * (dp[i][0] * dp[j][0] + dp[i][1] * dp[j][1]);
                    a[(ux(i), ux(j))] += s;
                    a[(uy(i), uy(j))] += s;
                    // −∫ p ∇·v (momentum) and −∫ q ∇·u (mass)
                    let px = w * ps[j] * dp[i][0];
                    let py = w * ps[j] * dp[i][1];
                    a[(ux(i), pp(j))] -= px;
                    a[(uy(i), pp(j))] -= py;
                    a[(pp(j), ux(i))] -= px;
                    a[(pp(j), uy(i))] -= py;
                }
            }
        }
    }

    for ef in &mesh.element_faces[t] {
        let face = &mesh.faces[ef.face];
        let nrm = mesh.normal_out(*ef);
        let h = mesh.h_f[ef.face];
        let [fa, fb] = mesh.face_points(ef.face);
        let frule = segment_rule(fa, fb, qdeg);
        let nq = frule.len();
        let mine = side_tables(basis, &frule);
        let dn = |s: &Side, q: usize, b: usize| s.dpsi[q * n + b][0] * nrm[0] + s.dpsi[q * n + b][1] * nrm[1];
        match face.tag {
            FaceTag::Interior => {
                let other = mesh.neighbor(t, *ef).unwrap();
                let ob = &bases[other];
                let oth = side_tables(ob, &frule);
                let ci = match cols.iter().position(|&c| c == other) {
                    Some(i) => i,
                    None => {
                        cols.push(other);
                        blocks.push(DMatrix::zeros(bs, bs));
                        cols.len() - 1
                    }
                };
                // lifting moments J^X_Y[m, b] = ∫_F ψ^Y_b ψ^X_m for X, Y ∈ {t, other}
                let mut j_tt = DMatrix::zeros(n, n);
                let mut j_to = DMatrix::zeros(n, n);
                let mut j_ot = DMatrix::zeros(n, n);
                let mut j_oo = DMatrix::zeros(n, n);
                for q in 0..nq {
                    let w = frule.weights[q];
                    for m in 0..n {
                        for b in 0..n {
                            j_tt[(m, b)] += w * mine.psi[q * n + b] * mine.psi[q * n + m];
                            j_to[(m, b)] += w * oth.psi[q * n + b] * mine.psi[q * n + m];
                            j_ot[(m, b)] += w * mine.psi[q * n + b] * oth.psi[q * n + m];
                            j_oo[(m, b)] += w * oth.psi[q * n + b] * oth.psi[q * n + m];
                        }
                    }
                }
                let e4 = 0.25 * eta[ef.face];
                let pen_self = (j_tt.transpose() * &j_tt + j_ot.transpose() * &j_ot) * e4;
                let pen_other = (j_tt.transpose() * &j_to + j_ot.transpose() * &j_oo) * (-e4);
                for q in 0..nq {
                    let w = frule.weights[q];
                    for i in 0..n {
                        let vi = mine.psi[q * n + i];
                        let dvi = dn(&mine, q, i);
                        for j in 0..n {
                            let (ut, uo) = (mine.psi[q * n + j], oth.psi[q * n + j]);
                            let (dut, duo) = (dn(&mine, q, j), dn(&oth, q, j));
                            // −∫ ⟦u⟧ {∇v}n − ∫ {∇u}n ⟦v⟧
                            let s_self = -w * (0.5 * ut * dvi + 0.5 * dut * vi);
                            let s_oth = -w * (-0.5 * uo * dvi + 0.5 * duo * vi);
                            // ∫ {p} v·n and ∫ ⟦u⟧·n {q}
                            let c_self = 0.5 * w * ut * vi;
                            let c_oth = 0.5 * w * uo * vi;
                            let st_self = h * w * ut * vi;
                            let st_oth = h * w * uo * vi;
                            {
                                let a = &mut blocks[0];
                                a[(ux(i), ux(j))] += s_self;
                                a[(uy(i), uy(j))] += s_self;
                                a[(ux(i), pp(j))] += c_self * nrm[0];
                                a[(uy(i), pp(j))] += c_self * nrm[1];
                                a[(pp(i), ux(j))] += c_self * nrm[0];
                                a[(pp(i), uy(j))] += c_self * nrm[1];
                                a[(pp(i), pp(j))] -= st_self;
                            }
                            {
                                let a = &mut blocks[ci];
                                a[(ux(i), ux(j))] += s_oth;
                                a[(uy(i), uy(j))] += s_oth;
                                a[(ux(i), pp(j))] += c_oth * nrm[0];
                                a[(uy(i), pp(j))] += c_oth * nrm[1];
                                a[(pp(i), ux(j))] -= c_oth * nrm[0];
                                a[(pp(i), uy(j))] -= c_oth * nrm[1];
                                a[(pp(i), pp(j))] += st_oth;
                            }
                        }
                    }
                }
                for i in 0..n {
                    for j in 0..n {
                        blocks[0][(ux(i), ux(j))] += pen_self[(i, j)];
                        blocks[0][(uy(i), uy(j))] += pen_self[(i, j)];
                        blocks[ci][(ux(i), ux(j))] += pen_other[(i, j)];
                        blocks[ci][(uy(i), uy(j))] += pen_other[(i, j)];
                    }
                }
            }
            FaceTag::Dirichlet => {
                let mut jm = DMatrix::zeros(n, n);
                let mut jg = DMatrix::zeros(n, 2);
                for q in 0..nq {
                    let w = frule.weights[q];
                    let x = frule.points[q];
                    let g = case.dirichlet(x);
                    let gn = g[0] * nrm[0] + g[1] * nrm[1];
                    for m in 0..n {
                        let pm = mine.psi[q * n + m];
                        jg[(m, 0)] += w * g[0] * pm;
                        jg[(m, 1)] += w * g[1] * pm;
                        for b in 0..n {
                            jm[(m, b)] += w * mine.psi[q * n + b] * pm;
                        }
                    }
                    for i in 0..n {
                        let vi = mine.psi[q * n + i];
                        let dvi = dn(&mine, q, i);
                        rhs[ux(i)] -= w * g[0] * dvi;
                        rhs[uy(i)] -= w * g[1] * dvi;
                        rhs[pp(i)] += w * gn * vi;
                        let a = &mut blocks[0];
                        for j in 0..n {
                            let uj = mine.psi[q * n + j];
                            let s = -w * (uj * dvi + dn(&mine, q, j) * vi);
                            a[(ux(i), ux(j))] += s;
                            a[(uy(i), uy(j))] += s;
                            let c = w * uj * vi;
                            a[(ux(i), pp(j))] += c * nrm[0];
                            a[(uy(i), pp(j))] += c * nrm[1];
                            a[(pp(i), ux(j))] += c * nrm[0];
                            a[(pp(i), uy(j))] += c * nrm[1];
                        }
                    }
                }
                let e = eta[ef.face];
                let pen = jm.transpose() * &jm * e;
                let load = jm.transpose() * &jg * e;
                for i in 0..n {
                    rhs[ux(i)] += load[(i, 0)];
                    rhs[uy(i)] += load[(i, 1)];
                    for j in 0..n {
                        blocks[0][(ux(i), ux(j))] += pen[(i, j)];
                        blocks[0][(uy(i), uy(j))] += pen[(i, j)];
                    }
                }
            }
            FaceTag::Neumann => {
                for q in 0..nq {
                    let w = frule.weights[q];
                    let g = case.neumann(frule.points[q], nrm);
                    for i in 0..n {
                        let vi = mine.psi[q * n + i];
                        rhs[ux(i)] -= w * g[0] * vi;
                        rhs[uy(i)] -= w * g[1] * vi;
                    }
                }
            }
        }
    }
    Ok(DgRows { element: t, cols, blocks, rhs })
}

/// Coefficients [u_x, u_y, p] of the L² projections of the exact fields onto P^k(T).
pub fn dg_interpolate(mesh: &Mesh, basis: &ElementBasis, t: usize, case: &dyn StokesCase) -> Vec<f64> {
    let n = basis.dim();
    let rule = polygon_rule(&mesh.element_vertices(t), mesh.centroid[t], 2 * basis.degree() + 6).expect("element rule");
    let tab = basis.tabulate(&rule, n);
    let mut out = vec![0.0; 3 * n];
    for (q, p) in rule.points.iter().enumerate() {
        let u = case.velocity(*p);
        let pr = case.pressure(*p);
        for b in 0..n {
            let w = rule.weights[q] * tab[q * n + b];
            out[b] += w * u[0];
            out[n + b] += w * u[1];
            out[2 * n + b] += w * pr;
        }
    }
    out
}
