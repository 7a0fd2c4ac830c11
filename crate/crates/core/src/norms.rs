//! Discrete error norms against an exact solution.
//!
//! HHO: velocity and gradient errors use the potential reconstruction of the
//! local unknowns, the divergence error uses the element velocity.
//! DG: broken fields. Pressure errors use the element pressure in all cases.

use crate::basis::ElementBasis;
use crate::dg::dg_bases;
use crate::error::Result;
use crate::hho::HhoElement;
use crate::layout::Scheme;
use crate::mesh::{Mesh, Point};
use crate::par::{try_par_map, Exec};
use crate::problem::StokesCase;
use crate::quadrature::polygon_rule;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ErrorNorms {
    pub e_u: f64,
    pub e_gu: f64,
    pub e_p: f64,
    pub e_du: f64,
}

/// Squared local errors of one element.
#[derive(Clone, Copy, Default)]
struct Local([f64; 4]);

/// Value and gradient of Σ c_i ψ_i at p.
fn eval_field(basis: &ElementBasis, coeffs: &[f64], p: Point, vals: &mut [f64], grads: &mut [[f64; 2]]) -> (f64, [f64; 2]) {
    basis.eval_grad(p, vals, grads);
    let mut v = 0.0;
    let mut g = [0.0; 2];
    for (i, c) in coeffs.iter().enumerate() {
        v += c * vals[i];
        g[0] += c * grads[i][0];
        g[1] += c * grads[i][1];
    }
    (v, g)
}

struct Fields<'a> {
    basis: &'a ElementBasis,
    /// velocity used for e_u and e_Gu, per component
    vel: [&'a [f64]; 2],
    /// velocity used for e_Du, per component
    div_vel: [&'a [f64]; 2],
    press: &'a [f64],
}

fn local_errors(mesh: &Mesh, t: usize, f: &Fields, case: &dyn StokesCase) -> Result<Local> {
    let deg = 2 * f.basis.degree() + 8;
    let rule = polygon_rule(&mesh.element_vertices(t), mesh.centroid[t], deg)?;
    let n = f.basis.dim();
    let mut vals = vec![0.0; n];
    let mut grads = vec![[0.0; 2]; n];
    let mut e = [0.0; 4];
    for (q, p) in rule.points.iter().enumerate() {
        let w = rule.weights[q];
        let u = case.velocity(*p);
        let gu = case.velocity_gradient(*p);
        let mut div = 0.0;
        for c in 0..2 {
            let (v, g) = eval_field(f.basis, f.vel[c], *p, &mut vals, &mut grads);
            e[0] += w * (v - u[c]).powi(2);
            e[1] += w * ((g[0] - gu[c][0]).powi(2) + (g[1] - gu[c][1]).powi(2));
            let (_, gd) = eval_field(f.basis, f.div_vel[c], *p, &mut vals, &mut grads);
            div += gd[c];
        }
        e[3] += w * div * div;
        let (ph, _) = eval_field(f.basis, f.press, *p, &mut vals, &mut grads);
        e[2] += w * (ph - case.pressure(*p)).powi(2);
    }
    Ok(Local(e))
}

fn reduce(locals: Vec<Local>) -> ErrorNorms {
    let mut s = [0.0; 4];
    for l in locals {
        for i in 0..4 {
            s[i] += l.0[i];
        }
    }
    ErrorNorms { e_u: s[0].sqrt(), e_gu: s[1].sqrt(), e_p: s[2].sqrt(), e_du: s[3].sqrt() }
}

/// Error norms of the local solutions returned by `AssembledSystem::local_solutions`.
pub fn error_norms(mesh: &Mesh, scheme: Scheme, k: usize, locals: &[Vec<f64>], case: &dyn StokesCase, exec: Exec) -> Result<ErrorNorms> {
    let parts = match scheme.variant() {
        Some(variant) => try_par_map(exec, mesh.n_elements(), |t| -> Result<Local> {
            let el = HhoElement::new(mesh, t, variant, k)?;
            let sp = el.space;
            let x = &locals[t];
            let rec: Vec<Vec<f64>> = (0..2).map(|c| el.potential_reconstruction(&el.component(x, c))).collect();
            let ne = sp.n_elem;
            let elem: Vec<Vec<f64>> = (0..2).map(|c| x[c * ne..(c + 1) * ne].to_vec()).collect();
            let nu = sp.n_vel();
            let f = Fields {
                basis: &el.basis,
                vel: [&rec[0], &rec[1]],
                div_vel: [&elem[0], &elem[1]],
                press: &x[nu..nu + sp.n_press_elem],
            };
            local_errors(mesh, t, &f, case)
        })?,
        None => {
            let bases = dg_bases(mesh, k)?;
            try_par_map(exec, mesh.n_elements(), |t| -> Result<Local> {
                let n = bases[t].dim();
                let x = &locals[t];
                let f = Fields { basis: &bases[t], vel: [&x[..n], &x[n..2 * n]], div_vel: [&x[..n], &x[n..2 * n]], press: &x[2 * n..3 * n] };
                local_errors(mesh, t, &f, case)
            })?
        }
    };
    Ok(reduce(parts))
}

/// Local unknowns of the interpolant of the exact solution, in the layout
/// of `error_norms`.
pub fn interpolant_locals(mesh: &Mesh, scheme: Scheme, k: usize, case: &dyn StokesCase, exec: Exec) -> Result<Vec<Vec<f64>>> {
    match scheme.variant() {
        Some(variant) => try_par_map(exec, mesh.n_elements(), |t| -> Result<Vec<f64>> {
            let el = HhoElement::new(mesh, t, variant, k)?;
            let mut x = el.interpolate_velocity(|p| case.velocity(p));
            x.extend(el.interpolate_pressure(|p| case.pressure(p)));
            Ok(x)
        }),
        None => {
            let bases = dg_bases(mesh, k)?;
            Ok((0..mesh.n_elements()).map(|t| crate::dg::dg_interpolate(mesh, &bases[t], t, case)).collect())
        }
    }
}

/// Rate log(e_c/e_f)/log(h_c/h_f); `None` when either error is at round-off level.
pub fn rate(e_coarse: f64, e_fine: f64, h_coarse: f64, h_fine: f64, scale: f64) -> Option<f64> {
    let floor = 1e2 * f64::EPSILON * scale.max(f64::MIN_POSITIVE);
    if e_coarse <= floor || e_fine <= floor || h_coarse == h_fine {
        return None;
    }
    Some((e_coarse / e_fine).ln() / (h_coarse / h_fine).ln())
}
