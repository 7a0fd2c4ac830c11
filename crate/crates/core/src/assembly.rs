//! Global assembly: per-element local systems (condensed for HHO) scattered
//! into a CSR matrix whose pattern comes from the DOF layout.

use hho_sparse::CsrMatrix;

use crate::condense::{condense_element, CondensedElement};
use crate::dg::{default_face_penalty, dg_bases, dg_element_rows};
use crate::error::{Error, Result};
use crate::hho::{default_penalty, HhoElement, HhoLocalSpace, HhoVariant};
use crate::layout::{DofLayout, FieldKind, Scheme};
use crate::mesh::Mesh;
use crate::par::{try_par_map, Exec};
use crate::problem::StokesCase;
use crate::condense::Strategy;

#[derive(Clone, Debug, PartialEq)]
pub struct AssemblyOptions {
    /// HHO Dirichlet penalty; `None` selects the degree-dependent default.
    pub hho_penalty: Option<f64>,
    /// Uniform BR2 penalty; `None` selects max card F_T + 1 per face.
    pub dg_penalty: Option<f64>,
    pub exec: Exec,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self { hho_penalty: None, dg_penalty: None, exec: Exec::default() }
    }
}

/// Condensation data of one HHO element and the global index of every retained unknown.
#[derive(Clone, Debug)]
pub struct ElementRecovery {
    pub cond: CondensedElement,
    pub globals: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct AssembledSystem {
    pub layout: DofLayout,
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// per element, HHO only
    pub recovery: Vec<ElementRecovery>,
    /// largest local contribution that fell outside the symbolic pattern
    pub dropped: f64,
}

/// Global index of every local HHO unknown ([u; p] ordering) of element t,
/// `None` for unknowns that are condensed out.
pub fn hho_local_to_global(layout: &DofLayout, mesh: &Mesh, t: usize, space: &HhoLocalSpace) -> Vec<Option<usize>> {
    let nu = space.n_vel();
    let (ne, nf) = (space.n_elem, space.n_face);
    let strategy = layout.strategy.unwrap_or(Strategy::Uncond);
    let eo = layout.elem_offset(t);
    let mut out = vec![None; nu + space.n_press()];
    for comp in 0..2 {
        for b in 0..ne {
            if strategy == Strategy::Uncond {
                out[space.elem_vel(comp, b)] = Some(eo + comp * ne + b);
            }
        }
    }
    let press_field = DofLayout::field_offset(&layout.face_fields, FieldKind::Press);
    for (j, ef) in mesh.element_faces[t].iter().enumerate() {
        let fo = layout.face_offset(ef.face);
        for comp in 0..2 {
            for m in 0..nf {
                out[space.face_vel(j, comp, m)] = Some(fo + comp * nf + m);
            }
        }
        if let (HhoVariant::Hp, Some(po)) = (space.variant, press_field) {
            for m in 0..nf {
                out[nu + space.face_press(j, m)] = Some(fo + po + m);
            }
        }
    }
    for q in 0..space.n_press_elem {
        out[nu + q] = match strategy {
            Strategy::Uncond => Some(eo + 2 * ne + q),
            Strategy::VCond => Some(eo + q),
            Strategy::VpCond if q == 0 => Some(eo),
            _ => None,
        };
    }
    out
}

fn scatter(m: &mut CsrMatrix, rows: &[usize], cols: &[usize], vals: impl Fn(usize, usize) -> f64, dropped: &mut f64) {
    for (a, &i) in rows.iter().enumerate() {
        for (b, &j) in cols.iter().enumerate() {
            let v = vals(a, b);
            match m.position(i, j) {
                Some(p) => m.data_mut()[p] += v,
                None => *dropped = dropped.max(v.abs()),
            }
        }
    }
}

/// Assembles the global system for `scheme`/`strategy` at face degree k.
pub fn assemble(mesh: &Mesh, scheme: Scheme, strategy: Strategy, k: usize, case: &dyn StokesCase, opts: &AssemblyOptions) -> Result<AssembledSystem> {
    let layout = DofLayout::for_mesh(mesh, scheme, strategy, k)?;
    let mut matrix = CsrMatrix::from_pattern(layout.n_dofs(), layout.pattern(mesh))?;
    let mut rhs = vec![0.0; layout.n_dofs()];
    let mut dropped: f64 = 0.0;
    let mut recovery = Vec::new();
    match scheme.variant() {
        Some(variant) => {
            let eta = opts.hho_penalty.unwrap_or_else(|| default_penalty(k));
            if !(eta > 0.0) {
                return Err(Error::Config(format!("penalty must be positive, got {eta}")));
            }
            let strat = layout.strategy.unwrap_or(Strategy::Uncond);
            let locals = try_par_map(opts.exec, mesh.n_elements(), |t| -> Result<ElementRecovery> {
                let el = HhoElement::new(mesh, t, variant, k)?;
                let blocks = el.blocks(case, eta)?;
                let cond = condense_element(&blocks, &el.space, strat, t)?;
                let l2g = hho_local_to_global(&layout, mesh, t, &el.space);
                let globals = cond
                    .retained
                    .iter()
                    .map(|&l| l2g[l].ok_or_else(|| Error::Config(format!("retained local unknown {l} of element {t} has no global index"))))
                    .collect::<Result<Vec<_>>>()?;
                Ok(ElementRecovery { cond, globals })
            })?;
            for r in &locals {
                scatter(&mut matrix, &r.globals, &r.globals, |a, b| r.cond.schur[(a, b)], &mut dropped);
                for (a, &g) in r.globals.iter().enumerate() {
                    rhs[g] += r.cond.rhs[a];
                }
            }
            recovery = locals;
        }
        None => {
            let bases = dg_bases(mesh, k)?;
            let eta = match opts.dg_penalty {
                Some(v) => vec![v; mesh.n_faces()],
                None => default_face_penalty(mesh),
            };
            let rows = try_par_map(opts.exec, mesh.n_elements(), |t| dg_element_rows(mesh, &bases, t, &eta, case))?;
            let bs = layout.elem_block;
            for r in &rows {
                let ri: Vec<usize> = (0..bs).map(|a| layout.elem_offset(r.element) + a).collect();
                for (c, blk) in r.cols.iter().zip(&r.blocks) {
                    let ci: Vec<usize> = (0..bs).map(|b| layout.elem_offset(*c) + b).collect();
                    scatter(&mut matrix, &ri, &ci, |a, b| blk[(a, b)], &mut dropped);
                }
                for (a, &g) in ri.iter().enumerate() {
                    rhs[g] += r.rhs[a];
                }
            }
        }
    }
    let scale = matrix.max_abs().max(f64::MIN_POSITIVE);
    if dropped > 1e-10 * scale {
        return Err(Error::Config(format!("assembly dropped an entry of size {dropped:e} outside the symbolic pattern")));
    }
    Ok(AssembledSystem { layout, matrix, rhs, recovery, dropped })
}

impl AssembledSystem {
    /// Full local solution per element: HHO [u; p] in the local ordering
    /// (eliminated unknowns recovered), DG [u_x, u_y, p] coefficients.
    pub fn local_solutions(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        if x.len() != self.layout.n_dofs() {
            return Err(Error::Config(format!("solution has length {}, expected {}", x.len(), self.layout.n_dofs())));
        }
        if self.layout.scheme == Scheme::Dg {
            let bs = self.layout.elem_block;
            return Ok((0..self.layout.n_elements).map(|t| x[self.layout.elem_offset(t)..self.layout.elem_offset(t) + bs].to_vec()).collect());
        }
        self.recovery
            .iter()
            .map(|r| {
                let ret: Vec<f64> = r.globals.iter().map(|&g| x[g]).collect();
                r.cond.recover(&ret)
            })
            .collect()
    }
}
