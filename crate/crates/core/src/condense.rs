//! Static condensation of element unknowns and their local recovery.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hho::{HhoLocalSpace, HhoVariant, LocalStokesBlocks};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// no elimination
    Uncond,
    /// eliminate element velocities
    VCond,
    /// eliminate element velocities and all element pressure modes but the mean
    VpCond,
    /// eliminate element velocities and element pressures (hybrid pressure)
    HpFull,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Uncond => "uncond",
            Strategy::VCond => "v-cond",
            Strategy::VpCond => "vp-cond",
            Strategy::HpFull => "hp-full",
        }
    }
}

/// Local indices (in the [u; p] ordering) eliminated by `strategy`.
pub fn eliminated_set(space: &HhoLocalSpace, strategy: Strategy) -> Result<Vec<usize>> {
    let nu = space.n_vel();
    let ue: Vec<usize> = (0..2 * space.n_elem).collect();
    let set = match (space.variant, strategy) {
        (HhoVariant::Dp, Strategy::Uncond) => vec![],
        (HhoVariant::Dp, Strategy::VCond) => ue,
        (HhoVariant::Dp, Strategy::VpCond) => ue.into_iter().chain((1..space.n_press_elem).map(|q| nu + q)).collect(),
        (HhoVariant::Hp, Strategy::HpFull) => ue.into_iter().chain((0..space.n_press_elem).map(|q| nu + q)).collect(),
        (v, s) => return Err(Error::Config(format!("strategy {} is not available for {v:?}", s.name()))),
    };
    Ok(set)
}

/// Result of condensing one element.
#[derive(Clone, Debug)]
pub struct CondensedElement {
    pub n_local: usize,
    pub retained: Vec<usize>,
    pub eliminated: Vec<usize>,
    pub schur: DMatrix<f64>,
    pub rhs: DVector<f64>,
    /// M_EE⁻¹ M_ER
    pub elim_op: DMatrix<f64>,
    /// M_EE⁻¹ b_E
    pub elim_rhs: DVector<f64>,
}

/// Schur complement of a dense local system on the complement of `eliminated`.
pub fn condense_dense(m: &DMatrix<f64>, b: &DVector<f64>, eliminated: &[usize], element: usize, what: &str) -> Result<CondensedElement> {
    let n = m.nrows();
    let mut is_e = vec![false; n];
    for &e in eliminated {
        is_e[e] = true;
    }
    let retained: Vec<usize> = (0..n).filter(|&i| !is_e[i]).collect();
    let (ne, nr) = (eliminated.len(), retained.len());
    let sub = |rows: &[usize], cols: &[usize]| DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])]);
    let m_rr = sub(&retained, &retained);
    let b_r = DVector::from_fn(nr, |i, _| b[retained[i]]);
    if ne == 0 {
        return Ok(CondensedElement {
            n_local: n,
            retained,
            eliminated: vec![],
            schur: m_rr,
            rhs: b_r,
            elim_op: DMatrix::zeros(0, nr),
            elim_rhs: DVector::zeros(0),
        });
    }
    let m_ee = sub(eliminated, eliminated);
    let m_er = sub(eliminated, &retained);
    let m_re = sub(&retained, eliminated);
    let b_e = DVector::from_fn(ne, |i, _| b[eliminated[i]]);
    let lu = m_ee.lu();
    let u = lu.u();
    let dmax = u.diagonal().amax();
    let dmin = u.diagonal().iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
    if !(dmin > 1e-13 * dmax) {
        return Err(Error::SingularLocal { element, what: what.into() });
    }
    let elim_op = lu.solve(&m_er).ok_or_else(|| Error::SingularLocal { element, what: what.into() })?;
    let elim_rhs = lu.solve(&b_e).ok_or_else(|| Error::SingularLocal { element, what: what.into() })?;
    let schur = m_rr - &m_re * &elim_op;
    let rhs = b_r - &m_re * &elim_rhs;
    Ok(CondensedElement { n_local: n, retained, eliminated: eliminated.to_vec(), schur, rhs, elim_op, elim_rhs })
}

pub fn condense_element(blocks: &LocalStokesBlocks, space: &HhoLocalSpace, strategy: Strategy, element: usize) -> Result<CondensedElement> {
    let elim = eliminated_set(space, strategy)?;
    condense_dense(&blocks.full_matrix(), &blocks.full_rhs(), &elim, element, strategy.name())
}

impl CondensedElement {
    /// Full local solution from the retained values.
    pub fn recover(&self, retained: &[f64]) -> Result<Vec<f64>> {
        if retained.len() != self.retained.len() {
            return Err(Error::Config(format!("expected {} retained values, got {}", self.retained.len(), retained.len())));
        }
        let mut x = vec![0.0; self.n_local];
        for (i, &r) in self.retained.iter().enumerate() {
            x[r] = retained[i];
        }
        if !self.eliminated.is_empty() {
            let xe = &self.elim_rhs - &self.elim_op * DVector::from_column_slice(retained);
            for (i, &e) in self.eliminated.iter().enumerate() {
                x[e] = xe[i];
            }
        }
        Ok(x)
    }

    /// Per-element nonzero count of the Schur complement, and whether the
    /// face–face velocity couplings between different components vanish.
    pub fn sparsity_signature(&self, space: &HhoLocalSpace) -> (usize, bool) {
        let nnz = self.schur.iter().filter(|v| **v != 0.0).count();
        let nu = space.n_vel();
        let comp_of = |l: usize| -> Option<usize> {
            if l < 2 * space.n_elem || l >= nu {
                return None;
            }
            Some(((l - 2 * space.n_elem) % (2 * space.n_face)) / space.n_face)
        };
        let mut diag = true;
        for (i, &ri) in self.retained.iter().enumerate() {
            for (j, &rj) in self.retained.iter().enumerate() {
                if let (Some(a), Some(b)) = (comp_of(ri), comp_of(rj)) {
                    if a != b && self.schur[(i, j)] != 0.0 {
                        diag = false;
                    }
                }
            }
        }
        (nnz, diag)
    }
}
