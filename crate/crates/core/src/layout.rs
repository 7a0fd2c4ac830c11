//! Global numbering of the retained unknowns and DOF/MNZ counting.
//!
//! Face blocks come first (face f occupies [f·face_block, (f+1)·face_block)),
//! followed by one block per element. Within a block unknowns are grouped by
//! field (velocity x, velocity y, pressure) and, inside a field, by mode.

use std::collections::HashSet;

use crate::basis::{dim_p1, dim_p2};
use crate::condense::Strategy;
use crate::error::{Error, Result};
use crate::hho::HhoVariant;
use crate::mesh::Mesh;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    HhoDp,
    HhoHp,
    Dg,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::HhoDp => "hho-dp",
            Scheme::HhoHp => "hho-hp",
            Scheme::Dg => "dg",
        }
    }

    pub fn variant(&self) -> Option<HhoVariant> {
        match self {
            Scheme::HhoDp => Some(HhoVariant::Dp),
            Scheme::HhoHp => Some(HhoVariant::Hp),
            Scheme::Dg => None,
        }
    }

    /// Strategy actually used for this scheme: hp always condenses fully and
    /// DG has no condensation.
    pub fn effective_strategy(&self, requested: Strategy) -> Result<Option<Strategy>> {
        match (self, requested) {
            (Scheme::HhoDp, Strategy::HpFull) => Err(Error::Config("hp-full condensation needs hho-hp".into())),
            (Scheme::HhoDp, s) => Ok(Some(s)),
            (Scheme::HhoHp, _) => Ok(Some(Strategy::HpFull)),
            (Scheme::Dg, _) => Ok(None),
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hho-dp" => Ok(Scheme::HhoDp),
            "hho-hp" => Ok(Scheme::HhoHp),
            "dg" => Ok(Scheme::Dg),
            _ => Err(Error::Config(format!("unknown scheme `{s}` (hho-dp, hho-hp, dg)"))),
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uncond" => Ok(Strategy::Uncond),
            "v-cond" => Ok(Strategy::VCond),
            "vp-cond" | "v&p-cond" => Ok(Strategy::VpCond),
            "hp-full" => Ok(Strategy::HpFull),
            _ => Err(Error::Config(format!("unknown strategy `{s}` (uncond, v-cond, vp-cond)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FieldKind {
    VelX,
    VelY,
    Press,
}

/// Polynomial space of a field: face P^k, element P^k, or a single constant mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Modes {
    Face(usize),
    Elem(usize),
    Const,
}

impl Modes {
    pub fn dim(&self) -> usize {
        match self {
            Modes::Face(k) => dim_p1(*k),
            Modes::Elem(k) => dim_p2(*k),
            Modes::Const => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Field {
    pub kind: FieldKind,
    pub modes: Modes,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DofLayout {
    pub scheme: Scheme,
    pub strategy: Option<Strategy>,
    pub k: usize,
    pub n_faces: usize,
    pub n_elements: usize,
    pub face_fields: Vec<Field>,
    pub elem_fields: Vec<Field>,
    pub face_block: usize,
    pub elem_block: usize,
}

impl DofLayout {
    pub fn new(scheme: Scheme, strategy: Strategy, k: usize, n_faces: usize, n_elements: usize) -> Result<Self> {
        let strategy = scheme.effective_strategy(strategy)?;
        let f = |kind, modes| Field { kind, modes };
        use FieldKind::*;
        let (face_fields, elem_fields) = match (scheme, strategy) {
            (Scheme::Dg, _) => {
                if k == 0 {
                    return Err(Error::Config("DG requires k ≥ 1".into()));
                }
                (vec![], vec![f(VelX, Modes::Elem(k)), f(VelY, Modes::Elem(k)), f(Press, Modes::Elem(k))])
            }
            (Scheme::HhoHp, _) => (vec![f(VelX, Modes::Face(k)), f(VelY, Modes::Face(k)), f(Press, Modes::Face(k))], vec![]),
            (Scheme::HhoDp, Some(s)) => {
                let fv = vec![f(VelX, Modes::Face(k)), f(VelY, Modes::Face(k))];
                let ev = match s {
                    Strategy::Uncond => vec![f(VelX, Modes::Elem(k)), f(VelY, Modes::Elem(k)), f(Press, Modes::Elem(k))],
                    Strategy::VCond => vec![f(Press, Modes::Elem(k))],
                    Strategy::VpCond => vec![f(Press, Modes::Const)],
                    Strategy::HpFull => unreachable!(),
                };
                (fv, ev)
            }
            (Scheme::HhoDp, None) => unreachable!(),
        };
        let face_block = face_fields.iter().map(|x| x.modes.dim()).sum();
        let elem_block = elem_fields.iter().map(|x| x.modes.dim()).sum();
        Ok(Self { scheme, strategy, k, n_faces, n_elements, face_fields, elem_fields, face_block, elem_block })
    }

    pub fn for_mesh(mesh: &Mesh, scheme: Scheme, strategy: Strategy, k: usize) -> Result<Self> {
        Self::new(scheme, strategy, k, mesh.n_faces(), mesh.n_elements())
    }

    /// Same scheme and strategy at another face degree.
    pub fn at_degree(&self, k: usize) -> Result<Self> {
        Self::new(self.scheme, self.strategy.unwrap_or(Strategy::Uncond), k, self.n_faces, self.n_elements)
    }

    pub fn n_dofs(&self) -> usize {
        self.n_faces * self.face_block + self.n_elements * self.elem_block
    }

    pub fn face_offset(&self, f: usize) -> usize {
        f * self.face_block
    }

    pub fn elem_offset(&self, t: usize) -> usize {
        self.n_faces * self.face_block + t * self.elem_block
    }

    /// Offset of the field of kind `kind` inside a face or element block.
    pub fn field_offset(fields: &[Field], kind: FieldKind) -> Option<usize> {
        let mut off = 0;
        for f in fields {
            if f.kind == kind {
                return Some(off);
            }
            off += f.modes.dim();
        }
        None
    }

    /// Field kind of every position inside a face and an element block.
    pub fn block_kinds(fields: &[Field]) -> Vec<FieldKind> {
        fields.iter().flat_map(|f| std::iter::repeat_n(f.kind, f.modes.dim())).collect()
    }

    /// Whether unknowns of kinds a and b may couple in the global matrix:
    /// velocity couplings are component-diagonal except for v&p and hybrid
    /// pressure condensation, where the face blocks fill in.
    pub fn couples(&self, a: FieldKind, b: FieldKind) -> bool {
        let full = matches!(self.strategy, Some(Strategy::VpCond) | Some(Strategy::HpFull));
        if full {
            return true;
        }
        match (a, b) {
            (FieldKind::Press, _) | (_, FieldKind::Press) => true,
            (x, y) => x == y,
        }
    }

    /// Fine index of every coarse unknown: coarse modes are the leading modes
    /// of the corresponding fine field. `self` is the fine layout.
    pub fn coarse_map(&self, coarse: &DofLayout) -> Result<Vec<usize>> {
        if coarse.scheme != self.scheme || coarse.strategy != self.strategy || coarse.k > self.k {
            return Err(Error::Config("incompatible coarse layout".into()));
        }
        let mut map = Vec::with_capacity(coarse.n_dofs());
        let mut push = |fine_fields: &[Field], coarse_fields: &[Field], fine_off: usize| {
            let mut fo = fine_off;
            for (ff, cf) in fine_fields.iter().zip(coarse_fields) {
                for m in 0..cf.modes.dim() {
                    map.push(fo + m);
                }
                fo += ff.modes.dim();
            }
        };
        for f in 0..self.n_faces {
            push(&self.face_fields, &coarse.face_fields, self.face_offset(f));
        }
        for t in 0..self.n_elements {
            push(&self.elem_fields, &coarse.elem_fields, self.elem_offset(t));
        }
        Ok(map)
    }

    /// Entities coupled through the matrix: entity ids are faces 0..nF and elements nF + t.
    fn coupled_entities(&self, mesh: &Mesh) -> HashSet<(usize, usize)> {
        let nf = mesh.n_faces();
        let mut set = HashSet::new();
        for t in 0..mesh.n_elements() {
            let mut ents: Vec<usize> = Vec::new();
            if self.scheme == Scheme::Dg {
                ents.push(nf + t);
                for ef in &mesh.element_faces[t] {
                    if let Some(o) = mesh.neighbor(t, *ef) {
                        ents.push(nf + o);
                    }
                }
                for &e in &ents {
                    set.insert((nf + t, e));
                }
                continue;
            }
            ents.extend(mesh.element_faces[t].iter().map(|ef| ef.face));
            if self.elem_block > 0 {
                ents.push(nf + t);
            }
            for &a in &ents {
                for &b in &ents {
                    set.insert((a, b));
                }
            }
        }
        set
    }

    fn block_nnz(&self, ka: &[FieldKind], kb: &[FieldKind]) -> usize {
        let mut n = 0;
        for &a in ka {
            for &b in kb {
                if self.couples(a, b) {
                    n += 1;
                }
            }
        }
        n
    }

    /// Number of stored nonzeros of the global matrix, counted symbolically.
    pub fn count_mnz(&self, mesh: &Mesh) -> usize {
        let nf = mesh.n_faces();
        let fk = Self::block_kinds(&self.face_fields);
        let ek = Self::block_kinds(&self.elem_fields);
        let kinds = |e: usize| if e < nf { &fk } else { &ek };
        self.coupled_entities(mesh).into_iter().map(|(a, b)| self.block_nnz(kinds(a), kinds(b))).sum()
    }

    /// Global sparsity pattern (sorted column lists per row).
    pub fn pattern(&self, mesh: &Mesh) -> Vec<Vec<usize>> {
        let nf = mesh.n_faces();
        let fk = Self::block_kinds(&self.face_fields);
        let ek = Self::block_kinds(&self.elem_fields);
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); self.n_dofs()];
        let range = |e: usize| -> (usize, &Vec<FieldKind>) {
            if e < nf {
                (self.face_offset(e), &fk)
            } else {
                (self.elem_offset(e - nf), &ek)
            }
        };
        for (a, b) in self.coupled_entities(mesh) {
            let (oa, ka) = range(a);
            let (ob, kb) = range(b);
            for (i, &x) in ka.iter().enumerate() {
                for (j, &y) in kb.iter().enumerate() {
                    if self.couples(x, y) {
                        rows[oa + i].push(ob + j);
                    }
                }
            }
        }
        for r in rows.iter_mut() {
            r.sort_unstable();
        }
        rows
    }
}

/// Closed-form matrix dimension from entity counts.
pub fn formula_dofs(scheme: Scheme, strategy: Strategy, k: usize, n_faces: usize, n_elements: usize) -> Result<usize> {
    Ok(DofLayout::new(scheme, strategy, k, n_faces, n_elements)?.n_dofs())
}

/// Closed-form nonzero estimate from entity counts (reported next to the
/// actual count, which is authoritative).
pub fn formula_mnz(mesh: &Mesh, scheme: Scheme, strategy: Strategy, k: usize) -> Result<usize> {
    let d = 2usize;
    let (p, q) = (dim_p2(k), dim_p1(k));
    let nt = mesh.n_elements();
    let sum_ft: usize = mesh.element_faces.iter().map(|f| f.len()).sum();
    let tf = |f: &crate::mesh::Face| if f.right.is_some() { 2 } else { 1 };
    let sum_tf: usize = mesh.faces.iter().map(tf).sum();
    let sum_2tf: usize = mesh.faces.iter().map(|f| 2 * tf(f) - 1).sum();
    let v = match (scheme, scheme.effective_strategy(strategy)?) {
        (Scheme::Dg, _) => mesh.element_faces.iter().map(|f| (f.len() + 1) * (3 * d + 1) * p * p).sum(),
        (Scheme::HhoHp, _) => sum_2tf * (d + 1) * (d + 1) * q * q,
        (Scheme::HhoDp, Some(Strategy::Uncond)) => nt * (d + 1) * p * p + sum_ft * d * d * p * q + sum_tf * d * d * p * q + sum_2tf * d * q * q,
        (Scheme::HhoDp, Some(Strategy::VpCond)) => nt + sum_ft * d * p + sum_2tf * d * d * q * q + sum_tf * d * q,
        (Scheme::HhoDp, _) => nt * p * p + sum_ft * d * p * q + sum_tf * d * p * q + sum_2tf * d * q * q,
    };
    Ok(v)
}

/// card F_h / card T_h next to (k+d)/d, the break-even ratio for face unknowns.
pub fn face_element_ratios(mesh: &Mesh, k: usize) -> (f64, f64) {
    (mesh.n_faces() as f64 / mesh.n_elements() as f64, (k + 2) as f64 / 2.0)
}
