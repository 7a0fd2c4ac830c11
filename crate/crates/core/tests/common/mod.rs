//! Explicit transfer matrices built by quadrature, used as oracles for the
//! matrix-free transfers and the sub-block operator inheritance.

#![allow(dead_code)]

use hho_sparse::CsrMatrix;
use hho_stokes::assembly::{assemble, AssemblyOptions};
use hho_stokes::basis::{ElementBasis, FaceBasis};
use hho_stokes::condense::Strategy;
use hho_stokes::layout::{DofLayout, Field, Modes, Scheme};
use hho_stokes::mesh::Mesh;
use hho_stokes::problem::StokesCase;
use hho_stokes::quadrature::{polygon_rule, segment_rule};
use nalgebra::DMatrix;

pub fn dense(a: &CsrMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(a.n(), a.n(), &a.to_dense())
}

/// max |a - b| / max |b|
pub fn rel_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    (a - b).amax() / b.amax().max(f64::MIN_POSITIVE)
}

/// Gram matrix G[i][j] = ∫_T φ_i^fine φ_j^coarse: fine coefficients of the coarse functions.
fn element_transfer(mesh: &Mesh, t: usize, fine: Modes, coarse: Modes) -> DMatrix<f64> {
    let deg = |m: Modes| match m {
        Modes::Elem(k) => k,
        Modes::Const => 0,
        Modes::Face(_) => unreachable!(),
    };
    let (kf, kc) = (deg(fine), deg(coarse));
    let bf = ElementBasis::for_element(mesh, t, kf).unwrap();
    let bc = ElementBasis::for_element(mesh, t, kc).unwrap();
    let rule = polygon_rule(&mesh.element_vertices(t), mesh.centroid[t], kf + kc + 2).unwrap();
    let (mf, mc) = (fine.dim(), coarse.dim());
    let tf = bf.tabulate(&rule, mf);
    let tc = bc.tabulate(&rule, mc);
    DMatrix::from_fn(mf, mc, |i, j| (0..rule.len()).map(|q| rule.weights[q] * tf[q * mf + i] * tc[q * mc + j]).sum())
}

fn face_transfer(mesh: &Mesh, f: usize, fine: Modes, coarse: Modes) -> DMatrix<f64> {
    let (Modes::Face(kf), Modes::Face(kc)) = (fine, coarse) else { unreachable!() };
    let [a, b] = mesh.face_points(f);
    let (bf, bc) = (FaceBasis::new(a, b, kf), FaceBasis::new(a, b, kc));
    let rule = segment_rule(a, b, kf + kc + 2);
    let (mf, mc) = (fine.dim(), coarse.dim());
    let tf = bf.tabulate(&rule, mf);
    let tc = bc.tabulate(&rule, mc);
    DMatrix::from_fn(mf, mc, |i, j| (0..rule.len()).map(|q| rule.weights[q] * tf[q * mf + i] * tc[q * mc + j]).sum())
}

/// Explicit prolongation from a space with the given coarse fields (same
/// kinds as the fine layout, blocked like a layout) into the fine layout.
pub fn explicit_prolongation(mesh: &Mesh, fine: &DofLayout, coarse_face: &[Field], coarse_elem: &[Field]) -> DMatrix<f64> {
    let cfb: usize = coarse_face.iter().map(|f| f.modes.dim()).sum();
    let ceb: usize = coarse_elem.iter().map(|f| f.modes.dim()).sum();
    let nc = mesh.n_faces() * cfb + mesh.n_elements() * ceb;
    let mut p = DMatrix::zeros(fine.n_dofs(), nc);
    let mut place = |r0: usize, c0: usize, fine_fields: &[Field], coarse_fields: &[Field], g: &dyn Fn(Modes, Modes) -> DMatrix<f64>| {
        let (mut r, mut c) = (r0, c0);
        for (ff, cf) in fine_fields.iter().zip(coarse_fields) {
            assert_eq!(ff.kind, cf.kind);
            let block = g(ff.modes, cf.modes);
            p.view_mut((r, c), block.shape()).copy_from(&block);
            r += ff.modes.dim();
            c += cf.modes.dim();
        }
    };
    for f in 0..mesh.n_faces() {
        place(fine.face_offset(f), f * cfb, &fine.face_fields, coarse_face, &|a, b| face_transfer(mesh, f, a, b));
    }
    for t in 0..mesh.n_elements() {
        let c0 = mesh.n_faces() * cfb + t * ceb;
        place(fine.elem_offset(t), c0, &fine.elem_fields, coarse_elem, &|a, b| element_transfer(mesh, t, a, b));
    }
    p
}

/// Prolongation between two layouts of the same scheme and strategy.
pub fn layout_prolongation(mesh: &Mesh, fine: &DofLayout, coarse: &DofLayout) -> DMatrix<f64> {
    explicit_prolongation(mesh, fine, &coarse.face_fields, &coarse.elem_fields)
}

/// Schur complement of `a` on `keep`, eliminating the remaining indices.
pub fn schur(a: &DMatrix<f64>, keep: &[usize]) -> DMatrix<f64> {
    let elim: Vec<usize> = (0..a.nrows()).filter(|i| !keep.contains(i)).collect();
    let sub = |r: &[usize], c: &[usize]| DMatrix::from_fn(r.len(), c.len(), |i, j| a[(r[i], c[j])]);
    let (akk, ake, aek, aee) = (sub(keep, keep), sub(keep, &elim), sub(&elim, keep), sub(&elim, &elim));
    akk - ake * aee.lu().solve(&aek).expect("element velocity block is invertible")
}

/// dp v-cond operator at degree kc obtained as R A P from the uncondensed
/// degree-k operator (faces and pressure projected to kc by quadrature,
/// element velocity kept at degree k) followed by dense elimination of the
/// element velocity. Rows and columns follow the v-cond layout at kc.
pub fn galerkin_vcond_oracle(mesh: &Mesh, k: usize, kc: usize, case: &dyn StokesCase) -> DMatrix<f64> {
    let sys = assemble(mesh, Scheme::HhoDp, Strategy::Uncond, k, case, &AssemblyOptions::default()).unwrap();
    let fine = &sys.layout;
    let coarse = fine.at_degree(kc).unwrap();
    let mut elem = coarse.elem_fields.clone();
    elem[0].modes = Modes::Elem(k);
    elem[1].modes = Modes::Elem(k);
    let p = explicit_prolongation(mesh, fine, &coarse.face_fields, &elem);
    let ac = p.transpose() * dense(&sys.matrix) * &p;
    let cfb = coarse.face_block;
    let (nv, np) = (elem[0].modes.dim(), elem[2].modes.dim());
    let ceb = 2 * nv + np;
    let nf = mesh.n_faces() * cfb;
    let mut keep: Vec<usize> = (0..nf).collect();
    for t in 0..mesh.n_elements() {
        keep.extend((0..np).map(|m| nf + t * ceb + 2 * nv + m));
    }
    schur(&ac, &keep)
}
