//! Element-local HHO operators for the Stokes problem.
//!
//! Scalar local unknowns are ordered [v_T (n_elem), v_F1 (n_face), v_F2, ...].
//! Vector unknowns are ordered [v_T x, v_T y, F1 x, F1 y, F2 x, F2 y, ...] and
//! pressure unknowns as [p_T] (dp) or [p_T, p_F1, p_F2, ...] (hp).

use nalgebra::{DMatrix, DVector};

use crate::basis::{dim_p1, dim_p2, ElementBasis, FaceBasis};
use crate::error::{Error, Result};
use crate::mesh::{FaceTag, Mesh, Point};
use crate::problem::StokesCase;
use crate::quadrature::{polygon_rule, segment_rule, QuadratureRule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HhoVariant {
    /// discontinuous pressure, element degree k
    Dp,
    /// hybrid pressure, element degree k+1
    Hp,
}

/// Default Dirichlet penalty for face degree k.
pub fn default_penalty(k: usize) -> f64 {
    3.0 * ((k + 1) * (k + 1)) as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HhoLocalSpace {
    pub variant: HhoVariant,
    pub k: usize,
    pub k_elem: usize,
    /// element velocity modes per component
    pub n_elem: usize,
    /// face modes per component (velocity and face pressure)
    pub n_face: usize,
    pub n_faces: usize,
    /// element pressure modes
    pub n_press_elem: usize,
}

impl HhoLocalSpace {
    pub fn new(variant: HhoVariant, k: usize, n_faces: usize) -> Self {
        let k_elem = match variant {
            HhoVariant::Dp => k,
            HhoVariant::Hp => k + 1,
        };
        Self { variant, k, k_elem, n_elem: dim_p2(k_elem), n_face: dim_p1(k), n_faces, n_press_elem: dim_p2(k) }
    }

    pub fn n_scalar(&self) -> usize {
        self.n_elem + self.n_faces * self.n_face
    }

    pub fn n_vel(&self) -> usize {
        2 * self.n_scalar()
    }

    pub fn n_press(&self) -> usize {
        match self.variant {
            HhoVariant::Dp => self.n_press_elem,
            HhoVariant::Hp => self.n_press_elem + self.n_faces * self.n_face,
        }
    }

    pub fn elem_vel(&self, comp: usize, mode: usize) -> usize {
        comp * self.n_elem + mode
    }

    pub fn face_vel(&self, j: usize, comp: usize, mode: usize) -> usize {
        2 * self.n_elem + j * 2 * self.n_face + comp * self.n_face + mode
    }

    pub fn face_press(&self, j: usize, mode: usize) -> usize {
        self.n_press_elem + j * self.n_face + mode
    }

    /// Position of a scalar unknown in the vector layout for component `comp`.
    pub fn scalar_to_vector(&self, comp: usize, s: usize) -> usize {
        if s < self.n_elem {
            self.elem_vel(comp, s)
        } else {
            let r = s - self.n_elem;
            self.face_vel(r / self.n_face, comp, r % self.n_face)
        }
    }
}

/// Precomputed tables on one face of an element.
#[derive(Clone, Debug)]
pub struct FaceLocal {
    pub face: usize,
    pub tag: FaceTag,
    /// outward normal of the element
    pub normal: Point,
    pub h: f64,
    pub rule: QuadratureRule,
    pub basis: FaceBasis,
    /// element basis values (nq × n_rec)
    pub psi: Vec<f64>,
    /// element basis gradients (nq × n_rec)
    pub dpsi: Vec<[f64; 2]>,
    /// face basis values (nq × n_face)
    pub phi: Vec<f64>,
}

/// Dense per-element blocks of the local Stokes system
/// [[A, Bᵀ], [B, 0]] [u; p] = [f; g].
#[derive(Clone, Debug)]
pub struct LocalStokesBlocks {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub f: DVector<f64>,
    pub g: DVector<f64>,
}

impl LocalStokesBlocks {
    pub fn full_matrix(&self) -> DMatrix<f64> {
        let (nu, np) = (self.a.nrows(), self.b.nrows());
        let mut m = DMatrix::zeros(nu + np, nu + np);
        m.view_mut((0, 0), (nu, nu)).copy_from(&self.a);
        m.view_mut((nu, 0), (np, nu)).copy_from(&self.b);
        m.view_mut((0, nu), (nu, np)).copy_from(&self.b.transpose());
        m
    }

    pub fn full_rhs(&self) -> DVector<f64> {
        let mut r = DVector::zeros(self.f.len() + self.g.len());
        r.rows_mut(0, self.f.len()).copy_from(&self.f);
        r.rows_mut(self.f.len(), self.g.len()).copy_from(&self.g);
        r
    }
}

/// All local HHO machinery of one element.
#[derive(Clone, Debug)]
pub struct HhoElement {
    pub element: usize,
    pub space: HhoLocalSpace,
    pub basis: ElementBasis,
    pub rule: QuadratureRule,
    /// element basis values and gradients on `rule` (nq × n_rec)
    pub psi: Vec<f64>,
    pub dpsi: Vec<[f64; 2]>,
    pub faces: Vec<FaceLocal>,
    /// stiffness of the reconstruction basis (n_rec × n_rec)
    pub stiffness: DMatrix<f64>,
    /// scalar reconstruction operator (n_rec × n_scalar)
    pub recon: DMatrix<f64>,
    /// scalar face residuals evaluated at face quadrature points (nq_F × n_scalar)
    pub residual: Vec<DMatrix<f64>>,
}

impl HhoElement {
    pub fn new(mesh: &Mesh, t: usize, variant: HhoVariant, k: usize) -> Result<Self> {
        let efs = &mesh.element_faces[t];
        let space = HhoLocalSpace::new(variant, k, efs.len());
        let n_rec = dim_p2(k + 1);
        let basis = ElementBasis::for_element(mesh, t, k + 1)?;
        let qdeg = 2 * k + 4;
        let rule = polygon_rule(&mesh.element_vertices(t), mesh.centroid[t], qdeg)
            .map_err(|e| Error::Geometry(format!("element {t}: {e}")))?;
        let (psi, dpsi) = basis.tabulate_grad(&rule, n_rec);
        let mut faces = Vec::with_capacity(efs.len());
        for ef in efs {
            let [a, b] = mesh.face_points(ef.face);
            let frule = segment_rule(a, b, qdeg);
            let fb = FaceBasis::new(a, b, k);
            let (fpsi, fdpsi) = basis.tabulate_grad(&frule, n_rec);
            let phi = fb.tabulate(&frule, space.n_face);
            faces.push(FaceLocal {
                face: ef.face,
                tag: mesh.faces[ef.face].tag,
                normal: mesh.normal_out(*ef),
                h: mesh.h_f[ef.face],
                rule: frule,
                basis: fb,
                psi: fpsi,
                dpsi: fdpsi,
                phi,
            });
        }
        let nq = rule.len();
        let mut stiffness = DMatrix::zeros(n_rec, n_rec);
        for q in 0..nq {
            let w = rule.weights[q];
            let g = &dpsi[q * n_rec..(q + 1) * n_rec];
            for a in 0..n_rec {
                for b in 0..=a {
                    let v = w * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                    stiffness[(a, b)] += v;
                }
            }
        }
        for a in 0..n_rec {
            for b in 0..a {
                stiffness[(b, a)] = stiffness[(a, b)];
            }
        }
        let mut el = Self {
            element: t,
            space,
            basis,
            rule,
            psi,
            dpsi,
            faces,
            stiffness,
            recon: DMatrix::zeros(0, 0),
            residual: Vec::new(),
        };
        el.recon = el.build_reconstruction()?;
        el.residual = (0..el.faces.len()).map(|j| el.build_residual(j)).collect();
        Ok(el)
    }

    pub fn n_rec(&self) -> usize {
        self.stiffness.nrows()
    }

    fn face_col(&self, j: usize, c: usize) -> usize {
        self.space.n_elem + j * self.space.n_face + c
    }

    /// Scalar potential reconstruction: the mean of p equals the mean of v_T
    /// and (∇p, ∇w)_T = (∇v_T, ∇w)_T + Σ_F (v_F − v_T, ∇w·n_TF)_F for w ∈ P^{k+1}(T).
    fn build_reconstruction(&self) -> Result<DMatrix<f64>> {
        let (n_rec, ne, ns) = (self.n_rec(), self.space.n_elem, self.space.n_scalar());
        let mut rhs = DMatrix::zeros(n_rec - 1, ns);
        for a in 1..n_rec {
            for b in 0..ne {
                rhs[(a - 1, b)] = self.stiffness[(a, b)];
            }
        }
        for (j, fl) in self.faces.iter().enumerate() {
            let nf = self.space.n_face;
            for q in 0..fl.rule.len() {
                let w = fl.rule.weights[q];
                let ps = &fl.psi[q * n_rec..(q + 1) * n_rec];
                let dp = &fl.dpsi[q * n_rec..(q + 1) * n_rec];
                let ph = &fl.phi[q * nf..(q + 1) * nf];
                for a in 1..n_rec {
                    let gn = w * (dp[a][0] * fl.normal[0] + dp[a][1] * fl.normal[1]);
                    for b in 0..ne {
                        rhs[(a - 1, b)] -= gn * ps[b];
                    }
                    for c in 0..nf {
                        rhs[(a - 1, self.face_col(j, c))] += gn * ph[c];
                    }
                }
            }
        }
        let k_red = self.stiffness.view((1, 1), (n_rec - 1, n_rec - 1)).into_owned();
        let chol = k_red.cholesky().ok_or_else(|| Error::SingularLocal {
            element: self.element,
            what: "potential reconstruction".into(),
        })?;
        let sol = chol.solve(&rhs);
        let mut r = DMatrix::zeros(n_rec, ns);
        r[(0, 0)] = 1.0;
        r.view_mut((1, 0), (n_rec - 1, ns)).copy_from(&sol);
        Ok(r)
    }

    /// r_TF v = π_F^k(v_F − p v) − π_T^{k'}(v_T − p v), evaluated at the face quadrature points.
    fn build_residual(&self, j: usize) -> DMatrix<f64> {
        let fl = &self.faces[j];
        let (n_rec, ne, nf) = (self.n_rec(), self.space.n_elem, self.space.n_face);
        let nq = fl.rule.len();
        // M_F[c, a] = ∫_F φ_c ψ_a
        let mut mf = DMatrix::zeros(nf, n_rec);
        for q in 0..nq {
            let w = fl.rule.weights[q];
            for c in 0..nf {
                for a in 0..n_rec {
                    mf[(c, a)] += w * fl.phi[q * nf + c] * fl.psi[q * n_rec + a];
                }
            }
        }
        let phi = DMatrix::from_row_slice(nq, nf, &fl.phi);
        let psi = DMatrix::from_row_slice(nq, n_rec, &fl.psi);
        let mut d = -(&phi * &mf) * &self.recon;
        let psi_e = psi.columns(0, ne);
        d += psi_e * self.recon.rows(0, ne);
        for q in 0..nq {
            for c in 0..nf {
                d[(q, self.face_col(j, c))] += phi[(q, c)];
            }
            for b in 0..ne {
                d[(q, b)] -= psi[(q, b)];
            }
        }
        d
    }

    /// Coefficients of the reconstruction of a scalar local vector.
    pub fn potential_reconstruction(&self, v: &[f64]) -> Vec<f64> {
        (&self.recon * DVector::from_column_slice(v)).as_slice().to_vec()
    }

    /// Coefficients of the scalar face residual on face j in the face basis of degree max(k', k).
    pub fn face_residual(&self, j: usize, v: &[f64]) -> Vec<f64> {
        let fl = &self.faces[j];
        let vals = &self.residual[j] * DVector::from_column_slice(v);
        let deg = self.space.k_elem.max(self.space.k);
        let fb = FaceBasis::new(fl.basis.start(), fl.basis.end(), deg);
        let m = fb.dim();
        let tab = fb.tabulate(&fl.rule, m);
        let mut c = vec![0.0; m];
        for q in 0..fl.rule.len() {
            for i in 0..m {
                c[i] += fl.rule.weights[q] * vals[q] * tab[q * m + i];
            }
        }
        c
    }

    /// Normal derivative of the reconstruction at face quadrature points (nq × n_scalar).
    fn normal_flux(&self, j: usize) -> DMatrix<f64> {
        let fl = &self.faces[j];
        let n_rec = self.n_rec();
        let nq = fl.rule.len();
        let mut gn = DMatrix::zeros(nq, n_rec);
        for q in 0..nq {
            for a in 0..n_rec {
                let g = fl.dpsi[q * n_rec + a];
                gn[(q, a)] = g[0] * fl.normal[0] + g[1] * fl.normal[1];
            }
        }
        gn * &self.recon
    }

    /// Face unknown trace at face quadrature points (nq × n_scalar).
    fn face_trace(&self, j: usize) -> DMatrix<f64> {
        let fl = &self.faces[j];
        let nf = self.space.n_face;
        let nq = fl.rule.len();
        let mut e = DMatrix::zeros(nq, self.space.n_scalar());
        for q in 0..nq {
            for c in 0..nf {
                e[(q, self.face_col(j, c))] = fl.phi[q * nf + c];
            }
        }
        e
    }

    fn weighted_gram(x: &DMatrix<f64>, y: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
        let mut wy = y.clone();
        for (q, wq) in w.iter().enumerate() {
            wy.row_mut(q).scale_mut(*wq);
        }
        x.transpose() * wy
    }

    /// Scalar viscous block: consistency, stabilization and Dirichlet terms.
    pub fn scalar_viscous(&self, eta: f64) -> Result<DMatrix<f64>> {
        if !(eta > 0.0) {
            return Err(Error::Config(format!("penalty must be positive, got {eta}")));
        }
        let mut a = self.recon.transpose() * &self.stiffness * &self.recon;
        for (j, fl) in self.faces.iter().enumerate() {
            let d = &self.residual[j];
            a += Self::weighted_gram(d, d, &fl.rule.weights) / fl.h;
            if fl.tag == FaceTag::Dirichlet {
                let n = self.normal_flux(j);
                let e = self.face_trace(j);
                let en = Self::weighted_gram(&e, &n, &fl.rule.weights);
                a -= &en + en.transpose();
                a += Self::weighted_gram(&e, &e, &fl.rule.weights) * (eta / fl.h);
            }
        }
        Ok(a)
    }

    /// Vector viscous block A_T (component-block-diagonal).
    pub fn viscous_block(&self, eta: f64) -> Result<DMatrix<f64>> {
        let s = self.scalar_viscous(eta)?;
        let sp = &self.space;
        let ns = sp.n_scalar();
        let mut a = DMatrix::zeros(sp.n_vel(), sp.n_vel());
        for comp in 0..2 {
            for i in 0..ns {
                let gi = sp.scalar_to_vector(comp, i);
                for j in 0..ns {
                    a[(gi, sp.scalar_to_vector(comp, j))] = s[(i, j)];
                }
            }
        }
        Ok(a)
    }

    /// Pressure–velocity coupling B_T and the loads (momentum f, mass g).
    pub fn coupling_and_loads(&self, case: &dyn StokesCase, eta: f64) -> (DMatrix<f64>, DVector<f64>, DVector<f64>) {
        let sp = self.space;
        let (n_rec, ne, nf, npe) = (self.n_rec(), sp.n_elem, sp.n_face, sp.n_press_elem);
        let mut b = DMatrix::zeros(sp.n_press(), sp.n_vel());
        let mut f = DVector::zeros(sp.n_vel());
        let mut g = DVector::zeros(sp.n_press());
        // volume terms
        for q in 0..self.rule.len() {
            let w = self.rule.weights[q];
            let ps = &self.psi[q * n_rec..(q + 1) * n_rec];
            let dp = &self.dpsi[q * n_rec..(q + 1) * n_rec];
            for pq in 0..npe {
                for bb in 0..ne {
                    for comp in 0..2 {
                        b[(pq, sp.elem_vel(comp, bb))] -= w * dp[bb][comp] * ps[pq];
                    }
                }
            }
            let fv = case.body_force(self.rule.points[q]);
            for bb in 0..ne {
                for comp in 0..2 {
                    f[sp.elem_vel(comp, bb)] += w * fv[comp] * ps[bb];
                }
            }
        }
        for (j, fl) in self.faces.iter().enumerate() {
            let n = fl.normal;
            let nflux = if fl.tag == FaceTag::Dirichlet { Some(self.normal_flux(j)) } else { None };
            for q in 0..fl.rule.len() {
                let w = fl.rule.weights[q];
                let x = fl.rule.points[q];
                let ps = &fl.psi[q * n_rec..(q + 1) * n_rec];
                let ph = &fl.phi[q * nf..(q + 1) * nf];
                match sp.variant {
                    HhoVariant::Dp => {
                        for pq in 0..npe {
                            for comp in 0..2 {
                                let wn = w * n[comp] * ps[pq];
                                for bb in 0..ne {
                                    b[(pq, sp.elem_vel(comp, bb))] += wn * ps[bb];
                                }
                                if fl.tag != FaceTag::Dirichlet {
                                    for c in 0..nf {
                                        b[(pq, sp.face_vel(j, comp, c))] -= wn * ph[c];
                                    }
                                }
                            }
                        }
                    }
                    HhoVariant::Hp => {
                        for pc in 0..nf {
                            let row = sp.face_press(j, pc);
                            for comp in 0..2 {
                                let wn = w * n[comp] * ph[pc];
                                for bb in 0..ne {
                                    b[(row, sp.elem_vel(comp, bb))] += wn * ps[bb];
                                }
                                if fl.tag != FaceTag::Dirichlet {
                                    for c in 0..nf {
                                        b[(row, sp.face_vel(j, comp, c))] -= wn * ph[c];
                                    }
                                }
                            }
                        }
                    }
                }
                match fl.tag {
                    FaceTag::Dirichlet => {
                        let gd = case.dirichlet(x);
                        let gdn = gd[0] * n[0] + gd[1] * n[1];
                        match sp.variant {
                            HhoVariant::Dp => {
                                for pq in 0..npe {
                                    g[pq] += w * gdn * ps[pq];
                                }
                            }
                            HhoVariant::Hp => {
                                for pc in 0..nf {
                                    g[sp.face_press(j, pc)] += w * gdn * ph[pc];
                                }
                            }
                        }
                        let nfx = nflux.as_ref().unwrap();
                        for comp in 0..2 {
                            for s in 0..sp.n_scalar() {
                                f[sp.scalar_to_vector(comp, s)] -= w * gd[comp] * nfx[(q, s)];
                            }
                            for c in 0..nf {
                                f[sp.face_vel(j, comp, c)] += w * gd[comp] * (eta / fl.h) * ph[c];
                            }
                        }
                    }
                    FaceTag::Neumann => {
                        let gn = case.neumann(x, n);
                        for comp in 0..2 {
                            for c in 0..nf {
                                f[sp.face_vel(j, comp, c)] -= w * gn[comp] * ph[c];
                            }
                        }
                    }
                    FaceTag::Interior => {}
                }
            }
        }
        (b, f, g)
    }

    pub fn blocks(&self, case: &dyn StokesCase, eta: f64) -> Result<LocalStokesBlocks> {
        let a = self.viscous_block(eta)?;
        let (b, f, g) = self.coupling_and_loads(case, eta);
        Ok(LocalStokesBlocks { a, b, f, g })
    }

    /// Scalar interpolate (π_T^{k'} v, (π_F^k v)_F).
    pub fn interpolate_scalar(&self, v: impl Fn(Point) -> f64) -> Vec<f64> {
        let (n_rec, ne, nf) = (self.n_rec(), self.space.n_elem, self.space.n_face);
        let mut out = vec![0.0; self.space.n_scalar()];
        for q in 0..self.rule.len() {
            let wv = self.rule.weights[q] * v(self.rule.points[q]);
            for b in 0..ne {
                out[b] += wv * self.psi[q * n_rec + b];
            }
        }
        for (j, fl) in self.faces.iter().enumerate() {
            for q in 0..fl.rule.len() {
                let wv = fl.rule.weights[q] * v(fl.rule.points[q]);
                for c in 0..nf {
                    out[self.face_col(j, c)] += wv * fl.phi[q * nf + c];
                }
            }
        }
        out
    }

    /// Vector interpolate in the local vector layout.
    pub fn interpolate_velocity(&self, u: impl Fn(Point) -> [f64; 2]) -> Vec<f64> {
        let sp = &self.space;
        let mut out = vec![0.0; sp.n_vel()];
        for comp in 0..2 {
            let s = self.interpolate_scalar(|p| u(p)[comp]);
            for (i, v) in s.into_iter().enumerate() {
                out[sp.scalar_to_vector(comp, i)] = v;
            }
        }
        out
    }

    /// Pressure interpolate (π_T^k p [, (π_F^k p)_F]).
    pub fn interpolate_pressure(&self, p: impl Fn(Point) -> f64) -> Vec<f64> {
        let sp = &self.space;
        let n_rec = self.n_rec();
        let mut out = vec![0.0; sp.n_press()];
        for q in 0..self.rule.len() {
            let wv = self.rule.weights[q] * p(self.rule.points[q]);
            for i in 0..sp.n_press_elem {
                out[i] += wv * self.psi[q * n_rec + i];
            }
        }
        if sp.variant == HhoVariant::Hp {
            for (j, fl) in self.faces.iter().enumerate() {
                for q in 0..fl.rule.len() {
                    let wv = fl.rule.weights[q] * p(fl.rule.points[q]);
                    for c in 0..sp.n_face {
                        out[sp.face_press(j, c)] += wv * fl.phi[q * sp.n_face + c];
                    }
                }
            }
        }
        out
    }

    /// Component `comp` of a local vector as a scalar local vector.
    pub fn component(&self, u: &[f64], comp: usize) -> Vec<f64> {
        (0..self.space.n_scalar()).map(|s| u[self.space.scalar_to_vector(comp, s)]).collect()
    }
}
