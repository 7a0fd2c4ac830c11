//! p-multilevel hierarchy on a fixed mesh: operators inherited by sub-block
//! extraction, matrix-free transfers and the V-cycle used to precondition
//! flexible GMRES.

use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use hho_sparse::{fgmres, gmres, gmres_left, CsrMatrix, Ilu0, Ordering, Precond, SparseLu};

use crate::error::{Error, Result};
use crate::layout::{DofLayout, Scheme};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CoarseSolver {
    /// sparse direct LU with the given fill-reducing ordering
    Lu(Ordering),
    /// ILU(0)-preconditioned GMRES to a relative tolerance
    IluGmres { rtol: f64, max_it: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelConfig {
    /// strictly decreasing degrees, the first one being the fine degree
    pub degrees: Vec<usize>,
    pub smoother_iters: usize,
    pub coarse: CoarseSolver,
}

impl LevelConfig {
    /// 3→2→1 for k=3, 6→3→1 for k=6, otherwise k→k−1→…→min.
    pub fn default_for(k: usize, scheme: Scheme) -> Self {
        let min = if scheme == Scheme::Dg { 1 } else { 0 };
        let degrees = match k {
            3 => vec![3, 2, 1],
            6 => vec![6, 3, 1],
            _ => (min..=k).rev().take(3).collect(),
        };
        Self { degrees, smoother_iters: 2, coarse: CoarseSolver::Lu(Ordering::NestedDissection) }
    }

    pub fn validate(&self, k: usize, scheme: Scheme) -> Result<()> {
        if self.degrees.first() != Some(&k) {
            return Err(Error::Config(format!("levels must start at the fine degree {k}, got {:?}", self.degrees)));
        }
        if self.degrees.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config(format!("levels must be strictly decreasing, got {:?}", self.degrees)));
        }
        if scheme == Scheme::Dg && *self.degrees.last().unwrap() < 1 {
            return Err(Error::Config("DG coarse degree must be at least 1".into()));
        }
        Ok(())
    }
}

/// Coarse-level index c lives at fine index map[c].
pub fn restrict_vector(map: &[usize], fine: &[f64]) -> Vec<f64> {
    map.iter().map(|&f| fine[f]).collect()
}

/// Zero padding of a coarse vector into the finer space.
pub fn prolong_vector(map: &[usize], coarse: &[f64], n_fine: usize) -> Vec<f64> {
    let mut x = vec![0.0; n_fine];
    for (c, &f) in map.iter().enumerate() {
        x[f] = coarse[c];
    }
    x
}

/// Galerkin coarse operator R A P under hierarchical orthonormal bases.
pub fn inherit_operator(fine: &CsrMatrix, map: &[usize]) -> CsrMatrix {
    fine.extract(map)
}

enum CoarseFactor {
    Lu(SparseLu),
    IluGmres { ilu: Ilu0, rtol: f64, max_it: usize },
}

pub struct Level {
    pub k: usize,
    pub layout: DofLayout,
    pub matrix: CsrMatrix,
    /// index of every unknown of this level in the next finer level
    pub to_finer: Option<Vec<usize>>,
    smoother: Option<Ilu0>,
}

pub struct Hierarchy {
    pub levels: Vec<Level>,
    smoother_iters: usize,
    coarse: CoarseFactor,
    coarse_iterations: AtomicUsize,
    coarse_solves: AtomicUsize,
}

impl Hierarchy {
    pub fn new(fine_layout: &DofLayout, fine: CsrMatrix, cfg: &LevelConfig) -> Result<Self> {
        cfg.validate(fine_layout.k, fine_layout.scheme)?;
        let nl = cfg.degrees.len();
        let mut levels: Vec<Level> = Vec::with_capacity(nl);
        levels.push(Level { k: fine_layout.k, layout: fine_layout.clone(), matrix: fine, to_finer: None, smoother: None });
        for l in 1..nl {
            let prev = &levels[l - 1];
            let layout = prev.layout.at_degree(cfg.degrees[l])?;
            let map = prev.layout.coarse_map(&layout)?;
            let matrix = inherit_operator(&prev.matrix, &map);
            levels.push(Level { k: cfg.degrees[l], layout, matrix, to_finer: Some(map), smoother: None });
        }
        for (l, lev) in levels.iter_mut().enumerate().take(nl - 1) {
            lev.smoother = Some(Ilu0::new(&lev.matrix).map_err(|e| Error::Level { level: l, source: e })?);
        }
        let last = nl - 1;
        let cm = &levels[last].matrix;
        let coarse = match cfg.coarse {
            CoarseSolver::Lu(o) => CoarseFactor::Lu(SparseLu::new(cm, o).map_err(|e| Error::Level { level: last, source: e })?),
            CoarseSolver::IluGmres { rtol, max_it } => {
                CoarseFactor::IluGmres { ilu: Ilu0::new(cm).map_err(|e| Error::Level { level: last, source: e })?, rtol, max_it }
            }
        };
        Ok(Self { levels, smoother_iters: cfg.smoother_iters, coarse, coarse_iterations: AtomicUsize::new(0), coarse_solves: AtomicUsize::new(0) })
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    /// Total coarse-solver iterations and coarse solves since construction
    /// (a direct coarse solve counts as one iteration).
    pub fn coarse_counts(&self) -> (usize, usize) {
        (self.coarse_iterations.load(AtomicOrdering::Relaxed), self.coarse_solves.load(AtomicOrdering::Relaxed))
    }

    fn coarse_solve(&self, d: &[f64], c: &mut [f64]) {
        let a = &self.levels.last().unwrap().matrix;
        self.coarse_solves.fetch_add(1, AtomicOrdering::Relaxed);
        match &self.coarse {
            CoarseFactor::Lu(lu) => {
                lu.solve(d, c);
                self.coarse_iterations.fetch_add(1, AtomicOrdering::Relaxed);
            }
            CoarseFactor::IluGmres { ilu, rtol, max_it } => {
                c.fill(0.0);
                let rep = gmres(a, ilu, d, c, *max_it, *rtol);
                self.coarse_iterations.fetch_add(rep.iterations, AtomicOrdering::Relaxed);
            }
        }
    }

    /// One V-cycle on level l for the defect d, returning the correction.
    pub fn vcycle(&self, l: usize, d: &[f64]) -> Vec<f64> {
        let n = d.len();
        let mut c = vec![0.0; n];
        if l + 1 == self.levels.len() {
            self.coarse_solve(d, &mut c);
            return c;
        }
        let lev = &self.levels[l];
        let a = &lev.matrix;
        let ilu = lev.smoother.as_ref().unwrap();
        // smoothing: left ILU(0)-preconditioned GMRES, fixed iteration count
        gmres_left(a, ilu, d, &mut c, self.smoother_iters, 0.0);
        let mut r = vec![0.0; n];
        a.residual(d, &c, &mut r);
        let map = self.levels[l + 1].to_finer.as_ref().unwrap();
        let cc = self.vcycle(l + 1, &restrict_vector(map, &r));
        for (i, &f) in map.iter().enumerate() {
            c[f] += cc[i];
        }
        gmres_left(a, ilu, d, &mut c, self.smoother_iters, 0.0);
        c
    }
}

impl Precond for Hierarchy {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(&self.vcycle(0, r));
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub levels: LevelConfig,
    pub outer_rtol: f64,
    pub outer_maxit: usize,
}

impl SolverConfig {
    /// Outer tolerance 1e-13 up to k=3 and 1e-14 above, at most 1000 iterations.
    pub fn default_for(k: usize, scheme: Scheme) -> Self {
        Self { levels: LevelConfig::default_for(k, scheme), outer_rtol: if k > 3 { 1e-14 } else { 1e-13 }, outer_maxit: 1000 }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// coarse-solver iterations per outer iteration
    pub coarse_iterations: f64,
    pub converged: bool,
    pub relative_residual: f64,
    pub residuals: Vec<f64>,
}

/// FGMRES preconditioned by one V-cycle per iteration, from a zero initial guess.
pub fn solve(layout: &DofLayout, matrix: &CsrMatrix, rhs: &[f64], cfg: &SolverConfig) -> Result<(Vec<f64>, SolveReport)> {
    let h = Hierarchy::new(layout, matrix.clone(), &cfg.levels)?;
    let mut x = vec![0.0; rhs.len()];
    let rep = fgmres(matrix, &h, rhs, &mut x, cfg.outer_rtol, cfg.outer_maxit);
    let (ci, _) = h.coarse_counts();
    let report = SolveReport {
        iterations: rep.iterations,
        coarse_iterations: if rep.iterations > 0 { ci as f64 / rep.iterations as f64 } else { 0.0 },
        converged: rep.converged,
        relative_residual: rep.relative_residual,
        residuals: rep.residuals,
    };
    Ok((x, report))
}
