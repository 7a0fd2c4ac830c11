//! TOML run configuration. Unknown keys are rejected.
//!
//! ```toml
//! scheme = "hho-dp"          # hho-dp | hho-hp | dg
//! strategy = "v-cond"        # uncond | v-cond | vp-cond
//! k = 3
//! levels = [3, 2, 1]
//! seed = 1
//! penalty = 48.0             # optional HHO Dirichlet penalty
//! threads = 0                # 0: all cores; 1: sequential element loops
//!
//! [mesh]
//! family = "trapz"
//! sizes = [2, 4, 8, 16, 32]
//! distortion = 0.1
//! jitter = 0.2
//! neumann = "right"
//!
//! [smoother]
//! iters = 2
//!
//! [coarse]
//! kind = "lu"                # lu | gmres-ilu
//! rtol = 1e-3
//! maxit = 1000
//! ordering = "nd"            # natural | rcm | nd | md
//!
//! [outer]
//! rtol = 1e-13
//! maxit = 1000
//! ```

use serde::Deserialize;

use crate::assembly::AssemblyOptions;
use crate::condense::Strategy;
use crate::driver::{Family, MeshParams, RunConfig};
use crate::error::{Error, Result};
use crate::layout::Scheme;
use crate::par::Exec;
use crate::plevels::{CoarseSolver, LevelConfig, SolverConfig};
use hho_sparse::Ordering;

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub scheme: Option<String>,
    pub strategy: Option<String>,
    pub k: Option<usize>,
    pub levels: Option<Vec<usize>>,
    pub seed: Option<u64>,
    pub penalty: Option<f64>,
    pub threads: Option<usize>,
    #[serde(default)]
    pub mesh: MeshSection,
    #[serde(default)]
    pub smoother: SmootherSection,
    #[serde(default)]
    pub coarse: CoarseSection,
    #[serde(default)]
    pub outer: OuterSection,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    pub family: Option<String>,
    pub sizes: Option<Vec<usize>>,
    pub distortion: Option<f64>,
    pub jitter: Option<f64>,
    pub neumann: Option<String>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SmootherSection {
    pub iters: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CoarseSection {
    pub kind: Option<String>,
    pub rtol: Option<f64>,
    pub maxit: Option<usize>,
    pub ordering: Option<String>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OuterSection {
    pub rtol: Option<f64>,
    pub maxit: Option<usize>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

pub fn parse_ordering(s: &str) -> Result<Ordering> {
    match s {
        "natural" => Ok(Ordering::Natural),
        "rcm" => Ok(Ordering::Rcm),
        "nd" => Ok(Ordering::NestedDissection),
        "md" => Ok(Ordering::MinimumDegree),
        _ => Err(Error::Config(format!("unknown ordering `{s}` (natural, rcm, nd, md)"))),
    }
}

/// Fully resolved settings of a run or study.
#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    pub run: RunConfig,
    pub family: Family,
    pub sizes: Vec<usize>,
    pub mesh: MeshParams,
    pub threads: usize,
}

impl Settings {
    /// Resolves defaults: hho-dp v-cond k=3 on the trapezoidal family n=2..32.
    pub fn resolve(c: &FileConfig) -> Result<Self> {
        let scheme: Scheme = c.scheme.as_deref().unwrap_or("hho-dp").parse()?;
        let strategy: Strategy = c.strategy.as_deref().unwrap_or("v-cond").parse()?;
        let k = c.k.unwrap_or(3);
        let mut solver = SolverConfig::default_for(k, scheme);
        if let Some(l) = &c.levels {
            solver.levels.degrees = l.clone();
        }
        if let Some(i) = c.smoother.iters {
            solver.levels.smoother_iters = i;
        }
        let ordering = parse_ordering(c.coarse.ordering.as_deref().unwrap_or("nd"))?;
        solver.levels.coarse = match c.coarse.kind.as_deref().unwrap_or("lu") {
            "lu" => CoarseSolver::Lu(ordering),
            "gmres-ilu" => CoarseSolver::IluGmres { rtol: c.coarse.rtol.unwrap_or(1e-3), max_it: c.coarse.maxit.unwrap_or(1000) },
            o => return Err(Error::Config(format!("unknown coarse solver `{o}` (lu, gmres-ilu)"))),
        };
        if let Some(r) = c.outer.rtol {
            solver.outer_rtol = r;
        }
        if let Some(m) = c.outer.maxit {
            solver.outer_maxit = m;
        }
        LevelConfig::validate(&solver.levels, k, scheme)?;
        let threads = c.threads.unwrap_or(0);
        let exec = if threads == 1 { Exec::Seq } else { Exec::Par };
        let defaults = MeshParams::default();
        let mesh = MeshParams {
            distortion: c.mesh.distortion.unwrap_or(defaults.distortion),
            jitter: c.mesh.jitter.unwrap_or(defaults.jitter),
            seed: c.seed.unwrap_or(defaults.seed),
            neumann: c.mesh.neumann.as_deref().map(str::parse).transpose()?.unwrap_or(defaults.neumann),
        };
        Ok(Self {
            run: RunConfig { scheme, strategy, k, solver, assembly: AssemblyOptions { hho_penalty: c.penalty, dg_penalty: None, exec } },
            family: c.mesh.family.as_deref().unwrap_or("trapz").parse()?,
            sizes: c.mesh.sizes.clone().unwrap_or_else(|| vec![2, 4, 8, 16, 32]),
            mesh,
            threads,
        })
    }
}
