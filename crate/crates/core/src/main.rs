use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hho_stokes::assembly::assemble;
use hho_stokes::condense::Strategy;
use hho_stokes::config::{FileConfig, Settings};
use hho_stokes::driver::{build_mesh, convergence_study, count, markdown_table, parse_mesh_spec, run, StudyReport, StudyRow};
use hho_stokes::layout::Scheme;
use hho_stokes::mesh::{read_mesh, write_mesh, Mesh};
use hho_stokes::problem::Manufactured2D;
use hho_stokes::{Error, Result};

#[derive(Parser)]
#[command(name = "hho-stokes", version, about = "HHO and DG Stokes solvers with static condensation and p-multilevel FGMRES")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Mesh utilities
    Mesh {
        #[command(subcommand)]
        cmd: MeshCmd,
    },
    /// DOF and nonzero counts of the global matrix
    Count {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        mesh: String,
        /// report every scheme/strategy combination
        #[arg(long)]
        all: bool,
    },
    /// Single solve of the manufactured problem
    Run {
        #[command(flatten)]
        common: Common,
        /// family:n, e.g. trapz:8
        #[arg(long, conflicts_with = "mesh_file")]
        mesh: Option<String>,
        #[arg(long)]
        mesh_file: Option<PathBuf>,
        /// omit timings so the output is reproducible
        #[arg(long)]
        no_timings: bool,
    },
    /// Refinement study with rates, iteration counts and sizes
    Study {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        family: Option<String>,
        /// comma-separated cells per side
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        md: Option<PathBuf>,
        #[arg(long)]
        no_timings: bool,
    },
    /// Write the assembled global matrix in Matrix Market format
    ExportMatrix {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        mesh: String,
        #[arg(short, long)]
        output: PathBuf,
        /// also write the right-hand side, one value per line
        #[arg(long)]
        rhs: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum MeshCmd {
    /// Generate a family member and write it in the pmesh2 format
    Gen {
        #[arg(long)]
        mesh: String,
        #[arg(long)]
        distortion: Option<f64>,
        #[arg(long)]
        jitter: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        neumann: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Summary of a mesh file
    Info { path: PathBuf },
}

/// Overrides applied on top of the optional config file.
#[derive(Args, Clone, Default)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<usize>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    penalty: Option<f64>,
    /// 1 runs element loops sequentially
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    smoother_iters: Option<usize>,
    /// lu | gmres-ilu
    #[arg(long)]
    coarse: Option<String>,
    #[arg(long)]
    coarse_rtol: Option<f64>,
    /// natural | rcm | nd | md
    #[arg(long)]
    coarse_ordering: Option<String>,
    #[arg(long)]
    outer_rtol: Option<f64>,
    #[arg(long)]
    outer_maxit: Option<usize>,
    #[arg(long)]
    neumann: Option<String>,
    #[arg(long)]
    distortion: Option<f64>,
}

impl Common {
    fn settings(&self, family: Option<&str>, sizes: Option<Vec<usize>>) -> Result<Settings> {
        let mut c = match &self.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        macro_rules! set {
            ($dst:expr, $src:expr) => {
                if let Some(v) = $src.clone() {
                    $dst = Some(v);
                }
            };
        }
        set!(c.scheme, self.scheme);
        set!(c.strategy, self.strategy);
        set!(c.k, self.k);
        set!(c.levels, self.levels);
        set!(c.seed, self.seed);
        set!(c.penalty, self.penalty);
        set!(c.threads, self.threads);
        set!(c.smoother.iters, self.smoother_iters);
        set!(c.coarse.kind, self.coarse);
        set!(c.coarse.rtol, self.coarse_rtol);
        set!(c.coarse.ordering, self.coarse_ordering);
        set!(c.outer.rtol, self.outer_rtol);
        set!(c.outer.maxit, self.outer_maxit);
        set!(c.mesh.neumann, self.neumann);
        set!(c.mesh.distortion, self.distortion);
        set!(c.mesh.family, family.map(str::to_string));
        set!(c.mesh.sizes, sizes);
        let s = Settings::resolve(&c)?;
        if s.threads > 1 {
            rayon_threads(s.threads)?;
        }
        Ok(s)
    }
}

#[cfg(feature = "parallel")]
fn rayon_threads(n: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Error::Config(e.to_string()))
}

#[cfg(not(feature = "parallel"))]
fn rayon_threads(_n: usize) -> Result<()> {
    Ok(())
}

fn mesh_from_spec(spec: &str, s: &Settings) -> Result<Mesh> {
    let (family, n) = parse_mesh_spec(spec)?;
    build_mesh(family, n, &s.mesh)
}

fn out_writer(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn main_inner(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Mesh { cmd: MeshCmd::Gen { mesh, distortion, jitter, seed, neumann, output } } => {
            let mut c = FileConfig::default();
            c.mesh.distortion = distortion;
            c.mesh.jitter = jitter;
            c.seed = seed;
            c.mesh.neumann = neumann;
            let s = Settings::resolve(&c)?;
            let m = mesh_from_spec(&mesh, &s)?;
            write_mesh(&m, out_writer(&output)?)?;
        }
        Cmd::Mesh { cmd: MeshCmd::Info { path } } => {
            let m = read_mesh(BufReader::new(File::open(&path)?))?;
            println!("elements {}\nfaces {}\nvertices {}\nboundary faces {}\nmax h {:.6e}", m.n_elements(), m.n_faces(), m.n_vertices(), m.boundary_face_count(), m.max_h());
        }
        Cmd::Count { common, mesh, all } => {
            let s = common.settings(None, None)?;
            let m = mesh_from_spec(&mesh, &s)?;
            let combos: Vec<(Scheme, Strategy)> = if all {
                vec![
                    (Scheme::HhoDp, Strategy::Uncond),
                    (Scheme::HhoDp, Strategy::VpCond),
                    (Scheme::HhoDp, Strategy::VCond),
                    (Scheme::HhoHp, Strategy::HpFull),
                    (Scheme::Dg, Strategy::Uncond),
                ]
            } else {
                vec![(s.run.scheme, s.run.strategy)]
            };
            let header: Vec<String> =
                ["scheme", "strategy", "k", "cells", "faces", "dofs", "mnzs", "mnzs_formula", "faces/cells", "(k+d)/d"].iter().map(|x| x.to_string()).collect();
            let mut rows = Vec::new();
            for (scheme, strategy) in combos {
                let r = count(&m, scheme, strategy, s.run.k)?;
                let strat = scheme.effective_strategy(strategy)?.map(|x| x.name()).unwrap_or("-");
                rows.push(vec![
                    scheme.name().to_string(),
                    strat.to_string(),
                    s.run.k.to_string(),
                    r.cells.to_string(),
                    r.faces.to_string(),
                    r.dofs.to_string(),
                    r.mnzs.to_string(),
                    r.mnzs_formula.to_string(),
                    format!("{:.3}", r.face_element_ratio),
                    format!("{:.3}", r.break_even_ratio),
                ]);
            }
            print!("{}", markdown_table(&header, &rows));
        }
        Cmd::Run { common, mesh, mesh_file, no_timings } => {
            let s = common.settings(None, None)?;
            let (m, family) = match (mesh, mesh_file) {
                (Some(spec), _) => (mesh_from_spec(&spec, &s)?, parse_mesh_spec(&spec)?.0),
                (None, Some(p)) => (read_mesh(BufReader::new(File::open(&p)?))?.classify_boundary(Some(s.mesh.neumann))?, s.family),
                (None, None) => return Err(Error::Config("run needs --mesh or --mesh-file".into())),
            };
            let r = run(&m, &s.run, &Manufactured2D)?;
            let rep = StudyReport {
                family,
                scheme: s.run.scheme,
                strategy: s.run.strategy,
                k: s.run.k,
                rows: vec![StudyRow { n: 0, result: Ok(r.clone()), rate_u: None, rate_gu: None, rate_p: None }],
            };
            print!("{}", rep.markdown(!no_timings));
            println!("\nconverged: {}  relative residual: {:.3e}", r.converged, r.relative_residual);
        }
        Cmd::Study { common, family, sizes, csv, md, no_timings } => {
            let s = common.settings(family.as_deref(), sizes)?;
            let rep = convergence_study(s.family, &s.sizes, &s.mesh, &s.run, &Manufactured2D);
            let text = rep.markdown(!no_timings);
            print!("{text}");
            if let Some(p) = csv {
                rep.write_csv(BufWriter::new(File::create(p)?), !no_timings)?;
            }
            if let Some(p) = md {
                std::fs::write(p, text)?;
            }
        }
        Cmd::ExportMatrix { common, mesh, output, rhs } => {
            let s = common.settings(None, None)?;
            let m = mesh_from_spec(&mesh, &s)?;
            let sys = assemble(&m, s.run.scheme, s.run.strategy, s.run.k, &Manufactured2D, &s.run.assembly)?;
            hho_sparse::write_matrix_market(&sys.matrix, BufWriter::new(File::create(&output)?))?;
            if let Some(p) = rhs {
                let mut w = BufWriter::new(File::create(p)?);
                for v in &sys.rhs {
                    writeln!(w, "{v:.17e}")?;
                }
            }
            eprintln!("wrote {}x{} matrix with {} nonzeros", sys.matrix.n(), sys.matrix.n(), sys.matrix.nnz());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
