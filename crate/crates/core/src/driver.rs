//! Single solves, refinement studies and their CSV/Markdown reports.

use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use crate::assembly::{assemble, AssemblyOptions};
use crate::condense::Strategy;
use crate::error::{Error, Result};
use crate::layout::{formula_mnz, DofLayout, Scheme};
use crate::mesh::{apply_grading, gen_quad_family, gen_tri_family, GradedShape, Mesh, QuadKind, Side, TriStyle};
use crate::norms::{error_norms, rate, ErrorNorms};
use crate::plevels::{solve, SolverConfig};
use crate::problem::StokesCase;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Quad,
    Trapz,
    SplitTri,
    Delaunay,
    GradedQuad,
    GradedTri,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Quad => "quad",
            Family::Trapz => "trapz",
            Family::SplitTri => "tri",
            Family::Delaunay => "delaunay",
            Family::GradedQuad => "graded-quad",
            Family::GradedTri => "graded-tri",
        }
    }

    /// Graded families use h = card(T_h)^{-1/2} for rates.
    pub fn is_graded(&self) -> bool {
        matches!(self, Family::GradedQuad | Family::GradedTri)
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "quad" => Family::Quad,
            "trapz" => Family::Trapz,
            "tri" => Family::SplitTri,
            "delaunay" => Family::Delaunay,
            "graded-quad" => Family::GradedQuad,
            "graded-tri" => Family::GradedTri,
            _ => return Err(Error::Config(format!("unknown mesh family `{s}` (quad, trapz, tri, delaunay, graded-quad, graded-tri)"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeshParams {
    pub distortion: f64,
    pub jitter: f64,
    pub seed: u64,
    pub neumann: Side,
}

impl Default for MeshParams {
    fn default() -> Self {
        Self { distortion: 0.1, jitter: 0.2, seed: 1, neumann: Side::Right }
    }
}

/// Generates member n of a family and tags its boundary.
pub fn build_mesh(family: Family, n: usize, params: &MeshParams) -> Result<Mesh> {
    let m = match family {
        Family::Quad => gen_quad_family(n, 0.0, QuadKind::Uniform)?,
        Family::Trapz => gen_quad_family(n, params.distortion, QuadKind::Trapezoidal)?,
        Family::SplitTri => gen_tri_family(n, TriStyle::SplitQuad, params.seed)?,
        Family::Delaunay => gen_tri_family(n, TriStyle::DelaunayLike, params.seed)?,
        Family::GradedQuad => apply_grading(n, GradedShape::Quad, params.jitter, params.seed)?,
        Family::GradedTri => apply_grading(n, GradedShape::Tri, params.jitter, params.seed)?,
    };
    m.classify_boundary(Some(params.neumann))
}

/// `family:n`, e.g. `trapz:128`.
pub fn parse_mesh_spec(s: &str) -> Result<(Family, usize)> {
    let (f, n) = s.split_once(':').ok_or_else(|| Error::Config(format!("mesh spec `{s}` is not of the form family:n")))?;
    let n = n.parse().map_err(|_| Error::Config(format!("bad mesh size in `{s}`")))?;
    Ok((f.parse()?, n))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub scheme: Scheme,
    pub strategy: Strategy,
    pub k: usize,
    pub solver: SolverConfig,
    pub assembly: AssemblyOptions,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub cells: usize,
    pub h: f64,
    pub errors: ErrorNorms,
    pub its: usize,
    pub its_coarse: f64,
    pub converged: bool,
    pub relative_residual: f64,
    pub dofs: usize,
    pub mnzs: usize,
    pub t_asm_s: f64,
    pub t_sol_s: f64,
    /// local solution per element
    pub locals: Vec<Vec<f64>>,
}

/// Assembles, solves with the multilevel-preconditioned FGMRES, recovers and measures errors.
pub fn run(mesh: &Mesh, cfg: &RunConfig, case: &dyn StokesCase) -> Result<RunResult> {
    let t0 = Instant::now();
    let sys = assemble(mesh, cfg.scheme, cfg.strategy, cfg.k, case, &cfg.assembly)?;
    let t_asm_s = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let (x, rep) = solve(&sys.layout, &sys.matrix, &sys.rhs, &cfg.solver)?;
    let locals = sys.local_solutions(&x)?;
    let t_sol_s = t1.elapsed().as_secs_f64();
    let errors = error_norms(mesh, cfg.scheme, cfg.k, &locals, case, cfg.assembly.exec)?;
    Ok(RunResult {
        cells: mesh.n_elements(),
        h: mesh.max_h(),
        errors,
        its: rep.iterations,
        its_coarse: rep.coarse_iterations,
        converged: rep.converged,
        relative_residual: rep.relative_residual,
        dofs: sys.matrix.n(),
        mnzs: sys.matrix.nnz(),
        t_asm_s,
        t_sol_s,
        locals,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyRow {
    pub n: usize,
    pub result: std::result::Result<RunResult, String>,
    pub rate_u: Option<f64>,
    pub rate_gu: Option<f64>,
    pub rate_p: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyReport {
    pub family: Family,
    pub scheme: Scheme,
    pub strategy: Strategy,
    pub k: usize,
    pub rows: Vec<StudyRow>,
}

/// Runs the refinement sequence; failures are recorded in their row.
pub fn convergence_study(family: Family, sizes: &[usize], params: &MeshParams, cfg: &RunConfig, case: &dyn StokesCase) -> StudyReport {
    let mut rows: Vec<StudyRow> = Vec::new();
    for &n in sizes {
        let result = build_mesh(family, n, params).and_then(|m| run(&m, cfg, case)).map_err(|e| e.to_string());
        let (mut ru, mut rg, mut rp) = (None, None, None);
        if let (Ok(cur), Some(Ok(prev))) = (&result, rows.last().map(|r| &r.result)) {
            let hh = |r: &RunResult| if family.is_graded() { (r.cells as f64).powf(-0.5) } else { r.h };
            let (hc, hf) = (hh(prev), hh(cur));
            ru = rate(prev.errors.e_u, cur.errors.e_u, hc, hf, 1.0);
            rg = rate(prev.errors.e_gu, cur.errors.e_gu, hc, hf, 1.0);
            rp = rate(prev.errors.e_p, cur.errors.e_p, hc, hf, 1.0);
        }
        rows.push(StudyRow { n, result, rate_u: ru, rate_gu: rg, rate_p: rp });
    }
    StudyReport { family, scheme: cfg.scheme, strategy: cfg.strategy, k: cfg.k, rows }
}

pub const CSV_COLUMNS: [&str; 14] =
    ["cells", "e_u", "e_Gu", "e_p", "e_Du", "rate_u", "rate_Gu", "rate_p", "its", "its_coarse", "dofs", "mnzs", "t_asm_s", "t_sol_s"];

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.2}")).unwrap_or_else(|| "-".into())
}

impl StudyRow {
    fn cells(&self, with_timings: bool) -> Vec<String> {
        let t = |v: f64| if with_timings { format!("{v:.3}") } else { "-".into() };
        match &self.result {
            Ok(r) => {
                let its = if r.converged { r.its.to_string() } else { format!("{}*", r.its) };
                vec![
                    r.cells.to_string(),
                    format!("{:.2e}", r.errors.e_u),
                    format!("{:.2e}", r.errors.e_gu),
                    format!("{:.2e}", r.errors.e_p),
                    format!("{:.2e}", r.errors.e_du),
                    opt(self.rate_u),
                    opt(self.rate_gu),
                    opt(self.rate_p),
                    its,
                    format!("{:.1}", r.its_coarse),
                    r.dofs.to_string(),
                    r.mnzs.to_string(),
                    t(r.t_asm_s),
                    t(r.t_sol_s),
                ]
            }
            Err(e) => {
                let mut v = vec![format!("error: {e}")];
                v.extend(std::iter::repeat_n("-".to_string(), CSV_COLUMNS.len() - 1));
                v
            }
        }
    }
}

impl StudyReport {
    /// CSV with the fixed column set. Timings are the only run-dependent
    /// values; without them the output is reproducible byte for byte.
    pub fn write_csv<W: Write>(&self, w: W, with_timings: bool) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(CSV_COLUMNS).map_err(csv_err)?;
        for r in &self.rows {
            wr.write_record(r.cells(with_timings)).map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn markdown(&self, with_timings: bool) -> String {
        let ncol = if with_timings { CSV_COLUMNS.len() } else { CSV_COLUMNS.len() - 2 };
        let rows: Vec<Vec<String>> = self.rows.iter().map(|r| r.cells(with_timings).into_iter().take(ncol).collect()).collect();
        let header: Vec<String> = CSV_COLUMNS.iter().take(ncol).map(|s| s.to_string()).collect();
        let title = format!("{} {} k={} on {}", self.scheme.name(), self.strategy.name(), self.k, self.family.name());
        format!("### {title}\n\n{}", markdown_table(&header, &rows))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

/// Aligned Markdown table.
pub fn markdown_table(header: &[String], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (i, c) in r.iter().enumerate() {
            width[i] = width[i].max(c.chars().count());
        }
    }
    let line = |cells: &[String]| -> String {
        let parts: Vec<String> = cells.iter().enumerate().map(|(i, c)| format!("{:>w$}", c, w = width[i])).collect();
        format!("| {} |\n", parts.join(" | "))
    };
    let mut s = line(header);
    let sep: Vec<String> = width.iter().map(|w| "-".repeat(*w)).collect();
    s += &format!("|-{}-|\n", sep.join("-|-"));
    for r in rows {
        s += &line(r);
    }
    s
}

/// DOF/MNZ report of one configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct CountReport {
    pub cells: usize,
    pub faces: usize,
    pub dofs: usize,
    pub mnzs: usize,
    pub mnzs_formula: usize,
    pub face_element_ratio: f64,
    pub break_even_ratio: f64,
}

/// Counts without assembling: the layout dimension and the symbolic nonzero count.
pub fn count(mesh: &Mesh, scheme: Scheme, strategy: Strategy, k: usize) -> Result<CountReport> {
    let layout = DofLayout::for_mesh(mesh, scheme, strategy, k)?;
    let (r, b) = crate::layout::face_element_ratios(mesh, k);
    Ok(CountReport {
        cells: mesh.n_elements(),
        faces: mesh.n_faces(),
        dofs: layout.n_dofs(),
        mnzs: layout.count_mnz(mesh),
        mnzs_formula: formula_mnz(mesh, scheme, strategy, k)?,
        face_element_ratio: r,
        break_even_ratio: b,
    })
}
