//! Sparse linear algebra for the Stokes solvers: CSR storage, ILU(0),
//! right-preconditioned GMRES, flexible GMRES and a threshold-pivoting
//! sparse LU with fill-reducing orderings.

mod csr;
mod ilu;
mod krylov;
mod lu;
mod mindeg;
mod mm;
mod ordering;

pub use csr::CsrMatrix;
pub use ilu::Ilu0;
pub use krylov::{fgmres, gmres, gmres_left, FgmresReport, GmresReport};
pub use lu::SparseLu;
pub use mm::{read_matrix_market, write_matrix_market};
pub use mindeg::{minimum_degree, minimum_degree_delayed};
pub use ordering::{nested_dissection, rcm, Ordering};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SparseError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("entry ({row}, {col}) is not in the sparsity pattern")]
    NotInPattern { row: usize, col: usize },
    #[error("zero pivot in ILU(0) at row {row}; try a different unknown ordering")]
    ZeroPivot { row: usize },
    #[error("matrix is numerically singular at elimination step {step}")]
    Singular { step: usize },
    #[error("matrix market parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Execution policy for data-parallel kernels. `Par` degrades to sequential
/// execution when the `parallel` feature is disabled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exec {
    Seq,
    Par,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Par
        } else {
            Exec::Seq
        }
    }
}

/// A square linear operator.
pub trait LinOp {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinOp for CsrMatrix {
    fn dim(&self) -> usize {
        self.n()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y)
    }
}

/// Approximate inverse z ≈ A⁻¹ r. Implementations may be nonlinear
/// (flexible Krylov methods tolerate that).
pub trait Precond {
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

pub struct IdentityPrecond;

impl Precond for IdentityPrecond {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

impl Precond for Ilu0 {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        self.solve(r, z)
    }
}

impl Precond for SparseLu {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        self.solve(r, z)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
