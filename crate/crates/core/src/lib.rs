//! HHO (discontinuous and hybrid pressure) and DG/BR2 discretizations of the
//! 2D Stokes problem with static condensation and a p-multilevel solver.

pub mod assembly;
pub mod basis;
pub mod condense;
pub mod config;
pub mod dg;
pub mod driver;
pub mod error;
pub mod hho;
pub mod layout;
pub mod mesh;
pub mod norms;
pub mod par;
pub mod plevels;
pub mod problem;
pub mod quadrature;

pub use error::{Error, Result};
