//! Sparse recovery with the L1/L2 ratio under nonnegativity.

pub mod certificates;
pub mod error;
pub mod generators;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod problem;
pub mod prox;
pub mod rng;
pub mod solvers;

pub use error::{Error, Result};
pub use problem::{Domain, ProblemInstance};
