//! Spectral norms of graphs and matrices: Ky Fan and Schatten norms, exact
//! certification of Hadamard and conference structures, a catalog of norm
//! bounds with equality verdicts, exhaustive extremal search at small orders,
//! and random-graph ensemble checks.

pub mod error;
pub mod graph;
pub mod matrix;
pub mod norms;
pub mod spectra;

pub use error::{Error, Result};
pub use graph::Graph;
pub use matrix::{IntMatrix, RealMatrix};
pub use norms::NormSubject;
pub use spectra::{SingularSpectrum, singular_values, sym_eigenvalues};
