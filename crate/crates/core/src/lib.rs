//! Numerical toolkit for the functional `K(A) = |[A,A*]|^2 / (|A|^4 - |tr A^2|^2)`
//! on adjoint orbits of trace-free complex matrices.

pub mod classify;
pub mod error;
pub mod exec;
pub mod kfun;
pub mod matrix;
pub mod optimize;
pub mod partition;
pub mod sample;
pub mod sl2;
pub mod spectral;
pub mod suite;
pub mod tol;

pub use error::{Error, Result};
pub use exec::Execution;
pub use matrix::{ComplexMatrix, C64};
pub use partition::Partition;
pub use tol::Tolerances;
