//! Work statistics of driven quantum systems probed by finite-temperature
//! pointers.
//!
//! Units: `hbar = k_B = 1`. Matrices are dense, complex and row-major.

// `!(x > 0.0)` rejects NaN along with non-positive values; index loops
// mirror the summation formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod fluct;
pub mod linalg;
pub mod measurement;
pub mod random;
pub mod scenarios;
pub mod thermo;
pub mod tpm;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, DensityMatrix, HermitianSpectrum, C64};
pub use measurement::{AssignmentMatrix, MeasurementChannel, PointerModel};
pub use thermo::{GibbsState, HermitianOperator};
pub use tpm::{JointDistribution, JointKind, Process, TimeFamily, WorkDistribution};
