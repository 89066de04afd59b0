//! Spectral calculus on the unit torus: fields, cell operators and media.

pub mod cell;
pub(crate) mod fft;
pub mod field;
pub mod media;
pub mod multi_index;

pub use cell::{CellCoefficients, CellOperator, SolverOptions};
pub use field::PeriodicField;
pub use multi_index::MultiIndex;
