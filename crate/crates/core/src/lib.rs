//! Simulation toolkit for weakly squeezed single-mode vacua.
//!
//! Units have `ħ = 1`; frequencies are angular (rad per unit time). The free
//! field of each mode is `ω a†a`.

pub mod error;
pub mod fock;
pub mod husimi;
pub mod io;
pub mod measurement;
pub mod quench;
pub mod rabi;
pub mod spectrum;
pub mod squeezed;
pub mod truncation;

pub use error::{Error, Result};
pub use fock::{DensityMatrix, FockOperator, FockVector};
pub use rabi::{RabiParams, SwValidity};
pub use squeezed::{QuadratureVariances, SqueezeParameter};
pub use truncation::Truncation;
