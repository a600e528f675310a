//! Wigner distributions of Gaussian symmetric processes on a uniform grid:
//! half-grid discrete Wigner and Weyl transforms, exact covariance of the
//! zero-mean Wigner distribution, the product formula for its Weyl symbol,
//! and Monte Carlo estimators.

pub mod analysis;
pub mod error;
pub mod gspmodel;
pub mod montecarlo;
pub mod numgrid;
pub mod spectral;
pub mod weyl;
pub mod wigner;

pub use analysis::{Resolution, SymbolEvaluator};
pub use error::{Error, Result};
pub use gspmodel::{ProcessModel, ShiftModel, SpectralDensity};
pub use numgrid::{CovTensor4, Grid1D, Kernel, PhaseField, PhaseGrid, Region4, Signal, Symbol4, C64};
