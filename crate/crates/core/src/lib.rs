//! Gaussian random fields with atomic planar spectral measures and the
//! census of their nodal sets.
//!
//! The pipeline is: a [`SpectralMeasure`] (built from atoms or a [`Preset`])
//! is sampled into a [`FieldSample`], tabulated on a [`ScalarGrid`], and
//! counted by the [`nodal`] censuses. [`kac_rice`] gives closed-form
//! densities to compare against, [`estimators`] runs the Monte Carlo
//! experiments, and [`arithmetic`] covers lattice points and toral waves.

pub mod arithmetic;
pub mod error;
pub mod estimators;
pub mod field;
pub mod grid;
pub mod kac_rice;
pub mod nodal;
pub mod rng;
pub mod scalar;
pub mod spectral;
pub mod stability;
pub mod stats;

pub use error::{NodalError, Result};
pub use field::{CillerueloField, FieldSample, Jet, Term};
pub use grid::{evaluate_grid, Domain, ScalarGrid};
pub use nodal::NodalCensus;
pub use scalar::Real;
pub use spectral::{CovarianceMatrix, Kappa, MeasureFile, Preset, SpectralMeasure};

pub type Measure64 = SpectralMeasure<f64>;
pub type Measure32 = SpectralMeasure<f32>;
pub type Field64 = FieldSample<f64>;
pub type Field32 = FieldSample<f32>;
pub type Grid64 = ScalarGrid<f64>;
pub type Grid32 = ScalarGrid<f32>;
