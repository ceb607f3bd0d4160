//! Covariate-shift adaptation with general spectral regularization in
//! reproducing kernel Hilbert spaces.
//!
//! The crate is organized bottom-up:
//!
//! | Module | Purpose |
//! |--------|---------|
//! | [`kernels`] | Gaussian and constant-augmented kernels, sample sets, Gram matrices |
//! | [`filters`] | Tikhonov, iterated Tikhonov and spectral cut-off filters and their application to PSD matrices |
//! | [`source_theory`] | Index functions, regularization-parameter schedules, theoretical rate exponents |
//! | [`representer`] | Kernel expansions over one or two anchor sets, RKHS norms and distances |
//! | [`rn_estimator`] | Regularized Radon-Nikodym derivative (density ratio) estimation and capacity diagnostics |
//! | [`iwrls`] | Importance-weighted regularized least squares with exact or estimated weights |
//! | [`aggregation`] | Linear aggregation of candidate fits over a parameter grid |
//! | [`synthetic`] | Ground-truth shifted problems, samplers and Monte-Carlo risk |
//! | [`harness`] | Sweeps, CSV results, log-log rate fitting and reports |
//! | [`io`] | Point/label CSV input and model files |

pub mod aggregation;
pub mod error;
pub mod filters;
pub mod harness;
pub mod io;
pub mod iwrls;
pub mod kernels;
mod linalg;
pub mod representer;
pub mod rn_estimator;
pub mod source_theory;
pub mod synthetic;

pub use error::{Error, Result};
pub use filters::{FilterSpec, SolveRoute, SpectralMode};
pub use kernels::{KernelSpec, Point, SampleSet};
pub use representer::RepresenterFunction;
