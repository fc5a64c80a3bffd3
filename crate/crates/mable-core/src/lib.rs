//! Maximum approximate Bernstein likelihood estimation (MABLE) for the
//! two-sample density ratio model.
//!
//! The baseline density on `[0,1]` is modelled as a mixture of beta densities
//! `beta_mj` with shapes `(j+1, m-j+1)` (a Bernstein polynomial model), and the
//! second sample is linked through an exponential tilt
//! `f1(x) = f0(x) * exp(alpha' r~(x))`. This crate carries the numeric core:
//! the beta basis, tilted-weight quadrature, the constrained EM algorithm,
//! the logistic-regression MELE, the profile fit at fixed alpha, and degree
//! selection. Sampling, bootstrap, comparators and the CLI live in the
//! companion `mable` crate.
//!
//! The crate is `no_std` (with `alloc`); all float math goes through `libm`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bernstein;
pub mod data;
pub mod em;
pub mod error;
mod linalg;
pub mod logistic;
pub mod profile;
pub mod quad;
pub mod regressor;
pub mod select;
pub mod special;
pub mod tilt;

pub use bernstein::{Degree, GridDensity, MixtureWeights};
pub use data::TwoSampleData;
pub use em::{em_fit, em_fit_traced, em_fit_with_mele, loglik, EmConfig, EmTrace, FitResult};
pub use error::{Error, Result};
pub use logistic::mele_logistic;
pub use profile::profile_p_fit;
pub use quad::QuadratureRule;
pub use regressor::{RegressorSpec, TiltCoefficients};
pub use select::{choose_baseline, degree_lower_bound, select_degree, BaselineChoice, DegreeSweep, SelectionMode};
pub use tilt::{TiltTableBuilder, TiltedWeightTable};
