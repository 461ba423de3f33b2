//! Parameter estimation for stationary time series by matching the empirical
//! characteristic function of observed blocks against simulated ones.
//!
//! The crate is organised bottom-up:
//!
//! - [`rng`]: keyed counter-based random streams, so that simulated blocks are
//!   common random numbers across parameter values.
//! - [`models`]: block simulators and exact block moments for the Gaussian
//!   AR(1), ARFIMA(0,d,0) and Poisson-AR(1) families.
//! - [`weights`]: weight densities with closed-form Fourier transforms and
//!   exact samplers.
//! - [`chf`]: empirical, Monte Carlo and control-variate corrected
//!   characteristic functions.
//! - [`estimators`]: the oracle, simulation-based and control-variate
//!   objectives together with a box-constrained Nelder-Mead minimizer.

pub mod chf;
pub mod error;
pub mod estimators;
pub mod linalg;
pub mod models;
pub mod rng;
pub mod weights;

pub use chf::{ComplexValue, CvDiagnostics};
pub use error::{Error, Result};
pub use estimators::{
    estimate, EmpiricalCovariance, EstimationResult, EstimatorKind, ObjectiveConfig,
};
pub use models::{BlockKind, BlockMoments, BlockSet, Innovation, ModelFamily, ModelKind, ParameterVector};
pub use rng::{SeedPlan, Stream, StreamKey, StreamPurpose};
pub use weights::{WeightFamily, WeightSpec};
