//! Floating-point cross-checks of the exact series: evaluation, residuals,
//! integration, constraint drift and the phase-plane frame.

pub mod frame;
pub mod integrate;
pub mod report;
pub mod series;

use thiserror::Error;

use crate::systems::SystemError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericError {
    #[error("series evaluated at t = {0}; the expansion variable must be positive")]
    NonPositiveTime(f64),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("the geometric frame needs a warped system")]
    NotWarped,
    #[error("geometric frame undefined: {0}")]
    FrameUndefined(String),
    #[error("no finite limit as t -> 0: {0}")]
    NoLimit(String),
    #[error(transparent)]
    System(#[from] SystemError),
}

pub use frame::{
    expected_frame_limits, extrapolate_frame_limits, geometric_frame, identity_error, vectfield_residual,
    vectfield_rhs, FrameLimits, GeometricFrame,
};
pub use integrate::{integrate, IntegratorStats, Tolerances, Trajectory};
pub use report::{validate, Check, ValidationOptions, ValidationReport};
pub use series::{estimate_radius, eval_series, loglog_slope, ode_residual, ode_residual_sample};
