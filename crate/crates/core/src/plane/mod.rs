//! Double-precision dynamics of `z^2 + c`: escape-time images, external
//! rays, Newton solvers, and numeric checks of edge configurations.

use thiserror::Error;

use crate::angle::Angle;
use crate::lamination::LaminationError;
use crate::surgery::SurgeryError;

pub mod escape;
pub mod rays;
pub mod settings;
pub mod solve;
pub mod verify;

pub use escape::{escape_data, escape_time, ImageBuffer, Plane, Viewport, INTERIOR};
pub use rays::{
    potential_schedule, svg_overlay, trace_dynamic_ray, trace_parameter_ray, RayPolyline,
};
pub use settings::{SolverSettings, SETTING_KEYS};
pub use solve::{
    cycle_multiplier, dynamic_landing_point, solve_center, solve_misiurewicz, SolvedPoint,
};
pub use verify::{
    landing_pairs, lowest_period_component, map_parameter_point, verify_angles_numeric,
    verify_config_numeric, LandingPair, NumericReport, ParameterImage, ParameterKind, SampleReport,
    VertexCheck,
};

pub use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlaneError {
    #[error("unknown setting {0:?}")]
    UnknownSetting(String),
    #[error("invalid setting {key}: {reason}")]
    InvalidSetting { key: String, reason: String },
    #[error("invalid viewport: {0}")]
    InvalidViewport(String),
    #[error("{0} is not strictly preperiodic")]
    NotPreperiodic(Angle),
    #[error("{0} is not periodic")]
    NotPeriodic(Angle),
    #[error("{angle} has period {found}, expected {expected}")]
    WrongPeriod {
        angle: Angle,
        expected: u64,
        found: u64,
    },
    #[error("ray {angle} failed: {reason}")]
    RayFailed { angle: Angle, reason: String },
    #[error("Newton iteration for the {what} did not converge in {steps} steps")]
    NoConvergence { what: String, steps: u32 },
    #[error("root for {angle} is {distance:.3e} from the ray endpoint")]
    SeedMismatch { angle: Angle, distance: f64 },
    #[error("solved center is outside the wake of {angle}: rays land {gap:.3e} apart")]
    WrongComponent { angle: Angle, gap: f64 },
    #[error(transparent)]
    Lamination(#[from] LaminationError),
    #[error(transparent)]
    Surgery(#[from] SurgeryError),
}
