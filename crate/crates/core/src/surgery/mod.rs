//! Edge configurations, the boundary circle maps `G`, `G̃`, and the
//! conjugacy `H` describing the surgery homeomorphism on angles.

pub mod config;
pub mod config_file;
pub mod homeo;
mod orbit;
pub mod pwmap;
pub mod tuning;

pub use config::{
    first_return_numbers, validate_config, validate_config_with_cap, ConfigError, EdgeConfig,
    FirstReturns, HolderData, ReportError, Side, Sign, Strip, ValidationReport, THETA_LABELS,
};
pub use config_file::{ConfigFile, ConfigFileError};
pub use homeo::{
    conjugacy_image, conjugacy_image_capped, AngleMap, DomainPair, ScalingSample, SurgeryError,
    SurgeryHomeo, Vertex, DEFAULT_CYCLE_CAP,
};
pub use pwmap::{
    build_backward_map, build_forward_map, AffinePiece, MapError, PiecewiseDoublingMap,
};
pub use tuning::{tune_angle, tune_config, TuningError, TuningWord};
