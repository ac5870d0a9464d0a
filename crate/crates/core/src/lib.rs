//! Combinatorial surgery on edges of the Mandelbrot set.
//!
//! An edge configuration of eight preperiodic angles determines a
//! piecewise-affine degree-2 circle map `G` (and its partner `G̃`). The
//! circle homeomorphism `H` conjugating `G` to angle doubling is computed
//! exactly on rationals from the binary itinerary of the `G`-orbit; it
//! describes the action of the surgery homeomorphism `h` on external
//! angles. The [`plane`] module checks all of this against floating-point
//! ray tracing and Newton solvers.

// Errors carry the offending angles, which are big rationals; they are
// built only on failure paths.
#![allow(clippy::result_large_err)]

pub mod angle;
pub mod lamination;
pub mod plane;
pub mod surgery;

pub use angle::{Angle, AngleError, Arc, ArcImage, BinaryExpansion, OrbitClass};
pub use lamination::{Lamination, LaminationError, Leaf};
pub use surgery::{
    AngleMap, ConfigError, EdgeConfig, PiecewiseDoublingMap, Sign, SurgeryError, SurgeryHomeo,
    TuningWord,
};
