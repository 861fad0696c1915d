//! Shortest curvature-constrained paths for a vehicle on the unit sphere.

pub mod control;
pub mod error;
pub mod ode;
pub mod sabban;
pub mod scalar;
pub mod so3;
pub mod spherical;
pub mod adjoint;
pub mod extremal;
pub mod word;
pub mod planner;
pub mod oracle;
pub mod io;
pub mod suites;

pub use error::{Result, SphereError};
pub use planner::{plan, plan_between, CandidatePath, PlannerResult, SolverConfig};
pub use sabban::{SabbanParams, Segment, SegmentKind};
pub use scalar::Scalar;
pub use so3::{Matrix3, Rotation};
pub use spherical::{SphericalConfig, SphericalParams};
pub use word::PathWord;

pub type Rotation64 = so3::Rotation<f64>;
pub type Rotation32 = so3::Rotation<f32>;
pub type Matrix3x64 = so3::Matrix3<f64>;
pub type SabbanParams64 = sabban::SabbanParams<f64>;
pub type SphericalParams64 = spherical::SphericalParams<f64>;
pub type SphericalConfig64 = spherical::SphericalConfig<f64>;
pub type SphericalConfig32 = spherical::SphericalConfig<f32>;
pub type PlannerResult64 = planner::PlannerResult<f64>;
