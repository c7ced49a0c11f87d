//! Teleoreactive mission executive for autonomous underwater vehicles.
//!
//! Geometry and coverage are generic over [`Real`]; the aliases below fix
//! them to `f64`, which is what the stores, simulator and executive use.

pub mod acoustic;
pub mod coverage;
pub mod executive;
pub mod geometry;
pub mod mission;
pub mod planner;
pub mod scalar;
pub mod sim;
pub mod stores;
pub mod survey;
pub mod symbolic;
pub mod values;

pub use scalar::Real;

pub type Point = geometry::Point2<f64>;
pub type Polygon = geometry::Polygon<f64>;
