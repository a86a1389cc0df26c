//! Box-aware differentiable trajectory rasterization for scene-compliant
//! motion prediction.
//!
//! The crate turns an actor waypoint (center, box size, heading) into a
//! truncated 2D Gaussian occupancy raster whose covariance is sized by the
//! bounding box and aligned with the heading, with analytic gradients with
//! respect to position and heading. On top of that sit:
//!
//! - [`map`] — drivable-region polygons rasterized into a binary mask;
//! - [`loss`] — the smooth-L1 trajectory loss, the scene-compliance term
//!   (raster × non-drivable mask, gated by ground-truth drivability), their
//!   weighted combination, and an off-road reweighting baseline;
//! - [`metrics`] — ℓ2 displacement errors and off-road false-positive
//!   ratios under center and box policies;
//! - [`optim`] — a gradient-descent harness that characterizes how the
//!   scene-compliance term moves an actor off non-drivable regions;
//! - [`scenario`] — a JSON scenario format tying it all together.

pub mod error;
pub mod geometry;
pub mod loss;
pub mod map;
pub mod metrics;
pub mod optim;
pub mod raster;
pub mod scenario;
mod util;

pub use error::{Error, Result};
pub use geometry::{
    box_corners, covariance_from_state, mahalanobis_sq, Covariance2, GridSpec, Trajectory,
    WaypointState,
};
pub use map::{DrivableMask, Polygon, PolygonSet};
pub use raster::{
    raster_window, rasterize_waypoint, rasterize_waypoint_grad, CellRect, GaussianKernel,
    GaussianRaster, RasterGrad, DEFAULT_K, DEFAULT_TRUNCATION_MD,
};
