//! Fixed-step gradient descent of a single actor state under the
//! scene-compliance term, tracing every iterate.
//!
//! The box dimensions stay fixed for the whole run; only (x, y, θ) are
//! updated. With truncation enabled the descent reaches exactly zero loss
//! once every nonzero raster cell is drivable, after which the state stops
//! moving. Without truncation the Gaussian tail keeps pushing the actor
//! away from non-drivable regions for as long as the run lasts.

use crate::error::{Error, Result};
use crate::geometry::{GridSpec, WaypointState};
use crate::loss::offroad_sum_grad;
use crate::map::{DrivableMask, Polygon, PolygonSet};
use crate::raster::{rasterize_waypoint_grad, DEFAULT_K, DEFAULT_TRUNCATION_MD};

pub const DEFAULT_ITERATIONS: usize = 1000;
pub const DEFAULT_STEP_XY: f64 = 0.05;
pub const DEFAULT_STEP_THETA: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub iterations: usize,
    /// Meters moved per unit of position gradient.
    pub step_size_xy: f64,
    /// Radians turned per unit of heading gradient.
    pub step_size_theta: f64,
    /// Mahalanobis truncation radius; `None` disables truncation.
    pub truncation_md: Option<f64>,
    pub k: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            iterations: DEFAULT_ITERATIONS,
            step_size_xy: DEFAULT_STEP_XY,
            step_size_theta: DEFAULT_STEP_THETA,
            truncation_md: Some(DEFAULT_TRUNCATION_MD),
            k: DEFAULT_K,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations < 1 {
            return Err(Error::InvalidArgument(
                "iterations must be at least 1".into(),
            ));
        }
        for (name, v) in [
            ("step_size_xy", self.step_size_xy),
            ("step_size_theta", self.step_size_theta),
            ("k", self.k),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive and finite (got {v})"
                )));
            }
        }
        if let Some(md) = self.truncation_md {
            if !md.is_finite() || md <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "truncation radius must be positive and finite (got {md})"
                )));
            }
        }
        Ok(())
    }
}

/// One recorded iterate: the state before update `iteration + 1`, with the
/// loss and gradient norm evaluated at that state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub iteration: usize,
    pub state: WaypointState,
    pub loss: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceStatus {
    /// Ran the full iteration budget.
    Completed,
    /// The actor's raster window left the grid; no further step is defined.
    BoundaryExit { iteration: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptTrace {
    pub points: Vec<TracePoint>,
    pub status: TraceStatus,
}

impl OptTrace {
    pub fn initial(&self) -> &TracePoint {
        self.points.first().expect("trace is never empty")
    }

    pub fn last(&self) -> &TracePoint {
        self.points.last().expect("trace is never empty")
    }
}

/// Plain gradient descent `state ← state − step·∇` on (x, y, θ). The trace
/// holds `iterations + 1` points (the initial state included) unless the
/// raster window leaves the grid, which ends the run early with
/// [`TraceStatus::BoundaryExit`].
pub fn run_toy(
    initial: &WaypointState,
    mask: &DrivableMask,
    cfg: &OptimizerConfig,
) -> Result<OptTrace> {
    cfg.validate()?;
    initial.validate()?;
    let mut state = *initial;
    let mut points = Vec::with_capacity(cfg.iterations + 1);
    for iteration in 0..=cfg.iterations {
        let (raster, grads) = rasterize_waypoint_grad(&state, mask.grid(), cfg.k, cfg.truncation_md)?;
        if raster.window().is_none() {
            points.push(TracePoint {
                iteration,
                state,
                loss: 0.0,
                grad_norm: 0.0,
            });
            return Ok(OptTrace {
                points,
                status: TraceStatus::BoundaryExit { iteration },
            });
        }
        let (loss, g) = offroad_sum_grad(&raster, &grads, mask);
        points.push(TracePoint {
            iteration,
            state,
            loss,
            grad_norm: (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt(),
        });
        if iteration < cfg.iterations {
            state.x -= cfg.step_size_xy * g[0];
            state.y -= cfg.step_size_xy * g[1];
            state.theta -= cfg.step_size_theta * g[2];
        }
    }
    Ok(OptTrace {
        points,
        status: TraceStatus::Completed,
    })
}

/// The packaged desk-scale scene: a 20 m × 20 m grid of 0.1 m cells with the
/// half-plane x > 0 non-drivable, and a 4 m × 2 m actor straddling the
/// boundary, tilted 30° away from boundary-parallel.
#[derive(Debug, Clone)]
pub struct ToyScene {
    pub initial: WaypointState,
    pub grid: GridSpec,
    pub drivable: PolygonSet,
    pub mask: DrivableMask,
}

/// World x of the drivable/non-drivable boundary in the toy scene.
pub const TOY_BOUNDARY_X: f64 = 0.0;

pub fn toy_scene() -> ToyScene {
    let grid = GridSpec::new(20.0, 20.0, 0.1, 0.1, [-10.0, -10.0]).expect("valid toy grid");
    let drivable = PolygonSet::new(vec![Polygon::new(
        vec![[-10.0, -10.0], [0.0, -10.0], [0.0, 10.0], [-10.0, 10.0]],
        vec![],
    )
    .expect("valid toy polygon")]);
    let mask = DrivableMask::rasterize(&drivable, &grid);
    // 30° tilt into the boundary: boundary-parallel is θ = π/2
    let initial = WaypointState::new(0.0, 0.0, 4.0, 2.0, std::f64::consts::FRAC_PI_3);
    ToyScene {
        initial,
        grid,
        drivable,
        mask,
    }
}
