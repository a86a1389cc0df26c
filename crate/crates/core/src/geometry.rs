//! Actor states, grid geometry, and the covariance construction shared by
//! the rasterizer, losses, and metrics.
//!
//! Conventions used throughout the crate:
//!
//! - World frame: x right, y up, lengths in meters, angles in radians
//!   counterclockwise from the +x axis.
//! - Headings are stored unnormalized; every operation here is 2π-periodic,
//!   which keeps gradients continuous across wraparound.
//! - Cell `(i, j)` of a grid covers the half-open box
//!   `[origin_x + i·Δl, origin_x + (i+1)·Δl) × [origin_y + j·Δw, origin_y + (j+1)·Δw)`
//!   and is sampled at its center.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One waypoint of an actor trajectory: oriented box center, size, heading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaypointState {
    pub x: f64,
    pub y: f64,
    /// Box length along the heading, meters.
    pub l: f64,
    /// Box width across the heading, meters.
    pub w: f64,
    /// Heading, radians counterclockwise from +x.
    pub theta: f64,
}

impl WaypointState {
    pub fn new(x: f64, y: f64, l: f64, w: f64, theta: f64) -> Self {
        Self { x, y, l, w, theta }
    }

    pub fn center(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    /// Box dimensions must be positive and every field finite.
    pub fn validate(&self) -> Result<()> {
        if !self.x.is_finite() || !self.y.is_finite() {
            return Err(Error::Validation(format!(
                "center must be finite (got x={}, y={})",
                self.x, self.y
            )));
        }
        if !self.l.is_finite() || self.l <= 0.0 {
            return Err(Error::Validation(format!(
                "box length l must be positive and finite (got {})",
                self.l
            )));
        }
        if !self.w.is_finite() || self.w <= 0.0 {
            return Err(Error::Validation(format!(
                "box width w must be positive and finite (got {})",
                self.w
            )));
        }
        if !self.theta.is_finite() {
            return Err(Error::Validation(format!(
                "theta must be finite (got {})",
                self.theta
            )));
        }
        Ok(())
    }
}

/// A fixed-rate sequence of waypoints. Box dimensions are constant over the
/// whole trajectory; only the center and heading evolve.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    waypoints: Vec<WaypointState>,
    timestep: f64,
}

impl Trajectory {
    pub fn new(waypoints: Vec<WaypointState>, timestep: f64) -> Result<Self> {
        if waypoints.is_empty() {
            return Err(Error::Validation(
                "trajectory must contain at least one waypoint".into(),
            ));
        }
        if !timestep.is_finite() || timestep <= 0.0 {
            return Err(Error::Validation(format!(
                "timestep must be positive and finite (got {timestep})"
            )));
        }
        let (l0, w0) = (waypoints[0].l, waypoints[0].w);
        for (t, s) in waypoints.iter().enumerate() {
            s.validate()
                .map_err(|e| e.context(&format!("waypoint {t}")))?;
            if s.l != l0 || s.w != w0 {
                return Err(Error::Validation(format!(
                    "waypoint {t}: box dimensions must be constant across the trajectory \
                     (got {}×{}, first waypoint has {l0}×{w0})",
                    s.l, s.w
                )));
            }
        }
        Ok(Self {
            waypoints,
            timestep,
        })
    }

    pub fn waypoints(&self) -> &[WaypointState] {
        &self.waypoints
    }

    pub fn timestep(&self) -> f64 {
        self.timestep
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        false // enforced non-empty at construction
    }
}

/// Bird's-eye-view grid geometry: world extents, cell size, and the
/// world ↔ cell-index mapping. `length_m`/`cell_l` run along x,
/// `width_m`/`cell_w` along y; extents must be whole numbers of cells.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    length_m: f64,
    width_m: f64,
    cell_l: f64,
    cell_w: f64,
    origin: [f64; 2],
    nx: usize,
    ny: usize,
}

fn cells_along(name: &str, extent: f64, cell: f64) -> Result<usize> {
    if !extent.is_finite() || extent <= 0.0 || !cell.is_finite() || cell <= 0.0 {
        return Err(Error::Validation(format!(
            "{name}: extent and cell size must be positive and finite (got {extent} / {cell})"
        )));
    }
    let n = (extent / cell).round();
    if n < 1.0 || (n * cell - extent).abs() > 1e-9 * extent.max(1.0) {
        return Err(Error::Validation(format!(
            "{name} = {extent} m is not a whole number of {cell} m cells"
        )));
    }
    Ok(n as usize)
}

impl GridSpec {
    pub fn new(length_m: f64, width_m: f64, cell_l: f64, cell_w: f64, origin: [f64; 2]) -> Result<Self> {
        let nx = cells_along("length_m", length_m, cell_l)?;
        let ny = cells_along("width_m", width_m, cell_w)?;
        if !origin[0].is_finite() || !origin[1].is_finite() {
            return Err(Error::Validation(format!(
                "grid origin must be finite (got {:?})",
                origin
            )));
        }
        Ok(Self {
            length_m,
            width_m,
            cell_l,
            cell_w,
            origin,
            nx,
            ny,
        })
    }

    pub fn length_m(&self) -> f64 {
        self.length_m
    }

    pub fn width_m(&self) -> f64 {
        self.width_m
    }

    pub fn cell_l(&self) -> f64 {
        self.cell_l
    }

    pub fn cell_w(&self) -> f64 {
        self.cell_w
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    /// Cell count along x.
    pub fn nx(&self) -> usize {
        self.nx
    }

    /// Cell count along y.
    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn num_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn cell_area(&self) -> f64 {
        self.cell_l * self.cell_w
    }

    /// World position of the center of cell `(i, j)`.
    pub fn cell_center(&self, i: usize, j: usize) -> [f64; 2] {
        [
            self.origin[0] + (i as f64 + 0.5) * self.cell_l,
            self.origin[1] + (j as f64 + 0.5) * self.cell_w,
        ]
    }

    /// Cell containing `p`, or `None` if `p` is outside the grid extents.
    pub fn world_to_cell(&self, p: [f64; 2]) -> Option<(usize, usize)> {
        let fx = (p[0] - self.origin[0]) / self.cell_l;
        let fy = (p[1] - self.origin[1]) / self.cell_w;
        if !fx.is_finite() || !fy.is_finite() || fx < 0.0 || fy < 0.0 {
            return None;
        }
        let (i, j) = (fx.floor() as usize, fy.floor() as usize);
        (i < self.nx && j < self.ny).then_some((i, j))
    }
}

/// Symmetric positive-definite 2×2 covariance, entries in m².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Covariance2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Covariance2 {
    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn is_positive_definite(&self) -> bool {
        self.xx > 0.0 && self.det() > 0.0
    }

    /// Entries `[pxx, pxy, pyy]` of the inverse matrix.
    pub fn inverse(&self) -> Result<[f64; 3]> {
        let det = self.det();
        if !self.xx.is_finite()
            || !self.xy.is_finite()
            || !self.yy.is_finite()
            || self.xx <= 0.0
            || det <= 0.0
        {
            return Err(Error::Degenerate(format!(
                "covariance is not positive definite (xx={}, xy={}, yy={})",
                self.xx, self.xy, self.yy
            )));
        }
        Ok([self.yy / det, -self.xy / det, self.xx / det])
    }

    /// Eigenvalues, larger first.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let half_tr = 0.5 * (self.xx + self.yy);
        let disc = (0.25 * (self.xx - self.yy) * (self.xx - self.yy) + self.xy * self.xy).sqrt();
        [half_tr + disc, half_tr - disc]
    }
}

/// Covariance of the box-sized Gaussian: axis standard deviations are
/// `(k·l, k·w)`, and the matrix is rotated so the major axis follows the
/// heading. The diagonal of the body-frame matrix holds the variances
/// `(k·l)², (k·w)²`, so the unit Mahalanobis ellipse has radii `k·l`, `k·w`;
/// with `k = √2/2` that ellipse passes exactly through the box corners.
pub fn covariance_from_state(l: f64, w: f64, theta: f64, k: f64) -> Result<Covariance2> {
    for (name, v) in [("l", l), ("w", w), ("k", k)] {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "{name} must be positive and finite (got {v})"
            )));
        }
    }
    if !theta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "theta must be finite (got {theta})"
        )));
    }
    let sl2 = (k * l) * (k * l);
    let sw2 = (k * w) * (k * w);
    let (s, c) = theta.sin_cos();
    Ok(Covariance2 {
        xx: sl2 * c * c + sw2 * s * s,
        xy: (sl2 - sw2) * s * c,
        yy: sl2 * s * s + sw2 * c * c,
    })
}

/// Squared Mahalanobis distance `dᵀ Σ⁻¹ d` of a displacement.
pub fn mahalanobis_sq(d: [f64; 2], sigma: &Covariance2) -> Result<f64> {
    let [pxx, pxy, pyy] = sigma.inverse()?;
    Ok(pxx * d[0] * d[0] + 2.0 * pxy * d[0] * d[1] + pyy * d[1] * d[1])
}

/// World corners of the oriented box, counterclockwise starting from the
/// front-left corner (+l/2, +w/2 in the body frame).
pub fn box_corners(s: &WaypointState) -> [[f64; 2]; 4] {
    let (sin, cos) = s.theta.sin_cos();
    let (hl, hw) = (0.5 * s.l, 0.5 * s.w);
    let body = [[hl, hw], [-hl, hw], [-hl, -hw], [hl, -hw]];
    body.map(|[bx, by]| [s.x + cos * bx - sin * by, s.y + sin * bx + cos * by])
}
