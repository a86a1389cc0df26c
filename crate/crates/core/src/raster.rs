//! Truncated-Gaussian rasterization of single waypoints, with analytic
//! gradients with respect to center position and heading.
//!
//! Each grid cell holds the normalized bivariate Gaussian density of the
//! waypoint's box-sized covariance, evaluated at the displacement from the
//! waypoint center to the cell center (`d = cell_center − center`). Cells
//! whose squared Mahalanobis distance exceeds the truncation radius squared
//! are exactly zero, and no renormalization is applied after truncation.
//!
//! Differentiation treats the truncation mask as a constant, so partials are
//! those of the untruncated density, zeroed outside the truncation region.
//! Box dimensions never receive a gradient: shrinking the box must not be a
//! way to escape the off-road penalty.

use crate::error::{Error, Result};
use crate::geometry::{covariance_from_state, GridSpec, WaypointState};

/// Default ellipse-to-box scale: with `σ = k·size` and `k = √2/2`, the unit
/// Mahalanobis ellipse circumscribes the bounding box exactly.
pub const DEFAULT_K: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Default Mahalanobis truncation radius.
pub const DEFAULT_TRUNCATION_MD: f64 = 1.0;

/// Closed-form bivariate Gaussian density for one waypoint, plus partials
/// with respect to the waypoint's (x, y, θ).
#[derive(Debug, Clone, Copy)]
pub struct GaussianKernel {
    norm: f64,
    /// Σ⁻¹ entries (pxx, pxy, pyy).
    precision: [f64; 3],
    /// ∂Σ⁻¹/∂θ entries; zero for circular actors (l = w).
    dprec_dtheta: [f64; 3],
}

impl GaussianKernel {
    pub fn new(l: f64, w: f64, theta: f64, k: f64) -> Result<Self> {
        let cov = covariance_from_state(l, w, theta, k)?;
        let precision = cov.inverse()?;
        let norm = 1.0 / (std::f64::consts::TAU * cov.det().sqrt());

        // ∂Σ⁻¹/∂θ = (1/σl² − 1/σw²) · [[−sin 2θ, cos 2θ], [cos 2θ, sin 2θ]]
        let sl2 = (k * l) * (k * l);
        let sw2 = (k * w) * (k * w);
        let da = 1.0 / sl2 - 1.0 / sw2;
        let (s, c) = theta.sin_cos();
        let sin2 = 2.0 * s * c;
        let cos2 = c * c - s * s;
        let dprec_dtheta = [-da * sin2, da * cos2, da * sin2];

        Ok(Self {
            norm,
            precision,
            dprec_dtheta,
        })
    }

    /// Kernel for a waypoint's box and heading.
    pub fn from_state(s: &WaypointState, k: f64) -> Result<Self> {
        s.validate()?;
        Self::new(s.l, s.w, s.theta, k)
    }

    /// Squared Mahalanobis distance of a displacement from the center.
    pub fn mahalanobis_sq(&self, dx: f64, dy: f64) -> f64 {
        let [pxx, pxy, pyy] = self.precision;
        pxx * dx * dx + 2.0 * pxy * dx * dy + pyy * dy * dy
    }

    /// Normalized density at displacement `(dx, dy)` from the center.
    pub fn density(&self, dx: f64, dy: f64) -> f64 {
        self.norm * (-0.5 * self.mahalanobis_sq(dx, dy)).exp()
    }

    /// Density and its partials with respect to the waypoint's (x, y, θ),
    /// holding the cell position fixed.
    pub fn density_grad(&self, dx: f64, dy: f64) -> (f64, [f64; 3]) {
        let g = self.density(dx, dy);
        let [pxx, pxy, pyy] = self.precision;
        // d = cell − center, so ∂G/∂center = +G·Σ⁻¹d.
        let gx = g * (pxx * dx + pxy * dy);
        let gy = g * (pxy * dx + pyy * dy);
        let [qxx, qxy, qyy] = self.dprec_dtheta;
        let gtheta = -0.5 * g * (qxx * dx * dx + 2.0 * qxy * dx * dy + qyy * dy * dy);
        (g, [gx, gy, gtheta])
    }
}

/// Inclusive cell-index rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellRect {
    pub i0: usize,
    pub i1: usize,
    pub j0: usize,
    pub j1: usize,
}

impl CellRect {
    pub fn width(&self) -> usize {
        self.i1 - self.i0 + 1
    }

    pub fn height(&self) -> usize {
        self.j1 - self.j0 + 1
    }

    pub fn num_cells(&self) -> usize {
        self.width() * self.height()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        i >= self.i0 && i <= self.i1 && j >= self.j0 && j <= self.j1
    }
}

fn axis_window(center: f64, half: f64, origin: f64, cell: f64, n: usize) -> Option<(usize, usize)> {
    // Half-extent rounded up to whole cells around the center's cell. This
    // always covers every cell whose center can fall inside the ellipse.
    let ic = ((center - origin) / cell).floor();
    let r = (half / cell).ceil();
    let lo = ic - r;
    let hi = ic + r;
    if hi < 0.0 || lo >= n as f64 {
        return None;
    }
    Some((lo.max(0.0) as usize, hi.min((n - 1) as f64) as usize))
}

fn window_impl(
    s: &WaypointState,
    grid: &GridSpec,
    k: f64,
    truncation_md: Option<f64>,
) -> Result<Option<CellRect>> {
    let md = match truncation_md {
        None => {
            // Untruncated rasters have support everywhere.
            return Ok(Some(CellRect {
                i0: 0,
                i1: grid.nx() - 1,
                j0: 0,
                j1: grid.ny() - 1,
            }));
        }
        Some(md) => {
            if !md.is_finite() || md <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "truncation radius must be positive and finite (got {md})"
                )));
            }
            md
        }
    };
    let cov = covariance_from_state(s.l, s.w, s.theta, k)?;
    // Axis-aligned bound of the truncation ellipse: half-extents
    // md·√Σxx, md·√Σyy, rounded out to whole cells.
    let hx = md * cov.xx.sqrt();
    let hy = md * cov.yy.sqrt();
    let x_span = axis_window(s.x, hx, grid.origin()[0], grid.cell_l(), grid.nx());
    let y_span = axis_window(s.y, hy, grid.origin()[1], grid.cell_w(), grid.ny());
    Ok(match (x_span, y_span) {
        (Some((i0, i1)), Some((j0, j1))) => Some(CellRect { i0, i1, j0, j1 }),
        _ => None,
    })
}

/// Cell window guaranteed to contain every nonzero cell of the truncated
/// raster, clipped to the grid. `None` when the ellipse misses the grid.
pub fn raster_window(
    s: &WaypointState,
    grid: &GridSpec,
    k: f64,
    truncation_md: Option<f64>,
) -> Result<Option<CellRect>> {
    s.validate()?;
    window_impl(s, grid, k, truncation_md)
}

/// Truncated Gaussian occupancy values over a sparse cell window.
#[derive(Debug, Clone)]
pub struct GaussianRaster {
    grid: GridSpec,
    window: Option<CellRect>,
    values: Vec<f64>,
    truncation_md: Option<f64>,
}

impl GaussianRaster {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// `None` when the waypoint's support lies entirely outside the grid.
    pub fn window(&self) -> Option<CellRect> {
        self.window
    }

    pub fn truncation_md(&self) -> Option<f64> {
        self.truncation_md
    }

    /// Density at cell `(i, j)`; zero outside the window.
    pub fn value(&self, i: usize, j: usize) -> f64 {
        match self.window {
            Some(rect) if rect.contains(i, j) => {
                self.values[(j - rect.j0) * rect.width() + (i - rect.i0)]
            }
            _ => 0.0,
        }
    }

    /// Window values, row-major (j outer, i inner).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Sum of all cell values times cell area; approaches the probability
    /// mass inside the truncation ellipse as the grid is refined.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }
}

/// Per-cell partials over the same window as the companion raster.
#[derive(Debug, Clone)]
pub struct RasterGrad {
    window: Option<CellRect>,
    /// `[∂/∂x, ∂/∂y, ∂/∂θ]` per window cell, row-major.
    partials: Vec<[f64; 3]>,
}

impl RasterGrad {
    pub fn window(&self) -> Option<CellRect> {
        self.window
    }

    pub fn partials(&self) -> &[[f64; 3]] {
        &self.partials
    }

    pub fn partial(&self, i: usize, j: usize) -> [f64; 3] {
        match self.window {
            Some(rect) if rect.contains(i, j) => {
                self.partials[(j - rect.j0) * rect.width() + (i - rect.i0)]
            }
            _ => [0.0; 3],
        }
    }
}

fn truncated(q: f64, truncation_md: Option<f64>) -> bool {
    match truncation_md {
        Some(md) => q > md * md,
        None => false,
    }
}

/// Rasterize one waypoint. A waypoint whose support misses the grid yields
/// an empty-window raster, not an error.
pub fn rasterize_waypoint(
    s: &WaypointState,
    grid: &GridSpec,
    k: f64,
    truncation_md: Option<f64>,
) -> Result<GaussianRaster> {
    let kernel = GaussianKernel::from_state(s, k)?;
    let window = window_impl(s, grid, k, truncation_md)?;
    let mut values = Vec::new();
    if let Some(rect) = window {
        values.reserve(rect.num_cells());
        for j in rect.j0..=rect.j1 {
            for i in rect.i0..=rect.i1 {
                let c = grid.cell_center(i, j);
                let (dx, dy) = (c[0] - s.x, c[1] - s.y);
                let q = kernel.mahalanobis_sq(dx, dy);
                values.push(if truncated(q, truncation_md) {
                    0.0
                } else {
                    kernel.density(dx, dy)
                });
            }
        }
    }
    Ok(GaussianRaster {
        grid: grid.clone(),
        window,
        values,
        truncation_md,
    })
}

/// Rasterize one waypoint together with its analytic partials. Forward
/// values are identical to [`rasterize_waypoint`].
pub fn rasterize_waypoint_grad(
    s: &WaypointState,
    grid: &GridSpec,
    k: f64,
    truncation_md: Option<f64>,
) -> Result<(GaussianRaster, RasterGrad)> {
    let kernel = GaussianKernel::from_state(s, k)?;
    let window = window_impl(s, grid, k, truncation_md)?;
    let mut values = Vec::new();
    let mut partials = Vec::new();
    if let Some(rect) = window {
        values.reserve(rect.num_cells());
        partials.reserve(rect.num_cells());
        for j in rect.j0..=rect.j1 {
            for i in rect.i0..=rect.i1 {
                let c = grid.cell_center(i, j);
                let (dx, dy) = (c[0] - s.x, c[1] - s.y);
                let q = kernel.mahalanobis_sq(dx, dy);
                if truncated(q, truncation_md) {
                    values.push(0.0);
                    partials.push([0.0; 3]);
                } else {
                    let (g, dg) = kernel.density_grad(dx, dy);
                    values.push(g);
                    partials.push(dg);
                }
            }
        }
    }
    Ok((
        GaussianRaster {
            grid: grid.clone(),
            window,
            values,
            truncation_md,
        },
        RasterGrad { window, partials },
    ))
}
