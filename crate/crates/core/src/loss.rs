//! Trajectory losses: the smooth-L1 regression term, the scene-compliance
//! term built on the truncated Gaussian raster, their weighted combination,
//! and the off-road reweighting baseline.
//!
//! The scene-compliance term for one waypoint is the raster summed over
//! non-drivable cells. Per actor and step it is gated by an indicator that
//! is 1 only when the ground-truth box lies inside the drivable region, so
//! legitimately off-road ground truth (e.g. parked cars) is never penalized.
//! Gradients are exposed for (x, y, θ) only; box dimensions receive none.
//!
//! All reductions run in a fixed order (actors, then steps, then window
//! cells row-major) so totals are bit-stable.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{box_corners, Trajectory, WaypointState};
use crate::map::DrivableMask;
use crate::metrics::{orfp_flags, OffroadPolicy};
use crate::raster::{rasterize_waypoint, rasterize_waypoint_grad, DEFAULT_K, DEFAULT_TRUNCATION_MD};
use crate::util::check_pairs;

/// Default weight of the scene-compliance term.
pub const DEFAULT_LAMBDA: f64 = 0.03;

/// Default smooth-L1 transition point.
pub const DEFAULT_BETA: f64 = 1.0;

/// Default reweighting factor for the off-road baseline.
pub const OFFROAD_REWEIGHT_FACTOR: f64 = 5.0;

/// Knobs shared by the loss stack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossConfig {
    /// Ellipse-to-box scale, σ = k·size.
    pub k: f64,
    /// Weight of the scene-compliance term.
    pub lambda: f64,
    /// Mahalanobis truncation radius; `None` disables truncation.
    pub truncation_md: Option<f64>,
    /// Smooth-L1 transition point.
    pub beta: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            lambda: DEFAULT_LAMBDA,
            truncation_md: Some(DEFAULT_TRUNCATION_MD),
            beta: DEFAULT_BETA,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.k.is_finite() || self.k <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "k must be positive and finite (got {})",
                self.k
            )));
        }
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "lambda must be non-negative and finite (got {})",
                self.lambda
            )));
        }
        if let Some(md) = self.truncation_md {
            if !md.is_finite() || md <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "truncation radius must be positive and finite (got {md})"
                )));
            }
        }
        if !self.beta.is_finite() || self.beta <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "beta must be positive and finite (got {})",
                self.beta
            )));
        }
        Ok(())
    }
}

/// Smooth-L1: `r²/(2β)` inside `|r| < β`, `|r| − β/2` outside. Continuous
/// and C¹ at ±β for every β > 0; β = 1 gives the usual form.
pub fn smooth_l1(r: f64, beta: f64) -> f64 {
    let a = r.abs();
    if a < beta {
        0.5 * r * r / beta
    } else {
        a - 0.5 * beta
    }
}

/// Sum over actors and steps of the six smooth-L1 residual terms:
/// x, y, l, w, sin θ, cos θ. A sum, not a mean.
pub fn vanilla_loss(preds: &[Trajectory], gts: &[Trajectory], beta: f64) -> Result<f64> {
    check_pairs(preds, gts)?;
    let mut total = 0.0;
    for (p, g) in preds.iter().zip(gts) {
        for (sp, sg) in p.waypoints().iter().zip(g.waypoints()) {
            total += waypoint_vanilla_terms(sp, sg, beta, 1.0);
        }
    }
    Ok(total)
}

/// One waypoint's six residual terms, with the x and y terms scaled by
/// `xy_weight` (1 for the plain loss).
fn waypoint_vanilla_terms(sp: &WaypointState, sg: &WaypointState, beta: f64, xy_weight: f64) -> f64 {
    xy_weight * (smooth_l1(sp.x - sg.x, beta) + smooth_l1(sp.y - sg.y, beta))
        + smooth_l1(sp.l - sg.l, beta)
        + smooth_l1(sp.w - sg.w, beta)
        + smooth_l1(sp.theta.sin() - sg.theta.sin(), beta)
        + smooth_l1(sp.theta.cos() - sg.theta.cos(), beta)
}

/// 1 iff the ground-truth box is inside the drivable region: its center and
/// all four corners fall in drivable cells. Any test point off the grid
/// fails the check.
pub fn indicator_in_drivable(gt: &WaypointState, mask: &DrivableMask) -> bool {
    if mask.is_drivable_point(gt.center()) != Some(true) {
        return false;
    }
    box_corners(gt)
        .iter()
        .all(|&c| mask.is_drivable_point(c) == Some(true))
}

pub(crate) fn offroad_sum(raster: &crate::raster::GaussianRaster, mask: &DrivableMask) -> f64 {
    let Some(rect) = raster.window() else {
        return 0.0;
    };
    let mut total = 0.0;
    for j in rect.j0..=rect.j1 {
        for i in rect.i0..=rect.i1 {
            if !mask.bit(i, j) {
                total += raster.value(i, j);
            }
        }
    }
    total
}

pub(crate) fn offroad_sum_grad(
    raster: &crate::raster::GaussianRaster,
    grads: &crate::raster::RasterGrad,
    mask: &DrivableMask,
) -> (f64, [f64; 3]) {
    let Some(rect) = raster.window() else {
        return (0.0, [0.0; 3]);
    };
    let mut total = 0.0;
    let mut g = [0.0; 3];
    for j in rect.j0..=rect.j1 {
        for i in rect.i0..=rect.i1 {
            if !mask.bit(i, j) {
                total += raster.value(i, j);
                let p = grads.partial(i, j);
                g[0] += p[0];
                g[1] += p[1];
                g[2] += p[2];
            }
        }
    }
    (total, g)
}

/// Raster of the waypoint summed over non-drivable cells (no indicator gate).
pub fn waypoint_offroad_term(
    s: &WaypointState,
    mask: &DrivableMask,
    k: f64,
    truncation_md: Option<f64>,
) -> Result<f64> {
    let raster = rasterize_waypoint(s, mask.grid(), k, truncation_md)?;
    Ok(offroad_sum(&raster, mask))
}

/// Same term plus its gradient with respect to the waypoint's (x, y, θ).
pub fn waypoint_offroad_term_grad(
    s: &WaypointState,
    mask: &DrivableMask,
    k: f64,
    truncation_md: Option<f64>,
) -> Result<(f64, [f64; 3])> {
    let (raster, grads) = rasterize_waypoint_grad(s, mask.grid(), k, truncation_md)?;
    Ok(offroad_sum_grad(&raster, &grads, mask))
}

/// The scene-compliance term split into per-(actor, step) contributions.
#[derive(Debug, Clone, Serialize)]
pub struct EllipseLossParts {
    /// Sum of every contribution, in the fixed reduction order.
    pub total: f64,
    /// Per actor, per step contribution; zero wherever the gate is 0.
    pub per_step: Vec<Vec<f64>>,
    /// Per actor, per step gradient wrt (x, y, θ); zero wherever gated.
    pub grad: Vec<Vec<[f64; 3]>>,
}

/// Scene-compliance loss over aligned trajectories: for each actor and step
/// whose ground-truth box is drivable, the predicted waypoint's raster is
/// summed over non-drivable cells. Rasterization uses the mask's grid.
pub fn ellipse_loss(
    preds: &[Trajectory],
    gts: &[Trajectory],
    mask: &DrivableMask,
    k: f64,
    truncation_md: Option<f64>,
) -> Result<EllipseLossParts> {
    check_pairs(preds, gts)?;
    let mut per_step = Vec::with_capacity(preds.len());
    let mut grad = Vec::with_capacity(preds.len());
    let mut total = 0.0;
    for (p, g) in preds.iter().zip(gts) {
        let mut steps = Vec::with_capacity(p.len());
        let mut step_grads = Vec::with_capacity(p.len());
        for (sp, sg) in p.waypoints().iter().zip(g.waypoints()) {
            let (value, dg) = if indicator_in_drivable(sg, mask) {
                waypoint_offroad_term_grad(sp, mask, k, truncation_md)?
            } else {
                (0.0, [0.0; 3])
            };
            total += value;
            steps.push(value);
            step_grads.push(dg);
        }
        per_step.push(steps);
        grad.push(step_grads);
    }
    Ok(EllipseLossParts {
        total,
        per_step,
        grad,
    })
}

/// Combined loss breakdown; `total = vanilla + λ·ellipse` exactly.
#[derive(Debug, Clone, Serialize)]
pub struct LossReport {
    pub vanilla: f64,
    pub ellipse: f64,
    pub total: f64,
    /// Per actor, per step scene-compliance contributions (unscaled by λ).
    pub ellipse_per_step: Vec<Vec<f64>>,
    /// Per actor, per step scene-compliance gradients wrt (x, y, θ),
    /// unscaled by λ.
    pub ellipse_grad: Vec<Vec<[f64; 3]>>,
}

pub fn combined_loss(
    preds: &[Trajectory],
    gts: &[Trajectory],
    mask: &DrivableMask,
    cfg: &LossConfig,
) -> Result<LossReport> {
    cfg.validate()?;
    let vanilla = vanilla_loss(preds, gts, cfg.beta)?;
    let parts = ellipse_loss(preds, gts, mask, cfg.k, cfg.truncation_md)?;
    Ok(LossReport {
        vanilla,
        ellipse: parts.total,
        total: vanilla + cfg.lambda * parts.total,
        ellipse_per_step: parts.per_step,
        ellipse_grad: parts.grad,
    })
}

/// Baseline that reweights the x and y residual terms of off-road
/// false-positive waypoints (center policy, including the out-of-range
/// carry-over rule) by `factor`; all other terms are unchanged.
pub fn offroad_reweighted_loss(
    preds: &[Trajectory],
    gts: &[Trajectory],
    mask: &DrivableMask,
    factor: f64,
    beta: f64,
) -> Result<f64> {
    if !factor.is_finite() || factor < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "reweighting factor must be ≥ 1 (got {factor})"
        )));
    }
    check_pairs(preds, gts)?;
    let mut total = 0.0;
    for (p, g) in preds.iter().zip(gts) {
        let flags = orfp_flags(p, g, mask, OffroadPolicy::Center)?;
        for ((sp, sg), flagged) in p.waypoints().iter().zip(g.waypoints()).zip(flags) {
            let weight = if flagged { factor } else { 1.0 };
            total += waypoint_vanilla_terms(sp, sg, beta, weight);
        }
    }
    Ok(total)
}
