//! Trajectory evaluation: Euclidean displacement errors and off-road
//! false-positive (ORFP) ratios under the center and box policies.
//!
//! A waypoint is an off-road false positive when the prediction is off-road
//! while the corresponding ground truth is in-road under the same policy.
//! Whenever either side leaves the grid at step t, the flag from step t−1 is
//! carried over (a first-step out-of-range counts as not-ORFP).

use serde::Serialize;

use crate::error::Result;
use crate::geometry::{box_corners, Trajectory, WaypointState};
use crate::map::DrivableMask;
use crate::util::check_pairs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RoadStatus {
    Inroad,
    Offroad,
    OutOfRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OffroadPolicy {
    /// Judge by the box center.
    Center,
    /// Judge by the four box corners.
    Box,
}

/// Center policy: the status of the cell containing the box center.
pub fn is_offroad_center(s: &WaypointState, mask: &DrivableMask) -> RoadStatus {
    match mask.is_drivable_point(s.center()) {
        Some(true) => RoadStatus::Inroad,
        Some(false) => RoadStatus::Offroad,
        None => RoadStatus::OutOfRange,
    }
}

/// Box policy: any in-range non-drivable corner makes the waypoint off-road,
/// checked before the out-of-range condition; out-of-range applies only when
/// nothing is positively off-road.
pub fn is_offroad_box(s: &WaypointState, mask: &DrivableMask) -> RoadStatus {
    let mut out_of_range = false;
    for corner in box_corners(s) {
        match mask.is_drivable_point(corner) {
            Some(false) => return RoadStatus::Offroad,
            None => out_of_range = true,
            Some(true) => {}
        }
    }
    if out_of_range {
        RoadStatus::OutOfRange
    } else {
        RoadStatus::Inroad
    }
}

pub fn waypoint_status(s: &WaypointState, mask: &DrivableMask, policy: OffroadPolicy) -> RoadStatus {
    match policy {
        OffroadPolicy::Center => is_offroad_center(s, mask),
        OffroadPolicy::Box => is_offroad_box(s, mask),
    }
}

/// Per-step ORFP flags from already-computed statuses. Pure carry-over
/// logic, factored out so it can be tested against a stateful oracle.
pub fn orfp_flags_from_status(pred: &[RoadStatus], gt: &[RoadStatus]) -> Vec<bool> {
    let mut flags = Vec::with_capacity(pred.len());
    let mut prev = false;
    for (p, g) in pred.iter().zip(gt) {
        let f = if *p == RoadStatus::OutOfRange || *g == RoadStatus::OutOfRange {
            prev
        } else {
            *p == RoadStatus::Offroad && *g == RoadStatus::Inroad
        };
        flags.push(f);
        prev = f;
    }
    flags
}

/// Per-step ORFP flags for one actor.
pub fn orfp_flags(
    pred: &Trajectory,
    gt: &Trajectory,
    mask: &DrivableMask,
    policy: OffroadPolicy,
) -> Result<Vec<bool>> {
    check_pairs(std::slice::from_ref(pred), std::slice::from_ref(gt))?;
    let ps: Vec<RoadStatus> = pred
        .waypoints()
        .iter()
        .map(|s| waypoint_status(s, mask, policy))
        .collect();
    let gs: Vec<RoadStatus> = gt
        .waypoints()
        .iter()
        .map(|s| waypoint_status(s, mask, policy))
        .collect();
    Ok(orfp_flags_from_status(&ps, &gs))
}

/// ORFP ratios per horizon (flagged count over actor count) plus their mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrfpRatios {
    pub per_horizon: Vec<f64>,
    pub average: f64,
    pub at_final: f64,
}

pub fn orfp_ratio(
    preds: &[Trajectory],
    gts: &[Trajectory],
    mask: &DrivableMask,
    policy: OffroadPolicy,
) -> Result<OrfpRatios> {
    check_pairs(preds, gts)?;
    let horizon = preds[0].len();
    let n = preds.len() as f64;
    let mut counts = vec![0usize; horizon];
    for (p, g) in preds.iter().zip(gts) {
        for (t, flagged) in orfp_flags(p, g, mask, policy)?.iter().enumerate() {
            if *flagged {
                counts[t] += 1;
            }
        }
    }
    let per_horizon: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    let average = per_horizon.iter().sum::<f64>() / horizon as f64;
    let at_final = *per_horizon.last().unwrap();
    Ok(OrfpRatios {
        per_horizon,
        average,
        at_final,
    })
}

/// Center displacement errors: per-horizon mean over actors, the mean over
/// all horizons, and the final horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct L2Errors {
    pub per_horizon: Vec<f64>,
    pub average: f64,
    pub at_final: f64,
}

pub fn l2_errors(preds: &[Trajectory], gts: &[Trajectory]) -> Result<L2Errors> {
    check_pairs(preds, gts)?;
    let horizon = preds[0].len();
    let n = preds.len() as f64;
    let mut sums = vec![0.0; horizon];
    for (p, g) in preds.iter().zip(gts) {
        for (t, (sp, sg)) in p.waypoints().iter().zip(g.waypoints()).enumerate() {
            sums[t] += ((sp.x - sg.x).powi(2) + (sp.y - sg.y).powi(2)).sqrt();
        }
    }
    let per_horizon: Vec<f64> = sums.iter().map(|s| s / n).collect();
    let average = per_horizon.iter().sum::<f64>() / horizon as f64;
    let at_final = *per_horizon.last().unwrap();
    Ok(L2Errors {
        per_horizon,
        average,
        at_final,
    })
}

/// Everything the evaluator reports for one scene.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub l2_avg: f64,
    pub l2_at_final: f64,
    pub ctr_orfp_avg: f64,
    pub ctr_orfp_at_final: f64,
    pub box_orfp_avg: f64,
    pub box_orfp_at_final: f64,
    /// Predictions evaluated per horizon (the ratio denominators).
    pub counts: Vec<usize>,
    pub l2_per_horizon: Vec<f64>,
    pub ctr_orfp_per_horizon: Vec<f64>,
    pub box_orfp_per_horizon: Vec<f64>,
}

pub fn evaluate(
    preds: &[Trajectory],
    gts: &[Trajectory],
    mask: &DrivableMask,
) -> Result<MetricsReport> {
    let l2 = l2_errors(preds, gts)?;
    let ctr = orfp_ratio(preds, gts, mask, OffroadPolicy::Center)?;
    let bx = orfp_ratio(preds, gts, mask, OffroadPolicy::Box)?;
    let counts = vec![preds.len(); preds[0].len()];
    Ok(MetricsReport {
        l2_avg: l2.average,
        l2_at_final: l2.at_final,
        ctr_orfp_avg: ctr.average,
        ctr_orfp_at_final: ctr.at_final,
        box_orfp_avg: bx.average,
        box_orfp_at_final: bx.at_final,
        counts,
        l2_per_horizon: l2.per_horizon,
        ctr_orfp_per_horizon: ctr.per_horizon,
        box_orfp_per_horizon: bx.per_horizon,
    })
}
