use crate::error::{Error, Result};
use crate::geometry::Trajectory;

/// Predictions and ground truths must pair up actor-by-actor with equal
/// lengths; used by both the losses and the metrics.
pub(crate) fn check_pairs(preds: &[Trajectory], gts: &[Trajectory]) -> Result<()> {
    if preds.is_empty() {
        return Err(Error::Alignment("no actor pairs to evaluate".into()));
    }
    if preds.len() != gts.len() {
        return Err(Error::Alignment(format!(
            "{} predicted vs {} ground-truth trajectories",
            preds.len(),
            gts.len()
        )));
    }
    for (idx, (p, g)) in preds.iter().zip(gts).enumerate() {
        if p.len() != g.len() {
            return Err(Error::Alignment(format!(
                "actor {idx}: predicted length {} vs ground-truth length {}",
                p.len(),
                g.len()
            )));
        }
    }
    Ok(())
}
