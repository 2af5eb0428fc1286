//! Quality measures of an approximation set: ΔHV to a target, generational distance to a
//! reference front and the number of non-dominated solutions `|A_p|`.

mod front;
mod targets;

pub use front::{default_reference_front, parse_points, FrontSource, ReferenceFront};
pub use targets::{front_curve, optimal_hv_on_curve, sampled_front_dp, TargetEntry, TargetTable};

use log::warn;

use crate::hypervolume::{classify, hypervolume, ObjectiveMatrix};

/// `target_hv − HV(A)`. Negative values mean the stored target is stale.
pub fn delta_hv(a: &ObjectiveMatrix, target_hv: f64) -> f64 {
    let d = target_hv - hypervolume(a);
    if d < 0.0 {
        warn!(
            "approximation set beats the stored target HV {target_hv} by {}",
            -d
        );
    }
    d
}

/// Mean Euclidean distance from the points of `a` to their nearest reference-front point.
pub fn generational_distance(a: &ObjectiveMatrix, front: &ReferenceFront) -> f64 {
    let total: f64 = a.points().iter().map(|y| front.distance(*y)).sum();
    total / a.len() as f64
}

pub fn nondominated_count(a: &ObjectiveMatrix) -> usize {
    classify(a).nondominated_count()
}
