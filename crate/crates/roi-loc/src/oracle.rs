//! Analytic navigation guide: pick the axis at maximum distance from the
//! ground-truth centre, choose a movement level from the remaining distance,
//! and correct predicted actions that move away from the target.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::env::{Action, Axis, MoveLevel};
use crate::error::{Error, Result};

/// Distance bands (in voxels) selecting the movement level.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct OracleConfig {
    pub coarse_threshold: u32,
    pub fine_threshold: u32,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { coarse_threshold: 12, fine_threshold: 4 }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.coarse_threshold > self.fine_threshold && self.fine_threshold >= 1 {
            Ok(())
        } else {
            Err(Error::config("oracle thresholds must satisfy coarse > fine >= 1"))
        }
    }
}

static ORACLE_CALLS: AtomicU64 = AtomicU64::new(0);

/// Total number of guide invocations in this process. Inference must leave
/// this untouched; tests assert on it.
pub fn call_count() -> u64 {
    ORACLE_CALLS.load(Ordering::Relaxed)
}

/// Guide action for the given centres: Terminate at an exact match,
/// otherwise move along the axis of maximum |Δ| (ties x→y→z) toward the
/// target, at a level picked from |Δ| on that axis.
pub fn imitation_action(
    current_centre: [i64; 3],
    gt_centre: [i64; 3],
    config: &OracleConfig,
) -> Action {
    ORACLE_CALLS.fetch_add(1, Ordering::Relaxed);
    let delta = [
        gt_centre[0] - current_centre[0],
        gt_centre[1] - current_centre[1],
        gt_centre[2] - current_centre[2],
    ];
    if delta == [0, 0, 0] {
        return Action::Terminate;
    }
    let mut axis = 0;
    for a in 1..3 {
        if delta[a].abs() > delta[axis].abs() {
            axis = a;
        }
    }
    let dist = delta[axis].unsigned_abs();
    let level = if dist >= u64::from(config.coarse_threshold) {
        MoveLevel::Coarse
    } else if dist >= u64::from(config.fine_threshold) {
        MoveLevel::Fine
    } else {
        MoveLevel::VeryFine
    };
    Action::Move { axis: Axis::ALL[axis], positive: delta[axis] > 0, level }
}

/// Replace `predicted` with the guide action when it is a move that strictly
/// increases the Euclidean distance to the target, or a Terminate while the
/// centres still differ. Kept actions pass through unchanged.
pub fn correct(
    predicted: Action,
    current_centre: [i64; 3],
    gt_centre: [i64; 3],
    config: &OracleConfig,
) -> Action {
    ORACLE_CALLS.fetch_add(1, Ordering::Relaxed);
    let away = match predicted {
        Action::Terminate => current_centre != gt_centre,
        Action::Move { .. } => {
            let d = predicted.displacement();
            let moved = [
                current_centre[0] + d[0],
                current_centre[1] + d[1],
                current_centre[2] + d[2],
            ];
            dist2(moved, gt_centre) > dist2(current_centre, gt_centre)
        }
    };
    if away {
        imitation_action(current_centre, gt_centre, config)
    } else {
        predicted
    }
}

fn dist2(a: [i64; 3], b: [i64; 3]) -> i128 {
    (0..3)
        .map(|i| {
            let d = (a[i] - b[i]) as i128;
            d * d
        })
        .sum()
}

/// Step bound of the pure-imitation rollout: per axis, coarse steps plus a
/// constant tail covers fine and very-fine moves and the final Terminate.
pub fn convergence_step_bound(start: [i64; 3], gt: [i64; 3]) -> u64 {
    (0..3)
        .map(|a| {
            let d = (gt[a] - start[a]).unsigned_abs();
            d.div_ceil(9) + 4
        })
        .sum()
}
