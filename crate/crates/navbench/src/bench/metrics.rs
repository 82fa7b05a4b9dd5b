//! Scoring a batch of runs against the scenario's reference trajectory.

use serde::{Deserialize, Serialize};

use super::reference::{BenchError, ReferenceTrajectory};
use crate::pipeline::RunRecord;

/// Distance threshold (m) for "the robot reached this point of the
/// reference" when scoring partial progress.
pub const PROGRESS_DELTA: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioMetrics {
    /// Success rate: fraction of runs that reached the goal.
    pub sr: f64,
    /// Success weighted by path length: mean over runs of
    /// success * l_ref / l_run. Failures contribute 0.
    pub spl: f64,
    /// Distance rate: successes count 1; failures count the farthest
    /// fraction of the reference they came within [`PROGRESS_DELTA`] of.
    pub dr: f64,
    /// Number of successful runs whose recorded path was *shorter* than the
    /// reference (ratio > 1). The reference is near-optimal but discretized,
    /// so small overshoots can happen; we report them instead of clamping.
    pub spl_over_unity: usize,
}

/// Farthest cumulative fraction of the reference the trajectory approached.
fn progress_fraction(record: &RunRecord, reference: &ReferenceTrajectory, delta: f64) -> f64 {
    if reference.total <= 0.0 {
        return 1.0;
    }
    let mut best = 0.0_f64;
    for (_, state) in &record.trajectory {
        for (pt, cum) in reference.points.iter().zip(&reference.cumulative) {
            if (state.x - pt.0).hypot(state.y - pt.1) <= delta {
                best = best.max(cum / reference.total);
            }
        }
    }
    best
}

pub fn compute_metrics(
    records: &[RunRecord],
    reference: &ReferenceTrajectory,
    delta: f64,
) -> Result<ScenarioMetrics, BenchError> {
    if records.is_empty() {
        return Err(BenchError::EmptyRecords);
    }
    let n = records.len() as f64;
    let mut successes = 0usize;
    let mut spl_sum = 0.0;
    let mut dr_sum = 0.0;
    let mut spl_over_unity = 0;
    for rec in records {
        if rec.succeeded() {
            successes += 1;
            let ratio = reference.total / rec.path_length.max(f64::MIN_POSITIVE);
            if ratio > 1.0 {
                spl_over_unity += 1;
            }
            spl_sum += ratio;
            dr_sum += 1.0;
        } else {
            dr_sum += progress_fraction(rec, reference, delta);
        }
    }
    Ok(ScenarioMetrics {
        sr: successes as f64 / n,
        spl: spl_sum / n,
        dr: dr_sum / n,
        spl_over_unity,
    })
}
