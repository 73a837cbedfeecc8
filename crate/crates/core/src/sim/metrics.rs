//! Trajectory quality metrics computed from a run log.

use crate::sim::route::{Point2, Route};
use crate::telemetry::SimRecord;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Speed command above this fraction of `v_m` counts as "high".
pub const EFFORT_HIGH: f64 = 0.8;
/// Speed command below this fraction of `v_m` counts as "released".
pub const EFFORT_LOW: f64 = 0.05;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("need at least two records, got {0}")]
    TooShort(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TrajectoryMetrics {
    /// Mean squared change of the discrete heading rate, per second squared.
    pub smoothness: f64,
    /// Number of high-to-released transitions of the speed command.
    pub effort_count: u64,
    pub cross_track_rms: f64,
    pub path_length: f64,
}

/// Counts transitions of the speed command from above `EFFORT_HIGH * v_m`
/// to below `EFFORT_LOW * v_m`.
pub fn effort_count<I: IntoIterator<Item = f64>>(v_cmds: I, v_m: f64) -> u64 {
    let (hi, lo) = (EFFORT_HIGH * v_m, EFFORT_LOW * v_m);
    let mut armed = false;
    let mut count = 0;
    for v in v_cmds {
        if v > hi {
            armed = true;
        } else if armed && v < lo {
            count += 1;
            armed = false;
        }
    }
    count
}

/// Mean of `((rate_{k+1} - rate_k) / dt)^2` where `rate_k` is the finite
/// difference of heading between consecutive records.
pub fn heading_smoothness(records: &[SimRecord]) -> f64 {
    let rates: Vec<(f64, f64)> = records
        .windows(2)
        .map(|w| {
            let dt = w[1].t - w[0].t;
            ((w[1].pose.psi - w[0].pose.psi) / dt, 0.5 * (w[0].t + w[1].t))
        })
        .collect();
    if rates.len() < 2 {
        return 0.0;
    }
    let sum: f64 = rates
        .windows(2)
        .map(|w| {
            let d = (w[1].0 - w[0].0) / (w[1].1 - w[0].1);
            d * d
        })
        .sum();
    sum / (rates.len() - 1) as f64
}

pub fn compute_metrics(
    records: &[SimRecord],
    route: &Route,
    v_m: f64,
) -> Result<TrajectoryMetrics, MetricsError> {
    if records.len() < 2 {
        return Err(MetricsError::TooShort(records.len()));
    }
    let point = |r: &SimRecord| Point2::new(r.pose.x, r.pose.y);
    let path_length = records.windows(2).map(|w| point(&w[0]).dist(point(&w[1]))).sum();
    let sq_sum: f64 = records
        .iter()
        .map(|r| route.distance_to(point(r)).powi(2))
        .sum();
    Ok(TrajectoryMetrics {
        smoothness: heading_smoothness(records),
        effort_count: effort_count(records.iter().map(|r| r.raw.v_cmd), v_m),
        cross_track_rms: (sq_sum / records.len() as f64).sqrt(),
        path_length,
    })
}
