use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{EslError, Result};
use crate::rotation::Representation;

/// Trajectory sampled once per driving period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrobeSeries {
    pub period: f64,
    pub offset: f64,
    pub representation: Representation,
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
}

/// Samples `traj` at `t0 + offset + j period` by linear interpolation.
pub fn strobe(traj: &Trajectory, period: f64, offset: f64) -> Result<StrobeSeries> {
    if !(period >= 2.0 * traj.dt) || !period.is_finite() {
        return Err(EslError::PeriodTooSmall { period, dt: traj.dt });
    }
    if traj.is_empty() {
        return Err(EslError::SeriesTooShort { len: 0, min: 1 });
    }
    if !(offset >= 0.0) {
        return Err(EslError::InvalidInput(format!("strobe offset must be non-negative, got {offset}")));
    }
    let span = traj.end_time() - traj.t0 - offset;
    let count = if span < 0.0 { 0 } else { (span / period + 1e-9).floor() as usize + 1 };
    let mut times = Vec::with_capacity(count);
    let mut points = Vec::with_capacity(count);
    let last = traj.len() - 1;
    for j in 0..count {
        let t = traj.t0 + offset + j as f64 * period;
        let x = ((t - traj.t0) / traj.dt).max(0.0);
        let i = (x.floor() as usize).min(last);
        let frac = if i == last { 0.0 } else { x - i as f64 };
        let a = traj.state(i);
        let point = if frac == 0.0 {
            a.to_vec()
        } else {
            let b = traj.state(i + 1);
            a.iter().zip(b).map(|(p, q)| p + frac * (q - p)).collect()
        };
        times.push(t);
        points.push(point);
    }
    Ok(StrobeSeries { period, offset, representation: traj.representation, times, points })
}

/// Nearest-neighbour distance statistics of a point set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub median: f64,
}

pub fn nearest_neighbor_gaps(points: &[Vec<f64>]) -> Option<GapStats> {
    if points.len() < 2 {
        return None;
    }
    let mut gaps: Vec<f64> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            points
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, q)| distance(p, q))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    gaps.sort_by(f64::total_cmp);
    let n = gaps.len();
    let median = if n % 2 == 1 { gaps[n / 2] } else { 0.5 * (gaps[n / 2 - 1] + gaps[n / 2]) };
    Some(GapStats {
        min: gaps[0],
        max: gaps[n - 1],
        mean: gaps.iter().sum::<f64>() / n as f64,
        median,
    })
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
