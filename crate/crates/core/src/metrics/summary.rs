use crate::error::{Error, Result};
use crate::pose::Trajectory;

/// ATE assigned to a failed run, in meters.
pub const FAILURE_ATE: f64 = 1.0;
/// SR assigned to a failed run.
pub const FAILURE_SR: f64 = 0.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SrReport {
    pub sr: f64,
}

/// Sum of distances between consecutive positions.
pub fn path_length(traj: &Trajectory) -> f64 {
    traj.poses()
        .windows(2)
        .map(|w| (w[1].translation - w[0].translation).norm())
        .fold(0.0, |acc, d| acc + d)
}

/// Estimated path length over ground-truth path length. The estimate may
/// cover only the tracked part of the run; an empty estimate scores 0.
pub fn compute_sr(est: &Trajectory, gt: &Trajectory) -> Result<SrReport> {
    let denom = path_length(gt);
    if !(denom > 0.0) {
        return Err(Error::DegenerateGroundTruth);
    }
    Ok(SrReport {
        sr: path_length(est) / denom,
    })
}

/// Percentage of ATEs at or below `xi`.
pub fn compute_csr(ates: &[f64], xi: f64) -> Result<f64> {
    if ates.is_empty() {
        return Err(Error::EmptyInput("ATE list"));
    }
    if !(xi >= 0.0) {
        return Err(Error::invalid(format!("threshold {xi} must be non-negative")));
    }
    let hits = ates.iter().filter(|&&a| a <= xi).count();
    Ok(100.0 * hits as f64 / ates.len() as f64)
}

/// Outcome of one perturbation setting.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SettingResult {
    pub ate: f64,
    pub sr: f64,
    pub failed: bool,
}

impl SettingResult {
    pub fn ok(ate: f64, sr: f64) -> Self {
        Self { ate, sr, failed: false }
    }

    pub fn failure() -> Self {
        Self {
            ate: FAILURE_ATE,
            sr: FAILURE_SR,
            failed: true,
        }
    }

    /// Values used for aggregation: the failure constants when failed.
    pub fn effective(&self) -> (f64, f64) {
        if self.failed {
            (FAILURE_ATE, FAILURE_SR)
        } else {
            (self.ate, self.sr)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AggregateReport {
    pub mean_ate: f64,
    pub max_ate: f64,
    pub mean_sr: f64,
    pub min_sr: f64,
    pub failure_count: usize,
    pub count: usize,
}

/// Sum in sorted order so the result does not depend on input order.
fn sorted_mean(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v.iter().sum::<f64>() / v.len() as f64
}

/// Mean/max ATE and mean/min SR, failures counted at ATE 1.0 and SR 0.
pub fn aggregate(settings: &[SettingResult]) -> Result<AggregateReport> {
    if settings.is_empty() {
        return Err(Error::EmptyInput("settings"));
    }
    let (ates, srs): (Vec<f64>, Vec<f64>) = settings.iter().map(SettingResult::effective).unzip();
    Ok(AggregateReport {
        max_ate: ates.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        min_sr: srs.iter().copied().fold(f64::INFINITY, f64::min),
        mean_ate: sorted_mean(ates),
        mean_sr: sorted_mean(srs),
        failure_count: settings.iter().filter(|s| s.failed).count(),
        count: settings.len(),
    })
}
