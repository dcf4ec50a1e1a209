//! One Monte Carlo point: trials, statistics, bounds and verdicts.

use serde::Serialize;
use tsd_core::stability::{campaign, TrialRecord};
use tsd_core::{theorem_bounds, BoundReport, ErrorStats, NoiseMode, NoiseSpec, PreparedProduct, Scalar};

use crate::error::{CliError, CliResult};
use crate::output::{Cell, Csv};

/// Standard errors of slack allowed before a verdict counts as violated.
pub const VERDICT_SLACK: f64 = 3.0;

#[derive(Clone, Debug)]
pub struct PointResult {
    pub records: Vec<TrialRecord>,
    pub stats: ErrorStats,
    /// Largest across-trial std of `‖Ũ_p‖/‖U_p‖`; `None` if not tracked.
    pub max_norm_ratio_std: Option<f64>,
    pub ideal_error: f64,
    pub n: u64,
    pub dim: usize,
}

/// Runs trials `0..trials`. With `track_norms` every factor norm is also
/// measured, which the linear-growth premise needs but costs extra.
pub fn run_point<T: Scalar>(
    prepared: &PreparedProduct<T>,
    spec: &NoiseSpec,
    trials: u64,
    track_norms: bool,
) -> CliResult<PointResult> {
    if trials < tsd_core::stability::MIN_TRIALS {
        return Err(CliError::invalid(format!(
            "at least {} trials are required, got {trials}",
            tsd_core::stability::MIN_TRIALS
        )));
    }
    let (records, max_norm_ratio_std) = if track_norms {
        let rows = prepared.map_trials(spec, trials, |trial, r| {
            let record = TrialRecord {
                trial,
                epsilon: r.machine_error.to_f64_lossy(),
                epsilon_net: r.net_error.to_f64_lossy(),
            };
            let ratios: Vec<f64> = r.per_factor_norm_ratio.iter().map(|x| x.to_f64_lossy()).collect();
            (record, ratios)
        })?;
        let spread = max_column_std(rows.iter().map(|(_, r)| r.as_slice()), prepared.len());
        (rows.into_iter().map(|(rec, _)| rec).collect(), Some(spread))
    } else {
        (campaign(prepared, spec, trials)?, None)
    };
    let eps: Vec<f64> = records.iter().map(|r| r.epsilon).collect();
    Ok(PointResult {
        stats: ErrorStats::from_samples(&eps)?,
        records,
        max_norm_ratio_std,
        ideal_error: prepared.ideal_error().to_f64_lossy(),
        n: prepared.len() as u64,
        dim: prepared.dim(),
    })
}

fn max_column_std<'a>(rows: impl Iterator<Item = &'a [f64]> + Clone, width: usize) -> f64 {
    let n = rows.clone().count() as f64;
    let mut mean = vec![0.0; width];
    for row in rows.clone() {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut ss = vec![0.0; width];
    for row in rows {
        for ((s, x), m) in ss.iter_mut().zip(row).zip(&mean) {
            *s += (x - m) * (x - m);
        }
    }
    ss.iter().map(|s| (s / (n - 1.0)).sqrt()).fold(0.0, f64::max)
}

pub fn trials_csv(records: &[TrialRecord]) -> CliResult<Csv> {
    let mut csv = Csv::new(&["trial", "epsilon", "epsilon_net"]);
    for r in records {
        csv.row(&[Cell::Int(r.trial), r.epsilon.into(), r.epsilon_net.into()])?;
    }
    Ok(csv)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Satisfied,
    Violated,
    NotApplicable,
}

impl Verdict {
    fn judge(applicable: bool, holds: bool) -> Self {
        match (applicable, holds) {
            (false, _) => Verdict::NotApplicable,
            (true, true) => Verdict::Satisfied,
            (true, false) => Verdict::Violated,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Verdicts {
    /// Worst-case lower bound; reported, never judged.
    pub thm2: Verdict,
    pub thm3: Verdict,
    pub cor4: Verdict,
    pub cor5: Verdict,
    pub scalar: Verdict,
}

/// Facts about the campaign that decide which bounds apply.
#[derive(Clone, Copy, Debug)]
pub struct Premises {
    pub mode: NoiseMode,
    pub epsilon_m: f64,
    pub skew_hermitian: bool,
    pub real_factors: bool,
}

pub fn verdicts(stats: &ErrorStats, bounds: &BoundReport, max_norm_ratio_std: Option<f64>, p: Premises) -> Verdicts {
    let n = bounds.n as f64;
    let below = |bound: f64| stats.std <= bound + VERDICT_SLACK * stats.std_stderr;
    let thm3_premise = max_norm_ratio_std.is_some_and(|s| s <= 1.0 / n.sqrt());
    let unitary = p.skew_hermitian && (p.mode == NoiseMode::GaussianUnitary || p.epsilon_m == 0.0);
    let scalar = bounds.dim == 1 && p.real_factors && p.mode == NoiseMode::Gaussian;
    let scalar_holds = stats.mean >= bounds.scalar_mean_lower - VERDICT_SLACK * stats.mean_stderr
        && stats.std >= bounds.scalar_std_lower - VERDICT_SLACK * stats.std_stderr;
    Verdicts {
        thm2: Verdict::NotApplicable,
        thm3: Verdict::judge(thm3_premise, below(bounds.thm3_upper)),
        cor4: Verdict::judge(thm3_premise && p.epsilon_m <= bounds.cor4_epsilon_m, below(bounds.epsilon_t)),
        cor5: Verdict::judge(unitary, below(bounds.cor5_upper)),
        scalar: Verdict::judge(scalar, scalar_holds),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PointInfo {
    pub order: u32,
    pub k: u32,
    pub r: u32,
    pub lambda: f64,
    #[serde(rename = "N")]
    pub n: u64,
    pub dim: usize,
    pub noise: NoiseSpec,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    #[serde(flatten)]
    pub point: PointInfo,
    #[serde(flatten)]
    pub stats: ErrorStats,
    pub ideal_error: f64,
    pub max_norm_ratio_std: Option<f64>,
    pub bounds: BoundReport,
    pub verdicts: Verdicts,
}

impl Summary {
    pub fn build(point: PointInfo, result: &PointResult, epsilon_t: f64, premises: Premises) -> CliResult<Self> {
        let bounds = theorem_bounds(result.n, result.dim, point.noise.epsilon_m, epsilon_t)?;
        let verdicts = verdicts(&result.stats, &bounds, result.max_norm_ratio_std, premises);
        Ok(Self {
            point,
            stats: result.stats.clone(),
            ideal_error: result.ideal_error,
            max_norm_ratio_std: result.max_norm_ratio_std,
            bounds,
            verdicts,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(mean: f64, std: f64) -> ErrorStats {
        let mut s = ErrorStats::from_samples(&[0.0, 1.0]).unwrap();
        s.mean = mean;
        s.std = std;
        s.mean_stderr = 0.0;
        s.std_stderr = 0.0;
        s
    }

    fn premises(mode: NoiseMode) -> Premises {
        Premises { mode, epsilon_m: 1e-3, skew_hermitian: true, real_factors: false }
    }

    #[test]
    fn verdicts_follow_premises() {
        let b = theorem_bounds(100, 4, 1e-3, 1e-2).unwrap();
        let v = verdicts(&stats(0.0, 0.05), &b, Some(0.0), premises(NoiseMode::GaussianUnitary));
        assert_eq!(v.thm2, Verdict::NotApplicable);
        assert_eq!(v.thm3, Verdict::Satisfied);
        assert_eq!(v.cor5, Verdict::Satisfied);
        assert_eq!(v.cor4, Verdict::NotApplicable);
        assert_eq!(v.scalar, Verdict::NotApplicable);
        let v = verdicts(&stats(0.0, 0.9), &b, Some(1.0), premises(NoiseMode::Gaussian));
        assert_eq!(v.thm3, Verdict::NotApplicable);
        assert_eq!(v.cor5, Verdict::NotApplicable);
        let v = verdicts(&stats(0.0, 0.9), &b, Some(0.0), premises(NoiseMode::GaussianUnitary));
        assert_eq!(v.cor5, Verdict::Violated);
    }

    #[test]
    fn column_spread() {
        let rows = [vec![1.0, 0.0], vec![1.0, 2.0]];
        let s = max_column_std(rows.iter().map(Vec::as_slice), 2);
        assert!((s - 2f64.sqrt()).abs() < 1e-15);
    }
}
