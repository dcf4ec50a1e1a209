//! Monte Carlo campaigns over the noise model, reference distributions,
//! closed-form stability bounds and growth-trend classification.

mod bounds;
mod distributions;
mod fit;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::generators::GeneratorSet;
use crate::noise::{NoiseSpec, PreparedProduct};
use crate::scalar::Scalar;
use crate::schedule::Schedule;

pub use bounds::{
    required_machine_epsilon, scalar_bounds, theorem_bounds, thm3_constant, BoundReport,
};
pub use distributions::{
    folded_lognormal_cdf, folded_lognormal_pdf, ks_distance, lognormal_cdf, lognormal_pdf,
    single_factor_norm_cdf, single_factor_norm_pdf,
};
pub use fit::{fit_growth, GrowthFit, GrowthModel};

/// Smallest campaign accepted by [`monte_carlo`].
pub const MIN_TRIALS: u64 = 100;

/// Probabilities reported in [`ErrorStats::quantiles`].
pub const QUANTILE_LEVELS: [f64; 3] = [0.5, 0.9, 0.99];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub trials: u64,
    pub mean: f64,
    /// Sample standard deviation (Bessel-corrected).
    pub std: f64,
    /// Root mean square, `sqrt(mean(x²))`.
    pub rms: f64,
    /// Keyed by the probability written as a decimal string.
    pub quantiles: BTreeMap<String, f64>,
    pub mean_stderr: f64,
    pub std_stderr: f64,
}

impl ErrorStats {
    /// Summary of `samples` in the given order; the sums are sequential so the
    /// result is bit-stable for a fixed sample order.
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        let n = samples.len();
        if n < 2 {
            return Err(invalid("at least two samples are required"));
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteTrial { trial: i as u64, quantity: "sample" });
        }
        let nf = n as f64;
        let mean = samples.iter().sum::<f64>() / nf;
        let ss = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
        let std = (ss / (nf - 1.0)).sqrt();
        let rms = (samples.iter().map(|x| x * x).sum::<f64>() / nf).sqrt();
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let quantiles = QUANTILE_LEVELS
            .iter()
            .map(|&p| (p.to_string(), quantile_sorted(&sorted, p)))
            .collect();
        Ok(Self {
            trials: n as u64,
            mean,
            std,
            rms,
            quantiles,
            mean_stderr: std / nf.sqrt(),
            std_stderr: std / (2.0 * (nf - 1.0)).sqrt(),
        })
    }

    pub fn quantile(&self, p: f64) -> Option<f64> {
        self.quantiles.get(&p.to_string()).copied()
    }
}

/// Linear interpolation between order statistics at position `(n-1)p`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// One row of a campaign.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialRecord {
    pub trial: u64,
    pub epsilon: f64,
    pub epsilon_net: f64,
}

/// Machine and net error of trials `0..trials`, in trial order.
pub fn campaign<T: Scalar>(
    prepared: &PreparedProduct<T>,
    spec: &NoiseSpec,
    trials: u64,
) -> Result<Vec<TrialRecord>> {
    use rayon::prelude::*;
    spec.validate()?;
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            prepared.trial_errors(spec, trial).map(|(e, n)| TrialRecord {
                trial,
                epsilon: e.to_f64_lossy(),
                epsilon_net: n.to_f64_lossy(),
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

/// Statistics of the machine error over trials `0..trials`.
pub fn monte_carlo<T: Scalar>(
    gens: &GeneratorSet<T>,
    schedule: &Schedule<T>,
    spec: &NoiseSpec,
    trials: u64,
) -> Result<ErrorStats> {
    if trials < MIN_TRIALS {
        return Err(invalid(format!("at least {MIN_TRIALS} trials are required, got {trials}")));
    }
    let prepared = PreparedProduct::new(gens, schedule)?;
    let records = campaign(&prepared, spec, trials)?;
    let eps: Vec<f64> = records.iter().map(|r| r.epsilon).collect();
    ErrorStats::from_samples(&eps)
}

/// Largest, over factor positions, of the across-trial standard deviation of
/// `‖Ũ_p‖/‖U_p‖`. Zero identically in norm-stabilized mode.
pub fn norm_ratio_spread<T: Scalar>(
    prepared: &PreparedProduct<T>,
    spec: &NoiseSpec,
    trials: u64,
) -> Result<f64> {
    if trials < 2 {
        return Err(invalid("at least two trials are required"));
    }
    let ratios = prepared.map_trials(spec, trials, |_, r| {
        r.per_factor_norm_ratio.iter().map(|x| x.to_f64_lossy()).collect::<Vec<_>>()
    })?;
    let n = trials as f64;
    let mut worst = 0.0f64;
    for p in 0..prepared.len() {
        let mean = ratios.iter().map(|r| r[p]).sum::<f64>() / n;
        let var = ratios.iter().map(|r| (r[p] - mean).powi(2)).sum::<f64>() / (n - 1.0);
        worst = worst.max(var.sqrt());
    }
    Ok(worst)
}
