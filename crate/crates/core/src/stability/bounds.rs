use std::f64::consts::{E, LN_10};

use serde::{Serialize, Serializer};

use crate::error::{invalid, Result};

/// `√(5e² − 4e)`, the per-factor constant of the linear growth bound.
pub fn thm3_constant() -> f64 {
    (5.0 * E * E - 4.0 * E).sqrt()
}

/// Closed-form stability bounds for `N` factors on an `ℓ`-dimensional space.
///
/// Every value is non-negative. A value too large for `f64` is `+∞` in memory
/// and `null` in JSON; the exponential lower bound also carries its base-10
/// logarithm so that it stays informative past overflow.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    #[serde(rename = "N")]
    pub n: u64,
    pub dim: usize,
    pub epsilon_m: f64,
    pub epsilon_t: f64,
    /// `N ℓ^{(N−1)/2} ε_m`, a lower bound on σ(ε) without normalization.
    #[serde(serialize_with = "finite_or_null")]
    pub thm2_lower: f64,
    #[serde(serialize_with = "finite_or_null")]
    pub thm2_lower_log10: f64,
    /// `N ε_m √(5e² − 4e)`, valid when the factor norms barely fluctuate.
    #[serde(serialize_with = "finite_or_null")]
    pub thm3_upper: f64,
    /// `N ε_m √ℓ` for unitary factors.
    #[serde(serialize_with = "finite_or_null")]
    pub cor5_upper: f64,
    /// Largest `ε_m` for which the linear bound stays below `ε_t`.
    pub cor4_epsilon_m: f64,
    #[serde(serialize_with = "finite_or_null")]
    pub scalar_mean_lower: f64,
    #[serde(serialize_with = "finite_or_null")]
    pub scalar_std_lower: f64,
}

fn finite_or_null<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

fn check(n: u64, dim: usize, epsilon_m: f64) -> Result<()> {
    if n == 0 || dim == 0 {
        return Err(invalid(format!("N and dim must be positive, got N={n}, dim={dim}")));
    }
    if !(epsilon_m >= 0.0 && epsilon_m.is_finite()) {
        return Err(invalid(format!("epsilon_m must be finite and non-negative, got {epsilon_m}")));
    }
    Ok(())
}

/// Lower bounds `(μ, σ)` on the scalar machine error,
/// `e^{Nε²/2} − 1` and `√(e^{2Nε²} − e^{Nε²} − 2e^{Nε²/2} + 1)`.
/// The second is reported as zero where its radicand is negative.
pub fn scalar_bounds(n: u64, epsilon_m: f64) -> Result<(f64, f64)> {
    check(n, 1, epsilon_m)?;
    let u = (0.5 * n as f64 * epsilon_m * epsilon_m).exp_m1();
    // With y = 1 + u the radicand y⁴ − y² − 2y + 1 is u⁴ + 4u³ + 5u² − 1.
    let std_lower = if u < 1.0 {
        let rad = u * u * (u * u + 4.0 * u + 5.0) - 1.0;
        rad.max(0.0).sqrt()
    } else {
        let w = 1.0 / u;
        u * u * (1.0 + 4.0 * w + 5.0 * w * w - w.powi(4)).sqrt()
    };
    Ok((u, std_lower))
}

pub fn theorem_bounds(n: u64, dim: usize, epsilon_m: f64, epsilon_t: f64) -> Result<BoundReport> {
    check(n, dim, epsilon_m)?;
    let cor4_epsilon_m = required_machine_epsilon(epsilon_t, n, dim)?;
    let (nf, lf) = (n as f64, dim as f64);
    let ln_thm2 = nf.ln() + 0.5 * (nf - 1.0) * lf.ln() + epsilon_m.ln();
    let (scalar_mean_lower, scalar_std_lower) = scalar_bounds(n, epsilon_m)?;
    Ok(BoundReport {
        n,
        dim,
        epsilon_m,
        epsilon_t,
        thm2_lower: ln_thm2.exp(),
        thm2_lower_log10: ln_thm2 / LN_10,
        thm3_upper: nf * epsilon_m * thm3_constant(),
        cor5_upper: nf * epsilon_m * lf.sqrt(),
        cor4_epsilon_m,
        scalar_mean_lower,
        scalar_std_lower,
    })
}

/// `ε_t / (N √(ℓ(5e² − 4e)))`.
pub fn required_machine_epsilon(epsilon_t: f64, n: u64, dim: usize) -> Result<f64> {
    if !(epsilon_t > 0.0 && epsilon_t.is_finite()) {
        return Err(invalid(format!("epsilon_t must be positive, got {epsilon_t}")));
    }
    check(n, dim, 0.0)?;
    Ok(epsilon_t / (n as f64 * (dim as f64).sqrt() * thm3_constant()))
}
