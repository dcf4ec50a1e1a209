use std::f64::consts::{PI, SQRT_2};

use statrs::function::erf::erfc;

use crate::error::{invalid, Error, Result};

fn check_params(n: u64, epsilon_m: f64) -> Result<f64> {
    if n == 0 || !(epsilon_m > 0.0 && epsilon_m.is_finite()) {
        return Err(invalid(format!("need N >= 1 and epsilon_m > 0, got N={n}, epsilon_m={epsilon_m}")));
    }
    Ok((n as f64).sqrt() * epsilon_m)
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

/// Density of `X = ∏ X_p` for `N` factors with `ln X ~ N(0, Nε_m²)`.
pub fn lognormal_pdf(x: f64, n: u64, epsilon_m: f64) -> Result<f64> {
    let s = check_params(n, epsilon_m)?;
    if !(x > 0.0) {
        return Err(invalid(format!("log-normal density needs x > 0, got {x}")));
    }
    let z = x.ln() / s;
    Ok((-0.5 * z * z).exp() / (x * (2.0 * PI).sqrt() * s))
}

pub fn lognormal_cdf(x: f64, n: u64, epsilon_m: f64) -> Result<f64> {
    let s = check_params(n, epsilon_m)?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    Ok(std_normal_cdf(x.ln() / s))
}

/// Density of `ε = |1 − X|`: both branches `1 ∓ ε` contribute on `[0, 1]`,
/// only `1 + ε` above.
pub fn folded_lognormal_pdf(eps: f64, n: u64, epsilon_m: f64) -> Result<f64> {
    check_params(n, epsilon_m)?;
    if eps.is_nan() {
        return Err(invalid("folded density evaluated at NaN"));
    }
    if eps <= 0.0 {
        return Ok(0.0);
    }
    let upper = lognormal_pdf(1.0 + eps, n, epsilon_m)?;
    if eps < 1.0 {
        Ok(upper + lognormal_pdf(1.0 - eps, n, epsilon_m)?)
    } else {
        Ok(upper)
    }
}

pub fn folded_lognormal_cdf(eps: f64, n: u64, epsilon_m: f64) -> Result<f64> {
    check_params(n, epsilon_m)?;
    if eps <= 0.0 {
        return Ok(0.0);
    }
    Ok(lognormal_cdf(1.0 + eps, n, epsilon_m)? - lognormal_cdf(1.0 - eps, n, epsilon_m)?)
}

fn single_factor_scale(epsilon_m: f64, dim: usize) -> Result<f64> {
    if dim == 0 || !(epsilon_m > 0.0 && epsilon_m.is_finite()) {
        return Err(invalid(format!("need dim >= 1 and epsilon_m > 0, got dim={dim}, epsilon_m={epsilon_m}")));
    }
    Ok(epsilon_m * epsilon_m * dim as f64)
}

/// Limiting density of the relative norm error `x = ‖U − Ũ‖/‖U‖` of one factor.
///
/// `x²` follows a quarter-circle law of variance `a = ε_m²ℓ` on `[0, 4a]`;
/// in terms of `x` this is `√(4a − x²)/(πa)` on `[0, 2√a]`.
pub fn single_factor_norm_pdf(x: f64, epsilon_m: f64, dim: usize) -> Result<f64> {
    let a = single_factor_scale(epsilon_m, dim)?;
    if !(x >= 0.0) || x * x >= 4.0 * a {
        return Ok(0.0);
    }
    Ok((4.0 * a - x * x).sqrt() / (PI * a))
}

pub fn single_factor_norm_cdf(x: f64, epsilon_m: f64, dim: usize) -> Result<f64> {
    let a = single_factor_scale(epsilon_m, dim)?;
    if !(x > 0.0) {
        return Ok(0.0);
    }
    let top = 2.0 * a.sqrt();
    if x >= top {
        return Ok(1.0);
    }
    let area = 0.5 * x * (4.0 * a - x * x).sqrt() + 2.0 * a * (x / top).asin();
    Ok((area / (PI * a)).min(1.0))
}

/// Two-sided Kolmogorov-Smirnov statistic of `samples` against `cdf`.
pub fn ks_distance<F>(samples: &[f64], cdf: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if samples.is_empty() {
        return Err(invalid("KS distance of an empty sample"));
    }
    if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFiniteTrial { trial: i as u64, quantity: "sample" });
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x)?;
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}
