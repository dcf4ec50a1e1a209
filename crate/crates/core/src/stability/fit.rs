use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthModel {
    Linear,
    Exponential,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub model: GrowthModel,
    /// Slope `a` of `σ = aN`, or exponent `b` of `σ = a e^{bN}`.
    pub rate: f64,
    pub r_squared: f64,
    pub linear_r_squared: f64,
    /// `None` when some σ is not positive and no log-space fit exists.
    pub exponential_r_squared: Option<f64>,
}

fn r_squared(ys: &[f64], predicted: impl Iterator<Item = f64>) -> f64 {
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
    let ss_res: f64 = ys.iter().zip(predicted).map(|(y, p)| (y - p).powi(2)).sum();
    (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
}

/// Classifies `(N, σ)` as linear through the origin or exponential.
///
/// The linear model is an ordinary least-squares slope through the origin.
/// The exponential model is a straight-line fit of `ln σ` against `N`.
/// Both are scored by r² on σ itself and the better score wins, ties going
/// to linear.
pub fn fit_growth(points: &[(f64, f64)]) -> Result<GrowthFit> {
    if points.len() < 4 {
        return Err(invalid(format!("growth fit needs at least 4 points, got {}", points.len())));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(invalid("growth fit points must be finite"));
    }
    if points.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(invalid("growth fit needs strictly increasing N"));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    if ys.iter().all(|&y| y == ys[0]) {
        return Ok(GrowthFit {
            model: GrowthModel::Linear,
            rate: 0.0,
            r_squared: 0.0,
            linear_r_squared: 0.0,
            exponential_r_squared: None,
        });
    }

    let slope = xs.iter().zip(&ys).map(|(x, y)| x * y).sum::<f64>() / xs.iter().map(|x| x * x).sum::<f64>();
    let lin_r2 = r_squared(&ys, xs.iter().map(|x| slope * x));

    let exp = if ys.iter().all(|&y| y > 0.0) {
        let n = xs.len() as f64;
        let ls: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
        let mx = xs.iter().sum::<f64>() / n;
        let ml = ls.iter().sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let sxl: f64 = xs.iter().zip(&ls).map(|(x, l)| (x - mx) * (l - ml)).sum();
        let b = sxl / sxx;
        let ln_a = ml - b * mx;
        Some((b, r_squared(&ys, xs.iter().map(|x| (ln_a + b * x).exp()))))
    } else {
        None
    };

    Ok(match exp {
        Some((b, r2)) if r2 > lin_r2 => GrowthFit {
            model: GrowthModel::Exponential,
            rate: b,
            r_squared: r2,
            linear_r_squared: lin_r2,
            exponential_r_squared: Some(r2),
        },
        _ => GrowthFit {
            model: GrowthModel::Linear,
            rate: slope,
            r_squared: lin_r2,
            linear_r_squared: lin_r2,
            exponential_r_squared: exp.map(|e| e.1),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_linear() {
        let pts: Vec<_> = [1.0, 2.0, 5.0, 9.0].iter().map(|&n| (n, 3.0 * n)).collect();
        let f = fit_growth(&pts).unwrap();
        assert_eq!(f.model, GrowthModel::Linear);
        assert!((f.rate - 3.0).abs() < 1e-12);
        assert!(f.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn exact_exponential() {
        let pts: Vec<_> = [1.0f64, 3.0, 6.0, 10.0].iter().map(|&n| (n, (0.5 * n).exp())).collect();
        let f = fit_growth(&pts).unwrap();
        assert_eq!(f.model, GrowthModel::Exponential);
        assert!((f.rate - 0.5).abs() < 1e-12);
        assert!(f.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn degenerate_and_invalid() {
        let flat = [(1.0, 2.0), (2.0, 2.0), (3.0, 2.0), (4.0, 2.0)];
        let f = fit_growth(&flat).unwrap();
        assert_eq!((f.model, f.rate), (GrowthModel::Linear, 0.0));
        assert!(fit_growth(&flat[..3]).is_err());
        assert!(fit_growth(&[(1.0, 1.0), (1.0, 2.0), (3.0, 3.0), (4.0, 4.0)]).is_err());
        assert!(fit_growth(&[(1.0, 0.0), (2.0, 2.0), (3.0, 3.0), (4.0, f64::NAN)]).is_err());
    }

    #[test]
    fn zero_sigma_forces_linear() {
        let f = fit_growth(&[(1.0, 0.0), (2.0, 2.1), (3.0, 2.9), (4.0, 4.0)]).unwrap();
        assert_eq!(f.model, GrowthModel::Linear);
        assert!(f.exponential_r_squared.is_none());
    }
}
