//! Element-wise Gaussian machine-error model for the factors of a product
//! formula, and the machine / net error of the perturbed product.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::generators::GeneratorSet;
use crate::matrix::Matrix;
use crate::product::{exact_flow, ordered_product, schedule_factors};
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::schedule::Schedule;

/// Upper limit on `epsilon_m` for the small-error model to be meaningful.
pub const EPSILON_M_LIMIT: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    /// Independent Gaussian error on every entry, relative to its modulus.
    Gaussian,
    /// Gaussian error followed by projection onto the nearest unitary.
    GaussianUnitary,
    /// Gaussian error followed by rescaling to the exact factor's norm.
    NormStabilized,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub epsilon_m: f64,
    pub mode: NoiseMode,
    pub master_seed: u64,
}

impl NoiseSpec {
    pub fn new(epsilon_m: f64, mode: NoiseMode, master_seed: u64) -> Result<Self> {
        let spec = Self { epsilon_m, mode, master_seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon_m.is_finite() && self.epsilon_m >= 0.0 && self.epsilon_m < EPSILON_M_LIMIT) {
            return Err(invalid(format!(
                "epsilon_m must lie in [0, {EPSILON_M_LIMIT}), got {}",
                self.epsilon_m
            )));
        }
        Ok(())
    }

    /// Stream for factor `p` of trial `trial`.
    pub fn factor_stream(&self, trial: u64, p: usize) -> RngStream {
        RngStream::at(self.master_seed, &[trial, p as u64])
    }
}

/// Draws `Ũ` around `U`.
///
/// Entry `(i, j)` consumes normals `2(iℓ + j)` and `2(iℓ + j) + 1` of the
/// stream regardless of its value, so every entry's noise is a fixed function
/// of the stream identity. Real matrices stay real: the full relative standard
/// deviation goes into the real part. Complex entries split the variance
/// equally between real and imaginary parts.
pub fn perturb<T: Scalar>(u: &Matrix<T>, spec: &NoiseSpec, stream: &RngStream) -> Result<Matrix<T>> {
    u.ensure_finite()?;
    spec.validate()?;
    perturb_with_norm(u, None, spec, stream)
}

fn perturb_with_norm<T: Scalar>(
    u: &Matrix<T>,
    norm: Option<T>,
    spec: &NoiseSpec,
    stream: &RngStream,
) -> Result<Matrix<T>> {
    if spec.epsilon_m == 0.0 {
        return Ok(u.clone());
    }
    let eps = T::lit(spec.epsilon_m);
    let real = u.is_real();
    let split = T::FRAC_1_SQRT_2();
    let mut normals = stream.normals();
    let mut out = u.clone();
    for z in out.entries_mut() {
        let g_re = T::lit(normals.next().expect("infinite stream"));
        let g_im = T::lit(normals.next().expect("infinite stream"));
        let sigma = eps * z.norm();
        *z = if real {
            Complex::new(z.re + sigma * g_re, z.im)
        } else {
            let s = sigma * split;
            Complex::new(z.re + s * g_re, z.im + s * g_im)
        };
    }
    match spec.mode {
        NoiseMode::Gaussian => Ok(out),
        NoiseMode::GaussianUnitary => out.nearest_unitary(),
        NoiseMode::NormStabilized => {
            let target = match norm {
                Some(n) => n,
                None => u.spectral_norm_unchecked(),
            };
            let current = out.spectral_norm_unchecked();
            if current.is_zero() {
                return Err(Error::DivisionByZero("perturbed factor vanished".into()));
            }
            Ok(out.scale(target / current))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoisyProductResult<T> {
    pub ideal_product: Matrix<T>,
    pub noisy_product: Matrix<T>,
    /// `‖∏U_p − ∏Ũ_p‖ / ‖∏U_p‖`.
    pub machine_error: T,
    /// `‖e^{Σ A_i λ} − ∏Ũ_p‖ / ‖e^{Σ A_i λ}‖`.
    pub net_error: T,
    /// `‖U_p − Ũ_p‖ / ‖U_p‖` per factor.
    pub per_factor_rel_norm_error: Vec<T>,
    /// `‖Ũ_p‖ / ‖U_p‖` per factor.
    pub per_factor_norm_ratio: Vec<T>,
}

/// Exact quantities of a schedule that do not depend on the noise draw.
#[derive(Clone, Debug)]
pub struct PreparedProduct<T> {
    factors: Vec<Matrix<T>>,
    factor_norms: Vec<T>,
    ideal: Matrix<T>,
    ideal_norm: T,
    flow: Matrix<T>,
    flow_norm: T,
}

impl<T: Scalar> PreparedProduct<T> {
    pub fn new(gens: &GeneratorSet<T>, schedule: &Schedule<T>) -> Result<Self> {
        Self::from_factors(schedule_factors(gens, schedule)?, exact_flow(gens, schedule.lambda())?)
    }

    /// Uses explicit exact factors and reference flow.
    pub fn from_factors(factors: Vec<Matrix<T>>, flow: Matrix<T>) -> Result<Self> {
        let ideal = ordered_product(&factors)?;
        if ideal.dim() != flow.dim() {
            return Err(invalid("flow and factors differ in dimension"));
        }
        let factor_norms = factors.iter().map(Matrix::spectral_norm).collect::<Result<Vec<_>>>()?;
        if factor_norms.iter().any(|n| n.is_zero()) {
            return Err(Error::DivisionByZero("a factor has zero norm".into()));
        }
        let ideal_norm = ideal.spectral_norm()?;
        let flow_norm = flow.spectral_norm()?;
        if ideal_norm.is_zero() || flow_norm.is_zero() {
            return Err(Error::DivisionByZero("product or flow has zero norm".into()));
        }
        Ok(Self { factors, factor_norms, ideal, ideal_norm, flow, flow_norm })
    }

    pub fn factors(&self) -> &[Matrix<T>] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.ideal.dim()
    }

    pub fn ideal_product(&self) -> &Matrix<T> {
        &self.ideal
    }

    pub fn ideal_error(&self) -> T {
        (&self.flow - &self.ideal).spectral_norm_unchecked() / self.flow_norm
    }

    pub fn run_trial(&self, spec: &NoiseSpec, trial: u64) -> Result<NoisyProductResult<T>> {
        let mut rel = Vec::with_capacity(self.len());
        let mut ratio = Vec::with_capacity(self.len());
        let noisy_product = self.noisy(spec, trial, Some((&mut rel, &mut ratio)))?;
        let (machine_error, net_error) = self.errors_of(&noisy_product, trial)?;
        Ok(NoisyProductResult {
            ideal_product: self.ideal.clone(),
            noisy_product,
            machine_error,
            net_error,
            per_factor_rel_norm_error: rel,
            per_factor_norm_ratio: ratio,
        })
    }

    /// `(machine_error, net_error)` of one trial, skipping per-factor norms.
    /// Identical values to [`Self::run_trial`].
    pub fn trial_errors(&self, spec: &NoiseSpec, trial: u64) -> Result<(T, T)> {
        let noisy_product = self.noisy(spec, trial, None)?;
        self.errors_of(&noisy_product, trial)
    }

    /// The noisy product of one trial with its `(machine_error, net_error)`.
    pub fn trial_product(&self, spec: &NoiseSpec, trial: u64) -> Result<(Matrix<T>, T, T)> {
        let noisy_product = self.noisy(spec, trial, None)?;
        let (machine, net) = self.errors_of(&noisy_product, trial)?;
        Ok((noisy_product, machine, net))
    }

    fn noisy(
        &self,
        spec: &NoiseSpec,
        trial: u64,
        mut per_factor: Option<(&mut Vec<T>, &mut Vec<T>)>,
    ) -> Result<Matrix<T>> {
        spec.validate()?;
        let mut acc: Option<Matrix<T>> = None;
        let mut scratch = Matrix::zeros(self.dim());
        for (p, (u, &un)) in self.factors.iter().zip(&self.factor_norms).enumerate() {
            let noisy = perturb_with_norm(u, Some(un), spec, &spec.factor_stream(trial, p))?;
            if let Some((rel, ratio)) = per_factor.as_mut() {
                rel.push((u - &noisy).spectral_norm_unchecked() / un);
                let noisy_norm = match spec.mode {
                    NoiseMode::NormStabilized if spec.epsilon_m > 0.0 => un,
                    _ => noisy.spectral_norm_unchecked(),
                };
                ratio.push(noisy_norm / un);
            }
            acc = Some(match acc {
                None => noisy,
                Some(prev) => {
                    Matrix::mul_into(&noisy, &prev, &mut scratch);
                    std::mem::replace(&mut scratch, prev)
                }
            });
        }
        let noisy_product = acc.expect("non-empty factor list");
        if !noisy_product.is_finite() {
            return Err(Error::NonFiniteTrial { trial, quantity: "noisy product" });
        }
        Ok(noisy_product)
    }

    fn errors_of(&self, noisy_product: &Matrix<T>, trial: u64) -> Result<(T, T)> {
        let machine_error = (&self.ideal - noisy_product).spectral_norm_unchecked() / self.ideal_norm;
        if !machine_error.is_finite() {
            return Err(Error::NonFiniteTrial { trial, quantity: "machine error" });
        }
        let net_error = (&self.flow - noisy_product).spectral_norm_unchecked() / self.flow_norm;
        if !net_error.is_finite() {
            return Err(Error::NonFiniteTrial { trial, quantity: "net error" });
        }
        Ok((machine_error, net_error))
    }

    /// Runs trials `0..trials` in parallel and maps each result through `f`.
    /// Output is in trial order; the first failing trial (by index) is reported.
    pub fn map_trials<R, F>(&self, spec: &NoiseSpec, trials: u64, f: F) -> Result<Vec<R>>
    where
        R: Send,
        F: Fn(u64, NoisyProductResult<T>) -> R + Sync,
    {
        (0..trials)
            .into_par_iter()
            .map(|t| self.run_trial(spec, t).map(|res| f(t, res)))
            .collect::<Vec<_>>()
            .into_iter()
            .collect()
    }
}

/// Machine and net error of one noisy realization of the schedule product.
pub fn noisy_product<T: Scalar>(
    gens: &GeneratorSet<T>,
    schedule: &Schedule<T>,
    spec: &NoiseSpec,
    trial: u64,
) -> Result<NoisyProductResult<T>> {
    PreparedProduct::new(gens, schedule)?.run_trial(spec, trial)
}
