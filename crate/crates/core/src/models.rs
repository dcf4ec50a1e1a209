//! Hubbard-model building blocks: the two-site term matrix, its simulation
//! cost and machine-precision budget, and square-lattice bonds.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::generators::{GeneratorClass, GeneratorSet};
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::stability::thm3_constant;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Open,
    #[default]
    Periodic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HubbardParams {
    #[serde(rename = "t_H")]
    pub t_h: f64,
    #[serde(rename = "U_H")]
    pub u_h: f64,
    pub eta: u64,
    /// Magnitude of the real or imaginary simulation time.
    pub sim_time: f64,
    pub epsilon_t: f64,
    #[serde(default)]
    pub boundary: Boundary,
}

impl HubbardParams {
    pub fn validate(&self) -> Result<()> {
        if !self.t_h.is_finite() || !self.u_h.is_finite() {
            return Err(invalid("t_H and U_H must be finite"));
        }
        if self.eta < 2 {
            return Err(invalid(format!("eta must be at least 2, got {}", self.eta)));
        }
        if !(self.sim_time >= 0.0 && self.sim_time.is_finite()) {
            return Err(invalid(format!("sim_time must be finite and non-negative, got {}", self.sim_time)));
        }
        if !(self.epsilon_t > 0.0 && self.epsilon_t.is_finite()) {
            return Err(invalid(format!("epsilon_t must be positive, got {}", self.epsilon_t)));
        }
        Ok(())
    }

    pub fn tau(&self) -> f64 {
        hubbard_tau(self.sim_time, self.t_h, self.u_h)
    }

    /// Default term count for the cost formulas, `η²`.
    pub fn default_terms(&self) -> u64 {
        self.eta * self.eta
    }
}

/// Two-site Hamiltonian in the basis `|↑,↓⟩, |↓,↑⟩, |↑↓,•⟩, |•,↑↓⟩`.
pub fn hubbard_term_matrix<T: Scalar>(t_h: f64, u_h: f64) -> Result<Matrix<T>> {
    let (t, u) = (t_h, u_h);
    Matrix::from_real_rows(&[
        vec![0.0, 0.0, -t, -t],
        vec![0.0, 0.0, t, t],
        vec![-t, t, u, 0.0],
        vec![-t, t, 0.0, u],
    ])
}

/// `|t| √(8t_H² + 2U_H²)`.
pub fn hubbard_tau(sim_time: f64, t_h: f64, u_h: f64) -> f64 {
    sim_time.abs() * (8.0 * t_h * t_h + 2.0 * u_h * u_h).sqrt()
}

/// `2√(ln 5 · ln(mτ/ε_t))`, the exponent shared by cost and budget.
fn cost_exponent(tau: f64, m: u64, epsilon_t: f64) -> Result<f64> {
    if !(epsilon_t > 0.0) || !tau.is_finite() || m == 0 {
        return Err(invalid(format!("need epsilon_t > 0, finite tau and m >= 1 (tau={tau}, m={m}, epsilon_t={epsilon_t})")));
    }
    let ratio_ln = (m as f64).ln() + tau.ln() - epsilon_t.ln();
    if !(ratio_ln > 0.0) {
        return Err(Error::Domain(format!("m*tau/epsilon_t must exceed 1 (m={m}, tau={tau}, epsilon_t={epsilon_t})")));
    }
    Ok(2.0 * (5f64.ln() * ratio_ln).sqrt())
}

/// Exponential count `2η⁴τ e^{2√(ln 5 · ln(mτ/ε_t))}`, evaluated in log space.
pub fn hubbard_cost(eta: u64, tau: f64, m: u64, epsilon_t: f64) -> Result<f64> {
    let x = cost_exponent(tau, m, epsilon_t)?;
    Ok((2f64.ln() + 4.0 * (eta as f64).ln() + tau.ln() + x).exp())
}

/// Machine-precision budget `ε_t e^{−2√(ln 5 · ln(mτ/ε_t))} / (4η⁴τ√(5e² − 4e))`.
pub fn hubbard_machine_epsilon(epsilon_t: f64, eta: u64, tau: f64, m: u64) -> Result<f64> {
    let x = cost_exponent(tau, m, epsilon_t)?;
    let ln = epsilon_t.ln() - x - 4f64.ln() - 4.0 * (eta as f64).ln() - tau.ln() - thm3_constant().ln();
    Ok(ln.exp())
}

/// Relative residual of `ε_m · 4η⁴τ e^{2√(ln 5 · ln(mτ/ε_t))} · √(5e² − 4e) = ε_t`.
pub fn hubbard_cross_check(epsilon_m: f64, epsilon_t: f64, eta: u64, tau: f64, m: u64) -> Result<f64> {
    let x = cost_exponent(tau, m, epsilon_t)?;
    let lhs = epsilon_m * 4.0 * (eta as f64).powi(4) * tau * x.exp() * thm3_constant();
    Ok((lhs - epsilon_t).abs() / epsilon_t)
}

/// Nearest-neighbour bonds of an `η × η` lattice as site-index pairs.
///
/// Sites are numbered row-major. Each site contributes its right then its
/// lower neighbour. With periodic wrap every site has both, giving `2η²` bonds
/// even for `η = 2`, where each wrapped bond repeats an interior one.
pub fn enumerate_lattice_terms(eta: usize, boundary: Boundary) -> Result<Vec<(usize, usize)>> {
    if eta < 2 {
        return Err(invalid(format!("eta must be at least 2, got {eta}")));
    }
    let site = |r: usize, c: usize| r * eta + c;
    let mut bonds = Vec::with_capacity(2 * eta * eta);
    for r in 0..eta {
        for c in 0..eta {
            match boundary {
                Boundary::Open => {
                    if c + 1 < eta {
                        bonds.push((site(r, c), site(r, c + 1)));
                    }
                    if r + 1 < eta {
                        bonds.push((site(r, c), site(r + 1, c)));
                    }
                }
                Boundary::Periodic => {
                    bonds.push((site(r, c), site(r, (c + 1) % eta)));
                    bonds.push((site(r, c), site((r + 1) % eta, c)));
                }
            }
        }
    }
    Ok(bonds)
}

/// Whether the flow is `e^{−iHt}` or `e^{−Ht}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evolution {
    #[default]
    Real,
    Imaginary,
}

/// The term matrix split into hopping and on-site generators, scaled for
/// unit-time evolution: `A = −iH` (real time) or `A = −H` (imaginary time).
pub fn hubbard_generators<T: Scalar>(t_h: f64, u_h: f64, evolution: Evolution) -> Result<GeneratorSet<T>> {
    let hop = hubbard_term_matrix::<T>(t_h, 0.0)?;
    let site = hubbard_term_matrix::<T>(0.0, u_h)?;
    let (factor, class) = match evolution {
        Evolution::Real => (Complex::new(T::zero(), -T::one()), GeneratorClass::SkewHermitian),
        Evolution::Imaginary => (Complex::new(-T::one(), T::zero()), GeneratorClass::Hermitian),
    };
    GeneratorSet::new(vec![hop.scale_complex(factor), site.scale_complex(factor)], class)
}
