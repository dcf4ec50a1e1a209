//! Inverse and unitary polar factor.

use num_complex::Complex;
use num_traits::{One, Zero};

use super::Matrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const NEWTON_CAP: usize = 100;

impl<T: Scalar> Matrix<T> {
    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.dim();
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| {
                    a[(i, col)].norm_sqr().partial_cmp(&a[(j, col)].norm_sqr()).expect("finite")
                })
                .expect("non-empty range");
            if a[(pivot, col)].is_zero() {
                return Err(Error::InvalidInput("matrix is singular".into()));
            }
            if pivot != col {
                for j in 0..n {
                    let (p, c) = (pivot * n + j, col * n + j);
                    a.entries_mut().swap(p, c);
                    inv.entries_mut().swap(p, c);
                }
            }
            let d: Complex<T> = Complex::<T>::one() / a[(col, col)];
            for j in 0..n {
                a[(col, j)] = a[(col, j)] * d;
                inv[(col, j)] = inv[(col, j)] * d;
            }
            for i in 0..n {
                if i == col {
                    continue;
                }
                let f = a[(i, col)];
                if f.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let (aj, ij) = (a[(col, j)], inv[(col, j)]);
                    a[(i, j)] = a[(i, j)] - f * aj;
                    inv[(i, j)] = inv[(i, j)] - f * ij;
                }
            }
        }
        if !inv.is_finite() {
            return Err(Error::InvalidInput("matrix is numerically singular".into()));
        }
        Ok(inv)
    }

    /// Nearest unitary matrix in any unitarily invariant norm: the unitary
    /// factor `W` of the polar decomposition `M = W P`.
    ///
    /// Newton iteration `X ← (ζX + ζ⁻¹X^{-†})/2` with Frobenius-norm scaling
    /// while far from convergence.
    pub fn nearest_unitary(&self) -> Result<Self> {
        self.ensure_finite()?;
        let u = T::unit_roundoff();
        let half = T::lit(0.5);
        let stop = u.sqrt();
        let mut x = self.clone();
        let mut converged = false;
        for _ in 0..NEWTON_CAP {
            let inv_adj = x.inverse()?.adjoint();
            let step_was_small;
            let next = {
                let (nx, ni) = (x.frobenius_norm(), inv_adj.frobenius_norm());
                let zeta = (ni / nx).sqrt();
                let far = (zeta - T::one()).abs() > T::lit(1e-2);
                let (a, b) = if far { (zeta, zeta.recip()) } else { (T::one(), T::one()) };
                let next = &x.scale(a * half) + &inv_adj.scale(b * half);
                step_was_small = (&next - &x).frobenius_norm() <= stop * next.frobenius_norm();
                next
            };
            x = next;
            if converged {
                break;
            }
            // One extra step after the change drops below √u: quadratic
            // convergence then lands at roundoff level.
            converged = step_was_small;
        }
        if !converged {
            return Err(Error::NoConvergence("polar Newton iteration".into()));
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn unitarity_defect(m: &Matrix<f64>) -> f64 {
        (&(&m.adjoint() * m) - &Matrix::identity(m.dim())).spectral_norm().unwrap()
    }

    #[test]
    fn inverse_round_trip() {
        let a = Matrix::from_rows(&[
            vec![c(0.0, 1.0), c(2.0, 0.0), c(0.5, 0.5)],
            vec![c(1.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
            vec![c(0.3, -0.2), c(1.0, 1.0), c(2.0, 0.0)],
        ])
        .unwrap();
        let prod = &a * &a.inverse().unwrap();
        assert!(prod.max_abs_diff(&Matrix::identity(3)) < 1e-14);
    }

    #[test]
    fn singular_inverse_fails() {
        let a = Matrix::<f64>::from_real_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(a.inverse().is_err());
    }

    #[test]
    fn polar_factor_of_scaled_rotation() {
        let (cs, sn) = (0.8, 0.6);
        let r = Matrix::from_real_rows(&[vec![cs, -sn], vec![sn, cs]]).unwrap();
        let p = Matrix::from_real_rows(&[vec![3.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let w = (&r * &p).nearest_unitary().unwrap();
        assert!(w.max_abs_diff(&r) < 1e-13);
        assert!(unitarity_defect(&w) < 1e-14);
    }

    #[test]
    fn polar_factor_of_unitary_is_itself() {
        let i = Matrix::<f64>::identity(3);
        assert!(i.nearest_unitary().unwrap().max_abs_diff(&i) < 1e-15);
    }
}
