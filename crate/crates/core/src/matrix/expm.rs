//! Matrix exponential by scaling and squaring around a truncated Taylor series.
//!
//! The series is truncated adaptively at the unit roundoff of the scalar type,
//! which keeps the same routine accurate for `f64` and for double-double.


use super::Matrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Inputs with spectral norm above this are rejected rather than overflowing.
pub const EXP_NORM_GUARD: f64 = 700.0;

const MAX_TERMS: usize = 80;

impl<T: Scalar> Matrix<T> {
    /// `e^M`.
    pub fn exp(&self) -> Result<Self> {
        let norm = self.spectral_norm()?;
        if norm > T::lit(EXP_NORM_GUARD) {
            return Err(Error::Range(format!(
                "matrix exponential argument norm {} exceeds guard {EXP_NORM_GUARD}",
                norm.to_f64_lossy()
            )));
        }
        let n = self.dim();
        if norm.is_zero() {
            return Ok(Self::identity(n));
        }
        // Scale into ‖X‖ ≤ 1/2.
        let half = T::lit(0.5);
        let mut squarings = 0u32;
        let mut scaled_norm = norm;
        while scaled_norm > half {
            scaled_norm = scaled_norm * half;
            squarings += 1;
        }
        let x = self.scale(T::lit(0.5f64.powi(squarings as i32)));

        let mut sum = Self::identity(n);
        let mut term = Self::identity(n);
        let mut scratch = Self::zeros(n);
        let u = T::unit_roundoff();
        for k in 1..=MAX_TERMS {
            Self::mul_into(&term, &x, &mut scratch);
            std::mem::swap(&mut term, &mut scratch);
            let inv_k = T::from_count(k).recip();
            term.entries_mut().iter_mut().for_each(|z| *z = *z * inv_k);
            sum = &sum + &term;
            if term.frobenius_norm() <= u * sum.frobenius_norm() {
                break;
            }
        }
        for _ in 0..squarings {
            Self::mul_into(&sum, &sum, &mut scratch);
            std::mem::swap(&mut sum, &mut scratch);
        }
        if !sum.is_finite() {
            return Err(Error::Range("matrix exponential overflowed".into()));
        }
        Ok(sum)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    /// Partial Taylor sums without scaling; independent of the implementation path.
    fn taylor_oracle(m: &Matrix<f64>, terms: usize) -> Matrix<f64> {
        let n = m.dim();
        let mut sum = Matrix::identity(n);
        let mut term = Matrix::identity(n);
        for k in 1..terms {
            term = (&term * m).scale(1.0 / k as f64);
            sum = &sum + &term;
        }
        sum
    }

    #[test]
    fn zero_maps_to_identity() {
        assert_eq!(Matrix::<f64>::zeros(3).exp().unwrap(), Matrix::identity(3));
    }

    #[test]
    fn diagonal_exponentiates_entrywise() {
        let (a, b) = (0.7, -2.3);
        let e = Matrix::from_diagonal(&[c(a, 0.0), c(b, 0.0)]).unwrap().exp().unwrap();
        assert!((e[(0, 0)].re - a.exp()).abs() < 1e-15 * a.exp());
        assert!((e[(1, 1)].re - b.exp()).abs() < 1e-15);
        assert_eq!(e[(0, 1)], c(0.0, 0.0));
    }

    #[test]
    fn rotation_generator() {
        let theta: f64 = 0.3;
        let m = Matrix::from_real_rows(&[vec![0.0, theta], vec![-theta, 0.0]]).unwrap();
        let oracle = taylor_oracle(&m, 30);
        let expected =
            Matrix::from_real_rows(&[vec![theta.cos(), theta.sin()], vec![-theta.sin(), theta.cos()]])
                .unwrap();
        assert!(oracle.max_abs_diff(&expected) < 1e-13);
        let e = m.exp().unwrap();
        assert!(e.max_abs_diff(&expected) < 1e-13);
    }

    #[test]
    fn large_hermitian_argument_stays_accurate() {
        // diag(50, -50) conjugated by a rotation: exact answer known in closed form.
        let (cs, sn) = (0.6, 0.8);
        let q = Matrix::<f64>::from_real_rows(&[vec![cs, -sn], vec![sn, cs]]).unwrap();
        let d = Matrix::from_real_rows(&[vec![50.0, 0.0], vec![0.0, -50.0]]).unwrap();
        let m = &(&q * &d) * &q.adjoint();
        let ed = Matrix::from_real_rows(&[vec![50f64.exp(), 0.0], vec![0.0, (-50f64).exp()]]).unwrap();
        let expected = &(&q * &ed) * &q.adjoint();
        let got = m.exp().unwrap();
        assert!(expected.relative_distance(&got).unwrap() < 1e-12);
    }

    #[test]
    fn overflow_guard() {
        let m = Matrix::<f64>::from_real_rows(&[vec![701.0]]).unwrap();
        assert!(matches!(m.exp(), Err(Error::Range(_))));
        let m = Matrix::<f64>::from_real_rows(&[vec![699.0]]).unwrap();
        assert!(m.exp().is_ok());
    }
}
