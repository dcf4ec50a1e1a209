//! Spectral norm via the Gram matrix: `‖M‖² = λ_max(M†M)`.
//!
//! The Hermitian Gram matrix is reduced to real symmetric tridiagonal form with
//! Householder reflections, and its largest eigenvalue is located by Sturm-count
//! bisection. Bisection has a fixed iteration cap and no data-dependent
//! branching on convergence order, so results are reproducible bit for bit.

use num_complex::Complex;
use num_traits::Zero;

use super::Matrix;
use crate::error::Result;
use crate::scalar::Scalar;

const BISECTION_CAP: usize = 400;

impl<T: Scalar> Matrix<T> {
    /// Largest singular value.
    pub fn spectral_norm(&self) -> Result<T> {
        self.ensure_finite()?;
        Ok(self.spectral_norm_unchecked())
    }

    pub(crate) fn spectral_norm_unchecked(&self) -> T {
        let n = self.dim();
        if n == 1 {
            return self.entries()[0].norm();
        }
        // Rescale so the Gram matrix cannot overflow or flush to zero.
        let scale = self.entries().iter().fold(T::zero(), |m, z| m.max(z.re.abs()).max(z.im.abs()));
        if scale.is_zero() {
            return T::zero();
        }
        let inv = scale.recip();
        let a: Vec<Complex<T>> = self.entries().iter().map(|&z| z * inv).collect();
        let mut gram = gram_matrix(&a, n);
        let (diag, off) = tridiagonalize(&mut gram, n);
        largest_eigenvalue(&diag, &off).max(T::zero()).sqrt() * scale
    }
}

/// `A†A`, row-major, for a row-major `n×n` input.
fn gram_matrix<T: Scalar>(a: &[Complex<T>], n: usize) -> Vec<Complex<T>> {
    let mut g = vec![Complex::zero(); n * n];
    for k in 0..n {
        let row = &a[k * n..(k + 1) * n];
        for i in 0..n {
            let aki = row[i].conj();
            if aki.is_zero() {
                continue;
            }
            for j in i..n {
                g[i * n + j] = g[i * n + j] + aki * row[j];
            }
        }
    }
    for i in 0..n {
        g[i * n + i] = Complex::new(g[i * n + i].re, T::zero());
        for j in 0..i {
            g[i * n + j] = g[j * n + i].conj();
        }
    }
    g
}

/// Householder reduction of a Hermitian matrix. Returns the real diagonal and
/// the moduli of the sub-diagonal; a diagonal unitary similarity makes the
/// complex sub-diagonal real, so these fully determine the spectrum.
fn tridiagonalize<T: Scalar>(h: &mut [Complex<T>], n: usize) -> (Vec<T>, Vec<T>) {
    let mut off = vec![T::zero(); n.saturating_sub(1)];
    let mut v = vec![Complex::zero(); n];
    let mut p = vec![Complex::zero(); n];
    for k in 0..n.saturating_sub(1) {
        let m = n - k - 1;
        let col = |i: usize| h[(k + 1 + i) * n + k];
        let alpha = (0..m).fold(T::zero(), |acc, i| acc + col(i).norm_sqr()).sqrt();
        off[k] = alpha;
        if m == 1 || alpha.is_zero() {
            continue;
        }
        let x0 = col(0);
        let r0 = x0.norm();
        let phase = if r0.is_zero() { Complex::new(T::one(), T::zero()) } else { x0 / r0 };
        for i in 0..m {
            v[i] = col(i);
        }
        v[0] = v[0] + phase * alpha;
        let vnorm = (0..m).fold(T::zero(), |acc, i| acc + v[i].norm_sqr()).sqrt();
        if vnorm.is_zero() {
            continue;
        }
        for vi in v.iter_mut().take(m) {
            *vi = *vi / vnorm;
        }
        // Trailing block B ← (I − 2vv†) B (I − 2vv†) = B − 2(v w† + w v†),
        // with p = Bv, K = v†p, w = p − K v.
        let at = |i: usize, j: usize| (k + 1 + i) * n + (k + 1 + j);
        for i in 0..m {
            p[i] = (0..m).fold(Complex::zero(), |acc, j| acc + h[at(i, j)] * v[j]);
        }
        let kk = (0..m).fold(T::zero(), |acc, i| acc + (v[i].conj() * p[i]).re);
        for i in 0..m {
            p[i] = p[i] - v[i] * kk;
        }
        let two = T::one() + T::one();
        for i in 0..m {
            for j in 0..m {
                let upd = v[i] * p[j].conj() + p[i] * v[j].conj();
                h[at(i, j)] = h[at(i, j)] - upd * two;
            }
        }
    }
    let diag = (0..n).map(|i| h[i * n + i].re).collect();
    (diag, off)
}

/// Number of eigenvalues of the symmetric tridiagonal matrix strictly below `x`.
fn count_below<T: Scalar>(diag: &[T], off: &[T], x: T) -> usize {
    let tiny = T::min_positive_value().sqrt();
    let mut count = 0;
    let mut q = diag[0] - x;
    for i in 0..diag.len() {
        if i > 0 {
            let e = off[i - 1];
            q = diag[i] - x - e * e / q;
        }
        if q.is_zero() {
            q = -tiny;
        }
        if q < T::zero() {
            count += 1;
        }
    }
    count
}

fn largest_eigenvalue<T: Scalar>(diag: &[T], off: &[T]) -> T {
    let n = diag.len();
    let radius = |i: usize| {
        let left = if i > 0 { off[i - 1].abs() } else { T::zero() };
        let right = if i + 1 < n { off[i].abs() } else { T::zero() };
        left + right
    };
    let mut lo = (0..n).map(|i| diag[i] - radius(i)).fold(T::infinity(), T::min);
    let mut hi = (0..n).map(|i| diag[i] + radius(i)).fold(T::neg_infinity(), T::max);
    let two = T::one() + T::one();
    let tol = T::unit_roundoff() * (two + two);
    for _ in 0..BISECTION_CAP {
        let scale = lo.abs().max(hi.abs());
        if hi - lo <= tol * scale {
            break;
        }
        let mid = (lo + hi) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(diag, off, mid) == n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo + hi) / two
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::DoubleDouble;
    use num_traits::Float;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn identity_has_unit_norm() {
        assert!((Matrix::<f64>::identity(3).spectral_norm().unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_norm_is_max_modulus() {
        let d = Matrix::from_diagonal(&[c(1.0, 0.0), c(2.0, 0.0)]).unwrap();
        assert!((d.spectral_norm().unwrap() - 2.0).abs() < 1e-15);
        let d = Matrix::from_diagonal(&[c(0.0, -3.0), c(2.0, 0.0), c(1.0, 1.0)]).unwrap();
        assert!((d.spectral_norm().unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn nilpotent_block() {
        // M†M = diag(0, 9).
        let m = Matrix::<f64>::from_real_rows(&[vec![0.0, 3.0], vec![0.0, 0.0]]).unwrap();
        assert!((m.spectral_norm().unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_iff_zero_matrix() {
        assert_eq!(Matrix::<f64>::zeros(4).spectral_norm().unwrap(), 0.0);
        let mut m = Matrix::<f64>::zeros(4);
        m[(3, 1)] = c(1e-300, 0.0);
        assert!(m.spectral_norm().unwrap() > 0.0);
    }

    #[test]
    fn rank_one_outer_product() {
        // u v† has norm |u||v|.
        let u = [c(1.0, 1.0), c(0.0, 2.0), c(-1.0, 0.5)];
        let v = [c(0.5, 0.0), c(1.0, -1.0), c(2.0, 0.0)];
        let mut m = Matrix::zeros(3);
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] = u[i] * v[j].conj();
            }
        }
        let nu: f64 = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let nv: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!((m.spectral_norm().unwrap() - nu * nv).abs() < 1e-13);
    }

    #[test]
    fn rejects_non_finite() {
        let m = Matrix { dim: 1, data: vec![c(f64::NAN, 0.0)] };
        assert!(m.spectral_norm().is_err());
    }

    #[test]
    fn double_double_resolves_tiny_differences() {
        let eps = DoubleDouble::from(1e-20);
        let one = DoubleDouble::from(1.0);
        let zero = DoubleDouble::from(0.0);
        let z = |x: DoubleDouble| Complex::new(x, zero);
        let a = Matrix::new(2, vec![z(one), z(zero), z(zero), z(one + eps)]).unwrap();
        let n = a.spectral_norm().unwrap();
        assert!(((n - one) / eps - one).abs() < DoubleDouble::from(1e-10));
    }

    #[test]
    fn tridiagonal_count_matches_diagonal_spectrum() {
        let d = [1.0f64, 5.0, 3.0];
        let e = [0.0, 0.0];
        assert_eq!(count_below(&d, &e, 2.0), 1);
        assert_eq!(count_below(&d, &e, 4.0), 2);
        assert!((largest_eigenvalue(&d, &e) - 5.0).abs() < 1e-14);
    }
}
