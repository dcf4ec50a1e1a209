//! Dense square complex matrices over a generic real scalar.

mod expm;
mod polar;
mod spectral;

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

pub use expm::EXP_NORM_GUARD;

/// Square matrix of complex entries, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Scalar> Matrix<T> {
    /// Builds a matrix from row-major entries, rejecting non-square shapes and
    /// non-finite values.
    pub fn new(dim: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("matrix dimension must be at least 1"));
        }
        if data.len() != dim * dim {
            return Err(invalid(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        let m = Self { dim, data };
        m.ensure_finite()?;
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(invalid("rows must form a square matrix"));
        }
        Self::new(dim, rows.iter().flatten().copied().collect())
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<Complex<T>>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex::new(T::lit(x), T::zero())).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be at least 1");
        Self { dim, data: vec![Complex::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex::one();
        }
        m
    }

    pub fn from_diagonal(diag: &[Complex<T>]) -> Result<Self> {
        let dim = diag.len();
        if dim == 0 {
            return Err(invalid("matrix dimension must be at least 1"));
        }
        let mut m = Self::zeros(dim);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m.ensure_finite()?;
        Ok(m)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major view of the entries.
    #[inline]
    pub fn entries(&self) -> &[Complex<T>] {
        &self.data
    }

    #[inline]
    pub(crate) fn entries_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub(crate) fn ensure_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(invalid("matrix has non-finite entries"))
        }
    }

    /// True when every imaginary part is exactly zero.
    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.is_zero())
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn scale(&self, factor: T) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&z| z * factor).collect() }
    }

    pub fn scale_complex(&self, factor: Complex<T>) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&z| z * factor).collect() }
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (a, b)| acc.max((*a - *b).norm()))
    }

    /// Converts every entry to another scalar type through `f64`-free casts.
    pub fn cast<U: Scalar>(&self) -> Matrix<U> {
        let conv = |x: T| -> U { num_traits::cast(x).expect("scalar cast") };
        Matrix {
            dim: self.dim,
            data: self.data.iter().map(|z| Complex::new(conv(z.re), conv(z.im))).collect(),
        }
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim).fold(Complex::zero(), |acc, i| acc + self[(i, i)])
    }

    /// `‖self − other‖ / ‖self‖` in the spectral norm.
    pub fn relative_distance(&self, other: &Self) -> Result<T> {
        check_same_dim(self, other)?;
        let base = self.spectral_norm()?;
        if base.is_zero() {
            return Err(Error::DivisionByZero("reference matrix has zero norm".into()));
        }
        Ok((self - other).spectral_norm()? / base)
    }

    /// `out = a * b` without allocating.
    pub(crate) fn mul_into(a: &Self, b: &Self, out: &mut Self) {
        let n = a.dim;
        debug_assert!(b.dim == n && out.dim == n);
        for i in 0..n {
            let row = &a.data[i * n..(i + 1) * n];
            let dst = &mut out.data[i * n..(i + 1) * n];
            dst.iter_mut().for_each(|z| *z = Complex::zero());
            for (k, &aik) in row.iter().enumerate() {
                if aik.is_zero() {
                    continue;
                }
                let brow = &b.data[k * n..(k + 1) * n];
                for (d, &bkj) in dst.iter_mut().zip(brow) {
                    *d = *d + aik * bkj;
                }
            }
        }
    }
}

pub(crate) fn check_same_dim<T>(a: &Matrix<T>, b: &Matrix<T>) -> Result<()> {
    if a.dim == b.dim {
        Ok(())
    } else {
        Err(invalid(format!("dimension mismatch: {} vs {}", a.dim, b.dim)))
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = Complex<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.dim + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.dim + j]
    }
}

impl<T: Scalar> Add for &Matrix<T> {
    type Output = Matrix<T>;
    fn add(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        Matrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a + *b).collect(),
        }
    }
}

impl<T: Scalar> Sub for &Matrix<T> {
    type Output = Matrix<T>;
    fn sub(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        Matrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a - *b).collect(),
        }
    }
}

impl<T: Scalar> Mul for &Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let mut out = Matrix::zeros(self.dim);
        Matrix::mul_into(self, rhs, &mut out);
        out
    }
}

impl<T: Scalar> Neg for &Matrix<T> {
    type Output = Matrix<T>;
    fn neg(self) -> Matrix<T> {
        Matrix { dim: self.dim, data: self.data.iter().map(|z| -*z).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn rejects_bad_shapes_and_values() {
        assert!(Matrix::<f64>::new(0, vec![]).is_err());
        assert!(Matrix::<f64>::new(2, vec![c(1.0, 0.0); 3]).is_err());
        assert!(Matrix::new(1, vec![c(f64::NAN, 0.0)]).is_err());
        assert!(Matrix::new(1, vec![c(0.0, f64::INFINITY)]).is_err());
    }

    #[test]
    fn product_matches_hand_expansion() {
        let a = Matrix::from_rows(&[vec![c(1.0, 1.0), c(2.0, 0.0)], vec![c(0.0, 0.0), c(0.0, -1.0)]])
            .unwrap();
        let b = Matrix::from_rows(&[vec![c(0.0, 1.0), c(1.0, 0.0)], vec![c(3.0, 0.0), c(1.0, 1.0)]])
            .unwrap();
        let p = &a * &b;
        // row 0: (1+i)i + 2*3 = -1+i+6, (1+i)*1 + 2(1+i) = 3+3i
        assert_eq!(p[(0, 0)], c(5.0, 1.0));
        assert_eq!(p[(0, 1)], c(3.0, 3.0));
        assert_eq!(p[(1, 0)], c(0.0, -3.0));
        assert_eq!(p[(1, 1)], c(1.0, -1.0));
    }

    #[test]
    fn relative_distance_examples() {
        let i2 = Matrix::<f64>::identity(2);
        assert_eq!(i2.relative_distance(&i2).unwrap(), 0.0);
        assert!((i2.relative_distance(&i2.scale(2.0)).unwrap() - 1.0).abs() < 1e-14);
        let u = Matrix::<f64>::from_real_rows(&[vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let v = Matrix::from_real_rows(&[vec![2.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert!((u.relative_distance(&v).unwrap() - 0.5).abs() < 1e-14);
        let z = Matrix::<f64>::zeros(2);
        assert!(matches!(z.relative_distance(&i2), Err(Error::DivisionByZero(_))));
    }

    #[test]
    fn adjoint_conjugates_and_transposes() {
        let a = Matrix::from_rows(&[vec![c(1.0, 2.0), c(3.0, 4.0)], vec![c(5.0, 6.0), c(7.0, 8.0)]])
            .unwrap();
        let h = a.adjoint();
        assert_eq!(h[(0, 1)], c(5.0, -6.0));
        assert_eq!(h[(1, 0)], c(3.0, -4.0));
        assert_eq!(h.adjoint(), a);
    }
}
