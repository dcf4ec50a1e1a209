use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::matrix::Matrix;
use crate::rng::RngStream;
use crate::scalar::Scalar;

/// Entrywise tolerance for the structural class check.
pub const CLASS_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorClass {
    Hermitian,
    SkewHermitian,
    General,
}

impl GeneratorClass {
    pub fn admits<T: Scalar>(self, m: &Matrix<T>) -> bool {
        let tol = T::lit(CLASS_TOLERANCE);
        match self {
            GeneratorClass::General => true,
            GeneratorClass::Hermitian => m.max_abs_diff(&m.adjoint()) <= tol,
            GeneratorClass::SkewHermitian => m.max_abs_diff(&-&m.adjoint()) <= tol,
        }
    }
}

/// The operators `A_1 … A_m` whose sum generates the flow being decomposed.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSet<T> {
    dim: usize,
    generators: Vec<Matrix<T>>,
    class: GeneratorClass,
}

impl<T: Scalar> GeneratorSet<T> {
    pub fn new(generators: Vec<Matrix<T>>, class: GeneratorClass) -> Result<Self> {
        let first = generators.first().ok_or_else(|| invalid("generator set is empty"))?;
        let dim = first.dim();
        for (j, g) in generators.iter().enumerate() {
            if g.dim() != dim {
                return Err(invalid(format!("generator {} has dim {}, expected {dim}", j + 1, g.dim())));
            }
            g.ensure_finite()?;
            if !class.admits(g) {
                return Err(invalid(format!("generator {} is not {class:?}", j + 1)));
            }
        }
        Ok(Self { dim, generators, class })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn class(&self) -> GeneratorClass {
        self.class
    }

    pub fn generators(&self) -> &[Matrix<T>] {
        &self.generators
    }

    pub fn get(&self, j: usize) -> &Matrix<T> {
        &self.generators[j]
    }

    /// `A = Σ_j A_j`.
    pub fn sum(&self) -> Matrix<T> {
        self.generators[1..].iter().fold(self.generators[0].clone(), |acc, g| &acc + g)
    }

    pub fn cast<U: Scalar>(&self) -> GeneratorSet<U> {
        GeneratorSet {
            dim: self.dim,
            generators: self.generators.iter().map(Matrix::cast).collect(),
            class: self.class,
        }
    }
}

/// Draws `m` random generators of the requested class, each with spectral
/// norm exactly `norm_bound`.
///
/// Entries start as independent standard Gaussians in the real and imaginary
/// parts; generator `j` uses sub-stream `j` of `rng`.
pub fn sample_generator_set<T: Scalar>(
    dim: usize,
    m: usize,
    class: GeneratorClass,
    norm_bound: f64,
    rng: &RngStream,
) -> Result<GeneratorSet<T>> {
    if dim == 0 || m == 0 {
        return Err(invalid("dimension and generator count must be positive"));
    }
    if !(norm_bound.is_finite() && norm_bound > 0.0) {
        return Err(invalid("norm bound must be positive and finite"));
    }
    let half = T::lit(0.5);
    let generators = (0..m)
        .map(|j| {
            let mut normals = rng.child(j as u64).normals();
            let data: Vec<Complex<T>> = (0..dim * dim)
                .map(|_| {
                    let re = normals.next().expect("infinite stream");
                    let im = normals.next().expect("infinite stream");
                    Complex::new(T::lit(re), T::lit(im))
                })
                .collect();
            let raw = Matrix::new(dim, data)?;
            let shaped = match class {
                GeneratorClass::General => raw,
                GeneratorClass::Hermitian => (&raw + &raw.adjoint()).scale(half),
                GeneratorClass::SkewHermitian => (&raw - &raw.adjoint()).scale(half),
            };
            let norm = shaped.spectral_norm()?;
            Ok(shaped.scale(T::lit(norm_bound) / norm))
        })
        .collect::<Result<Vec<_>>>()?;
    GeneratorSet::new(generators, class)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_generator_has_unit_modulus() {
        let g = sample_generator_set::<f64>(1, 1, GeneratorClass::General, 1.0, &RngStream::new(3))
            .unwrap();
        assert!((g.get(0)[(0, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hermitian_pair_with_requested_norm() {
        let g = sample_generator_set::<f64>(4, 2, GeneratorClass::Hermitian, 0.5, &RngStream::new(11))
            .unwrap();
        assert_eq!(g.len(), 2);
        for a in g.generators() {
            assert!(GeneratorClass::Hermitian.admits(a));
            assert!((a.spectral_norm().unwrap() - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn skew_hermitian_class_is_enforced() {
        let g =
            sample_generator_set::<f64>(3, 3, GeneratorClass::SkewHermitian, 2.0, &RngStream::new(5))
                .unwrap();
        for a in g.generators() {
            assert!(a.max_abs_diff(&-&a.adjoint()) < 1e-15);
        }
        let herm = Matrix::<f64>::identity(2);
        assert!(GeneratorSet::new(vec![herm], GeneratorClass::SkewHermitian).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_generator_set::<f64>(3, 2, GeneratorClass::General, 1.0, &RngStream::new(99));
        let b = sample_generator_set::<f64>(3, 2, GeneratorClass::General, 1.0, &RngStream::new(99));
        assert_eq!(a.unwrap(), b.unwrap());
    }

    #[test]
    fn parameter_validation() {
        let s = RngStream::new(0);
        assert!(sample_generator_set::<f64>(0, 1, GeneratorClass::General, 1.0, &s).is_err());
        assert!(sample_generator_set::<f64>(2, 0, GeneratorClass::General, 1.0, &s).is_err());
        assert!(sample_generator_set::<f64>(2, 1, GeneratorClass::General, 0.0, &s).is_err());
    }

    #[test]
    fn mismatched_dims_rejected() {
        let a = Matrix::<f64>::identity(2);
        let b = Matrix::<f64>::identity(3);
        assert!(GeneratorSet::new(vec![a, b], GeneratorClass::General).is_err());
    }
}
