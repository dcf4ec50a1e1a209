//! Evaluation of schedules as operator products and their ideal error.

use crate::error::{invalid, Result};
use crate::generators::GeneratorSet;
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::schedule::Schedule;

fn check_compatible<T: Scalar>(gens: &GeneratorSet<T>, schedule: &Schedule<T>) -> Result<()> {
    if gens.len() != schedule.m() {
        return Err(invalid(format!(
            "schedule expects {} generators, set has {}",
            schedule.m(),
            gens.len()
        )));
    }
    if schedule.is_empty() {
        return Err(invalid("schedule has no terms"));
    }
    Ok(())
}

/// The exact factors `U_p = e^{A_{j_p} λ_p}` in schedule order.
///
/// Exponentials are computed once per distinct `(generator, coefficient)`.
pub fn schedule_factors<T: Scalar>(gens: &GeneratorSet<T>, schedule: &Schedule<T>) -> Result<Vec<Matrix<T>>> {
    check_compatible(gens, schedule)?;
    let mut cache: Vec<(usize, T, usize)> = Vec::new();
    let mut distinct: Vec<Matrix<T>> = Vec::new();
    let mut order = Vec::with_capacity(schedule.len());
    for t in schedule.terms() {
        let slot = match cache.iter().find(|(j, c, _)| *j == t.generator && *c == t.coefficient) {
            Some(&(_, _, slot)) => slot,
            None => {
                distinct.push(gens.get(t.generator).scale(t.coefficient).exp()?);
                cache.push((t.generator, t.coefficient, distinct.len() - 1));
                distinct.len() - 1
            }
        };
        order.push(slot);
    }
    Ok(order.into_iter().map(|slot| distinct[slot].clone()).collect())
}

/// `U_N ⋯ U_2 U_1`: the first factor acts first.
pub fn ordered_product<T: Scalar>(factors: &[Matrix<T>]) -> Result<Matrix<T>> {
    let (first, rest) = factors.split_first().ok_or_else(|| invalid("empty product"))?;
    let mut acc = first.clone();
    let mut scratch = Matrix::zeros(acc.dim());
    for f in rest {
        Matrix::mul_into(f, &acc, &mut scratch);
        std::mem::swap(&mut acc, &mut scratch);
    }
    Ok(acc)
}

pub fn evaluate_schedule<T: Scalar>(gens: &GeneratorSet<T>, schedule: &Schedule<T>) -> Result<Matrix<T>> {
    ordered_product(&schedule_factors(gens, schedule)?)
}

/// The exact flow `e^{(Σ_j A_j) λ}`.
pub fn exact_flow<T: Scalar>(gens: &GeneratorSet<T>, lambda: T) -> Result<Matrix<T>> {
    gens.sum().scale(lambda).exp()
}

/// Relative spectral distance between the exact flow and the noiseless
/// schedule product.
pub fn ideal_error<T: Scalar>(gens: &GeneratorSet<T>, lambda: T, schedule: &Schedule<T>) -> Result<T> {
    let tol = T::lit(1e-12) * T::one().max(lambda.abs());
    if (lambda - schedule.lambda()).abs() > tol {
        return Err(invalid("lambda does not match the schedule's total time"));
    }
    let exact = exact_flow(gens, lambda)?;
    let approx = evaluate_schedule(gens, schedule)?;
    exact.relative_distance(&approx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::GeneratorClass;
    use crate::schedule::{build_schedule, OrderSpec};
    use num_complex::Complex;

    fn pauli_pair() -> GeneratorSet<f64> {
        let x = Matrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let z = Matrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap();
        GeneratorSet::new(vec![x, z], GeneratorClass::Hermitian).unwrap()
    }

    #[test]
    fn single_factor() {
        let a = Matrix::from_real_rows(&[vec![0.3, 0.1], vec![-0.2, 0.4]]).unwrap();
        let gens = GeneratorSet::new(vec![a.clone()], GeneratorClass::General).unwrap();
        let s = build_schedule(1, OrderSpec::Trotter { r: 1 }, 0.7, false).unwrap();
        let got = evaluate_schedule(&gens, &s).unwrap();
        assert_eq!(got, a.scale(0.7).exp().unwrap());
    }

    #[test]
    fn commuting_generators_are_exact() {
        let d1 = Matrix::from_diagonal(&[Complex::new(0.5, 0.0), Complex::new(-1.0, 0.0)]).unwrap();
        let d2 = Matrix::from_diagonal(&[Complex::new(0.0, 1.0), Complex::new(2.0, 0.0)]).unwrap();
        let gens = GeneratorSet::new(vec![d1, d2], GeneratorClass::General).unwrap();
        for order in [OrderSpec::Trotter { r: 2 }, OrderSpec::Suzuki { k: 2, r: 1 }] {
            let s = build_schedule(2, order, 0.9, false).unwrap();
            assert!(ideal_error(&gens, 0.9, &s).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn zero_time_is_exact() {
        let gens = pauli_pair();
        let s = build_schedule(2, OrderSpec::Suzuki { k: 1, r: 1 }, 0.0, false).unwrap();
        assert_eq!(ideal_error(&gens, 0.0, &s).unwrap(), 0.0);
    }

    #[test]
    fn second_order_local_error_is_cubic() {
        // Brute-force oracle: e^{(X+Z)λ} against e^{Xλ/2} e^{Zλ} e^{Xλ/2} built
        // directly from the closed-form exponentials of Pauli matrices.
        let gens = pauli_pair();
        let lam: f64 = 0.1;
        let s = build_schedule(2, OrderSpec::Suzuki { k: 1, r: 1 }, lam, false).unwrap();
        let got = ideal_error(&gens, lam, &s).unwrap();
        let ex = |t: f64| {
            Matrix::from_real_rows(&[vec![t.cosh(), t.sinh()], vec![t.sinh(), t.cosh()]]).unwrap()
        };
        let ez = |t: f64| Matrix::from_real_rows(&[vec![t.exp(), 0.0], vec![0.0, (-t).exp()]]).unwrap();
        let r = 2f64.sqrt() * lam;
        let h = Matrix::from_real_rows(&[vec![1.0, 1.0], vec![1.0, -1.0]]).unwrap();
        let exact = &Matrix::identity(2).scale(r.cosh()) + &h.scale(r.sinh() / 2f64.sqrt());
        let approx = &(&ex(lam / 2.0) * &ez(lam)) * &ex(lam / 2.0);
        let oracle = exact.relative_distance(&approx).unwrap();
        assert!((got - oracle).abs() < 1e-14);
        let c = got / lam.powi(3);
        assert!(c > 0.05 && c < 1.0, "error constant {c}");
    }

    #[test]
    fn mismatched_generator_count() {
        let gens = pauli_pair();
        let s = build_schedule(3, OrderSpec::Trotter { r: 1 }, 0.1, false).unwrap();
        assert!(evaluate_schedule(&gens, &s).is_err());
        let s = build_schedule(2, OrderSpec::Trotter { r: 1 }, 0.1, false).unwrap();
        assert!(ideal_error(&gens, 0.2, &s).is_err());
    }
}
