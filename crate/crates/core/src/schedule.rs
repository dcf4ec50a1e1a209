//! Product-formula schedules: the flattened `(generator, coefficient)` lists of
//! the Trotter formula and the recursive Suzuki construction.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Largest term count a schedule may expand to.
pub const MAX_TERMS: usize = 20_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrderSpec {
    /// First-order formula `(e^{A_1 λ/r} ⋯ e^{A_m λ/r})^r`.
    Trotter { r: u32 },
    /// Symmetric formula of order `2k`, repeated over `r` segments of `λ/r`.
    Suzuki { k: u32, r: u32 },
}

impl OrderSpec {
    pub fn segments(&self) -> u32 {
        match *self {
            OrderSpec::Trotter { r } | OrderSpec::Suzuki { r, .. } => r,
        }
    }

    pub fn with_segments(&self, r: u32) -> Self {
        match *self {
            OrderSpec::Trotter { .. } => OrderSpec::Trotter { r },
            OrderSpec::Suzuki { k, .. } => OrderSpec::Suzuki { k, r },
        }
    }

    /// Exponentials in one segment before merging.
    pub fn factors_per_segment(&self, m: usize) -> Result<usize> {
        let per = match *self {
            OrderSpec::Trotter { .. } => Some(m),
            OrderSpec::Suzuki { k, .. } => {
                if k == 0 {
                    return Err(invalid("suzuki half-order k must be at least 1"));
                }
                5usize.checked_pow(k - 1).and_then(|f| f.checked_mul(2 * m))
            }
        };
        per.ok_or_else(|| invalid("schedule too large"))
    }

    pub fn raw_terms(&self, m: usize) -> Result<usize> {
        self.factors_per_segment(m)?
            .checked_mul(self.segments() as usize)
            .ok_or_else(|| invalid("schedule too large"))
    }
}

/// One factor `e^{A_j λ_p}` of a product formula; `generator` is zero-based.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term<T> {
    pub generator: usize,
    pub coefficient: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", into = "ScheduleDoc", try_from = "ScheduleDoc")]
pub struct Schedule<T> {
    m: usize,
    order: OrderSpec,
    lambda: T,
    merged: bool,
    terms: Vec<Term<T>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostCount {
    pub raw_exponentials: usize,
    pub merged_exponentials: usize,
}

/// Suzuki's step weight `p_k = 1 / (4 − 4^{1/(2k−1)})` used in the step from
/// order `2k − 2` to `2k`.
pub fn suzuki_coefficient<T: Scalar>(k: u32) -> Result<T> {
    if k < 2 {
        return Err(invalid(format!("suzuki coefficient needs k >= 2, got {k}")));
    }
    let n = 2 * k - 1;
    let four = T::lit(4.0);
    // Root of y^n = 4 refined by Newton from the f64 estimate, so the result
    // carries the full precision of T.
    let mut y = T::lit(4f64.powf(1.0 / n as f64));
    let nt = T::from_count(n as usize);
    for _ in 0..4 {
        let yn1 = y.powi(n as i32 - 1);
        y = y - (yn1 * y - four) / (nt * yn1);
    }
    Ok((four - y).recip())
}

fn suzuki_block<T: Scalar>(m: usize, k: u32, lambda: T, out: &mut Vec<Term<T>>) -> Result<()> {
    if k == 1 {
        let half = lambda / T::lit(2.0);
        out.extend((0..m).map(|j| Term { generator: j, coefficient: half }));
        out.extend((0..m).rev().map(|j| Term { generator: j, coefficient: half }));
        return Ok(());
    }
    let p = suzuki_coefficient::<T>(k)?;
    let outer = p * lambda;
    let inner = (T::one() - T::lit(4.0) * p) * lambda;
    for step in [outer, outer, inner, outer, outer] {
        suzuki_block(m, k - 1, step, out)?;
    }
    Ok(())
}

/// Expands a product formula into its flat term list.
pub fn build_schedule<T: Scalar>(m: usize, order: OrderSpec, lambda: T, merge: bool) -> Result<Schedule<T>> {
    if m == 0 {
        return Err(invalid("generator count must be positive"));
    }
    if !lambda.is_finite() {
        return Err(invalid("lambda must be finite"));
    }
    let r = order.segments();
    if r == 0 {
        return Err(invalid("segment count r must be positive"));
    }
    let raw = order.raw_terms(m)?;
    if raw > MAX_TERMS {
        return Err(invalid(format!("schedule would have {raw} terms, limit is {MAX_TERMS}")));
    }
    let seg = lambda / T::from_count(r as usize);
    let mut block = Vec::with_capacity(order.factors_per_segment(m)?);
    match order {
        OrderSpec::Trotter { .. } => {
            block.extend((0..m).map(|j| Term { generator: j, coefficient: seg }));
        }
        OrderSpec::Suzuki { k, .. } => suzuki_block(m, k, seg, &mut block)?,
    }
    let mut terms = Vec::with_capacity(raw);
    for _ in 0..r {
        terms.extend_from_slice(&block);
    }
    let mut s = Schedule { m, order, lambda, merged: false, terms };
    if merge {
        s = s.merged();
    }
    Ok(s)
}

impl<T: Scalar> Schedule<T> {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn order(&self) -> OrderSpec {
        self.order
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn is_merged(&self) -> bool {
        self.merged
    }

    pub fn terms(&self) -> &[Term<T>] {
        &self.terms
    }

    /// Number of factors `N`.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Combines runs of adjacent terms acting with the same generator.
    pub fn merged(&self) -> Self {
        let mut terms: Vec<Term<T>> = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            match terms.last_mut() {
                Some(last) if last.generator == t.generator => {
                    last.coefficient = last.coefficient + t.coefficient;
                }
                _ => terms.push(*t),
            }
        }
        Self { terms, merged: true, ..self.clone() }
    }

    /// `Σ_{p: j_p = j} λ_p` for every generator `j`.
    pub fn generator_totals(&self) -> Vec<T> {
        let mut totals = vec![T::zero(); self.m];
        for t in &self.terms {
            totals[t.generator] = totals[t.generator] + t.coefficient;
        }
        totals
    }

    pub fn exponential_count(&self) -> CostCount {
        let merged_exponentials =
            if self.merged { self.terms.len() } else { self.merged().terms.len() };
        let raw_exponentials = self.order.raw_terms(self.m).unwrap_or(self.terms.len());
        CostCount { raw_exponentials, merged_exponentials }
    }

    pub fn cast<U: Scalar>(&self) -> Schedule<U> {
        let conv = |x: T| -> U { num_traits::cast(x).expect("scalar cast") };
        Schedule {
            m: self.m,
            order: self.order,
            lambda: conv(self.lambda),
            merged: self.merged,
            terms: self
                .terms
                .iter()
                .map(|t| Term { generator: t.generator, coefficient: conv(t.coefficient) })
                .collect(),
        }
    }
}

/// Wire form: generator indices are one-based.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScheduleDoc {
    pub m: usize,
    pub order_spec: OrderSpec,
    pub lambda: f64,
    pub merged: bool,
    pub terms: Vec<(usize, f64)>,
}

impl<T: Scalar> From<Schedule<T>> for ScheduleDoc {
    fn from(s: Schedule<T>) -> Self {
        ScheduleDoc {
            m: s.m,
            order_spec: s.order,
            lambda: s.lambda.to_f64_lossy(),
            merged: s.merged,
            terms: s.terms.iter().map(|t| (t.generator + 1, t.coefficient.to_f64_lossy())).collect(),
        }
    }
}

impl<T: Scalar> TryFrom<ScheduleDoc> for Schedule<T> {
    type Error = Error;

    fn try_from(doc: ScheduleDoc) -> Result<Self> {
        if doc.m == 0 {
            return Err(invalid("generator count must be positive"));
        }
        if !doc.lambda.is_finite() {
            return Err(invalid("lambda must be finite"));
        }
        let terms = doc
            .terms
            .iter()
            .map(|&(j, c)| {
                if j == 0 || j > doc.m {
                    return Err(invalid(format!("generator index {j} outside 1..={}", doc.m)));
                }
                if !c.is_finite() {
                    return Err(invalid("coefficient must be finite"));
                }
                Ok(Term { generator: j - 1, coefficient: T::lit(c) })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Schedule {
            m: doc.m,
            order: doc.order_spec,
            lambda: T::lit(doc.lambda),
            merged: doc.merged,
            terms,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::DoubleDouble;
    use num_traits::Float;

    fn pairs(s: &Schedule<f64>) -> Vec<(usize, f64)> {
        s.terms().iter().map(|t| (t.generator + 1, t.coefficient)).collect()
    }

    #[test]
    fn coefficient_values() {
        // 4^{1/3} = 1.5874010519681994..., 4^{1/5} = 1.3195079107728942...
        let p2 = suzuki_coefficient::<f64>(2).unwrap();
        assert!((p2 - 1.0 / (4.0 - 1.5874010519681994)).abs() < 1e-15);
        assert!((p2 - 0.414_490_771_794_37).abs() < 1e-13);
        let p3 = suzuki_coefficient::<f64>(3).unwrap();
        assert!((p3 - 1.0 / (4.0 - 1.3195079107728942)).abs() < 1e-15);
        assert!((p3 - 0.373_065_827_733_272_8).abs() < 1e-14);
        for k in 2..8 {
            let p = suzuki_coefficient::<f64>(k).unwrap();
            assert!(p > 0.25 && p <= 1.0);
            assert!((4.0 * p + (1.0 - 4.0 * p) - 1.0).abs() < 1e-15);
        }
        assert!(suzuki_coefficient::<f64>(1).is_err());
        assert!(suzuki_coefficient::<f64>(0).is_err());
    }

    #[test]
    fn double_double_coefficient_satisfies_order_condition() {
        // 4 p^{2k-1} + (1 - 4p)^{2k-1} = 0 is the cancellation that raises the order.
        let p = suzuki_coefficient::<DoubleDouble>(2).unwrap();
        let one = DoubleDouble::from(1.0);
        let four = DoubleDouble::from(4.0);
        let residual = four * p.powi(3) + (one - four * p).powi(3);
        assert!(residual.abs() < DoubleDouble::from(1e-29));
    }

    #[test]
    fn base_case_layout() {
        let lam = 0.8;
        let s = build_schedule(2, OrderSpec::Suzuki { k: 1, r: 1 }, lam, false).unwrap();
        assert_eq!(pairs(&s), vec![(1, 0.4), (2, 0.4), (2, 0.4), (1, 0.4)]);
    }

    #[test]
    fn single_generator_merges_to_one_factor() {
        for order in [
            OrderSpec::Trotter { r: 3 },
            OrderSpec::Suzuki { k: 1, r: 2 },
            OrderSpec::Suzuki { k: 3, r: 1 },
        ] {
            let s = build_schedule(1, order, 1.5f64, true).unwrap();
            assert_eq!(s.len(), 1);
            assert_eq!(s.terms()[0].generator, 0);
            assert!((s.terms()[0].coefficient - 1.5).abs() < 1e-13);
        }
    }

    #[test]
    fn fourth_order_expansion() {
        let lam = 1.0f64;
        let s = build_schedule(2, OrderSpec::Suzuki { k: 2, r: 1 }, lam, false).unwrap();
        assert_eq!(s.len(), 20);
        for total in s.generator_totals() {
            assert!((total - lam).abs() < 1e-14);
        }
        // Hand expansion: the middle S2((1-4p)λ) block has coefficients (1-4p)λ/2.
        let p = 1.0 / (4.0 - 4f64.powf(1.0 / 3.0));
        let backward = (1.0 - 4.0 * p) * lam / 2.0;
        assert!((backward + 0.328_981_543_588_75).abs() < 1e-12);
        let negatives: Vec<f64> =
            s.terms().iter().map(|t| t.coefficient).filter(|&c| c < 0.0).collect();
        assert_eq!(negatives.len(), 4);
        assert!(negatives.iter().all(|&c| (c - backward).abs() < 1e-15));
        assert!(s.terms().iter().all(|t| t.coefficient.abs() <= lam));
    }

    #[test]
    fn trotter_layout_and_counts() {
        let s = build_schedule(2, OrderSpec::Trotter { r: 3 }, 0.9, false).unwrap();
        assert_eq!(pairs(&s).iter().map(|p| p.0).collect::<Vec<_>>(), vec![1, 2, 1, 2, 1, 2]);
        assert_eq!(s.exponential_count().raw_exponentials, 6);
        assert_eq!(s.exponential_count().merged_exponentials, 6);
    }

    #[test]
    fn cost_counts() {
        let s = build_schedule(2, OrderSpec::Suzuki { k: 1, r: 1 }, 1.0, false).unwrap();
        assert_eq!(s.exponential_count(), CostCount { raw_exponentials: 4, merged_exponentials: 3 });
        let s = build_schedule(2, OrderSpec::Suzuki { k: 2, r: 1 }, 1.0, false).unwrap();
        assert_eq!(s.exponential_count().raw_exponentials, 20);
        let merged = s.merged();
        assert_eq!(merged.exponential_count().raw_exponentials, 20);
        assert!(merged.len() < 20);
        // Repeated S2 blocks share their boundary generator.
        let s = build_schedule(3, OrderSpec::Suzuki { k: 1, r: 4 }, 1.0, true).unwrap();
        assert_eq!(s.exponential_count(), CostCount { raw_exponentials: 24, merged_exponentials: 4 * 5 - 3 });
    }

    #[test]
    fn invalid_inputs() {
        assert!(build_schedule(2, OrderSpec::Trotter { r: 1 }, f64::NAN, false).is_err());
        assert!(build_schedule(2, OrderSpec::Trotter { r: 0 }, 1.0, false).is_err());
        assert!(build_schedule(0, OrderSpec::Trotter { r: 1 }, 1.0, false).is_err());
        assert!(build_schedule(2, OrderSpec::Suzuki { k: 0, r: 1 }, 1.0, false).is_err());
        assert!(build_schedule(2, OrderSpec::Suzuki { k: 20, r: 1 }, 1.0, false).is_err());
    }

    #[test]
    fn json_wire_form() {
        let s = build_schedule(2, OrderSpec::Suzuki { k: 1, r: 1 }, 0.5, false).unwrap();
        let v = serde_json::to_value(&s).unwrap();
        assert_eq!(
            v,
            serde_json::json!({
                "m": 2,
                "order_spec": {"kind": "suzuki", "k": 1, "r": 1},
                "lambda": 0.5,
                "merged": false,
                "terms": [[1, 0.25], [2, 0.25], [2, 0.25], [1, 0.25]]
            })
        );
        let back: Schedule<f64> = serde_json::from_value(v).unwrap();
        assert_eq!(back, s);
        let bad = serde_json::json!({
            "m": 1, "order_spec": {"kind": "trotter", "r": 1}, "lambda": 1.0,
            "merged": false, "terms": [[2, 1.0]]
        });
        assert!(serde_json::from_value::<Schedule<f64>>(bad).is_err());
    }
}
