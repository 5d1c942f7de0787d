//! Expected conditional CRI length `L_n` and conditional throughput `T_n` for
//! binary splitting over the K-collision channel.
//!
//! Three independent routes are provided for the SIC variant:
//!
//! * [`expected_cri_recursive`] / [`CriTable`]: the expectation recursion,
//!   valid for any split probability `p`; weights are built in the log domain
//!   and every term is positive.
//! * [`expected_cri_closed_form`]: the alternating binomial closed form. It is
//!   evaluated in floating point only when a running error bound certifies the
//!   result, and otherwise (fair split) with exact rationals.
//! * [`expected_cri_series`]: the fair-split series
//!   `L_n = 1 + sum_m 2^m P(Bin(n, 2^-m) > K)`, all terms positive.
//!
//! Without SIC the root slot of every collision is charged explicitly; the
//! recursion and the fair-split series are both available.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::config::{check_k, check_p};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::numerics::{binomial_exact, binomial_upper_tail, ln_binomial_unchecked, BigRational};

const EPS: f64 = f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CriMethod {
    Recursive,
    ClosedForm,
    Series,
    NoSicRecursive,
    NoSicSeries,
}

impl CriMethod {
    pub fn sic(self) -> bool {
        !matches!(self, CriMethod::NoSicRecursive | CriMethod::NoSicSeries)
    }

    pub fn name(self) -> &'static str {
        match self {
            CriMethod::Recursive => "recursive",
            CriMethod::ClosedForm => "closed",
            CriMethod::Series => "series",
            CriMethod::NoSicRecursive => "no_sic_recursive",
            CriMethod::NoSicSeries => "no_sic_series",
        }
    }
}

/// Expected conditional CRI length for `n` initially colliding users.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriValue {
    pub n: u64,
    /// Slots.
    pub value: f64,
    pub method: CriMethod,
    pub abs_error_bound: f64,
}

impl CriValue {
    fn base(n: u64, method: CriMethod) -> Self {
        CriValue { n, value: 1.0, method, abs_error_bound: 0.0 }
    }

    pub fn throughput(&self, k: u32) -> f64 {
        conditional_throughput(self.n, k, self.value)
    }
}

/// `T_n = n / (K L_n)`.
pub fn conditional_throughput(n: u64, k: u32, l_n: f64) -> f64 {
    n as f64 / (k as f64 * l_n)
}

/// Memoized `L_0..=L_{n_max}` from the expectation recursion.
///
/// Built once, then read-only; share it freely across threads.
#[derive(Debug, Clone)]
pub struct CriTable {
    k: u32,
    p: f64,
    sic: bool,
    values: Vec<f64>,
    rel_err: Vec<f64>,
}

impl CriTable {
    pub fn build(n_max: u64, k: u32, p: f64, sic: bool) -> Result<Self> {
        check_k(k)?;
        check_p(p)?;
        let len = n_max as usize + 1;
        let mut values = vec![1.0; len];
        let mut rel_err = vec![0.0; len];
        let (ln_p, ln_q) = (p.ln(), (-p).ln_1p());
        let fair = p == 0.5;
        let mut err_acc = 0.0f64;
        for n in (k as u64 + 1)..=n_max {
            let nf = n as f64;
            let p_n = (nf * ln_p).exp();
            let q_n = (nf * ln_q).exp();
            let mut numer = p_n + q_n;
            if !sic {
                numer += 1.0;
            }
            let mut worst_exp = 0.0f64;
            for i in 1..n {
                let lc = ln_binomial_unchecked(n, i);
                let (fi, fr) = (i as f64, (n - i) as f64);
                let e1 = lc + fi * ln_p + fr * ln_q;
                let w = if fair {
                    2.0 * e1.exp()
                } else {
                    let e2 = lc + fr * ln_p + fi * ln_q;
                    worst_exp = worst_exp.max(e2.abs());
                    e1.exp() + e2.exp()
                };
                worst_exp = worst_exp.max(e1.abs());
                numer += w * values[i as usize];
            }
            values[n as usize] = numer / (1.0 - p_n - q_n);
            // Weights are a sub-stochastic average of earlier values, so relative
            // errors do not amplify; each step adds exponent and summation rounding.
            err_acc += (2.0 * worst_exp + nf + 8.0) * EPS;
            rel_err[n as usize] = err_acc;
        }
        Ok(CriTable { k, p, sic, values, rel_err })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn sic(&self) -> bool {
        self.sic
    }

    pub fn n_max(&self) -> u64 {
        self.values.len() as u64 - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, n: u64) -> Option<CriValue> {
        let v = *self.values.get(n as usize)?;
        Some(CriValue {
            n,
            value: v,
            method: if self.sic { CriMethod::Recursive } else { CriMethod::NoSicRecursive },
            abs_error_bound: v * self.rel_err[n as usize],
        })
    }
}

/// `L_n` with SIC from the expectation recursion, for any `p` in (0, 1).
pub fn expected_cri_recursive(n: u64, k: u32, p: f64) -> Result<CriValue> {
    let table = CriTable::build(n, k, p, true)?;
    Ok(table.get(n).expect("table covers n"))
}

/// `L*_n` without SIC from the expectation recursion, for any `p` in (0, 1).
pub fn expected_cri_no_sic(n: u64, k: u32, p: f64) -> Result<CriValue> {
    let table = CriTable::build(n, k, p, false)?;
    Ok(table.get(n).expect("table covers n"))
}

/// Floating-point evaluation of the alternating closed form with a rigorous-ish
/// forward error bound. Returns (value, absolute error bound).
fn closed_form_float(n: u64, k: u32, p: f64) -> (f64, f64) {
    let k64 = k as u64;
    let r = n - k64;
    let q = 1.0 - p;
    let mut sum = 0.0f64;
    let mut abs_sum = 0.0f64;
    for i in 1..=r {
        let j = (i + k64) as i32;
        let denom = (i + k64) as f64 * (1.0 - p.powi(j) - q.powi(j));
        let mag = i as f64 * ln_binomial_unchecked(r, i).exp() / denom;
        let t = if i.is_multiple_of(2) { mag } else { -mag };
        sum += t;
        abs_sum += mag;
    }
    let c = ln_binomial_unchecked(n, k64).exp();
    let value = 1.0 - c * sum;
    // Each term carries ~(|ln C| + 8) eps relative error; summation adds r eps.
    let term_rel = ((r as f64 + 1.0).ln() * r as f64 / 2.0 + 16.0 + r as f64) * EPS;
    let bound = c * abs_sum * term_rel + value.abs() * 4.0 * EPS;
    (value, bound)
}

/// Exact fair-split closed form over a shared common denominator.
///
/// With `j = i + K`, each summand `i (-1)^i C(n-K, i) / (j (1 - 2^{1-j}))` is
/// rewritten over `D = lcm_j j (2^{j-1} - 1)`, so evaluating `L_n` for every
/// `n <= n_max` needs only integer multiply-adds.
#[derive(Debug, Clone)]
pub struct ExactFairCri {
    k: u32,
    n_max: u64,
    denom: BigInt,
    /// `coeffs[i - 1] = D * i (-1)^i 2^{j-1} / (j (2^{j-1} - 1))`
    coeffs: Vec<BigInt>,
}

impl ExactFairCri {
    pub fn new(k: u32, n_max: u64) -> Result<Self> {
        check_k(k)?;
        let k64 = k as u64;
        let r_max = n_max.saturating_sub(k64);
        let parts: Vec<(BigUint, BigUint)> = (1..=r_max)
            .map(|i| {
                let j = i + k64;
                let pow = BigUint::one() << (j - 1) as usize;
                let den = BigUint::from(j) * (&pow - 1u32);
                (pow, den)
            })
            .collect();
        let mut denom = BigUint::one();
        for (_, den) in &parts {
            denom = denom.lcm(den);
        }
        let coeffs = parts
            .iter()
            .enumerate()
            .map(|(idx, (pow, den))| {
                let i = idx as u64 + 1;
                let mag = BigInt::from(&denom / den * pow * i);
                if i.is_multiple_of(2) {
                    mag
                } else {
                    -mag
                }
            })
            .collect();
        Ok(ExactFairCri { k, n_max, denom: BigInt::from(denom), coeffs })
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    /// Numerator of `L_n` over the shared denominator `D`.
    fn numerator(&self, n: u64) -> Result<BigInt> {
        if n > self.n_max {
            return Err(crate::error::invalid(format!("n = {n} exceeds the exact table bound {}", self.n_max)));
        }
        let k64 = self.k as u64;
        if n <= k64 {
            return Ok(self.denom.clone());
        }
        let r = n - k64;
        let mut sum = BigInt::zero();
        let mut c = BigInt::one();
        for i in 1..=r {
            c = c * (r - i + 1) / i;
            sum += &c * &self.coeffs[i as usize - 1];
        }
        let c_nk = BigInt::from(binomial_exact(n, k64)?);
        Ok(&self.denom - c_nk * sum)
    }

    /// Exact `L_n` for `n <= n_max`, in lowest terms.
    pub fn value(&self, n: u64) -> Result<BigRational> {
        Ok(BigRational::new(self.numerator(n)?, self.denom.clone()))
    }

    /// `L_n` correctly rounded to within a couple of ulps. Skips the gcd
    /// reduction, which dominates the cost for large `n`.
    pub fn value_f64(&self, n: u64) -> Result<f64> {
        let numer = self.numerator(n)?;
        let shift = self.denom.bits().saturating_sub(128);
        let (a, b) = ((numer >> shift).to_f64(), (&self.denom >> shift).to_f64());
        match (a, b) {
            (Some(a), Some(b)) if a.is_finite() && b.is_finite() && b > 0.0 => Ok(a / b),
            _ => Err(Error::Consistency(format!("exact L_{n} not representable as f64"))),
        }
    }

    /// `L_0..=L_{n_max}` rounded to f64, evaluated per `n` under `exec`.
    pub fn table(&self, exec: Execution) -> Result<Vec<f64>> {
        exec.map_collect(self.n_max as usize + 1, |n| self.value_f64(n as u64)).into_iter().collect()
    }
}

/// Exact fair-split `L_0..=L_{n_max}` (SIC) or `L*_0..=L*_{n_max}` (no SIC).
///
/// `L*_n + 1` obeys the same homogeneous recursion as `L_n` with base value 2,
/// hence `L*_n = 2 L_n - 1`.
pub fn exact_fair_table(k: u32, n_max: u64, sic: bool, exec: Execution) -> Result<Vec<f64>> {
    let exact = ExactFairCri::new(k, n_max)?;
    let mut table = exact.table(exec)?;
    if !sic {
        for v in &mut table {
            *v = 2.0 * *v - 1.0;
        }
    }
    Ok(table)
}

/// `L_n` with SIC from the alternating closed form.
///
/// Floating point is used when its error bound certifies 1e-12 relative
/// accuracy. Otherwise fair splitting falls back to exact rationals, and other
/// `p` accept the float result only down to 1e-6 relative accuracy.
pub fn expected_cri_closed_form(n: u64, k: u32, p: f64) -> Result<CriValue> {
    check_k(k)?;
    check_p(p)?;
    if n <= k as u64 {
        return Ok(CriValue::base(n, CriMethod::ClosedForm));
    }
    let (value, bound) = closed_form_float(n, k, p);
    if bound <= 1e-12 * value.abs() {
        return Ok(CriValue { n, value, method: CriMethod::ClosedForm, abs_error_bound: bound });
    }
    if p == 0.5 {
        let exact = ExactFairCri::new(k, n)?;
        let value = exact.value_f64(n)?;
        return Ok(CriValue { n, value, method: CriMethod::ClosedForm, abs_error_bound: value * EPS });
    }
    if bound <= 1e-6 * value.abs() {
        return Ok(CriValue { n, value, method: CriMethod::ClosedForm, abs_error_bound: bound });
    }
    Err(Error::PrecisionLoss { method: "closed-form float path", n, target: 1e-6, bound: bound / value.abs().max(1.0) })
}

const SERIES_MAX_TERMS: usize = 10_000;
const SERIES_REL_TOL: f64 = 1e-17;

/// `sum_{m >= 0} 2^m P(Bin(n, 2^-m) > K)` and an absolute error bound.
fn fair_series_excess(n: u64, k: u32) -> Result<(f64, f64)> {
    let k64 = k as u64;
    let mut sum = 0.0f64;
    let mut small_run = 0;
    for m in 0..SERIES_MAX_TERMS {
        let tail = if m == 0 { 1.0 } else { binomial_upper_tail(n, (-(m as f64)).exp2(), k64) };
        let term = (m as f64).exp2() * tail;
        sum += term;
        if term < SERIES_REL_TOL * sum {
            small_run += 1;
            if small_run == 3 {
                // Past the peak the terms shrink at least geometrically by 1/2.
                let bound = sum * (m as f64 + 8.0) * 4.0 * EPS + 2.0 * term;
                return Ok((sum, bound));
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::NonConvergence { what: "fair-split CRI series", iterations: SERIES_MAX_TERMS })
}

/// `L_n` with SIC and fair splitting from the positive-term series.
pub fn expected_cri_series(n: u64, k: u32) -> Result<CriValue> {
    check_k(k)?;
    if n <= k as u64 {
        return Ok(CriValue::base(n, CriMethod::Series));
    }
    let (s, err) = fair_series_excess(n, k)?;
    Ok(CriValue { n, value: 1.0 + s, method: CriMethod::Series, abs_error_bound: err })
}

/// `L*_n` without SIC and fair splitting: `1 + 2 sum_m 2^m P(Bin(n, 2^-m) > K)`.
pub fn expected_cri_no_sic_series(n: u64, k: u32) -> Result<CriValue> {
    check_k(k)?;
    if n <= k as u64 {
        return Ok(CriValue::base(n, CriMethod::NoSicSeries));
    }
    let (s, err) = fair_series_excess(n, k)?;
    Ok(CriValue { n, value: 1.0 + 2.0 * s, method: CriMethod::NoSicSeries, abs_error_bound: 2.0 * err })
}

/// Fair-split values `L_0..=L_{n_max}` from the series, evaluated per `n` under `exec`.
pub fn fair_series_table(k: u32, n_max: u64, sic: bool, exec: Execution) -> Result<Vec<f64>> {
    check_k(k)?;
    exec.map_collect(n_max as usize + 1, |n| {
        let v = if sic { expected_cri_series(n as u64, k) } else { expected_cri_no_sic_series(n as u64, k) };
        v.map(|c| c.value)
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::FromPrimitive;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn base_cases() {
        for k in [1u32, 2, 4] {
            for n in 0..=k as u64 {
                assert_eq!(expected_cri_recursive(n, k, 0.3).unwrap().value, 1.0);
                assert_eq!(expected_cri_closed_form(n, k, 0.3).unwrap().value, 1.0);
                assert_eq!(expected_cri_series(n, k).unwrap().value, 1.0);
                assert_eq!(expected_cri_no_sic(n, k, 0.7).unwrap().value, 1.0);
                assert_eq!(expected_cri_no_sic_series(n, k).unwrap().value, 1.0);
            }
        }
    }

    #[test]
    fn hand_unrolled_values() {
        assert!(rel(expected_cri_recursive(2, 1, 0.5).unwrap().value, 3.0) < 1e-15);
        assert!(rel(expected_cri_recursive(3, 2, 0.5).unwrap().value, 7.0 / 3.0) < 1e-15);
        assert!(rel(expected_cri_closed_form(2, 1, 0.5).unwrap().value, 3.0) < 1e-15);
        assert!(rel(expected_cri_series(2, 1).unwrap().value, 3.0) < 1e-14);
        assert!(rel(expected_cri_series(3, 1).unwrap().value, 13.0 / 3.0) < 1e-14);
        assert!(rel(expected_cri_no_sic(2, 1, 0.5).unwrap().value, 5.0) < 1e-15);
        assert!(rel(expected_cri_no_sic_series(2, 1).unwrap().value, 5.0) < 1e-14);
    }

    #[test]
    fn exact_small_rationals() {
        let exact = ExactFairCri::new(1, 3).unwrap();
        assert_eq!(exact.value(2).unwrap(), BigRational::from_u64(3).unwrap());
        assert_eq!(exact.value(3).unwrap(), BigRational::new(BigInt::from(13), BigInt::from(3)));
        let exact = ExactFairCri::new(2, 3).unwrap();
        assert_eq!(exact.value(3).unwrap(), BigRational::new(BigInt::from(7), BigInt::from(3)));
    }

    #[test]
    fn degenerate_p_rejected() {
        assert!(expected_cri_recursive(5, 1, 0.0).is_err());
        assert!(expected_cri_recursive(5, 1, 1.0).is_err());
        assert!(expected_cri_closed_form(5, 1, f64::NAN).is_err());
        assert!(expected_cri_no_sic(5, 1, -0.1).is_err());
    }

    #[test]
    fn closed_form_n100_matches_recursion() {
        let a = expected_cri_closed_form(100, 1, 0.5).unwrap().value;
        let b = expected_cri_recursive(100, 1, 0.5).unwrap().value;
        assert!(rel(a, b) < 1e-9);
    }

    #[test]
    fn non_fair_closed_form_small_n_matches_recursion() {
        for &p in &[0.2, 0.35, 0.8] {
            for k in [1u32, 2, 3] {
                let table = CriTable::build(20, k, p, true).unwrap();
                for n in 0..=20u64 {
                    let cf = expected_cri_closed_form(n, k, p).unwrap().value;
                    let rec = table.get(n).unwrap().value;
                    assert!(rel(cf, rec) < 1e-8, "p={p} k={k} n={n}: {cf} vs {rec}");
                }
            }
        }
    }

    #[test]
    fn non_fair_closed_form_reports_precision_loss() {
        let err = expected_cri_closed_form(400, 1, 0.3).unwrap_err();
        assert!(matches!(err, Error::PrecisionLoss { .. }));
    }

    #[test]
    fn no_sic_is_affine_image_of_sic() {
        for &p in &[0.3, 0.5] {
            let sic = CriTable::build(60, 2, p, true).unwrap();
            let no = CriTable::build(60, 2, p, false).unwrap();
            for n in 0..=60usize {
                assert!(rel(no.values()[n], 2.0 * sic.values()[n] - 1.0) < 1e-12);
            }
        }
    }

    #[test]
    fn no_sic_methods_agree() {
        for k in [1u32, 3, 8] {
            let table = CriTable::build(300, k, 0.5, false).unwrap();
            for n in (0..=300u64).step_by(7) {
                let s = expected_cri_no_sic_series(n, k).unwrap().value;
                assert!(rel(s, table.values()[n as usize]) < 1e-8);
            }
        }
    }

    #[test]
    fn error_bound_is_small_at_scale() {
        let t = CriTable::build(2000, 64, 0.5, true).unwrap();
        let v = t.get(2000).unwrap();
        assert!(v.abs_error_bound <= 1e-8 * v.value, "{v:?}");
    }

    #[test]
    fn throughput() {
        assert_eq!(conditional_throughput(0, 3, 1.0), 0.0);
        assert_eq!(conditional_throughput(4, 4, 1.0), 1.0);
    }
}
