//! Oracles shared by the integration tests. They deliberately avoid the
//! library's own recursions and closed forms.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// `E[l_n]` for binary fair splitting with SIC, by enumerating every
/// assignment of the `n` users to the two groups. The all-in-one-group
/// outcomes refer back to `E[l_n]` itself and are solved for algebraically.
pub fn brute_force_fair_binary(k: u64, n_max: u64) -> Vec<BigRational> {
    let mut e: Vec<BigRational> = Vec::new();
    for n in 0..=n_max {
        if n <= k {
            e.push(BigRational::one());
            continue;
        }
        let weight = BigRational::new(BigInt::one(), BigInt::from(1u64) << n as usize);
        let mut rest = BigRational::zero();
        let mut self_weight = BigRational::zero();
        for mask in 0u64..(1 << n) {
            let left = mask.count_ones() as u64;
            let right = n - left;
            // l_n = l_left + l_right under SIC.
            for part in [left, right] {
                if part == n {
                    self_weight += &weight;
                } else {
                    rest += &weight * &e[part as usize];
                }
            }
        }
        e.push(rest / (BigRational::one() - self_weight));
    }
    e
}

/// `P(Poisson(x) > k)` from its series, accurate for small `x`.
fn poisson_tail(k: u64, x: f64) -> f64 {
    if x > 20.0 + 2.0 * k as f64 {
        let mut below = 0.0;
        let mut term = (-x).exp();
        for i in 0..=k {
            below += term;
            term *= x / (i + 1) as f64;
        }
        return 1.0 - below;
    }
    let mut term = (-x).exp();
    for i in 1..=k + 1 {
        term *= x / i as f64;
    }
    let (mut sum, mut i) = (0.0, k + 1);
    while term > sum * 1e-18 {
        sum += term;
        i += 1;
        term *= x / i as f64;
    }
    sum
}

/// `int_0^inf P(Poisson(x) > K) x^{s-1} dx` for real `s` in `(-K, 0)`, by
/// composite Simpson in `t = ln x`.
pub fn mellin_poisson_tail(k: u64, s: f64) -> f64 {
    let (a, b, steps) = (-60.0f64, 60.0f64, 120_000usize);
    let h = (b - a) / steps as f64;
    let f = |t: f64| poisson_tail(k, t.exp()) * (s * t).exp();
    let mut acc = f(a) + f(b);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}
