use std::sync::OnceLock;

use num_bigint::BigUint;

use crate::error::{invalid, Result};

const LN_FACT_TABLE: usize = 4096;

fn ln_fact_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        // Kahan-compensated running sum of ln i.
        let mut table = Vec::with_capacity(LN_FACT_TABLE);
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        table.push(0.0);
        for i in 1..LN_FACT_TABLE {
            let y = (i as f64).ln() - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            table.push(sum);
        }
        table
    })
}

/// ln(n!) for any n. Table lookup below 4096, Stirling series above.
pub fn ln_factorial(n: u64) -> f64 {
    if (n as usize) < LN_FACT_TABLE {
        return ln_fact_table()[n as usize];
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Truncation error below 1/(1680 x^7) < 1e-28 here.
    x * x.ln() - x
        + 0.5 * (2.0 * std::f64::consts::PI * x).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0)))
}

/// Exact binomial coefficient C(n, k).
pub fn binomial_exact(n: u64, k: u64) -> Result<BigUint> {
    if k > n {
        return Err(invalid(format!("binomial C({n}, {k}) requires k <= n")));
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        // Each partial product C(n, i + 1) is an integer, so the division is exact.
        acc *= n - i;
        acc /= i + 1;
    }
    Ok(acc)
}

/// Natural log of C(n, k).
pub fn ln_binomial(n: u64, k: u64) -> Result<f64> {
    if k > n {
        return Err(invalid(format!("ln C({n}, {k}) requires k <= n")));
    }
    Ok(ln_binomial_unchecked(n, k))
}

/// `ln_binomial` without the range check; callers guarantee `k <= n`.
pub(crate) fn ln_binomial_unchecked(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    match k {
        0 => 0.0,
        1 => (n as f64).ln(),
        // Direct product keeps full relative accuracy when the result is small.
        2..=24 => {
            let mut s = 0.0;
            for i in 1..=k {
                s += ((n - k + i) as f64 / i as f64).ln();
            }
            s
        }
        _ => ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k),
    }
}

/// ln of the Poisson(z) mass at i. `z = 0` puts all mass at 0.
pub fn ln_poisson_pmf(i: u64, z: f64) -> f64 {
    if z == 0.0 {
        return if i == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    i as f64 * z.ln() - z - ln_factorial(i)
}

/// P(Poisson(z) >= k), summed directly over the upper tail.
pub fn poisson_upper_tail(k: u64, z: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if z == 0.0 {
        return 0.0;
    }
    if (k as f64) <= z {
        let lower: f64 = (0..k).map(|i| ln_poisson_pmf(i, z).exp()).sum();
        return (1.0 - lower).max(0.0);
    }
    let mut term = ln_poisson_pmf(k, z).exp();
    let mut sum = 0.0;
    let mut i = k;
    while term > 0.0 && term > sum * 1e-18 {
        sum += term;
        i += 1;
        term *= z / i as f64;
    }
    sum
}

/// P(Binomial(n, q) > k), computed without cancellation from whichever tail is small.
pub fn binomial_upper_tail(n: u64, q: f64, k: u64) -> f64 {
    if k >= n {
        return 0.0;
    }
    if q >= 1.0 {
        return 1.0;
    }
    if q <= 0.0 {
        return 0.0;
    }
    let ln_q = q.ln();
    let ln_1mq = (-q).ln_1p();
    let ln_pmf = |j: u64| ln_binomial_unchecked(n, j) + j as f64 * ln_q + (n - j) as f64 * ln_1mq;
    let lower: f64 = (0..=k).map(|j| ln_pmf(j).exp()).sum();
    if lower <= 0.5 {
        return 1.0 - lower;
    }
    // Upper tail is small: sum it forward from k + 1 with the pmf ratio recurrence.
    let ratio = q / (1.0 - q);
    let mut j = k + 1;
    let mut term = ln_pmf(j).exp();
    let mut sum = 0.0;
    while j <= n {
        sum += term;
        if term <= sum * 1e-18 {
            break;
        }
        term *= ratio * (n - j) as f64 / (j + 1) as f64;
        j += 1;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn pascal_row(n: usize) -> Vec<BigUint> {
        let mut row = vec![BigUint::from(1u32)];
        for _ in 0..n {
            let mut next = vec![BigUint::from(1u32)];
            for w in row.windows(2) {
                next.push(&w[0] + &w[1]);
            }
            next.push(BigUint::from(1u32));
            row = next;
        }
        row
    }

    #[test]
    fn small_values() {
        assert_eq!(binomial_exact(5, 2).unwrap(), BigUint::from(10u32));
        assert_eq!(binomial_exact(17, 0).unwrap(), BigUint::from(1u32));
        assert!(binomial_exact(3, 4).is_err());
        assert!((ln_binomial(5, 2).unwrap() - 10f64.ln()).abs() < 1e-15);
        assert_eq!(ln_binomial(40, 40).unwrap(), 0.0);
        assert!(ln_binomial(3, 4).is_err());
    }

    #[test]
    fn large_binomial_matches_pascal() {
        let row = pascal_row(1000);
        let c = binomial_exact(1000, 500).unwrap();
        assert_eq!(c, row[500]);
        assert_eq!(c.to_string().len(), 300);

        let ln = ln_binomial(1000, 500).unwrap();
        // ln of a 300-digit integer via its leading digits and length.
        let s = c.to_string();
        let lead: f64 = s[..17].parse::<f64>().unwrap();
        let exact_ln = lead.ln() + ((s.len() - 17) as f64) * 10f64.ln();
        assert!(((ln - exact_ln) / exact_ln).abs() < 1e-10);
    }

    #[test]
    fn pascal_recurrence_holds_exactly() {
        for n in 1..=200u64 {
            for k in 1..n {
                let lhs = binomial_exact(n, k).unwrap();
                let rhs = binomial_exact(n - 1, k - 1).unwrap() + binomial_exact(n - 1, k).unwrap();
                assert_eq!(lhs, rhs, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn ln_binomial_relative_accuracy() {
        for &(n, k) in &[(60u64, 30u64), (200, 3), (200, 100), (3000, 1500), (5000, 7), (9000, 4500)] {
            let exact = binomial_exact(n, k).unwrap();
            let bits = exact.bits();
            let shift = bits.saturating_sub(60);
            let top = (&exact >> shift).to_f64().unwrap();
            let reference = top.ln() + shift as f64 * std::f64::consts::LN_2;
            let got = ln_binomial(n, k).unwrap();
            assert!(((got - reference) / reference).abs() < 1e-12, "n={n} k={k}");
        }
    }

    #[test]
    fn stirling_branch_is_continuous() {
        let below = ln_factorial(4095) + (4096f64).ln();
        assert!((ln_factorial(4096) - below).abs() < 1e-9);
    }

    #[test]
    fn tails() {
        // P(Bin(3, 1/2) > 1) = 1/2
        assert!((binomial_upper_tail(3, 0.5, 1) - 0.5).abs() < 1e-15);
        // small-q branch: P(Bin(10, 1e-3) > 1) ~ 45e-6
        let t = binomial_upper_tail(10, 1e-3, 1);
        let direct: f64 = (2..=10u64)
            .map(|j| ln_binomial_unchecked(10, j).exp() * 1e-3f64.powi(j as i32) * (1.0 - 1e-3f64).powi(10 - j as i32))
            .sum();
        assert!(((t - direct) / direct).abs() < 1e-13);
        assert!((poisson_upper_tail(1, 2.0) - (1.0 - (-2.0f64).exp())).abs() < 1e-15);
        assert!(poisson_upper_tail(60, 5.0) < 1e-30);
    }
}
