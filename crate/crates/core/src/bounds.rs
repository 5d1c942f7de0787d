//! Linear bounds `beta_m n <= L_n <= alpha_m n` for all `n >= m`, anchored at
//! the first `m` exact values of `L_n`.
//!
//! Induction on the fair-split recursion shows that any coefficient above
//! `R(n) = sum_{i<m} C(n,i) L_i / sum_{i<m} C(n,i) i` for every `n >= m`
//! bounds `L_n / n` from above, and symmetrically from below. The supremum
//! and infimum of `R` are searched over a finite horizon `[m, n_eval]`.

use serde::{Deserialize, Serialize};

use crate::config::check_k;
use crate::cri::exact_fair_table;
use crate::error::{invalid, Result};
use crate::exec::Execution;
use crate::numerics::ln_binomial_unchecked;

/// `(K, m, n_eval)` anchors used for the published bounds table.
pub const TABLE_ANCHORS: [(u32, u64, u64); 7] =
    [(1, 50, 100), (2, 100, 200), (4, 200, 400), (8, 400, 800), (16, 400, 800), (32, 400, 800), (64, 500, 1000)];

/// Default `(m, n_eval)` for `K`: the table anchor for listed `K`, otherwise
/// the anchor of the nearest listed `K` above (or the largest one).
pub fn default_anchor(k: u32) -> (u64, u64) {
    TABLE_ANCHORS
        .iter()
        .find(|&&(kk, _, _)| kk >= k)
        .map(|&(_, m, n)| (m, n))
        .unwrap_or((TABLE_ANCHORS[6].1, TABLE_ANCHORS[6].2))
}

const PLATEAU_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsResult {
    #[serde(rename = "K")]
    pub k: u32,
    pub m: u64,
    pub n_eval: u64,
    /// Upper slope, slots per user.
    pub alpha_m: f64,
    /// Lower slope, slots per user.
    pub beta_m: f64,
    /// `1 / (K alpha_m)`, lower throughput bound.
    #[serde(rename = "A_m")]
    pub a_m: f64,
    /// `1 / (K beta_m)`, upper throughput bound.
    #[serde(rename = "B_m")]
    pub b_m: f64,
    pub argmax_n: u64,
    pub argmin_n: u64,
    /// `|R(n_eval) - R(n_eval - 1)| < 1e-7`: the horizon has reached the regime
    /// where `R` barely moves.
    pub plateau: bool,
}

fn check_anchor(m: u64, k: u32) -> Result<()> {
    check_k(k)?;
    if m < k as u64 + 1 || m < 2 {
        return Err(invalid(format!("anchor m = {m} must be at least K + 1 = {}", k + 1)));
    }
    Ok(())
}

/// `R(n)` from a table holding at least `L_0..L_{m-1}`.
pub fn ratio_from_table(l: &[f64], m: u64, n: u64) -> f64 {
    debug_assert!(n >= m && l.len() as u64 >= m);
    let lw: Vec<f64> = (0..m).map(|i| ln_binomial_unchecked(n, i)).collect();
    let top = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (mut num, mut den) = (0.0, 0.0);
    for (i, w) in lw.iter().enumerate() {
        let e = (w - top).exp();
        num += e * l[i];
        den += e * i as f64;
    }
    num / den
}

/// `R(n)` using exact fair-split `L_i`.
pub fn ratio_sequence(m: u64, k: u32, n: u64) -> Result<f64> {
    check_anchor(m, k)?;
    if n < m {
        return Err(invalid(format!("R(n) needs n >= m, got n = {n} < m = {m}")));
    }
    let table = exact_fair_table(k, m - 1, true, Execution::Sequential)?;
    Ok(ratio_from_table(&table, m, n))
}

/// Bounds from an existing table of `L_0..L_{m-1}` (SIC or the shifted no-SIC table).
pub fn bounds_from_table(table: &[f64], k: u32, m: u64, n_eval: u64, exec: Execution) -> Result<BoundsResult> {
    check_anchor(m, k)?;
    if n_eval < m {
        return Err(invalid(format!("horizon n_eval = {n_eval} must be at least m = {m}")));
    }
    if (table.len() as u64) < m {
        return Err(invalid("table shorter than the anchor m"));
    }
    let span = (n_eval - m + 1) as usize;
    let ratios = exec.map_collect(span, |j| ratio_from_table(table, m, m + j as u64));
    let (mut imax, mut imin) = (0, 0);
    for (j, r) in ratios.iter().enumerate() {
        if *r > ratios[imax] {
            imax = j;
        }
        if *r < ratios[imin] {
            imin = j;
        }
    }
    let (alpha, beta) = (ratios[imax], ratios[imin]);
    let plateau = span >= 2 && (ratios[span - 1] - ratios[span - 2]).abs() < PLATEAU_TOL;
    let kf = k as f64;
    Ok(BoundsResult {
        k,
        m,
        n_eval,
        alpha_m: alpha,
        beta_m: beta,
        a_m: 1.0 / (kf * alpha),
        b_m: 1.0 / (kf * beta),
        argmax_n: m + imax as u64,
        argmin_n: m + imin as u64,
        plateau,
    })
}

/// `alpha_m`, `beta_m` and the induced throughput bounds, using exact `L_i`.
pub fn compute_bounds(m: u64, k: u32, n_eval: u64) -> Result<BoundsResult> {
    compute_bounds_with(m, k, n_eval, Execution::default())
}

pub fn compute_bounds_with(m: u64, k: u32, n_eval: u64, exec: Execution) -> Result<BoundsResult> {
    check_anchor(m, k)?;
    let table = exact_fair_table(k, m - 1, true, exec)?;
    bounds_from_table(&table, k, m, n_eval, exec)
}
