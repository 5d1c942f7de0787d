//! Stability bounds under Poisson arrivals.
//!
//! Gated access takes its bounds from the extremes of the asymptotic
//! oscillation of `L_n / n`. Windowed access compares the mean CRI length of a
//! window holding Poisson(`z`) users with the window length: with linear bounds
//! `beta n <= L_n <= alpha n` valid for `n > m`,
//!
//! ```text
//! f(beta, m, z) <= L(z) <= f(alpha, m, z),
//! f(x, m, z) = x z + sum_{i=0}^{m} (L_i - x i) z^i e^-z / i!
//! ```
//!
//! so `sup_z z / f(alpha, m, z)` is a sufficient stability bound and
//! `sup_z z / f(beta, m, z)` an instability bound.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::asymptotics::AsymptoticModel;
use crate::bounds::{bounds_from_table, BoundsResult};
use crate::config::check_k;
use crate::cri::{exact_fair_table, expected_cri_series};
use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::numerics::{ln_poisson_pmf, poisson_upper_tail, sum_by_magnitude};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Access {
    Gated,
    Windowed,
}

impl Access {
    pub fn name(self) -> &'static str {
        match self {
            Access::Gated => "gated",
            Access::Windowed => "windowed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub access: Access,
    #[serde(rename = "K")]
    pub k: u32,
    pub sic: bool,
    /// Arrivals per slot.
    pub lambda_s: f64,
    pub lambda_u: f64,
    pub lambda_s_norm: f64,
    pub lambda_u_norm: f64,
    /// Window load `lambda * Delta` maximizing the stability objective.
    pub argmax_z: Option<f64>,
    pub m_used: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub windowed: Option<WindowedDiagnostics>,
}

/// Extra detail on how the windowed suprema were located.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowedDiagnostics {
    pub n_eval: u64,
    pub coeff_upper: f64,
    pub coeff_lower: f64,
    /// Largest grid load at which `f(alpha)` and `f(beta)` agree to 1e-9.
    pub tight_horizon: f64,
    /// Maximizer of the instability objective within the tight region.
    pub argmax_z_unstable: f64,
    /// `sup z / (K f(beta))` over the whole grid; tends to `1 / (K beta)` as
    /// the linear lower bound takes over at large loads.
    pub lambda_u_norm_full_horizon: f64,
}

impl StabilityReport {
    fn new(access: Access, k: u32, sic: bool, lambda_s: f64, lambda_u: f64) -> Self {
        let kf = k as f64;
        StabilityReport {
            access,
            k,
            sic,
            lambda_s,
            lambda_u,
            lambda_s_norm: lambda_s / kf,
            lambda_u_norm: lambda_u / kf,
            argmax_z: None,
            m_used: None,
            windowed: None,
        }
    }
}

/// Gated access: `lambda_{S,U} = K ln 2 / (1 +- 2K|B(K,1)|)`.
pub fn gated_bounds(k: u32) -> Result<StabilityReport> {
    let model = AsymptoticModel::new(k)?;
    let a = model.amplitude;
    if a >= 1.0 {
        return Err(Error::Consistency(format!("oscillation amplitude {a} >= 1 for K = {k}")));
    }
    let kf = k as f64;
    Ok(StabilityReport::new(Access::Gated, k, true, kf * LN_2 / (1.0 + a), kf * LN_2 / (1.0 - a)))
}

/// `f(x, k, z) = x z + sum_{i=0}^{k} (L_i - x i) z^i e^-z / i!`.
pub fn windowed_f(x: f64, k: u64, z: f64, l_table: &[f64]) -> f64 {
    assert!(l_table.len() as u64 > k, "L table must cover i = 0..=k");
    let terms: Vec<f64> = (0..=k)
        .map(|i| {
            let w = ln_poisson_pmf(i, z);
            if w == f64::NEG_INFINITY {
                0.0
            } else {
                (l_table[i as usize] - x * i as f64) * w.exp()
            }
        })
        .collect();
    x * z + sum_by_magnitude(terms)
}

/// Poisson mixture of exact `L_n` and the tail mass that was dropped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonMixture {
    pub value: f64,
    pub i_max: u64,
    pub tail_mass: f64,
}

impl PoissonMixture {
    pub fn tail_ok(&self) -> bool {
        self.tail_mass < 1e-12
    }
}

/// Truncation point `z + 12 sqrt(z) + 50`.
pub fn default_i_max(z: f64) -> u64 {
    (z + 12.0 * z.sqrt() + 50.0).ceil() as u64
}

/// `L(z) = sum_{n <= i_max} L_n z^n e^-z / n!` with exact fair-split `L_n`.
pub fn expected_cri_poisson(z: f64, k: u32, i_max: u64) -> Result<PoissonMixture> {
    check_k(k)?;
    if !(z >= 0.0 && z.is_finite()) {
        return Err(invalid(format!("window load z = {z} must be finite and non-negative")));
    }
    let table: Vec<f64> = (0..=i_max).map(|n| expected_cri_series(n, k).map(|c| c.value)).collect::<Result<_>>()?;
    Ok(poisson_mixture_from_table(z, &table))
}

/// Poisson mixture over a precomputed table of `L_0..L_{i_max}`.
pub fn poisson_mixture_from_table(z: f64, table: &[f64]) -> PoissonMixture {
    let i_max = table.len() as u64 - 1;
    let terms: Vec<f64> = table.iter().enumerate().map(|(n, l)| l * ln_poisson_pmf(n as u64, z).exp()).collect();
    PoissonMixture { value: sum_by_magnitude(terms), i_max, tail_mass: poisson_upper_tail(i_max + 1, z) }
}

/// Inputs of the windowed objective: linear coefficients and the exact head
/// of the CRI table.
///
/// The no-SIC variant bounds `L*_n + 1` linearly (it obeys the same
/// homogeneous recursion as `L_n`), so its bounds read `L*_n <= x n - 1` and
/// the objective carries a `shift` of one slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowedModel {
    #[serde(rename = "K")]
    pub k: u32,
    pub m: u64,
    pub sic: bool,
    /// alpha_m
    pub coeff_upper: f64,
    /// beta_m
    pub coeff_lower: f64,
    /// Exact `L_0..=L_m` (or `L*_0..=L*_m`).
    pub l_table: Vec<f64>,
    pub bounds: BoundsResult,
}

impl WindowedModel {
    pub fn new(k: u32, m: u64, n_eval: u64, sic: bool, exec: Execution) -> Result<Self> {
        check_k(k)?;
        let l_table = exact_fair_table(k, m, sic, exec)?;
        let shifted: Vec<f64> = l_table.iter().map(|l| l + Self::shift_for(sic)).collect();
        let bounds = bounds_from_table(&shifted, k, m, n_eval, exec)?;
        Ok(WindowedModel { k, m, sic, coeff_upper: bounds.alpha_m, coeff_lower: bounds.beta_m, l_table, bounds })
    }

    fn shift_for(sic: bool) -> f64 {
        if sic {
            0.0
        } else {
            1.0
        }
    }

    pub fn shift(&self) -> f64 {
        Self::shift_for(self.sic)
    }

    /// Objective denominator with slope `x`: exact head up to `m`, linear tail beyond.
    pub fn f(&self, x: f64, z: f64) -> f64 {
        let s = self.shift();
        if s == 0.0 {
            return windowed_f(x, self.m, z, &self.l_table);
        }
        // x z - s + sum_{i<=m} (L_i + s - x i) P_i = f(x, m, z) - s P(N > m)
        windowed_f(x, self.m, z, &self.l_table) - s * poisson_upper_tail(self.m + 1, z)
    }

    /// `f(alpha) - f(beta) = (alpha - beta) z P(N >= m)`, computed without cancellation.
    pub fn sandwich_gap(&self, z: f64) -> f64 {
        (self.coeff_upper - self.coeff_lower) * z * poisson_upper_tail(self.m, z)
    }

    /// Normalized objective `z / (K f(x, m, z))`.
    pub fn objective(&self, x: f64, z: f64) -> f64 {
        z / (self.k as f64 * self.f(x, z))
    }
}

/// Sup-search settings for the windowed objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupSearch {
    pub grid_step: f64,
    /// Grid covers `(0, horizon_factor * m]`.
    pub horizon_factor: f64,
    pub tolerance: f64,
    /// Relative sandwich gap below which `f(alpha)`, `f(beta)` and `L(z)` coincide.
    pub tight_rel_gap: f64,
}

impl Default for SupSearch {
    fn default() -> Self {
        SupSearch { grid_step: 0.25, horizon_factor: 8.0, tolerance: 1e-8, tight_rel_gap: 1e-9 }
    }
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let z = 0.5 * (a + b);
    (z, f(z))
}

struct GridPoint {
    z: f64,
    stable: f64,
    unstable: f64,
    tight: bool,
}

/// Refines a grid maximum at index `j` inside `[z_{j-1}, z_{j+1}]` (clamped to `allowed`).
fn refine<F: Fn(f64) -> f64>(
    grid: &[GridPoint],
    j: usize,
    allowed: impl Fn(usize) -> bool,
    f: F,
    tol: f64,
) -> (f64, f64) {
    let lo = if j > 0 && allowed(j - 1) { grid[j - 1].z } else { grid[j].z };
    let hi = if j + 1 < grid.len() && allowed(j + 1) { grid[j + 1].z } else { grid[j].z };
    let (z, v) = golden_max(&f, lo, hi, tol);
    let grid_v = f(grid[j].z);
    if grid_v > v {
        (grid[j].z, grid_v)
    } else {
        (z, v)
    }
}

/// Windowed stability bounds for a prepared model.
///
/// `lambda_S` maximizes `z / f(alpha_m, m, z)` over the whole grid and fails
/// if the maximizer is the last grid point. `lambda_U` maximizes
/// `z / f(beta_m, m, z)` over the loads where the sandwich is tight, i.e. where
/// the first `m` exact values determine `L(z)`; beyond that region the
/// objective only reflects the looseness of `beta_m`.
pub fn windowed_bounds_for(model: &WindowedModel, search: SupSearch, exec: Execution) -> Result<StabilityReport> {
    let points = (search.horizon_factor * model.m as f64 / search.grid_step).floor() as usize;
    if points < 3 {
        return Err(invalid("windowed search grid needs at least three points"));
    }
    let (alpha, beta) = (model.coeff_upper, model.coeff_lower);
    let grid: Vec<GridPoint> = exec.map_collect(points, |j| {
        let z = search.grid_step * (j + 1) as f64;
        let f_beta = model.f(beta, z);
        GridPoint {
            z,
            stable: model.objective(alpha, z),
            unstable: z / (model.k as f64 * f_beta),
            tight: model.sandwich_gap(z) <= search.tight_rel_gap * f_beta,
        }
    });
    let best_stable = (0..points).max_by(|&a, &b| grid[a].stable.total_cmp(&grid[b].stable)).expect("non-empty grid");
    if best_stable == points - 1 {
        return Err(Error::HorizonTooSmall { edge: grid[best_stable].z });
    }
    let (z_s, lambda_s_norm) = refine(&grid, best_stable, |_| true, |z| model.objective(alpha, z), search.tolerance);

    let full_u = grid.iter().map(|g| g.unstable).fold(f64::NEG_INFINITY, f64::max);
    let tight_idx: Vec<usize> = (0..points).filter(|&j| grid[j].tight).collect();
    let best_unstable = tight_idx
        .iter()
        .copied()
        .max_by(|&a, &b| grid[a].unstable.total_cmp(&grid[b].unstable))
        .ok_or_else(|| Error::Consistency("no window load where the CRI sandwich is tight".into()))?;
    let (z_u, lambda_u_norm) =
        refine(&grid, best_unstable, |j| grid[j].tight, |z| model.objective(beta, z), search.tolerance);
    let tight_horizon = tight_idx.last().map(|&j| grid[j].z).unwrap_or(0.0);

    let kf = model.k as f64;
    let mut report = StabilityReport::new(Access::Windowed, model.k, model.sic, lambda_s_norm * kf, lambda_u_norm * kf);
    report.argmax_z = Some(z_s);
    report.m_used = Some(model.m);
    report.windowed = Some(WindowedDiagnostics {
        n_eval: model.bounds.n_eval,
        coeff_upper: alpha,
        coeff_lower: beta,
        tight_horizon,
        argmax_z_unstable: z_u,
        lambda_u_norm_full_horizon: full_u,
    });
    Ok(report)
}

/// Windowed bounds with SIC, exact `L_i` and the given anchor.
pub fn windowed_bounds(k: u32, m: u64, n_eval: u64) -> Result<StabilityReport> {
    let exec = Execution::default();
    let model = WindowedModel::new(k, m, n_eval, true, exec)?;
    windowed_bounds_for(&model, SupSearch::default(), exec)
}

/// Windowed bounds without SIC.
pub fn windowed_bounds_no_sic(k: u32, m: u64, n_eval: u64) -> Result<StabilityReport> {
    let exec = Execution::default();
    let model = WindowedModel::new(k, m, n_eval, false, exec)?;
    windowed_bounds_for(&model, SupSearch::default(), exec)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityPoint {
    pub z: f64,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "F_no_sic")]
    pub f_no_sic: f64,
}

/// `F(z) = z / (K f(beta_m, m, z))` with and without SIC over `z_grid`.
pub fn sensitivity_curve_for(
    sic: &WindowedModel,
    no_sic: &WindowedModel,
    z_grid: &[f64],
    exec: Execution,
) -> Result<Vec<SensitivityPoint>> {
    if z_grid.iter().any(|z| !(*z > 0.0 && z.is_finite())) || z_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("z grid must be positive and strictly increasing"));
    }
    Ok(exec.map_collect(z_grid.len(), |j| {
        let z = z_grid[j];
        SensitivityPoint { z, f: sic.objective(sic.coeff_lower, z), f_no_sic: no_sic.objective(no_sic.coeff_lower, z) }
    }))
}

pub fn sensitivity_curve(k: u32, m: u64, n_eval: u64, z_grid: &[f64]) -> Result<Vec<SensitivityPoint>> {
    let exec = Execution::default();
    let sic = WindowedModel::new(k, m, n_eval, true, exec)?;
    let no_sic = WindowedModel::new(k, m, n_eval, false, exec)?;
    sensitivity_curve_for(&sic, &no_sic, z_grid, exec)
}
