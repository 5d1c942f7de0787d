use treesic::arrivals::{
    gated_bounds, sensitivity_curve_for, windowed_bounds_for, StabilityReport, SupSearch, WindowedModel,
};
use treesic::asymptotics::AsymptoticModel;
use treesic::bounds::{compute_bounds, default_anchor, BoundsResult};
use treesic::cri::{conditional_throughput, expected_cri_closed_form, fair_series_table, CriTable};
use treesic::sim::{monte_carlo, simulate_cri_trace, simulate_windowed as sim_windowed, EventKind, MonteCarloStats};
use treesic::{Execution, ProtocolConfig};

use crate::output::{Cell, Table};
use crate::{CliError, CliResult, MethodArg};

pub const CRI_HEADER: [&str; 7] = ["n", "K", "p", "sic", "method", "L_n", "T_n"];
pub const BOUNDS_HEADER: [&str; 7] = ["K", "m", "n_eval", "alpha", "beta", "A", "B"];
pub const STABILITY_HEADER: [&str; 7] =
    ["K", "access", "lambda_S", "lambda_U", "lambda_S_norm", "lambda_U_norm", "argmax_z"];
pub const SIMULATE_HEADER: [&str; 11] =
    ["n", "K", "d", "p", "sic", "trials", "seed", "mean_slots", "std_dev", "ci95", "throughput"];
pub const SENSITIVITY_HEADER: [&str; 3] = ["z", "F", "F_no_sic"];
pub const TRACE_HEADER: [&str; 4] = ["index", "kind", "count", "depth"];

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// `L_0..=L_{n_max}` by the chosen method, returning the method actually used.
pub fn cri_values(k: u32, n_max: u64, p: f64, sic: bool, method: MethodArg) -> CliResult<(&'static str, Vec<f64>)> {
    let fair = p == 0.5;
    let method = match method {
        MethodArg::Auto if fair => MethodArg::Series,
        MethodArg::Auto => MethodArg::Recursive,
        m => m,
    };
    match method {
        MethodArg::Series => {
            if !fair {
                return Err(usage("the series method needs a fair split (--p 0.5)"));
            }
            Ok(("series", fair_series_table(k, n_max, sic, Execution::default())?))
        }
        MethodArg::Recursive => Ok(("recursive", CriTable::build(n_max, k, p, sic)?.values().to_vec())),
        MethodArg::Closed => {
            let values = (0..=n_max)
                .map(|n| {
                    let l = expected_cri_closed_form(n, k, p)?.value;
                    Ok(if sic { l } else { 2.0 * l - 1.0 })
                })
                .collect::<treesic::Result<Vec<f64>>>()?;
            Ok(("closed", values))
        }
        MethodArg::Auto => unreachable!("auto resolved above"),
    }
}

pub fn cri(k: u32, n_max: u64, p: f64, sic: bool, method: MethodArg) -> CliResult<Table> {
    let (name, values) = cri_values(k, n_max, p, sic, method)?;
    let mut t = Table::new(CRI_HEADER.to_vec());
    for (n, l) in values.iter().enumerate() {
        t.push(vec![
            n.into(),
            k.into(),
            p.into(),
            sic.into(),
            name.into(),
            (*l).into(),
            conditional_throughput(n as u64, k, *l).into(),
        ]);
    }
    Ok(t)
}

pub fn asym(k: u32, n: u64) -> CliResult<Table> {
    if n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let model = AsymptoticModel::new(k)?;
    let (l_star, t_star) = model.no_sic(n as f64);
    let mut t = Table::new(vec!["n", "K", "L_n_asym", "T_n_asym", "L_n_no_sic_asym", "T_n_no_sic_asym", "amplitude"]);
    t.push(vec![
        n.into(),
        k.into(),
        model.cri(n as f64).into(),
        model.throughput(n as f64).into(),
        l_star.into(),
        t_star.into(),
        model.amplitude.into(),
    ]);
    Ok(t)
}

pub fn amplitude_table(k_max: u32) -> CliResult<Table> {
    if k_max == 0 {
        return Err(usage("--K-max must be at least 1"));
    }
    let mut t = Table::new(vec!["K", "amplitude", "phase", "T_min", "T_max"]);
    for k in 1..=k_max {
        let model = AsymptoticModel::new(k)?;
        let (lo, hi) = model.throughput_range();
        t.push(vec![k.into(), model.amplitude.into(), model.phase.into(), lo.into(), hi.into()]);
    }
    Ok(t)
}

fn anchor(k: u32, m: Option<u64>, n_eval: Option<u64>) -> (u64, u64) {
    let (dm, dn) = default_anchor(k);
    match (m, n_eval) {
        (Some(m), Some(n)) => (m, n),
        (Some(m), None) => (m, 2 * m),
        (None, Some(n)) => (dm, n),
        (None, None) => (dm, dn),
    }
}

pub fn bounds_row(b: &BoundsResult) -> Vec<Cell> {
    vec![b.k.into(), b.m.into(), b.n_eval.into(), b.alpha_m.into(), b.beta_m.into(), b.a_m.into(), b.b_m.into()]
}

pub fn bounds(k: u32, m: Option<u64>, n_eval: Option<u64>) -> CliResult<Table> {
    let (m, n_eval) = anchor(k, m, n_eval);
    let b = compute_bounds(m, k, n_eval)?;
    if !b.plateau {
        eprintln!("warning: R(n) still moving at the horizon n_eval = {n_eval}; the sup/inf may not be final");
    }
    let mut t = Table::new(BOUNDS_HEADER.to_vec());
    t.push(bounds_row(&b));
    Ok(t)
}

fn stability_row(r: &StabilityReport) -> Vec<Cell> {
    let access = if r.sic { r.access.name().to_string() } else { format!("{}_no_sic", r.access.name()) };
    vec![
        r.k.into(),
        Cell::Text(access),
        r.lambda_s.into(),
        r.lambda_u.into(),
        r.lambda_s_norm.into(),
        r.lambda_u_norm.into(),
        r.argmax_z.into(),
    ]
}

pub fn gated(k: u32) -> CliResult<Table> {
    let mut t = Table::new(STABILITY_HEADER.to_vec());
    t.push(stability_row(&gated_bounds(k)?));
    Ok(t)
}

pub fn windowed_report(k: u32, m: u64, n_eval: u64, sic: bool) -> CliResult<StabilityReport> {
    let exec = Execution::default();
    let model = WindowedModel::new(k, m, n_eval, sic, exec)?;
    Ok(windowed_bounds_for(&model, SupSearch::default(), exec)?)
}

pub fn windowed(k: u32, m: Option<u64>, n_eval: Option<u64>, sic: bool) -> CliResult<Table> {
    let (m, n_eval) = anchor(k, m, n_eval);
    let mut t = Table::new(STABILITY_HEADER.to_vec());
    t.push(stability_row(&windowed_report(k, m, n_eval, sic)?));
    Ok(t)
}

pub fn z_grid(z_step: f64, z_max: f64) -> CliResult<Vec<f64>> {
    if !(z_step > 0.0 && z_max >= z_step && z_max.is_finite()) {
        return Err(usage("need 0 < --z-step <= --z-max"));
    }
    let count = (z_max / z_step + 1e-9).floor() as usize;
    Ok((1..=count).map(|i| i as f64 * z_step).collect())
}

pub fn sensitivity_points(
    k: u32,
    m: u64,
    n_eval: u64,
    grid: &[f64],
) -> CliResult<Vec<treesic::arrivals::SensitivityPoint>> {
    let exec = Execution::default();
    let sic = WindowedModel::new(k, m, n_eval, true, exec)?;
    let no_sic = WindowedModel::new(k, m, n_eval, false, exec)?;
    Ok(sensitivity_curve_for(&sic, &no_sic, grid, exec)?)
}

pub fn sensitivity(k: u32, m: Option<u64>, z_max: Option<f64>, z_step: f64) -> CliResult<Table> {
    let (m, n_eval) = anchor(k, m, None);
    let grid = z_grid(z_step, z_max.unwrap_or(m as f64))?;
    let mut t = Table::new(SENSITIVITY_HEADER.to_vec());
    for pt in sensitivity_points(k, m, n_eval, &grid)? {
        t.push(vec![pt.z.into(), pt.f.into(), pt.f_no_sic.into()]);
    }
    Ok(t)
}

pub struct SimulateArgs {
    pub k: u32,
    pub d: usize,
    pub n: u64,
    pub trials: u64,
    pub seed: u64,
    pub p: Option<f64>,
    pub sic: bool,
    pub trace: bool,
}

pub fn protocol(k: u32, d: usize, p: Option<f64>, sic: bool) -> CliResult<ProtocolConfig> {
    match (d, p) {
        (2, p) => Ok(ProtocolConfig::binary(k, p.unwrap_or(0.5), sic)?),
        (_, Some(_)) => Err(usage("--p applies to binary splitting only; d-ary splits are fair")),
        (d, None) => Ok(ProtocolConfig::fair(k, d, sic)?),
    }
}

pub fn simulate_row(config: &ProtocolConfig, seed: u64, s: &MonteCarloStats) -> Vec<Cell> {
    vec![
        s.n.into(),
        config.k.into(),
        config.d().into(),
        config.split_probs[0].into(),
        config.sic.into(),
        s.trials.into(),
        seed.into(),
        s.mean_slots.into(),
        s.std_dev.into(),
        s.ci95_half_width.into(),
        s.throughput.into(),
    ]
}

pub fn simulate(a: SimulateArgs) -> CliResult<Table> {
    let config = protocol(a.k, a.d, a.p, a.sic)?;
    if a.trace {
        let (_, events) = simulate_cri_trace(&config, a.n, a.seed)?;
        let mut t = Table::new(TRACE_HEADER.to_vec());
        for e in events {
            let (kind, count) = match e.kind {
                EventKind::Idle => ("idle", 0),
                EventKind::Success(c) => ("success", c),
                EventKind::Collision(c) => ("collision", c),
                EventKind::SkippedSicResolved(c) => ("skipped_sic_resolved", c),
                EventKind::SkippedKnownResidual(c) => ("skipped_known_residual", c),
            };
            t.push(vec![e.index.into(), kind.into(), count.into(), e.depth.into()]);
        }
        return Ok(t);
    }
    let stats = monte_carlo(&config, a.n, a.trials, a.seed)?;
    let mut t = Table::new(SIMULATE_HEADER.to_vec());
    t.push(simulate_row(&config, a.seed, &stats));
    Ok(t)
}

pub fn simulate_windowed(
    k: u32,
    d: usize,
    sic: bool,
    lambda: f64,
    delta: f64,
    windows: u64,
    seed: u64,
) -> CliResult<Table> {
    let config = protocol(k, d, None, sic)?;
    let s = sim_windowed(&config, lambda, delta, windows, seed)?;
    let mut t = Table::new(vec![
        "K",
        "d",
        "sic",
        "lambda",
        "delta",
        "windows",
        "seed",
        "users",
        "mean_cri",
        "mean_wait",
        "drift_per_window",
        "drift_std_error",
        "final_lag",
    ]);
    t.push(vec![
        k.into(),
        d.into(),
        sic.into(),
        lambda.into(),
        delta.into(),
        windows.into(),
        seed.into(),
        s.users.into(),
        s.mean_cri.into(),
        s.mean_wait.into(),
        s.drift_per_window.into(),
        s.drift_std_error.into(),
        s.final_lag.into(),
    ]);
    Ok(t)
}
