//! Windowed access with Poisson arrivals: the users arriving in window `i`
//! (length `delta`) form one CRI, started once window `i` has closed and
//! CRI `i - 1` has finished.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::{mix, simulate_cri};
use crate::config::ProtocolConfig;
use crate::error::{invalid, Result};
use crate::exec::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowedSimSummary {
    pub lambda: f64,
    pub delta: f64,
    pub windows: u64,
    pub users: u64,
    pub mean_cri: f64,
    /// Mean delay between a window closing and its CRI starting, slots.
    pub mean_wait: f64,
    /// `mean(l_i) - delta`: positive means the CRIs fall behind real time.
    pub drift_per_window: f64,
    /// Standard error of `drift_per_window`.
    pub drift_std_error: f64,
    /// End of the last CRI minus the end of the last window, slots.
    pub final_lag: f64,
}

impl WindowedSimSummary {
    pub fn stable(&self) -> bool {
        self.drift_per_window <= 0.0
    }
}

pub fn simulate_windowed(
    config: &ProtocolConfig,
    lambda: f64,
    delta: f64,
    windows: u64,
    seed: u64,
) -> Result<WindowedSimSummary> {
    simulate_windowed_with(config, lambda, delta, windows, seed, Execution::default())
}

/// As [`simulate_windowed`]. CRI lengths are independent across windows, so
/// they are drawn under `exec` and only the queue recursion runs in order.
pub fn simulate_windowed_with(
    config: &ProtocolConfig,
    lambda: f64,
    delta: f64,
    windows: u64,
    seed: u64,
    exec: Execution,
) -> Result<WindowedSimSummary> {
    config.validate()?;
    if !(lambda > 0.0 && lambda.is_finite() && delta > 0.0 && delta.is_finite()) {
        return Err(invalid("lambda and delta must be positive and finite"));
    }
    if windows == 0 {
        return Err(invalid("need at least one window"));
    }
    let arrivals = Poisson::new(lambda * delta).map_err(|e| invalid(format!("Poisson({}): {e}", lambda * delta)))?;
    let len = usize::try_from(windows).map_err(|_| invalid("too many windows"))?;
    let draws: Vec<Result<(u64, u64)>> = exec.map_collect(len, |i| {
        let window_seed = mix(seed, i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(window_seed);
        let users = arrivals.sample(&mut rng) as u64;
        simulate_cri(config, users, mix(window_seed, u64::MAX)).map(|o| (users, o.slots))
    });

    let (mut end, mut users, mut slots, mut slots_sq, mut wait) = (0.0f64, 0u64, 0u128, 0u128, 0.0f64);
    for (i, draw) in draws.into_iter().enumerate() {
        let (u, l) = draw?;
        let close = (i + 1) as f64 * delta;
        let start = end.max(close);
        wait += start - close;
        end = start + l as f64;
        users += u;
        slots += l as u128;
        slots_sq += (l as u128) * (l as u128);
    }
    let w = windows as f64;
    let mean_cri = slots as f64 / w;
    let var = if windows > 1 { ((slots_sq as f64 - slots as f64 * mean_cri) / (w - 1.0)).max(0.0) } else { 0.0 };
    Ok(WindowedSimSummary {
        lambda,
        delta,
        windows,
        users,
        mean_cri,
        mean_wait: wait / w,
        drift_per_window: mean_cri - delta,
        drift_std_error: (var / w).sqrt(),
        final_lag: end - w * delta,
    })
}
