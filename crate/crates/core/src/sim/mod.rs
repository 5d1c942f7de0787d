//! Slot-exact Monte Carlo simulation of a single collision resolution
//! interval (CRI) for binary and d-ary trees.
//!
//! Two independent implementations are kept in lockstep:
//!
//! * the count mode evaluates the recursive law. For a node with `n > K`
//!   users split into `I_1..I_d` it charges one slot without SIC, and with SIC
//!   charges `1{d_min < d}` where `d_min` is the first group index after which
//!   at most `K` users remain undecoded;
//! * the trace mode replays the protocol slot by slot, emitting idles,
//!   successes, collisions and the slots SIC lets the receiver skip.
//!
//! Both walk the tree depth first and request splits in the same order, so a
//! given seed yields the same tree in both modes.

mod rng;
mod windowed;

use serde::{Deserialize, Serialize};

pub use rng::{mix, sample_multinomial, KeyedSplitter, RandomSplitter, ScriptedSplitter, Splitter, ROOT_KEY};
pub use windowed::{simulate_windowed, simulate_windowed_with, WindowedSimSummary};

use crate::config::{check_k, check_p, ProtocolConfig};
use crate::error::{invalid, Error, Result};
use crate::exec::Execution;

/// Tree depth at which a trial is aborted as a runaway.
pub const MAX_DEPTH: u32 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub n: u64,
    pub slots: u64,
    pub resolved: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    Idle,
    Success(u64),
    Collision(u64),
    /// A group decoded from the stored residual without a slot.
    SkippedSicResolved(u64),
    /// Root slot of the last undecoded group, known to collide, not transmitted.
    SkippedKnownResidual(u64),
}

impl EventKind {
    pub fn is_skipped(self) -> bool {
        matches!(self, EventKind::SkippedSicResolved(_) | EventKind::SkippedKnownResidual(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotEvent {
    /// Slot counter; `None` for skipped events.
    pub index: Option<u64>,
    pub kind: EventKind,
    pub depth: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloStats {
    pub n: u64,
    pub trials: u64,
    pub mean_slots: f64,
    pub std_dev: f64,
    pub ci95_half_width: f64,
    /// `n / (K mean_slots)`
    pub throughput: f64,
    pub min_slots: u64,
    pub max_slots: u64,
}

impl MonteCarloStats {
    pub fn std_error(&self) -> f64 {
        self.std_dev / (self.trials as f64).sqrt()
    }
}

fn depth_trap(depth: u32) -> Result<()> {
    if depth > MAX_DEPTH {
        Err(Error::Consistency(format!("tree depth exceeded {MAX_DEPTH}")))
    } else {
        Ok(())
    }
}

/// Number of leading groups after which at most `k` of the `n` users remain.
fn d_min(n: u64, k: u32, counts: &[u64]) -> usize {
    let mut seen = 0;
    for (j, c) in counts.iter().enumerate() {
        seen += c;
        if seen + k as u64 >= n {
            return j + 1;
        }
    }
    counts.len()
}

/// Slot count of one CRI by the recursive law, with an arbitrary splitter.
pub fn count_slots<S: Splitter + ?Sized>(config: &ProtocolConfig, n: u64, splitter: &mut S) -> Result<u64> {
    config.validate()?;
    let d = config.d();
    let mut counts = vec![0u64; d];
    let mut stack = vec![(n, ROOT_KEY, 0u32)];
    let mut slots = 0u64;
    while let Some((n, key, depth)) = stack.pop() {
        depth_trap(depth)?;
        if n <= config.k as u64 {
            slots += 1;
            continue;
        }
        splitter.split(key, n, &config.split_probs, &mut counts)?;
        let upto = if config.sic {
            let dm = d_min(n, config.k, &counts);
            slots += (dm < d) as u64;
            dm
        } else {
            slots += 1;
            d
        };
        for j in (0..upto).rev() {
            stack.push((counts[j], mix(key, j as u64), depth + 1));
        }
    }
    Ok(slots)
}

enum Task {
    Node { n: u64, key: u64, depth: u32, known_collision: bool },
    SicResolved { n: u64, depth: u32 },
}

/// Operational slot log of one CRI, with an arbitrary splitter. Returns the
/// number of transmitted slots and the events in time order.
pub fn trace_slots<S: Splitter + ?Sized>(
    config: &ProtocolConfig,
    n: u64,
    splitter: &mut S,
) -> Result<(u64, Vec<SlotEvent>)> {
    config.validate()?;
    let (d, k) = (config.d(), config.k as u64);
    let mut counts = vec![0u64; d];
    let mut events = Vec::new();
    let mut next = 0u64;
    let mut stack = vec![Task::Node { n, key: ROOT_KEY, depth: 0, known_collision: false }];
    let mut emit = |kind: EventKind, depth: u32, events: &mut Vec<SlotEvent>| {
        let index = if kind.is_skipped() {
            None
        } else {
            next += 1;
            Some(next - 1)
        };
        events.push(SlotEvent { index, kind, depth });
    };
    while let Some(task) = stack.pop() {
        let (n, key, depth, known_collision) = match task {
            Task::SicResolved { n, depth } => {
                emit(EventKind::SkippedSicResolved(n), depth, &mut events);
                continue;
            }
            Task::Node { n, key, depth, known_collision } => (n, key, depth, known_collision),
        };
        depth_trap(depth)?;
        if n <= k {
            if known_collision {
                return Err(Error::Consistency(format!("node with {n} <= K users marked as collision")));
            }
            emit(if n == 0 { EventKind::Idle } else { EventKind::Success(n) }, depth, &mut events);
            continue;
        }
        if known_collision {
            emit(EventKind::SkippedKnownResidual(n), depth, &mut events);
        } else {
            emit(EventKind::Collision(n), depth, &mut events);
        }
        splitter.split(key, n, &config.split_probs, &mut counts)?;
        // Walk the groups left to right, tracking the undecoded residual.
        let mut residual = n;
        let mut pending = Vec::with_capacity(d);
        for (j, &c) in counts.iter().enumerate() {
            let child = mix(key, j as u64);
            if config.sic && residual <= k {
                pending.push(Task::SicResolved { n: c, depth: depth + 1 });
                continue;
            }
            let last_unknown = config.sic && j == d - 1;
            pending.push(Task::Node { n: c, key: child, depth: depth + 1, known_collision: last_unknown });
            residual -= c;
        }
        stack.extend(pending.into_iter().rev());
    }
    let slots = events.iter().filter(|e| e.index.is_some()).count() as u64;
    Ok((slots, events))
}

/// One CRI with `n` users by the recursive law, splits drawn from `seed`.
pub fn simulate_cri(config: &ProtocolConfig, n: u64, seed: u64) -> Result<TrialOutcome> {
    let mut splitter = RandomSplitter(rng::trial_rng(seed));
    let slots = count_slots(config, n, &mut splitter)?;
    Ok(TrialOutcome { n, slots, resolved: n, seed })
}

/// One CRI with its slot log. The slot total is checked against
/// [`simulate_cri`] with the same seed.
pub fn simulate_cri_trace(config: &ProtocolConfig, n: u64, seed: u64) -> Result<(TrialOutcome, Vec<SlotEvent>)> {
    let mut splitter = RandomSplitter(rng::trial_rng(seed));
    let (slots, events) = trace_slots(config, n, &mut splitter)?;
    let outcome = simulate_cri(config, n, seed)?;
    if outcome.slots != slots {
        return Err(Error::Consistency(format!(
            "trace has {slots} slots but the recursive law gives {}",
            outcome.slots
        )));
    }
    let resolved: u64 = events
        .iter()
        .map(|e| match e.kind {
            EventKind::Success(c) => c,
            EventKind::SkippedSicResolved(c) => c,
            _ => 0,
        })
        .sum();
    if resolved != n {
        return Err(Error::Consistency(format!("trace resolves {resolved} of {n} users")));
    }
    Ok((outcome, events))
}

#[derive(Clone, Copy)]
struct Moments {
    count: u64,
    sum: u128,
    sum_sq: u128,
    min: u64,
    max: u64,
}

impl Moments {
    const EMPTY: Moments = Moments { count: 0, sum: 0, sum_sq: 0, min: u64::MAX, max: 0 };

    fn one(x: u64) -> Self {
        Moments { count: 1, sum: x as u128, sum_sq: (x as u128) * (x as u128), min: x, max: x }
    }

    fn merge(self, o: Moments) -> Self {
        Moments {
            count: self.count + o.count,
            sum: self.sum + o.sum,
            sum_sq: self.sum_sq + o.sum_sq,
            min: self.min.min(o.min),
            max: self.max.max(o.max),
        }
    }
}

/// `trials` independent CRIs; trial `i` uses seed `mix(master_seed, i)`.
pub fn monte_carlo(config: &ProtocolConfig, n: u64, trials: u64, master_seed: u64) -> Result<MonteCarloStats> {
    monte_carlo_with(config, n, trials, master_seed, Execution::default())
}

pub fn monte_carlo_with(
    config: &ProtocolConfig,
    n: u64,
    trials: u64,
    master_seed: u64,
    exec: Execution,
) -> Result<MonteCarloStats> {
    config.validate()?;
    if trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    let len = usize::try_from(trials).map_err(|_| invalid("too many trials"))?;
    let m = exec.map_reduce(
        len,
        Ok(Moments::EMPTY),
        |i| simulate_cri(config, n, mix(master_seed, i as u64)).map(|o| Moments::one(o.slots)),
        |a, b| Ok(a?.merge(b?)),
    )?;
    // Exact integer moments, converted once.
    let t = m.count as f64;
    let mean = m.sum as f64 / t;
    let var = if m.count > 1 {
        let centered = m.sum_sq as f64 - (m.sum as f64) * mean;
        (centered / (t - 1.0)).max(0.0)
    } else {
        0.0
    };
    let std_dev = var.sqrt();
    Ok(MonteCarloStats {
        n,
        trials,
        mean_slots: mean,
        std_dev,
        ci95_half_width: 1.96 * std_dev / t.sqrt(),
        throughput: n as f64 / (config.k as f64 * mean),
        min_slots: m.min,
        max_slots: m.max,
    })
}

/// Binary-tree CRI lengths with and without SIC on one shared random tree.
pub fn coupled_sic_comparison(n: u64, k: u32, p: f64, seed: u64) -> Result<(u64, u64)> {
    check_k(k)?;
    check_p(p)?;
    let sic = ProtocolConfig::binary(k, p, true)?;
    let no_sic = ProtocolConfig::binary(k, p, false)?;
    let with = count_slots(&sic, n, &mut KeyedSplitter { seed })?;
    let without = count_slots(&no_sic, n, &mut KeyedSplitter { seed })?;
    Ok((with, without))
}
