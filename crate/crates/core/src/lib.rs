//! Tree random-access algorithms over the K-collision channel, with and
//! without successive interference cancellation (SIC).
//!
//! * [`cri`]: exact expected CRI length `L_n` and throughput `T_n`.
//! * [`asymptotics`]: the log-periodic asymptotic form of `L_n`, `T_n`.
//! * [`bounds`]: linear upper/lower bounds on `L_n` anchored at the first `m` values.
//! * [`arrivals`]: stability bounds for gated and windowed access under Poisson arrivals.
//! * [`sim`]: slot-exact Monte Carlo simulation of binary and d-ary trees.
//!
//! Parallel loops run on rayon when the `parallel` feature is enabled (the
//! default) and fall back to sequential iteration otherwise; see [`exec`].

pub mod arrivals;
pub mod asymptotics;
pub mod bounds;
pub mod config;
pub mod cri;
pub mod error;
pub mod exec;
pub mod numerics;
pub mod sim;

pub use config::ProtocolConfig;
pub use error::{Error, Result};
pub use exec::Execution;
