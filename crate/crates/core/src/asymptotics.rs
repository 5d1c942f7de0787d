//! Large-`n` behaviour of `L_n` and `T_n` under fair splitting.
//!
//! The residues of the Mellin-transformed harmonic sum at
//! `s = -1 + 2 pi j m / ln 2` produce a log-periodic oscillation around the
//! mean `n / (K ln 2)`. Its amplitude is `2K |B(K, 1)|` where
//! `B(K, m) = Gamma(-1 + 2 pi j m / ln 2) A(K, m)`. Residues with `|m| >= 2`
//! are suppressed by the exponential decay of the gamma function and are only
//! summed in the diagnostic [`asymptotic_cri_multi`].

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::check_k;
use crate::error::{invalid, Result};
use crate::numerics::{complex_gamma, ComplexValue};

/// Imaginary part of the m-th pole, `2 pi m / ln 2`.
pub fn pole_frequency(m: i64) -> f64 {
    2.0 * PI * m as f64 / LN_2
}

/// `A(K, m) = 1 + sum_{k=1}^{K} prod_{i=0}^{k-1} (i - 1 + j w_m) / k!`.
pub fn mellin_a(k: u32, m: i64) -> ComplexValue {
    let w = Complex64::new(0.0, pole_frequency(m));
    let mut acc = Complex64::new(1.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    for kk in 1..=k {
        term *= (w + (kk as f64 - 2.0)) / kk as f64;
        acc += term;
    }
    acc
}

/// `B(K, m) = Gamma(-1 + j w_m) A(K, m)`, `m >= 1`.
pub fn mellin_b(k: u32, m: i64) -> Result<ComplexValue> {
    check_k(k)?;
    if m < 1 {
        return Err(invalid(format!("B(K, m) needs m >= 1, got {m}")));
    }
    let g = complex_gamma(Complex64::new(-1.0, pole_frequency(m)))?;
    Ok(g * mellin_a(k, m))
}

/// Amplitude and phase of the dominant oscillation for a given `K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticModel {
    #[serde(rename = "K")]
    pub k: u32,
    pub b_k1: (f64, f64),
    /// `2K |B(K, 1)|`, dimensionless.
    pub amplitude: f64,
    /// `arg B(K, 1)`, radians.
    pub phase: f64,
    /// `1 / (K ln 2)`, slots per user.
    pub mean_coefficient: f64,
}

impl AsymptoticModel {
    pub fn new(k: u32) -> Result<Self> {
        let b = mellin_b(k, 1)?;
        Ok(AsymptoticModel {
            k,
            b_k1: (b.re, b.im),
            amplitude: 2.0 * k as f64 * b.norm(),
            phase: b.arg(),
            mean_coefficient: 1.0 / (k as f64 * LN_2),
        })
    }

    pub fn b(&self) -> ComplexValue {
        Complex64::new(self.b_k1.0, self.b_k1.1)
    }

    /// `1 - 2K|B| cos(2 pi log2 n + arg B)`.
    pub fn modulation(&self, n: f64) -> f64 {
        1.0 - self.amplitude * (2.0 * PI * n.log2() + self.phase).cos()
    }

    pub fn cri(&self, n: f64) -> f64 {
        n * self.mean_coefficient * self.modulation(n)
    }

    pub fn throughput(&self, n: f64) -> f64 {
        LN_2 / self.modulation(n)
    }

    /// Asymptotic `(L*_n, T*_n)` without SIC.
    pub fn no_sic(&self, n: f64) -> (f64, f64) {
        (2.0 * self.cri(n), LN_2 / (2.0 * self.modulation(n)))
    }

    /// Extremes of the asymptotic throughput, `ln 2 / (1 +- amplitude)`.
    pub fn throughput_range(&self) -> (f64, f64) {
        (LN_2 / (1.0 + self.amplitude), LN_2 / (1.0 - self.amplitude))
    }
}

pub fn oscillation_amplitude(k: u32) -> Result<f64> {
    Ok(AsymptoticModel::new(k)?.amplitude)
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        Err(invalid("asymptotic expressions need n >= 1"))
    } else {
        Ok(())
    }
}

/// Asymptotic `L_n` keeping the first residue pair.
pub fn asymptotic_cri(n: u64, k: u32) -> Result<f64> {
    check_n(n)?;
    Ok(AsymptoticModel::new(k)?.cri(n as f64))
}

/// Asymptotic `T_n` keeping the first residue pair.
pub fn asymptotic_throughput(n: u64, k: u32) -> Result<f64> {
    check_n(n)?;
    Ok(AsymptoticModel::new(k)?.throughput(n as f64))
}

/// Asymptotic `(L*_n, T*_n)` without SIC.
pub fn asymptotic_no_sic(n: u64, k: u32) -> Result<(f64, f64)> {
    check_n(n)?;
    Ok(AsymptoticModel::new(k)?.no_sic(n as f64))
}

/// Diagnostic: asymptotic `L_n` summing residue pairs `m = 1..=residues`.
pub fn asymptotic_cri_multi(n: u64, k: u32, residues: u32) -> Result<f64> {
    check_n(n)?;
    check_k(k)?;
    let nf = n as f64;
    let mut modulation = 1.0;
    for m in 1..=residues as i64 {
        let b = mellin_b(k, m)?;
        let amp = 2.0 * k as f64 * b.norm();
        modulation -= amp * (2.0 * PI * m as f64 * nf.log2() + b.arg()).cos();
    }
    Ok(nf / (k as f64 * LN_2) * modulation)
}
