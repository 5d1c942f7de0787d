use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Channel and splitting parameters of a tree algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    /// MPR capability: a slot with at most `k` packets decodes all of them.
    #[serde(rename = "K")]
    pub k: u32,
    /// Probability of joining each of the `d` groups after a collision.
    pub split_probs: Vec<f64>,
    pub sic: bool,
}

impl ProtocolConfig {
    pub fn new(k: u32, split_probs: Vec<f64>, sic: bool) -> Result<Self> {
        let config = ProtocolConfig { k, split_probs, sic };
        config.validate()?;
        Ok(config)
    }

    /// Binary splitting where group 0 is joined with probability `p`.
    pub fn binary(k: u32, p: f64, sic: bool) -> Result<Self> {
        Self::new(k, vec![p, 1.0 - p], sic)
    }

    /// Fair d-ary splitting.
    pub fn fair(k: u32, d: usize, sic: bool) -> Result<Self> {
        if d < 2 {
            return Err(invalid(format!("splitting factor d = {d} must be at least 2")));
        }
        Self::new(k, vec![1.0 / d as f64; d], sic)
    }

    pub fn d(&self) -> usize {
        self.split_probs.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(invalid("K must be at least 1"));
        }
        if self.split_probs.len() < 2 {
            return Err(invalid("splitting factor d must be at least 2"));
        }
        if let Some(p) = self.split_probs.iter().find(|p| !(p.is_finite() && **p > 0.0 && **p < 1.0)) {
            return Err(invalid(format!("split probability {p} outside (0, 1)")));
        }
        let total: f64 = self.split_probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("split probabilities sum to {total}, not 1")));
        }
        Ok(())
    }
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if p.is_finite() && p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("split probability p = {p} must lie in (0, 1)")))
    }
}

pub(crate) fn check_k(k: u32) -> Result<()> {
    if k == 0 {
        Err(invalid("K must be at least 1"))
    } else {
        Ok(())
    }
}
