use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Constellation selector for the transmitted symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modulation {
    Qpsk,
    Bpsk,
}

impl Modulation {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qpsk" => Ok(Modulation::Qpsk),
            "bpsk" => Ok(Modulation::Bpsk),
            other => Err(Error::InvalidConfig(format!(
                "unknown modulation `{other}` (expected qpsk or bpsk)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Modulation::Qpsk => "qpsk",
            Modulation::Bpsk => "bpsk",
        }
    }
}

/// Scenario parameters for one uplink frame ensemble.
///
/// `k` users share `n` subcarriers (`n < k`, the system is overloaded) for
/// `j` consecutive slots per frame. The number of active users per frame is
/// drawn uniformly from `sparsity_range` (inclusive). `beta` is the per-slot
/// channel drift coefficient; `beta = 0` keeps the channel fixed over the
/// frame. All randomness is derived from `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub k: usize,
    pub n: usize,
    pub j: usize,
    pub sparsity_range: (usize, usize),
    pub modulation: Modulation,
    pub snr_db: f64,
    pub beta: f64,
    pub seed: u64,
    /// Explicit noise variance per complex entry. When unset the variance is
    /// `10^(-snr_db/10)`, i.e. SNR is referenced to the unit per-user
    /// received energy enforced by the normalized spreading columns.
    #[serde(default)]
    pub sigma2_override: Option<f64>,
}

impl SystemConfig {
    /// The reference configuration used throughout: K=200 users, N=100
    /// subcarriers, J=7 slots, 18..=20 active users, QPSK.
    pub fn reference(snr_db: f64, seed: u64) -> Self {
        SystemConfig {
            k: 200,
            n: 100,
            j: 7,
            sparsity_range: (18, 20),
            modulation: Modulation::Qpsk,
            snr_db,
            beta: 0.0,
            seed,
            sigma2_override: None,
        }
    }

    /// Noise variance per complex entry.
    pub fn sigma2(&self) -> f64 {
        self.sigma2_override
            .unwrap_or_else(|| 10f64.powf(-self.snr_db / 10.0))
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.n == 0 {
            return Err(Error::InvalidConfig("k and n must be positive".into()));
        }
        if self.n >= self.k {
            return Err(Error::InvalidConfig(format!(
                "n ({}) must be smaller than k ({}): the system is non-orthogonal by construction",
                self.n, self.k
            )));
        }
        if self.j == 0 {
            return Err(Error::InvalidConfig("j must be at least 1".into()));
        }
        let (lo, hi) = self.sparsity_range;
        if lo > hi || hi > self.k {
            return Err(Error::InvalidConfig(format!(
                "sparsity_range ({lo}, {hi}) must satisfy lo <= hi <= k ({})",
                self.k
            )));
        }
        if !(0.0..1.0).contains(&self.beta) {
            return Err(Error::InvalidConfig(format!(
                "beta ({}) must lie in [0, 1)",
                self.beta
            )));
        }
        if let Some(s2) = self.sigma2_override {
            if !(s2 >= 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "sigma2_override ({s2}) must be non-negative"
                )));
            }
        }
        Ok(())
    }
}
