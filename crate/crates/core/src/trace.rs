//! Per-iteration chain records shared by both samplers.

use serde::{Deserialize, Serialize};

/// Which iterations of a chain are kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordPlan {
    pub n_samples: u64,
    pub burn_in: u64,
    pub record_every: u64,
    /// Fill `elapsed_s`; off by default so traces are reproducible byte for byte.
    pub timing: bool,
}

impl RecordPlan {
    pub fn every(n_samples: u64, burn_in: u64, record_every: u64) -> Self {
        Self {
            n_samples,
            burn_in,
            record_every: record_every.max(1),
            timing: false,
        }
    }

    /// Iterations are 1-based; the first kept one is `burn_in + record_every`.
    pub fn records(&self, iter: u64) -> bool {
        iter > self.burn_in && (iter - self.burn_in).is_multiple_of(self.record_every)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iter: u64,
    #[serde(rename = "N")]
    pub count: usize,
    #[serde(rename = "U")]
    pub energy: f64,
    #[serde(rename = "H")]
    pub hamiltonian: Option<f64>,
    pub pressure: Option<f64>,
    pub jump_attempts: u64,
    pub jump_accepts: u64,
    pub elapsed_s: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ChainTrace {
    pub records: Vec<TraceRecord>,
}

impl ChainTrace {
    pub fn counts(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.count).collect()
    }

    pub fn pressures(&self) -> Vec<f64> {
        self.records.iter().filter_map(|r| r.pressure).collect()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.energy).collect()
    }

    /// Accepted over attempted jumps at the final record.
    pub fn acceptance_rate(&self) -> Option<f64> {
        let last = self.records.last()?;
        (last.jump_attempts > 0).then(|| last.jump_accepts as f64 / last.jump_attempts as f64)
    }
}
