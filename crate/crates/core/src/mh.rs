//! Grand canonical Metropolis-Hastings baseline.
//!
//! Each step picks insertion, deletion or displacement at random. Inserted
//! and displaced particles are drawn from the insertion law of the boundary,
//! so acceptance ratios carry the same `g(x)` factors as the DHMC barriers.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potentials::PotentialModel;
use crate::rng::RngStream;
use crate::system::SystemParams;
use crate::trace::{ChainTrace, RecordPlan, TraceRecord};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MhConfig {
    pub insert_prob: f64,
    pub delete_prob: f64,
    /// Fraction of particles redrawn by a displacement move, rounded down.
    pub displace_fraction: f64,
}

impl Default for MhConfig {
    fn default() -> Self {
        Self {
            insert_prob: 0.4,
            delete_prob: 0.4,
            displace_fraction: 0.2,
        }
    }
}

impl MhConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.insert_prob >= 0.0
            && self.delete_prob >= 0.0
            && self.insert_prob + self.delete_prob <= 1.0
            && (0.0..=1.0).contains(&self.displace_fraction);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter {
                name: "insert_prob",
                reason: format!("bad move mix {self:?}"),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveKind {
    Insert,
    Delete,
    Displace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MhOutcome {
    pub kind: MoveKind,
    pub accepted: bool,
}

/// `min{1, e^{beta mu} e^{-beta dU} / ((N + 1) g(x))}` for inserting at `x` into `N` particles.
pub fn insert_acceptance(delta_u: f64, count: usize, log_g: f64, params: &SystemParams) -> f64 {
    let log_a = params.beta * (params.mu - delta_u) - ((count + 1) as f64).ln() - log_g;
    log_a.min(0.0).exp()
}

/// `min{1, N g(x) e^{-beta mu} e^{-beta dU}}` for deleting a particle at `x` from `N`.
pub fn delete_acceptance(delta_u: f64, count: usize, log_g: f64, params: &SystemParams) -> f64 {
    let log_a = (count as f64).ln() + log_g - params.beta * (params.mu + delta_u);
    log_a.min(0.0).exp()
}

/// `min{1, e^{-beta dU} prod g(old) / g(new)}`; `log_g_ratio` is `sum log g(old) - log g(new)`.
pub fn displace_acceptance(delta_u: f64, log_g_ratio: f64, params: &SystemParams) -> f64 {
    (log_g_ratio - params.beta * delta_u).min(0.0).exp()
}

/// Metropolis-Hastings chain over flat position arrays.
pub struct Mh<'a, M: PotentialModel + ?Sized> {
    model: &'a M,
    params: &'a SystemParams,
    cfg: MhConfig,
    scratch: Vec<f64>,
    pub jump_attempts: u64,
    pub jump_accepts: u64,
}

impl<'a, M: PotentialModel + ?Sized> Mh<'a, M> {
    pub fn new(model: &'a M, params: &'a SystemParams, cfg: MhConfig) -> Result<Self> {
        params.validate()?;
        cfg.validate()?;
        Ok(Self {
            model,
            params,
            cfg,
            scratch: Vec::new(),
            jump_attempts: 0,
            jump_accepts: 0,
        })
    }

    pub fn step(&mut self, positions: &mut Vec<f64>, rng: &mut RngStream) -> Result<MhOutcome> {
        let u = rng.uniform();
        let kind = if u < self.cfg.insert_prob {
            MoveKind::Insert
        } else if u < self.cfg.insert_prob + self.cfg.delete_prob {
            MoveKind::Delete
        } else {
            MoveKind::Displace
        };
        let accepted = match kind {
            MoveKind::Insert => self.insert(positions, rng)?,
            MoveKind::Delete => self.delete(positions, rng)?,
            MoveKind::Displace => self.displace(positions, rng)?,
        };
        if kind != MoveKind::Displace {
            self.jump_attempts += 1;
            self.jump_accepts += accepted as u64;
        }
        Ok(MhOutcome { kind, accepted })
    }

    fn insert(&mut self, positions: &mut Vec<f64>, rng: &mut RngStream) -> Result<bool> {
        let p = self.params;
        let count = positions.len() / p.dim;
        let x = p.sample_position(rng);
        let du = self.model.insertion_delta(positions, &x)?;
        let a = insert_acceptance(du, count, p.log_insertion_density(&x), p);
        let accept = rng.uniform() < a;
        if accept {
            positions.extend_from_slice(&x);
        }
        Ok(accept)
    }

    fn delete(&mut self, positions: &mut Vec<f64>, rng: &mut RngStream) -> Result<bool> {
        let p = self.params;
        let dim = p.dim;
        let count = positions.len() / dim;
        if count == 0 {
            return Ok(false);
        }
        let i = rng.index(count);
        let du = self.model.removal_delta(positions, i)?;
        let a = delete_acceptance(
            du,
            count,
            p.log_insertion_density(&positions[i * dim..(i + 1) * dim]),
            p,
        );
        let accept = rng.uniform() < a;
        if accept {
            positions.drain(i * dim..(i + 1) * dim);
        }
        Ok(accept)
    }

    fn displace(&mut self, positions: &mut Vec<f64>, rng: &mut RngStream) -> Result<bool> {
        let p = self.params;
        let dim = p.dim;
        let count = positions.len() / dim;
        let k = (self.cfg.displace_fraction * count as f64).floor() as usize;
        if k == 0 {
            return Ok(true);
        }
        let chosen = rng.choose_distinct(count, k);
        self.scratch.clear();
        self.scratch.extend_from_slice(positions);
        let mut log_g_ratio = 0.0;
        for &i in &chosen {
            let x = p.sample_position(rng);
            let slot = &mut self.scratch[i * dim..(i + 1) * dim];
            log_g_ratio += p.log_insertion_density(slot) - p.log_insertion_density(&x);
            slot.copy_from_slice(&x);
        }
        let du = self.model.energy(&self.scratch)? - self.model.energy(positions)?;
        let a = displace_acceptance(du, log_g_ratio, p);
        let accept = rng.uniform() < a;
        if accept {
            std::mem::swap(positions, &mut self.scratch);
        }
        Ok(accept)
    }

    /// Sample and record into `trace`; on error `trace` keeps the records made so far.
    pub fn sample_into(
        &mut self,
        positions: &mut Vec<f64>,
        rng: &mut RngStream,
        plan: &RecordPlan,
        trace: &mut ChainTrace,
    ) -> Result<()> {
        self.sample_observed(positions, rng, plan, trace, |_| {})
    }

    /// Like [`Mh::sample_into`], also passing every recorded configuration to `observe`.
    pub fn sample_observed(
        &mut self,
        positions: &mut Vec<f64>,
        rng: &mut RngStream,
        plan: &RecordPlan,
        trace: &mut ChainTrace,
        mut observe: impl FnMut(&[f64]),
    ) -> Result<()> {
        let start = Instant::now();
        for it in 1..=plan.n_samples {
            self.step(positions, rng)?;
            if plan.records(it) {
                observe(positions);
                trace.records.push(TraceRecord {
                    iter: it,
                    count: positions.len() / self.params.dim,
                    energy: self.model.energy(positions)?,
                    hamiltonian: None,
                    pressure: self.model.pressure(positions, self.params).transpose()?,
                    jump_attempts: self.jump_attempts,
                    jump_accepts: self.jump_accepts,
                    elapsed_s: plan.timing.then(|| start.elapsed().as_secs_f64()),
                });
            }
        }
        Ok(())
    }
}

/// Run a Metropolis-Hastings chain of `plan.n_samples` steps and return its trace.
pub fn mh_sample<M: PotentialModel + ?Sized>(
    positions: &mut Vec<f64>,
    model: &M,
    params: &SystemParams,
    cfg: MhConfig,
    rng: &mut RngStream,
    plan: &RecordPlan,
) -> Result<ChainTrace> {
    let mut trace = ChainTrace::default();
    Mh::new(model, params, cfg)?.sample_into(positions, rng, plan, &mut trace)?;
    Ok(trace)
}
