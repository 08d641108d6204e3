//! Trans-dimensional DHMC integrator and outer sampling loop.
//!
//! One integrator step is, in order: half drift of `q`, half kick of `p`,
//! transport of the indicator `(n, p_n)` with jump resolution at every
//! integer it meets, half kick, half drift. Each sample refreshes all
//! momenta, draws the step size uniformly from `[dt_min, dt_max]`, runs a
//! fixed number of steps and keeps the end point without a Metropolis test.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jumps::{apply_jump, barrier, propose_delete, propose_insert, JumpDirection};
use crate::potentials::PotentialModel;
use crate::rbm::{rbm_grad, shuffle_batches, BatchPartition, RbmScaling};
use crate::rng::RngStream;
use crate::system::{
    extended_hamiltonian, laplace_kinetic, resample_momenta, sign, PhaseState, SystemParams,
};
use crate::trace::{ChainTrace, RecordPlan, TraceRecord};

/// Integer crossings resolved in one indicator move before giving up.
pub const MAX_CROSSINGS_PER_STEP: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt_min: f64,
    pub dt_max: f64,
    pub steps_per_proposal: usize,
    pub use_rbm: bool,
    pub batch_size: usize,
    pub rbm_scaling: RbmScaling,
    /// `false` freezes the indicator, giving fixed-N HMC.
    pub jumps: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt_min: 0.05,
            dt_max: 0.1,
            steps_per_proposal: 5,
            use_rbm: false,
            batch_size: 2,
            rbm_scaling: RbmScaling::Corrected,
            jumps: true,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt_max && self.dt_max.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "dt_min",
                reason: format!(
                    "need 0 < dt_min <= dt_max, got [{}, {}]",
                    self.dt_min, self.dt_max
                ),
            });
        }
        if self.steps_per_proposal == 0 {
            return Err(Error::InvalidParameter {
                name: "steps_per_proposal",
                reason: "must be >= 1".into(),
            });
        }
        if self.use_rbm && self.batch_size < 2 {
            return Err(Error::InvalidParameter {
                name: "p",
                reason: "must be >= 2".into(),
            });
        }
        Ok(())
    }
}

/// One resolved integer crossing of the indicator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpEvent {
    pub direction: JumpDirection,
    /// Free-energy barrier; `+inf` for a downward crossing at `n = 0`.
    pub barrier: f64,
    pub kinetic_before: f64,
    pub accepted: bool,
    /// Index of the inserted or deleted particle.
    pub particle_index: Option<usize>,
    pub p_n_before: f64,
    pub p_n_after: f64,
}

/// `q <- q + (dt/2) p / m`, then fold into the domain.
pub fn verlet_half_drift(state: &mut PhaseState, params: &SystemParams, dt: f64) {
    let h = 0.5 * dt / params.mass;
    for (q, p) in state.positions.iter_mut().zip(&state.momenta) {
        *q = params.fold(*q + h * p);
    }
}

/// `p <- p - (dt/2) grad`.
pub fn verlet_kick(state: &mut PhaseState, grad: &[f64], dt: f64) {
    let h = 0.5 * dt;
    for (p, g) in state.momenta.iter_mut().zip(grad) {
        *p -= h * g;
    }
}

/// Move the indicator by `travel` (in units of `n`) in the direction of
/// `p_n`, resolving every integer crossing in order.
///
/// At each crossing the barrier is compared with `K_n(p_n)`: on acceptance
/// the particle list changes and `|p_n|` drops by `m_n * dH`; otherwise
/// `p_n` flips and the remaining travel continues in the reversed direction.
/// Returns whether the particle count changed.
pub fn move_indicator<M: PotentialModel + ?Sized>(
    state: &mut PhaseState,
    model: &M,
    params: &SystemParams,
    travel: f64,
    rng: &mut RngStream,
    events: &mut Vec<JumpEvent>,
) -> Result<bool> {
    let mut remaining = travel;
    let mut changed = false;
    let mut crossings = 0;
    loop {
        let count = state.count();
        let up = sign(state.p_n) > 0.0;
        let lower = count as f64;
        let (crosses, boundary) = if up {
            let dist = lower + 1.0 - state.n;
            (remaining >= dist, lower + 1.0)
        } else {
            (remaining > state.n - lower, lower)
        };
        if !crosses {
            state.n += sign(state.p_n) * remaining;
            break;
        }
        crossings += 1;
        if crossings > MAX_CROSSINGS_PER_STEP {
            return Err(Error::TooManyCrossings {
                limit: MAX_CROSSINGS_PER_STEP,
            });
        }
        remaining -= (boundary - state.n).abs();
        state.n = boundary;

        let kinetic = laplace_kinetic(state.p_n, params.indicator_mass);
        let p_n_before = state.p_n;
        let (direction, proposal, dh) = if up {
            let prop = propose_insert(params, rng);
            let dh = barrier(state, &prop, model, params)?;
            (JumpDirection::Insert, Some(prop), dh)
        } else if count == 0 {
            (JumpDirection::Delete, None, f64::INFINITY)
        } else {
            let prop = propose_delete(state, params, rng)?;
            let dh = barrier(state, &prop, model, params)?;
            (JumpDirection::Delete, Some(prop), dh)
        };
        let accepted = kinetic >= dh;
        let particle_index = match &proposal {
            Some(crate::jumps::JumpProposal::Delete { index, .. }) => Some(*index),
            Some(_) => Some(count),
            None => None,
        };
        if accepted {
            let prop = proposal.expect("accepted jumps carry a proposal");
            apply_jump(state, &prop, true)?;
            state.p_n -= sign(state.p_n) * params.indicator_mass * dh;
            changed = true;
        } else {
            state.p_n = -state.p_n;
        }
        events.push(JumpEvent {
            direction,
            barrier: dh,
            kinetic_before: kinetic,
            accepted,
            particle_index,
            p_n_before,
            p_n_after: state.p_n,
        });
        if remaining <= 0.0 {
            // reflected exactly onto the upper integer: stay in the old interval
            if state.n.floor() as usize != state.count() {
                state.n = state.n.next_down();
            }
            break;
        }
    }
    Ok(changed)
}

/// Running jump statistics of a chain.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct JumpStats {
    pub attempts: u64,
    pub accepts: u64,
}

impl JumpStats {
    pub fn absorb(&mut self, events: &[JumpEvent]) {
        self.attempts += events.len() as u64;
        self.accepts += events.iter().filter(|e| e.accepted).count() as u64;
    }
}

/// DHMC sampler bound to one model.
pub struct Dhmc<'a, M: PotentialModel + ?Sized> {
    model: &'a M,
    params: &'a SystemParams,
    cfg: &'a IntegratorConfig,
    grad: Vec<f64>,
    events: Vec<JumpEvent>,
    pub stats: JumpStats,
}

impl<'a, M: PotentialModel + ?Sized> Dhmc<'a, M> {
    pub fn new(model: &'a M, params: &'a SystemParams, cfg: &'a IntegratorConfig) -> Result<Self> {
        params.validate()?;
        cfg.validate()?;
        Ok(Self {
            model,
            params,
            cfg,
            grad: Vec::new(),
            events: Vec::new(),
            stats: JumpStats::default(),
        })
    }

    fn partition(&self, count: usize, rng: &mut RngStream) -> Option<BatchPartition> {
        self.cfg
            .use_rbm
            .then(|| shuffle_batches(count, self.cfg.batch_size, rng).absorb_singleton())
    }

    fn update_gradient(
        &mut self,
        state: &PhaseState,
        partition: Option<&BatchPartition>,
    ) -> Result<()> {
        self.grad.resize(state.positions.len(), 0.0);
        match partition {
            Some(part) => rbm_grad(
                &state.positions,
                state.dim,
                self.model,
                part,
                self.cfg.rbm_scaling,
                &mut self.grad,
            ),
            None => self.model.gradient(&state.positions, &mut self.grad),
        }
    }

    /// One integrator step of size `dt`; jump events are appended to `events`.
    pub fn step_with_events(
        &mut self,
        state: &mut PhaseState,
        dt: f64,
        rng: &mut RngStream,
        events: &mut Vec<JumpEvent>,
    ) -> Result<()> {
        verlet_half_drift(state, self.params, dt);
        let partition = self.partition(state.count(), rng);
        self.update_gradient(state, partition.as_ref())?;
        verlet_kick(state, &self.grad, dt);
        if self.cfg.jumps {
            let travel = dt / self.params.indicator_mass;
            if move_indicator(state, self.model, self.params, travel, rng, events)? {
                let partition = self.partition(state.count(), rng);
                self.update_gradient(state, partition.as_ref())?;
            }
        }
        verlet_kick(state, &self.grad, dt);
        verlet_half_drift(state, self.params, dt);
        Ok(())
    }

    pub fn step(&mut self, state: &mut PhaseState, dt: f64, rng: &mut RngStream) -> Result<()> {
        let mut events = std::mem::take(&mut self.events);
        events.clear();
        let out = self.step_with_events(state, dt, rng, &mut events);
        self.stats.absorb(&events);
        self.events = events;
        out
    }

    /// One full proposal: momentum refresh, random step size, fixed step count.
    pub fn proposal(&mut self, state: &mut PhaseState, rng: &mut RngStream) -> Result<()> {
        resample_momenta(state, self.params, rng);
        let dt = rng.uniform_range(self.cfg.dt_min, self.cfg.dt_max);
        for _ in 0..self.cfg.steps_per_proposal {
            self.step(state, dt, rng)?;
        }
        Ok(())
    }

    /// Run `plan.n_samples` proposals, calling `observe` after each one with
    /// its 1-based iteration index.
    pub fn run(
        &mut self,
        state: &mut PhaseState,
        rng: &mut RngStream,
        iterations: u64,
        mut observe: impl FnMut(u64, &PhaseState, &JumpStats) -> Result<()>,
    ) -> Result<()> {
        state.check_indicator()?;
        for it in 1..=iterations {
            self.proposal(state, rng)?;
            observe(it, state, &self.stats)?;
        }
        Ok(())
    }

    /// Sample and record into `trace`; on error `trace` keeps the records made so far.
    pub fn sample_into(
        &mut self,
        state: &mut PhaseState,
        rng: &mut RngStream,
        plan: &RecordPlan,
        trace: &mut ChainTrace,
    ) -> Result<()> {
        self.sample_observed(state, rng, plan, trace, |_| {})
    }

    /// Like [`Dhmc::sample_into`], also passing the positions of every
    /// recorded state to `observe`.
    pub fn sample_observed(
        &mut self,
        state: &mut PhaseState,
        rng: &mut RngStream,
        plan: &RecordPlan,
        trace: &mut ChainTrace,
        mut observe: impl FnMut(&[f64]),
    ) -> Result<()> {
        let start = Instant::now();
        let (model, params) = (self.model, self.params);
        self.run(state, rng, plan.n_samples, |it, s, stats| {
            if plan.records(it) {
                observe(&s.positions);
                trace.records.push(TraceRecord {
                    iter: it,
                    count: s.count(),
                    energy: model.energy(&s.positions)?,
                    hamiltonian: Some(extended_hamiltonian(s, model, params)?),
                    pressure: model.pressure(&s.positions, params).transpose()?,
                    jump_attempts: stats.attempts,
                    jump_accepts: stats.accepts,
                    elapsed_s: plan.timing.then(|| start.elapsed().as_secs_f64()),
                });
            }
            Ok(())
        })
    }
}

/// Run a DHMC chain of `plan.n_samples` proposals and return its trace.
pub fn dhmc_sample<M: PotentialModel + ?Sized>(
    state: &mut PhaseState,
    model: &M,
    params: &SystemParams,
    cfg: &IntegratorConfig,
    rng: &mut RngStream,
    plan: &RecordPlan,
) -> Result<ChainTrace> {
    let mut trace = ChainTrace::default();
    Dhmc::new(model, params, cfg)?.sample_into(state, rng, plan, &mut trace)?;
    Ok(trace)
}
