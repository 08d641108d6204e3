//! Grand canonical sampling of particle systems with discontinuous
//! Hamiltonian Monte Carlo.
//!
//! The particle number is carried by a continuous indicator `n` with a
//! Laplace momentum; each time the indicator crosses an integer the sampler
//! proposes inserting or deleting a particle and either pays the free-energy
//! barrier out of the indicator's kinetic energy or bounces back. A
//! Metropolis-Hastings sampler with the same target is included as a
//! baseline, together with the diagnostics used to compare the two.

pub mod config;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod jumps;
pub mod mh;
pub mod output;
pub mod potentials;
pub mod rbm;
pub mod rng;
pub mod system;
pub mod trace;

pub use dynamics::{dhmc_sample, Dhmc, IntegratorConfig, JumpEvent};
pub use error::{Error, Result};
pub use mh::{mh_sample, MhConfig};
pub use potentials::{Model, PotentialModel};
pub use rng::RngStream;
pub use system::{Boundary, PhaseState, SystemParams};
pub use trace::{ChainTrace, RecordPlan, TraceRecord};
