//! Potential energy models.
//!
//! Every model exposes the total energy `U(q^N)` (confinement included), its
//! gradient, O(N) energy differences for single-particle insertion and
//! removal, and the kernel split `grad phi = K1 + K2` used by the random
//! batch estimator: `K1` is summed over all pairs, `K2` is batched.

mod confined;
mod cosine;
mod free_gas;
mod lennard_jones;

pub use confined::ConfinedGas;
pub use cosine::Cosine;
pub use free_gas::FreeGas;
pub use lennard_jones::{lj_phi, lj_phi1, lj_phi2, LennardJones, LJ_SPLIT_RADIUS};

use crate::error::Result;
use crate::system::SystemParams;

pub trait PotentialModel: Send + Sync {
    /// Total potential energy of the flat coordinate array.
    fn energy(&self, positions: &[f64]) -> Result<f64>;

    /// Exact gradient of [`PotentialModel::energy`]; overwrites `grad`.
    fn gradient(&self, positions: &[f64], grad: &mut [f64]) -> Result<()>;

    /// `U(q^{N+1}) - U(q^N)` when `x` is appended.
    fn insertion_delta(&self, positions: &[f64], x: &[f64]) -> Result<f64>;

    /// `U(q^{N-1}) - U(q^N)` when particle `index` is removed.
    fn removal_delta(&self, positions: &[f64], index: usize) -> Result<f64>;

    /// Adds `grad V(x)` to `out`.
    fn add_confining_gradient(&self, _x: &[f64], _out: &mut [f64]) {}

    /// Adds `sum_{j != i} K1(q_i - q_j)` to `grad` for every particle.
    fn add_singular_gradient(&self, _positions: &[f64], _grad: &mut [f64]) -> Result<()> {
        Ok(())
    }

    /// Adds `K2(q_i - q_j)` (the gradient with respect to `q_i`) to `out`.
    fn add_smooth_kernel(&self, _qi: &[f64], _qj: &[f64], _out: &mut [f64]) {}

    /// Virial pressure estimate, for models that define one.
    fn pressure(&self, _positions: &[f64], _params: &SystemParams) -> Option<Result<f64>> {
        None
    }
}

/// Closed set of built-in models.
#[derive(Debug, Clone)]
pub enum Model {
    FreeGas(FreeGas),
    Cosine(Cosine),
    LennardJones(LennardJones),
    Confined(ConfinedGas),
}

macro_rules! delegate {
    ($self:ident, $m:ident => $e:expr) => {
        match $self {
            Model::FreeGas($m) => $e,
            Model::Cosine($m) => $e,
            Model::LennardJones($m) => $e,
            Model::Confined($m) => $e,
        }
    };
}

impl PotentialModel for Model {
    fn energy(&self, positions: &[f64]) -> Result<f64> {
        delegate!(self, m => m.energy(positions))
    }
    fn gradient(&self, positions: &[f64], grad: &mut [f64]) -> Result<()> {
        delegate!(self, m => m.gradient(positions, grad))
    }
    fn insertion_delta(&self, positions: &[f64], x: &[f64]) -> Result<f64> {
        delegate!(self, m => m.insertion_delta(positions, x))
    }
    fn removal_delta(&self, positions: &[f64], index: usize) -> Result<f64> {
        delegate!(self, m => m.removal_delta(positions, index))
    }
    fn add_confining_gradient(&self, x: &[f64], out: &mut [f64]) {
        delegate!(self, m => m.add_confining_gradient(x, out))
    }
    fn add_singular_gradient(&self, positions: &[f64], grad: &mut [f64]) -> Result<()> {
        delegate!(self, m => m.add_singular_gradient(positions, grad))
    }
    #[inline]
    fn add_smooth_kernel(&self, qi: &[f64], qj: &[f64], out: &mut [f64]) {
        delegate!(self, m => m.add_smooth_kernel(qi, qj, out))
    }
    fn pressure(&self, positions: &[f64], params: &SystemParams) -> Option<Result<f64>> {
        delegate!(self, m => m.pressure(positions, params))
    }
}
