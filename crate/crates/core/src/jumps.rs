//! Grand canonical insertion and deletion proposals and their free-energy
//! barriers.
//!
//! An inserted particle is drawn from the insertion law of the boundary
//! (uniform in the box, or `exp(-beta V) / Z_beta` in full space) with a
//! Maxwell momentum, and appended to the particle list. Deletion removes a
//! uniformly chosen particle. The Gaussian momentum density cancels against
//! the kinetic energy of the new particle, so barriers depend on positions only.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potentials::PotentialModel;
use crate::rng::RngStream;
use crate::system::{PhaseState, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpDirection {
    Insert,
    Delete,
}

#[derive(Debug, Clone, PartialEq)]
pub enum JumpProposal {
    Insert {
        position: Vec<f64>,
        momentum: Vec<f64>,
        /// `log pi_{N,N+1}(q_new, p_new)`.
        log_density: f64,
    },
    Delete {
        index: usize,
        /// Density the reverse insertion would assign to the removed particle.
        log_density: f64,
    },
}

impl JumpProposal {
    pub fn direction(&self) -> JumpDirection {
        match self {
            JumpProposal::Insert { .. } => JumpDirection::Insert,
            JumpProposal::Delete { .. } => JumpDirection::Delete,
        }
    }

    pub fn log_density(&self) -> f64 {
        match *self {
            JumpProposal::Insert { log_density, .. } | JumpProposal::Delete { log_density, .. } => {
                log_density
            }
        }
    }
}

/// Log density of a Maxwell momentum `N(0, (m / beta) I_d)`.
pub fn log_momentum_density(p: &[f64], params: &SystemParams) -> f64 {
    let var = params.mass / params.beta;
    -p.iter().map(|x| x * x).sum::<f64>() / (2.0 * var)
        - 0.5 * p.len() as f64 * (2.0 * std::f64::consts::PI * var).ln()
}

pub fn propose_insert(params: &SystemParams, rng: &mut RngStream) -> JumpProposal {
    let position = params.sample_position(rng);
    let s = params.momentum_scale();
    let momentum: Vec<f64> = (0..params.dim).map(|_| s * rng.gaussian()).collect();
    let log_density =
        params.log_insertion_density(&position) + log_momentum_density(&momentum, params);
    JumpProposal::Insert {
        position,
        momentum,
        log_density,
    }
}

pub fn propose_delete(
    state: &PhaseState,
    params: &SystemParams,
    rng: &mut RngStream,
) -> Result<JumpProposal> {
    let count = state.count();
    if count == 0 {
        return Err(Error::IndexOutOfRange { index: 0, count });
    }
    let index = rng.index(count);
    let log_density = params.log_insertion_density(state.position(index))
        + log_momentum_density(state.momentum(index), params);
    Ok(JumpProposal::Delete { index, log_density })
}

fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteEnergy(format!(
            "{what} barrier evaluated to {v}"
        )))
    }
}

/// `dH = U(q^{N+1}) - U(q^N) + log(N+1)/beta - log(V)/beta - mu` in a box;
/// under confinement `log V` becomes `log Z_beta + beta V(q_new)`.
pub fn barrier_insert<M: PotentialModel + ?Sized>(
    state: &PhaseState,
    position: &[f64],
    model: &M,
    params: &SystemParams,
) -> Result<f64> {
    let du = model.insertion_delta(&state.positions, position)?;
    let count = state.count();
    finite(
        du - params.mu
            + (((count + 1) as f64).ln() + params.log_insertion_density(position)) / params.beta,
        "insertion",
    )
}

/// `dH = U(q^{N-1}) - U(q^N) - log(N)/beta + log(V)/beta + mu` (and the
/// confined analogue).
pub fn barrier_delete<M: PotentialModel + ?Sized>(
    state: &PhaseState,
    index: usize,
    model: &M,
    params: &SystemParams,
) -> Result<f64> {
    let count = state.count();
    if index >= count {
        return Err(Error::IndexOutOfRange { index, count });
    }
    let du = model.removal_delta(&state.positions, index)?;
    finite(
        du + params.mu
            - ((count as f64).ln() + params.log_insertion_density(state.position(index)))
                / params.beta,
        "deletion",
    )
}

/// Barrier of either kind of proposal.
pub fn barrier<M: PotentialModel + ?Sized>(
    state: &PhaseState,
    proposal: &JumpProposal,
    model: &M,
    params: &SystemParams,
) -> Result<f64> {
    match proposal {
        JumpProposal::Insert { position, .. } => barrier_insert(state, position, model, params),
        JumpProposal::Delete { index, .. } => barrier_delete(state, *index, model, params),
    }
}

/// Mutate the particle lists for an accepted proposal; a rejected one is a no-op.
pub fn apply_jump(state: &mut PhaseState, proposal: &JumpProposal, accepted: bool) -> Result<()> {
    if !accepted {
        return Ok(());
    }
    match proposal {
        JumpProposal::Insert {
            position, momentum, ..
        } => {
            state.push(position, momentum);
            Ok(())
        }
        JumpProposal::Delete { index, .. } => state.remove(*index),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{ConfinedGas, Cosine, FreeGas};
    use crate::system::{extended_hamiltonian, laplace_kinetic};

    fn free_params() -> SystemParams {
        SystemParams::periodic(1.0, -0.5, 10.0, 1).unwrap()
    }

    #[test]
    fn free_gas_barriers() {
        let p = free_params();
        let empty = PhaseState::empty(1);
        let up = barrier_insert(&empty, &[3.0], &FreeGas, &p).unwrap();
        assert!((up + 1.802_585_092_994_045_7).abs() < 1e-12, "{up}");
        let one = PhaseState::from_positions(1, vec![3.0]);
        let down = barrier_delete(&one, 0, &FreeGas, &p).unwrap();
        assert!((down - 1.802_585_092_994_045_7).abs() < 1e-12);
        // position independent closed form
        let five = PhaseState::from_positions(1, vec![0.1, 2.0, 4.0, 6.0, 9.0]);
        for x in [0.0, 3.3, 9.99] {
            let b = barrier_insert(&five, &[x], &FreeGas, &p).unwrap();
            assert!((b - ((6.0f64 / 10.0).ln() + 0.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn cosine_barriers() {
        let p = free_params();
        let c = Cosine::new(10.0);
        let one = PhaseState::from_positions(1, vec![0.0]);
        let up = barrier_insert(&one, &[5.0], &c, &p).unwrap();
        assert!((up + 2.109_437_912_434_100_3).abs() < 1e-12, "{up}");
        let two = PhaseState::from_positions(1, vec![0.0, 5.0]);
        let down = barrier_delete(&two, 1, &c, &p).unwrap();
        assert!((down - 2.109_437_912_434_100_3).abs() < 1e-12, "{down}");
    }

    #[test]
    fn delete_negates_insert() {
        let p = free_params();
        let c = Cosine::new(10.0);
        let base = PhaseState::from_positions(1, vec![0.7, 3.1, 8.8]);
        let up = barrier_insert(&base, &[6.4], &c, &p).unwrap();
        let grown = PhaseState::from_positions(1, vec![0.7, 3.1, 8.8, 6.4]);
        let down = barrier_delete(&grown, 3, &c, &p).unwrap();
        assert!((up + down).abs() < 1e-12);
    }

    #[test]
    fn barrier_equals_hamiltonian_jump_plus_density_correction() {
        // dH = H(after) - H(before) + log(pi_{N,N+1}) / beta, with p_n held fixed
        let p = SystemParams::periodic(1.3, 0.2, 10.0, 1)
            .unwrap()
            .with_masses(0.8, 1.0)
            .unwrap();
        let c = Cosine::new(10.0);
        let mut rng = RngStream::new(12);
        let mut s = PhaseState::from_positions(1, vec![1.0, 2.5, 7.0]);
        s.momenta = vec![0.3, -0.2, 1.1];
        s.p_n = 0.4;
        for _ in 0..20 {
            let prop = propose_insert(&p, &mut rng);
            let mut after = s.clone();
            apply_jump(&mut after, &prop, true).unwrap();
            after.n = s.n + 1.0;
            let direct = extended_hamiltonian(&after, &c, &p).unwrap()
                - extended_hamiltonian(&s, &c, &p).unwrap()
                + prop.log_density() / p.beta;
            let b = barrier(&s, &prop, &c, &p).unwrap();
            assert!((direct - b).abs() < 1e-12, "{direct} vs {b}");
            assert_eq!(laplace_kinetic(after.p_n, 1.0), laplace_kinetic(s.p_n, 1.0));
        }
    }

    #[test]
    fn insertion_density_is_even_in_momentum() {
        let p = free_params();
        let a = log_momentum_density(&[0.7, -1.2, 0.1], &p);
        let b = log_momentum_density(&[-0.7, 1.2, -0.1], &p);
        assert_eq!(a, b);
    }

    #[test]
    fn confined_barrier() {
        let p = SystemParams::confined(2.0, 0.1, 2).unwrap();
        let m = ConfinedGas::new(2);
        let s = PhaseState::from_positions(2, vec![0.5, 0.5]);
        let x = [0.3, -0.4];
        let b = barrier_insert(&s, &x, &m, &p).unwrap();
        let z = std::f64::consts::PI; // (2 pi / beta)^{d/2} with beta = 2, d = 2
        let v = 0.5 * (0.09 + 0.16);
        let expected = v + (2.0f64).ln() / 2.0 - z.ln() / 2.0 - v - 0.1;
        assert!((b - expected).abs() < 1e-12);
        let d = barrier_delete(&s, 0, &m, &p).unwrap();
        let expected = -0.25 - 0.0 + z.ln() / 2.0 + 0.25 + 0.1;
        assert!((d - expected).abs() < 1e-12);
    }

    #[test]
    fn apply_jump_list_semantics() {
        let mut s = PhaseState::empty(1);
        let ins = JumpProposal::Insert {
            position: vec![2.0],
            momentum: vec![-0.5],
            log_density: 0.0,
        };
        apply_jump(&mut s, &ins, true).unwrap();
        assert_eq!(
            (s.positions.clone(), s.momenta.clone()),
            (vec![2.0], vec![-0.5])
        );

        let mut s = PhaseState::from_positions(1, vec![1.0, 2.0, 3.0]);
        let del = JumpProposal::Delete {
            index: 1,
            log_density: 0.0,
        };
        let before = s.clone();
        apply_jump(&mut s, &del, false).unwrap();
        assert_eq!(s, before);
        apply_jump(&mut s, &del, true).unwrap();
        assert_eq!(s.positions, vec![1.0, 3.0]);
        let bad = JumpProposal::Delete {
            index: 5,
            log_density: 0.0,
        };
        assert!(apply_jump(&mut s, &bad, true).is_err());
    }

    #[test]
    fn propose_delete_requires_particles() {
        let mut rng = RngStream::new(0);
        assert!(propose_delete(&PhaseState::empty(1), &free_params(), &mut rng).is_err());
        let one = PhaseState::from_positions(1, vec![4.0]);
        for _ in 0..10 {
            assert!(matches!(
                propose_delete(&one, &free_params(), &mut rng).unwrap(),
                JumpProposal::Delete { index: 0, .. }
            ));
        }
    }
}
