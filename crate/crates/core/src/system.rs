//! Physical parameters, the extended phase-space state and the extended
//! Hamiltonian of the grand canonical ensemble.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potentials::PotentialModel;
use crate::rng::RngStream;

/// Spatial domain of the particles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Periodic box `[0, L)^d`.
    Periodic,
    /// Full space with the harmonic confinement `V(q) = |q|^2 / 2`.
    Confined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub beta: f64,
    pub mu: f64,
    pub mass: f64,
    pub indicator_mass: f64,
    pub box_length: f64,
    pub dim: usize,
    pub boundary: Boundary,
}

impl SystemParams {
    pub fn periodic(beta: f64, mu: f64, box_length: f64, dim: usize) -> Result<Self> {
        let p = Self {
            beta,
            mu,
            mass: 1.0,
            indicator_mass: 1.0,
            box_length,
            dim,
            boundary: Boundary::Periodic,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn confined(beta: f64, mu: f64, dim: usize) -> Result<Self> {
        let p = Self {
            beta,
            mu,
            mass: 1.0,
            indicator_mass: 1.0,
            box_length: 1.0,
            dim,
            boundary: Boundary::Confined,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_masses(mut self, mass: f64, indicator_mass: f64) -> Result<Self> {
        self.mass = mass;
        self.indicator_mass = indicator_mass;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and > 0, got {v}"),
                })
            }
        }
        positive("beta", self.beta)?;
        positive("m", self.mass)?;
        positive("m_n", self.indicator_mass)?;
        positive("L", self.box_length)?;
        if !self.mu.is_finite() {
            return Err(Error::InvalidParameter {
                name: "mu",
                reason: "must be finite".into(),
            });
        }
        if self.dim == 0 {
            return Err(Error::InvalidParameter {
                name: "d",
                reason: "must be >= 1".into(),
            });
        }
        Ok(())
    }

    /// `L^d`; for the confined case this is the partition function of one
    /// confined particle, `Z_beta = (2 pi / beta)^{d/2}`.
    pub fn volume(&self) -> f64 {
        match self.boundary {
            Boundary::Periodic => self.box_length.powi(self.dim as i32),
            Boundary::Confined => {
                (2.0 * std::f64::consts::PI / self.beta).powf(self.dim as f64 / 2.0)
            }
        }
    }

    /// Modified chemical potential that absorbs the Gaussian momentum normalizer.
    pub fn modified_mu(&self) -> f64 {
        self.mu
            - self.dim as f64 / (2.0 * self.beta)
                * (2.0 * self.mass * std::f64::consts::PI / self.beta).ln()
    }

    /// Standard deviation of one momentum component, `sqrt(m / beta)`.
    pub fn momentum_scale(&self) -> f64 {
        (self.mass / self.beta).sqrt()
    }

    /// Confining potential `V(q)`; zero in a periodic box.
    pub fn confinement(&self, x: &[f64]) -> f64 {
        match self.boundary {
            Boundary::Periodic => 0.0,
            Boundary::Confined => 0.5 * x.iter().map(|c| c * c).sum::<f64>(),
        }
    }

    /// Log density of the position law used for inserted particles.
    pub fn log_insertion_density(&self, x: &[f64]) -> f64 {
        match self.boundary {
            Boundary::Periodic => {
                if x.iter().all(|&c| (0.0..self.box_length).contains(&c)) {
                    -self.volume().ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            Boundary::Confined => -self.beta * self.confinement(x) - self.volume().ln(),
        }
    }

    /// Draw a position from the insertion law: uniform on the box, or
    /// `exp(-beta V) / Z_beta` under confinement.
    pub fn sample_position(&self, rng: &mut RngStream) -> Vec<f64> {
        match self.boundary {
            Boundary::Periodic => (0..self.dim)
                .map(|_| rng.uniform() * self.box_length)
                .collect(),
            Boundary::Confined => {
                let s = 1.0 / self.beta.sqrt();
                (0..self.dim).map(|_| s * rng.gaussian()).collect()
            }
        }
    }

    /// Apply the boundary condition to a freshly drifted coordinate.
    #[inline]
    pub fn fold(&self, x: f64) -> f64 {
        match self.boundary {
            Boundary::Periodic => crate::geometry::wrap(x, self.box_length),
            Boundary::Confined => x,
        }
    }
}

/// Extended state `(q^N, p^N, n, p_n)` with flat coordinate storage of stride `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    pub dim: usize,
    pub positions: Vec<f64>,
    pub momenta: Vec<f64>,
    /// Continuous dimension indicator; `floor(n) == N`.
    pub n: f64,
    pub p_n: f64,
}

impl PhaseState {
    pub fn empty(dim: usize) -> Self {
        Self::from_positions(dim, Vec::new())
    }

    /// State at rest with the indicator in the middle of its unit interval.
    pub fn from_positions(dim: usize, positions: Vec<f64>) -> Self {
        assert_eq!(
            positions.len() % dim,
            0,
            "coordinate count not a multiple of dim"
        );
        let count = positions.len() / dim;
        Self {
            dim,
            momenta: vec![0.0; positions.len()],
            positions,
            n: count as f64 + 0.5,
            p_n: 0.0,
        }
    }

    #[inline]
    pub fn count(&self) -> usize {
        self.positions.len() / self.dim
    }

    #[inline]
    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn momentum(&self, i: usize) -> &[f64] {
        &self.momenta[i * self.dim..(i + 1) * self.dim]
    }

    pub fn check_indicator(&self) -> Result<()> {
        let count = self.count();
        if self.momenta.len() != self.positions.len()
            || !(self.n >= 0.0)
            || self.n.floor() as usize != count
        {
            return Err(Error::CountMismatch {
                count,
                indicator: self.n,
            });
        }
        Ok(())
    }

    pub fn push(&mut self, q: &[f64], p: &[f64]) {
        self.positions.extend_from_slice(q);
        self.momenta.extend_from_slice(p);
    }

    /// Remove particle `i`, keeping the order of the others.
    pub fn remove(&mut self, i: usize) -> Result<()> {
        let count = self.count();
        if i >= count {
            return Err(Error::IndexOutOfRange { index: i, count });
        }
        let d = self.dim;
        self.positions.drain(i * d..(i + 1) * d);
        self.momenta.drain(i * d..(i + 1) * d);
        Ok(())
    }
}

/// `sign` with `sign(0) = 1`.
#[inline]
pub fn sign(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Gaussian kinetic energy `|p|^2 / (2m)` of a flat momentum array.
pub fn kinetic_energy(momenta: &[f64], mass: f64) -> f64 {
    momenta.iter().map(|p| p * p).sum::<f64>() / (2.0 * mass)
}

/// Laplace kinetic energy `|p_n| / m_n` of the indicator.
#[inline]
pub fn laplace_kinetic(p_n: f64, indicator_mass: f64) -> f64 {
    p_n.abs() / indicator_mass
}

pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Refresh `p^N ~ N(0, m/beta)` componentwise and `p_n ~ Laplace(m_n / beta)`.
pub fn resample_momenta(state: &mut PhaseState, params: &SystemParams, rng: &mut RngStream) {
    let s = params.momentum_scale();
    for p in state.momenta.iter_mut() {
        *p = s * rng.gaussian();
    }
    state.p_n = rng.laplace(params.indicator_mass / params.beta);
}

/// Configurational part `U(q^N) + log(N!)/beta - mu~ N` of the extended Hamiltonian.
pub fn effective_potential(energy: f64, count: usize, params: &SystemParams) -> f64 {
    energy + ln_factorial(count) / params.beta - params.modified_mu() * count as f64
}

/// Extended Hamiltonian with additive constant 0.
pub fn extended_hamiltonian<M: PotentialModel + ?Sized>(
    state: &PhaseState,
    model: &M,
    params: &SystemParams,
) -> Result<f64> {
    state.check_indicator()?;
    let u = model.energy(&state.positions)?;
    Ok(effective_potential(u, state.count(), params)
        + kinetic_energy(&state.momenta, params.mass)
        + laplace_kinetic(state.p_n, params.indicator_mass))
}
