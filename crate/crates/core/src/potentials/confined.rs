use super::PotentialModel;
use crate::error::{Error, Result};

/// Non-interacting particles in full space under `V(q) = |q|^2 / 2`.
#[derive(Debug, Clone, Copy)]
pub struct ConfinedGas {
    dim: usize,
}

impl ConfinedGas {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }

    fn v(x: &[f64]) -> f64 {
        0.5 * x.iter().map(|c| c * c).sum::<f64>()
    }
}

impl PotentialModel for ConfinedGas {
    fn energy(&self, q: &[f64]) -> Result<f64> {
        Ok(Self::v(q))
    }

    fn gradient(&self, q: &[f64], grad: &mut [f64]) -> Result<()> {
        grad.copy_from_slice(q);
        Ok(())
    }

    fn insertion_delta(&self, _q: &[f64], x: &[f64]) -> Result<f64> {
        Ok(Self::v(x))
    }

    fn removal_delta(&self, q: &[f64], index: usize) -> Result<f64> {
        let count = q.len() / self.dim;
        if index >= count {
            return Err(Error::IndexOutOfRange { index, count });
        }
        Ok(-Self::v(&q[index * self.dim..(index + 1) * self.dim]))
    }

    fn add_confining_gradient(&self, x: &[f64], out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(x) {
            *o += c;
        }
    }
}
