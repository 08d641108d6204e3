use super::PotentialModel;
use crate::error::Result;

/// Non-interacting particles, `U == 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct FreeGas;

impl PotentialModel for FreeGas {
    fn energy(&self, _positions: &[f64]) -> Result<f64> {
        Ok(0.0)
    }

    fn gradient(&self, _positions: &[f64], grad: &mut [f64]) -> Result<()> {
        grad.iter_mut().for_each(|g| *g = 0.0);
        Ok(())
    }

    fn insertion_delta(&self, _positions: &[f64], _x: &[f64]) -> Result<f64> {
        Ok(0.0)
    }

    fn removal_delta(&self, _positions: &[f64], _index: usize) -> Result<f64> {
        Ok(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn everything_vanishes() {
        assert_eq!(FreeGas.energy(&[]).unwrap(), 0.0);
        assert_eq!(FreeGas.energy(&[0.1, 2.0, 3.0, 9.9, 5.5]).unwrap(), 0.0);
        let mut g = vec![1.0; 5];
        FreeGas
            .gradient(&[0.1, 2.0, 3.0, 9.9, 5.5], &mut g)
            .unwrap();
        assert!(g.iter().all(|&x| x == 0.0));
    }
}
