use std::f64::consts::PI;

use super::PotentialModel;
use crate::error::{Error, Result};

/// One-dimensional pair interaction `sum_{i<j} cos(2 pi (q_i - q_j) / L)`.
///
/// The kernel is smooth and bounded, so the whole interaction is batched
/// (`K1 = 0`). Distances are used raw; the cosine is already `L`-periodic.
#[derive(Debug, Clone, Copy)]
pub struct Cosine {
    wavenumber: f64,
}

impl Cosine {
    pub fn new(box_length: f64) -> Self {
        Self {
            wavenumber: 2.0 * PI / box_length,
        }
    }

    #[inline]
    fn pair(&self, a: f64, b: f64) -> f64 {
        (self.wavenumber * (a - b)).cos()
    }

    /// d/da of `cos(k (a - b))`.
    #[inline]
    fn pair_grad(&self, a: f64, b: f64) -> f64 {
        -self.wavenumber * (self.wavenumber * (a - b)).sin()
    }
}

impl PotentialModel for Cosine {
    fn energy(&self, q: &[f64]) -> Result<f64> {
        let mut u = 0.0;
        for i in 0..q.len() {
            for j in i + 1..q.len() {
                u += self.pair(q[i], q[j]);
            }
        }
        Ok(u)
    }

    fn gradient(&self, q: &[f64], grad: &mut [f64]) -> Result<()> {
        for (i, g) in grad.iter_mut().enumerate() {
            *g = q
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &qj)| self.pair_grad(q[i], qj))
                .sum();
        }
        Ok(())
    }

    fn insertion_delta(&self, q: &[f64], x: &[f64]) -> Result<f64> {
        Ok(q.iter().map(|&qj| self.pair(x[0], qj)).sum())
    }

    fn removal_delta(&self, q: &[f64], index: usize) -> Result<f64> {
        if index >= q.len() {
            return Err(Error::IndexOutOfRange {
                index,
                count: q.len(),
            });
        }
        Ok(-q
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != index)
            .map(|(_, &qj)| self.pair(q[index], qj))
            .sum::<f64>())
    }

    #[inline]
    fn add_smooth_kernel(&self, qi: &[f64], qj: &[f64], out: &mut [f64]) {
        out[0] += self.pair_grad(qi[0], qj[0]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::testing::fd_gradient;

    #[test]
    fn trivial_sizes() {
        let c = Cosine::new(10.0);
        assert_eq!(c.energy(&[]).unwrap(), 0.0);
        assert_eq!(c.energy(&[3.0]).unwrap(), 0.0);
        let mut g = [1.0];
        c.gradient(&[3.0], &mut g).unwrap();
        assert_eq!(g, [0.0]);
    }

    #[test]
    fn direct_evaluation() {
        let c = Cosine::new(10.0);
        assert!((c.energy(&[0.0, 5.0]).unwrap() + 1.0).abs() < 1e-15);
        let q = [0.0, 2.5];
        assert!(c.energy(&q).unwrap().abs() < 1e-15);
        let mut g = [0.0; 2];
        c.gradient(&q, &mut g).unwrap();
        assert!((g[0] - 0.628_318_530_717_958_6).abs() < 1e-12);
        assert!((g[1] + 0.628_318_530_717_958_6).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let c = Cosine::new(10.0);
        let q = [0.3, 1.7, 4.4, 8.1, 9.6];
        let mut g = [0.0; 5];
        c.gradient(&q, &mut g).unwrap();
        let fd = fd_gradient(&c, &q, 1e-5);
        for (a, b) in g.iter().zip(&fd) {
            assert!((a - b).abs() <= 1e-5 * a.abs().max(1e-3), "{a} vs {b}");
        }
    }

    #[test]
    fn deltas_match_full_energy() {
        let c = Cosine::new(10.0);
        let q = [0.3, 1.7, 4.4, 8.1];
        let full = c.energy(&q).unwrap();
        let mut grown = q.to_vec();
        grown.push(6.2);
        let ins = c.insertion_delta(&q, &[6.2]).unwrap();
        assert!((ins - (c.energy(&grown).unwrap() - full)).abs() < 1e-12);
        let rem = c.removal_delta(&q, 1).unwrap();
        assert!((rem - (c.energy(&[0.3, 4.4, 8.1]).unwrap() - full)).abs() < 1e-12);
        assert!(c.removal_delta(&q, 4).is_err());
    }
}
