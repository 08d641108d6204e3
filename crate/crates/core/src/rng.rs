//! Seeded random stream shared by every sampler.
//!
//! Draws are produced by ChaCha8, which is portable across platforms, so a
//! fixed seed plus a fixed call sequence yields bit-identical chains.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream derived from this stream's seed, e.g. one per chain.
    pub fn derive(&self, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(stream + 1);
        Self {
            seed: self.seed,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform on `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }

    /// Uniform on `[lo, hi]`; returns `lo` when the range is degenerate.
    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        if hi > lo {
            self.inner.gen_range(lo..=hi)
        } else {
            lo
        }
    }

    /// Uniform integer on `0..n`. `n` must be positive.
    #[inline]
    pub fn index(&mut self, n: usize) -> usize {
        self.inner.gen_range(0..n)
    }

    #[inline]
    pub fn gaussian(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Laplace(0, scale) by inversion of a single uniform.
    pub fn laplace(&mut self, scale: f64) -> f64 {
        // u in (-1/2, 1/2]; 1 - 2|u| is never 0
        let u = 0.5 - self.uniform();
        -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
    }

    /// Uniformly random permutation of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut self.inner);
        idx
    }

    /// `k` distinct indices drawn uniformly from `0..n`.
    pub fn choose_distinct(&mut self, n: usize, k: usize) -> Vec<usize> {
        rand::seq::index::sample(&mut self.inner, n, k).into_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_draws() {
        let mut a = RngStream::new(7);
        let mut b = RngStream::new(7);
        for _ in 0..100 {
            assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
            assert_eq!(a.gaussian().to_bits(), b.gaussian().to_bits());
            assert_eq!(a.laplace(2.0).to_bits(), b.laplace(2.0).to_bits());
        }
        assert_eq!(a.permutation(20), b.permutation(20));
    }

    #[test]
    fn derived_streams_differ() {
        let base = RngStream::new(3);
        let mut a = base.derive(0);
        let mut b = base.derive(1);
        let xs: Vec<f64> = (0..8).map(|_| a.uniform()).collect();
        let ys: Vec<f64> = (0..8).map(|_| b.uniform()).collect();
        assert_ne!(xs, ys);
    }

    #[test]
    fn laplace_moments() {
        let mut rng = RngStream::new(11);
        let n = 200_000;
        let scale = 0.7;
        let (mut abs_sum, mut sum) = (0.0, 0.0);
        for _ in 0..n {
            let x = rng.laplace(scale);
            abs_sum += x.abs();
            sum += x;
        }
        // E|X| = scale, Var|X| = scale^2, E X = 0, Var X = 2 scale^2
        let se_abs = scale / (n as f64).sqrt();
        assert!((abs_sum / n as f64 - scale).abs() < 4.0 * se_abs);
        let se_mean = (2.0f64).sqrt() * scale / (n as f64).sqrt();
        assert!((sum / n as f64).abs() < 4.0 * se_mean);
    }

    #[test]
    fn permutation_is_a_permutation() {
        let mut rng = RngStream::new(1);
        let mut p = rng.permutation(50);
        p.sort_unstable();
        assert_eq!(p, (0..50).collect::<Vec<_>>());
        let mut c = rng.choose_distinct(30, 6);
        c.sort_unstable();
        c.dedup();
        assert_eq!(c.len(), 6);
        assert!(c.iter().all(|&i| i < 30));
    }
}
