//! Random batch estimate of the interaction gradient with kernel splitting.
//!
//! The singular kernel `K1` is summed over all pairs; the smooth kernel `K2`
//! is summed only inside random batches and rescaled so that the estimate is
//! unbiased over the choice of partition.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potentials::PotentialModel;
use crate::rng::RngStream;

/// Rescaling applied to within-batch `K2` sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RbmScaling {
    /// `(N - 1) / (|C| - 1)`: unbiased for every batch size.
    #[default]
    Corrected,
    /// `N / |C|`, kept for comparison; biased by `N (|C| - 1) / (|C| (N - 1))`.
    Printed,
}

impl RbmScaling {
    #[inline]
    pub fn factor(self, count: usize, batch: usize) -> f64 {
        match self {
            RbmScaling::Corrected => (count - 1) as f64 / (batch - 1) as f64,
            RbmScaling::Printed => count as f64 / batch as f64,
        }
    }
}

/// A partition of `0..N` into consecutive chunks of a random permutation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchPartition {
    order: Vec<usize>,
    bounds: Vec<usize>,
}

impl BatchPartition {
    /// Chunk `order` into blocks of `batch_size`, the last block taking the remainder.
    pub fn from_order(order: Vec<usize>, batch_size: usize) -> Self {
        assert!(batch_size >= 1);
        let mut bounds: Vec<usize> = (0..order.len()).step_by(batch_size).collect();
        bounds.push(order.len());
        if order.is_empty() {
            bounds = vec![0];
        }
        Self { order, bounds }
    }

    pub fn len(&self) -> usize {
        self.bounds.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn covered(&self) -> usize {
        self.order.len()
    }

    pub fn batches(&self) -> impl Iterator<Item = &[usize]> {
        self.bounds.windows(2).map(move |w| &self.order[w[0]..w[1]])
    }

    /// Merge a trailing singleton batch into its predecessor.
    ///
    /// Batch-mates stay a uniform subset given the batch size, so the
    /// corrected scaling remains unbiased.
    pub fn absorb_singleton(mut self) -> Self {
        let k = self.bounds.len();
        if k >= 3 && self.bounds[k - 1] - self.bounds[k - 2] == 1 {
            self.bounds.remove(k - 2);
        }
        self
    }
}

/// Uniform random partition of `0..count` into batches of `batch_size`.
pub fn shuffle_batches(count: usize, batch_size: usize, rng: &mut RngStream) -> BatchPartition {
    BatchPartition::from_order(rng.permutation(count), batch_size)
}

/// Random batch gradient estimate; overwrites `grad` (length `dim * N`).
pub fn rbm_grad<M: PotentialModel + ?Sized>(
    positions: &[f64],
    dim: usize,
    model: &M,
    partition: &BatchPartition,
    scaling: RbmScaling,
    grad: &mut [f64],
) -> Result<()> {
    let count = positions.len() / dim;
    if partition.covered() != count {
        return Err(Error::PartitionMismatch {
            covered: partition.covered(),
            count,
        });
    }
    grad.iter_mut().for_each(|g| *g = 0.0);
    for i in 0..count {
        model.add_confining_gradient(
            &positions[i * dim..(i + 1) * dim],
            &mut grad[i * dim..(i + 1) * dim],
        );
    }
    model.add_singular_gradient(positions, grad)?;

    let mut kernel = vec![0.0; dim];
    for batch in partition.batches() {
        if batch.len() < 2 {
            if count > 1 {
                return Err(Error::SingletonBatch { count });
            }
            continue;
        }
        let s = scaling.factor(count, batch.len());
        for (a, &i) in batch.iter().enumerate() {
            for &j in &batch[a + 1..] {
                kernel.iter_mut().for_each(|k| *k = 0.0);
                model.add_smooth_kernel(
                    &positions[i * dim..(i + 1) * dim],
                    &positions[j * dim..(j + 1) * dim],
                    &mut kernel,
                );
                for k in 0..dim {
                    grad[i * dim + k] += s * kernel[k];
                    grad[j * dim + k] -= s * kernel[k];
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{Cosine, FreeGas};

    #[test]
    fn partition_shapes() {
        let mut rng = RngStream::new(1);
        let p = shuffle_batches(0, 2, &mut rng);
        assert!(p.is_empty());
        let p = shuffle_batches(2, 2, &mut rng);
        let b: Vec<_> = p.batches().map(|b| b.to_vec()).collect();
        assert_eq!(b.len(), 1);
        let mut only = b[0].clone();
        only.sort_unstable();
        assert_eq!(only, vec![0, 1]);

        let p = shuffle_batches(7, 3, &mut rng);
        let sizes: Vec<usize> = p.batches().map(|b| b.len()).collect();
        assert_eq!(sizes, vec![3, 3, 1]);
        let merged = p.absorb_singleton();
        let sizes: Vec<usize> = merged.batches().map(|b| b.len()).collect();
        assert_eq!(sizes, vec![3, 4]);
        let mut all: Vec<usize> = merged.batches().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..7).collect::<Vec<_>>());
    }

    #[test]
    fn singleton_batch_is_an_error() {
        let part = BatchPartition::from_order(vec![2, 0, 1], 2);
        let mut g = vec![0.0; 3];
        let err = rbm_grad(
            &[0.0, 1.0, 2.0],
            1,
            &Cosine::new(10.0),
            &part,
            RbmScaling::Corrected,
            &mut g,
        );
        assert!(matches!(err, Err(Error::SingletonBatch { count: 3 })));
        let bad = BatchPartition::from_order(vec![0, 1], 2);
        assert!(matches!(
            rbm_grad(
                &[0.0, 1.0, 2.0],
                1,
                &Cosine::new(10.0),
                &bad,
                RbmScaling::Corrected,
                &mut g
            ),
            Err(Error::PartitionMismatch { .. })
        ));
    }

    #[test]
    fn whole_system_batch_is_exact() {
        let c = Cosine::new(10.0);
        let q = [1.3, 7.9];
        let part = BatchPartition::from_order(vec![1, 0], 2);
        let mut est = [0.0; 2];
        rbm_grad(&q, 1, &c, &part, RbmScaling::Corrected, &mut est).unwrap();
        let mut full = [0.0; 2];
        c.gradient(&q, &mut full).unwrap();
        assert!((est[0] - full[0]).abs() < 1e-15 && (est[1] - full[1]).abs() < 1e-15);
    }

    #[test]
    fn free_gas_estimate_is_zero() {
        let mut rng = RngStream::new(4);
        let part = shuffle_batches(6, 2, &mut rng);
        let mut g = vec![1.0; 6];
        rbm_grad(&[0.5; 6], 1, &FreeGas, &part, RbmScaling::Corrected, &mut g).unwrap();
        assert!(g.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn printed_scaling_factor() {
        assert_eq!(RbmScaling::Printed.factor(4, 2), 2.0);
        assert_eq!(RbmScaling::Corrected.factor(4, 2), 3.0);
    }
}
