use std::f64::consts::PI;

use super::PotentialModel;
use crate::error::{Error, Result};
use crate::geometry::{min_image_into, CellList};
use crate::system::SystemParams;

/// `2^{1/6}`, the minimum of the Lennard-Jones pair potential and the support
/// radius of the singular part of the kernel split.
pub const LJ_SPLIT_RADIUS: f64 = 1.122_462_048_309_373;

/// Closer pairs are treated as overlapping.
const OVERLAP_RADIUS: f64 = 1e-8;

fn check_distance(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "r",
            reason: format!("pair distance must be > 0, got {r}"),
        })
    }
}

#[inline]
fn phi(r2: f64) -> f64 {
    let inv6 = 1.0 / (r2 * r2 * r2);
    4.0 * (inv6 * inv6 - inv6)
}

/// `phi'(r) / r`, so the gradient with respect to `q_i` is `z * dphi_over_r`.
#[inline]
fn dphi_over_r(r2: f64) -> f64 {
    let inv2 = 1.0 / r2;
    let inv6 = inv2 * inv2 * inv2;
    -24.0 * inv2 * (2.0 * inv6 * inv6 - inv6)
}

const LINEAR_SLOPE: f64 = -1.0 / LJ_SPLIT_RADIUS;

/// `4 (r^-12 - r^-6)`.
pub fn lj_phi(r: f64) -> Result<f64> {
    check_distance(r)?;
    Ok(phi(r * r))
}

/// Bounded part of the split: linear below `2^{1/6}`, the full potential above.
pub fn lj_phi1(r: f64) -> Result<f64> {
    check_distance(r)?;
    Ok(if r < LJ_SPLIT_RADIUS {
        LINEAR_SLOPE * r
    } else {
        phi(r * r)
    })
}

/// Singular remainder, supported on `(0, 2^{1/6})`.
pub fn lj_phi2(r: f64) -> Result<f64> {
    check_distance(r)?;
    Ok(if r < LJ_SPLIT_RADIUS {
        phi(r * r) - LINEAR_SLOPE * r
    } else {
        0.0
    })
}

/// Three-dimensional Lennard-Jones fluid in a periodic cube, truncated at
/// `cutoff` under the minimum-image convention.
#[derive(Debug, Clone)]
pub struct LennardJones {
    box_length: f64,
    cutoff: f64,
    // empty templates for the two search ranges in use
    cutoff_cells: CellList,
    split_cells: CellList,
}

impl LennardJones {
    pub fn new(box_length: f64, cutoff: f64) -> Result<Self> {
        if !(cutoff > 0.0 && cutoff <= box_length / 2.0) {
            return Err(Error::InvalidParameter {
                name: "r_c",
                reason: format!("need 0 < r_c <= L/2 = {}, got {cutoff}", box_length / 2.0),
            });
        }
        Ok(Self {
            box_length,
            cutoff,
            cutoff_cells: CellList::new(3, box_length, cutoff),
            split_cells: CellList::new(3, box_length, LJ_SPLIT_RADIUS),
        })
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    /// Visit every pair within `range` as `(i, j, z, r2)` with `z = q_i - q_j`.
    fn for_each_pair_within(
        &self,
        q: &[f64],
        range: f64,
        mut f: impl FnMut(usize, usize, &[f64; 3], f64),
    ) -> Result<()> {
        let mut cells = if range == self.cutoff {
            self.cutoff_cells.clone()
        } else if range == LJ_SPLIT_RADIUS {
            self.split_cells.clone()
        } else {
            CellList::new(3, self.box_length, range)
        };
        cells.rebuild(q, self.box_length);
        let range2 = range * range;
        let mut z = [0.0; 3];
        let mut overlap = None;
        cells.for_each_pair(|i, j| {
            let r2 = min_image_into(
                &q[3 * i..3 * i + 3],
                &q[3 * j..3 * j + 3],
                self.box_length,
                &mut z,
            );
            if r2 < range2 {
                if r2 < OVERLAP_RADIUS * OVERLAP_RADIUS {
                    overlap.get_or_insert((i, j, r2.sqrt()));
                    return;
                }
                f(i, j, &z, r2);
            }
        });
        match overlap {
            Some((i, j, distance)) => Err(Error::Overlap { i, j, distance }),
            None => Ok(()),
        }
    }

    /// Sum of `phi` between `x` and every particle except `skip`.
    fn interaction_with(&self, q: &[f64], x: &[f64], skip: Option<usize>) -> Result<f64> {
        let rc2 = self.cutoff * self.cutoff;
        let mut z = [0.0; 3];
        let mut u = 0.0;
        for j in 0..q.len() / 3 {
            if Some(j) == skip {
                continue;
            }
            let r2 = min_image_into(x, &q[3 * j..3 * j + 3], self.box_length, &mut z);
            if r2 < rc2 {
                if r2 < OVERLAP_RADIUS * OVERLAP_RADIUS {
                    return Err(Error::Overlap {
                        i: skip.unwrap_or(q.len() / 3),
                        j,
                        distance: r2.sqrt(),
                    });
                }
                u += phi(r2);
            }
        }
        Ok(u)
    }

    /// Pair sum `sum_{i<j, r < r_c} [2 r^-12 - r^-6]` entering the virial.
    fn virial_sum(&self, q: &[f64]) -> Result<f64> {
        let mut w = 0.0;
        self.for_each_pair_within(q, self.cutoff, |_, _, _, r2| {
            let inv6 = 1.0 / (r2 * r2 * r2);
            w += 2.0 * inv6 * inv6 - inv6;
        })?;
        Ok(w)
    }
}

impl PotentialModel for LennardJones {
    fn energy(&self, q: &[f64]) -> Result<f64> {
        let mut u = 0.0;
        self.for_each_pair_within(q, self.cutoff, |_, _, _, r2| u += phi(r2))?;
        Ok(u)
    }

    fn gradient(&self, q: &[f64], grad: &mut [f64]) -> Result<()> {
        grad.iter_mut().for_each(|g| *g = 0.0);
        self.for_each_pair_within(q, self.cutoff, |i, j, z, r2| {
            let s = dphi_over_r(r2);
            for k in 0..3 {
                grad[3 * i + k] += s * z[k];
                grad[3 * j + k] -= s * z[k];
            }
        })
    }

    fn insertion_delta(&self, q: &[f64], x: &[f64]) -> Result<f64> {
        self.interaction_with(q, x, None)
    }

    fn removal_delta(&self, q: &[f64], index: usize) -> Result<f64> {
        let count = q.len() / 3;
        if index >= count {
            return Err(Error::IndexOutOfRange { index, count });
        }
        Ok(-self.interaction_with(q, &q[3 * index..3 * index + 3], Some(index))?)
    }

    fn add_singular_gradient(&self, q: &[f64], grad: &mut [f64]) -> Result<()> {
        self.for_each_pair_within(q, LJ_SPLIT_RADIUS, |i, j, z, r2| {
            let r = r2.sqrt();
            let s = dphi_over_r(r2) - LINEAR_SLOPE / r;
            for k in 0..3 {
                grad[3 * i + k] += s * z[k];
                grad[3 * j + k] -= s * z[k];
            }
        })
    }

    #[inline]
    fn add_smooth_kernel(&self, qi: &[f64], qj: &[f64], out: &mut [f64]) {
        let mut z = [0.0; 3];
        let r2 = min_image_into(qi, qj, self.box_length, &mut z);
        if r2 >= self.cutoff * self.cutoff || r2 == 0.0 {
            return;
        }
        let s = if r2 < LJ_SPLIT_RADIUS * LJ_SPLIT_RADIUS {
            LINEAR_SLOPE / r2.sqrt()
        } else {
            dphi_over_r(r2)
        };
        for k in 0..3 {
            out[k] += s * z[k];
        }
    }

    fn pressure(&self, q: &[f64], params: &SystemParams) -> Option<Result<f64>> {
        Some(self.virial_sum(q).map(|w| {
            let volume = self.box_length.powi(3);
            let rho = (q.len() / 3) as f64 / volume;
            let rc = self.cutoff;
            rho / params.beta
                + 8.0 / volume * w
                + 16.0 / 3.0 * PI * rho * rho * (2.0 / 3.0 * rc.powi(-9) - rc.powi(-3))
        }))
    }
}
