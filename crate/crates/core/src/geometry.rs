//! Periodic-box helpers: wrapping, minimum-image displacements and a
//! linked-cell list for short-ranged pair searches.

/// Minimum-image component of `a - b` in a periodic box of side `l`, in `[-l/2, l/2)`.
#[inline]
pub fn min_image(d: f64, l: f64) -> f64 {
    // single shift covers coordinates already wrapped into the box
    let half = 0.5 * l;
    let s = if d >= half {
        d - l
    } else if d < -half {
        d + l
    } else {
        d
    };
    if (-half..half).contains(&s) {
        s
    } else {
        d - l * (d / l + 0.5).floor()
    }
}

/// Componentwise minimum-image displacement `a - b`.
pub fn min_image_displacement(a: &[f64], b: &[f64], l: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| min_image(x - y, l)).collect()
}

/// Squared minimum-image distance; writes the displacement into `out`.
#[inline]
pub fn min_image_into(a: &[f64], b: &[f64], l: f64, out: &mut [f64]) -> f64 {
    let mut r2 = 0.0;
    for k in 0..out.len() {
        let d = min_image(a[k] - b[k], l);
        out[k] = d;
        r2 += d * d;
    }
    r2
}

/// Wrap a coordinate into `[0, l)`.
#[inline]
pub fn wrap(x: f64, l: f64) -> f64 {
    let w = x - l * (x / l).floor();
    if w >= l || w < 0.0 {
        0.0
    } else {
        w
    }
}

/// Linked-cell list over a cubic periodic box.
///
/// Cells have side at least `range`, so every pair closer than `range` sits in
/// the same or adjacent cells. When fewer than three cells fit along a side the
/// list degenerates to a single cell and pair enumeration is exhaustive.
#[derive(Debug, Clone)]
pub struct CellList {
    dim: usize,
    per_side: usize,
    head: Vec<usize>,
    next: Vec<usize>,
    /// For cell `c`, `stencil[start[c]..start[c + 1]]` lists the neighbouring
    /// cells `c2 >= c`, itself included.
    start: Vec<usize>,
    stencil: Vec<usize>,
}

const EMPTY: usize = usize::MAX;

impl CellList {
    pub fn new(dim: usize, box_length: f64, range: f64) -> Self {
        let fit = (box_length / range).floor() as usize;
        let per_side = if fit >= 3 { fit } else { 1 };
        let n_cells = per_side.pow(dim as u32);
        let reach: isize = if per_side > 1 { 1 } else { 0 };
        let n_off = (2 * reach as usize + 1).pow(dim as u32);
        let mut start = Vec::with_capacity(n_cells + 1);
        let mut stencil = Vec::new();
        let m = per_side as isize;
        for c in 0..n_cells {
            start.push(stencil.len());
            let mut coords = vec![0isize; dim];
            let mut rem = c;
            for k in (0..dim).rev() {
                coords[k] = (rem % per_side) as isize;
                rem /= per_side;
            }
            for o in 0..n_off {
                let mut rem = o;
                let mut c2 = 0usize;
                for &ck in &coords {
                    let step = (rem % (2 * reach as usize + 1)) as isize - reach;
                    rem /= 2 * reach as usize + 1;
                    c2 = c2 * per_side + (ck + step).rem_euclid(m) as usize;
                }
                if c2 >= c {
                    stencil.push(c2);
                }
            }
        }
        start.push(stencil.len());
        Self {
            dim,
            per_side,
            head: vec![EMPTY; n_cells],
            next: Vec::new(),
            start,
            stencil,
        }
    }

    /// Bin the flat coordinate array `positions` (stride `dim`).
    pub fn rebuild(&mut self, positions: &[f64], box_length: f64) {
        let n = positions.len() / self.dim;
        let scale = self.per_side as f64 / box_length;
        self.head.iter_mut().for_each(|h| *h = EMPTY);
        self.next.clear();
        self.next.resize(n, EMPTY);
        for i in 0..n {
            let mut c = 0;
            for &x in &positions[i * self.dim..(i + 1) * self.dim] {
                let k = ((wrap(x, box_length) * scale) as usize).min(self.per_side - 1);
                c = c * self.per_side + k;
            }
            self.next[i] = self.head[c];
            self.head[c] = i;
        }
    }

    /// Visit every unordered pair `(i, j)` in the same or adjacent cells exactly once.
    pub fn for_each_pair(&self, mut f: impl FnMut(usize, usize)) {
        for c in 0..self.head.len() {
            if self.head[c] == EMPTY {
                continue;
            }
            for &c2 in &self.stencil[self.start[c]..self.start[c + 1]] {
                let mut i = self.head[c];
                while i != EMPTY {
                    let mut j = if c2 == c { self.next[i] } else { self.head[c2] };
                    while j != EMPTY {
                        f(i, j);
                        j = self.next[j];
                    }
                    i = self.next[i];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use std::collections::BTreeSet;

    #[test]
    fn min_image_examples() {
        assert_eq!(min_image_displacement(&[1.0], &[9.0], 10.0), vec![2.0]);
        assert_eq!(min_image_displacement(&[3.0], &[1.0], 10.0), vec![2.0]);
        assert_eq!(
            min_image_displacement(&[9.0, 9.0, 9.0], &[1.0, 1.0, 1.0], 10.0),
            vec![-2.0, -2.0, -2.0]
        );
        // half-box wraps to the negative end
        assert_eq!(min_image(5.0, 10.0), -5.0);
    }

    #[test]
    fn wrap_stays_in_box() {
        assert_eq!(wrap(10.0, 10.0), 0.0);
        assert_eq!(wrap(-1e-18, 10.0), 0.0);
        assert!((wrap(-2.5, 10.0) - 7.5).abs() < 1e-15);
        assert!((wrap(23.0, 10.0) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn cell_list_finds_all_close_pairs() {
        let l = 12.6;
        let range = 2f64.powf(1.0 / 6.0);
        let mut rng = RngStream::new(5);
        let n = 300;
        let pos: Vec<f64> = (0..3 * n).map(|_| rng.uniform() * l).collect();
        let mut cells = CellList::new(3, l, range);
        cells.rebuild(&pos, l);
        let mut found = BTreeSet::new();
        let mut buf = [0.0; 3];
        cells.for_each_pair(|i, j| {
            let key = (i.min(j), i.max(j));
            assert!(found.insert(key), "pair visited twice");
        });
        for i in 0..n {
            for j in i + 1..n {
                let r2 =
                    min_image_into(&pos[3 * i..3 * i + 3], &pos[3 * j..3 * j + 3], l, &mut buf);
                if r2 < range * range {
                    assert!(found.contains(&(i, j)), "missed close pair {i},{j}");
                }
            }
        }
    }

    #[test]
    fn small_box_degenerates_to_all_pairs() {
        let mut cells = CellList::new(3, 2.0, 1.0);
        let pos = [0.1, 0.1, 0.1, 1.9, 1.9, 1.9, 1.0, 1.0, 1.0];
        cells.rebuild(&pos, 2.0);
        let mut count = 0;
        cells.for_each_pair(|_, _| count += 1);
        assert_eq!(count, 3);
    }
}
