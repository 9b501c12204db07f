// SPDX-License-Identifier: MIT OR Apache-2.0

//! Partitions of `1..=T` into contiguous clusters and the Rand-type indices
//! used to compare them.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::energy::Segment;
use crate::error::{Error, Result};

/// Segmentation of `1..=T` by change points. A change point `τ` is the last
/// time index of the cluster to its left, so boundaries `[τ₁, …, τ_k]` give
/// clusters `1..=τ₁`, `τ₁+1..=τ₂`, …, `τ_k+1..=T`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    boundaries: Vec<usize>,
    len: usize,
}

impl Partition {
    pub fn new(boundaries: Vec<usize>, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::invalid("partition of an empty series"));
        }
        let mut prev = 0;
        for &b in &boundaries {
            if b <= prev || b >= len {
                return Err(Error::invalid(format!(
                    "change points must be strictly increasing within (0, {len}); got {boundaries:?}"
                )));
            }
            prev = b;
        }
        Ok(Self { boundaries, len })
    }

    /// A single cluster covering `1..=len`.
    pub fn trivial(len: usize) -> Self {
        Self {
            boundaries: Vec::new(),
            len,
        }
    }

    /// Contiguous clusters of the given sizes, in order.
    pub fn from_sizes(sizes: &[usize]) -> Result<Self> {
        if sizes.contains(&0) {
            return Err(Error::invalid("cluster sizes must be positive"));
        }
        let mut acc = 0;
        let mut boundaries = Vec::with_capacity(sizes.len().saturating_sub(1));
        for &s in sizes {
            acc += s;
            boundaries.push(acc);
        }
        let len = boundaries.pop().unwrap_or(0);
        Self::new(boundaries, len)
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    /// Number of observations T.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn num_clusters(&self) -> usize {
        self.boundaries.len() + 1
    }

    pub fn segments(&self) -> impl Iterator<Item = Segment> + '_ {
        let starts = std::iter::once(0).chain(self.boundaries.iter().copied());
        let ends = self.boundaries.iter().copied().chain(std::iter::once(self.len));
        starts.zip(ends).map(|(s, e)| Segment { start: s + 1, end: e })
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.segments().map(|s| s.len()).collect()
    }

    /// Adds a change point; returns `false` if it was already present.
    pub fn insert(&mut self, tau: usize) -> Result<bool> {
        if tau == 0 || tau >= self.len {
            return Err(Error::invalid(format!(
                "change point {tau} outside (0, {})",
                self.len
            )));
        }
        match self.boundaries.binary_search(&tau) {
            Ok(_) => Ok(false),
            Err(pos) => {
                self.boundaries.insert(pos, tau);
                Ok(true)
            }
        }
    }

    /// Cluster label (0-based, in time order) of every observation.
    pub fn labels(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len);
        for (c, seg) in self.segments().enumerate() {
            out.extend(std::iter::repeat_n(c, seg.len()));
        }
        out
    }

    /// `true` when every boundary of `coarser` is also a boundary of `self`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.len == coarser.len
            && coarser
                .boundaries
                .iter()
                .all(|b| self.boundaries.binary_search(b).is_ok())
    }
}

fn pairs(n: u128) -> u128 {
    n * n.saturating_sub(1) / 2
}

struct PairCounts {
    /// Σ C(n_ij, 2) over the contingency table.
    joint: u128,
    /// Σ C(a_i, 2) over clusters of `u`.
    rows: u128,
    /// Σ C(b_j, 2) over clusters of `v`.
    cols: u128,
    total: u128,
}

fn check_lengths(u: &Partition, v: &Partition) -> Result<()> {
    if u.len != v.len {
        return Err(Error::invalid(format!(
            "partitions cover different lengths: {} vs {}",
            u.len, v.len
        )));
    }
    if u.len < 2 {
        return Err(Error::invalid("Rand indices need T >= 2"));
    }
    Ok(())
}

/// Pair counts from the contingency table. Both partitions are contiguous,
/// so the nonzero cells are the overlaps met while sweeping the two boundary
/// lists together.
fn pair_counts(u: &Partition, v: &Partition) -> PairCounts {
    let mut joint = 0;
    let (mut i, mut j, mut pos) = (0, 0, 0);
    let ub = &u.boundaries;
    let vb = &v.boundaries;
    while pos < u.len {
        let ue = ub.get(i).copied().unwrap_or(u.len);
        let ve = vb.get(j).copied().unwrap_or(v.len);
        let end = ue.min(ve);
        joint += pairs((end - pos) as u128);
        pos = end;
        if ue == end {
            i += 1;
        }
        if ve == end {
            j += 1;
        }
    }
    let side = |p: &Partition| p.sizes().into_iter().map(|s| pairs(s as u128)).sum();
    PairCounts {
        joint,
        rows: side(u),
        cols: side(v),
        total: pairs(u.len as u128),
    }
}

/// Pair counts for arbitrary (not necessarily contiguous) labelings.
fn label_pair_counts(u: &[usize], v: &[usize]) -> Result<PairCounts> {
    if u.len() != v.len() {
        return Err(Error::invalid(format!(
            "labelings cover different lengths: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    if u.len() < 2 {
        return Err(Error::invalid("Rand indices need T >= 2"));
    }
    let mut cells: HashMap<(usize, usize), u128> = HashMap::new();
    let mut rows: HashMap<usize, u128> = HashMap::new();
    let mut cols: HashMap<usize, u128> = HashMap::new();
    for (&a, &b) in u.iter().zip(v) {
        *cells.entry((a, b)).or_default() += 1;
        *rows.entry(a).or_default() += 1;
        *cols.entry(b).or_default() += 1;
    }
    fn side<K>(m: &HashMap<K, u128>) -> u128 {
        m.values().map(|&c| pairs(c)).sum()
    }
    Ok(PairCounts {
        joint: side(&cells),
        rows: side(&rows),
        cols: side(&cols),
        total: pairs(u.len() as u128),
    })
}

fn rand_from_counts(c: &PairCounts) -> f64 {
    // #A = joint; #B = total - rows - cols + joint
    let agree = c.total + 2 * c.joint - c.rows - c.cols;
    agree as f64 / c.total as f64
}

fn adjusted_from_counts(c: &PairCounts) -> f64 {
    // Scaled by total²: Rand·N² = N(N + 2J - A - B), E[Rand]·N² = N² + 2AB - N(A + B).
    let n = c.total as i128;
    let (j, a, b) = (c.joint as i128, c.rows as i128, c.cols as i128);
    let rand = n * (n + 2 * j - a - b);
    let expected = n * n + 2 * a * b - n * (a + b);
    let denom = n * n - expected;
    if denom == 0 {
        return 1.0;
    }
    (rand - expected) as f64 / denom as f64
}

/// Fraction of observation pairs on which `u` and `v` agree.
pub fn rand_index(u: &Partition, v: &Partition) -> Result<f64> {
    check_lengths(u, v)?;
    Ok(rand_from_counts(&pair_counts(u, v)))
}

/// Rand index adjusted for chance under the hypergeometric model:
/// `(Rand - E[Rand]) / (1 - E[Rand])`. Returns 1 when `E[Rand] = 1`.
pub fn adjusted_rand(u: &Partition, v: &Partition) -> Result<f64> {
    check_lengths(u, v)?;
    Ok(adjusted_from_counts(&pair_counts(u, v)))
}

/// [`rand_index`] for arbitrary cluster labelings.
pub fn rand_index_labels(u: &[usize], v: &[usize]) -> Result<f64> {
    Ok(rand_from_counts(&label_pair_counts(u, v)?))
}

/// [`adjusted_rand`] for arbitrary cluster labelings.
pub fn adjusted_rand_labels(u: &[usize], v: &[usize]) -> Result<f64> {
    Ok(adjusted_from_counts(&label_pair_counts(u, v)?))
}
