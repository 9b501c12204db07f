// SPDX-License-Identifier: MIT OR Apache-2.0

//! E-Agglomerative: greedy merging of adjacent clusters, keeping the level
//! of the merge sequence with the largest between-within goodness of fit Ŝ.

use serde::{Deserialize, Serialize};

use crate::energy::exact::{PairSums, Quantizer};
use crate::energy::{alpha_distance_unchecked, improves, Alpha, TimeSeries};
use crate::error::{Error, Result};
use crate::eval::Partition;

/// Starting clustering: at least two contiguous clusters of two or more
/// observations each.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InitialClustering(Partition);

impl InitialClustering {
    pub fn new(partition: Partition) -> Result<Self> {
        if partition.num_clusters() < 2 {
            return Err(Error::invalid("initial clustering needs at least 2 clusters"));
        }
        check_cluster_sizes(&partition)?;
        Ok(Self(partition))
    }

    /// Consecutive clusters of `width` observations; a remainder shorter
    /// than 2 is folded into the last full cluster.
    pub fn equal_width(len: usize, width: usize) -> Result<Self> {
        if width < 2 {
            return Err(Error::invalid(format!("initial cluster width must be >= 2; got {width}")));
        }
        let mut boundaries: Vec<usize> = (1..).map(|i| i * width).take_while(|&b| b < len).collect();
        if let Some(&last) = boundaries.last() {
            if len - last < 2 {
                boundaries.pop();
            }
        }
        Self::new(Partition::new(boundaries, len)?)
    }

    pub fn partition(&self) -> &Partition {
        &self.0
    }
}

fn check_cluster_sizes(partition: &Partition) -> Result<()> {
    if let Some(seg) = partition.segments().find(|s| s.len() < 2) {
        return Err(Error::invalid(format!(
            "cluster [{}, {}] has fewer than 2 observations",
            seg.start, seg.end
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeStep {
    /// 1-based position (in the clustering before the merge) of the left
    /// cluster of the merged pair.
    pub left: usize,
    /// Boundary between the merged clusters, removed by this step.
    pub boundary: usize,
    /// Ŝ after the merge.
    pub gof: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeTrace {
    pub initial: Partition,
    pub steps: Vec<MergeStep>,
    /// Ŝ_n, Ŝ_{n-1}, …, Ŝ_2.
    pub gof: Vec<f64>,
    pub best_k: usize,
    pub best_partition: Partition,
}

impl MergeTrace {
    pub fn initial_clusters(&self) -> usize {
        self.initial.num_clusters()
    }

    /// The clustering with `k` clusters along the merge sequence.
    pub fn partition_at(&self, k: usize) -> Option<Partition> {
        let n = self.initial_clusters();
        if k == 0 || k > n {
            return None;
        }
        let removed: Vec<usize> = self.steps[..n - k].iter().map(|s| s.boundary).collect();
        let kept = self
            .initial
            .boundaries()
            .iter()
            .copied()
            .filter(|b| !removed.contains(b))
            .collect();
        Partition::new(kept, self.initial.len()).ok()
    }
}

/// Ŝ = Σ Q̂(C_i, C_{i+1}) over adjacent clusters, computed from scratch.
pub fn goodness_of_fit(series: &TimeSeries, partition: &Partition, alpha: Alpha) -> Result<f64> {
    if partition.len() != series.len() {
        return Err(Error::invalid("partition and series lengths differ"));
    }
    check_cluster_sizes(partition)?;
    let q = Quantizer::for_series(series, alpha);
    let segs: Vec<_> = partition.segments().collect();
    let within: Vec<u128> = segs
        .iter()
        .map(|s| block_sum(series, s.offset(), s.end, s.offset(), s.end, alpha, &q, true))
        .collect();
    let mut total = 0.0;
    for (i, pair) in segs.windows(2).enumerate() {
        let (a, b) = (pair[0], pair[1]);
        let between = block_sum(series, a.offset(), a.end, b.offset(), b.end, alpha, &q, false);
        let sums = PairSums {
            between,
            within_x: within[i],
            within_y: within[i + 1],
        };
        total += sums.scaled(&q, a.len(), b.len());
    }
    Ok(total)
}

/// Sum of quantized distances between offsets `r0..r1` and `c0..c1`;
/// `upper` restricts to pairs `i < j` (for a within-cluster sum).
#[allow(clippy::too_many_arguments)]
fn block_sum(
    series: &TimeSeries,
    r0: usize,
    r1: usize,
    c0: usize,
    c1: usize,
    alpha: Alpha,
    q: &Quantizer,
    upper: bool,
) -> u128 {
    let mut acc = 0u128;
    for i in r0..r1 {
        let a = series.row(i);
        let from = if upper { i + 1 } else { c0 };
        for j in from..c1 {
            acc += q.quantize(alpha_distance_unchecked(a, series.row(j), alpha)) as u128;
        }
    }
    acc
}

/// Active cluster state: sizes, within sums, and the between-sum matrix over
/// original cluster ids. A merged cluster keeps its left member's id.
struct Clusters {
    q: Quantizer,
    size: Vec<usize>,
    within: Vec<u128>,
    between: Vec<u128>,
    stride: usize,
    /// Active ids in time order.
    order: Vec<usize>,
    /// Right boundary (time index) of each id.
    end: Vec<usize>,
}

impl Clusters {
    fn new(series: &TimeSeries, init: &Partition, alpha: Alpha) -> Self {
        let q = Quantizer::for_series(series, alpha);
        let n = init.num_clusters();
        let mut label = Vec::with_capacity(series.len());
        for (c, seg) in init.segments().enumerate() {
            label.extend(std::iter::repeat_n(c, seg.len()));
        }
        let mut within = vec![0u128; n];
        let mut between = vec![0u128; n * n];
        for i in 0..series.len() {
            let a = series.row(i);
            let ci = label[i];
            for (j, &cj) in label.iter().enumerate().skip(i + 1) {
                let v = q.quantize(alpha_distance_unchecked(a, series.row(j), alpha)) as u128;
                if ci == cj {
                    within[ci] += v;
                } else {
                    between[ci * n + cj] += v;
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                between[i * n + j] = between[j * n + i];
            }
        }
        Self {
            q,
            size: init.sizes(),
            within,
            between,
            stride: n,
            order: (0..n).collect(),
            end: init.segments().map(|s| s.end).collect(),
        }
    }

    fn b(&self, i: usize, j: usize) -> u128 {
        self.between[i * self.stride + j]
    }

    fn qhat(&self, i: usize, j: usize) -> f64 {
        self.qhat_sums(self.b(i, j), self.within[i], self.size[i], self.within[j], self.size[j])
    }

    fn qhat_sums(&self, between: u128, wx: u128, n: usize, wy: u128, m: usize) -> f64 {
        let sums = PairSums {
            between,
            within_x: wx,
            within_y: wy,
        };
        sums.scaled(&self.q, n, m)
    }

    /// Change in Ŝ from merging the clusters at positions `p` and `p + 1`.
    fn merge_delta(&self, p: usize) -> f64 {
        let (l, r) = (self.order[p], self.order[p + 1]);
        let merged_within = self.within[l] + self.within[r] + self.b(l, r);
        let merged_size = self.size[l] + self.size[r];
        let mut delta = -self.qhat(l, r);
        if p > 0 {
            let prev = self.order[p - 1];
            delta -= self.qhat(prev, l);
            delta += self.qhat_sums(
                self.b(prev, l) + self.b(prev, r),
                self.within[prev],
                self.size[prev],
                merged_within,
                merged_size,
            );
        }
        if p + 2 < self.order.len() {
            let next = self.order[p + 2];
            delta -= self.qhat(r, next);
            delta += self.qhat_sums(
                self.b(l, next) + self.b(r, next),
                merged_within,
                merged_size,
                self.within[next],
                self.size[next],
            );
        }
        delta
    }

    /// Merges positions `p` and `p + 1`; returns the removed boundary.
    fn merge(&mut self, p: usize) -> usize {
        let (l, r) = (self.order[p], self.order[p + 1]);
        let boundary = self.end[l];
        self.within[l] += self.within[r] + self.b(l, r);
        self.size[l] += self.size[r];
        self.end[l] = self.end[r];
        for &o in &self.order {
            if o != l && o != r {
                let v = self.b(l, o) + self.b(r, o);
                self.between[l * self.stride + o] = v;
                self.between[o * self.stride + l] = v;
            }
        }
        self.order.remove(p + 1);
        boundary
    }

    fn gof(&self) -> f64 {
        self.order.windows(2).map(|w| self.qhat(w[0], w[1])).sum()
    }
}

/// Runs the merge sequence down to one cluster.
///
/// Each step merges the adjacent pair giving the largest post-merge Ŝ (ties:
/// leftmost pair); Ŝ is carried forward by adding the merge's change, which
/// touches only the Q̂ terms of the merged pair and its two neighbours.
/// `best_k` maximizes Ŝ over the sequence, preferring more clusters on ties.
pub fn e_agglo(series: &TimeSeries, init: &InitialClustering, alpha: Alpha) -> Result<MergeTrace> {
    let initial = init.partition().clone();
    if initial.len() != series.len() {
        return Err(Error::invalid(format!(
            "initial clustering covers {} observations, series has {}",
            initial.len(),
            series.len()
        )));
    }
    let n = initial.num_clusters();
    let mut state = Clusters::new(series, &initial, alpha);
    let mut current = state.gof();
    let mut gof = Vec::with_capacity(n - 1);
    gof.push(current);
    let mut steps = Vec::with_capacity(n - 1);

    while state.order.len() > 1 {
        let mut best: Option<(usize, f64)> = None;
        for p in 0..state.order.len() - 1 {
            let after = current + state.merge_delta(p);
            if best.is_none_or(|(_, b)| improves(after, b)) {
                best = Some((p, after));
            }
        }
        let (p, after) = best.expect("at least two clusters");
        let boundary = state.merge(p);
        current = after;
        steps.push(MergeStep {
            left: p + 1,
            boundary,
            gof: current,
        });
        if state.order.len() >= 2 {
            gof.push(current);
        }
    }

    // gof[i] belongs to k = n - i clusters; scan from the finest level so
    // ties keep the larger k.
    let mut best_idx = 0;
    for (i, &s) in gof.iter().enumerate().skip(1) {
        if improves(s, gof[best_idx]) {
            best_idx = i;
        }
    }
    let best_k = n - best_idx;
    let mut trace = MergeTrace {
        initial,
        steps,
        gof,
        best_k,
        best_partition: Partition::trivial(series.len()),
    };
    trace.best_partition = trace.partition_at(best_k).expect("valid level");
    Ok(trace)
}
