// SPDX-License-Identifier: MIT OR Apache-2.0

//! Brute-force oracles shared by the integration and acceptance tests. None
//! of them call the code paths they are used to check.

#![allow(dead_code)]

use energy_cpd::energy::exact::{PairSums, Quantizer};
use energy_cpd::energy::{alpha_distance, Alpha, Segment, SplitCandidate, TimeSeries, TIE_TOLERANCE};
use energy_cpd::eval::Partition;
use rand::Rng;

pub fn dist(a: &[f64], b: &[f64], alpha: f64) -> f64 {
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    s.sqrt().powf(alpha)
}

/// Exact sum of floating-point values (Shewchuk's partials), rounded once.
pub fn exact_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in values {
        let mut kept = 0;
        for i in 0..partials.len() {
            let mut y = partials[i];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[kept] = lo;
                kept += 1;
            }
            x = hi;
        }
        partials.truncate(kept);
        partials.push(x);
    }
    // Round the partials from the top, then correct a half-way tie.
    let mut hi = 0.0;
    let mut n = partials.len();
    if n > 0 {
        n -= 1;
        hi = partials[n];
        let mut lo = 0.0;
        while n > 0 {
            let x = hi;
            n -= 1;
            let y = partials[n];
            hi = x + y;
            let yr = hi - x;
            lo = y - yr;
            if lo != 0.0 {
                break;
            }
        }
        if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
            let y = lo * 2.0;
            let x = hi + y;
            if y == x - hi {
                hi = x;
            }
        }
    }
    hi
}

/// Ê by the defining triple sum over floating-point distances. The three
/// weighted sums are combined over the common denominator n(n−1)m(m−1)
/// with error-free products and exact summation, so the only rounding is
/// the final division.
pub fn divergence_direct(x: &[Vec<f64>], y: &[Vec<f64>], alpha: f64) -> f64 {
    let (n, m) = (x.len() as f64, y.len() as f64);
    let mut parts = Vec::new();
    let mut push = |d: f64, weight: f64| {
        let p = d * weight;
        parts.push(p);
        parts.push(d.mul_add(weight, -p));
    };
    for a in x {
        for b in y {
            push(dist(a, b, alpha), (n - 1.0) * (m - 1.0));
        }
    }
    for i in 0..x.len() {
        for k in (i + 1)..x.len() {
            push(dist(&x[i], &x[k], alpha), -m * (m - 1.0));
        }
    }
    for j in 0..y.len() {
        for k in (j + 1)..y.len() {
            push(dist(&y[j], &y[k], alpha), -n * (n - 1.0));
        }
    }
    2.0 * exact_sum(parts) / (n * (n - 1.0) * m * (m - 1.0))
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Exhaustive (τ, κ) search: every admissible pair's sums are recomputed
/// from scratch on the quantized grid of the whole series.
pub fn exhaustive_split(series: &TimeSeries, seg: Segment, alpha: Alpha, min_size: usize) -> Option<SplitCandidate> {
    let q = Quantizer::for_series(series, alpha);
    let d = |i: usize, j: usize| -> u128 {
        q.quantize(alpha_distance(series.row(i - 1), series.row(j - 1), alpha).unwrap()) as u128
    };
    let mut best: Option<SplitCandidate> = None;
    for tau in seg.start..=seg.end {
        for kappa in (tau + 1)..=seg.end {
            let n = tau - seg.start + 1;
            let m = kappa - tau;
            if n < min_size || m < min_size {
                continue;
            }
            let (mut b, mut wx, mut wy) = (0u128, 0u128, 0u128);
            for i in seg.start..=tau {
                for j in (tau + 1)..=kappa {
                    b += d(i, j);
                }
                for k in (i + 1)..=tau {
                    wx += d(i, k);
                }
            }
            for j in (tau + 1)..=kappa {
                for k in (j + 1)..=kappa {
                    wy += d(j, k);
                }
            }
            let sums = PairSums {
                between: b,
                within_x: wx,
                within_y: wy,
            };
            let qhat = sums.scaled(&q, n, m);
            if best.is_none_or(|c| qhat > c.qhat + TIE_TOLERANCE) {
                best = Some(SplitCandidate { tau, kappa, qhat });
            }
        }
    }
    best
}

pub fn cluster_of(p: &Partition, t: usize) -> usize {
    p.boundaries().iter().filter(|&&b| b < t).count()
}

/// Rand index by enumerating all C(T, 2) pairs.
pub fn rand_brute(u: &Partition, v: &Partition) -> f64 {
    let t = u.len();
    let (mut agree, mut total) = (0u64, 0u64);
    for i in 1..=t {
        for j in (i + 1)..=t {
            let su = cluster_of(u, i) == cluster_of(u, j);
            let sv = cluster_of(v, i) == cluster_of(v, j);
            agree += u64::from(su == sv);
            total += 1;
        }
    }
    agree as f64 / total as f64
}

fn choose2(n: f64) -> f64 {
    n * (n - 1.0) / 2.0
}

/// Hubert–Arabie adjusted index from a dense contingency table.
pub fn hubert_arabie(u: &[usize], v: &[usize]) -> f64 {
    let ku = u.iter().max().unwrap() + 1;
    let kv = v.iter().max().unwrap() + 1;
    let mut table = vec![vec![0f64; kv]; ku];
    for (&a, &b) in u.iter().zip(v) {
        table[a][b] += 1.0;
    }
    let index: f64 = table.iter().flatten().map(|&c| choose2(c)).sum();
    let rows: f64 = table.iter().map(|r| choose2(r.iter().sum())).sum();
    let cols: f64 = (0..kv).map(|j| choose2(table.iter().map(|r| r[j]).sum())).sum();
    let expected = rows * cols / choose2(u.len() as f64);
    let max = (rows + cols) / 2.0;
    (index - expected) / (max - expected)
}

pub fn random_partition<R: Rng>(rng: &mut R, len: usize, max_cps: usize) -> Partition {
    let k = rng.random_range(0..=max_cps.min(len - 1));
    let mut b: Vec<usize> = rand::seq::index::sample(rng, len - 1, k).into_iter().map(|i| i + 1).collect();
    b.sort_unstable();
    Partition::new(b, len).unwrap()
}

/// Every partition whose boundaries are a subset of `init`'s.
pub fn coarsenings(init: &Partition) -> Vec<Partition> {
    let b = init.boundaries();
    (0u64..1 << b.len())
        .map(|mask| {
            let kept = b
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &x)| x)
                .collect();
            Partition::new(kept, init.len()).unwrap()
        })
        .collect()
}

pub fn normal_series<R: Rng>(rng: &mut R, segments: &[(usize, f64)]) -> TimeSeries {
    use rand_distr::{Distribution, StandardNormal};
    let mut v = Vec::new();
    for &(len, mean) in segments {
        for _ in 0..len {
            let z: f64 = StandardNormal.sample(rng);
            v.push(mean + z);
        }
    }
    TimeSeries::from_values(v).unwrap()
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Random initial clustering with cluster sizes between 2 and 12.
pub fn random_init<R: Rng>(rng: &mut R, len: usize) -> energy_cpd::agglo::InitialClustering {
    loop {
        let mut sizes = Vec::new();
        let mut left = len;
        while left >= 4 {
            let s = rng.random_range(2..=(left - 2).min(12));
            sizes.push(s);
            left -= s;
        }
        if left > 0 {
            if left < 2 {
                *sizes.last_mut().unwrap() += left;
            } else {
                sizes.push(left);
            }
        }
        if sizes.len() >= 2 {
            return energy_cpd::agglo::InitialClustering::new(Partition::from_sizes(&sizes).unwrap()).unwrap();
        }
    }
}
