// SPDX-License-Identifier: MIT OR Apache-2.0

//! The (τ, κ) split scan over one contiguous segment.

use super::exact::{PairSums, Quantizer};

/// Absolute tolerance under which two statistics count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Best split of a block, in offsets local to the block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalSplit {
    /// Offset of the last element of the left sample.
    pub tau: usize,
    /// Offset of the last element of the right sample.
    pub kappa: usize,
    pub qhat: f64,
}

/// `true` when `candidate` beats `incumbent` under the scan order tie rule.
#[inline]
pub fn improves(candidate: f64, incumbent: f64) -> bool {
    candidate > incumbent + TIE_TOLERANCE
}

/// Maximizes Q̂ over every admissible (τ, κ) of a `len × len` distance block.
///
/// Left sample: offsets `0..=tau`; right sample: `tau+1..=kappa`; both hold at
/// least `min_size` observations. Pairs are visited with τ ascending, then κ
/// ascending, and a later pair only replaces the incumbent when it is larger
/// by more than [`TIE_TOLERANCE`].
///
/// Running sums are updated incrementally: advancing τ adds one row to the
/// per-column left sums (O(len)), advancing κ adds one column (O(1)).
pub fn scan_block(block: &[u64], len: usize, min_size: usize, q: &Quantizer) -> Option<LocalSplit> {
    debug_assert_eq!(block.len(), len * len);
    let min_size = min_size.max(2);
    if len < 2 * min_size {
        return None;
    }

    // upper[k] = sum_{j<k} D[j][k]
    let upper: Vec<u128> = (0..len)
        .map(|k| block[k * len..k * len + k].iter().map(|&v| v as u128).sum())
        .collect();
    // left_cols[k] = sum_{i<=tau} D[i][k] for k > tau
    let mut left_cols = vec![0u128; len];
    let mut within_x: u128 = 0;
    let mut best: Option<LocalSplit> = None;

    for tau in 0..=(len - min_size - 1) {
        let row = &block[tau * len..(tau + 1) * len];
        for k in (tau + 1)..len {
            left_cols[k] += row[k] as u128;
        }
        within_x += upper[tau];
        let n = tau + 1;
        if n < min_size {
            continue;
        }
        let mut between: u128 = 0;
        let mut within_y: u128 = 0;
        for kappa in (tau + 1)..len {
            between += left_cols[kappa];
            within_y += upper[kappa] - left_cols[kappa];
            let m = kappa - tau;
            if m < min_size {
                continue;
            }
            let sums = PairSums {
                between,
                within_x,
                within_y,
            };
            let qhat = sums.scaled(q, n, m);
            if best.is_none_or(|b| improves(qhat, b.qhat)) {
                best = Some(LocalSplit { tau, kappa, qhat });
            }
        }
    }
    best
}
