// SPDX-License-Identifier: MIT OR Apache-2.0

//! Fixed-point accumulation of pairwise distances.
//!
//! Each α-distance is mapped to a `u64` on a power-of-two grid chosen from an
//! upper bound on the distances of the data set, and sums are kept in `u128`.
//! Integer sums are associative, so a statistic reached through an
//! incremental update is bit-identical to the same statistic summed from
//! scratch. The grid step is `bound * 2^-62`, well below the rounding error of
//! an `f64` distance.

use super::{Alpha, TimeSeries};

const GRID_BITS: i32 = 62;
const TWO_POW_64: f64 = 18_446_744_073_709_551_616.0;

/// Maps nonnegative reals in `[0, bound]` onto the fixed-point grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantizer {
    scale: f64,
    inv_scale: f64,
}

impl Quantizer {
    /// Grid for values no larger than `bound`.
    pub fn with_bound(bound: f64) -> Self {
        let exp = if bound > 0.0 && bound.is_finite() {
            // bound < 2^e
            let e = bound.log2().floor() as i32 + 1;
            GRID_BITS - e
        } else {
            0
        };
        Self {
            scale: pow2(exp),
            inv_scale: pow2(-exp),
        }
    }

    /// Grid covering every α-distance between rows of `rows` (an upper bound
    /// from the bounding-box diagonal).
    pub fn for_rows<'a, I>(rows: I, dim: usize, alpha: Alpha) -> Self
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for row in rows {
            for ((l, h), &v) in lo.iter_mut().zip(hi.iter_mut()).zip(row) {
                *l = l.min(v);
                *h = h.max(v);
            }
        }
        let diag2: f64 = lo
            .iter()
            .zip(&hi)
            .filter(|(l, h)| l.is_finite() && h.is_finite())
            .map(|(l, h)| (h - l) * (h - l))
            .sum();
        Self::with_bound(diag2.sqrt().powf(alpha.value()))
    }

    pub fn for_series(series: &TimeSeries, alpha: Alpha) -> Self {
        Self::for_rows(series.rows(), series.dim(), alpha)
    }

    #[inline]
    pub fn quantize(&self, value: f64) -> u64 {
        // `as` saturates; values within the bound stay below 2^62.
        (value * self.scale) as u64
    }

    /// Real value of an accumulated sum.
    #[inline]
    pub fn to_real(&self, sum: u128) -> f64 {
        let hi = (sum >> 64) as u64;
        let lo = sum as u64;
        (hi as f64 * TWO_POW_64 + lo as f64) * self.inv_scale
    }

    /// Real value of a signed combination of sums.
    #[inline]
    pub fn to_real_signed(&self, value: i128) -> f64 {
        let magnitude = self.to_real(value.unsigned_abs());
        if value < 0 {
            -magnitude
        } else {
            magnitude
        }
    }
}

fn bit_length(v: u128) -> u32 {
    128 - v.leading_zeros()
}

fn pow2(exp: i32) -> f64 {
    2f64.powi(exp)
}

/// Ê from real-valued pair sums of samples of sizes `n` and `m`.
#[inline]
pub fn divergence_from_sums(between: f64, within_x: f64, within_y: f64, n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    // The two within terms are added before subtracting so that swapping
    // the samples gives a bit-identical result.
    2.0 * between / (n * m) - (2.0 * within_x / (n * (n - 1.0)) + 2.0 * within_y / (m * (m - 1.0)))
}

/// Q̂ = mn/(m+n) · Ê, expanded so each term takes a single division.
#[inline]
pub fn scaled_from_sums(between: f64, within_x: f64, within_y: f64, n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    let total = n + m;
    2.0 * between / total
        - (2.0 * m * within_x / (total * (n - 1.0)) + 2.0 * n * within_y / (total * (m - 1.0)))
}

/// Exact pair sums for a two-sample statistic.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PairSums {
    pub between: u128,
    pub within_x: u128,
    pub within_y: u128,
}

impl PairSums {
    /// `B(n−1)(m−1) − W_x·m(m−1) − W_y·n(n−1)`, the numerator shared by Ê
    /// and Q̂ over a common denominator, or `None` on overflow.
    ///
    /// Combining the sums in integers leaves only the final division to
    /// round, so the result is accurate relative to Ê itself even when the
    /// three terms nearly cancel.
    pub fn numerator(&self, n: usize, m: usize) -> Option<i128> {
        let (n, m) = (n as u128, m as u128);
        let weights = [(n - 1) * (m - 1), m * (m - 1), n * (n - 1)];
        let sums = [self.between, self.within_x, self.within_y];
        // Each product below 2^125 keeps the signed combination in range.
        // Bit lengths give the bound without a checked 128-bit multiply,
        // which is a library call and dominates the split scan.
        let fits = sums
            .iter()
            .zip(&weights)
            .all(|(s, w)| bit_length(*s) + bit_length(*w) <= 125);
        if !fits {
            return None;
        }
        let [b, wx, wy] = [0, 1, 2].map(|i| (sums[i] * weights[i]) as i128);
        Some(b - wx - wy)
    }

    /// Ê for samples of sizes `n` and `m` (both at least 2).
    pub fn divergence(&self, q: &Quantizer, n: usize, m: usize) -> f64 {
        match self.numerator(n, m) {
            Some(num) => {
                let (nf, mf) = (n as f64, m as f64);
                2.0 * q.to_real_signed(num) / (nf * (nf - 1.0) * mf * (mf - 1.0))
            }
            None => divergence_from_sums(
                q.to_real(self.between),
                q.to_real(self.within_x),
                q.to_real(self.within_y),
                n,
                m,
            ),
        }
    }

    /// Q̂ = mn/(m+n) · Ê for samples of sizes `n` and `m` (both at least 2).
    pub fn scaled(&self, q: &Quantizer, n: usize, m: usize) -> f64 {
        match self.numerator(n, m) {
            Some(num) => {
                let (nf, mf) = (n as f64, m as f64);
                2.0 * q.to_real_signed(num) / ((nf + mf) * (nf - 1.0) * (mf - 1.0))
            }
            None => scaled_from_sums(
                q.to_real(self.between),
                q.to_real(self.within_x),
                q.to_real(self.within_y),
                n,
                m,
            ),
        }
    }
}
