// SPDX-License-Identifier: MIT OR Apache-2.0

use super::exact::Quantizer;
use super::{alpha_distance_unchecked, Alpha, TimeSeries};

/// Symmetric matrix of quantized α-distances between all observations.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    n: usize,
    quantizer: Quantizer,
    cells: Vec<u64>,
}

impl DistanceMatrix {
    pub fn new(series: &TimeSeries, alpha: Alpha) -> Self {
        let quantizer = Quantizer::for_series(series, alpha);
        Self::with_quantizer(series, alpha, quantizer)
    }

    pub fn with_quantizer(series: &TimeSeries, alpha: Alpha, quantizer: Quantizer) -> Self {
        let n = series.len();
        let mut cells = vec![0u64; n * n];
        for i in 0..n {
            let a = series.row(i);
            for j in (i + 1)..n {
                let v = quantizer.quantize(alpha_distance_unchecked(a, series.row(j), alpha));
                cells[i * n + j] = v;
                cells[j * n + i] = v;
            }
        }
        Self {
            n,
            quantizer,
            cells,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn quantizer(&self) -> &Quantizer {
        &self.quantizer
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.cells[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.cells[i * self.n..(i + 1) * self.n]
    }

    /// Row-major block for the contiguous offsets `start..start + len`.
    pub fn block(&self, start: usize, len: usize) -> Vec<u64> {
        let mut out = Vec::with_capacity(len * len);
        for i in start..start + len {
            out.extend_from_slice(&self.row(i)[start..start + len]);
        }
        out
    }

    /// Row-major block for the observations `order[0], order[1], ...`.
    pub fn gather(&self, order: &[usize]) -> Vec<u64> {
        let mut out = Vec::with_capacity(order.len() * order.len());
        for &i in order {
            let row = self.row(i);
            out.extend(order.iter().map(|&j| row[j]));
        }
        out
    }
}

/// Quantized distance block for the rows `start..start + len` only.
pub(crate) fn series_block(
    series: &TimeSeries,
    start: usize,
    len: usize,
    alpha: Alpha,
    quantizer: &Quantizer,
) -> Vec<u64> {
    let mut out = vec![0u64; len * len];
    for i in 0..len {
        let a = series.row(start + i);
        for j in (i + 1)..len {
            let v = quantizer.quantize(alpha_distance_unchecked(a, series.row(start + j), alpha));
            out[i * len + j] = v;
            out[j * len + i] = v;
        }
    }
    out
}
