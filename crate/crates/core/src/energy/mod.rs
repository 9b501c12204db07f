// SPDX-License-Identifier: MIT OR Apache-2.0

//! Pairwise α-distances and the two-sample energy statistics Ê and Q̂.

pub mod exact;
mod matrix;
pub mod scan;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use exact::{PairSums, Quantizer};

pub use matrix::DistanceMatrix;
pub(crate) use matrix::series_block;
pub use scan::{improves, scan_block, LocalSplit, TIE_TOLERANCE};

/// Distance exponent α, restricted to the open interval (0, 2).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Alpha(f64);

impl Alpha {
    pub const ONE: Alpha = Alpha(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value < 2.0 {
            Ok(Self(value))
        } else {
            Err(Error::invalid(format!("alpha must lie in (0, 2); got {value}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for Alpha {
    fn default() -> Self {
        Self::ONE
    }
}

impl TryFrom<f64> for Alpha {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<Alpha> for f64 {
    fn from(a: Alpha) -> f64 {
        a.0
    }
}

/// A `T × d` matrix of time-ordered observations, stored row-major.
///
/// Rows are addressed by 0-based offset; every other type in the crate that
/// carries a *time index* uses 1-based indices (`row(t - 1)` is observation `t`).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    data: Vec<f64>,
    len: usize,
    dim: usize,
}

impl TimeSeries {
    pub fn new(data: Vec<f64>, len: usize, dim: usize) -> Result<Self> {
        if len == 0 || dim == 0 {
            return Err(Error::invalid(format!(
                "time series needs T >= 1 and d >= 1; got T={len}, d={dim}"
            )));
        }
        if data.len() != len * dim {
            return Err(Error::invalid(format!(
                "expected {len} x {dim} = {} values, got {}",
                len * dim,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite value {} at observation {}, column {}",
                data[pos],
                pos / dim + 1,
                pos % dim + 1
            )));
        }
        Ok(Self { data, len, dim })
    }

    /// Univariate series.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let len = values.len();
        Self::new(values, len, 1)
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::invalid(format!(
                    "observation {} has {} columns, expected {dim}",
                    i + 1,
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::new(data, rows.len(), dim)
    }

    /// Number of observations T.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Dimension d.
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, offset: usize) -> &[f64] {
        &self.data[offset * self.dim..(offset + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// A new series with observations in the given offset order.
    pub fn reordered(&self, order: &[usize]) -> Self {
        let mut data = Vec::with_capacity(order.len() * self.dim);
        for &i in order {
            data.extend_from_slice(self.row(i));
        }
        Self {
            data,
            len: order.len(),
            dim: self.dim,
        }
    }
}

/// Inclusive range of 1-based time indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
}

impl Segment {
    pub fn new(start: usize, end: usize) -> Result<Self> {
        if start == 0 || start > end {
            return Err(Error::invalid(format!(
                "segment needs 1 <= start <= end; got [{start}, {end}]"
            )));
        }
        Ok(Self { start, end })
    }

    /// The whole series `[1, T]`.
    pub fn whole(series: &TimeSeries) -> Self {
        Self {
            start: 1,
            end: series.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// 0-based offset of the first observation.
    pub fn offset(&self) -> usize {
        self.start - 1
    }
}

/// A proposed split of a segment: left sample `start..=tau`, right sample
/// `tau+1..=kappa` (1-based time indices).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitCandidate {
    pub tau: usize,
    pub kappa: usize,
    pub qhat: f64,
}

impl SplitCandidate {
    pub(crate) fn from_local(seg_offset: usize, local: LocalSplit) -> Self {
        Self {
            tau: seg_offset + local.tau + 1,
            kappa: seg_offset + local.kappa + 1,
            qhat: local.qhat,
        }
    }
}

#[inline]
pub(crate) fn alpha_distance_unchecked(a: &[f64], b: &[f64], alpha: Alpha) -> f64 {
    let norm = if a.len() == 1 {
        (a[0] - b[0]).abs()
    } else {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    };
    if alpha.0 == 1.0 {
        norm
    } else {
        norm.powf(alpha.0)
    }
}

/// `|a - b|^α` with the Euclidean norm.
pub fn alpha_distance(a: &[f64], b: &[f64], alpha: Alpha) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "dimension mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite coordinate"));
    }
    Ok(alpha_distance_unchecked(a, b, alpha))
}

fn check_samples<X: AsRef<[f64]>, Y: AsRef<[f64]>>(x: &[X], y: &[Y]) -> Result<usize> {
    if x.len() < 2 || y.len() < 2 {
        return Err(Error::InsufficientSample {
            n: x.len(),
            m: y.len(),
        });
    }
    let dim = x[0].as_ref().len();
    for v in x.iter().map(AsRef::as_ref).chain(y.iter().map(AsRef::as_ref)) {
        if v.len() != dim {
            return Err(Error::invalid(format!(
                "dimension mismatch: {} vs {dim}",
                v.len()
            )));
        }
        if v.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("non-finite coordinate"));
        }
    }
    Ok(dim)
}

/// Exact pair sums and the grid they were accumulated on.
pub fn pair_sums<X: AsRef<[f64]>, Y: AsRef<[f64]>>(
    x: &[X],
    y: &[Y],
    alpha: Alpha,
) -> Result<(PairSums, Quantizer)> {
    let dim = check_samples(x, y)?;
    let q = Quantizer::for_rows(
        x.iter().map(AsRef::as_ref).chain(y.iter().map(AsRef::as_ref)),
        dim,
        alpha,
    );
    let d = |a: &[f64], b: &[f64]| q.quantize(alpha_distance_unchecked(a, b, alpha)) as u128;
    let within = |s: &[&[f64]]| -> u128 {
        let mut acc = 0;
        for (i, a) in s.iter().enumerate() {
            for b in &s[i + 1..] {
                acc += d(a, b);
            }
        }
        acc
    };
    let xs: Vec<&[f64]> = x.iter().map(AsRef::as_ref).collect();
    let ys: Vec<&[f64]> = y.iter().map(AsRef::as_ref).collect();
    let mut between = 0;
    for a in &xs {
        for b in &ys {
            between += d(a, b);
        }
    }
    let sums = PairSums {
        between,
        within_x: within(&xs),
        within_y: within(&ys),
    };
    Ok((sums, q))
}

/// Ê(X, Y; α): mean between-sample distance, doubled, minus both
/// within-sample U-statistics. May be negative on finite samples.
pub fn empirical_divergence<X: AsRef<[f64]>, Y: AsRef<[f64]>>(
    x: &[X],
    y: &[Y],
    alpha: Alpha,
) -> Result<f64> {
    let (sums, q) = pair_sums(x, y, alpha)?;
    Ok(sums.divergence(&q, x.len(), y.len()))
}

/// Q̂(X, Y; α) = mn/(m+n) · Ê(X, Y; α).
pub fn scaled_divergence<X: AsRef<[f64]>, Y: AsRef<[f64]>>(
    x: &[X],
    y: &[Y],
    alpha: Alpha,
) -> Result<f64> {
    let (sums, q) = pair_sums(x, y, alpha)?;
    Ok(sums.scaled(&q, x.len(), y.len()))
}

pub(crate) fn check_min_size(min_size: usize) -> Result<()> {
    if min_size < 2 {
        return Err(Error::invalid(format!("min_size must be >= 2; got {min_size}")));
    }
    Ok(())
}

/// The (τ, κ) maximizing Q̂ inside `seg`, or `None` when the segment is
/// shorter than `2 * min_size`.
///
/// Distances are quantized on a grid derived from the whole series, so the
/// result matches the segment scans performed by the divisive procedure.
pub fn best_split(
    series: &TimeSeries,
    seg: Segment,
    alpha: Alpha,
    min_size: usize,
) -> Result<Option<SplitCandidate>> {
    check_min_size(min_size)?;
    if seg.start == 0 || seg.end > series.len() || seg.start > seg.end {
        return Err(Error::invalid(format!(
            "segment [{}, {}] outside 1..={}",
            seg.start,
            seg.end,
            series.len()
        )));
    }
    if seg.len() < 2 * min_size {
        return Ok(None);
    }
    let q = Quantizer::for_series(series, alpha);
    let block = series_block(series, seg.offset(), seg.len(), alpha, &q);
    Ok(scan_block(&block, seg.len(), min_size, &q).map(|s| SplitCandidate::from_local(seg.offset(), s)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a1() -> Alpha {
        Alpha::ONE
    }

    #[test]
    fn alpha_range_is_open() {
        assert!(Alpha::new(0.0).is_err());
        assert!(Alpha::new(2.0).is_err());
        assert!(Alpha::new(f64::NAN).is_err());
        assert!(Alpha::new(1e-9).is_ok());
        assert!(Alpha::new(1.999).is_ok());
    }

    #[test]
    fn alpha_distance_examples() {
        assert_eq!(alpha_distance(&[0.0, 0.0], &[0.0, 0.0], a1()).unwrap(), 0.0);
        assert_eq!(alpha_distance(&[0.0], &[3.0], a1()).unwrap(), 3.0);
        let d = alpha_distance(&[0.0, 0.0], &[3.0, 4.0], Alpha::new(0.5).unwrap()).unwrap();
        assert!((d - 5f64.sqrt()).abs() < 1e-15);
        assert!(alpha_distance(&[0.0], &[1.0, 2.0], a1()).is_err());
    }

    #[test]
    fn divergence_examples() {
        let e = |x: &[f64], y: &[f64]| {
            let x: Vec<[f64; 1]> = x.iter().map(|&v| [v]).collect();
            let y: Vec<[f64; 1]> = y.iter().map(|&v| [v]).collect();
            (
                empirical_divergence(&x, &y, a1()).unwrap(),
                scaled_divergence(&x, &y, a1()).unwrap(),
            )
        };
        assert_eq!(e(&[0.0, 0.0], &[0.0, 0.0]), (0.0, 0.0));
        let (ed, qd) = e(&[0.0, 1.0], &[2.0, 3.0]);
        assert!((ed - 2.0).abs() < 1e-15 && (qd - 2.0).abs() < 1e-15);
        let (ed, _) = e(&[0.0, 1.0], &[0.0, 1.0]);
        assert!((ed + 1.0).abs() < 1e-15);
        let (_, qd) = e(&[0.0, 0.0, 1.0, 1.0], &[2.0, 2.0]);
        assert!((qd - 28.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn small_samples_are_rejected() {
        let r = empirical_divergence(&[[0.0]], &[[1.0], [2.0]], a1());
        assert!(matches!(r, Err(Error::InsufficientSample { n: 1, m: 2 })));
        let r = empirical_divergence(&[[0.0], [1.0]], &[[1.0, 2.0], [2.0, 3.0]], a1());
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn time_series_validation() {
        assert!(TimeSeries::from_values(vec![]).is_err());
        assert!(TimeSeries::from_values(vec![1.0, f64::NAN]).is_err());
        assert!(TimeSeries::from_rows(&[vec![1.0, 2.0], vec![1.0]]).is_err());
        let s = TimeSeries::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!((s.len(), s.dim()), (2, 2));
        assert_eq!(s.row(1), &[3.0, 4.0]);
    }

    #[test]
    fn best_split_examples() {
        let s = TimeSeries::from_values(vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        let c = best_split(&s, Segment::whole(&s), a1(), 2).unwrap().unwrap();
        assert_eq!((c.tau, c.kappa), (2, 4));
        assert!((c.qhat - 2.0).abs() < 1e-15);

        let s = TimeSeries::from_values(vec![0.0; 60]).unwrap();
        let c = best_split(&s, Segment::whole(&s), a1(), 30).unwrap().unwrap();
        assert_eq!((c.tau, c.kappa, c.qhat), (30, 60, 0.0));

        let s = TimeSeries::from_values(vec![0.0, 0.0, 0.0, 10.0, 10.0, 10.0]).unwrap();
        let c = best_split(&s, Segment::whole(&s), a1(), 2).unwrap().unwrap();
        assert_eq!(c.tau, 3);
    }

    #[test]
    fn best_split_short_and_invalid() {
        let s = TimeSeries::from_values((0..10).map(f64::from).collect()).unwrap();
        assert_eq!(best_split(&s, Segment::whole(&s), a1(), 6).unwrap(), None);
        assert!(best_split(&s, Segment::whole(&s), a1(), 1).is_err());
        assert!(best_split(&s, Segment { start: 3, end: 11 }, a1(), 2).is_err());
        let c = best_split(&s, Segment::new(3, 8).unwrap(), a1(), 3).unwrap().unwrap();
        assert_eq!((c.tau, c.kappa), (5, 8));
    }
}
