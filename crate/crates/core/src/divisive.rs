// SPDX-License-Identifier: MIT OR Apache-2.0

//! E-Divisive: repeated bisection of the current clusters, each new change
//! point accepted only if a within-cluster permutation test finds it
//! significant.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{
    check_min_size, improves, scan_block, Alpha, DistanceMatrix, SplitCandidate, TimeSeries,
};
use crate::error::{Error, Result};
use crate::eval::Partition;
use crate::rng;

pub const DEFAULT_MIN_SIZE: usize = 30;
pub const DEFAULT_PERMUTATIONS: usize = 499;
pub const DEFAULT_SIGNIFICANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivisiveConfig {
    pub alpha: Alpha,
    pub min_size: usize,
    /// Number of permutations R per test.
    pub permutations: usize,
    /// Significance level p₀.
    pub significance: f64,
    /// Hard cap on accepted change points; `None` means unlimited.
    pub max_change_points: Option<usize>,
    pub seed: u64,
}

impl Default for DivisiveConfig {
    fn default() -> Self {
        Self {
            alpha: Alpha::ONE,
            min_size: DEFAULT_MIN_SIZE,
            permutations: DEFAULT_PERMUTATIONS,
            significance: DEFAULT_SIGNIFICANCE,
            max_change_points: None,
            seed: 0,
        }
    }
}

impl DivisiveConfig {
    pub fn validate(&self) -> Result<()> {
        check_min_size(self.min_size)?;
        if self.permutations == 0 {
            return Err(Error::invalid("number of permutations must be >= 1"));
        }
        if !(self.significance > 0.0 && self.significance < 1.0) {
            return Err(Error::invalid(format!(
                "significance level must lie in (0, 1); got {}",
                self.significance
            )));
        }
        Ok(())
    }
}

/// One iteration of the procedure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivisiveStep {
    /// 1-based iteration number k.
    pub order: usize,
    /// 1-based index of the cluster that was split.
    pub cluster: usize,
    pub tau_hat: usize,
    pub kappa_hat: usize,
    pub qhat: f64,
    /// Number of permuted statistics at least as large as `qhat`.
    pub exceedances: usize,
    pub pvalue: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivisiveResult {
    pub estimates: Vec<DivisiveStep>,
    pub final_partition: Partition,
    pub config: DivisiveConfig,
    pub total_permutations: usize,
}

impl DivisiveResult {
    /// Accepted change points, sorted.
    pub fn change_points(&self) -> &[usize] {
        self.final_partition.boundaries()
    }
}

/// Precomputed distances shared by every scan of one series.
pub struct Detector<'a> {
    series: &'a TimeSeries,
    matrix: DistanceMatrix,
    cfg: DivisiveConfig,
}

impl<'a> Detector<'a> {
    pub fn new(series: &'a TimeSeries, cfg: DivisiveConfig) -> Result<Self> {
        cfg.validate()?;
        let matrix = DistanceMatrix::new(series, cfg.alpha);
        Ok(Self {
            series,
            matrix,
            cfg,
        })
    }

    pub fn series(&self) -> &TimeSeries {
        self.series
    }

    fn check_partition(&self, partition: &Partition) -> Result<()> {
        if partition.len() != self.series.len() {
            return Err(Error::invalid(format!(
                "partition covers {} observations, series has {}",
                partition.len(),
                self.series.len()
            )));
        }
        Ok(())
    }

    /// Best split across all clusters of `partition`, with the 0-based index
    /// of the cluster it falls in.
    pub fn propose_next(&self, partition: &Partition) -> Result<Option<(usize, SplitCandidate)>> {
        self.check_partition(partition)?;
        let mut best: Option<(usize, SplitCandidate)> = None;
        for (i, seg) in partition.segments().enumerate() {
            let block = self.matrix.block(seg.offset(), seg.len());
            let Some(local) = scan_block(&block, seg.len(), self.cfg.min_size, self.matrix.quantizer())
            else {
                continue;
            };
            if best.is_none_or(|(_, b)| improves(local.qhat, b.qhat)) {
                best = Some((i, SplitCandidate::from_local(seg.offset(), local)));
            }
        }
        Ok(best)
    }

    /// Largest Q̂ over all clusters after shuffling observations within each
    /// cluster with permutation stream `(step, replicate)`.
    fn permuted_max(&self, partition: &Partition, step: usize, replicate: usize) -> f64 {
        let mut rng = rng::substream(self.cfg.seed, step as u64, replicate as u64);
        let q = self.matrix.quantizer();
        let mut best = f64::NEG_INFINITY;
        let mut order = Vec::new();
        for seg in partition.segments() {
            order.clear();
            order.extend(seg.offset()..seg.offset() + seg.len());
            order.shuffle(&mut rng);
            if seg.len() < 2 * self.cfg.min_size {
                continue;
            }
            let block = self.matrix.gather(&order);
            if let Some(s) = scan_block(&block, seg.len(), self.cfg.min_size, q) {
                best = best.max(s.qhat);
            }
        }
        best
    }

    /// Number of replicates `r = 1..=R` whose permuted maximum reaches
    /// `observed`. Replicates run in parallel; the count does not depend on
    /// scheduling.
    pub fn exceedances(&self, partition: &Partition, observed: f64, step: usize) -> Result<usize> {
        self.check_partition(partition)?;
        Ok((0..self.cfg.permutations)
            .into_par_iter()
            .filter(|&r| self.permuted_max(partition, step, r) >= observed)
            .count())
    }

    /// Approximate p-value `#{r : q̂⁽ʳ⁾ ≥ q̂} / (R + 1)`.
    pub fn permutation_pvalue(&self, partition: &Partition, observed: f64, step: usize) -> Result<f64> {
        let hits = self.exceedances(partition, observed, step)?;
        Ok(pvalue(hits, self.cfg.permutations))
    }

    pub fn run(&self) -> Result<DivisiveResult> {
        let cfg = &self.cfg;
        let mut partition = Partition::trivial(self.series.len());
        let mut estimates = Vec::new();
        let mut total_permutations = 0;
        loop {
            if cfg
                .max_change_points
                .is_some_and(|cap| partition.boundaries().len() >= cap)
            {
                break;
            }
            let Some((cluster, cand)) = self.propose_next(&partition)? else {
                break;
            };
            let order = estimates.len() + 1;
            let hits = self.exceedances(&partition, cand.qhat, order)?;
            total_permutations += cfg.permutations;
            let p = pvalue(hits, cfg.permutations);
            let significant = p < cfg.significance;
            estimates.push(DivisiveStep {
                order,
                cluster: cluster + 1,
                tau_hat: cand.tau,
                kappa_hat: cand.kappa,
                qhat: cand.qhat,
                exceedances: hits,
                pvalue: p,
                significant,
            });
            if !significant {
                break;
            }
            partition.insert(cand.tau)?;
        }
        Ok(DivisiveResult {
            estimates,
            final_partition: partition,
            config: cfg.clone(),
            total_permutations,
        })
    }
}

pub fn pvalue(exceedances: usize, permutations: usize) -> f64 {
    exceedances as f64 / (permutations + 1) as f64
}

/// Best split across clusters; the returned index is 0-based.
pub fn propose_next(
    series: &TimeSeries,
    partition: &Partition,
    cfg: &DivisiveConfig,
) -> Result<Option<(usize, SplitCandidate)>> {
    Detector::new(series, cfg.clone())?.propose_next(partition)
}

/// Permutation p-value of `observed_q` for the next split of `partition`.
/// `step` selects the random stream (the iteration number k in [`e_divisive`]).
pub fn permutation_pvalue(
    series: &TimeSeries,
    partition: &Partition,
    observed_q: f64,
    cfg: &DivisiveConfig,
    step: usize,
) -> Result<f64> {
    Detector::new(series, cfg.clone())?.permutation_pvalue(partition, observed_q, step)
}

pub fn e_divisive(series: &TimeSeries, cfg: &DivisiveConfig) -> Result<DivisiveResult> {
    Detector::new(series, cfg.clone())?.run()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(min_size: usize, permutations: usize) -> DivisiveConfig {
        DivisiveConfig {
            min_size,
            permutations,
            seed: 11,
            ..Default::default()
        }
    }

    #[test]
    fn pvalue_formula() {
        assert_eq!(pvalue(0, 499), 0.0);
        assert_eq!(pvalue(24, 499), 0.048);
        assert!(pvalue(24, 499) < 0.05);
        assert_eq!(pvalue(499, 499), 0.998);
    }

    #[test]
    fn config_validation() {
        assert!(cfg(1, 10).validate().is_err());
        assert!(cfg(2, 0).validate().is_err());
        let mut c = cfg(2, 10);
        c.significance = 1.0;
        assert!(c.validate().is_err());
        c.significance = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn propose_single_cluster() {
        let s = TimeSeries::from_values(vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        let (i, c) = propose_next(&s, &Partition::trivial(4), &cfg(2, 9)).unwrap().unwrap();
        assert_eq!((i, c.tau, c.kappa), (0, 2, 4));
        assert!((c.qhat - 2.0).abs() < 1e-15);
    }

    #[test]
    fn propose_none_when_clusters_short() {
        let s = TimeSeries::from_values((0..12).map(f64::from).collect()).unwrap();
        let p = Partition::new(vec![5], 12).unwrap();
        assert_eq!(propose_next(&s, &p, &cfg(4, 9)).unwrap(), None);
    }

    #[test]
    fn propose_picks_non_constant_cluster() {
        let s = TimeSeries::from_values(vec![3.0, 3.0, 3.0, 3.0, 3.0, 3.0, 0.0, 0.0, 0.0, 10.0, 10.0, 10.0])
            .unwrap();
        let p = Partition::new(vec![6], 12).unwrap();
        let (i, c) = propose_next(&s, &p, &cfg(2, 9)).unwrap().unwrap();
        assert_eq!(i, 1);
        assert_eq!(c.tau, 9);
        assert!(c.qhat > 0.0);
    }

    #[test]
    fn constant_series_never_significant() {
        let s = TimeSeries::from_values(vec![2.5; 40]).unwrap();
        let r = e_divisive(&s, &cfg(5, 19)).unwrap();
        assert!(r.change_points().is_empty());
        assert_eq!(r.estimates.len(), 1);
        assert_eq!(r.estimates[0].exceedances, 19);
        assert_eq!(r.estimates[0].pvalue, 19.0 / 20.0);
    }

    #[test]
    fn short_series_gives_empty_result() {
        let s = TimeSeries::from_values(vec![0.0, 1.0, 2.0]).unwrap();
        let r = e_divisive(&s, &cfg(2, 9)).unwrap();
        assert!(r.estimates.is_empty());
        assert_eq!(r.total_permutations, 0);
    }

    #[test]
    fn cap_limits_change_points() {
        let mut v = vec![0.0; 20];
        v.extend([10.0; 20]);
        v.extend([0.0; 20]);
        let s = TimeSeries::from_values(v).unwrap();
        let mut c = cfg(5, 49);
        c.max_change_points = Some(1);
        let r = e_divisive(&s, &c).unwrap();
        assert_eq!(r.change_points().len(), 1);
        assert!(r.estimates.iter().all(|e| e.significant));
        c.max_change_points = None;
        let r = e_divisive(&s, &c).unwrap();
        assert_eq!(r.change_points(), &[20, 40]);
    }
}
