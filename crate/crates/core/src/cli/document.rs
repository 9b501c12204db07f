// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agglo::{e_agglo, InitialClustering};
use crate::divisive::{e_divisive, DivisiveConfig};
use crate::energy::{Alpha, TimeSeries};
use crate::error::{Error, Result};
use crate::eval::Partition;

/// Rounds to 12 significant digits, the precision of every real written to
/// a result document.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Divisive,
    Agglo,
}

/// Detection settings, echoed into the result document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectConfig {
    pub method: Method,
    pub alpha: f64,
    pub min_size: usize,
    pub permutations: usize,
    pub significance: f64,
    pub max_change_points: Option<usize>,
    /// Width of the initial agglomerative clusters; defaults to `min_size`.
    pub init_width: Option<usize>,
    pub seed: u64,
}

impl Default for DetectConfig {
    fn default() -> Self {
        let d = DivisiveConfig::default();
        Self {
            method: Method::Divisive,
            alpha: d.alpha.value(),
            min_size: d.min_size,
            permutations: d.permutations,
            significance: d.significance,
            max_change_points: None,
            init_width: None,
            seed: d.seed,
        }
    }
}

impl DetectConfig {
    pub fn divisive(&self) -> Result<DivisiveConfig> {
        let cfg = DivisiveConfig {
            alpha: Alpha::new(self.alpha)?,
            min_size: self.min_size,
            permutations: self.permutations,
            significance: self.significance,
            max_change_points: self.max_change_points,
            seed: self.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub order: usize,
    pub tau: usize,
    pub kappa: usize,
    pub qhat: f64,
    pub exceedances: usize,
    pub pvalue: f64,
    pub significant: bool,
}

/// Serialized outcome of a detection run. Change points use the
/// last-index-of-left-cluster convention, 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub method: Method,
    #[serde(rename = "T")]
    pub len: usize,
    pub d: usize,
    pub change_points: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimates: Option<Vec<EstimateRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_permutations: Option<usize>,
    /// Ŝ_n, …, Ŝ_2 along the merge sequence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gof: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_k: Option<usize>,
    pub config: DetectConfig,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
}

impl ResultDocument {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text)?;
        Partition::new(doc.change_points.clone(), doc.len)?;
        Ok(doc)
    }

    pub fn partition(&self) -> Result<Partition> {
        Partition::new(self.change_points.clone(), self.len)
    }
}

/// Runs the configured procedure. Timing is left to the caller.
pub fn detect(series: &TimeSeries, cfg: &DetectConfig) -> Result<ResultDocument> {
    let mut doc = ResultDocument {
        method: cfg.method,
        len: series.len(),
        d: series.dim(),
        change_points: Vec::new(),
        estimates: None,
        total_permutations: None,
        gof: None,
        best_k: None,
        config: cfg.clone(),
        seed: cfg.seed,
        duration_s: None,
    };
    match cfg.method {
        Method::Divisive => {
            let result = e_divisive(series, &cfg.divisive()?)?;
            doc.change_points = result.change_points().to_vec();
            doc.total_permutations = Some(result.total_permutations);
            doc.estimates = Some(
                result
                    .estimates
                    .iter()
                    .map(|e| EstimateRecord {
                        order: e.order,
                        tau: e.tau_hat,
                        kappa: e.kappa_hat,
                        qhat: round_sig(e.qhat),
                        exceedances: e.exceedances,
                        pvalue: round_sig(e.pvalue),
                        significant: e.significant,
                    })
                    .collect(),
            );
        }
        Method::Agglo => {
            let alpha = Alpha::new(cfg.alpha)?;
            let width = cfg.init_width.unwrap_or(cfg.min_size);
            let init = InitialClustering::equal_width(series.len(), width)?;
            let trace = e_agglo(series, &init, alpha)?;
            // A sequence with no positive fit carries no evidence of change.
            let best = trace.gof[trace.initial_clusters() - trace.best_k];
            if best > 0.0 {
                doc.change_points = trace.best_partition.boundaries().to_vec();
            }
            doc.best_k = Some(trace.best_k);
            doc.gof = Some(trace.gof.iter().copied().map(round_sig).collect());
        }
    }
    Ok(doc)
}

/// Writes `segments.csv` (bounds, per-dimension means and variances of each
/// estimated segment) plus `estimates.csv` or `gof.csv` into `dir`.
pub fn emit_plot_data(dir: &Path, series: &TimeSeries, doc: &ResultDocument) -> Result<()> {
    fs::create_dir_all(dir)?;
    let partition = doc.partition()?;
    let csv_err = |e: csv::Error| Error::invalid(e.to_string());

    let mut w = csv::Writer::from_path(dir.join("segments.csv")).map_err(csv_err)?;
    let mut header = vec!["segment".to_string(), "start".into(), "end".into(), "length".into()];
    header.extend((1..=series.dim()).map(|j| format!("mean_{j}")));
    header.extend((1..=series.dim()).map(|j| format!("var_{j}")));
    w.write_record(&header).map_err(csv_err)?;
    for (i, seg) in partition.segments().enumerate() {
        let n = seg.len() as f64;
        let rows: Vec<&[f64]> = (seg.offset()..seg.end).map(|t| series.row(t)).collect();
        let mut rec = vec![(i + 1).to_string(), seg.start.to_string(), seg.end.to_string(), seg.len().to_string()];
        let means: Vec<f64> = (0..series.dim())
            .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n)
            .collect();
        let vars: Vec<f64> = (0..series.dim())
            .map(|j| {
                if seg.len() < 2 {
                    0.0
                } else {
                    rows.iter().map(|r| (r[j] - means[j]).powi(2)).sum::<f64>() / (n - 1.0)
                }
            })
            .collect();
        rec.extend(means.iter().chain(&vars).map(|v| round_sig(*v).to_string()));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;

    if let Some(est) = &doc.estimates {
        let mut w = csv::Writer::from_path(dir.join("estimates.csv")).map_err(csv_err)?;
        for e in est {
            w.serialize(e).map_err(csv_err)?;
        }
        w.flush()?;
    }
    if let Some(gof) = &doc.gof {
        let mut w = csv::Writer::from_path(dir.join("gof.csv")).map_err(csv_err)?;
        w.write_record(["k", "gof"]).map_err(csv_err)?;
        let n = gof.len() + 1;
        for (i, g) in gof.iter().enumerate() {
            w.write_record([(n - i).to_string(), g.to_string()]).map_err(csv_err)?;
        }
        w.flush()?;
    }
    Ok(())
}
