// SPDX-License-Identifier: MIT OR Apache-2.0

mod common;

use energy_cpd::divisive::DivisiveConfig;
use energy_cpd::simlab::{cholesky, generate, replicate_scenario, run_study, write_csv, Scenario, ScenarioKind};
use energy_cpd::energy::TimeSeries;

fn corr(s: &TimeSeries, rows: std::ops::Range<usize>, a: usize, b: usize) -> f64 {
    let n = rows.len() as f64;
    let xs: Vec<f64> = rows.clone().map(|t| s.row(t)[a]).collect();
    let ys: Vec<f64> = rows.map(|t| s.row(t)[b]).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

fn moments(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (m, v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
}

#[test]
fn bi_correlation_middle_is_correlated() {
    // A single r from 100 pairs leaves ±0.08 about 0.14% of the time, so
    // one miss in 100 draws is tolerated; the average must be tight.
    let (mut sum, mut outside) = (0.0, 0);
    for seed in 0..100 {
        let scn = Scenario::new(ScenarioKind::BiCorrelation { rho: 0.9 }, 300, seed).unwrap();
        let (s, truth) = generate(&scn).unwrap();
        assert_eq!(truth.boundaries(), &[100, 200]);
        let r = corr(&s, 100..200, 0, 1);
        sum += r;
        outside += usize::from((r - 0.9).abs() > 0.08);
    }
    assert!(outside <= 1, "{outside}");
    assert!((sum / 100.0 - 0.9).abs() < 0.01);
}

#[test]
fn dim_correlation_with_noise_touches_only_first_pair() {
    let scn = Scenario::new(ScenarioKind::DimCorrelation { dim: 9, noise: true, rho: 0.9 }, 30_000, 7).unwrap();
    let (s, _) = generate(&scn).unwrap();
    let mid = 10_000..20_000;
    for a in 0..9 {
        for b in a + 1..9 {
            let r = corr(&s, mid.clone(), a, b);
            if (a, b) == (0, 1) {
                assert!((r - 0.9).abs() < 0.01, "{r}");
            } else {
                assert!(r.abs() < 0.1, "({a},{b}) {r}");
            }
            assert!(corr(&s, 0..10_000, a, b).abs() < 0.1);
        }
    }
    let full = Scenario::new(ScenarioKind::DimCorrelation { dim: 5, noise: false, rho: 0.9 }, 30_000, 8).unwrap();
    let (s, _) = generate(&full).unwrap();
    for a in 0..5 {
        for b in a + 1..5 {
            assert!((corr(&s, 10_000..20_000, a, b) - 0.9).abs() < 0.01);
        }
    }
}

#[test]
fn univariate_middles_have_the_right_law() {
    let len = 60_000;
    let column = |kind| {
        let (s, _) = generate(&Scenario::new(kind, len, 3).unwrap()).unwrap();
        let mid: Vec<f64> = (len / 3..2 * len / 3).map(|t| s.row(t)[0]).collect();
        let flank: Vec<f64> = (0..len / 3).map(|t| s.row(t)[0]).collect();
        (moments(&mid), moments(&flank))
    };
    let ((m, v), (fm, fv)) = column(ScenarioKind::UniMean { mu: 2.0 });
    assert!((m - 2.0).abs() < 0.05 && (v - 1.0).abs() < 0.05);
    assert!(fm.abs() < 0.05 && (fv - 1.0).abs() < 0.05);
    let ((m, v), _) = column(ScenarioKind::UniVariance { variance: 4.0 });
    assert!(m.abs() < 0.1 && (v - 4.0).abs() < 0.2, "{v}");
    // t with ν = 5 has variance ν/(ν−2)
    let ((m, v), _) = column(ScenarioKind::UniTail { dof: 5.0 });
    assert!(m.abs() < 0.05 && (v - 5.0 / 3.0).abs() < 0.15, "{v}");
}

#[test]
fn generation_is_deterministic() {
    let scn = Scenario::new(ScenarioKind::BiMean { mu: 1.0 }, 90, 11).unwrap();
    assert_eq!(generate(&scn).unwrap().0, generate(&scn).unwrap().0);
    let other = replicate_scenario(&scn, 1);
    assert_ne!(generate(&scn).unwrap().0, generate(&other).unwrap().0);
}

#[test]
fn invalid_scenarios_rejected() {
    assert!(Scenario::new(ScenarioKind::UniMean { mu: 1.0 }, 100, 0).is_err());
    assert!(Scenario::new(ScenarioKind::UniVariance { variance: 0.0 }, 99, 0).is_err());
    assert!(Scenario::new(ScenarioKind::UniTail { dof: -1.0 }, 99, 0).is_err());
    assert!(Scenario::new(ScenarioKind::BiCorrelation { rho: 1.0 }, 99, 0).is_err());
    assert!(Scenario::new(ScenarioKind::DimCorrelation { dim: 1, noise: false, rho: 0.5 }, 99, 0).is_err());
    assert!(cholesky(&[1.0, 2.0, 2.0, 1.0], 2).is_err());
}

#[test]
fn single_replicate_has_zero_error() {
    let scn = Scenario::new(ScenarioKind::UniMean { mu: 3.0 }, 150, 1).unwrap();
    let det = DivisiveConfig { permutations: 49, ..Default::default() };
    let r = run_study(&scn, 1, &det).unwrap();
    assert_eq!(r.replications, 1);
    assert_eq!(r.se_rand, 0.0);
    assert_eq!(r.mean_rand, r.outcomes[0].rand);
}

#[test]
fn null_scenario_detects_at_about_p0() {
    let scn = Scenario::new(ScenarioKind::UniMean { mu: 0.0 }, 150, 5).unwrap();
    let det = DivisiveConfig { permutations: 99, ..Default::default() };
    let r = run_study(&scn, 100, &det).unwrap();
    let rate = r.outcomes.iter().filter(|o| !o.change_points.is_empty()).count() as f64 / 100.0;
    assert!(rate <= 0.12, "{rate}");
}

#[test]
fn study_is_deterministic_and_serializes() {
    let scn = Scenario::new(ScenarioKind::UniMean { mu: 2.0 }, 150, 9).unwrap();
    let det = DivisiveConfig { permutations: 49, ..Default::default() };
    let a = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| run_study(&scn, 8, &det).unwrap());
    let b = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap().install(|| run_study(&scn, 8, &det).unwrap());
    let strip = |r: &energy_cpd::simlab::StudyReport| -> Vec<(u64, Vec<usize>, f64)> {
        r.outcomes.iter().map(|o| (o.data_seed, o.change_points.clone(), o.rand)).collect()
    };
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(a.mean_rand, b.mean_rand);

    let mut buf = Vec::new();
    write_csv(std::slice::from_ref(&a), &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("scenario,param,d,noise,T,replications,mean_rand,se_rand"), "{header}");
    assert!(lines.next().unwrap().starts_with("uni-mean,2.0,1,false,150,8,"));
    let json = serde_json::to_value(&a).unwrap();
    assert_eq!(json["T"], 150);
    assert_eq!(json["generator"], energy_cpd::rng::GENERATOR_ID);
    assert!(json.get("outcomes").is_none());
}

