use super::*;

fn fast_sampler() -> SamplerConfig {
    SamplerConfig {
        sweeps: 40,
        burn_in: 20,
        ..SamplerConfig::default()
    }
}

#[test]
fn curve_values_match_closed_forms() {
    // Zero amplitude: identically zero.
    let flat = CurveForm::SinAmplitude { m: 0.0, period: 30.0 };
    for t in [0.0, 7.3, 30.0] {
        assert_eq!(flat.value(t).unwrap(), 0.0);
    }
    // Quadratic vertex hits the intercept exactly.
    let quad = CurveForm::Quadratic {
        a: 1.0 / 625.0,
        b: 0.25,
        t_mid: 25.0,
    };
    assert_eq!(quad.value(25.0).unwrap(), 0.25);
    // sin(0) = 0 at t = -b for the shifted sinusoid.
    let sin = CurveForm::Sinusoid {
        a: 1.0,
        b: 20.0,
        c: 5.0,
        d: 1.0,
    };
    assert!((sin.value(-20.0).unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn spiky_curves_are_seeded_per_replicate() {
    let scenario = scenario_preset(ScenarioKind::NonSmooth, 6, 8, 0, 2, 99).unwrap();
    let times = scenario_times(scenario.k);
    let a = phi_raw_at_times(&scenario, &times, 0);
    let a2 = phi_raw_at_times(&scenario, &times, 0);
    let b = phi_raw_at_times(&scenario, &times, 1);
    assert_eq!(a, a2);
    assert_ne!(a, b);
    // Per-time draws differ within a replicate.
    assert_ne!(a[0][0], a[1][0]);
}

#[test]
fn iae_properties_and_duplicate_implementation() {
    let x = [1.0, 2.0, 3.0];
    assert_eq!(iae(&x, &x), 0.0);
    // Constant offset: K * delta.
    let shifted: Vec<f64> = x.iter().map(|v| v + 0.5).collect();
    assert!((iae(&x, &shifted) - 1.5).abs() < 1e-15);
    // Independent indexed-loop implementation on random curves.
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let a: Vec<f64> = (0..17).map(|_| rand::Rng::gen::<f64>(&mut rng) * 4.0 - 2.0).collect();
        let b: Vec<f64> = (0..17).map(|_| rand::Rng::gen::<f64>(&mut rng) * 4.0 - 2.0).collect();
        let mut oracle = 0.0;
        for i in 0..a.len() {
            let d = a[i] - b[i];
            oracle += if d < 0.0 { -d } else { d };
        }
        assert!((iae(&a, &b) - oracle).abs() < 1e-12);
    }
}

#[test]
fn model_scale_conversion_uses_normalizers() {
    let spec = StatisticSpec::new(vec![Statistic::EdgeDensity, Statistic::Reciprocity]).unwrap();
    let raw = vec![vec![1.0, 2.0]];
    let model = to_model_scale(&raw, &spec, 5, true);
    assert_eq!(model[0][0], 20.0);
    assert_eq!(model[0][1], 20.0); // C(5,2) = 10, times 2.0
}

#[test]
fn missing_indices_are_interior_and_seeded() {
    let a = missing_indices(10, 3, 7);
    let b = missing_indices(10, 3, 7);
    assert_eq!(a, b);
    assert_eq!(a.len(), 3);
    for &i in &a {
        assert!(i >= 1 && i <= 8);
    }
    assert!(missing_indices(10, 0, 7).is_empty());
    // Never more than the interior size.
    assert_eq!(missing_indices(5, 10, 7).len(), 3);
}

#[test]
fn estimation_study_smoke() {
    let scenario = Scenario {
        sampler: fast_sampler(),
        replicates: 3,
        ..scenario_preset(ScenarioKind::Sinusoidal, 10, 12, 2, 3, 42).unwrap()
    };
    let report =
        run_estimation_study(&scenario, &Method::all(), &FitOptions::default()).unwrap();
    // 3 replicates x 3 methods x 2 statistics.
    assert_eq!(report.records.len(), 18);
    for r in &report.records {
        assert!(r.iae.is_finite(), "{:?}", r);
        match r.method {
            Method::CrossSectional => assert!(r.times_used <= 10),
            _ => assert_eq!(r.times_used, 12),
        }
    }
    // Aggregates recompute from records.
    for s in &report.summaries {
        let vals: Vec<f64> = report
            .records
            .iter()
            .filter(|r| r.method == s.method && r.statistic == s.statistic)
            .map(|r| r.iae)
            .collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        assert!((mean - s.mean_iae).abs() < 1e-12);
    }
    // Determinism.
    let again =
        run_estimation_study(&scenario, &Method::all(), &FitOptions::default()).unwrap();
    for (x, y) in report.records.iter().zip(again.records.iter()) {
        assert_eq!(x.iae.to_bits(), y.iae.to_bits());
    }
}

#[test]
fn power_study_smoke_and_monotonicity() {
    let opts = PowerOptions {
        n: 10,
        replicates: 8,
        b: 30,
        seed: 3,
        sampler: fast_sampler(),
        ..PowerOptions::default()
    };
    let report = run_power_study(&[0.0, 0.15, 0.3], &[10], &opts).unwrap();
    assert_eq!(report.records.len(), 24);
    let rate = |m: f64| {
        report
            .summaries
            .iter()
            .find(|s| s.m == m && s.method == "bootstrap")
            .unwrap()
            .rejection_rate
    };
    // Shared data streams across amplitudes: power cannot decrease in m.
    assert!(rate(0.15) >= rate(0.0) - 1e-12);
    assert!(rate(0.3) >= rate(0.15) - 1e-12);
    for s in &report.summaries {
        assert!((0.0..=1.0).contains(&s.rejection_rate));
        assert_eq!(s.replicates, 8);
    }
}

#[test]
fn sinusoidal_density_tracks_sigmoid_of_raw_curve() {
    // Observed edge density across a simulated sequence correlates with
    // the sigmoid of the raw-scale coefficient curve.
    let n = 12;
    let k = 50;
    let spec = StatisticSpec::new(vec![Statistic::EdgeDensity]).unwrap();
    let scenario = Scenario {
        name: "sin-m".into(),
        curves: vec![CurveForm::SinAmplitude {
            m: 0.3,
            period: k as f64,
        }],
        spec: spec.clone(),
        directed: true,
        n,
        k,
        missing: 0,
        replicates: 1,
        seed: 77,
        sampler: fast_sampler(),
    };
    let times = scenario_times(k);
    let raw = phi_raw_at_times(&scenario, &times, 0);
    let net = simulate_scenario(&scenario, 0).unwrap();
    let densities: Vec<f64> = net
        .iter()
        .map(|(_, g)| g.edge_count() as f64 / g.dyad_count() as f64)
        .collect();
    let expected: Vec<f64> = raw.iter().map(|r| 1.0 / (1.0 + (-r[0]).exp())).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (md, me) = (mean(&densities), mean(&expected));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..k {
        sxy += (densities[i] - md) * (expected[i] - me);
        sxx += (densities[i] - md) * (densities[i] - md);
        syy += (expected[i] - me) * (expected[i] - me);
    }
    let r = sxy / (sxx * syy).sqrt();
    assert!(r > 0.5, "correlation {r}");
}

#[test]
fn timing_study_shapes() {
    let opts = TimingOptions {
        n: 8,
        repeats: 3,
        seed: 1,
        sampler: fast_sampler(),
        ..TimingOptions::default()
    };
    let report = run_timing_study(&[6, 12], &opts).unwrap();
    assert_eq!(report.records.len(), 12);
    assert_eq!(report.ratios.len(), 2);
    for (_, ratio) in &report.ratios {
        assert!(ratio.is_finite() && *ratio > 0.0);
    }
    assert_eq!(report.growth_slopes.len(), 2);
    // Single-cell study emits one summary row per method.
    let single = run_timing_study(&[6], &opts).unwrap();
    assert_eq!(single.summaries.len(), 2);
    assert_eq!(single.ratios.len(), 1);
}


use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
