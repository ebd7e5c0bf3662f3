//! Simulation studies: estimation accuracy, test power, and timing.
//!
//! Coefficient scenarios are specified on the per-dyad logit scale (the
//! natural scale of raw-count coefficients, where values are O(1) and edge
//! probabilities respond visibly); simulation multiplies by each
//! statistic's max-count normalizer to reach the standardized-model scale,
//! and fitted coefficients are divided by the same normalizer before
//! error metrics, so reported errors live on the scenario scale.
//!
//! All studies are seed-deterministic end to end: every replicate owns a
//! derived RNG stream and reports carry the per-replicate records their
//! aggregates are computed from.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::basis::build_basis_with;
use crate::derive_seed;
use crate::dyngraph::DynamicNetwork;
use crate::inference::{bootstrap_test, TestOptions};
use crate::mple::{fit_cross_sectional, fit_two_step, fit_vcergm, FitOptions};
use crate::netstats::{Statistic, StatisticSpec};
use crate::sampler::{sample_sequence, SamplerConfig};
use crate::{Error, Result};

/// A coefficient trajectory on the per-dyad logit scale.
#[derive(Debug, Clone, Serialize)]
pub enum CurveForm {
    /// `a * sin((t + b) / c) + d`.
    Sinusoid { a: f64, b: f64, c: f64, d: f64 },
    /// `m * sin(2 pi t / period)`.
    SinAmplitude { m: f64, period: f64 },
    /// `a * (t - t_mid)^2 + b`.
    Quadratic { a: f64, b: f64, t_mid: f64 },
    Constant { value: f64 },
    /// Independent `N(mean, sd)` draws at each observed time.
    Spiky { mean: f64, sd: f64 },
}

impl CurveForm {
    /// Deterministic value at `t`; spiky curves have no closed form and
    /// must go through [`phi_raw_at_times`].
    pub fn value(&self, t: f64) -> Option<f64> {
        match *self {
            CurveForm::Sinusoid { a, b, c, d } => Some(a * ((t + b) / c).sin() + d),
            CurveForm::SinAmplitude { m, period } => {
                Some(m * (2.0 * std::f64::consts::PI * t / period).sin())
            }
            CurveForm::Quadratic { a, b, t_mid } => Some(a * (t - t_mid) * (t - t_mid) + b),
            CurveForm::Constant { value } => Some(value),
            CurveForm::Spiky { .. } => None,
        }
    }
}

/// A simulation scenario: coefficient curves, model spec, and sizes.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    /// One curve per statistic in `spec` order.
    pub curves: Vec<CurveForm>,
    pub spec: StatisticSpec,
    pub directed: bool,
    pub n: usize,
    pub k: usize,
    pub missing: usize,
    pub replicates: usize,
    pub seed: u64,
    pub sampler: SamplerConfig,
}

/// The named scenario families of the estimation study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Sinusoidal,
    Quadratic,
    ErdosRenyi,
    NonSmooth,
}

impl ScenarioKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "sinusoidal" | "sin" => Ok(ScenarioKind::Sinusoidal),
            "quadratic" | "quad" => Ok(ScenarioKind::Quadratic),
            "erdos-renyi" | "er" => Ok(ScenarioKind::ErdosRenyi),
            "non-smooth" | "spiky" => Ok(ScenarioKind::NonSmooth),
            other => Err(Error::Config(format!("unknown scenario `{other}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::Sinusoidal => "sinusoidal",
            ScenarioKind::Quadratic => "quadratic",
            ScenarioKind::ErdosRenyi => "erdos-renyi",
            ScenarioKind::NonSmooth => "non-smooth",
        }
    }

    /// Curve pair (edges, reciprocity) for a time domain of length `t_len`.
    pub fn curves(&self, t_len: f64) -> Vec<CurveForm> {
        match self {
            ScenarioKind::Sinusoidal => vec![
                CurveForm::Sinusoid {
                    a: 1.0,
                    b: 20.0,
                    c: 5.0,
                    d: 1.0,
                },
                CurveForm::Sinusoid {
                    a: 0.6,
                    b: 20.0,
                    c: 3.0,
                    d: 0.4,
                },
            ],
            ScenarioKind::Quadratic => vec![
                CurveForm::Quadratic {
                    a: 1.0 / (25.0 * 25.0),
                    b: 0.0,
                    t_mid: t_len / 2.0,
                },
                CurveForm::Quadratic {
                    a: -1.0 / (30.0 * 30.0),
                    b: 0.5,
                    t_mid: t_len / 2.0,
                },
            ],
            ScenarioKind::ErdosRenyi => {
                let p_edge: f64 = 0.85;
                vec![
                    CurveForm::Constant {
                        value: (p_edge / (1.0 - p_edge)).ln(),
                    },
                    CurveForm::Constant { value: 0.0 },
                ]
            }
            ScenarioKind::NonSmooth => vec![
                CurveForm::Spiky { mean: 0.0, sd: 1.0 },
                CurveForm::Spiky { mean: 1.5, sd: 0.6 },
            ],
        }
    }
}

/// Standard estimation-study scenario: directed graphs with edge density
/// and reciprocity, observed at times `1..=k`.
pub fn scenario_preset(
    kind: ScenarioKind,
    n: usize,
    k: usize,
    missing: usize,
    replicates: usize,
    seed: u64,
) -> Result<Scenario> {
    let spec = StatisticSpec::new(vec![Statistic::EdgeDensity, Statistic::Reciprocity])?;
    Ok(Scenario {
        name: kind.name().to_string(),
        curves: kind.curves(k as f64),
        spec,
        directed: true,
        n,
        k,
        missing,
        replicates,
        seed,
        sampler: SamplerConfig::default(),
    })
}

/// Observation times of a scenario: `1, 2, ..., k` (domain length `T = k`).
pub fn scenario_times(k: usize) -> Vec<f64> {
    (1..=k).map(|j| j as f64).collect()
}

/// Raw-scale coefficient values at the given times; spiky curves draw one
/// independent sequence per (scenario seed, replicate).
pub fn phi_raw_at_times(scenario: &Scenario, times: &[f64], replicate: u64) -> Vec<Vec<f64>> {
    let mut per_time = vec![vec![0.0; scenario.curves.len()]; times.len()];
    for (c, curve) in scenario.curves.iter().enumerate() {
        match curve {
            CurveForm::Spiky { mean, sd } => {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                    scenario.seed ^ 0x5349_4d50_4849_u64,
                    replicate * 64 + c as u64,
                ));
                let normal = Normal::new(*mean, *sd).expect("valid sd");
                for row in per_time.iter_mut() {
                    row[c] = normal.sample(&mut rng);
                }
            }
            _ => {
                for (j, &t) in times.iter().enumerate() {
                    per_time[j][c] = curve.value(t).expect("deterministic curve");
                }
            }
        }
    }
    per_time
}

/// Multiplies raw-scale coefficients by each statistic's max-count
/// normalizer, the conversion between the per-dyad logit scale and the
/// standardized-model scale.
pub fn to_model_scale(
    phi_raw: &[Vec<f64>],
    spec: &StatisticSpec,
    n: usize,
    directed: bool,
) -> Vec<Vec<f64>> {
    phi_raw
        .iter()
        .map(|row| {
            row.iter()
                .zip(spec.entries())
                .map(|(&v, s)| v * s.max_count(n, directed))
                .collect()
        })
        .collect()
}

/// Integrated absolute error: the sum over times of the pointwise absolute
/// difference between the true and estimated curves.
pub fn iae(truth: &[f64], estimate: &[f64]) -> f64 {
    assert_eq!(truth.len(), estimate.len());
    truth
        .iter()
        .zip(estimate.iter())
        .map(|(a, b)| (a - b).abs())
        .sum()
}

/// Estimation methods compared in the studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Vcergm,
    CrossSectional,
    TwoStep,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Vcergm => "vcergm",
            Method::CrossSectional => "cross-sectional",
            Method::TwoStep => "two-step",
        }
    }

    pub fn all() -> Vec<Method> {
        vec![Method::Vcergm, Method::CrossSectional, Method::TwoStep]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimationRecord {
    pub replicate: usize,
    pub method: Method,
    pub statistic: String,
    pub iae: f64,
    /// Times entering the error sum (smooth methods cover all original
    /// times; cross-sectional only non-missing, converged ones).
    pub times_used: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimationSummary {
    pub method: Method,
    pub statistic: String,
    pub mean_iae: f64,
    pub sd_iae: f64,
    pub replicates: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimationReport {
    pub scenario: String,
    pub n: usize,
    pub k: usize,
    pub missing: usize,
    pub replicates: usize,
    pub seed: u64,
    pub records: Vec<EstimationRecord>,
    pub summaries: Vec<EstimationSummary>,
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Interior snapshot indices deleted uniformly at random. Endpoints are
/// kept so that every original time stays inside the fitted basis domain
/// and interpolation at deleted times is well posed.
fn missing_indices(k: usize, count: usize, seed: u64) -> Vec<usize> {
    use rand::seq::SliceRandom;
    if count == 0 || k < 3 {
        return Vec::new();
    }
    let mut interior: Vec<usize> = (1..k - 1).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    interior.shuffle(&mut rng);
    let mut out: Vec<usize> = interior.into_iter().take(count.min(k - 2)).collect();
    out.sort_unstable();
    out
}

/// One simulated replicate of a scenario, before deletion.
pub fn simulate_scenario(scenario: &Scenario, replicate: u64) -> Result<DynamicNetwork> {
    let times = scenario_times(scenario.k);
    let phi_raw = phi_raw_at_times(scenario, &times, replicate);
    let phi_model = to_model_scale(&phi_raw, &scenario.spec, scenario.n, scenario.directed);
    let cfg = SamplerConfig {
        seed: derive_seed(scenario.seed, 0x0da7_a000 + replicate),
        ..scenario.sampler.clone()
    };
    let ns = vec![scenario.n; times.len()];
    sample_sequence(
        &phi_model,
        &times,
        &ns,
        &scenario.spec,
        scenario.directed,
        &cfg,
    )
}

/// Runs the estimation study: simulate, delete snapshots, fit each method,
/// and report per-statistic integrated absolute errors on the raw scale.
pub fn run_estimation_study(
    scenario: &Scenario,
    methods: &[Method],
    fit: &FitOptions,
) -> Result<EstimationReport> {
    let times = scenario_times(scenario.k);
    let results: Vec<Result<Vec<EstimationRecord>>> = (0..scenario.replicates)
        .into_par_iter()
        .map(|w| estimation_replicate(scenario, methods, fit, &times, w))
        .collect();
    let mut records = Vec::new();
    for r in results {
        records.extend(r?);
    }
    let mut summaries = Vec::new();
    for method in methods {
        for stat in scenario.spec.names() {
            let vals: Vec<f64> = records
                .iter()
                .filter(|r| r.method == *method && r.statistic == stat)
                .map(|r| r.iae)
                .collect();
            let (mean_iae, sd_iae) = mean_sd(&vals);
            summaries.push(EstimationSummary {
                method: *method,
                statistic: stat.to_string(),
                mean_iae,
                sd_iae,
                replicates: vals.len(),
            });
        }
    }
    Ok(EstimationReport {
        scenario: scenario.name.clone(),
        n: scenario.n,
        k: scenario.k,
        missing: scenario.missing,
        replicates: scenario.replicates,
        seed: scenario.seed,
        records,
        summaries,
    })
}

fn estimation_replicate(
    scenario: &Scenario,
    methods: &[Method],
    fit: &FitOptions,
    times: &[f64],
    w: usize,
) -> Result<Vec<EstimationRecord>> {
    let spec = &scenario.spec;
    let p = spec.len();
    let phi_raw = phi_raw_at_times(scenario, times, w as u64);
    let full = simulate_scenario(scenario, w as u64)?;
    let drop = missing_indices(
        scenario.k,
        scenario.missing,
        derive_seed(scenario.seed, 0x0615_5000 + w as u64),
    );
    let observed = full.without_snapshots(&drop)?;
    let normalizers: Vec<f64> = spec
        .entries()
        .iter()
        .map(|s| s.max_count(scenario.n, scenario.directed))
        .collect();

    let mut records = Vec::new();
    for method in methods {
        // Estimated raw-scale value per (time, statistic); None marks times
        // the method cannot estimate.
        let estimates: Vec<Vec<Option<f64>>> = match method {
            Method::Vcergm => {
                let fitres = fit_vcergm(&observed, spec, fit)?;
                times
                    .iter()
                    .map(|&t| {
                        let phi = fitres
                            .phi
                            .evaluate_at_original(&fitres.basis, t)
                            .expect("deleted times are interior");
                        (0..p).map(|c| Some(phi[c] / normalizers[c])).collect()
                    })
                    .collect()
            }
            Method::CrossSectional => {
                let cs = fit_cross_sectional(&observed, spec)?;
                let mut grid = vec![vec![None; p]; times.len()];
                for (s, est) in cs.estimates.iter().enumerate() {
                    if let Some(e) = est {
                        let j = times
                            .iter()
                            .position(|&t| t == cs.times[s])
                            .expect("observed time is in the grid");
                        for c in 0..p {
                            grid[j][c] = Some(e[c] / normalizers[c]);
                        }
                    }
                }
                grid
            }
            Method::TwoStep => {
                let basis =
                    build_basis_with(observed.times(), fit.basis_dim, fit.order, fit.omega_mode)?;
                let phi = fit_two_step(&observed, spec, &basis)?;
                times
                    .iter()
                    .map(|&t| {
                        let v = phi
                            .evaluate_at_original(&basis, t)
                            .expect("deleted times are interior");
                        (0..p).map(|c| Some(v[c] / normalizers[c])).collect()
                    })
                    .collect()
            }
        };
        for (c, stat) in spec.names().iter().enumerate() {
            let mut truth = Vec::new();
            let mut fitted = Vec::new();
            for (j, row) in estimates.iter().enumerate() {
                if let Some(v) = row[c] {
                    truth.push(phi_raw[j][c]);
                    fitted.push(v);
                }
            }
            records.push(EstimationRecord {
                replicate: w,
                method: *method,
                statistic: stat.to_string(),
                iae: iae(&truth, &fitted),
                times_used: truth.len(),
            });
        }
    }
    Ok(records)
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerRecord {
    pub m: f64,
    pub k: usize,
    pub replicate: usize,
    pub t_observed: f64,
    pub p_value_bootstrap: f64,
    pub reject_bootstrap: bool,
    pub p_value_chisq: f64,
    pub reject_chisq: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerSummary {
    pub m: f64,
    pub k: usize,
    pub method: String,
    pub rejection_rate: f64,
    pub replicates: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerReport {
    pub n: usize,
    pub b: usize,
    pub alpha: f64,
    pub replicates: usize,
    pub seed: u64,
    pub records: Vec<PowerRecord>,
    pub summaries: Vec<PowerSummary>,
}

/// Power-study configuration.
#[derive(Debug, Clone)]
pub struct PowerOptions {
    pub n: usize,
    pub replicates: usize,
    pub b: usize,
    pub alpha: f64,
    pub seed: u64,
    pub fit: FitOptions,
    pub sampler: SamplerConfig,
}

impl Default for PowerOptions {
    fn default() -> Self {
        PowerOptions {
            n: 30,
            replicates: 20,
            b: 200,
            alpha: 0.05,
            seed: 0,
            fit: FitOptions::default(),
            sampler: SamplerConfig::default(),
        }
    }
}

/// Runs the heterogeneity-test power study over an amplitude and length
/// grid. The edge-density coefficient is `m sin(2 pi t / K)` over times
/// `1..=K`; the data stream for a given `(K, replicate)` is shared across
/// amplitudes (common random numbers), so power is comparable in `m`.
pub fn run_power_study(
    m_grid: &[f64],
    k_grid: &[usize],
    opts: &PowerOptions,
) -> Result<PowerReport> {
    let spec = StatisticSpec::new(vec![Statistic::EdgeDensity])?;
    let normalizer = Statistic::EdgeDensity.max_count(opts.n, true);
    let mut records = Vec::new();
    for &k in k_grid {
        let times = scenario_times(k);
        for &m in m_grid {
            let cell: Vec<Result<PowerRecord>> = (0..opts.replicates)
                .into_par_iter()
                .map(|w| {
                    let phi_model: Vec<Vec<f64>> = times
                        .iter()
                        .map(|&t| {
                            vec![
                                m * (2.0 * std::f64::consts::PI * t / k as f64).sin() * normalizer,
                            ]
                        })
                        .collect();
                    let data_cfg = SamplerConfig {
                        seed: derive_seed(opts.seed, 1_000_003 * k as u64 + w as u64),
                        ..opts.sampler.clone()
                    };
                    let ns = vec![opts.n; times.len()];
                    let data = sample_sequence(&phi_model, &times, &ns, &spec, true, &data_cfg)?;
                    let test_opts = TestOptions {
                        b: opts.b,
                        alpha: opts.alpha,
                        seed: derive_seed(opts.seed, 2_000_003 * k as u64 + w as u64),
                        fit: opts.fit.clone(),
                        sampler: opts.sampler.clone(),
                    };
                    let res = bootstrap_test(&data, &spec, &test_opts)?;
                    Ok(PowerRecord {
                        m,
                        k,
                        replicate: w,
                        t_observed: res.t_observed,
                        p_value_bootstrap: res.p_value_bootstrap,
                        reject_bootstrap: res.reject,
                        p_value_chisq: res.p_value_chisq,
                        reject_chisq: res.p_value_chisq <= opts.alpha,
                    })
                })
                .collect();
            for r in cell {
                records.push(r?);
            }
        }
    }
    let mut summaries = Vec::new();
    for &k in k_grid {
        for &m in m_grid {
            for (method, select) in [
                ("bootstrap", true),
                ("chisq", false),
            ] {
                let cell: Vec<&PowerRecord> = records
                    .iter()
                    .filter(|r| r.k == k && r.m == m)
                    .collect();
                let rejected = cell
                    .iter()
                    .filter(|r| if select { r.reject_bootstrap } else { r.reject_chisq })
                    .count();
                summaries.push(PowerSummary {
                    m,
                    k,
                    method: method.to_string(),
                    rejection_rate: rejected as f64 / cell.len().max(1) as f64,
                    replicates: cell.len(),
                });
            }
        }
    }
    Ok(PowerReport {
        n: opts.n,
        b: opts.b,
        alpha: opts.alpha,
        replicates: opts.replicates,
        seed: opts.seed,
        records,
        summaries,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TimingRecord {
    pub k: usize,
    pub repeat: usize,
    pub method: Method,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TimingSummary {
    pub k: usize,
    pub method: Method,
    pub mean_seconds: f64,
    pub sd_seconds: f64,
    pub median_seconds: f64,
    /// Fastest repeat: the load-robust floor used for growth slopes.
    pub min_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TimingReport {
    pub n: usize,
    pub repeats: usize,
    pub seed: u64,
    pub records: Vec<TimingRecord>,
    pub summaries: Vec<TimingSummary>,
    /// Per `k`: median VCERGM seconds / median cross-sectional seconds.
    pub ratios: Vec<(usize, f64)>,
    /// Log-log slope of per-cell minimum seconds against `k`, per method;
    /// minima estimate the cost floor and shrug off background load.
    pub growth_slopes: Vec<(Method, f64)>,
}

/// Timing-study configuration.
#[derive(Debug, Clone)]
pub struct TimingOptions {
    pub n: usize,
    pub repeats: usize,
    pub seed: u64,
    pub fit: FitOptions,
    pub sampler: SamplerConfig,
}

impl Default for TimingOptions {
    fn default() -> Self {
        TimingOptions {
            // The K-scaling comparison is about amortizing per-fit fixed
            // costs over the sequence; moderate snapshot sizes keep that
            // effect resolvable against solver noise.
            n: 15,
            repeats: 7,
            seed: 0,
            fit: FitOptions::default(),
            sampler: SamplerConfig::default(),
        }
    }
}

/// Times full method pipelines (statistics, design, smoothing selection,
/// solve) on identical sinusoidal data per sequence length. Runs strictly
/// sequentially on the calling thread; only ratios and growth rates are
/// meaningful, not absolute seconds.
pub fn run_timing_study(k_grid: &[usize], opts: &TimingOptions) -> Result<TimingReport> {
    let mut records = Vec::new();
    for &k in k_grid {
        // One full sinusoidal period regardless of K, so every sequence
        // length samples the same marginal distribution of snapshot
        // difficulty and time scales cleanly with K.
        let period = k as f64 / (2.0 * std::f64::consts::PI);
        let scenario = Scenario {
            name: "timing-sinusoidal".to_string(),
            curves: vec![
                CurveForm::Sinusoid {
                    a: 0.75,
                    b: 0.0,
                    c: period,
                    d: 0.25,
                },
                CurveForm::Sinusoid {
                    a: 0.4,
                    b: 0.0,
                    c: period,
                    d: 0.2,
                },
            ],
            sampler: opts.sampler.clone(),
            ..scenario_preset(
                ScenarioKind::Sinusoidal,
                opts.n,
                k,
                0,
                1,
                derive_seed(opts.seed, k as u64),
            )?
        };
        let data = simulate_scenario(&scenario, 0)?;
        // Untimed warm-up of both pipelines: first-touch page faults and
        // cold instruction caches otherwise land on the first repeat.
        std::hint::black_box(fit_vcergm(&data, &scenario.spec, &opts.fit)?);
        std::hint::black_box(fit_cross_sectional(&data, &scenario.spec)?);
        for repeat in 0..opts.repeats {
            let t0 = Instant::now();
            let fit = fit_vcergm(&data, &scenario.spec, &opts.fit)?;
            let vc_secs = t0.elapsed().as_secs_f64();
            std::hint::black_box(&fit);
            records.push(TimingRecord {
                k,
                repeat,
                method: Method::Vcergm,
                seconds: vc_secs,
            });
            let t1 = Instant::now();
            let cs = fit_cross_sectional(&data, &scenario.spec)?;
            let cs_secs = t1.elapsed().as_secs_f64();
            std::hint::black_box(&cs);
            records.push(TimingRecord {
                k,
                repeat,
                method: Method::CrossSectional,
                seconds: cs_secs,
            });
        }
    }

    let median = |mut v: Vec<f64>| -> f64 {
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    };
    let mut summaries = Vec::new();
    let mut ratios = Vec::new();
    for &k in k_grid {
        let mut med = [0.0f64; 2];
        for (i, method) in [Method::Vcergm, Method::CrossSectional].iter().enumerate() {
            let vals: Vec<f64> = records
                .iter()
                .filter(|r| r.k == k && r.method == *method)
                .map(|r| r.seconds)
                .collect();
            let (mean_seconds, sd_seconds) = mean_sd(&vals);
            let min_seconds = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            med[i] = median(vals);
            summaries.push(TimingSummary {
                k,
                method: *method,
                mean_seconds,
                sd_seconds,
                median_seconds: med[i],
                min_seconds,
            });
        }
        ratios.push((k, med[0] / med[1]));
    }
    let mut growth_slopes = Vec::new();
    for method in [Method::Vcergm, Method::CrossSectional] {
        let points: Vec<(f64, f64)> = k_grid
            .iter()
            .map(|&k| {
                let m = summaries
                    .iter()
                    .find(|s| s.k == k && s.method == method)
                    .unwrap()
                    .min_seconds;
                ((k as f64).ln(), m.max(1e-12).ln())
            })
            .collect();
        growth_slopes.push((method, slope(&points)));
    }
    Ok(TimingReport {
        n: opts.n,
        repeats: opts.repeats,
        seed: opts.seed,
        records,
        summaries,
        ratios,
        growth_slopes,
    })
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    if points.len() < 2 {
        return f64::NAN;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// A benchmark report of any study, tagged for serialization.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "study", rename_all = "kebab-case")]
pub enum BenchReport {
    Estimation(EstimationReport),
    Power(PowerReport),
    Timing(TimingReport),
}

#[cfg(test)]
mod tests;
