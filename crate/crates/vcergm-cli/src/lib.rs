//! Command-line entry points: `fit`, `simulate`, `test`, `stats`,
//! `benchmark`.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
//! Every output artifact embeds the tool version, the resolved
//! configuration, and the seed; results are written atomically (temp file
//! plus rename). Outputs carry no timestamps, so identical invocations
//! produce byte-identical files.

use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use vcergm::basis::{BasisDim, OmegaMode};
use vcergm::dyngraph::{
    read_edge_list, write_curves, write_edge_list, write_fit_result, DynamicNetwork, FileMeta,
};
use vcergm::inference::{bootstrap_test, chisq_test, TestOptions, TestResult};
use vcergm::mple::{fit_vcergm, FitOptions, GcvMode, LambdaRule};
use vcergm::netstats::{compute_statistics, StatisticSpec};
use vcergm::sampler::{sample_sequence, SamplerConfig};
use vcergm::simbench::{
    run_estimation_study, run_power_study, run_timing_study, scenario_preset, BenchReport, Method,
    PowerOptions, Scenario, ScenarioKind, TimingOptions,
};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(
    name = "vcergm",
    version,
    about = "Varying-coefficient ERGMs for dynamic networks: fitting, simulation, heterogeneity tests, benchmarks"
)]
struct Cli {
    /// Cap the worker thread pool used by parallel studies.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a VCERGM to an edge-list time series.
    Fit(FitArgs),
    /// Simulate a dynamic network from a coefficient curve.
    Simulate(SimulateArgs),
    /// Test for temporal heterogeneity of the coefficients.
    Test(TestArgs),
    /// Print standardized network statistics per snapshot.
    Stats(StatsArgs),
    /// Run a simulation study (estimation, power, or timing).
    Benchmark(BenchmarkArgs),
}

#[derive(Args, Debug)]
struct CommonFitFlags {
    /// Basis dimension: `auto` or an integer.
    #[arg(long, default_value = "auto")]
    basis_dim: String,
    /// B-spline order (4 = cubic).
    #[arg(long, default_value_t = 4)]
    spline_order: usize,
    /// Smoothing parameter: `auto` (GCV) or a nonnegative number.
    #[arg(long, default_value = "auto")]
    lambda: String,
    /// Use the weighted GCV variant on the IRLS working system.
    #[arg(long)]
    weighted_gcv: bool,
    /// Build the penalty by exact integration instead of the discrete sum.
    #[arg(long)]
    exact_omega: bool,
}

impl CommonFitFlags {
    fn to_options(&self) -> Result<FitOptions, String> {
        let basis_dim = match self.basis_dim.trim() {
            "auto" => BasisDim::Auto,
            s => BasisDim::Fixed(
                s.parse()
                    .map_err(|_| format!("invalid --basis-dim `{s}`"))?,
            ),
        };
        let lambda = match self.lambda.trim() {
            "auto" => LambdaRule::Auto(None),
            s => LambdaRule::Fixed(
                s.parse()
                    .map_err(|_| format!("invalid --lambda `{s}`"))?,
            ),
        };
        Ok(FitOptions {
            basis_dim,
            order: self.spline_order,
            lambda,
            gcv_mode: if self.weighted_gcv {
                GcvMode::WorkingWeighted
            } else {
                GcvMode::Unweighted
            },
            omega_mode: if self.exact_omega {
                OmegaMode::ExactIntegral
            } else {
                OmegaMode::Discrete
            },
            ..FitOptions::default()
        })
    }

    fn describe(&self) -> String {
        format!(
            "basis-dim={} spline-order={} lambda={} weighted-gcv={} exact-omega={}",
            self.basis_dim, self.spline_order, self.lambda, self.weighted_gcv, self.exact_omega
        )
    }
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Edge-list CSV input.
    #[arg(long)]
    input: PathBuf,
    /// Treat the data as directed.
    #[arg(long)]
    directed: bool,
    /// Comma-separated statistics (edges,reciprocity,ctriad,twostar,triangle).
    #[arg(long)]
    stats: String,
    #[command(flatten)]
    fit: CommonFitFlags,
    /// Seed echoed into output artifacts for provenance.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the fit as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write fitted coefficient curves as CSV.
    #[arg(long)]
    curves: Option<PathBuf>,
    /// Evaluate curves on an equally spaced grid of this size instead of
    /// the observed times.
    #[arg(long)]
    grid_points: Option<usize>,
    /// Flat `key = value` defaults file; explicit flags win.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Coefficient curve: sin, quad, er, spiky, or file.
    #[arg(long)]
    phi_curve: String,
    /// Curve file (CSV `time,statistic,phi_hat`, model scale) for
    /// `--phi-curve file`.
    #[arg(long)]
    curve_file: Option<PathBuf>,
    /// Amplitude M for the pure-sine form `M sin(2 pi t / K)` (first
    /// statistic only; implies --phi-curve sin).
    #[arg(long)]
    amplitude: Option<f64>,
    /// Nodes per snapshot.
    #[arg(long, default_value_t = 30)]
    n: usize,
    /// Number of snapshots (observed at times 1..=K).
    #[arg(long, default_value_t = 50)]
    times: usize,
    #[arg(long)]
    stats: String,
    #[arg(long)]
    directed: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Gibbs sweeps per snapshot.
    #[arg(long, default_value_t = 200)]
    sweeps: usize,
    #[arg(long, default_value_t = 100)]
    burn_in: usize,
    /// Output edge-list CSV.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TestArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    directed: bool,
    #[arg(long)]
    stats: String,
    #[command(flatten)]
    fit: CommonFitFlags,
    /// Bootstrap replicates.
    #[arg(long, alias = "B", default_value_t = 200)]
    b: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Calibration: bootstrap or chisq.
    #[arg(long, default_value = "bootstrap")]
    method: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    sweeps: usize,
    #[arg(long, default_value_t = 100)]
    burn_in: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct StatsArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    directed: bool,
    #[arg(long)]
    stats: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchmarkArgs {
    /// Which study to run: estimation, power, or timing.
    #[arg(long)]
    study: String,
    /// TOML configuration (flat `key = value`; see the documented schema).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output report JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

/// Runs the CLI on the given arguments (program name excluded) and returns
/// the process exit code.
pub fn run(args: Vec<String>) -> i32 {
    let args = match inject_config_defaults(args) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: code=1 kind=usage msg={msg:?}");
            return 1;
        }
    };
    let mut argv = vec!["vcergm".to_string()];
    argv.extend(args);
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            // Help/version requests are successful exits.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    if let Some(threads) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build_global();
    }
    let outcome = match &cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Test(a) => cmd_test(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Benchmark(a) => cmd_benchmark(a),
    };
    match outcome {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: code=1 kind=usage msg={msg:?}");
            1
        }
        Err(CliError::Lib(e)) => {
            let (code, kind) = if e.is_numeric() {
                (3, "numeric")
            } else if matches!(e, vcergm::Error::Config(_)) {
                (1, "usage")
            } else {
                (2, "data")
            };
            eprintln!("error: code={code} kind={kind} msg={:?}", e.to_string());
            code
        }
    }
}

enum CliError {
    Usage(String),
    Lib(vcergm::Error),
}

impl From<vcergm::Error> for CliError {
    fn from(e: vcergm::Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<String> for CliError {
    fn from(msg: String) -> Self {
        CliError::Usage(msg)
    }
}

type CmdResult = Result<(), CliError>;

/// Injects `key = value` pairs from a `--config` file as long flags, for
/// every subcommand except `benchmark` (whose `--config` is the study
/// schema). Flags already present win.
fn inject_config_defaults(mut args: Vec<String>) -> Result<Vec<String>, String> {
    const SUBCOMMANDS: [&str; 5] = ["fit", "simulate", "test", "stats", "benchmark"];
    let subcommand = args
        .iter()
        .find(|a| SUBCOMMANDS.contains(&a.as_str()))
        .cloned();
    if subcommand.as_deref() == Some("benchmark") || subcommand.is_none() {
        return Ok(args);
    }
    let Some(pos) = args.iter().position(|a| a == "--config") else {
        return Ok(args);
    };
    let path = args
        .get(pos + 1)
        .cloned()
        .ok_or_else(|| "--config requires a file path".to_string())?;
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read {path}: {e}"))?;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!("{path}:{}: expected `key = value`", lineno + 1));
        };
        let flag = format!("--{}", key.trim().replace('_', "-"));
        if args.iter().any(|a| *a == flag) {
            continue;
        }
        let value = value.trim().trim_matches('"').to_string();
        match value.as_str() {
            "true" => args.push(flag),
            "false" => {}
            _ => {
                args.push(flag);
                args.push(value);
            }
        }
    }
    Ok(args)
}

/// Writes bytes atomically: temp file in the target directory, then rename.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), vcergm::Error> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut tmp = dir.to_path_buf();
    let stem = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    tmp.push(format!(".{stem}.tmp-{}", std::process::id()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn read_network(path: &Path, directed: bool) -> Result<DynamicNetwork, vcergm::Error> {
    let file = fs::File::open(path)?;
    read_edge_list(BufReader::new(file), directed)
}

fn parse_spec(list: &str) -> Result<StatisticSpec, CliError> {
    StatisticSpec::parse_list(list).map_err(CliError::Lib)
}

fn cmd_fit(a: &FitArgs) -> CmdResult {
    let spec = parse_spec(&a.stats)?;
    let opts = a.fit.to_options().map_err(CliError::Usage)?;
    let data = read_network(&a.input, a.directed)?;
    let fit = fit_vcergm(&data, &spec, &opts)?;
    let config = format!(
        "cmd=fit input={} directed={} stats={} {} seed={}",
        a.input.display(),
        a.directed,
        a.stats,
        a.fit.describe(),
        a.seed
    );
    let meta = FileMeta::new(VERSION, Some(a.seed), &config);
    if let Some(out) = &a.out {
        let mut buf = Vec::new();
        write_fit_result(&fit, &meta, &mut buf)?;
        write_atomic(out, &buf)?;
    }
    if let Some(curves) = &a.curves {
        let grid: Vec<f64> = match a.grid_points {
            None => data.times().to_vec(),
            Some(g) if g >= 2 => {
                let (t0, t1) = data.time_range();
                (0..g)
                    .map(|i| t0 + (t1 - t0) * i as f64 / (g - 1) as f64)
                    .collect()
            }
            Some(_) => return Err(CliError::Usage("--grid-points must be at least 2".into())),
        };
        let mut buf = Vec::new();
        write_curves(&fit, &grid, &meta, &mut buf)?;
        write_atomic(curves, &buf)?;
    }
    println!(
        "fit: p={} q={} lambda={} converged={} iterations={} pseudo_loglik={}",
        spec.len(),
        fit.phi.q(),
        fit.lambda,
        fit.converged,
        fit.iterations,
        fit.pseudo_loglik
    );
    for w in &fit.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

/// Preset curves for `simulate`, on the per-dyad logit scale.
fn preset_curves(
    kind: &str,
    amplitude: Option<f64>,
    p: usize,
    k: usize,
) -> Result<Vec<vcergm::simbench::CurveForm>, CliError> {
    use vcergm::simbench::CurveForm;
    if let Some(m) = amplitude {
        let mut curves = vec![CurveForm::SinAmplitude {
            m,
            period: k as f64,
        }];
        curves.extend(std::iter::repeat(CurveForm::Constant { value: 0.0 }).take(p - 1));
        return Ok(curves);
    }
    let scenario = match kind {
        "sin" => ScenarioKind::Sinusoidal,
        "quad" => ScenarioKind::Quadratic,
        "er" => ScenarioKind::ErdosRenyi,
        "spiky" => ScenarioKind::NonSmooth,
        other => {
            return Err(CliError::Usage(format!(
                "unknown --phi-curve `{other}` (expected sin|quad|er|spiky|file)"
            )))
        }
    };
    let pair = scenario.curves(k as f64);
    if p > pair.len() {
        return Err(CliError::Usage(format!(
            "preset curves define {} coefficients but {p} statistics were requested; use --phi-curve file",
            pair.len()
        )));
    }
    Ok(pair.into_iter().take(p).collect())
}

/// Reads a `time,statistic,phi_hat` CSV into per-time model-scale
/// coefficient vectors matching `spec` order.
fn read_curve_file(
    path: &Path,
    spec: &StatisticSpec,
) -> Result<(Vec<f64>, Vec<Vec<f64>>), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{e}")))?;
    let mut times: Vec<f64> = Vec::new();
    let mut by_time: Vec<Vec<Option<f64>>> = Vec::new();
    let names = spec.names();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lower = line.to_ascii_lowercase();
        if lower.starts_with("time,") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(CliError::Usage(format!(
                "{}:{}: expected `time,statistic,phi` rows",
                path.display(),
                lineno + 1
            )));
        }
        let t: f64 = fields[0]
            .parse()
            .map_err(|_| CliError::Usage(format!("invalid time `{}`", fields[0])))?;
        let stat = fields[1].to_ascii_lowercase();
        let v: f64 = fields[2]
            .parse()
            .map_err(|_| CliError::Usage(format!("invalid value `{}`", fields[2])))?;
        let Some(c) = names.iter().position(|n| *n == stat) else {
            continue;
        };
        let idx = match times.iter().position(|&x| x == t) {
            Some(i) => i,
            None => {
                times.push(t);
                by_time.push(vec![None; names.len()]);
                times.len() - 1
            }
        };
        by_time[idx][c] = Some(v);
    }
    if times.is_empty() {
        return Err(CliError::Usage("curve file has no usable rows".into()));
    }
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
    let mut sorted_times = Vec::with_capacity(times.len());
    let mut phis = Vec::with_capacity(times.len());
    for i in order {
        let row = by_time[i]
            .iter()
            .enumerate()
            .map(|(c, v)| {
                v.ok_or_else(|| {
                    CliError::Usage(format!(
                        "curve file misses statistic `{}` at time {}",
                        names[c], times[i]
                    ))
                })
            })
            .collect::<Result<Vec<f64>, CliError>>()?;
        sorted_times.push(times[i]);
        phis.push(row);
    }
    Ok((sorted_times, phis))
}

fn cmd_simulate(a: &SimulateArgs) -> CmdResult {
    let spec = parse_spec(&a.stats)?;
    if a.times < 1 {
        return Err(CliError::Usage("--times must be at least 1".into()));
    }
    let (times, phi_model): (Vec<f64>, Vec<Vec<f64>>) = if a.phi_curve == "file" {
        let path = a
            .curve_file
            .as_ref()
            .ok_or_else(|| CliError::Usage("--phi-curve file requires --curve-file".into()))?;
        read_curve_file(path, &spec)?
    } else {
        let times: Vec<f64> = (1..=a.times).map(|j| j as f64).collect();
        let curves = preset_curves(&a.phi_curve, a.amplitude, spec.len(), a.times)?;
        let scenario = Scenario {
            name: a.phi_curve.clone(),
            curves,
            spec: spec.clone(),
            directed: a.directed,
            n: a.n,
            k: a.times,
            missing: 0,
            replicates: 1,
            seed: a.seed,
            sampler: SamplerConfig::default(),
        };
        let raw = vcergm::simbench::phi_raw_at_times(&scenario, &times, 0);
        let model = vcergm::simbench::to_model_scale(&raw, &spec, a.n, a.directed);
        (times, model)
    };
    let cfg = SamplerConfig {
        sweeps: a.sweeps,
        burn_in: a.burn_in,
        seed: a.seed,
        ..SamplerConfig::default()
    };
    let ns = vec![a.n; times.len()];
    let net = sample_sequence(&phi_model, &times, &ns, &spec, a.directed, &cfg)?;
    let config = format!(
        "cmd=simulate phi-curve={} amplitude={:?} n={} times={} stats={} directed={} sweeps={} burn-in={} seed={}",
        a.phi_curve, a.amplitude, a.n, a.times, a.stats, a.directed, a.sweeps, a.burn_in, a.seed
    );
    let meta = FileMeta::new(VERSION, Some(a.seed), &config);
    let mut buf = Vec::new();
    {
        let mut head = Vec::new();
        meta_comment(&meta, &mut head)?;
        buf.extend_from_slice(&head);
    }
    write_edge_list(&net, &mut buf)?;
    write_atomic(&a.out, &buf)?;
    println!(
        "simulate: wrote {} snapshots of {} nodes to {}",
        net.len(),
        a.n,
        a.out.display()
    );
    Ok(())
}

fn meta_comment(meta: &FileMeta, out: &mut Vec<u8>) -> Result<(), vcergm::Error> {
    writeln!(out, "# version={}", meta.version)?;
    if let Some(s) = meta.seed {
        writeln!(out, "# seed={s}")?;
    }
    writeln!(out, "# config={}", meta.config)?;
    Ok(())
}

#[derive(Serialize)]
struct TestFile<'a> {
    version: &'a str,
    seed: u64,
    config: &'a str,
    method: &'a str,
    statistics: Vec<&'static str>,
    t_observed: f64,
    p_value: f64,
    p_value_chisq: f64,
    df_chisq: usize,
    critical_value: Option<f64>,
    b: usize,
    requested_b: usize,
    dropped: usize,
    alpha: f64,
    reject: bool,
    lambda: f64,
    q: usize,
    bootstrap_stats: &'a [f64],
    warnings: &'a [String],
}

fn cmd_test(a: &TestArgs) -> CmdResult {
    let spec = parse_spec(&a.stats)?;
    let fit = a.fit.to_options().map_err(CliError::Usage)?;
    let data = read_network(&a.input, a.directed)?;
    let opts = TestOptions {
        b: a.b,
        alpha: a.alpha,
        seed: a.seed,
        fit,
        sampler: SamplerConfig {
            sweeps: a.sweeps,
            burn_in: a.burn_in,
            ..SamplerConfig::default()
        },
    };
    let result: TestResult = match a.method.as_str() {
        "bootstrap" => bootstrap_test(&data, &spec, &opts)?,
        "chisq" => chisq_test(&data, &spec, &opts)?,
        other => {
            return Err(CliError::Usage(format!(
                "unknown --method `{other}` (expected bootstrap|chisq)"
            )))
        }
    };
    let config = format!(
        "cmd=test input={} directed={} stats={} {} b={} alpha={} method={} sweeps={} burn-in={} seed={}",
        a.input.display(),
        a.directed,
        a.stats,
        a.fit.describe(),
        a.b,
        a.alpha,
        a.method,
        a.sweeps,
        a.burn_in,
        a.seed
    );
    let p_value = if a.method == "bootstrap" {
        result.p_value_bootstrap
    } else {
        result.p_value_chisq
    };
    if let Some(out) = &a.out {
        let file = TestFile {
            version: VERSION,
            seed: a.seed,
            config: &config,
            method: &a.method,
            statistics: spec.names(),
            t_observed: result.t_observed,
            p_value,
            p_value_chisq: result.p_value_chisq,
            df_chisq: result.df_chisq,
            critical_value: if result.critical_value.is_finite() {
                Some(result.critical_value)
            } else {
                None
            },
            b: result.b,
            requested_b: result.requested_b,
            dropped: result.dropped,
            alpha: result.alpha,
            reject: result.reject,
            lambda: result.lambda,
            q: result.q,
            bootstrap_stats: &result.bootstrap_stats,
            warnings: &result.warnings,
        };
        let json = serde_json::to_string_pretty(&file)
            .map_err(|e| CliError::Usage(format!("serialization failed: {e}")))?;
        write_atomic(out, format!("{json}\n").as_bytes())?;
    }
    println!(
        "test: method={} T={} p={} reject={}",
        a.method, result.t_observed, p_value, result.reject
    );
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn cmd_stats(a: &StatsArgs) -> CmdResult {
    let spec = parse_spec(&a.stats)?;
    let data = read_network(&a.input, a.directed)?;
    let mut out = String::from("time,statistic,value\n");
    for (t, g) in data.iter() {
        let h = compute_statistics(g, &spec)?;
        for (k, name) in spec.names().iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", t, name, h[k]));
        }
    }
    print!("{out}");
    if let Some(path) = &a.out {
        write_atomic(path, out.as_bytes())?;
    }
    Ok(())
}

/// Flat TOML schema for `benchmark --config`.
#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct BenchConfig {
    seed: Option<u64>,
    n: Option<usize>,
    replicates: Option<usize>,
    scenario: Option<String>,
    k: Option<usize>,
    missing: Option<usize>,
    m_grid: Option<Vec<f64>>,
    k_grid: Option<Vec<usize>>,
    b: Option<usize>,
    alpha: Option<f64>,
    timing_k_grid: Option<Vec<usize>>,
    repeats: Option<usize>,
    sweeps: Option<usize>,
    burn_in: Option<usize>,
    workers: Option<usize>,
}

fn cmd_benchmark(a: &BenchmarkArgs) -> CmdResult {
    let cfg: BenchConfig = match &a.config {
        Some(path) => {
            let text =
                fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{e}")))?;
            toml::from_str(&text).map_err(|e| CliError::Usage(format!("bad config: {e}")))?
        }
        None => BenchConfig::default(),
    };
    if let Some(workers) = cfg.workers {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build_global();
    }
    let seed = a.seed.or(cfg.seed).unwrap_or(0);
    let sampler = SamplerConfig {
        sweeps: cfg.sweeps.unwrap_or(200),
        burn_in: cfg.burn_in.unwrap_or(100),
        ..SamplerConfig::default()
    };
    let report = match a.study.as_str() {
        "estimation" => {
            let kind = ScenarioKind::parse(cfg.scenario.as_deref().unwrap_or("sinusoidal"))?;
            let scenario = Scenario {
                sampler,
                ..scenario_preset(
                    kind,
                    cfg.n.unwrap_or(30),
                    cfg.k.unwrap_or(50),
                    cfg.missing.unwrap_or(0),
                    cfg.replicates.unwrap_or(20),
                    seed,
                )?
            };
            let report =
                run_estimation_study(&scenario, &Method::all(), &FitOptions::default())?;
            for s in &report.summaries {
                println!(
                    "estimation {} missing={}: {} {}: mean IAE {:.4} (sd {:.4})",
                    report.scenario, report.missing, s.method.name(), s.statistic, s.mean_iae, s.sd_iae
                );
            }
            BenchReport::Estimation(report)
        }
        "power" => {
            let opts = PowerOptions {
                n: cfg.n.unwrap_or(30),
                replicates: cfg.replicates.unwrap_or(20),
                b: cfg.b.unwrap_or(200),
                alpha: cfg.alpha.unwrap_or(0.05),
                seed,
                sampler,
                ..PowerOptions::default()
            };
            let m_grid = cfg.m_grid.unwrap_or_else(|| vec![0.0, 0.3]);
            let k_grid = cfg.k_grid.unwrap_or_else(|| vec![30]);
            let report = run_power_study(&m_grid, &k_grid, &opts)?;
            for s in &report.summaries {
                println!(
                    "power M={} K={} {}: rejection {:.3}",
                    s.m, s.k, s.method, s.rejection_rate
                );
            }
            BenchReport::Power(report)
        }
        "timing" => {
            let defaults = TimingOptions::default();
            let opts = TimingOptions {
                n: cfg.n.unwrap_or(defaults.n),
                repeats: cfg.repeats.unwrap_or(defaults.repeats),
                seed,
                sampler,
                ..defaults
            };
            let k_grid = cfg
                .timing_k_grid
                .or(cfg.k_grid)
                .unwrap_or_else(|| vec![20, 40, 60, 80, 100]);
            let report = run_timing_study(&k_grid, &opts)?;
            for (k, ratio) in &report.ratios {
                println!("timing K={k}: vcergm/cross-sectional ratio {ratio:.3}");
            }
            BenchReport::Timing(report)
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown --study `{other}` (expected estimation|power|timing)"
            )))
        }
    };
    if let Some(out) = &a.out {
        #[derive(Serialize)]
        struct ReportFile<'a> {
            version: &'a str,
            seed: u64,
            #[serde(flatten)]
            report: &'a BenchReport,
        }
        let json = serde_json::to_string_pretty(&ReportFile {
            version: VERSION,
            seed,
            report: &report,
        })
        .map_err(|e| CliError::Usage(format!("serialization failed: {e}")))?;
        write_atomic(out, format!("{json}\n").as_bytes())?;
    }
    Ok(())
}
