//! Testing for temporal heterogeneity.
//!
//! The null hypothesis is a constant coefficient vector: `Phi = phi0 1_q'`,
//! under which the sequence is a family of identically distributed graphs.
//! The test statistic is twice the log pseudo-likelihood gap between the
//! penalized varying-coefficient fit and the pooled constant fit,
//!
//! ```text
//! T = 2 { log PL(Phi_H1 | x) - log PL(Phi_H0 | x) }
//! ```
//!
//! calibrated either by parametric bootstrap (the default: resample whole
//! sequences from the fitted null, refit both hypotheses per replicate, and
//! use the exceedance proportion as the p-value) or by a chi-squared
//! approximation with `p (q - 1)` degrees of freedom. The chi-squared route
//! is labeled approximate: the effective degrees of freedom of a penalized
//! fit are not the nominal parameter-count difference.

use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::basis::BasisSystem;
use crate::derive_seed;
use crate::dyngraph::DynamicNetwork;
use crate::mple::{
    assemble_design, fit_null_pooled, fit_penalized_with, fit_vcergm, pseudo_log_likelihood_design,
    CoefficientMatrix, FitOptions, FitResult,
};
use crate::netstats::StatisticSpec;
use crate::sampler::{sample_sequence, SamplerConfig};
use crate::{Error, Result};

/// Log pseudo-likelihood of a coefficient matrix on observed data:
/// the exact sum over all dyad-time rows of `y eta - log(1 + exp(eta))`
/// with `eta = B_s' Phi' Delta_ij^s`.
pub fn pseudo_log_likelihood(
    phi: &CoefficientMatrix,
    data: &DynamicNetwork,
    spec: &StatisticSpec,
    basis: &BasisSystem,
) -> Result<f64> {
    if phi.p() != spec.len() || phi.q() != basis.q() {
        return Err(Error::Dimension(format!(
            "coefficient matrix is {}x{}, expected {}x{}",
            phi.p(),
            phi.q(),
            spec.len(),
            basis.q()
        )));
    }
    let ds = assemble_design(data, spec, basis)?;
    Ok(pseudo_log_likelihood_design(&ds, phi))
}

/// `T = 2 { log PL(H1) - log PL(H0) }`, both terms computed through
/// [`pseudo_log_likelihood`] — there is no separate formula path.
pub fn test_statistic(
    fit_h1: &FitResult,
    phi_h0: &CoefficientMatrix,
    data: &DynamicNetwork,
) -> Result<f64> {
    let pll_h1 = pseudo_log_likelihood(&fit_h1.phi, data, &fit_h1.spec, &fit_h1.basis)?;
    let pll_h0 = pseudo_log_likelihood(phi_h0, data, &fit_h1.spec, &fit_h1.basis)?;
    Ok(2.0 * (pll_h1 - pll_h0))
}

/// Chi-squared approximation with `df = p (q - 1)`.
#[derive(Debug, Clone, Copy)]
pub struct ChisqTest {
    pub p_value: f64,
    pub df: usize,
    /// True when `q = 1` leaves zero degrees of freedom and the test is
    /// vacuous.
    pub vacuous: bool,
}

/// Survival function of the chi-squared reference distribution at the
/// observed statistic; `df = p (q - 1)`.
pub fn chisq_pvalue(t_observed: f64, p: usize, q: usize) -> ChisqTest {
    let df = p * q.saturating_sub(1);
    if df == 0 {
        return ChisqTest {
            p_value: if t_observed <= 0.0 { 1.0 } else { 0.0 },
            df,
            vacuous: true,
        };
    }
    let dist = ChiSquared::new(df as f64).expect("positive df");
    let p_value = if t_observed <= 0.0 { 1.0 } else { dist.sf(t_observed) };
    ChisqTest {
        p_value,
        df,
        vacuous: false,
    }
}

/// Bootstrap test configuration.
#[derive(Debug, Clone)]
pub struct TestOptions {
    /// Bootstrap replicates.
    pub b: usize,
    pub alpha: f64,
    pub seed: u64,
    pub fit: FitOptions,
    /// Sweeps/burn-in/init for the null sampler; its seed field is ignored
    /// (per-replicate streams derive from `seed`).
    pub sampler: SamplerConfig,
}

impl Default for TestOptions {
    fn default() -> Self {
        TestOptions {
            b: 200,
            alpha: 0.05,
            seed: 0,
            fit: FitOptions::default(),
            sampler: SamplerConfig::default(),
        }
    }
}

/// Outcome of the heterogeneity test.
#[derive(Debug, Clone)]
pub struct TestResult {
    pub t_observed: f64,
    /// Completed bootstrap statistics in replicate order.
    pub bootstrap_stats: Vec<f64>,
    /// Exceedance proportion `#{T*(b) > T} / B` over completed replicates.
    pub p_value_bootstrap: f64,
    /// Empirical `(1 - alpha)` quantile of the bootstrap statistics.
    pub critical_value: f64,
    pub p_value_chisq: f64,
    pub df_chisq: usize,
    /// Completed replicate count (the `B` of the p-value denominator).
    pub b: usize,
    pub requested_b: usize,
    pub dropped: usize,
    pub alpha: f64,
    pub reject: bool,
    /// Smoothing parameter selected on the observed data and reused in
    /// every bootstrap refit.
    pub lambda: f64,
    pub q: usize,
    pub warnings: Vec<String>,
}

impl TestResult {
    /// Recomputes the exceedance proportion from the stored statistics;
    /// equals `p_value_bootstrap` exactly.
    pub fn recompute_p_value(&self) -> f64 {
        exceedance(self.t_observed, &self.bootstrap_stats)
    }
}

fn exceedance(t: f64, stats: &[f64]) -> f64 {
    if stats.is_empty() {
        return 1.0;
    }
    stats.iter().filter(|&&s| s > t).count() as f64 / stats.len() as f64
}

fn empirical_quantile(sorted: &[f64], level: f64) -> f64 {
    let b = sorted.len();
    let k = ((level * b as f64).ceil() as usize).clamp(1, b);
    sorted[k - 1]
}

/// Parametric bootstrap test for temporal heterogeneity.
///
/// Fits both hypotheses on the observed data, draws `B` sequences from the
/// fitted null at the observed times and node counts, refits both
/// hypotheses per replicate (reusing the smoothing parameter selected on
/// the observed data), and calibrates `T` against the bootstrap statistics.
/// Replicates whose refits fail are dropped; more than 10% dropped is an
/// error.
pub fn bootstrap_test(
    data: &DynamicNetwork,
    spec: &StatisticSpec,
    opts: &TestOptions,
) -> Result<TestResult> {
    if opts.b == 0 {
        return Err(Error::Config("bootstrap requires at least one replicate".into()));
    }
    if !(opts.alpha > 0.0 && opts.alpha < 1.0) {
        return Err(Error::Config(format!(
            "significance level must lie in (0,1), got {}",
            opts.alpha
        )));
    }
    let fit_h1 = fit_vcergm(data, spec, &opts.fit)?;
    let pooled = fit_null_pooled(data, spec)?;
    let q = fit_h1.phi.q();
    let phi_h0 = pooled.coefficient_matrix(q);
    let t_observed = test_statistic(&fit_h1, &phi_h0, data)?;
    let mut warnings = fit_h1.warnings.clone();
    if pooled.ridged {
        warnings.push("null fit required a stabilizing ridge (separation)".to_string());
    }

    let times = data.times().to_vec();
    let node_counts: Vec<usize> = data.iter().map(|(_, g)| g.n()).collect();
    let directed = data.is_directed();
    let lambda = fit_h1.lambda;
    let basis = fit_h1.basis.clone();
    let refit_opts = opts.fit.irls.clone();

    let replicates: Vec<Option<f64>> = (0..opts.b)
        .into_par_iter()
        .map(|b| {
            let cfg = SamplerConfig {
                seed: derive_seed(opts.seed, b as u64 + 1),
                ..opts.sampler.clone()
            };
            let phis = vec![pooled.phi0.clone(); times.len()];
            let sample = sample_sequence(&phis, &times, &node_counts, spec, directed, &cfg).ok()?;
            let ds = assemble_design(&sample, spec, &basis).ok()?;
            let h1 = fit_penalized_with(&ds, lambda, None, &refit_opts).ok()?;
            let h0 = fit_null_pooled(&sample, spec).ok()?;
            let pll_h0 = pseudo_log_likelihood_design(&ds, &h0.coefficient_matrix(q));
            Some(2.0 * (h1.pseudo_loglik - pll_h0))
        })
        .collect();

    let bootstrap_stats: Vec<f64> = replicates.iter().filter_map(|r| *r).collect();
    let dropped = opts.b - bootstrap_stats.len();
    if dropped * 10 > opts.b {
        return Err(Error::BootstrapUnstable {
            failed: dropped,
            total: opts.b,
        });
    }
    if dropped > 0 {
        warnings.push(format!("{dropped} bootstrap replicates dropped"));
    }

    let p_value_bootstrap = exceedance(t_observed, &bootstrap_stats);
    let mut sorted = bootstrap_stats.clone();
    sorted.sort_by(f64::total_cmp);
    let critical_value = empirical_quantile(&sorted, 1.0 - opts.alpha);
    let chisq = chisq_pvalue(t_observed, spec.len(), q);

    Ok(TestResult {
        t_observed,
        bootstrap_stats,
        p_value_bootstrap,
        critical_value,
        p_value_chisq: chisq.p_value,
        df_chisq: chisq.df,
        b: opts.b - dropped,
        requested_b: opts.b,
        dropped,
        alpha: opts.alpha,
        reject: p_value_bootstrap <= opts.alpha,
        lambda,
        q,
        warnings,
    })
}

/// The chi-squared variant: same fits and statistic, no resampling.
pub fn chisq_test(
    data: &DynamicNetwork,
    spec: &StatisticSpec,
    opts: &TestOptions,
) -> Result<TestResult> {
    let fit_h1 = fit_vcergm(data, spec, &opts.fit)?;
    let pooled = fit_null_pooled(data, spec)?;
    let q = fit_h1.phi.q();
    let phi_h0 = pooled.coefficient_matrix(q);
    let t_observed = test_statistic(&fit_h1, &phi_h0, data)?;
    let chisq = chisq_pvalue(t_observed, spec.len(), q);
    let mut warnings = fit_h1.warnings.clone();
    if chisq.vacuous {
        warnings.push("q = 1 leaves zero degrees of freedom; the chi-squared test is vacuous".into());
    }
    Ok(TestResult {
        t_observed,
        bootstrap_stats: Vec::new(),
        p_value_bootstrap: f64::NAN,
        critical_value: f64::NAN,
        p_value_chisq: chisq.p_value,
        df_chisq: chisq.df,
        b: 0,
        requested_b: 0,
        dropped: 0,
        alpha: opts.alpha,
        reject: chisq.p_value <= opts.alpha,
        lambda: fit_h1.lambda,
        q,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{build_basis, BasisDim};
    use crate::netstats::Statistic;
    use crate::sampler::sample_sequence_const;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn edges_spec() -> StatisticSpec {
        StatisticSpec::new(vec![Statistic::EdgeDensity]).unwrap()
    }

    fn random_net(n: usize, k: usize, seed: u64) -> DynamicNetwork {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let snaps = (0..k)
            .map(|s| {
                let mut g = crate::dyngraph::Graph::empty(n, true);
                let dyads: Vec<_> = g.dyads().collect();
                for (i, j) in dyads {
                    let v = rng.gen::<f64>() < 0.5;
                    g.set_dyad(i, j, v);
                }
                (s as f64 + 1.0, g)
            })
            .collect();
        DynamicNetwork::new(snaps, true).unwrap()
    }

    #[test]
    fn pll_at_zero_matches_count() {
        let net = random_net(5, 4, 1);
        let spec = edges_spec();
        let basis = build_basis(net.times(), BasisDim::Fixed(4), 4).unwrap();
        let zero = CoefficientMatrix::from_rows(vec![vec![0.0; 4]]).unwrap();
        let pll = pseudo_log_likelihood(&zero, &net, &spec, &basis).unwrap();
        let expect = -(net.total_dyads() as f64) * std::f64::consts::LN_2;
        assert!((pll - expect).abs() < 1e-10);
    }

    #[test]
    fn pll_dimension_mismatch_errors() {
        let net = random_net(5, 4, 2);
        let spec = edges_spec();
        let basis = build_basis(net.times(), BasisDim::Fixed(4), 4).unwrap();
        let wrong = CoefficientMatrix::from_rows(vec![vec![0.0; 3]]).unwrap();
        assert!(pseudo_log_likelihood(&wrong, &net, &spec, &basis).is_err());
    }

    #[test]
    fn pll_matches_fit_result_exactly() {
        let net = random_net(6, 5, 3);
        let spec = edges_spec();
        let fit = fit_vcergm(&net, &spec, &FitOptions::default()).unwrap();
        let pll = pseudo_log_likelihood(&fit.phi, &net, &spec, &fit.basis).unwrap();
        assert_eq!(pll.to_bits(), fit.pseudo_loglik.to_bits());
    }

    #[test]
    fn statistic_is_zero_for_identical_fits() {
        let net = random_net(6, 5, 4);
        let spec = edges_spec();
        let fit = fit_vcergm(&net, &spec, &FitOptions::default()).unwrap();
        let phi = fit.phi.clone();
        let t = test_statistic(&fit, &phi, &net).unwrap();
        assert_eq!(t, 0.0);
    }

    #[test]
    fn statistic_nonnegative_over_random_data() {
        // H0 sits in the penalty null space, so the penalized H1 optimum
        // has at least the null's unpenalized pseudo-likelihood.
        for seed in 0..20 {
            let net = random_net(5, 4, 100 + seed);
            let spec = edges_spec();
            let fit_h1 = fit_vcergm(&net, &spec, &FitOptions::default()).unwrap();
            let pooled = fit_null_pooled(&net, &spec).unwrap();
            let phi0 = pooled.coefficient_matrix(fit_h1.phi.q());
            let t = test_statistic(&fit_h1, &phi0, &net).unwrap();
            assert!(t >= -1e-8, "seed {seed}: T = {t}");
        }
    }

    #[test]
    fn chisq_reference_values() {
        let t = chisq_pvalue(3.841, 1, 2);
        assert_eq!(t.df, 1);
        assert!((t.p_value - 0.05).abs() < 1e-3, "p {}", t.p_value);
        assert_eq!(chisq_pvalue(0.0, 2, 5).p_value, 1.0);
        let lo = chisq_pvalue(2.0, 1, 3).p_value;
        let hi = chisq_pvalue(5.0, 1, 3).p_value;
        assert!(hi < lo);
        let vac = chisq_pvalue(1.0, 2, 1);
        assert!(vac.vacuous);
        assert_eq!(vac.df, 0);
        assert_eq!(vac.p_value, 0.0);
        assert_eq!(chisq_pvalue(-1.0, 2, 1).p_value, 1.0);
    }

    #[test]
    fn bootstrap_degenerate_single_replicate() {
        let n = 8;
        let spec = edges_spec();
        let times: Vec<f64> = (1..=6).map(|k| k as f64).collect();
        let net = sample_sequence_const(
            &[0.0],
            &times,
            n,
            &spec,
            true,
            &SamplerConfig::with_seed(9),
        )
        .unwrap();
        let opts = TestOptions {
            b: 1,
            seed: 7,
            sampler: SamplerConfig {
                sweeps: 30,
                burn_in: 10,
                ..SamplerConfig::default()
            },
            ..TestOptions::default()
        };
        let res = bootstrap_test(&net, &spec, &opts).unwrap();
        assert!(res.p_value_bootstrap == 0.0 || res.p_value_bootstrap == 1.0);
        assert_eq!(res.bootstrap_stats.len(), 1);
    }

    #[test]
    fn bootstrap_determinism_and_p_value_identity() {
        let n = 7;
        let spec = edges_spec();
        let times: Vec<f64> = (1..=8).map(|k| k as f64).collect();
        let net = sample_sequence_const(
            &[0.2 * (n * (n - 1)) as f64],
            &times,
            n,
            &spec,
            true,
            &SamplerConfig::with_seed(11),
        )
        .unwrap();
        let opts = TestOptions {
            b: 24,
            seed: 5,
            sampler: SamplerConfig {
                sweeps: 30,
                burn_in: 10,
                ..SamplerConfig::default()
            },
            ..TestOptions::default()
        };
        let a = bootstrap_test(&net, &spec, &opts).unwrap();
        let b = bootstrap_test(&net, &spec, &opts).unwrap();
        assert_eq!(a.t_observed.to_bits(), b.t_observed.to_bits());
        assert_eq!(a.bootstrap_stats.len(), b.bootstrap_stats.len());
        for (x, y) in a.bootstrap_stats.iter().zip(b.bootstrap_stats.iter()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        assert_eq!(a.recompute_p_value().to_bits(), a.p_value_bootstrap.to_bits());
        assert_eq!(a.reject, a.p_value_bootstrap <= a.alpha);
    }
}
