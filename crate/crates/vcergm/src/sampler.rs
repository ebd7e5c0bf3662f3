//! Sampling from (VC)ERGM distributions.
//!
//! [`gibbs_sample`] runs a systematic-scan Gibbs chain over dyads: each dyad
//! is redrawn as Bernoulli of the sigmoid of `phi' Delta_ij` given the
//! current state of all other dyads. Systematic scans make the pass
//! structure, and therefore the seeded output, fully reproducible; the
//! stationary law is unchanged. [`exact_distribution`] enumerates the full
//! state space on tiny graphs as an oracle, and
//! [`check_difference_statistic_equivalence`] verifies by enumeration that a
//! one-step transition model built on difference statistics
//! `g(x, y) = h(x) - h(y)` has conditional kernels identical to the marginal
//! model of `h`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::basis::BasisSystem;
use crate::derive_seed;
use crate::dyngraph::{dyad_count, DynamicNetwork, Graph};
use crate::mple::CoefficientMatrix;
use crate::netstats::{change_for_dyad, compute_statistics, StatisticSpec};
use crate::{Error, Result};

/// Gibbs chain configuration. Identical seeds give identical output.
#[derive(Debug, Clone)]
pub struct SamplerConfig {
    /// Total systematic full-dyad passes; the returned graph is the state
    /// after the last pass.
    pub sweeps: usize,
    /// Warm-up passes, counted within `sweeps`.
    pub burn_in: usize,
    pub seed: u64,
    pub init: InitState,
}

/// Chain initialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitState {
    #[default]
    Empty,
    /// Independent dyads at the empty-graph conditional probability.
    DensityMatched,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            sweeps: 200,
            burn_in: 100,
            seed: 0,
            init: InitState::Empty,
        }
    }
}

impl SamplerConfig {
    pub fn with_seed(seed: u64) -> Self {
        SamplerConfig {
            seed,
            ..SamplerConfig::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.sweeps == 0 || self.sweeps <= self.burn_in {
            return Err(Error::SamplerConfig(format!(
                "sweeps ({}) must exceed burn_in ({})",
                self.sweeps, self.burn_in
            )));
        }
        Ok(())
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Draws one graph from the ERGM with standardized statistics `spec` and
/// coefficients `phi` by systematic-scan Gibbs sampling.
pub fn gibbs_sample(
    phi: &[f64],
    spec: &StatisticSpec,
    n: usize,
    directed: bool,
    config: &SamplerConfig,
) -> Result<Graph> {
    config.validate()?;
    if phi.len() != spec.len() {
        return Err(Error::Dimension(format!(
            "phi length {} != {} statistics",
            phi.len(),
            spec.len()
        )));
    }
    if phi.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("coefficients"));
    }
    spec.validate_for(directed, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut g = Graph::empty(n, directed);
    let p = spec.len();
    let mut delta = vec![0.0; p];
    let dyads: Vec<(usize, usize)> = g.dyads().collect();
    if config.init == InitState::DensityMatched && !dyads.is_empty() {
        // Empty-graph conditional probability; identical for every dyad.
        let (i0, j0) = dyads[0];
        change_for_dyad(&g, spec, i0, j0, &mut delta);
        let p0 = sigmoid(dot(phi, &delta));
        for &(i, j) in &dyads {
            let draw = rng.gen::<f64>() < p0;
            g.set_dyad(i, j, draw);
        }
    }
    for _ in 0..config.sweeps {
        for &(i, j) in &dyads {
            change_for_dyad(&g, spec, i, j, &mut delta);
            let prob = sigmoid(dot(phi, &delta));
            let draw = rng.gen::<f64>() < prob;
            g.set_dyad(i, j, draw);
        }
    }
    Ok(g)
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Draws an independent snapshot at each time with the given per-time
/// coefficients and node counts; snapshot `k` uses the RNG stream derived
/// from `(config.seed, k)`.
pub fn sample_sequence(
    phi_at_times: &[Vec<f64>],
    times: &[f64],
    node_counts: &[usize],
    spec: &StatisticSpec,
    directed: bool,
    config: &SamplerConfig,
) -> Result<DynamicNetwork> {
    if phi_at_times.len() != times.len() || node_counts.len() != times.len() {
        return Err(Error::Dimension(
            "times, coefficients, and node counts must have equal lengths".into(),
        ));
    }
    let mut snaps = Vec::with_capacity(times.len());
    for (k, &t) in times.iter().enumerate() {
        let cfg = SamplerConfig {
            seed: derive_seed(config.seed, k as u64),
            ..config.clone()
        };
        let g = gibbs_sample(&phi_at_times[k], spec, node_counts[k], directed, &cfg)?;
        snaps.push((t, g));
    }
    DynamicNetwork::new(snaps, directed)
}

/// [`sample_sequence`] with a constant coefficient vector and node count.
pub fn sample_sequence_const(
    phi: &[f64],
    times: &[f64],
    n: usize,
    spec: &StatisticSpec,
    directed: bool,
    config: &SamplerConfig,
) -> Result<DynamicNetwork> {
    let phis = vec![phi.to_vec(); times.len()];
    let ns = vec![n; times.len()];
    sample_sequence(&phis, times, &ns, spec, directed, config)
}

/// [`sample_sequence`] with coefficients evaluated from a fitted curve.
pub fn sample_sequence_curve(
    phi: &CoefficientMatrix,
    basis: &BasisSystem,
    times: &[f64],
    n: usize,
    spec: &StatisticSpec,
    directed: bool,
    config: &SamplerConfig,
) -> Result<DynamicNetwork> {
    let phis = times
        .iter()
        .map(|&t| phi.evaluate_at_original(basis, t))
        .collect::<Result<Vec<_>>>()?;
    let ns = vec![n; times.len()];
    sample_sequence(&phis, times, &ns, spec, directed, config)
}

/// Enumeration bounds: directed up to n = 4 (4096 states), undirected up to
/// n = 5 (1024 states).
fn check_enumeration_bounds(n: usize, directed: bool) -> Result<()> {
    let max = if directed { 4 } else { 5 };
    if n > max {
        return Err(Error::EnumerationTooLarge {
            kind: if directed { "directed" } else { "undirected" },
            max,
            n,
        });
    }
    Ok(())
}

/// The full ERGM distribution over all graphs on `n` nodes.
#[derive(Debug, Clone)]
pub struct ExactDistribution {
    n: usize,
    directed: bool,
    probs: Vec<f64>,
}

impl ExactDistribution {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// The graph encoded by state index `idx` (bit `d` is dyad `d` in the
    /// row-major dyad order).
    pub fn graph(&self, idx: usize) -> Graph {
        graph_from_state(self.n, self.directed, idx)
    }

    /// State index of a graph (inverse of [`ExactDistribution::graph`]).
    pub fn state_of(&self, g: &Graph) -> usize {
        let mut state = 0usize;
        for d in 0..g.dyad_count() {
            if g.get_by_index(d) {
                state |= 1 << d;
            }
        }
        state
    }
}

fn graph_from_state(n: usize, directed: bool, state: usize) -> Graph {
    let mut g = Graph::empty(n, directed);
    for d in 0..g.dyad_count() {
        g.set_by_index(d, state >> d & 1 == 1);
    }
    g
}

/// Enumerates the ERGM distribution with masses proportional to
/// `exp(phi' h(z))` over all `2^D` graphs.
pub fn exact_distribution(
    phi: &[f64],
    spec: &StatisticSpec,
    n: usize,
    directed: bool,
) -> Result<ExactDistribution> {
    check_enumeration_bounds(n, directed)?;
    spec.validate_for(directed, n)?;
    if phi.len() != spec.len() {
        return Err(Error::Dimension("phi length != statistic count".into()));
    }
    let d = dyad_count(n, directed);
    let states = 1usize << d;
    let mut logw = Vec::with_capacity(states);
    for state in 0..states {
        let g = graph_from_state(n, directed, state);
        let h = compute_statistics(&g, spec)?;
        logw.push(dot(phi, &h));
    }
    let max = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<f64> = logw.iter().map(|&lw| (lw - max).exp()).collect();
    let z: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= z);
    Ok(ExactDistribution { n, directed, probs })
}

/// Report of the difference-statistic equivalence check.
#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    /// Largest total-variation distance between any conditional kernel and
    /// the marginal distribution.
    pub max_tv: f64,
    /// Number of conditioning states examined.
    pub states: usize,
}

/// Builds, by exact enumeration, the one-step transition kernel with
/// difference statistics `g(x, y) = h(x) - h(y)` and measures how far each
/// conditional distribution of the next graph is from the marginal ERGM
/// of `h`.
pub fn check_difference_statistic_equivalence(
    phi: &[f64],
    spec: &StatisticSpec,
    n: usize,
    directed: bool,
) -> Result<EquivalenceReport> {
    check_enumeration_bounds(n, directed)?;
    let marginal = exact_distribution(phi, spec, n, directed)?;
    let d = dyad_count(n, directed);
    let states = 1usize << d;
    let h: Vec<Vec<f64>> = (0..states)
        .map(|s| compute_statistics(&graph_from_state(n, directed, s), spec))
        .collect::<Result<Vec<_>>>()?;
    let mut max_tv = 0.0f64;
    for prev in 0..states {
        // Kernel weights exp(phi' (h(x) - h(prev))), normalized over x.
        let mut w: Vec<f64> = (0..states)
            .map(|x| {
                let diff: f64 = (0..spec.len())
                    .map(|k| phi[k] * (h[x][k] - h[prev][k]))
                    .sum();
                diff.exp()
            })
            .collect();
        let z: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= z);
        let tv = 0.5
            * w.iter()
                .zip(marginal.probs())
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>();
        max_tv = max_tv.max(tv);
    }
    Ok(EquivalenceReport { max_tv, states })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netstats::Statistic;

    fn edges_spec() -> StatisticSpec {
        StatisticSpec::new(vec![Statistic::EdgeDensity]).unwrap()
    }

    fn edges_rec_spec() -> StatisticSpec {
        StatisticSpec::new(vec![Statistic::EdgeDensity, Statistic::Reciprocity]).unwrap()
    }

    #[test]
    fn zero_phi_gives_half_density() {
        let spec = edges_spec();
        let mut edges = 0usize;
        let mut total = 0usize;
        for rep in 0..1000 {
            let cfg = SamplerConfig {
                sweeps: 5,
                burn_in: 0,
                seed: derive_seed(9, rep),
                init: InitState::Empty,
            };
            let g = gibbs_sample(&[0.0], &spec, 6, true, &cfg).unwrap();
            edges += g.edge_count();
            total += g.dyad_count();
        }
        let density = edges as f64 / total as f64;
        let bound = 3.0 * (0.25 / total as f64).sqrt();
        assert!((density - 0.5).abs() < bound, "density {density}");
    }

    #[test]
    fn edges_only_density_matches_sigmoid() {
        // With a linear statistic the dyads are independent with success
        // probability sigmoid(phi / (n(n-1))).
        let spec = edges_spec();
        let n = 8;
        let phi_model = 1.2 * (n * (n - 1)) as f64;
        let expect = sigmoid(1.2);
        let mut edges = 0usize;
        let mut total = 0usize;
        for rep in 0..800 {
            let cfg = SamplerConfig {
                sweeps: 3,
                burn_in: 0,
                seed: derive_seed(33, rep),
                init: InitState::DensityMatched,
            };
            let g = gibbs_sample(&[phi_model], &spec, n, true, &cfg).unwrap();
            edges += g.edge_count();
            total += g.dyad_count();
        }
        let density = edges as f64 / total as f64;
        let bound = 4.0 * (expect * (1.0 - expect) / total as f64).sqrt();
        assert!((density - expect).abs() < bound, "{density} vs {expect}");
    }

    #[test]
    fn seed_determinism() {
        let spec = edges_rec_spec();
        let cfg = SamplerConfig::with_seed(1234);
        let a = gibbs_sample(&[1.0, 0.5], &spec, 5, true, &cfg).unwrap();
        let b = gibbs_sample(&[1.0, 0.5], &spec, 5, true, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_config_rejected() {
        let spec = edges_spec();
        let cfg = SamplerConfig {
            sweeps: 10,
            burn_in: 10,
            ..SamplerConfig::default()
        };
        assert!(gibbs_sample(&[0.0], &spec, 4, true, &cfg).is_err());
        assert!(gibbs_sample(&[f64::NAN], &spec, 4, true, &SamplerConfig::default()).is_err());
    }

    #[test]
    fn exact_distribution_uniform_at_zero() {
        let spec = edges_spec();
        let dist = exact_distribution(&[0.0], &spec, 3, true).unwrap();
        assert_eq!(dist.len(), 64);
        for &p in dist.probs() {
            assert!((p - 1.0 / 64.0).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_distribution_normalizes_and_factorizes() {
        let spec = edges_spec();
        let n = 3;
        let phi = 0.9 * (n * (n - 1)) as f64;
        let dist = exact_distribution(&[phi], &spec, n, true).unwrap();
        let sum: f64 = dist.probs().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        // Independent-dyad factorization: P(state) = prod p^x (1-p)^(1-x).
        let p_edge = sigmoid(0.9);
        for state in 0..dist.len() {
            let ones = (state as u32).count_ones() as f64;
            let expect = p_edge.powf(ones) * (1.0 - p_edge).powf(6.0 - ones);
            assert!((dist.probs()[state] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn enumeration_bounds_enforced() {
        let spec = edges_spec();
        assert!(exact_distribution(&[0.0], &spec, 5, true).is_err());
        assert!(exact_distribution(&[0.0], &spec, 5, false).is_ok());
        assert!(exact_distribution(&[0.0], &spec, 6, false).is_err());
    }

    #[test]
    fn difference_statistic_kernels_match_marginal() {
        let spec = edges_spec();
        let rep = check_difference_statistic_equivalence(&[0.7], &spec, 3, true).unwrap();
        assert_eq!(rep.states, 64);
        assert!(rep.max_tv < 1e-12, "tv {}", rep.max_tv);

        let rep0 = check_difference_statistic_equivalence(&[0.0], &spec, 3, true).unwrap();
        assert!(rep0.max_tv < 1e-14);

        let spec2 = edges_rec_spec();
        let rep2 = check_difference_statistic_equivalence(&[0.7, 0.4], &spec2, 3, true).unwrap();
        assert!(rep2.max_tv < 1e-12, "tv {}", rep2.max_tv);
    }

    #[test]
    fn gibbs_matches_exact_distribution_tv() {
        // Stationary-law check on the 64-state space at a modest draw count;
        // the acceptance suite runs the full 50k-draw version.
        let spec = edges_rec_spec();
        let phi = [1.0, 0.5];
        let exact = exact_distribution(&phi, &spec, 3, true).unwrap();
        let draws = 50_000;
        let mut counts = vec![0usize; exact.len()];
        for rep in 0..draws {
            let cfg = SamplerConfig {
                sweeps: 30,
                burn_in: 0,
                seed: derive_seed(777, rep as u64),
                init: InitState::Empty,
            };
            let g = gibbs_sample(&phi, &spec, 3, true, &cfg).unwrap();
            counts[exact.state_of(&g)] += 1;
        }
        let tv = 0.5
            * counts
                .iter()
                .zip(exact.probs())
                .map(|(&c, &p)| (c as f64 / draws as f64 - p).abs())
                .sum::<f64>();
        assert!(tv < 0.02, "tv {tv}");
    }

    #[test]
    fn sequence_shapes_and_streams() {
        let spec = edges_spec();
        let times: Vec<f64> = (1..=5).map(|k| k as f64).collect();
        let net =
            sample_sequence_const(&[0.3], &times, 6, &spec, true, &SamplerConfig::with_seed(5))
                .unwrap();
        assert_eq!(net.len(), 5);
        assert_eq!(net.times(), times.as_slice());
        // Same seed, same sequence.
        let net2 =
            sample_sequence_const(&[0.3], &times, 6, &spec, true, &SamplerConfig::with_seed(5))
                .unwrap();
        for k in 0..net.len() {
            assert_eq!(net.graph(k), net2.graph(k));
        }
    }
}
