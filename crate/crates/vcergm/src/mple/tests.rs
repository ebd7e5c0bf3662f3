use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::basis::{build_basis, BasisDim};
use crate::derive_seed;
use crate::dyngraph::{DynamicNetwork, Graph};
use crate::netstats::Statistic;
use crate::sampler::{sample_sequence_const, SamplerConfig};

fn edges_spec() -> StatisticSpec {
    StatisticSpec::new(vec![Statistic::EdgeDensity]).unwrap()
}

fn edges_rec_spec() -> StatisticSpec {
    StatisticSpec::new(vec![Statistic::EdgeDensity, Statistic::Reciprocity]).unwrap()
}

/// Random i.i.d.-dyad network with the given per-snapshot densities.
fn random_network(n: usize, densities: &[f64], directed: bool, seed: u64) -> DynamicNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let snaps = densities
        .iter()
        .enumerate()
        .map(|(k, &d)| {
            let mut g = Graph::empty(n, directed);
            let dyads: Vec<_> = g.dyads().collect();
            for (i, j) in dyads {
                let v = rng.gen::<f64>() < d;
                g.set_dyad(i, j, v);
            }
            (k as f64 + 1.0, g)
        })
        .collect();
    DynamicNetwork::new(snaps, directed).unwrap()
}

/// Network whose snapshots all contain exactly `edges` randomly placed
/// edges, so every per-snapshot density equals the pooled density.
fn random_network_fixed_edges(
    n: usize,
    k: usize,
    edges: usize,
    directed: bool,
    seed: u64,
) -> DynamicNetwork {
    use rand::seq::SliceRandom;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let snaps = (0..k)
        .map(|s| {
            let mut g = Graph::empty(n, directed);
            let mut dyads: Vec<_> = g.dyads().collect();
            dyads.shuffle(&mut rng);
            for &(i, j) in dyads.iter().take(edges) {
                g.set_dyad(i, j, true);
            }
            (s as f64 + 1.0, g)
        })
        .collect();
    DynamicNetwork::new(snaps, directed).unwrap()
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Brute-force Newton solve of the penalized objective on the materialized
/// design matrix; the independent oracle for the blockwise IRLS path.
pub(crate) fn dense_newton(
    h: &DMatrix<f64>,
    y: &[f64],
    penalty: &DMatrix<f64>,
    lambda: f64,
) -> DVector<f64> {
    let nc = h.ncols();
    let yv = DVector::from_column_slice(y);
    let mut beta = DVector::<f64>::zeros(nc);
    let objective = |b: &DVector<f64>| -> f64 {
        let eta = h * b;
        let mut s = 0.0;
        for r in 0..eta.len() {
            s += yv[r] * eta[r] - softplus(eta[r]);
        }
        s - lambda * (penalty * b).dot(b)
    };
    let mut obj = objective(&beta);
    for _ in 0..200 {
        let eta = h * &beta;
        let mu = eta.map(sigmoid);
        let w = mu.map(|m| (m * (1.0 - m)).max(1e-10));
        let grad = h.transpose() * (&yv - &mu) - (penalty * &beta) * (2.0 * lambda);
        let mut hess = h.transpose() * DMatrix::from_diagonal(&w) * h + penalty * (2.0 * lambda);
        for i in 0..nc {
            hess[(i, i)] += 1e-10;
        }
        let step = hess.cholesky().expect("oracle hessian PD").solve(&grad);
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand = &beta + &step * scale;
            let cand_obj = objective(&cand);
            if cand_obj >= obj - 1e-12 * (1.0 + obj.abs()) {
                let done = (&cand - &beta).amax() < 1e-12 * (1.0 + beta.amax());
                beta = cand;
                obj = cand_obj;
                accepted = true;
                if done {
                    return beta;
                }
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    beta
}

/// Scalar Newton solve for the logit of a proportion.
pub(crate) fn scalar_newton_logit(d: f64) -> f64 {
    let mut eta = 0.0;
    for _ in 0..100 {
        let m = sigmoid(eta);
        let step = (d - m) / (m * (1.0 - m)).max(1e-12);
        eta += step;
        if step.abs() < 1e-14 {
            break;
        }
    }
    eta
}

#[test]
fn design_dimensions_small_example() {
    // K = 2, n = 3 directed, p = 2, q = 4: N = 12 rows, 8 columns.
    let net = random_network(3, &[0.4, 0.6], true, 1);
    let basis = build_basis(net.times(), BasisDim::Fixed(4), 4).unwrap();
    let ds = assemble_design(&net, &edges_rec_spec(), &basis).unwrap();
    assert_eq!(ds.n_rows(), 12);
    assert_eq!(ds.n_cols(), 8);
    let h = ds.design_matrix();
    assert_eq!((h.nrows(), h.ncols()), (12, 8));
}

#[test]
fn design_constant_basis_edges_column() {
    let net = random_network(4, &[0.5, 0.5, 0.5], true, 2);
    let ds = assemble_design(&net, &edges_spec(), &BasisSystem::constant()).unwrap();
    let h = ds.design_matrix();
    for r in 0..h.nrows() {
        assert!((h[(r, 0)] - 1.0 / 12.0).abs() < 1e-15);
    }
}

#[test]
fn design_row_order_is_time_major_dyad_row_major() {
    let net = random_network(3, &[0.5, 0.5], true, 3);
    let basis = build_basis(net.times(), BasisDim::Fixed(4), 4).unwrap();
    let ds = assemble_design(&net, &edges_spec(), &basis).unwrap();
    assert_eq!(ds.row_index(0), (1.0, (1, 2)));
    assert_eq!(ds.row_index(1), (1.0, (1, 3)));
    assert_eq!(ds.row_index(2), (1.0, (2, 1)));
    assert_eq!(ds.row_index(6), (2.0, (1, 2)));
}

#[test]
fn design_matches_kronecker_by_hand() {
    let net = random_network(3, &[0.3, 0.7], true, 4);
    let spec = edges_rec_spec();
    let basis = build_basis(net.times(), BasisDim::Fixed(4), 4).unwrap();
    let ds = assemble_design(&net, &spec, &basis).unwrap();
    let h = ds.design_matrix();
    // Row r of snapshot s must equal kron(B_s, Delta_col).
    let mut row = 0;
    for (t, g) in net.iter() {
        let u = basis.rescale(t).unwrap();
        let b = basis.evaluate(u).unwrap();
        let cm = crate::netstats::change_statistics(g, &spec).unwrap();
        for (didx, _) in g.dyads().enumerate() {
            for l in 0..basis.q() {
                for k in 0..spec.len() {
                    let expect = b[l] * cm.get(k, didx);
                    assert!((h[(row, l * spec.len() + k)] - expect).abs() < 1e-15);
                }
            }
            row += 1;
        }
    }
}

#[test]
fn triad_statistic_on_tiny_snapshot_errors() {
    let net = random_network(2, &[0.5, 0.5], false, 5);
    let spec = StatisticSpec::new(vec![Statistic::Triangle]).unwrap();
    let basis = build_basis(net.times(), BasisDim::Fixed(4), 4).unwrap();
    assert!(matches!(
        assemble_design(&net, &spec, &basis),
        Err(Error::TooFewNodes { .. })
    ));
}

#[test]
fn pseudo_loglik_at_zero_phi() {
    let net = random_network(4, &[0.4, 0.6, 0.5], true, 6);
    let basis = build_basis(net.times(), BasisDim::Fixed(4), 4).unwrap();
    let ds = assemble_design(&net, &edges_rec_spec(), &basis).unwrap();
    let zero = CoefficientMatrix::from_flat(&vec![0.0; 8], 2, 4);
    let pll = pseudo_log_likelihood_design(&ds, &zero);
    let expect = -(ds.n_rows() as f64) * std::f64::consts::LN_2;
    assert!((pll - expect).abs() < 1e-10);
}

#[test]
fn closed_form_edges_only_mple() {
    // Edges-only, lambda = 0: when every snapshot shares the pooled density
    // the MPLE is the constant logit(density) * n(n-1) at every t. (With a
    // flexible basis and unequal per-snapshot densities the unpenalized
    // MPLE tracks the per-time densities instead.)
    let net = random_network_fixed_edges(6, 5, 13, true, 7);
    let spec = edges_spec();
    let opts = FitOptions {
        lambda: LambdaRule::Fixed(0.0),
        ..FitOptions::default()
    };
    let fit = fit_vcergm(&net, &spec, &opts).unwrap();
    assert!(fit.converged);
    let d = 13.0 / 30.0;
    let expect = scalar_newton_logit(d) * 30.0;
    for &t in net.times() {
        let phi = fit.phi.evaluate_at_original(&fit.basis, t).unwrap();
        assert!(
            (phi[0] - expect).abs() < 1e-8,
            "phi {} vs {expect} at t={t}",
            phi[0]
        );
    }
    // Interpolated times too: the MLE is the constant coefficient vector.
    let phi_mid = fit.phi.evaluate_at_original(&fit.basis, 2.5).unwrap();
    assert!((phi_mid[0] - expect).abs() < 1e-8);

    // The same identity holds for arbitrary data under the constant basis.
    let uneven = random_network(6, &[0.35, 0.5, 0.62, 0.44], true, 70);
    let ds = assemble_design(&uneven, &spec, &BasisSystem::constant()).unwrap();
    let fit0 = fit_penalized(&ds, 0.0).unwrap();
    let total: usize = uneven.iter().map(|(_, g)| g.edge_count()).sum();
    let d0 = total as f64 / uneven.total_dyads() as f64;
    let expect0 = scalar_newton_logit(d0) * 30.0;
    assert!((fit0.coefficients.get(0, 0) - expect0).abs() < 1e-8);
}

#[test]
fn solver_matches_dense_newton_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for rep in 0..10 {
        let n = 4 + (rep % 2);
        let k = 4 + (rep % 3);
        let densities: Vec<f64> = (0..k).map(|_| 0.35 + 0.3 * rng.gen::<f64>()).collect();
        let net = random_network(n, &densities, true, derive_seed(100, rep as u64));
        let spec = edges_rec_spec();
        let basis = build_basis(net.times(), BasisDim::Fixed(3), 3).unwrap();
        let ds = assemble_design(&net, &spec, &basis).unwrap();
        assert!(ds.n_rows() <= 200);
        let lambda = [0.0, 0.3, 7.0][rep % 3];
        let fit = fit_penalized(&ds, lambda).unwrap();
        assert!(fit.converged, "rep {rep} did not converge");
        let oracle = dense_newton(&ds.design_matrix(), &ds.responses(), ds.penalty(), lambda);
        let got = fit.coefficients.to_flat();
        for c in 0..got.len() {
            assert!(
                (got[c] - oracle[c]).abs() < 1e-6,
                "rep {rep} coord {c}: {} vs {}",
                got[c],
                oracle[c]
            );
        }
    }
}

#[test]
fn penalized_score_vanishes_at_optimum() {
    let net = random_network(6, &[0.35, 0.6, 0.5, 0.42, 0.55], true, 8);
    let spec = edges_rec_spec();
    let basis = build_basis(net.times(), BasisDim::Fixed(3), 3).unwrap();
    let ds = assemble_design(&net, &spec, &basis).unwrap();
    for &lambda in &[0.0, 0.5, 20.0] {
        let fit = fit_penalized(&ds, lambda).unwrap();
        assert!(fit.converged);
        // Recompute the score independently on the materialized design.
        let h = ds.design_matrix();
        let beta = DVector::from_column_slice(&fit.coefficients.to_flat());
        let eta = &h * &beta;
        let resid =
            DVector::from_iterator(ds.n_rows(), ds.responses().iter().zip(eta.iter()).map(|(y, e)| y - sigmoid(*e)));
        let score = h.transpose() * resid - (ds.penalty() * &beta) * (2.0 * lambda);
        assert!(
            score.amax() < 1e-6 * ds.n_rows() as f64,
            "lambda {lambda}: score sup {}",
            score.amax()
        );
    }
}

#[test]
fn objective_path_is_non_decreasing() {
    let net = random_network(5, &[0.3, 0.7, 0.45], true, 9);
    let spec = edges_rec_spec();
    let basis = build_basis(net.times(), BasisDim::Fixed(4), 4).unwrap();
    let ds = assemble_design(&net, &spec, &basis).unwrap();
    let fit = irls::fit_logistic(&ds, Some((ds.penalty(), 0.8)), None, &IrlsOptions::default())
        .unwrap();
    for w in fit.objective_path.windows(2) {
        assert!(w[1] >= w[0] - 1e-9 * (1.0 + w[0].abs()));
    }
}

#[test]
fn huge_lambda_fits_affine_coefficients() {
    // lambda -> 1e12 restricts the fit to the penalty null space: phi
    // affine in rescaled time. Oracle: dense Newton on the two-column
    // affine-constrained design.
    let n = 5;
    let k = 24;
    let densities: Vec<f64> = (0..k).map(|s| 0.3 + 0.4 * (s as f64 / (k - 1) as f64)).collect();
    let net = random_network(n, &densities, true, 10);
    let spec = edges_spec();
    let basis = build_basis(net.times(), BasisDim::Fixed(8), 4).unwrap();
    let ds = assemble_design(&net, &spec, &basis).unwrap();
    let fit = fit_penalized(&ds, 1e12).unwrap();

    // Affine-constrained oracle: eta = (a + b*u) * delta.
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for (t, g) in net.iter() {
        let u = basis.rescale(t).unwrap();
        let cm = crate::netstats::change_statistics(g, &spec).unwrap();
        for (didx, (i, j)) in g.dyads().enumerate() {
            rows.push([cm.get(0, didx), cm.get(0, didx) * u]);
            y.push(if g.get(i, j) { 1.0 } else { 0.0 });
        }
    }
    let h = DMatrix::from_fn(rows.len(), 2, |r, c| rows[r][c]);
    let zero_pen = DMatrix::zeros(2, 2);
    let ab = dense_newton(&h, &y, &zero_pen, 0.0);
    for &t in net.times() {
        let u = basis.rescale(t).unwrap();
        let phi = fit.phi_at(&basis, u);
        let expect = ab[0] + ab[1] * u;
        assert!(
            (phi[0] - expect).abs() < 1e-4,
            "t {t}: {} vs {expect}",
            phi[0]
        );
    }
}

#[test]
fn complete_separation_hits_cap_with_flag() {
    // All-empty snapshots with an edges-only model: the MPLE diverges to
    // -infinity; the solver must stop at the cap and flag it, not error.
    let snaps: Vec<(f64, Graph)> = (0..3).map(|k| (k as f64, Graph::empty(4, true))).collect();
    let net = DynamicNetwork::new(snaps, true).unwrap();
    let spec = edges_spec();
    let basis = build_basis(net.times(), BasisDim::Fixed(3), 3).unwrap();
    let ds = assemble_design(&net, &spec, &basis).unwrap();
    let fit = fit_penalized(&ds, 0.0).unwrap();
    assert!(!fit.converged);
    assert!(fit.separation_suspected);
    assert_eq!(fit.iterations, IrlsOptions::default().max_iter);
}

#[test]
fn null_reduction_constant_basis_equals_pooled() {
    let net = random_network(5, &[0.3, 0.55, 0.4, 0.6], true, 11);
    let spec = edges_rec_spec();
    let ds = assemble_design(&net, &spec, &BasisSystem::constant()).unwrap();
    let fit = fit_penalized(&ds, 0.0).unwrap();
    let pooled = fit_null_pooled(&net, &spec).unwrap();
    for k in 0..spec.len() {
        assert!((fit.coefficients.get(k, 0) - pooled.phi0[k]).abs() < 1e-6);
    }
}

#[test]
fn pooled_closed_form_and_broadcast() {
    let net = random_network(6, &[0.45, 0.52, 0.38], true, 12);
    let spec = edges_spec();
    let pooled = fit_null_pooled(&net, &spec).unwrap();
    assert!(pooled.converged);
    assert!(!pooled.ridged);
    let total_edges: usize = net.iter().map(|(_, g)| g.edge_count()).sum();
    let d = total_edges as f64 / net.total_dyads() as f64;
    let expect = scalar_newton_logit(d) * 30.0;
    assert!((pooled.phi0[0] - expect).abs() < 1e-7);

    let basis = build_basis(net.times(), BasisDim::Fixed(5), 4).unwrap();
    let cm = pooled.coefficient_matrix(basis.q());
    let v0 = cm.evaluate(&basis, 0.0).unwrap()[0];
    for &u in &[0.17, 0.5, 0.83, 1.0] {
        let v = cm.evaluate(&basis, u).unwrap()[0];
        assert!((v - v0).abs() < 1e-12);
    }
}

#[test]
fn pooled_single_snapshot_equals_cross_sectional() {
    let net = random_network(5, &[0.47], true, 13);
    let spec = edges_rec_spec();
    let pooled = fit_null_pooled(&net, &spec).unwrap();
    let cs = fit_cross_sectional(&net, &spec).unwrap();
    let est = cs.estimates[0].as_ref().unwrap();
    for k in 0..spec.len() {
        assert!((pooled.phi0[k] - est[k]).abs() < 1e-8);
    }
}

#[test]
fn cross_sectional_shapes_and_separation_flag() {
    // A complete snapshot has an infinite edges-only MLE: flagged missing.
    let mut complete = Graph::empty(4, true);
    let dyads: Vec<_> = complete.dyads().collect();
    for (i, j) in dyads {
        complete.set_dyad(i, j, true);
    }
    let mut snaps = vec![(0.0, complete)];
    let part = random_network(4, &[0.5, 0.5], true, 14);
    snaps.push((1.0, part.graph(0).clone()));
    snaps.push((2.0, part.graph(1).clone()));
    let net = DynamicNetwork::new(snaps, true).unwrap();
    let cs = fit_cross_sectional(&net, &edges_spec()).unwrap();
    assert_eq!(cs.estimates.len(), 3);
    assert!(cs.estimates[0].is_none());
    assert!(cs.estimates[1].is_some());
    assert_eq!(cs.n_missing(), 1);
}

#[test]
fn cross_sectional_scatters_around_pooled() {
    // Constant-coefficient data: per-time estimates stay within a +-3 SE
    // band of the pooled estimate (SE from the logistic information of a
    // single snapshot).
    let n = 16;
    let spec = edges_spec();
    let times: Vec<f64> = (1..=12).map(|k| k as f64).collect();
    let phi_model = 0.4 * (n * (n - 1)) as f64;
    let net = sample_sequence_const(
        &[phi_model],
        &times,
        n,
        &spec,
        true,
        &SamplerConfig::with_seed(2024),
    )
    .unwrap();
    let pooled = fit_null_pooled(&net, &spec).unwrap();
    let cs = fit_cross_sectional(&net, &spec).unwrap();
    let d_count = (n * (n - 1)) as f64;
    let p_edge = sigmoid(pooled.phi0[0] / d_count);
    // Var(logit-hat) ~ 1/(D p (1-p)); coefficient scale multiplies by D.
    let se = (d_count / (p_edge * (1.0 - p_edge))).sqrt();
    let mut inside = 0;
    for est in cs.estimates.iter().flatten() {
        if (est[0] - pooled.phi0[0]).abs() <= 3.0 * se {
            inside += 1;
        }
    }
    assert!(inside >= 11, "only {inside} of 12 inside the 3-SE band");
}

#[test]
fn two_step_reproduces_affine_series() {
    // Feed cross-sectional estimates lying exactly on a line through the
    // smoother by constructing data whose per-time estimates are affine is
    // fragile; instead exercise smooth_series directly via fit_two_step's
    // path: build a network, then check the smoother on its basis with
    // synthetic affine values.
    let net = random_network(5, &[0.4, 0.5, 0.6, 0.45, 0.55], true, 15);
    let basis = build_basis(net.times(), BasisDim::Fixed(5), 4).unwrap();
    let us: Vec<f64> = net.times().iter().map(|&t| basis.rescale(t).unwrap()).collect();
    let vals: Vec<f64> = us.iter().map(|&u| 1.5 - 2.0 * u).collect();
    let coef = smooth_series(&basis, &us, &vals, &default_lambda_grid()).unwrap();
    for (s, &u) in us.iter().enumerate() {
        let b = basis.evaluate(u).unwrap();
        let fitted: f64 = b.iter().zip(coef.iter()).map(|(x, c)| x * c).sum();
        assert!(
            (fitted - vals[s]).abs() < 1e-8,
            "u {u}: {fitted} vs {}",
            vals[s]
        );
    }
}

#[test]
fn two_step_interpolates_past_flagged_gaps() {
    let mut complete = Graph::empty(5, true);
    let dyads: Vec<_> = complete.dyads().collect();
    for (i, j) in dyads {
        complete.set_dyad(i, j, true);
    }
    let base = random_network(5, &[0.45, 0.5, 0.55, 0.5], true, 16);
    let mut snaps: Vec<(f64, Graph)> = base.iter().map(|(t, g)| (t, g.clone())).collect();
    snaps.insert(2, (2.5, complete));
    let net = DynamicNetwork::new(snaps, true).unwrap();
    let spec = edges_spec();
    let basis = build_basis(net.times(), BasisDim::Fixed(4), 4).unwrap();
    let phi = fit_two_step(&net, &spec, &basis).unwrap();
    for &t in net.times() {
        let v = phi.evaluate_at_original(&basis, t).unwrap()[0];
        assert!(v.is_finite());
    }
}

#[test]
fn two_step_errors_when_all_missing() {
    let mut complete = Graph::empty(4, true);
    let dyads: Vec<_> = complete.dyads().collect();
    for (i, j) in dyads {
        complete.set_dyad(i, j, true);
    }
    let snaps: Vec<(f64, Graph)> = (0..3).map(|k| (k as f64, complete.clone())).collect();
    let net = DynamicNetwork::new(snaps, true).unwrap();
    let spec = edges_spec();
    let basis = build_basis(net.times(), BasisDim::Fixed(3), 3).unwrap();
    assert!(matches!(
        fit_two_step(&net, &spec, &basis),
        Err(Error::AllMissing(_))
    ));
}

#[test]
fn select_lambda_singleton_and_shape() {
    let net = random_network(5, &[0.4, 0.6, 0.5, 0.45], true, 17);
    let spec = edges_spec();
    let basis = build_basis(net.times(), BasisDim::Fixed(4), 4).unwrap();
    let ds = assemble_design(&net, &spec, &basis).unwrap();
    let (lam, path) = select_lambda(&ds, &[0.37]).unwrap();
    assert_eq!(lam, 0.37);
    assert_eq!(path.scores.len(), 1);

    let grid = default_lambda_grid();
    let (_, path) = select_lambda(&ds, &grid).unwrap();
    assert_eq!(path.scores.len(), grid.len());
    assert!(path.scores.iter().all(|s| s.is_finite()));
    assert!(select_lambda(&ds, &[]).is_err());
    assert!(select_lambda(&ds, &[0.0]).is_err());
}

#[test]
fn select_lambda_prefers_smooth_under_constant_truth() {
    // Data simulated from a constant coefficient: GCV should land in the
    // upper half of the grid in at least 80% of seeded replicates.
    let n = 8;
    let spec = edges_spec();
    let times: Vec<f64> = (1..=20).map(|k| k as f64).collect();
    let phi_model = 0.5 * (n * (n - 1)) as f64;
    let mut upper = 0;
    let reps = 50;
    for rep in 0..reps {
        let net = sample_sequence_const(
            &[phi_model],
            &times,
            n,
            &spec,
            true,
            &SamplerConfig::with_seed(derive_seed(5000, rep)),
        )
        .unwrap();
        let basis = build_basis(net.times(), BasisDim::Auto, 4).unwrap();
        let ds = assemble_design(&net, &spec, &basis).unwrap();
        let grid = adaptive_lambda_grid(&ds);
        let mid = grid[grid.len() / 2];
        let (lam, _) = select_lambda(&ds, &grid).unwrap();
        if lam >= mid {
            upper += 1;
        }
    }
    assert!(
        upper * 100 >= 80 * reps,
        "only {upper}/{reps} replicates selected an upper-half lambda"
    );
}

#[test]
fn refit_is_bit_identical() {
    let net = random_network(6, &[0.4, 0.55, 0.5, 0.6, 0.45], true, 18);
    let spec = edges_rec_spec();
    let opts = FitOptions::default();
    let a = fit_vcergm(&net, &spec, &opts).unwrap();
    let b = fit_vcergm(&net, &spec, &opts).unwrap();
    assert_eq!(a.lambda.to_bits(), b.lambda.to_bits());
    let fa = a.phi.to_flat();
    let fb = b.phi.to_flat();
    for (x, y) in fa.iter().zip(fb.iter()) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
    assert_eq!(a.pseudo_loglik.to_bits(), b.pseudo_loglik.to_bits());
}

#[test]
fn curves_evaluable_at_deleted_times() {
    let net = random_network(6, &[0.4, 0.5, 0.6, 0.5, 0.4, 0.55, 0.5, 0.45], true, 19);
    let dropped = net.without_snapshots(&[2, 4, 5]).unwrap();
    let spec = edges_spec();
    let fit = fit_vcergm(&dropped, &spec, &FitOptions::default()).unwrap();
    for &t in net.times() {
        let v = fit.phi.evaluate_at_original(&fit.basis, t).unwrap()[0];
        assert!(v.is_finite());
    }
}

#[test]
fn over_parameterized_basis_rejected() {
    let net = random_network(2, &[0.5, 0.5], true, 20);
    // n=2 directed: 2 dyads per snapshot, N=4; q=5 > 4 must be rejected.
    let spec = edges_spec();
    let opts = FitOptions {
        basis_dim: BasisDim::Fixed(5),
        ..FitOptions::default()
    };
    assert!(matches!(
        fit_vcergm(&net, &spec, &opts),
        Err(Error::InvalidBasisDim { .. })
    ));
}

#[test]
fn assembly_reuses_basis_evaluation_bit_for_bit() {
    let net = random_network(4, &[0.4, 0.55, 0.5, 0.6], true, 22);
    let spec = edges_spec();
    let basis = build_basis(net.times(), BasisDim::Fixed(4), 4).unwrap();
    let ds = assemble_design(&net, &spec, &basis).unwrap();
    let h = ds.design_matrix();
    // Rows of an edges-only design are B(u_s) scaled by the constant
    // change statistic; the assembly must reuse evaluate() bit for bit.
    let delta = 1.0 / 12.0;
    let mut row = 0;
    for &t in net.times() {
        let u = basis.rescale(t).unwrap();
        let b = basis.evaluate(u).unwrap();
        for _ in 0..12 {
            for l in 0..basis.q() {
                assert_eq!(h[(row, l)].to_bits(), (b[l] * delta).to_bits());
            }
            row += 1;
        }
    }
}

#[test]
fn fit_vcergm_rejects_single_snapshot() {
    let net = random_network(4, &[0.5], true, 21);
    assert!(matches!(
        fit_vcergm(&net, &edges_spec(), &FitOptions::default()),
        Err(Error::TooFewSnapshots { .. })
    ));
}

impl PenalizedFit {
    fn phi_at(&self, basis: &BasisSystem, u: f64) -> Vec<f64> {
        self.coefficients.evaluate(basis, u).unwrap()
    }
}
