//! Penalized maximum pseudo-likelihood estimation.
//!
//! The pseudo-likelihood of a coefficient matrix `Phi` treats every dyad at
//! every observed time as an independent Bernoulli response whose logit is
//! `B_s' Phi' Delta_ij^s`: the basis vector at time `s` crossed with the
//! dyad's change-statistic column. Stacking rows gives a logistic regression
//! with design rows `kron(B_s, Delta_ij^s)` and coefficient `vec(Phi)`
//! (statistic index fastest). The penalized fit maximizes
//!
//! ```text
//! sum_rows [ y eta - log(1 + exp(eta)) ] - lambda vec(Phi)' (Omega ⊗ I_p) vec(Phi)
//! ```
//!
//! by damped Newton / IRLS; the smoothing parameter comes from generalized
//! cross validation on the unweighted linear system. The design matrix is
//! never materialized in the hot path: all solver kernels run on per-snapshot
//! blocks, for which `H'WH = sum_s (B_s B_s') ⊗ (Delta_s W_s Delta_s')`.
//!
//! Besides the penalized fit ([`fit_vcergm`]) this module provides the
//! pooled constant-coefficient fit ([`fit_null_pooled`]), independent
//! per-snapshot fits ([`fit_cross_sectional`]), and the two-step procedure
//! that smooths cross-sectional estimates ([`fit_two_step`]).

mod gcv;
mod irls;
mod linalg;

pub use gcv::{adaptive_lambda_grid, default_lambda_grid, select_lambda, GcvMode, GcvPath};
pub use irls::{IrlsFit, IrlsOptions};

pub(crate) use linalg::{ridged_cholesky, PenaltySpectrum};

use nalgebra::{DMatrix, DVector};

use crate::basis::{build_basis_with, BasisDim, BasisSystem, OmegaMode};
use crate::dyngraph::{DynamicNetwork, Graph};
use crate::netstats::{change_statistics, StatisticSpec};
use crate::{Error, Result};

/// One snapshot's contribution to the stacked logistic system.
#[derive(Debug, Clone)]
pub(crate) struct Block {
    pub time: f64,
    /// Basis values at the snapshot's rescaled time.
    pub b: Vec<f64>,
    /// Change statistics, dyad-major: `delta[d * p + k]`.
    pub delta: Vec<f64>,
    /// Dyad responses in row-major dyad order.
    pub y: Vec<f64>,
    pub dyads: Vec<(usize, usize)>,
}

/// The assembled pseudo-likelihood system: responses, block-structured
/// design, and the penalty `Omega ⊗ I_p`.
#[derive(Debug, Clone)]
pub struct DesignSystem {
    p: usize,
    q: usize,
    n_rows: usize,
    blocks: Vec<Block>,
    penalty: DMatrix<f64>,
    spec: StatisticSpec,
    directed: bool,
    cross: std::sync::OnceLock<CrossProducts>,
}

/// Unweighted cross-products of the design.
#[derive(Debug, Clone)]
pub(crate) struct CrossProducts {
    pub xtx: DMatrix<f64>,
    pub xty: DVector<f64>,
    pub xt1: DVector<f64>,
    /// For binary responses `y'y = sum y`.
    pub yty: f64,
}

/// Result of one evaluation pass over all rows.
#[derive(Debug, Clone)]
pub(crate) struct Sweep {
    pub loglik: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
    pub max_abs_eta: f64,
}

impl DesignSystem {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.p * self.q
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn spec(&self) -> &StatisticSpec {
        &self.spec
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// The penalty matrix `Omega ⊗ I_p` in vec(Phi) column order.
    pub fn penalty(&self) -> &DMatrix<f64> {
        &self.penalty
    }

    /// Concatenated dyad responses in row order.
    pub fn responses(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_rows);
        for blk in &self.blocks {
            out.extend_from_slice(&blk.y);
        }
        out
    }

    /// Provenance of row `r`: observation time and 1-based dyad endpoints.
    pub fn row_index(&self, r: usize) -> (f64, (usize, usize)) {
        let mut offset = 0;
        for blk in &self.blocks {
            if r < offset + blk.y.len() {
                let (i, j) = blk.dyads[r - offset];
                return (blk.time, (i + 1, j + 1));
            }
            offset += blk.y.len();
        }
        panic!("row {r} out of range {}", self.n_rows);
    }

    /// Materializes the full `N x pq` design matrix (small systems only;
    /// used by oracles and file output, never by the solver).
    pub fn design_matrix(&self) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.n_rows, self.n_cols());
        let mut row = 0;
        for blk in &self.blocks {
            for d in 0..blk.y.len() {
                for l in 0..self.q {
                    for k in 0..self.p {
                        h[(row, l * self.p + k)] = blk.b[l] * blk.delta[d * self.p + k];
                    }
                }
                row += 1;
            }
        }
        h
    }

    /// Linear predictor for every row.
    pub(crate) fn eta_into(&self, beta: &[f64], out: &mut [f64]) {
        debug_assert_eq!(beta.len(), self.n_cols());
        debug_assert_eq!(out.len(), self.n_rows);
        let (p, q) = (self.p, self.q);
        let mut phis = vec![0.0; p];
        let mut row = 0;
        for blk in &self.blocks {
            for k in 0..p {
                let mut acc = 0.0;
                for l in 0..q {
                    acc += beta[l * p + k] * blk.b[l];
                }
                phis[k] = acc;
            }
            for d in 0..blk.y.len() {
                let base = d * p;
                let mut eta = 0.0;
                for k in 0..p {
                    eta += phis[k] * blk.delta[base + k];
                }
                out[row] = eta;
                row += 1;
            }
        }
    }

    /// `H' diag(w) H` accumulated blockwise as `(B_s B_s') ⊗ (Delta_s W_s Delta_s')`.
    pub(crate) fn xtwx(&self, w: Option<&[f64]>) -> DMatrix<f64> {
        let (p, q) = (self.p, self.q);
        let nc = p * q;
        let mut out = DMatrix::zeros(nc, nc);
        let mut m = vec![0.0; p * p];
        let mut row = 0;
        for blk in &self.blocks {
            m.iter_mut().for_each(|v| *v = 0.0);
            for d in 0..blk.y.len() {
                let wr = match w {
                    Some(w) => w[row],
                    None => 1.0,
                };
                row += 1;
                let base = d * p;
                for k1 in 0..p {
                    let wk = wr * blk.delta[base + k1];
                    if wk == 0.0 {
                        continue;
                    }
                    for k2 in k1..p {
                        m[k1 * p + k2] += wk * blk.delta[base + k2];
                    }
                }
            }
            // Mirror the lower triangle of the p x p block.
            for k1 in 0..p {
                for k2 in 0..k1 {
                    m[k1 * p + k2] = m[k2 * p + k1];
                }
            }
            for l1 in 0..q {
                for l2 in 0..q {
                    let bb = blk.b[l1] * blk.b[l2];
                    if bb == 0.0 {
                        continue;
                    }
                    for k1 in 0..p {
                        for k2 in 0..p {
                            out[(l1 * p + k1, l2 * p + k2)] += bb * m[k1 * p + k2];
                        }
                    }
                }
            }
        }
        out
    }

    /// Cached unweighted cross-products `H'H`, `H'y`, `H'1`, `y'y`,
    /// computed in one pass on first use; smoothing selection, warm starts,
    /// and grid scaling share them.
    pub(crate) fn cross_products(&self) -> &CrossProducts {
        self.cross.get_or_init(|| {
            let (p, q) = (self.p, self.q);
            let nc = p * q;
            let mut xtx = DMatrix::zeros(nc, nc);
            let mut xty = DVector::zeros(nc);
            let mut xt1 = DVector::zeros(nc);
            let mut yty = 0.0;
            let mut m = vec![0.0; p * p];
            let mut gy = vec![0.0; p];
            let mut g1 = vec![0.0; p];
            for blk in &self.blocks {
                m.iter_mut().for_each(|v| *v = 0.0);
                gy.iter_mut().for_each(|v| *v = 0.0);
                g1.iter_mut().for_each(|v| *v = 0.0);
                for d in 0..blk.y.len() {
                    let base = d * p;
                    let yr = blk.y[d];
                    yty += yr;
                    for k1 in 0..p {
                        let dk = blk.delta[base + k1];
                        g1[k1] += dk;
                        gy[k1] += yr * dk;
                        for k2 in k1..p {
                            m[k1 * p + k2] += dk * blk.delta[base + k2];
                        }
                    }
                }
                for k1 in 0..p {
                    for k2 in 0..k1 {
                        m[k1 * p + k2] = m[k2 * p + k1];
                    }
                }
                for l1 in 0..q {
                    let bl1 = blk.b[l1];
                    if bl1 == 0.0 {
                        continue;
                    }
                    for k in 0..p {
                        xty[l1 * p + k] += bl1 * gy[k];
                        xt1[l1 * p + k] += bl1 * g1[k];
                    }
                    for l2 in 0..q {
                        let bb = bl1 * blk.b[l2];
                        if bb == 0.0 {
                            continue;
                        }
                        for k1 in 0..p {
                            for k2 in 0..p {
                                xtx[(l1 * p + k1, l2 * p + k2)] += bb * m[k1 * p + k2];
                            }
                        }
                    }
                }
            }
            CrossProducts { xtx, xty, xt1, yty }
        })
    }

    /// One streaming pass at `beta`: log-likelihood, score `H'(y - mu)`,
    /// curvature `H'WH`, and the largest |linear predictor|, all derived
    /// from a single exponential per row. Per-block accumulation keeps the
    /// working set cache-resident.
    pub(crate) fn sweep(&self, beta: &[f64], eta_clamp: f64, weight_floor: f64) -> Sweep {
        let (p, q) = (self.p, self.q);
        let nc = p * q;
        let mut loglik = 0.0;
        let mut grad = DVector::zeros(nc);
        let mut hess = DMatrix::zeros(nc, nc);
        let mut max_abs_eta = 0.0f64;
        let mut phis = vec![0.0; p];
        let mut acc_g = vec![0.0; p];
        let mut m = vec![0.0; p * p];
        for blk in &self.blocks {
            for k in 0..p {
                let mut acc = 0.0;
                for l in 0..q {
                    acc += beta[l * p + k] * blk.b[l];
                }
                phis[k] = acc;
            }
            acc_g.iter_mut().for_each(|v| *v = 0.0);
            m.iter_mut().for_each(|v| *v = 0.0);
            for d in 0..blk.y.len() {
                let base = d * p;
                let mut eta = 0.0;
                for k in 0..p {
                    eta += phis[k] * blk.delta[base + k];
                }
                max_abs_eta = max_abs_eta.max(eta.abs());
                let y = blk.y[d];
                // One exp serves the mean, the weight, and the softplus.
                // Beyond the clamp the softplus tail is below 1e-13 and is
                // dropped; the mean saturates at the clamp as elsewhere.
                let (mu, softplus) = if eta.abs() <= eta_clamp {
                    let t = (-eta.abs()).exp();
                    let mu = if eta >= 0.0 { 1.0 / (1.0 + t) } else { t / (1.0 + t) };
                    (mu, eta.max(0.0) + t.ln_1p())
                } else if eta > 0.0 {
                    (1.0 / (1.0 + (-eta_clamp).exp()), eta)
                } else {
                    let t = (-eta_clamp).exp();
                    (t / (1.0 + t), 0.0)
                };
                loglik += y * eta - softplus;
                let w = (mu * (1.0 - mu)).max(weight_floor);
                let resid = y - mu;
                for k1 in 0..p {
                    let dk = blk.delta[base + k1];
                    acc_g[k1] += resid * dk;
                    let wdk = w * dk;
                    for k2 in k1..p {
                        m[k1 * p + k2] += wdk * blk.delta[base + k2];
                    }
                }
            }
            for k1 in 0..p {
                for k2 in 0..k1 {
                    m[k1 * p + k2] = m[k2 * p + k1];
                }
            }
            for l1 in 0..q {
                let bl1 = blk.b[l1];
                if bl1 == 0.0 {
                    continue;
                }
                for k in 0..p {
                    grad[l1 * p + k] += bl1 * acc_g[k];
                }
                for l2 in 0..q {
                    let bb = bl1 * blk.b[l2];
                    if bb == 0.0 {
                        continue;
                    }
                    for k1 in 0..p {
                        for k2 in 0..p {
                            hess[(l1 * p + k1, l2 * p + k2)] += bb * m[k1 * p + k2];
                        }
                    }
                }
            }
        }
        Sweep {
            loglik,
            grad,
            hess,
            max_abs_eta,
        }
    }
}

/// Basis-coefficient matrix `Phi` (`p x q`); `phi(t) = Phi B(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    p: usize,
    q: usize,
    values: DMatrix<f64>,
}

impl CoefficientMatrix {
    /// From `vec(Phi)` in column-stacked order (statistic index fastest).
    pub fn from_flat(beta: &[f64], p: usize, q: usize) -> Self {
        assert_eq!(beta.len(), p * q);
        let mut values = DMatrix::zeros(p, q);
        for l in 0..q {
            for k in 0..p {
                values[(k, l)] = beta[l * p + k];
            }
        }
        CoefficientMatrix { p, q, values }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let p = rows.len();
        if p == 0 || rows[0].is_empty() {
            return Err(Error::Dimension("coefficient matrix must be non-empty".into()));
        }
        let q = rows[0].len();
        if rows.iter().any(|r| r.len() != q) {
            return Err(Error::Dimension("ragged coefficient rows".into()));
        }
        let mut values = DMatrix::zeros(p, q);
        for (k, r) in rows.iter().enumerate() {
            for (l, &v) in r.iter().enumerate() {
                values[(k, l)] = v;
            }
        }
        Ok(CoefficientMatrix { p, q, values })
    }

    /// `vec(Phi)`, statistic index fastest.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.p * self.q);
        for l in 0..self.q {
            for k in 0..self.p {
                out.push(self.values[(k, l)]);
            }
        }
        out
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn get(&self, stat: usize, basis_fn: usize) -> f64 {
        self.values[(stat, basis_fn)]
    }

    /// Row of basis coefficients for one statistic.
    pub fn row(&self, stat: usize) -> Vec<f64> {
        (0..self.q).map(|l| self.values[(stat, l)]).collect()
    }

    /// `phi(u) = Phi B(u)` at a rescaled time.
    pub fn evaluate(&self, basis: &BasisSystem, u: f64) -> Result<Vec<f64>> {
        let b = basis.evaluate(u)?;
        Ok(self.combine(&b))
    }

    /// `phi(t)` at an original-scale time.
    pub fn evaluate_at_original(&self, basis: &BasisSystem, t: f64) -> Result<Vec<f64>> {
        let b = basis.evaluate_at_original(t)?;
        Ok(self.combine(&b))
    }

    fn combine(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.q);
        (0..self.p)
            .map(|k| (0..self.q).map(|l| self.values[(k, l)] * b[l]).sum())
            .collect()
    }
}

/// Assembles the stacked logistic system for a dynamic network, statistic
/// spec, and basis built on the same times.
///
/// Rows are ordered time-major, then by the graph's row-major dyad order.
pub fn assemble_design(
    data: &DynamicNetwork,
    spec: &StatisticSpec,
    basis: &BasisSystem,
) -> Result<DesignSystem> {
    let mut blocks = Vec::with_capacity(data.len());
    let mut n_rows = 0;
    for (t, g) in data.iter() {
        let blk = snapshot_block(g, t, spec, basis)?;
        n_rows += blk.y.len();
        blocks.push(blk);
    }
    let p = spec.len();
    let omega = basis.omega();
    Ok(DesignSystem {
        p,
        q: basis.q(),
        n_rows,
        blocks,
        penalty: kron_identity(omega, p),
        spec: spec.clone(),
        directed: data.is_directed(),
        cross: std::sync::OnceLock::new(),
    })
}

fn snapshot_block(g: &Graph, t: f64, spec: &StatisticSpec, basis: &BasisSystem) -> Result<Block> {
    spec.validate_for(g.is_directed(), g.n())?;
    let u = basis.rescale(t)?;
    let b = basis.evaluate(u)?;
    let cm = change_statistics(g, spec)?;
    let p = spec.len();
    let d_count = g.dyad_count();
    let mut delta = vec![0.0; d_count * p];
    for d in 0..d_count {
        for k in 0..p {
            let v = cm.get(k, d);
            if !v.is_finite() {
                return Err(Error::NonFinite("change statistics"));
            }
            delta[d * p + k] = v;
        }
    }
    let mut y = Vec::with_capacity(d_count);
    let mut dyads = Vec::with_capacity(d_count);
    for (i, j) in g.dyads() {
        y.push(if g.get(i, j) { 1.0 } else { 0.0 });
        dyads.push((i, j));
    }
    Ok(Block { time: t, b, delta, y, dyads })
}

/// `Omega ⊗ I_p` in vec(Phi) column order.
fn kron_identity(omega: &DMatrix<f64>, p: usize) -> DMatrix<f64> {
    let q = omega.nrows();
    let mut out = DMatrix::zeros(p * q, p * q);
    for l1 in 0..q {
        for l2 in 0..q {
            let v = omega[(l1, l2)];
            if v == 0.0 {
                continue;
            }
            for k in 0..p {
                out[(l1 * p + k, l2 * p + k)] = v;
            }
        }
    }
    out
}

/// Log pseudo-likelihood of `Phi` on an assembled system:
/// `sum_rows [ y eta - log(1 + exp(eta)) ]`.
pub fn pseudo_log_likelihood_design(ds: &DesignSystem, phi: &CoefficientMatrix) -> f64 {
    assert_eq!(phi.p(), ds.p());
    assert_eq!(phi.q(), ds.q());
    let beta = phi.to_flat();
    let mut eta = vec![0.0; ds.n_rows()];
    ds.eta_into(&beta, &mut eta);
    let y = ds.responses();
    irls::loglik_from_eta(&y, &eta)
}

/// A penalized fit at a fixed smoothing parameter.
#[derive(Debug, Clone)]
pub struct PenalizedFit {
    pub coefficients: CoefficientMatrix,
    pub converged: bool,
    pub iterations: usize,
    /// Unpenalized log pseudo-likelihood at the estimate.
    pub pseudo_loglik: f64,
    /// Sup-norm of the penalized score at the estimate.
    pub score_sup_norm: f64,
    pub separation_suspected: bool,
}

/// Maximizes the penalized log pseudo-likelihood at a fixed `lambda >= 0`.
pub fn fit_penalized(ds: &DesignSystem, lambda: f64) -> Result<PenalizedFit> {
    fit_penalized_with(ds, lambda, None, &IrlsOptions::default())
}

pub(crate) fn fit_penalized_with(
    ds: &DesignSystem,
    lambda: f64,
    init: Option<&[f64]>,
    opts: &IrlsOptions,
) -> Result<PenalizedFit> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::Config(format!(
            "smoothing parameter must be finite and nonnegative, got {lambda}"
        )));
    }
    let penalty = if lambda > 0.0 {
        Some((ds.penalty(), lambda))
    } else {
        None
    };
    let fit = irls::fit_logistic(ds, penalty, init, opts)?;
    let coefficients = CoefficientMatrix::from_flat(fit.beta.as_slice(), ds.p(), ds.q());
    let pseudo_loglik = pseudo_log_likelihood_design(ds, &coefficients);
    Ok(PenalizedFit {
        coefficients,
        converged: fit.converged,
        iterations: fit.iterations,
        pseudo_loglik,
        score_sup_norm: fit.grad_sup,
        separation_suspected: fit.separation,
    })
}

/// Smoothing-parameter rule for [`fit_vcergm`].
#[derive(Debug, Clone, PartialEq)]
pub enum LambdaRule {
    /// GCV over the given grid (default grid when `None`).
    Auto(Option<Vec<f64>>),
    Fixed(f64),
}

impl Default for LambdaRule {
    fn default() -> Self {
        LambdaRule::Auto(None)
    }
}

/// Options controlling a VCERGM fit.
#[derive(Debug, Clone)]
pub struct FitOptions {
    pub basis_dim: BasisDim,
    pub order: usize,
    pub lambda: LambdaRule,
    pub gcv_mode: GcvMode,
    pub omega_mode: OmegaMode,
    pub irls: IrlsOptions,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            basis_dim: BasisDim::Auto,
            order: 4,
            lambda: LambdaRule::default(),
            gcv_mode: GcvMode::default(),
            omega_mode: OmegaMode::default(),
            irls: IrlsOptions::default(),
        }
    }
}

/// A fitted VCERGM.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub phi: CoefficientMatrix,
    pub lambda: f64,
    pub basis: BasisSystem,
    pub spec: StatisticSpec,
    pub directed: bool,
    pub iterations: usize,
    pub converged: bool,
    pub pseudo_loglik: f64,
    pub gcv_path: Option<GcvPath>,
    pub warnings: Vec<String>,
}

/// End-to-end fit: basis construction, design assembly, GCV smoothing
/// selection, penalized IRLS. Deterministic given data and options.
pub fn fit_vcergm(
    data: &DynamicNetwork,
    spec: &StatisticSpec,
    opts: &FitOptions,
) -> Result<FitResult> {
    if data.len() < 2 {
        return Err(Error::TooFewSnapshots {
            need: 2,
            found: data.len(),
        });
    }
    let basis = build_basis_with(data.times(), opts.basis_dim, opts.order, opts.omega_mode)?;
    if basis.q() > data.total_dyads() {
        return Err(Error::InvalidBasisDim {
            q: basis.q(),
            why: format!(
                "over-parameterized: exceeds the {} dyad observations",
                data.total_dyads()
            ),
        });
    }
    let ds = assemble_design(data, spec, &basis)?;
    let mut warnings = Vec::new();
    let (lambda, gcv_path, warm) = match &opts.lambda {
        LambdaRule::Fixed(v) => (*v, None, None),
        LambdaRule::Auto(grid) => {
            let grid = grid.clone().unwrap_or_else(|| adaptive_lambda_grid(&ds));
            let sel = gcv::select_lambda_detailed(&ds, &grid, opts.gcv_mode, &opts.irls)?;
            if sel.path.flat {
                warnings.push("GCV path is flat; selected the largest grid value".to_string());
            }
            (sel.lambda, Some(sel.path), Some(sel.warm_start))
        }
    };
    let fit = fit_penalized_with(&ds, lambda, warm.as_deref(), &opts.irls)?;
    if fit.separation_suspected {
        warnings.push("possible separation: solver stopped at the iteration cap".to_string());
    }
    Ok(FitResult {
        phi: fit.coefficients,
        lambda,
        basis,
        spec: spec.clone(),
        directed: data.is_directed(),
        iterations: fit.iterations,
        converged: fit.converged,
        pseudo_loglik: fit.pseudo_loglik,
        gcv_path,
        warnings,
    })
}

/// The pooled null fit: one constant coefficient per statistic.
#[derive(Debug, Clone)]
pub struct PooledFit {
    /// Constant coefficient vector, one entry per statistic.
    pub phi0: Vec<f64>,
    pub converged: bool,
    /// True when a tiny ridge was needed to stabilize a separated fit.
    pub ridged: bool,
    pub iterations: usize,
    pub pseudo_loglik: f64,
    p: usize,
}

impl PooledFit {
    /// Broadcasts the constant coefficients to a `p x q` matrix; by the
    /// partition of unity the broadcast evaluates to `phi0` at every time.
    pub fn coefficient_matrix(&self, q: usize) -> CoefficientMatrix {
        let rows = self.phi0.iter().map(|&v| vec![v; q]).collect();
        CoefficientMatrix::from_rows(rows).expect("non-empty by construction")
    }

    pub fn p(&self) -> usize {
        self.p
    }
}

/// Fits the constant-coefficient null model: an unpenalized logistic fit of
/// all dyad responses on the pooled change-statistic columns.
pub fn fit_null_pooled(data: &DynamicNetwork, spec: &StatisticSpec) -> Result<PooledFit> {
    let basis = BasisSystem::constant();
    let ds = assemble_design(data, spec, &basis)?;
    let opts = IrlsOptions::default();
    let fit = irls::fit_logistic(&ds, None, None, &opts);
    let (fit, ridged) = match fit {
        Ok(f) if f.converged => (f, false),
        _ => {
            // Separation fallback: tiny ridge on the coefficients.
            let eye = DMatrix::identity(spec.len(), spec.len());
            (irls::fit_logistic(&ds, Some((&eye, 1e-6)), None, &opts)?, true)
        }
    };
    let phi = CoefficientMatrix::from_flat(fit.beta.as_slice(), spec.len(), 1);
    let pseudo_loglik = pseudo_log_likelihood_design(&ds, &phi);
    Ok(PooledFit {
        phi0: fit.beta.as_slice().to_vec(),
        converged: fit.converged,
        ridged,
        iterations: fit.iterations,
        pseudo_loglik,
        p: spec.len(),
    })
}

/// Independent per-snapshot estimates; `None` marks snapshots whose
/// unpenalized MPLE does not exist (separation) or failed to converge.
#[derive(Debug, Clone)]
pub struct CrossSectionalFit {
    pub times: Vec<f64>,
    pub estimates: Vec<Option<Vec<f64>>>,
}

impl CrossSectionalFit {
    pub fn n_missing(&self) -> usize {
        self.estimates.iter().filter(|e| e.is_none()).count()
    }
}

/// Fits an unpenalized logistic MPLE separately at each snapshot.
pub fn fit_cross_sectional(data: &DynamicNetwork, spec: &StatisticSpec) -> Result<CrossSectionalFit> {
    let basis = BasisSystem::constant();
    let opts = IrlsOptions::default();
    let p = spec.len();
    let mut times = Vec::with_capacity(data.len());
    let mut estimates = Vec::with_capacity(data.len());
    for (t, g) in data.iter() {
        let blk = snapshot_block(g, t, spec, &basis)?;
        let n_rows = blk.y.len();
        let ds = DesignSystem {
            p,
            q: 1,
            n_rows,
            blocks: vec![blk],
            penalty: DMatrix::zeros(p, p),
            spec: spec.clone(),
            directed: data.is_directed(),
            cross: std::sync::OnceLock::new(),
        };
        let est = match irls::fit_logistic(&ds, None, None, &opts) {
            Ok(f) if f.converged && !f.separation => Some(f.beta.as_slice().to_vec()),
            Ok(_) => None,
            Err(Error::Divergence(_)) => None,
            Err(e) => return Err(e),
        };
        times.push(t);
        estimates.push(est);
    }
    Ok(CrossSectionalFit { times, estimates })
}

/// The two-step procedure: cross-sectional fits followed by penalized
/// least-squares B-spline smoothing of each coefficient series, with GCV
/// smoothing selection per statistic. Flagged-missing times are skipped.
pub fn fit_two_step(
    data: &DynamicNetwork,
    spec: &StatisticSpec,
    basis: &BasisSystem,
) -> Result<CoefficientMatrix> {
    let cs = fit_cross_sectional(data, spec)?;
    let grid = default_lambda_grid();
    let mut rows = Vec::with_capacity(spec.len());
    for (k, stat) in spec.entries().iter().enumerate() {
        let mut us = Vec::new();
        let mut vals = Vec::new();
        for (s, est) in cs.estimates.iter().enumerate() {
            if let Some(e) = est {
                us.push(basis.rescale(cs.times[s])?);
                vals.push(e[k]);
            }
        }
        if vals.is_empty() {
            return Err(Error::AllMissing(stat.name()));
        }
        let coef = smooth_series(basis, &us, &vals, &grid)?;
        rows.push(coef);
    }
    CoefficientMatrix::from_rows(rows).map_err(Into::into)
}

/// Penalized least-squares smoother `min ||v - B c||^2 + m lambda c' Omega c`
/// with GCV-selected lambda, following the same criterion used for the
/// logistic fit's smoothing selection.
fn smooth_series(basis: &BasisSystem, us: &[f64], vals: &[f64], grid: &[f64]) -> Result<Vec<f64>> {
    let m = us.len();
    let q = basis.q();
    let mut btb = DMatrix::zeros(q, q);
    let mut btv = DVector::zeros(q);
    let mut vtv = 0.0;
    for (s, &u) in us.iter().enumerate() {
        let b = basis.evaluate(u)?;
        for i in 0..q {
            btv[i] += b[i] * vals[s];
            for j in 0..q {
                btb[(i, j)] += b[i] * b[j];
            }
        }
        vtv += vals[s] * vals[s];
    }
    let spectrum = PenaltySpectrum::new(basis.omega());
    let mf = m as f64;
    // Rescale the nominal grid to this smoother's transition scale, as the
    // logistic path does.
    let tr_p = basis.omega().trace();
    let grid_scale = if tr_p > 0.0 { btb.trace() / (mf * tr_p) } else { 1.0 };
    let mut best: Option<(f64, f64)> = None;
    for &nominal in grid {
        if !(nominal > 0.0) {
            return Err(Error::EmptyGrid);
        }
        let lam = nominal * grid_scale;
        let a = spectrum.solve_vec(&btb, mf * lam, &btv, 0.0)?;
        let rss = vtv - 2.0 * btv.dot(&a) + (&btb * &a).dot(&a);
        let tr = spectrum.solve_mat(&btb, mf * lam, &btb, 0.0)?.trace();
        let g = mf * rss.max(0.0) / (mf - tr).powi(2);
        match best {
            Some((_, bg)) if g > bg => {}
            _ => best = Some((lam, g)),
        }
    }
    let (lam, _) = best.ok_or(Error::EmptyGrid)?;
    let coef = spectrum.solve_vec(&btb, mf * lam, &btv, 0.0)?;
    Ok(coef.as_slice().to_vec())
}

#[cfg(test)]
mod tests;
