//! Clamped B-spline bases over a rescaled time domain and the curvature
//! penalty matrix.
//!
//! Observation times are affinely mapped to `[0, 1]`; boundary knots sit at 0
//! and 1 with full multiplicity and interior knots at quantiles of the
//! rescaled times, which keeps the basis well conditioned under unequally
//! spaced (e.g. partially missing) observations. The penalty is the
//! discretized integrated squared second derivative,
//! `Omega[i][j] = sum_s D2B_i(s) * D2B_j(s)` over the rescaled observation
//! times; an exact Gauss–Legendre integral is available behind
//! [`OmegaMode::ExactIntegral`] for sensitivity checks.

use nalgebra::DMatrix;

use crate::{Error, Result};

/// Basis dimension request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisDim {
    /// `q = min(10, max(order, K/4 + order - 1))` for `K` observation times.
    Auto,
    Fixed(usize),
}

/// How the penalty matrix is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OmegaMode {
    /// Sum of second-derivative outer products over the observed times.
    #[default]
    Discrete,
    /// Exact integral of the second-derivative products over `[0, 1]`.
    ExactIntegral,
}

/// A clamped B-spline system: knots, penalty, and the original time domain.
#[derive(Debug, Clone)]
pub struct BasisSystem {
    order: usize,
    q: usize,
    knots: Vec<f64>,
    omega: DMatrix<f64>,
    eval_times: Vec<f64>,
    domain: Option<(f64, f64)>,
}

/// The auto rule for the basis dimension.
pub fn auto_basis_dim(k: usize, order: usize) -> usize {
    10.min(order.max(k / 4 + order - 1))
}

/// Builds a basis on the given strictly increasing observation times with the
/// default discrete penalty.
pub fn build_basis(times: &[f64], dim: BasisDim, order: usize) -> Result<BasisSystem> {
    build_basis_with(times, dim, order, OmegaMode::Discrete)
}

/// Builds a basis with an explicit penalty mode.
pub fn build_basis_with(
    times: &[f64],
    dim: BasisDim,
    order: usize,
    omega_mode: OmegaMode,
) -> Result<BasisSystem> {
    if order < 2 {
        return Err(Error::InvalidOrder { min: 2, got: order });
    }
    let k = times.len();
    if k < 2 {
        return Err(Error::TooFewSnapshots { need: 2, found: k });
    }
    for w in times.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::NonIncreasingTimes);
        }
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFinite("observation times"));
    }
    let q = match dim {
        BasisDim::Auto => auto_basis_dim(k, order),
        BasisDim::Fixed(q) => {
            if q < order {
                return Err(Error::InvalidBasisDim {
                    q,
                    why: format!("must be at least the spline order {order}"),
                });
            }
            q
        }
    };

    let t_min = times[0];
    let t_max = *times.last().unwrap();
    let rescaled: Vec<f64> = times.iter().map(|t| (t - t_min) / (t_max - t_min)).collect();

    let interior = q - order;
    let mut knots = Vec::with_capacity(q + order);
    knots.extend(std::iter::repeat(0.0).take(order));
    for j in 1..=interior {
        knots.push(quantile(&rescaled, j as f64 / (interior + 1) as f64));
    }
    knots.extend(std::iter::repeat(1.0).take(order));

    let mut basis = BasisSystem {
        order,
        q,
        knots,
        omega: DMatrix::zeros(q, q),
        eval_times: rescaled,
        domain: Some((t_min, t_max)),
    };
    basis.omega = compute_penalty(&basis, omega_mode)?;
    Ok(basis)
}

/// Type-7 quantile (linear interpolation of order statistics) of a sorted
/// sample.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

impl BasisSystem {
    /// The degenerate single-function basis `B(t) = (1)`, used for pooled
    /// (constant-coefficient) fits. Its domain is unrestricted and its
    /// penalty is zero.
    pub fn constant() -> BasisSystem {
        BasisSystem {
            order: 1,
            q: 1,
            knots: vec![0.0, 1.0],
            omega: DMatrix::zeros(1, 1),
            eval_times: Vec::new(),
            domain: None,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Basis dimension `q`.
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Interior knots (strictly inside `(0, 1)`).
    pub fn interior_knots(&self) -> &[f64] {
        &self.knots[self.order..self.knots.len() - self.order]
    }

    /// Rescaled observation times used for the discrete penalty.
    pub fn eval_times(&self) -> &[f64] {
        &self.eval_times
    }

    /// The penalty matrix.
    pub fn omega(&self) -> &DMatrix<f64> {
        &self.omega
    }

    /// Original time domain, if the basis is tied to data.
    pub fn domain(&self) -> Option<(f64, f64)> {
        self.domain
    }

    pub fn is_constant(&self) -> bool {
        self.q == 1 && self.order == 1
    }

    /// Maps an original time into `[0, 1]`, rejecting times outside the
    /// domain (no extrapolation).
    pub fn rescale(&self, t: f64) -> Result<f64> {
        match self.domain {
            None => Ok(0.5),
            Some((a, b)) => {
                if t < a || t > b || !t.is_finite() {
                    Err(Error::OutOfDomain(t))
                } else {
                    Ok((t - a) / (b - a))
                }
            }
        }
    }

    /// Evaluates all `q` basis functions at `u` in `[0, 1]`.
    pub fn evaluate(&self, u: f64) -> Result<Vec<f64>> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::OutOfDomain(u));
        }
        if self.is_constant() {
            return Ok(vec![1.0]);
        }
        Ok(self.eval_all_order(u, self.order))
    }

    /// Evaluates the basis at an original-scale time.
    pub fn evaluate_at_original(&self, t: f64) -> Result<Vec<f64>> {
        let u = self.rescale(t)?;
        self.evaluate(u)
    }

    /// Second derivatives of all basis functions at `u`, using right limits
    /// at knot locations.
    pub fn second_derivatives(&self, u: f64) -> Result<Vec<f64>> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::OutOfDomain(u));
        }
        let k = self.order;
        if k < 3 {
            return Ok(vec![0.0; self.q]);
        }
        // D2 B_{i,k} in terms of order k-2 values:
        //   (k-1)(k-2) [ (B_i/a - B_{i+1}/b)/(t_{i+k-1}-t_i)
        //              - (B_{i+1}/b - B_{i+2}/c)/(t_{i+k}-t_{i+1}) ]
        // with a = t_{i+k-2}-t_i, b = t_{i+k-1}-t_{i+1}, c = t_{i+k}-t_{i+2}.
        let lower = self.eval_all_order(u, k - 2);
        let t = &self.knots;
        let scale = ((k - 1) * (k - 2)) as f64;
        let mut out = vec![0.0; self.q];
        for i in 0..self.q {
            let term_a = safe_div(lower[i], t[i + k - 2] - t[i]);
            let term_b = safe_div(lower[i + 1], t[i + k - 1] - t[i + 1]);
            let term_c = safe_div(lower[i + 2], t[i + k] - t[i + 2]);
            let left = safe_div(term_a - term_b, t[i + k - 1] - t[i]);
            let right = safe_div(term_b - term_c, t[i + k] - t[i + 1]);
            out[i] = scale * (left - right);
        }
        Ok(out)
    }

    /// Greville abscissae; the coefficient vector that reproduces the
    /// identity function `t` on `[0, 1]`.
    pub fn greville(&self) -> Vec<f64> {
        let k = self.order;
        (0..self.q)
            .map(|i| self.knots[i + 1..i + k].iter().sum::<f64>() / (k - 1) as f64)
            .collect()
    }

    /// Cox–de Boor evaluation of all functions of order `ord` on this knot
    /// vector (right-continuous at interior knots; the point `u = 1` belongs
    /// to the last non-empty span).
    fn eval_all_order(&self, u: f64, ord: usize) -> Vec<f64> {
        let t = &self.knots;
        let m = t.len();
        let mut b = vec![0.0; m - 1];
        let span = if u < 1.0 {
            // Largest i with t[i] <= u < t[i+1].
            let mut s = 0;
            for i in 0..m - 1 {
                if t[i] <= u && u < t[i + 1] {
                    s = i;
                }
            }
            s
        } else {
            // Last non-empty span.
            (0..m - 1).rev().find(|&i| t[i] < t[i + 1]).unwrap()
        };
        b[span] = 1.0;
        for d in 2..=ord {
            let nb = m - d;
            let mut next = vec![0.0; nb];
            for i in 0..nb {
                let mut v = 0.0;
                let den1 = t[i + d - 1] - t[i];
                if den1 > 0.0 {
                    v += (u - t[i]) / den1 * b[i];
                }
                let den2 = t[i + d] - t[i + 1];
                if den2 > 0.0 {
                    v += (t[i + d] - u) / den2 * b[i + 1];
                }
                next[i] = v;
            }
            b = next;
        }
        b
    }
}

#[inline]
fn safe_div(x: f64, den: f64) -> f64 {
    if den > 0.0 {
        x / den
    } else {
        0.0
    }
}

/// Computes the penalty matrix for a built basis.
///
/// Requires order at least 3 so second derivatives exist piecewise.
pub fn compute_penalty(basis: &BasisSystem, mode: OmegaMode) -> Result<DMatrix<f64>> {
    let q = basis.q;
    if basis.is_constant() {
        return Ok(DMatrix::zeros(1, 1));
    }
    if basis.order < 3 {
        // Piecewise-linear splines have zero second derivative away from
        // knots; the right-limit convention makes the discrete sum zero.
        return Ok(DMatrix::zeros(q, q));
    }
    let mut omega = DMatrix::zeros(q, q);
    match mode {
        OmegaMode::Discrete => {
            for &u in &basis.eval_times {
                let d2 = basis.second_derivatives(u)?;
                accumulate_outer(&mut omega, &d2, 1.0);
            }
        }
        OmegaMode::ExactIntegral => {
            let nodes = gauss_legendre(basis.order.max(4) - 2);
            let t = &basis.knots;
            for w in t.windows(2) {
                let (a, b) = (w[0], w[1]);
                if b <= a {
                    continue;
                }
                let half = 0.5 * (b - a);
                let mid = 0.5 * (a + b);
                for &(x, wt) in &nodes {
                    let u = mid + half * x;
                    let d2 = basis.second_derivatives(u)?;
                    accumulate_outer(&mut omega, &d2, wt * half);
                }
            }
        }
    }
    Ok(omega)
}

fn accumulate_outer(omega: &mut DMatrix<f64>, v: &[f64], weight: f64) {
    let q = v.len();
    for i in 0..q {
        if v[i] == 0.0 {
            continue;
        }
        let wi = weight * v[i];
        for j in 0..q {
            omega[(i, j)] += wi * v[j];
        }
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(m, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(m, x);
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Legendre polynomial `P_m` and derivative at `x`.
fn legendre(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=m {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}
