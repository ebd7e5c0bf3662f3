//! Varying-coefficient exponential random graph models (VCERGMs) for dynamic
//! binary networks.
//!
//! A VCERGM places an exponential random graph model (ERGM) on each snapshot
//! of a network time series and lets the coefficient vector vary smoothly in
//! time: `phi(t) = Phi * B(t)` for a B-spline basis `B` and a `p x q`
//! coefficient matrix `Phi`. Fitting maximizes a penalized logistic
//! pseudo-likelihood over dyad-level change statistics, with a curvature
//! penalty on each coefficient function and GCV-selected smoothing.
//!
//! The crate is organized around the pipeline:
//!
//! - [`dyngraph`] — binary graphs, dynamic network sequences, edge-list I/O;
//! - [`netstats`] — standardized network statistics and their change
//!   statistics under single-dyad toggles;
//! - [`basis`] — clamped B-spline bases and the roughness penalty matrix;
//! - [`mple`] — design assembly, penalized IRLS, GCV, and the baseline
//!   fitting procedures (pooled, cross-sectional, two-step);
//! - [`sampler`] — Gibbs sampling from (VC)ERGM distributions plus exact
//!   enumeration oracles on tiny graphs;
//! - [`inference`] — pseudo-likelihood ratio test for temporal heterogeneity
//!   with parametric-bootstrap or chi-squared calibration;
//! - [`simbench`] — simulation studies: estimation error, test power,
//!   and timing comparisons.

pub mod basis;
pub mod dyngraph;
mod error;
pub mod inference;
pub mod mple;
pub mod netstats;
pub mod sampler;
pub mod simbench;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Derives an independent 64-bit seed for a numbered substream.
///
/// Two rounds of SplitMix64 over `base` offset by the stream index; used to
/// give every snapshot, bootstrap replicate, and benchmark replicate its own
/// reproducible RNG stream.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    for _ in 0..2 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut x = z;
        x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z = x ^ (x >> 31);
    }
    z
}
