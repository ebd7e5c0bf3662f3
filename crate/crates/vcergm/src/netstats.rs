//! Standardized network statistics and change statistics.
//!
//! Each statistic is the raw feature count divided by its maximal possible
//! value on a graph of the same size, so every value lies in `[0, 1]` and
//! coefficients stay comparable across snapshots of different sizes. The
//! closed registry:
//!
//! - `edges` — edge density, directed or undirected;
//! - `reciprocity` — mutual dyads, directed only;
//! - `ctriad` — cyclic triads (directed 3-cycles), directed only;
//! - `twostar` — two-paths, defined on the undirected skeleton;
//! - `triangle` — triangles, defined on the undirected skeleton.
//!
//! On directed graphs `twostar` and `triangle` operate on the symmetrized
//! skeleton (a dyad is present when either orientation is), an extension of
//! their undirected definitions. Adding a statistic means supplying the
//! triple {count, change, max-normalizer} below.

use serde::{Deserialize, Serialize};

use crate::dyngraph::{dyad_count, Graph};
use crate::{Error, Result};

/// A statistic from the closed registry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Statistic {
    EdgeDensity,
    Reciprocity,
    CyclicTriad,
    TwoStar,
    Triangle,
}

impl Statistic {
    /// Parses a CLI/config name, case-insensitively.
    pub fn parse(name: &str) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "edges" => Ok(Statistic::EdgeDensity),
            "reciprocity" => Ok(Statistic::Reciprocity),
            "ctriad" => Ok(Statistic::CyclicTriad),
            "twostar" => Ok(Statistic::TwoStar),
            "triangle" => Ok(Statistic::Triangle),
            other => Err(Error::UnknownStatistic(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Statistic::EdgeDensity => "edges",
            Statistic::Reciprocity => "reciprocity",
            Statistic::CyclicTriad => "ctriad",
            Statistic::TwoStar => "twostar",
            Statistic::Triangle => "triangle",
        }
    }

    /// Whether the statistic is defined only on directed graphs.
    pub fn requires_directed(&self) -> bool {
        matches!(self, Statistic::Reciprocity | Statistic::CyclicTriad)
    }

    /// Whether the statistic involves node triples (undefined for n < 3).
    pub fn is_triadic(&self) -> bool {
        matches!(
            self,
            Statistic::CyclicTriad | Statistic::TwoStar | Statistic::Triangle
        )
    }

    /// Maximal possible raw count on a graph of `n` nodes.
    pub fn max_count(&self, n: usize, directed: bool) -> f64 {
        let c2 = (n * n.saturating_sub(1) / 2) as f64;
        let c3 = if n >= 3 {
            (n * (n - 1) * (n - 2) / 6) as f64
        } else {
            0.0
        };
        match self {
            Statistic::EdgeDensity => dyad_count(n, directed) as f64,
            Statistic::Reciprocity => c2,
            Statistic::CyclicTriad => 2.0 * c3,
            Statistic::TwoStar => 3.0 * c3,
            Statistic::Triangle => c3,
        }
    }
}

/// Ordered, duplicate-free list of statistics defining the model features.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatisticSpec {
    entries: Vec<Statistic>,
}

impl StatisticSpec {
    pub fn new(entries: Vec<Statistic>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptySpec);
        }
        for (k, s) in entries.iter().enumerate() {
            if entries[..k].contains(s) {
                return Err(Error::DuplicateStatistic(s.name().to_string()));
            }
        }
        Ok(StatisticSpec { entries })
    }

    /// Parses a comma-separated list such as `edges,reciprocity`.
    pub fn parse_list(list: &str) -> Result<Self> {
        let entries = list
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(Statistic::parse)
            .collect::<Result<Vec<_>>>()?;
        StatisticSpec::new(entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Statistic] {
        &self.entries
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(Statistic::name).collect()
    }

    /// Checks directedness compatibility and triad-normalizer validity.
    pub fn validate_for(&self, directed: bool, n: usize) -> Result<()> {
        for s in &self.entries {
            if s.requires_directed() && !directed {
                return Err(Error::RequiresDirected { stat: s.name() });
            }
            if s.is_triadic() && n < 3 {
                return Err(Error::TooFewNodes { stat: s.name(), n });
            }
        }
        Ok(())
    }
}

/// Skeleton dyad: present when either orientation is (identity on
/// undirected graphs).
#[inline]
fn skel(g: &Graph, a: usize, b: usize) -> bool {
    if g.is_directed() {
        g.get(a, b) || g.get(b, a)
    } else {
        g.get(a, b)
    }
}

#[inline]
fn skeleton_degree(g: &Graph, v: usize) -> usize {
    (0..g.n()).filter(|&u| u != v && skel(g, v, u)).count()
}

/// Standardized statistic vector `h(x, n)`; every entry lies in `[0, 1]`.
pub fn compute_statistics(g: &Graph, spec: &StatisticSpec) -> Result<Vec<f64>> {
    spec.validate_for(g.is_directed(), g.n())?;
    let n = g.n();
    let mut out = Vec::with_capacity(spec.len());
    for s in spec.entries() {
        let count = match s {
            Statistic::EdgeDensity => g.edge_count() as f64,
            Statistic::Reciprocity => {
                let mut c = 0usize;
                for i in 0..n {
                    for j in (i + 1)..n {
                        if g.get(i, j) && g.get(j, i) {
                            c += 1;
                        }
                    }
                }
                c as f64
            }
            Statistic::CyclicTriad => {
                let mut c = 0usize;
                for i in 0..n {
                    for j in (i + 1)..n {
                        for k in (j + 1)..n {
                            if g.get(i, j) && g.get(j, k) && g.get(k, i) {
                                c += 1;
                            }
                            if g.get(i, k) && g.get(k, j) && g.get(j, i) {
                                c += 1;
                            }
                        }
                    }
                }
                c as f64
            }
            Statistic::TwoStar => {
                let mut c = 0usize;
                for v in 0..n {
                    let d = skeleton_degree(g, v);
                    c += d * d.saturating_sub(1) / 2;
                }
                c as f64
            }
            Statistic::Triangle => {
                let mut c = 0usize;
                for i in 0..n {
                    for j in (i + 1)..n {
                        if !skel(g, i, j) {
                            continue;
                        }
                        for k in (j + 1)..n {
                            if skel(g, j, k) && skel(g, i, k) {
                                c += 1;
                            }
                        }
                    }
                }
                c as f64
            }
        };
        out.push(count / s.max_count(n, g.is_directed()));
    }
    Ok(out)
}

/// Change statistics for every admissible dyad.
///
/// Column `d` (in the graph's row-major dyad order) is
/// `h(x with dyad=1) - h(x with dyad=0)`, all other dyads held at their
/// observed values. Stored row-major: `delta[k * D + d]` is statistic `k`.
#[derive(Debug, Clone)]
pub struct ChangeMatrix {
    p: usize,
    d: usize,
    delta: Vec<f64>,
}

impl ChangeMatrix {
    pub fn p(&self) -> usize {
        self.p
    }

    /// Dyad count of the underlying graph.
    pub fn dyads(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn get(&self, stat: usize, dyad: usize) -> f64 {
        self.delta[stat * self.d + dyad]
    }

    /// Column for one dyad as a fresh vector.
    pub fn column(&self, dyad: usize) -> Vec<f64> {
        (0..self.p).map(|k| self.get(k, dyad)).collect()
    }
}

/// Change statistics for all dyads, computed incrementally from local
/// neighborhood counts rather than by full recomputation.
pub fn change_statistics(g: &Graph, spec: &StatisticSpec) -> Result<ChangeMatrix> {
    spec.validate_for(g.is_directed(), g.n())?;
    let d = g.dyad_count();
    let p = spec.len();
    let mut delta = vec![0.0; p * d];
    let mut col = vec![0.0; p];
    for (idx, (i, j)) in g.dyads().enumerate() {
        change_for_dyad(g, spec, i, j, &mut col);
        for k in 0..p {
            delta[k * d + idx] = col[k];
        }
    }
    Ok(ChangeMatrix { p, d, delta })
}

/// Change-statistic column for a single dyad, written into `out`.
///
/// The spec must already be validated against the graph; this is the hot
/// path of the Gibbs sampler.
pub fn change_for_dyad(g: &Graph, spec: &StatisticSpec, i: usize, j: usize, out: &mut [f64]) {
    debug_assert_eq!(out.len(), spec.len());
    let n = g.n();
    let directed = g.is_directed();
    for (k, s) in spec.entries().iter().enumerate() {
        let max = s.max_count(n, directed);
        out[k] = match s {
            Statistic::EdgeDensity => 1.0 / max,
            Statistic::Reciprocity => {
                if g.get(j, i) {
                    1.0 / max
                } else {
                    0.0
                }
            }
            Statistic::CyclicTriad => {
                // Cycles through the arc i->j are i->j->k->i.
                let mut c = 0usize;
                for k2 in 0..n {
                    if k2 != i && k2 != j && g.get(j, k2) && g.get(k2, i) {
                        c += 1;
                    }
                }
                c as f64 / max
            }
            Statistic::TwoStar => {
                // The skeleton dyad {i,j} only toggles when the reverse arc
                // is absent; new two-paths are centered at i or at j.
                if directed && g.get(j, i) {
                    0.0
                } else {
                    let mut c = 0usize;
                    for u in 0..n {
                        if u != i && u != j {
                            if skel(g, i, u) {
                                c += 1;
                            }
                            if skel(g, j, u) {
                                c += 1;
                            }
                        }
                    }
                    c as f64 / max
                }
            }
            Statistic::Triangle => {
                if directed && g.get(j, i) {
                    0.0
                } else {
                    let mut c = 0usize;
                    for u in 0..n {
                        if u != i && u != j && skel(g, i, u) && skel(g, j, u) {
                            c += 1;
                        }
                    }
                    c as f64 / max
                }
            }
        };
    }
}
