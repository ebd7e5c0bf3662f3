//! Dynamic binary networks and their edge-list serialization.
//!
//! A [`Graph`] stores one unweighted snapshot as a dyad map over admissible
//! node pairs — ordered pairs `(i, j)`, `i != j`, when directed, unordered
//! pairs `i < j` when undirected. Self-loops are unrepresentable. A
//! [`DynamicNetwork`] is a time-ordered sequence of snapshots sharing a
//! directedness flag; node counts may differ across snapshots.
//!
//! The on-disk format is a CSV edge list with header `time,from,to,node_count`
//! plus optional node-count registry lines `#nodes,<time>,<count>` that
//! declare snapshot sizes (required to represent empty graphs). Other lines
//! starting with `#` are comments. Output uses `.` decimals, no locale.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::{Error, Result};

/// One unweighted network snapshot.
///
/// Immutable in spirit: fitting and sampling code constructs a graph once and
/// then shares it; `set_dyad` exists for builders and the Gibbs sampler,
/// which own their graph until finished.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    directed: bool,
    dyads: Vec<bool>,
}

impl Graph {
    /// Empty graph on `n` nodes.
    pub fn empty(n: usize, directed: bool) -> Self {
        let d = dyad_count(n, directed);
        Graph {
            n,
            directed,
            dyads: vec![false; d],
        }
    }

    /// Builds a graph from 0-based endpoint pairs. Duplicate edges are
    /// idempotent; for undirected graphs `(j, i)` is normalized to `(i, j)`.
    pub fn from_edges(n: usize, directed: bool, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::empty(n, directed);
        for &(i, j) in edges {
            if i == j {
                return Err(Error::SelfLoop {
                    time: f64::NAN,
                    node: i + 1,
                });
            }
            if i >= n || j >= n {
                return Err(Error::NodeOutOfRange {
                    node: i.max(j) + 1,
                    n,
                    time: f64::NAN,
                });
            }
            g.set_dyad(i, j, true);
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Number of admissible dyads: `n(n-1)` directed, `n(n-1)/2` undirected.
    pub fn dyad_count(&self) -> usize {
        self.dyads.len()
    }

    /// Number of present dyads.
    pub fn edge_count(&self) -> usize {
        self.dyads.iter().filter(|&&b| b).count()
    }

    /// Position of dyad `(i, j)` in the fixed row-major dyad order.
    ///
    /// Panics on a self-loop or out-of-range index; the diagonal is not
    /// representable.
    #[inline]
    pub fn dyad_index(&self, i: usize, j: usize) -> usize {
        assert!(i != j, "self-loops are unrepresentable");
        debug_assert!(i < self.n && j < self.n);
        if self.directed {
            i * (self.n - 1) + if j < i { j } else { j - 1 }
        } else {
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            a * (self.n - 1) - a * (a.wrapping_sub(1)) / 2 + (b - a - 1)
        }
    }

    /// Dyad value; for undirected graphs `get(j, i) == get(i, j)`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.dyads[self.dyad_index(i, j)]
    }

    /// Sets a dyad value (normalizing orientation when undirected).
    #[inline]
    pub fn set_dyad(&mut self, i: usize, j: usize, value: bool) {
        let idx = self.dyad_index(i, j);
        self.dyads[idx] = value;
    }

    #[inline]
    pub(crate) fn get_by_index(&self, idx: usize) -> bool {
        self.dyads[idx]
    }

    #[inline]
    pub(crate) fn set_by_index(&mut self, idx: usize, value: bool) {
        self.dyads[idx] = value;
    }

    /// Admissible dyads in the fixed row-major order used everywhere:
    /// directed `(0,1),(0,2),…,(1,0),(1,2),…`; undirected `(0,1),(0,2),…,(1,2),…`.
    pub fn dyads(&self) -> DyadIter {
        DyadIter {
            n: self.n,
            directed: self.directed,
            i: 0,
            j: 0,
        }
    }
}

/// Row-major iterator over admissible dyads of a graph shape.
pub struct DyadIter {
    n: usize,
    directed: bool,
    i: usize,
    j: usize,
}

impl DyadIter {
    /// Dyad order for a given shape without building a graph.
    pub fn new(n: usize, directed: bool) -> Self {
        DyadIter {
            n,
            directed,
            i: 0,
            j: 0,
        }
    }
}

impl Iterator for DyadIter {
    type Item = (usize, usize);

    fn next(&mut self) -> Option<(usize, usize)> {
        loop {
            if self.i >= self.n {
                return None;
            }
            let start = if self.directed { 0 } else { self.i + 1 };
            if self.j < start {
                self.j = start;
            }
            if self.j >= self.n {
                self.i += 1;
                self.j = 0;
                continue;
            }
            if self.directed && self.j == self.i {
                self.j += 1;
                continue;
            }
            let out = (self.i, self.j);
            self.j += 1;
            return Some(out);
        }
    }
}

/// Number of admissible dyads for a graph shape.
pub fn dyad_count(n: usize, directed: bool) -> usize {
    if n < 2 {
        0
    } else if directed {
        n * (n - 1)
    } else {
        n * (n - 1) / 2
    }
}

/// A time-ordered sequence of snapshots with strictly increasing times.
#[derive(Debug, Clone)]
pub struct DynamicNetwork {
    times: Vec<f64>,
    graphs: Vec<Graph>,
    directed: bool,
}

impl DynamicNetwork {
    /// Validates strictly increasing times and a shared directedness flag.
    pub fn new(snapshots: Vec<(f64, Graph)>, directed: bool) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(Error::EmptyData);
        }
        let mut times = Vec::with_capacity(snapshots.len());
        let mut graphs = Vec::with_capacity(snapshots.len());
        for (t, g) in snapshots {
            if !t.is_finite() {
                return Err(Error::NonFinite("snapshot time"));
            }
            if g.is_directed() != directed {
                return Err(Error::MixedDirectedness);
            }
            if let Some(&prev) = times.last() {
                if t <= prev {
                    return Err(Error::NonIncreasingTimes);
                }
            }
            times.push(t);
            graphs.push(g);
        }
        Ok(DynamicNetwork {
            times,
            graphs,
            directed,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn graph(&self, k: usize) -> &Graph {
        &self.graphs[k]
    }

    pub fn time(&self, k: usize) -> f64 {
        self.times[k]
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &Graph)> {
        self.times.iter().copied().zip(self.graphs.iter())
    }

    /// First and last observation times.
    pub fn time_range(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().unwrap())
    }

    /// Total dyad count across snapshots (the pseudo-likelihood row count).
    pub fn total_dyads(&self) -> usize {
        self.graphs.iter().map(|g| g.dyad_count()).sum()
    }

    /// New sequence with the given snapshot indices removed.
    pub fn without_snapshots(&self, drop: &[usize]) -> Result<DynamicNetwork> {
        let keep: Vec<(f64, Graph)> = self
            .iter()
            .enumerate()
            .filter(|(k, _)| !drop.contains(k))
            .map(|(_, (t, g))| (t, g.clone()))
            .collect();
        DynamicNetwork::new(keep, self.directed)
    }
}

const HEADER: &str = "time,from,to,node_count";

struct TimeBucket {
    declared: Option<usize>,
    max_label: usize,
    edges: Vec<(usize, usize)>,
}

/// Reads a dynamic network from an edge-list CSV stream.
///
/// Expects the header `time,from,to,node_count`, 1-based node labels, and
/// optional `#nodes,<time>,<count>` registry lines. A snapshot's node count
/// is the declared count (registry or `node_count` column); when nothing is
/// declared it falls back to the largest label seen at that time. Labels
/// exceeding a declared count are rejected. Duplicate edge rows are
/// idempotent; self-loops are errors.
pub fn read_edge_list<R: BufRead>(reader: R, directed: bool) -> Result<DynamicNetwork> {
    let mut order: Vec<f64> = Vec::new();
    let mut index: HashMap<u64, usize> = HashMap::new();
    let mut buckets: Vec<TimeBucket> = Vec::new();
    let mut saw_header = false;

    fn bucket_for(
        t: f64,
        order: &mut Vec<f64>,
        index: &mut HashMap<u64, usize>,
        buckets: &mut Vec<TimeBucket>,
    ) -> usize {
        *index.entry(t.to_bits()).or_insert_with(|| {
            order.push(t);
            buckets.push(TimeBucket {
                declared: None,
                max_label: 0,
                edges: Vec::new(),
            });
            buckets.len() - 1
        })
    }

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("#nodes,") {
            let mut it = rest.split(',');
            let t = parse_time(it.next(), lineno)?;
            let count = parse_count(it.next(), lineno)?;
            if it.next().is_some() {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "registry line must be `#nodes,<time>,<count>`".into(),
                });
            }
            let b = bucket_for(t, &mut order, &mut index, &mut buckets);
            let cur = buckets[b].declared.unwrap_or(0);
            buckets[b].declared = Some(cur.max(count));
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        if !saw_header {
            let normalized: String = line.chars().filter(|c| !c.is_whitespace()).collect();
            if normalized != HEADER {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected header `{HEADER}`"),
                });
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected 4 fields, found {}", fields.len()),
            });
        }
        let t = parse_time(Some(fields[0]), lineno)?;
        let from = parse_label(fields[1], lineno)?;
        let to = parse_label(fields[2], lineno)?;
        let declared = if fields[3].is_empty() {
            None
        } else {
            Some(parse_count(Some(fields[3]), lineno)?)
        };
        if from == to {
            return Err(Error::SelfLoop { time: t, node: from });
        }
        let b = bucket_for(t, &mut order, &mut index, &mut buckets);
        if let Some(c) = declared {
            let cur = buckets[b].declared.unwrap_or(0);
            buckets[b].declared = Some(cur.max(c));
        }
        buckets[b].max_label = buckets[b].max_label.max(from).max(to);
        buckets[b].edges.push((from, to));
    }

    if order.is_empty() {
        return Err(Error::EmptyData);
    }

    let mut idx: Vec<usize> = (0..order.len()).collect();
    idx.sort_by(|&a, &b| order[a].total_cmp(&order[b]));

    let mut snapshots = Vec::with_capacity(idx.len());
    for k in idx {
        let t = order[k];
        let bucket = &buckets[k];
        let n = match bucket.declared {
            Some(c) => {
                if bucket.max_label > c {
                    return Err(Error::NodeOutOfRange {
                        node: bucket.max_label,
                        n: c,
                        time: t,
                    });
                }
                c
            }
            None => bucket.max_label,
        };
        if n == 0 {
            return Err(Error::Parse {
                line: 0,
                msg: format!("snapshot at time {t} has no declared node count and no edges"),
            });
        }
        let mut g = Graph::empty(n, directed);
        for &(from, to) in &bucket.edges {
            g.set_dyad(from - 1, to - 1, true);
        }
        snapshots.push((t, g));
    }
    DynamicNetwork::new(snapshots, directed)
}

fn parse_time(field: Option<&str>, line: usize) -> Result<f64> {
    let s = field.ok_or_else(|| Error::Parse {
        line,
        msg: "missing time field".into(),
    })?;
    let t: f64 = s.trim().parse().map_err(|_| Error::Parse {
        line,
        msg: format!("invalid time `{s}`"),
    })?;
    if !t.is_finite() {
        return Err(Error::Parse {
            line,
            msg: format!("non-finite time `{s}`"),
        });
    }
    Ok(t)
}

fn parse_label(s: &str, line: usize) -> Result<usize> {
    let v: usize = s.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("invalid node label `{s}`"),
    })?;
    if v == 0 {
        return Err(Error::Parse {
            line,
            msg: "node labels are 1-based".into(),
        });
    }
    Ok(v)
}

fn parse_count(field: Option<&str>, line: usize) -> Result<usize> {
    let s = field.ok_or_else(|| Error::Parse {
        line,
        msg: "missing node count".into(),
    })?;
    let v: usize = s.trim().parse().map_err(|_| Error::Parse {
        line,
        msg: format!("invalid node count `{s}`"),
    })?;
    if v == 0 {
        return Err(Error::Parse {
            line,
            msg: "node count must be at least 1".into(),
        });
    }
    Ok(v)
}

/// Writes a dynamic network in the edge-list CSV format read by
/// [`read_edge_list`], including a node-count registry line per snapshot so
/// that empty graphs round-trip.
pub fn write_edge_list<W: Write>(net: &DynamicNetwork, mut w: W) -> Result<()> {
    writeln!(w, "{HEADER}")?;
    for (t, g) in net.iter() {
        writeln!(w, "#nodes,{},{}", t, g.n())?;
    }
    for (t, g) in net.iter() {
        let n = g.n();
        for (i, j) in g.dyads() {
            if g.get(i, j) {
                writeln!(w, "{},{},{},{}", t, i + 1, j + 1, n)?;
            }
        }
    }
    Ok(())
}

/// Provenance stamped into every output artifact.
#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct FileMeta {
    pub version: String,
    pub seed: Option<u64>,
    pub config: String,
}

impl FileMeta {
    pub fn new(version: &str, seed: Option<u64>, config: &str) -> Self {
        FileMeta {
            version: version.to_string(),
            seed,
            config: config.to_string(),
        }
    }

    pub(crate) fn comment_lines<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "# version={}", self.version)?;
        if let Some(s) = self.seed {
            writeln!(w, "# seed={s}")?;
        }
        if !self.config.is_empty() {
            writeln!(w, "# config={}", self.config)?;
        }
        Ok(())
    }
}

/// Writes fitted coefficient curves as CSV `time,statistic,phi_hat`, one row
/// per (grid time, statistic), grid times in the original scale. Grid points
/// need not coincide with observed times but must lie inside the basis
/// domain; an empty grid yields a header-only file.
pub fn write_curves<W: Write>(
    fit: &crate::mple::FitResult,
    grid: &[f64],
    meta: &FileMeta,
    mut w: W,
) -> Result<()> {
    let mut out = Vec::new();
    meta.comment_lines(&mut out)?;
    writeln!(out, "time,statistic,phi_hat")?;
    let names = fit.spec.names();
    for &t in grid {
        let phi = fit.phi.evaluate_at_original(&fit.basis, t)?;
        for (k, name) in names.iter().enumerate() {
            writeln!(out, "{},{},{}", t, name, phi[k])?;
        }
    }
    w.write_all(&out)?;
    Ok(())
}

#[derive(serde::Serialize)]
struct FitFile<'a> {
    version: &'a str,
    seed: Option<u64>,
    config: &'a str,
    statistics: Vec<&'static str>,
    directed: bool,
    p: usize,
    q: usize,
    order: usize,
    interior_knots: &'a [f64],
    time_range: Option<(f64, f64)>,
    lambda: f64,
    /// Coefficient matrix, row-major: one row of basis coefficients per
    /// statistic.
    phi: Vec<Vec<f64>>,
    converged: bool,
    iterations: usize,
    pseudo_loglik: f64,
    gcv_path: Option<Vec<(f64, f64)>>,
    warnings: &'a [String],
}

/// Serializes a fit (coefficients, smoothing, basis geometry, diagnostics)
/// as JSON.
pub fn write_fit_result<W: Write>(
    fit: &crate::mple::FitResult,
    meta: &FileMeta,
    mut w: W,
) -> Result<()> {
    let file = FitFile {
        version: &meta.version,
        seed: meta.seed,
        config: &meta.config,
        statistics: fit.spec.names(),
        directed: fit.directed,
        p: fit.phi.p(),
        q: fit.phi.q(),
        order: fit.basis.order(),
        interior_knots: fit.basis.interior_knots(),
        time_range: fit.basis.domain(),
        lambda: fit.lambda,
        phi: (0..fit.phi.p()).map(|k| fit.phi.row(k)).collect(),
        converged: fit.converged,
        iterations: fit.iterations,
        pseudo_loglik: fit.pseudo_loglik,
        gcv_path: fit.gcv_path.as_ref().map(|p| {
            p.lambdas
                .iter()
                .cloned()
                .zip(p.scores.iter().cloned())
                .collect()
        }),
        warnings: &fit.warnings,
    };
    let text = serde_json::to_string_pretty(&file)
        .map_err(|e| Error::Parse {
            line: 0,
            msg: format!("serialization failed: {e}"),
        })?;
    w.write_all(text.as_bytes())?;
    w.write_all(b"\n")?;
    Ok(())
}
