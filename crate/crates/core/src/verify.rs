//! From-scratch checkers for every incrementally maintained quantity.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::events::NoopObserver;
use crate::graph::{DynamicGraph, Edge, UpdateKind, VertexId};
use crate::hierarchy::{BaseEngine, HierNode, Hierarchy};
use crate::palette::{Color, Palette, Thresholds};
use crate::partial::{Budget, PartialColorer, PartialColoring};
use crate::rng::{Draws, SeededRng};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub ok: bool,
    pub first_violation: Option<String>,
}

impl CheckReport {
    pub fn pass() -> Self {
        CheckReport {
            ok: true,
            first_violation: None,
        }
    }

    pub fn fail(msg: impl Into<String>) -> Self {
        CheckReport {
            ok: false,
            first_violation: Some(msg.into()),
        }
    }

    /// Keeps the first failure.
    pub fn and(self, other: impl FnOnce() -> CheckReport) -> Self {
        if self.ok {
            other()
        } else {
            self
        }
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.first_violation {
            None => write!(f, "ok"),
            Some(v) => write!(f, "violation: {v}"),
        }
    }
}

/// No edge joins two vertices with the same non-⊥ color.
pub fn check_proper_partial(graph: &DynamicGraph, phi: &[Option<Color>]) -> CheckReport {
    for e in graph.edges() {
        if let (Some(a), Some(b)) = (phi[e.u as usize], phi[e.v as usize]) {
            if a == b {
                return CheckReport::fail(format!(
                    "edge ({}, {}) has both ends colored {a}",
                    e.u, e.v
                ));
            }
        }
    }
    CheckReport::pass()
}

/// No edge is monochromatic under `colors`.
pub fn check_proper_full(graph: &DynamicGraph, colors: &[Color]) -> CheckReport {
    for e in graph.edges() {
        if colors[e.u as usize] == colors[e.v as usize] {
            return CheckReport::fail(format!(
                "edge ({}, {}) has both ends colored {}",
                e.u, e.v, colors[e.u as usize]
            ));
        }
    }
    CheckReport::pass()
}

/// Counter state rebuilt from the graph and `φ` alone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterState {
    pub q: u32,
    /// Row-major `n × q`.
    pub use_count: Vec<u32>,
    pub avail_count: Vec<u32>,
    pub free_count: Vec<u32>,
}

pub fn recompute_counters(graph: &DynamicGraph, phi: &[Option<Color>], q: u32) -> CounterState {
    let n = graph.n();
    let qs = q as usize;
    let mut use_count = vec![0u32; n * qs];
    let mut free_count = vec![0u32; n];
    for v in 0..n {
        for &w in graph.neighbors(v as VertexId) {
            match phi[w as usize] {
                Some(c) => use_count[v * qs + c as usize] += 1,
                None => free_count[v] += 1,
            }
        }
    }
    let avail_count = (0..n)
        .map(|v| {
            use_count[v * qs..(v + 1) * qs]
                .iter()
                .filter(|&&x| x == 0)
                .count() as u32
        })
        .collect();
    CounterState {
        q,
        use_count,
        avail_count,
        free_count,
    }
}

/// Compares incremental counters, including the availability sets, against
/// a from-scratch recomputation.
pub fn check_counters(graph: &DynamicGraph, pc: &PartialColoring) -> CheckReport {
    let q = pc.q();
    let fresh = recompute_counters(graph, pc.phi_slice(), q);
    for v in 0..graph.n() as VertexId {
        let i = v as usize;
        if pc.free_count(v) != fresh.free_count[i] {
            return CheckReport::fail(format!(
                "free_count({v}) = {} but recomputed {}",
                pc.free_count(v),
                fresh.free_count[i]
            ));
        }
        if pc.avail_count(v) != fresh.avail_count[i] {
            return CheckReport::fail(format!(
                "avail_count({v}) = {} but recomputed {}",
                pc.avail_count(v),
                fresh.avail_count[i]
            ));
        }
        for c in 0..q {
            let expect = fresh.use_count[i * q as usize + c as usize];
            if pc.use_count(v, c) != expect {
                return CheckReport::fail(format!(
                    "use_count({v}, {c}) = {} but recomputed {expect}",
                    pc.use_count(v, c)
                ));
            }
            if pc.is_available(v, c) != (expect == 0) {
                return CheckReport::fail(format!(
                    "availability of {c} at {v} disagrees with use_count"
                ));
            }
        }
        let listed: Vec<Color> = (0..q)
            .filter(|&c| fresh.use_count[i * q as usize + c as usize] == 0)
            .collect();
        if pc.avail_colors(v) != listed {
            return CheckReport::fail(format!("available set of {v} differs from recomputation"));
        }
    }
    CheckReport::pass()
}

/// Every vertex meets both thresholds.
pub fn check_constraints(
    graph: &DynamicGraph,
    pc: &PartialColoring,
    t: &Thresholds,
) -> CheckReport {
    for v in 0..graph.n() as VertexId {
        let viol = pc.violation(v, t);
        if viol.is_violated() {
            return CheckReport::fail(format!(
                "vertex {v} violates {viol:?}: a = {}, f = {}",
                pc.avail_count(v),
                pc.free_count(v)
            ));
        }
    }
    CheckReport::pass()
}

/// Recomputes induced degrees, part neighbor sets and the potential of every
/// internal node from the edge set it colors, and checks the degree threshold
/// and the base engines' graphs.
pub fn check_degree_invariant(node: &HierNode, edges: &[Edge]) -> CheckReport {
    match node {
        HierNode::Base { engine, .. } => {
            let g = engine.graph();
            if g.edge_count() != edges.len() || edges.iter().any(|e| !g.has_edge(e.u, e.v)) {
                return CheckReport::fail("base engine graph differs from its part's edge set");
            }
            CheckReport::pass()
        }
        HierNode::Internal(inner) => {
            let n = inner.n();
            let p = inner.params();
            let mut indeg = vec![0u32; n];
            let mut nbrs: Vec<Vec<(u32, VertexId)>> = vec![Vec::new(); n];
            let mut child_edges: Vec<Vec<Edge>> = vec![Vec::new(); p.b as usize];
            for e in edges {
                let (pu, pv) = (inner.part(e.u), inner.part(e.v));
                nbrs[e.u as usize].push((pv, e.v));
                nbrs[e.v as usize].push((pu, e.u));
                if pu == pv {
                    indeg[e.u as usize] += 1;
                    indeg[e.v as usize] += 1;
                    child_edges[pu as usize].push(*e);
                }
            }
            let phi: u64 = indeg.iter().map(|&d| u64::from(d)).sum();
            if phi != inner.phi() {
                return CheckReport::fail(format!(
                    "potential {} but recomputed {phi}",
                    inner.phi()
                ));
            }
            for v in 0..n as VertexId {
                let i = v as usize;
                if inner.part(v) >= p.b {
                    return CheckReport::fail(format!(
                        "vertex {v} in part {} >= b = {}",
                        inner.part(v),
                        p.b
                    ));
                }
                if inner.indeg(v) != indeg[i] {
                    return CheckReport::fail(format!(
                        "indeg({v}) = {} but recomputed {}",
                        inner.indeg(v),
                        indeg[i]
                    ));
                }
                if indeg[i] > p.child_delta {
                    return CheckReport::fail(format!(
                        "indeg({v}) = {} exceeds threshold {}",
                        indeg[i], p.child_delta
                    ));
                }
                let mut stored: Vec<(u32, VertexId)> = inner
                    .part_neighbors(v)
                    .iter()
                    .flat_map(|(&j, s)| s.iter().map(move |&x| (j, x)))
                    .collect();
                stored.sort_unstable();
                nbrs[i].sort_unstable();
                if stored != nbrs[i] {
                    return CheckReport::fail(format!("part neighbor sets of {v} are stale"));
                }
            }
            for (child, es) in inner.children().iter().zip(&child_edges) {
                let r = check_degree_invariant(child, es);
                if !r.ok {
                    return r;
                }
            }
            CheckReport::pass()
        }
    }
}

/// Every vertex's color lies in the slice of the base engine it reaches, and
/// all colors are below `c_k`.
pub fn check_leaf_slices(h: &Hierarchy) -> CheckReport {
    let ck = h.params().c;
    for v in 0..h.graph().n() as VertexId {
        let c = h.current_color(v);
        let slice = h.root().leaf_slice(v);
        if !slice.contains(&c) {
            return CheckReport::fail(format!("color {c} of {v} outside its leaf slice {slice:?}"));
        }
        if c >= ck {
            return CheckReport::fail(format!("color {c} of {v} not below c_k = {ck}"));
        }
    }
    CheckReport::pass()
}

/// Counts the base engines that fell back to greedy coloring.
pub fn greedy_leaves(node: &HierNode) -> usize {
    match node {
        HierNode::Base {
            engine: BaseEngine::Greedy(_),
            ..
        } => 1,
        HierNode::Base { .. } => 0,
        HierNode::Internal(inner) => inner.children().iter().map(greedy_leaves).sum(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AvailConfig {
    pub n: usize,
    pub delta: u32,
    pub q: u32,
    pub thresholds: Thresholds,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AvailEstimate {
    pub trials: usize,
    pub mean: f64,
    pub stderr: f64,
    pub min: u32,
    pub max: u32,
    /// `q · exp(−Δ/q)`.
    pub bound: f64,
}

/// Random bipartite graph with sides `[0, n/2)` and `[n/2, n)` in which every
/// left vertex gets `delta` distinct right neighbors via random matchings.
pub fn random_bipartite(n: usize, delta: u32, rng: &mut ChaCha8Rng) -> Result<DynamicGraph> {
    let half = n / 2;
    let mut g = DynamicGraph::new(n, delta)?.with_strict(false);
    let mut right: Vec<VertexId> = (half as VertexId..(2 * half) as VertexId).collect();
    for _ in 0..delta {
        right.shuffle(rng);
        for (a, &b) in right.iter().enumerate() {
            let a = a as VertexId;
            if !g.has_edge(a, b) && g.degree(a) < delta as usize && g.degree(b) < delta as usize {
                g.insert_edge(a, b)?;
            }
        }
    }
    Ok(g)
}

/// Inserts the edges of a random bipartite graph at the target degree one at
/// a time through the engine, so every vertex meets both thresholds, then
/// repeatedly resamples a random vertex and records its availability right
/// after the draws.
pub fn estimate_post_resample_avail(cfg: &AvailConfig) -> Result<AvailEstimate> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let target = random_bipartite(cfg.n, cfg.delta, &mut rng)?;
    let mut order: Vec<Edge> = target.edges().collect();
    order.shuffle(&mut rng);
    let palette = Palette::with_q(cfg.q, 1.0)?;
    let budget = Budget::for_run((order.len() + cfg.trials) as u64, cfg.n);
    let draws = Draws::Seeded(SeededRng::with_stream(cfg.seed, 1));
    let mut engine = PartialColorer::new(cfg.n, palette, cfg.thresholds, draws, budget);
    let mut graph = DynamicGraph::new(cfg.n, cfg.delta)?.with_strict(false);
    for e in order {
        graph.insert_edge(e.u, e.v)?;
        engine.handle_update(&graph, UpdateKind::Insert, e.u, e.v, &mut NoopObserver)?;
    }
    let mut samples = Vec::with_capacity(cfg.trials);
    for _ in 0..cfg.trials {
        let u = rng.random_range(0..cfg.n as VertexId);
        let (_, a) = engine.resample_and_repair(&graph, u, &mut NoopObserver)?;
        samples.push(a);
    }
    let k = samples.len().max(1) as f64;
    let mean = samples.iter().map(|&a| f64::from(a)).sum::<f64>() / k;
    let var = samples
        .iter()
        .map(|&a| (f64::from(a) - mean).powi(2))
        .sum::<f64>()
        / (k - 1.0).max(1.0);
    let q = f64::from(cfg.q);
    Ok(AvailEstimate {
        trials: samples.len(),
        mean,
        stderr: (var / k).sqrt(),
        min: samples.iter().copied().min().unwrap_or(0),
        max: samples.iter().copied().max().unwrap_or(0),
        bound: q * (-f64::from(cfg.delta) / q).exp(),
    })
}
