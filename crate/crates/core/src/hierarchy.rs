//! Recursive partition scheme `A_k`: the vertex set is split into `b_k` parts
//! with disjoint palette slices, each part's induced subgraph is colored by a
//! copy of `A_{k-1}`, and vertices whose induced degree grows too large are
//! moved to the part where they have the fewest neighbors.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::NoopObserver;
use crate::full::{ColoringEngine, EngineConfig};
use crate::graph::{DynamicGraph, Edge, UpdateKind, VertexId};
use crate::greedy::GreedyEngine;
use crate::palette::{ceil_tol, ln_degree, Color, Palette, Thresholds};
use crate::partial::Budget;
use crate::rng::{Draws, SeededRng};

/// Below this degree the logarithmic palettes degenerate and base engines
/// fall back to greedy coloring.
pub const MIN_LOCAL_DELTA: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelParams {
    pub k: u32,
    pub delta_level: u32,
    /// Number of parts `b_k`.
    pub b: u32,
    /// Palette size `c_k`.
    pub c: u32,
    /// Degree cap passed to children, also the induced-degree threshold.
    pub child_delta: u32,
}

impl LevelParams {
    /// `b_k = max(1, ceil(Δ^{2/(2k-1)} / 2))`, `c_k = ceil((k+1)(2k-1) Δ / ln Δ)`,
    /// `child_delta = ceil((1 + 1/k) Δ / b_k)`. `k = 1` is a base level.
    pub fn new(k: u32, delta: u32) -> Result<Self> {
        if k == 0 || delta == 0 {
            return Err(Error::Config(format!(
                "level parameters need k, delta >= 1 (k = {k}, delta = {delta})"
            )));
        }
        let d = f64::from(delta);
        let kf = f64::from(k);
        let c = ceil_tol((kf + 1.0) * (2.0 * kf - 1.0) * d / ln_degree(delta)) as u32;
        if k == 1 {
            return Ok(LevelParams {
                k,
                delta_level: delta,
                b: 1,
                c,
                child_delta: delta,
            });
        }
        let b = (ceil_tol(0.5 * d.powf(2.0 / (2.0 * kf - 1.0))) as u32).max(1);
        let child_delta = ceil_tol((1.0 + 1.0 / kf) * d / f64::from(b)) as u32;
        Ok(LevelParams {
            k,
            delta_level: delta,
            b,
            c,
            child_delta,
        })
    }

    pub fn is_base(&self) -> bool {
        self.k == 1
    }

    /// Minimum potential drop of a rebalancing move,
    /// `2 (child_delta - floor(Δ / b))`.
    pub fn min_drop(&self) -> u64 {
        let floor = self.delta_level / self.b;
        2 * u64::from(self.child_delta.saturating_sub(floor))
    }
}

/// Splits `[base, base + total)` into `parts` contiguous slices whose sizes
/// differ by at most one, larger ones first.
pub fn split_palette(base: Color, total: u32, parts: u32) -> Vec<Range<Color>> {
    let (q, r) = (total / parts, total % parts);
    let mut start = base;
    (0..parts)
        .map(|i| {
            let len = q + u32::from(i < r);
            let s = start..start + len;
            start += len;
            s
        })
        .collect()
}

/// Largest `ε ∈ {1, 1/2, 1/4, ...}` whose A_1 palette fits in `slice` colors.
pub fn fit_eps(delta: u32, slice: u32) -> Option<(f64, Palette)> {
    (0..24).map(|i| 0.5f64.powi(i)).find_map(|eps| {
        let p = Palette::for_degree(delta, eps).ok()?;
        let fits =
            (1.0 + 2.0 * eps) * f64::from(p.q) <= f64::from(slice) + 1e-9 && p.total() <= slice;
        fits.then_some((eps, p))
    })
}

#[derive(Debug, Clone)]
pub enum BaseEngine {
    Local(Box<ColoringEngine>),
    Greedy(GreedyEngine),
}

impl BaseEngine {
    pub fn for_slice(
        n: usize,
        delta: u32,
        slice: Range<Color>,
        draws: Draws,
        budget: u64,
    ) -> Result<Self> {
        let size = slice.end - slice.start;
        if size < 3 {
            return Err(Error::Config(format!(
                "palette slice of {size} colors is below the base minimum of 3"
            )));
        }
        let fitted = if delta < MIN_LOCAL_DELTA {
            None
        } else {
            fit_eps(delta, size)
        };
        match fitted {
            Some((_, palette)) => {
                let thresholds = Thresholds::default_for(delta, &palette);
                Ok(BaseEngine::Local(Box::new(ColoringEngine::new(
                    EngineConfig {
                        n,
                        delta,
                        palette,
                        thresholds,
                        draws,
                        budget: Budget::new(budget),
                        palette_base: slice.start,
                        strict: false,
                    },
                )?)))
            }
            None => Ok(BaseEngine::Greedy(GreedyEngine::new(
                n,
                delta,
                slice.start,
                size,
                false,
            )?)),
        }
    }

    pub fn apply(&mut self, kind: UpdateKind, u: VertexId, v: VertexId) -> Result<u64> {
        match self {
            BaseEngine::Local(e) => Ok(u64::from(
                e.apply_update(kind, u, v, &mut NoopObserver)?.recourse,
            )),
            BaseEngine::Greedy(g) => Ok(u64::from(g.apply_update(kind, u, v)?)),
        }
    }

    pub fn current_color(&self, v: VertexId) -> Color {
        match self {
            BaseEngine::Local(e) => e.current_color(v),
            BaseEngine::Greedy(g) => g.current_color(v),
        }
    }

    pub fn graph(&self) -> &DynamicGraph {
        match self {
            BaseEngine::Local(e) => e.graph(),
            BaseEngine::Greedy(g) => g.graph(),
        }
    }

    pub fn overflow_count(&self) -> u64 {
        match self {
            BaseEngine::Local(e) => e.overflow_count(),
            BaseEngine::Greedy(g) => g.overflow_count(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HierStats {
    pub route_calls: u64,
    pub moves: u64,
    /// Potential added by same-part insertions (2 each).
    pub phi_injected: u64,
    /// Potential removed by same-part deletions.
    pub phi_deleted: u64,
    /// Potential removed by moves.
    pub phi_dropped: u64,
    /// Updates forwarded to children after netting.
    pub child_updates: u64,
    pub touched: u64,
}

/// Aggregates over a whole tree.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeTotals {
    pub moves: u64,
    pub resamples: u64,
    pub fixes: u64,
    pub touched: u64,
    pub overflow: u64,
    pub base_engines: u64,
    pub greedy_engines: u64,
}

#[derive(Debug, Clone)]
pub struct InternalNode {
    params: LevelParams,
    slice: Range<Color>,
    part: Vec<u32>,
    indeg: Vec<u32>,
    part_nbrs: Vec<BTreeMap<u32, BTreeSet<VertexId>>>,
    phi: u64,
    children: Vec<HierNode>,
    slices: Vec<Range<Color>>,
    stats: HierStats,
}

#[derive(Debug, Clone)]
pub enum HierNode {
    Base {
        slice: Range<Color>,
        engine: BaseEngine,
    },
    Internal(Box<InternalNode>),
}

/// Child updates keyed by `(child, edge)`; opposite operations cancel.
#[derive(Default)]
struct NetOps {
    ops: BTreeMap<(u32, Edge), (UpdateKind, VertexId, VertexId)>,
}

impl NetOps {
    fn push(&mut self, child: u32, kind: UpdateKind, u: VertexId, v: VertexId) {
        let key = (child, Edge::new(u, v));
        match self.ops.get(&key) {
            Some(&(prev, ..)) => {
                debug_assert_ne!(prev, kind, "repeated child operation");
                self.ops.remove(&key);
            }
            None => {
                self.ops.insert(key, (kind, u, v));
            }
        }
    }
}

/// Stream ids for base engines, assigned in construction order.
struct StreamIds {
    root: SeededRng,
    next: u64,
}

impl StreamIds {
    fn fork(&mut self) -> Draws {
        self.next += 1;
        Draws::Seeded(self.root.fork(self.next))
    }
}

impl HierNode {
    /// Builds `A_k` over `n` vertices for maximum degree `delta` with palette
    /// `[palette_base, palette_base + c_k)`.
    pub fn build(
        k: u32,
        n: usize,
        delta: u32,
        palette_base: Color,
        seed: u64,
        budget: u64,
    ) -> Result<Self> {
        let params = LevelParams::new(k, delta)?;
        let mut ids = StreamIds {
            root: SeededRng::new(seed),
            next: 0,
        };
        Self::build_with(
            params,
            n,
            palette_base..palette_base + params.c,
            &mut ids,
            budget,
        )
    }

    fn build_with(
        params: LevelParams,
        n: usize,
        slice: Range<Color>,
        ids: &mut StreamIds,
        budget: u64,
    ) -> Result<Self> {
        if params.is_base() {
            let engine =
                BaseEngine::for_slice(n, params.delta_level, slice.clone(), ids.fork(), budget)?;
            return Ok(HierNode::Base { slice, engine });
        }
        let size = slice.end - slice.start;
        let slices = split_palette(slice.start, size, params.b);
        let child_params = LevelParams::new(params.k - 1, params.child_delta)?;
        let children = slices
            .iter()
            .map(|s| Self::build_with(child_params, n, s.clone(), ids, budget))
            .collect::<Result<Vec<_>>>()?;
        Ok(HierNode::Internal(Box::new(InternalNode {
            params,
            slice,
            part: vec![0; n],
            indeg: vec![0; n],
            part_nbrs: vec![BTreeMap::new(); n],
            phi: 0,
            children,
            slices,
            stats: HierStats::default(),
        })))
    }

    pub fn slice(&self) -> &Range<Color> {
        match self {
            HierNode::Base { slice, .. } => slice,
            HierNode::Internal(node) => &node.slice,
        }
    }

    /// Routes one edge update and returns the number of visible color changes.
    pub fn apply(&mut self, kind: UpdateKind, u: VertexId, v: VertexId) -> Result<u64> {
        match self {
            HierNode::Base { engine, .. } => engine.apply(kind, u, v),
            HierNode::Internal(node) => node.route_update(kind, u, v),
        }
    }

    pub fn current_color(&self, v: VertexId) -> Color {
        match self {
            HierNode::Base { engine, .. } => engine.current_color(v),
            HierNode::Internal(node) => {
                node.children[node.part[v as usize] as usize].current_color(v)
            }
        }
    }

    /// Palette slice of the base engine that `v` reaches through the partition.
    pub fn leaf_slice(&self, v: VertexId) -> Range<Color> {
        match self {
            HierNode::Base { slice, .. } => slice.clone(),
            HierNode::Internal(node) => node.children[node.part[v as usize] as usize].leaf_slice(v),
        }
    }

    pub fn totals(&self) -> TreeTotals {
        match self {
            HierNode::Base { engine, .. } => {
                let mut t = TreeTotals {
                    base_engines: 1,
                    overflow: engine.overflow_count(),
                    ..Default::default()
                };
                match engine {
                    BaseEngine::Local(e) => {
                        let s = e.partial().stats();
                        t.resamples = s.resamples;
                        t.fixes = s.fixes;
                        t.touched = s.touched + e.stats().touched;
                    }
                    BaseEngine::Greedy(g) => {
                        t.greedy_engines = 1;
                        t.touched = g.stats().touched;
                    }
                }
                t
            }
            HierNode::Internal(node) => {
                let mut t = TreeTotals {
                    moves: node.stats.moves,
                    touched: node.stats.touched,
                    ..Default::default()
                };
                for c in &node.children {
                    let ct = c.totals();
                    t.moves += ct.moves;
                    t.resamples += ct.resamples;
                    t.fixes += ct.fixes;
                    t.touched += ct.touched;
                    t.overflow += ct.overflow;
                    t.base_engines += ct.base_engines;
                    t.greedy_engines += ct.greedy_engines;
                }
                t
            }
        }
    }

    /// Visits every internal node, depth first.
    pub fn for_each_internal(&self, f: &mut dyn FnMut(&InternalNode)) {
        if let HierNode::Internal(node) = self {
            f(node);
            for c in &node.children {
                c.for_each_internal(f);
            }
        }
    }
}

impl InternalNode {
    pub fn params(&self) -> &LevelParams {
        &self.params
    }

    pub fn part(&self, v: VertexId) -> u32 {
        self.part[v as usize]
    }

    pub fn indeg(&self, v: VertexId) -> u32 {
        self.indeg[v as usize]
    }

    pub fn part_neighbors(&self, v: VertexId) -> &BTreeMap<u32, BTreeSet<VertexId>> {
        &self.part_nbrs[v as usize]
    }

    pub fn phi(&self) -> u64 {
        self.phi
    }

    pub fn n(&self) -> usize {
        self.part.len()
    }

    pub fn children(&self) -> &[HierNode] {
        &self.children
    }

    pub fn child_slices(&self) -> &[Range<Color>] {
        &self.slices
    }

    pub fn stats(&self) -> &HierStats {
        &self.stats
    }

    /// Overwrites a stored induced degree. Fault injection for oracle tests.
    pub fn inject_indeg_fault(&mut self, v: VertexId, value: u32) {
        self.indeg[v as usize] = value;
    }

    fn nbr_count(&self, w: VertexId, j: u32) -> u32 {
        self.part_nbrs[w as usize]
            .get(&j)
            .map_or(0, |s| s.len() as u32)
    }

    fn link(&mut self, x: VertexId, part: u32, y: VertexId) {
        self.part_nbrs[x as usize]
            .entry(part)
            .or_default()
            .insert(y);
    }

    fn unlink(&mut self, x: VertexId, part: u32, y: VertexId) {
        let map = &mut self.part_nbrs[x as usize];
        if let Some(set) = map.get_mut(&part) {
            set.remove(&y);
            if set.is_empty() {
                map.remove(&part);
            }
        }
    }

    fn route_update(&mut self, kind: UpdateKind, u: VertexId, v: VertexId) -> Result<u64> {
        self.stats.route_calls += 1;
        self.stats.touched += 2;
        let (pu, pv) = (self.part[u as usize], self.part[v as usize]);
        let mut ops = NetOps::default();
        match kind {
            UpdateKind::Insert => {
                self.link(u, pv, v);
                self.link(v, pu, u);
                if pu == pv {
                    self.indeg[u as usize] += 1;
                    self.indeg[v as usize] += 1;
                    self.phi += 2;
                    self.stats.phi_injected += 2;
                    ops.push(pu, kind, u, v);
                }
            }
            UpdateKind::Delete => {
                self.unlink(u, pv, v);
                self.unlink(v, pu, u);
                if pu == pv {
                    self.indeg[u as usize] -= 1;
                    self.indeg[v as usize] -= 1;
                    self.phi -= 2;
                    self.stats.phi_deleted += 2;
                    ops.push(pu, kind, u, v);
                }
            }
        }
        let moves = self.fix_invariant(&mut ops, [u, v])?;
        let mut recourse = moves;
        let ordered = ops
            .ops
            .iter()
            .filter(|(_, op)| op.0 == UpdateKind::Delete)
            .chain(ops.ops.iter().filter(|(_, op)| op.0 == UpdateKind::Insert));
        for (&(child, _), &(op, a, b)) in ordered {
            self.stats.child_updates += 1;
            recourse += self.children[child as usize].apply(op, a, b)?;
        }
        self.check_potential()?;
        Ok(recourse)
    }

    /// Moves violating vertices until every induced degree is at most
    /// `child_delta`; returns the number of moves.
    fn fix_invariant(&mut self, ops: &mut NetOps, seeds: [VertexId; 2]) -> Result<u64> {
        let thr = self.params.child_delta;
        let min_drop = self.params.min_drop();
        let mut queue: VecDeque<VertexId> = seeds
            .into_iter()
            .filter(|&w| self.indeg[w as usize] > thr)
            .collect();
        let mut moves = 0;
        while let Some(w) = queue.pop_front() {
            if self.indeg[w as usize] <= thr {
                continue;
            }
            let old = self.part[w as usize];
            let (j, after) = (0..self.params.b)
                .map(|j| (j, self.nbr_count(w, j)))
                .min_by_key(|&(j, c)| (c, j))
                .expect("at least one part");
            let before = self.indeg[w as usize];
            let drop = 2 * u64::from(before - after.min(before));
            if after >= before || drop < min_drop {
                return Err(Error::InvariantBroken(format!(
                    "move of {w} drops the potential by {drop} < {min_drop}"
                )));
            }
            let nbrs: Vec<(u32, VertexId)> = self.part_nbrs[w as usize]
                .iter()
                .flat_map(|(&p, set)| set.iter().map(move |&x| (p, x)))
                .collect();
            self.stats.touched += nbrs.len() as u64 + u64::from(self.params.b);
            for (px, x) in nbrs {
                self.unlink(x, old, w);
                self.link(x, j, w);
                if px == old {
                    self.indeg[x as usize] -= 1;
                    ops.push(old, UpdateKind::Delete, w, x);
                }
                if px == j {
                    self.indeg[x as usize] += 1;
                    ops.push(j, UpdateKind::Insert, w, x);
                    if self.indeg[x as usize] > thr {
                        queue.push_back(x);
                    }
                }
            }
            self.indeg[w as usize] = after;
            self.part[w as usize] = j;
            self.phi -= drop;
            self.stats.phi_dropped += drop;
            self.stats.moves += 1;
            moves += 1;
        }
        Ok(moves)
    }

    /// Potential bookkeeping: `Φ` equals injected minus removed, and the move
    /// count respects `moves · min_drop ≤ Φ_injected`.
    pub fn check_potential(&self) -> Result<()> {
        let s = &self.stats;
        if s.phi_injected != self.phi + s.phi_deleted + s.phi_dropped {
            return Err(Error::InvariantBroken(format!(
                "potential {} does not match injected {} - deleted {} - dropped {}",
                self.phi, s.phi_injected, s.phi_deleted, s.phi_dropped
            )));
        }
        if s.moves * self.params.min_drop() > s.phi_injected {
            return Err(Error::InvariantBroken(format!(
                "{} moves exceed injected potential {} / min drop {}",
                s.moves,
                s.phi_injected,
                self.params.min_drop()
            )));
        }
        Ok(())
    }
}

/// `A_k` over a strictly validated top-level graph.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    graph: DynamicGraph,
    root: HierNode,
    params: LevelParams,
}

impl Hierarchy {
    pub fn new(k: u32, n: usize, delta: u32, seed: u64, budget: u64) -> Result<Self> {
        let params = LevelParams::new(k, delta)?;
        Ok(Hierarchy {
            graph: DynamicGraph::new(n, delta)?,
            root: HierNode::build(k, n, delta, 0, seed, budget)?,
            params,
        })
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.graph
    }

    pub fn root(&self) -> &HierNode {
        &self.root
    }

    pub fn root_mut(&mut self) -> &mut HierNode {
        &mut self.root
    }

    pub fn params(&self) -> &LevelParams {
        &self.params
    }

    pub fn apply_update(&mut self, kind: UpdateKind, u: VertexId, v: VertexId) -> Result<u64> {
        self.graph.apply(kind, u, v)?;
        self.root.apply(kind, u, v)
    }

    pub fn current_color(&self, v: VertexId) -> Color {
        self.root.current_color(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_parameter_examples() {
        let p = LevelParams::new(2, 4096).unwrap();
        assert_eq!((p.b, p.c, p.child_delta), (128, 4432, 48));
        let p = LevelParams::new(1, 4096).unwrap();
        assert!(p.is_base());
        assert_eq!(p.c, 985);
        let p = LevelParams::new(3, 2).unwrap();
        assert_eq!(p.b, 1);
        let p = LevelParams::new(3, 4096).unwrap();
        assert_eq!((p.b, p.child_delta), (14, 391));
        let next = LevelParams::new(2, p.child_delta).unwrap();
        assert_eq!((next.b, next.child_delta), (27, 22));
    }

    #[test]
    fn balanced_split() {
        let s = split_palette(0, 4432, 128);
        assert_eq!(s.len(), 128);
        assert!(s.iter().all(|r| r.len() == 34 || r.len() == 35));
        assert_eq!(s[0].start, 0);
        assert_eq!(s[127].end, 4432);
        assert!(s.windows(2).all(|w| w[0].end == w[1].start));
    }

    #[test]
    fn eps_fitting() {
        let (eps, p) = fit_eps(48, 34).unwrap();
        assert_eq!(eps, 0.25);
        assert!(p.total() <= 34);
        assert!(fit_eps(48, 5).is_none());
    }

    #[test]
    fn build_k1_is_single_base() {
        let h = HierNode::build(1, 10, 64, 0, 1, 1000).unwrap();
        assert!(matches!(
            h,
            HierNode::Base {
                engine: BaseEngine::Local(_),
                ..
            }
        ));
        assert_eq!(h.slice(), &(0..LevelParams::new(1, 64).unwrap().c));
    }

    #[test]
    fn tiny_slice_is_rejected() {
        let r = BaseEngine::for_slice(4, 8, 0..2, Draws::Seeded(SeededRng::new(0)), 10);
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn build_k2_slices_partition() {
        let h = HierNode::build(2, 8, 4096, 0, 1, 1000).unwrap();
        let HierNode::Internal(node) = &h else {
            panic!("expected internal root")
        };
        assert_eq!(node.children().len(), 128);
        let mut next = 0;
        for (c, s) in node.children().iter().zip(node.child_slices()) {
            assert_eq!(c.slice(), s);
            assert_eq!(s.start, next);
            next = s.end;
        }
        assert_eq!(next, 4432);
    }

    fn small_internal() -> Hierarchy {
        // Δ = 16, k = 2: b = ceil(16^{2/3} / 2) = 4, child_delta = ceil(1.5 * 16 / 4) = 6.
        Hierarchy::new(2, 40, 16, 3, 1 << 20).unwrap()
    }

    #[test]
    fn small_params() {
        let h = small_internal();
        let HierNode::Internal(node) = h.root() else {
            panic!()
        };
        assert_eq!((node.params().b, node.params().child_delta), (4, 6));
        assert_eq!(node.params().min_drop(), 2 * (6 - 4));
    }

    #[test]
    fn cross_part_update_is_invisible_to_children() {
        let mut h = small_internal();
        // Put vertex 21 in part 1 directly.
        let HierNode::Internal(node) = h.root_mut() else {
            panic!()
        };
        node.part[21] = 1;
        h.apply_update(UpdateKind::Insert, 0, 21).unwrap();
        let HierNode::Internal(node) = h.root() else {
            panic!()
        };
        assert_eq!(node.stats().child_updates, 0);
        assert_eq!(node.phi(), 0);
        assert_eq!(node.part_neighbors(0).get(&1).unwrap().len(), 1);
    }

    #[test]
    fn same_part_update_reaches_one_child() {
        let mut h = small_internal();
        h.apply_update(UpdateKind::Insert, 0, 20).unwrap();
        let HierNode::Internal(node) = h.root() else {
            panic!()
        };
        assert_eq!(node.stats().child_updates, 1);
        assert_eq!(node.phi(), 2);
        let HierNode::Base { engine, .. } = &node.children()[0] else {
            panic!()
        };
        assert!(engine.graph().has_edge(0, 20));
    }

    #[test]
    fn dense_part_triggers_rebalancing() {
        let mut h = small_internal();
        // Vertex 0 against right-side vertices 20..27: the 7th edge pushes
        // indeg(0) past child_delta = 6.
        for x in 20..27 {
            h.apply_update(UpdateKind::Insert, 0, x).unwrap();
        }
        let HierNode::Internal(node) = h.root() else {
            panic!()
        };
        assert!(node.stats().moves >= 1);
        assert!((0..40).all(|v| node.indeg(v) <= 6));
        node.check_potential().unwrap();
        // Colors stay proper across parts.
        for x in 20..27 {
            assert_ne!(h.current_color(0), h.current_color(x));
        }
    }

    #[test]
    fn net_ops_cancel() {
        let mut ops = NetOps::default();
        ops.push(0, UpdateKind::Insert, 1, 2);
        ops.push(0, UpdateKind::Delete, 2, 1);
        assert!(ops.ops.is_empty());
        ops.push(1, UpdateKind::Delete, 1, 2);
        ops.push(1, UpdateKind::Insert, 1, 2);
        ops.push(1, UpdateKind::Delete, 1, 2);
        assert_eq!(ops.ops.len(), 1);
    }
}
