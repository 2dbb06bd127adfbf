//! Local-search maintenance of a proper partial coloring into `C1 ∪ {⊥}`.
//!
//! After every update each vertex `v` must keep `a(v) >= thr_a` available
//! colors and at most `thr_f` free (⊥) neighbors. A violating vertex is fixed
//! by resampling its whole neighborhood: every neighbor `z` draws uniformly
//! from `Avail(z) ∪ {⊥}`, with the available colors taken in ascending order
//! and ⊥ as the last index. Since the graph is triangle-free the neighborhood
//! is independent, so the draws never conflict with each other.
//!
//! `Fix` and `Resample` call each other recursively. Here the recursion runs
//! on an explicit stack of frames; each "while some vertex in this scope
//! violates, fix it" loop becomes a single ordered pass over the scope's
//! candidates, which is equivalent because a returning fix leaves every
//! vertex it touched satisfied.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{EngineObserver, LocalAddr, ResampleView};
use crate::graph::{DynamicGraph, UpdateKind, VertexId};
use crate::palette::{Color, Palette, Thresholds};
use crate::rng::{Draw, DrawSource, Draws};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    None,
    LowAvail,
    HighFree,
    Both,
}

impl Violation {
    fn from_flags(low: bool, high: bool) -> Self {
        match (low, high) {
            (false, false) => Violation::None,
            (true, false) => Violation::LowAvail,
            (false, true) => Violation::HighFree,
            (true, true) => Violation::Both,
        }
    }

    pub fn is_violated(self) -> bool {
        self != Violation::None
    }

    pub fn low_avail(self) -> bool {
        matches!(self, Violation::LowAvail | Violation::Both)
    }

    pub fn high_free(self) -> bool {
        matches!(self, Violation::HighFree | Violation::Both)
    }
}

/// `φ` together with the per-vertex counters the thresholds are tested on.
///
/// `use_count[v][c]` counts neighbors of `v` colored `c`; the availability set
/// is a bitset over `C1` so that "the r-th available color in ascending order"
/// is a word scan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialColoring {
    q: u32,
    words: usize,
    phi: Vec<Option<Color>>,
    use_count: Vec<u16>,
    avail_bits: Vec<u64>,
    avail_len: Vec<u32>,
    free: Vec<u32>,
}

impl PartialColoring {
    /// Every vertex free, no edges.
    pub fn new(n: usize, q: u32) -> Self {
        let words = (q as usize).div_ceil(64);
        let mut row = vec![u64::MAX; words];
        if !q.is_multiple_of(64) {
            row[words - 1] = (1u64 << (q % 64)) - 1;
        }
        PartialColoring {
            q,
            words,
            phi: vec![None; n],
            use_count: vec![0; n * q as usize],
            avail_bits: row.repeat(n),
            avail_len: vec![q; n],
            free: vec![0; n],
        }
    }

    /// Counters rebuilt from scratch for `phi` on `graph`.
    pub fn from_phi(graph: &DynamicGraph, q: u32, phi: &[Option<Color>]) -> Self {
        let mut pc = PartialColoring::new(graph.n(), q);
        pc.phi.copy_from_slice(phi);
        for e in graph.edges() {
            pc.edge_added(e.u, e.v);
        }
        pc
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn n(&self) -> usize {
        self.phi.len()
    }

    pub fn phi(&self, v: VertexId) -> Option<Color> {
        self.phi[v as usize]
    }

    pub fn phi_slice(&self) -> &[Option<Color>] {
        &self.phi
    }

    pub fn avail_count(&self, v: VertexId) -> u32 {
        self.avail_len[v as usize]
    }

    pub fn free_count(&self, v: VertexId) -> u32 {
        self.free[v as usize]
    }

    pub fn use_count(&self, v: VertexId, c: Color) -> u32 {
        u32::from(self.use_count[v as usize * self.q as usize + c as usize])
    }

    pub fn is_available(&self, v: VertexId, c: Color) -> bool {
        let row = v as usize * self.words;
        self.avail_bits[row + c as usize / 64] >> (c % 64) & 1 == 1
    }

    /// Available colors of `v`, ascending.
    pub fn avail_colors(&self, v: VertexId) -> Vec<Color> {
        let row = &self.avail_bits[v as usize * self.words..(v as usize + 1) * self.words];
        let mut out = Vec::with_capacity(self.avail_len[v as usize] as usize);
        for (w, &bits) in row.iter().enumerate() {
            let mut bits = bits;
            while bits != 0 {
                out.push((w * 64) as u32 + bits.trailing_zeros());
                bits &= bits - 1;
            }
        }
        out
    }

    /// The `rank`-th available color of `v` in ascending order.
    pub fn select_available(&self, v: VertexId, rank: u32) -> Color {
        debug_assert!(rank < self.avail_len[v as usize]);
        let row = &self.avail_bits[v as usize * self.words..(v as usize + 1) * self.words];
        let mut rank = rank;
        for (w, &bits) in row.iter().enumerate() {
            let ones = bits.count_ones();
            if rank < ones {
                let mut bits = bits;
                for _ in 0..rank {
                    bits &= bits - 1;
                }
                return (w * 64) as u32 + bits.trailing_zeros();
            }
            rank -= ones;
        }
        unreachable!("rank beyond availability")
    }

    /// Position of `c` among the available colors of `v`.
    pub fn rank_available(&self, v: VertexId, c: Color) -> u32 {
        let row = &self.avail_bits[v as usize * self.words..(v as usize + 1) * self.words];
        let w = c as usize / 64;
        let below: u32 = row[..w].iter().map(|b| b.count_ones()).sum();
        below + (row[w] & ((1u64 << (c % 64)) - 1)).count_ones()
    }

    #[inline]
    fn add_neighbor_color(&mut self, x: VertexId, c: Option<Color>) {
        match c {
            None => self.free[x as usize] += 1,
            Some(c) => {
                let slot = x as usize * self.q as usize + c as usize;
                if self.use_count[slot] == 0 {
                    let row = x as usize * self.words;
                    self.avail_bits[row + c as usize / 64] &= !(1u64 << (c % 64));
                    self.avail_len[x as usize] -= 1;
                }
                self.use_count[slot] += 1;
            }
        }
    }

    #[inline]
    fn remove_neighbor_color(&mut self, x: VertexId, c: Option<Color>) {
        match c {
            None => self.free[x as usize] -= 1,
            Some(c) => {
                let slot = x as usize * self.q as usize + c as usize;
                self.use_count[slot] -= 1;
                if self.use_count[slot] == 0 {
                    let row = x as usize * self.words;
                    self.avail_bits[row + c as usize / 64] |= 1u64 << (c % 64);
                    self.avail_len[x as usize] += 1;
                }
            }
        }
    }

    pub(crate) fn edge_added(&mut self, u: VertexId, v: VertexId) {
        self.add_neighbor_color(u, self.phi(v));
        self.add_neighbor_color(v, self.phi(u));
    }

    pub(crate) fn edge_removed(&mut self, u: VertexId, v: VertexId) {
        self.remove_neighbor_color(u, self.phi(v));
        self.remove_neighbor_color(v, self.phi(u));
    }

    /// Recolors `z` and moves the counters of all its neighbors.
    pub(crate) fn set_color(&mut self, graph: &DynamicGraph, z: VertexId, new: Option<Color>) {
        let old = self.phi[z as usize];
        if old == new {
            return;
        }
        for &x in graph.neighbors(z) {
            self.remove_neighbor_color(x, old);
            self.add_neighbor_color(x, new);
        }
        self.phi[z as usize] = new;
    }

    pub fn violation(&self, v: VertexId, t: &Thresholds) -> Violation {
        Violation::from_flags(
            self.avail_len[v as usize] < t.thr_a,
            self.free[v as usize] > t.thr_f,
        )
    }
}

/// One vertex whose `φ` value differs before and after an operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Change {
    pub vertex: VertexId,
    pub old: Option<Color>,
    pub new: Option<Color>,
}

#[derive(Debug, Clone, Default)]
struct ChangeTracker(IndexMap<VertexId, (Option<Color>, Option<Color>)>);

impl ChangeTracker {
    fn record(&mut self, v: VertexId, old: Option<Color>, new: Option<Color>) {
        self.0.entry(v).or_insert((old, new)).1 = new;
    }

    fn finish(self) -> Vec<Change> {
        self.0
            .into_iter()
            .filter(|(_, (old, new))| old != new)
            .map(|(vertex, (old, new))| Change { vertex, old, new })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_resamples: u64,
    pub used: u64,
}

impl Budget {
    pub fn new(max_resamples: u64) -> Self {
        Budget {
            max_resamples,
            used: 0,
        }
    }

    /// `64 (T + n) max(1, log2 n)` resamples.
    pub fn for_run(updates: u64, n: usize) -> Self {
        let log_n = (n.max(2) as f64).log2().ceil().max(1.0) as u64;
        Budget::new(
            64u64
                .saturating_mul(updates + n as u64)
                .saturating_mul(log_n),
        )
    }

    fn charge(&mut self) -> Result<()> {
        if self.used >= self.max_resamples {
            return Err(Error::BudgetExhausted {
                limit: self.max_resamples,
            });
        }
        self.used += 1;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialStats {
    pub updates: u64,
    pub resamples: u64,
    pub fixes: u64,
    pub recolors: u64,
    /// Vertex visits: recolored neighbors, counter updates and scanned candidates.
    pub touched: u64,
}

enum Frame {
    /// Ordered pass over candidates; `low_only` restricts the trigger to low
    /// availability.
    Scope {
        candidates: Vec<(VertexId, LocalAddr)>,
        pos: usize,
        low_only: bool,
    },
    Fix {
        vertex: VertexId,
        stage: FixStage,
    },
}

#[derive(Clone, Copy)]
enum FixStage {
    ResampleOnLowAvail,
    FixLowNeighbors,
    ResampleOnHighFree,
    Done,
}

/// The partial-coloring engine: counters, thresholds, randomness and budget.
#[derive(Debug, Clone)]
pub struct PartialColorer {
    coloring: PartialColoring,
    palette: Palette,
    thresholds: Thresholds,
    draws: Draws,
    budget: Budget,
    stats: PartialStats,
    marks: Vec<u32>,
    epoch: u32,
}

impl PartialColorer {
    pub fn new(
        n: usize,
        palette: Palette,
        thresholds: Thresholds,
        draws: Draws,
        budget: Budget,
    ) -> Self {
        PartialColorer {
            coloring: PartialColoring::new(n, palette.q),
            palette,
            thresholds,
            draws,
            budget,
            stats: PartialStats::default(),
            marks: vec![0; n],
            epoch: 0,
        }
    }

    pub fn coloring(&self) -> &PartialColoring {
        &self.coloring
    }

    pub fn palette(&self) -> &Palette {
        &self.palette
    }

    pub fn thresholds(&self) -> &Thresholds {
        &self.thresholds
    }

    pub fn stats(&self) -> &PartialStats {
        &self.stats
    }

    pub fn budget(&self) -> &Budget {
        &self.budget
    }

    pub fn draws(&self) -> &Draws {
        &self.draws
    }

    pub fn violation(&self, v: VertexId) -> Violation {
        self.coloring.violation(v, &self.thresholds)
    }

    /// Installs a coloring directly (fixtures and the availability estimator).
    pub fn load_phi(&mut self, graph: &DynamicGraph, phi: &[Option<Color>]) {
        self.coloring = PartialColoring::from_phi(graph, self.palette.q, phi);
    }

    /// Reacts to `(u, v)` having just been inserted into or deleted from `graph`.
    pub fn handle_update(
        &mut self,
        graph: &DynamicGraph,
        kind: UpdateKind,
        u: VertexId,
        v: VertexId,
        obs: &mut dyn EngineObserver,
    ) -> Result<Vec<Change>> {
        self.stats.updates += 1;
        let mut changes = ChangeTracker::default();
        match kind {
            UpdateKind::Insert => self.coloring.edge_added(u, v),
            UpdateKind::Delete => self.coloring.edge_removed(u, v),
        }
        self.stats.touched += 2;

        let phi_u = self.coloring.phi(u);
        let blanked =
            kind == UpdateKind::Insert && phi_u.is_some() && phi_u == self.coloring.phi(v);
        if blanked {
            self.recolor(graph, u, None, &mut changes, obs)?;
        }
        obs.update(kind, u, v, blanked)?;

        let mut candidates = vec![(u, LocalAddr::Base), (v, LocalAddr::Partner)];
        for (i, &w) in graph.neighbors(u).iter().enumerate() {
            if w != v {
                candidates.push((w, LocalAddr::Hop1(i as u32)));
            }
        }
        self.stats.touched += candidates.len() as u64;
        let any = candidates
            .iter()
            .any(|&(w, _)| self.violation(w).is_violated());
        obs.early_termination(!any)?;
        if any {
            let frame = Frame::Scope {
                candidates,
                pos: 0,
                low_only: false,
            };
            self.run(graph, frame, &mut changes, obs)?;
        }
        obs.update_end()?;
        Ok(changes.finish())
    }

    /// Runs one `Resample(u)` with its repair scan outside of any update and
    /// returns `a(u)` as measured right after the draws.
    pub fn resample_and_repair(
        &mut self,
        graph: &DynamicGraph,
        u: VertexId,
        obs: &mut dyn EngineObserver,
    ) -> Result<(Vec<Change>, u32)> {
        let mut changes = ChangeTracker::default();
        let scope = self.resample(graph, u, &mut changes, obs)?;
        let availability = self.coloring.avail_count(u);
        self.run(graph, scope, &mut changes, obs)?;
        Ok((changes.finish(), availability))
    }

    /// Runs `Fix(u)` to completion (no-op when `u` satisfies both thresholds).
    pub fn fix(
        &mut self,
        graph: &DynamicGraph,
        u: VertexId,
        obs: &mut dyn EngineObserver,
    ) -> Result<Vec<Change>> {
        let mut changes = ChangeTracker::default();
        let frame = Frame::Scope {
            candidates: vec![(u, LocalAddr::Base)],
            pos: 0,
            low_only: false,
        };
        self.run(graph, frame, &mut changes, obs)?;
        Ok(changes.finish())
    }

    fn run(
        &mut self,
        graph: &DynamicGraph,
        root: Frame,
        changes: &mut ChangeTracker,
        obs: &mut dyn EngineObserver,
    ) -> Result<()> {
        let mut stack = vec![root];
        while let Some(top) = stack.last_mut() {
            match top {
                Frame::Scope {
                    candidates,
                    pos,
                    low_only,
                } => {
                    let Some(&(w, addr)) = candidates.get(*pos) else {
                        stack.pop();
                        continue;
                    };
                    *pos += 1;
                    self.stats.touched += 1;
                    let violation = self.violation(w);
                    let triggered = if *low_only {
                        violation.low_avail()
                    } else {
                        violation.is_violated()
                    };
                    if triggered {
                        self.stats.fixes += 1;
                        obs.fix_begin(w, addr, violation)?;
                        stack.push(Frame::Fix {
                            vertex: w,
                            stage: FixStage::ResampleOnLowAvail,
                        });
                    }
                }
                Frame::Fix { vertex, stage } => {
                    let u = *vertex;
                    match *stage {
                        FixStage::ResampleOnLowAvail => {
                            *stage = FixStage::FixLowNeighbors;
                            if self.coloring.avail_count(u) < self.thresholds.thr_a {
                                let scope = self.resample(graph, u, changes, obs)?;
                                stack.push(scope);
                            }
                        }
                        FixStage::FixLowNeighbors => {
                            *stage = FixStage::ResampleOnHighFree;
                            if self.coloring.free_count(u) > self.thresholds.thr_f {
                                let candidates = graph
                                    .neighbors(u)
                                    .iter()
                                    .enumerate()
                                    .map(|(i, &w)| (w, LocalAddr::Hop1(i as u32)))
                                    .collect();
                                stack.push(Frame::Scope {
                                    candidates,
                                    pos: 0,
                                    low_only: true,
                                });
                            }
                        }
                        FixStage::ResampleOnHighFree => {
                            *stage = FixStage::Done;
                            if self.coloring.free_count(u) > self.thresholds.thr_f {
                                let scope = self.resample(graph, u, changes, obs)?;
                                stack.push(scope);
                            }
                        }
                        FixStage::Done => {
                            debug_assert!(!self.violation(u).is_violated());
                            obs.fix_end(u)?;
                            stack.pop();
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Redraws every neighbor of `u` and returns the repair scope over
    /// `N(N(u))` (which starts with `u` itself).
    fn resample(
        &mut self,
        graph: &DynamicGraph,
        u: VertexId,
        changes: &mut ChangeTracker,
        obs: &mut dyn EngineObserver,
    ) -> Result<Frame> {
        self.budget.charge()?;
        self.stats.resamples += 1;
        let neighbors = graph.neighbors(u);
        obs.resample_begin(&ResampleView {
            vertex: u,
            neighbors,
            coloring: &self.coloring,
            thresholds: self.thresholds,
        })?;
        for &z in neighbors {
            let a = self.coloring.avail_count(z);
            let r = self.draws.uniform_index(a + 1)?;
            obs.draw(Draw {
                modulus: a + 1,
                value: r,
            })?;
            let new = if r < a {
                Some(self.coloring.select_available(z, r))
            } else {
                None
            };
            self.stats.touched += 1 + graph.degree(z) as u64;
            self.recolor(graph, z, new, changes, obs)?;
        }
        obs.resample_end(u, self.coloring.avail_count(u))?;

        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.marks.fill(0);
            self.epoch = 1;
        }
        let epoch = self.epoch;
        self.marks[u as usize] = epoch;
        let mut candidates = vec![(u, LocalAddr::Base)];
        for (i, &z) in neighbors.iter().enumerate() {
            for (j, &w) in graph.neighbors(z).iter().enumerate() {
                if self.marks[w as usize] != epoch {
                    self.marks[w as usize] = epoch;
                    candidates.push((w, LocalAddr::Hop2(i as u32, j as u32)));
                }
            }
        }
        Ok(Frame::Scope {
            candidates,
            pos: 0,
            low_only: false,
        })
    }

    fn recolor(
        &mut self,
        graph: &DynamicGraph,
        z: VertexId,
        new: Option<Color>,
        changes: &mut ChangeTracker,
        obs: &mut dyn EngineObserver,
    ) -> Result<()> {
        let old = self.coloring.phi(z);
        if old == new {
            return Ok(());
        }
        self.coloring.set_color(graph, z, new);
        self.stats.recolors += 1;
        changes.record(z, old, new);
        obs.recolor(z, old, new)
    }
}
