//! Total coloring: the partial coloring from `C1` plus greedy completion of
//! free vertices from `C2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{EngineObserver, NoopObserver};
use crate::graph::{DynamicGraph, UpdateKind, VertexId};
use crate::palette::{Color, Palette, Thresholds};
use crate::partial::{Budget, Change, PartialColorer};
use crate::rng::Draws;

/// Colors issued past an engine's nominal palette live above this id so they
/// never collide with a regular palette slice.
pub const OVERFLOW_BASE: Color = 1 << 30;

#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub n: usize,
    pub delta: u32,
    pub palette: Palette,
    pub thresholds: Thresholds,
    pub draws: Draws,
    pub budget: Budget,
    /// First global color id owned by this engine.
    pub palette_base: Color,
    pub strict: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionStats {
    /// Vertices whose visible color changed.
    pub recourse: u64,
    pub c2_assignments: u64,
    pub repairs: u64,
    pub touched: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpdateOutcome {
    pub changes: Vec<Change>,
    pub recourse: u32,
}

#[derive(Debug, Clone)]
pub struct ColoringEngine {
    graph: DynamicGraph,
    partial: PartialColorer,
    palette_base: Color,
    /// Local C2 slot per vertex, present iff `φ(v) = ⊥`. Slots at or past
    /// `c2_size` are overflow colors.
    c2: Vec<Option<u32>>,
    overflow_count: u64,
    stats: CompletionStats,
}

impl ColoringEngine {
    pub fn new(cfg: EngineConfig) -> Result<Self> {
        if cfg.delta > u32::from(u16::MAX) {
            return Err(Error::Config(format!("delta {} too large", cfg.delta)));
        }
        let graph = DynamicGraph::new(cfg.n, cfg.delta)?.with_strict(cfg.strict);
        let partial =
            PartialColorer::new(cfg.n, cfg.palette, cfg.thresholds, cfg.draws, cfg.budget);
        Ok(ColoringEngine {
            graph,
            partial,
            palette_base: cfg.palette_base,
            c2: vec![Some(0); cfg.n],
            overflow_count: 0,
            stats: CompletionStats::default(),
        })
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.graph
    }

    pub fn partial(&self) -> &PartialColorer {
        &self.partial
    }

    pub fn palette(&self) -> &Palette {
        self.partial.palette()
    }

    pub fn palette_base(&self) -> Color {
        self.palette_base
    }

    pub fn overflow_count(&self) -> u64 {
        self.overflow_count
    }

    pub fn stats(&self) -> &CompletionStats {
        &self.stats
    }

    /// Nominal global palette range `[base, base + q + |C2|)`.
    pub fn palette_range(&self) -> std::ops::Range<Color> {
        self.palette_base..self.palette_base + self.palette().total()
    }

    pub fn c2_slot(&self, v: VertexId) -> Option<u32> {
        self.c2[v as usize]
    }

    fn slot_color(&self, slot: u32) -> Color {
        let p = self.palette();
        if slot < p.c2_size {
            self.palette_base + p.q + slot
        } else {
            OVERFLOW_BASE + self.palette_base + (slot - p.c2_size)
        }
    }

    fn visible(&self, phi: Option<Color>, slot: Option<u32>) -> Option<Color> {
        match phi {
            Some(c) => Some(self.palette_base + c),
            None => slot.map(|s| self.slot_color(s)),
        }
    }

    pub fn current_color(&self, v: VertexId) -> Color {
        self.visible(self.partial.coloring().phi(v), self.c2[v as usize])
            .expect("free vertex without a C2 color")
    }

    pub fn insert(&mut self, u: VertexId, v: VertexId) -> Result<UpdateOutcome> {
        self.apply_update(UpdateKind::Insert, u, v, &mut NoopObserver)
    }

    pub fn delete(&mut self, u: VertexId, v: VertexId) -> Result<UpdateOutcome> {
        self.apply_update(UpdateKind::Delete, u, v, &mut NoopObserver)
    }

    /// Applies the edge update to the graph, runs the local search, then
    /// recolors every changed free vertex greedily from `C2`.
    pub fn apply_update(
        &mut self,
        kind: UpdateKind,
        u: VertexId,
        v: VertexId,
        obs: &mut dyn EngineObserver,
    ) -> Result<UpdateOutcome> {
        self.graph.apply(kind, u, v)?;
        let changes = self.partial.handle_update(&self.graph, kind, u, v, obs)?;

        let before: Vec<(VertexId, Option<Color>)> = changes
            .iter()
            .map(|ch| (ch.vertex, self.visible(ch.old, self.c2[ch.vertex as usize])))
            .collect();
        for ch in &changes {
            self.c2[ch.vertex as usize] = None;
        }
        for ch in &changes {
            if ch.new.is_none() {
                self.greedy_c2(ch.vertex);
            }
        }
        let mut recourse = before
            .iter()
            .filter(|&&(w, old)| old != Some(self.current_color(w)))
            .count() as u32;
        if kind == UpdateKind::Insert && self.repair_c2_conflict(u, v) {
            recourse += 1;
        }
        self.stats.recourse += u64::from(recourse);
        Ok(UpdateOutcome { changes, recourse })
    }

    /// Gives free vertex `v` the smallest C2 slot not held by a neighbor and
    /// returns its visible color.
    pub fn greedy_c2(&mut self, v: VertexId) -> Color {
        debug_assert!(self.partial.coloring().phi(v).is_none());
        let c2_size = self.palette().c2_size as usize;
        let mut held = vec![false; c2_size.max(self.graph.degree(v) + 1)];
        for &w in self.graph.neighbors(v) {
            if let Some(s) = self.c2[w as usize] {
                if let Some(slot) = held.get_mut(s as usize) {
                    *slot = true;
                }
            }
        }
        let slot = held.iter().position(|h| !h).unwrap_or(held.len()) as u32;
        if slot as usize >= c2_size {
            self.overflow_count += 1;
            log::warn!("C2 exhausted at vertex {v}; issuing overflow slot {slot}");
        }
        self.c2[v as usize] = Some(slot);
        self.stats.c2_assignments += 1;
        self.stats.touched += 1 + self.graph.degree(v) as u64;
        self.slot_color(slot)
    }

    /// Moves `u` to a fresh C2 color when the new edge `(u, v)` joins two free
    /// vertices holding the same one. Returns whether anything changed.
    pub fn repair_c2_conflict(&mut self, u: VertexId, v: VertexId) -> bool {
        let pc = self.partial.coloring();
        if pc.phi(u).is_some() || pc.phi(v).is_some() {
            return false;
        }
        if self.c2[u as usize] != self.c2[v as usize] {
            return false;
        }
        self.greedy_c2(u);
        self.stats.repairs += 1;
        true
    }

    /// Largest visible color id currently in use.
    pub fn max_color(&self) -> Color {
        (0..self.graph.n() as VertexId)
            .map(|v| self.current_color(v))
            .max()
            .unwrap_or(0)
    }

    /// Reinstalls `φ` and recomputes C2 greedily for every free vertex
    /// (test fixtures and the availability estimator).
    pub fn load_phi(&mut self, phi: &[Option<Color>]) {
        self.partial.load_phi(&self.graph, phi);
        for v in 0..self.graph.n() {
            self.c2[v] = None;
        }
        for v in 0..self.graph.n() as VertexId {
            if phi[v as usize].is_none() {
                self.greedy_c2(v);
            }
        }
    }

    /// Applies a graph change without running the local search. Fixtures only.
    pub fn raw_graph_update(&mut self, kind: UpdateKind, u: VertexId, v: VertexId) -> Result<()> {
        self.graph.apply(kind, u, v)
    }
}
