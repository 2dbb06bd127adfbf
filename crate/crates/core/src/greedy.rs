//! Dynamic greedy coloring: on a monochromatic insertion the first endpoint
//! takes the smallest color absent from its neighborhood.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::full::OVERFLOW_BASE;
use crate::graph::{DynamicGraph, UpdateKind, VertexId};
use crate::palette::Color;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreedyStats {
    pub updates: u64,
    pub recolors: u64,
    pub touched: u64,
}

#[derive(Debug, Clone)]
pub struct GreedyEngine {
    graph: DynamicGraph,
    /// Local slot per vertex; slots at or past `palette_size` are overflow.
    slots: Vec<u32>,
    palette_base: Color,
    palette_size: u32,
    overflow_count: u64,
    stats: GreedyStats,
}

impl GreedyEngine {
    /// The `Δ + 1` baseline.
    pub fn baseline(n: usize, delta: u32) -> Result<Self> {
        Self::new(n, delta, 0, delta + 1, true)
    }

    pub fn new(
        n: usize,
        delta: u32,
        palette_base: Color,
        palette_size: u32,
        strict: bool,
    ) -> Result<Self> {
        Ok(GreedyEngine {
            graph: DynamicGraph::new(n, delta)?.with_strict(strict),
            slots: vec![0; n],
            palette_base,
            palette_size: palette_size.max(1),
            overflow_count: 0,
            stats: GreedyStats::default(),
        })
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.graph
    }

    pub fn stats(&self) -> &GreedyStats {
        &self.stats
    }

    pub fn overflow_count(&self) -> u64 {
        self.overflow_count
    }

    pub fn palette_range(&self) -> std::ops::Range<Color> {
        self.palette_base..self.palette_base + self.palette_size
    }

    pub fn current_color(&self, v: VertexId) -> Color {
        let s = self.slots[v as usize];
        if s < self.palette_size {
            self.palette_base + s
        } else {
            OVERFLOW_BASE + self.palette_base + (s - self.palette_size)
        }
    }

    /// Returns the number of vertices whose color changed (0 or 1).
    pub fn apply_update(&mut self, kind: UpdateKind, u: VertexId, v: VertexId) -> Result<u32> {
        self.graph.apply(kind, u, v)?;
        self.stats.updates += 1;
        self.stats.touched += 2;
        if kind == UpdateKind::Delete || self.slots[u as usize] != self.slots[v as usize] {
            return Ok(0);
        }
        let nbrs = self.graph.neighbors(u);
        let mut held = vec![false; nbrs.len() + 1];
        for &w in nbrs {
            if let Some(h) = held.get_mut(self.slots[w as usize] as usize) {
                *h = true;
            }
        }
        let slot = held.iter().position(|h| !h).expect("deg + 1 slots") as u32;
        self.stats.touched += nbrs.len() as u64;
        if slot >= self.palette_size {
            self.overflow_count += 1;
        }
        self.slots[u as usize] = slot;
        self.stats.recolors += 1;
        Ok(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conflict_takes_smallest_absent_color() {
        let mut g = GreedyEngine::baseline(4, 3).unwrap();
        g.apply_update(UpdateKind::Insert, 1, 2).unwrap();
        assert_eq!((g.current_color(1), g.current_color(2)), (1, 0));
        g.apply_update(UpdateKind::Insert, 0, 3).unwrap();
        assert_eq!(g.current_color(0), 1);
        assert!(g.apply_update(UpdateKind::Insert, 0, 3).is_err());
    }

    #[test]
    fn recolor_to_two() {
        let mut g = GreedyEngine::baseline(5, 3).unwrap();
        g.slots = vec![0, 0, 1, 0, 0];
        g.graph.insert_edge(0, 2).unwrap();
        let r = g.apply_update(UpdateKind::Insert, 0, 1).unwrap();
        assert_eq!(r, 1);
        assert_eq!(g.current_color(0), 2);
    }

    #[test]
    fn deletion_never_recolors() {
        let mut g = GreedyEngine::baseline(4, 3).unwrap();
        g.apply_update(UpdateKind::Insert, 0, 1).unwrap();
        let before: Vec<_> = (0..4).map(|v| g.current_color(v)).collect();
        assert_eq!(g.apply_update(UpdateKind::Delete, 0, 1).unwrap(), 0);
        assert_eq!(
            before,
            (0..4).map(|v| g.current_color(v)).collect::<Vec<_>>()
        );
    }

    #[test]
    fn small_slice_overflows() {
        let mut g = GreedyEngine::new(3, 2, 10, 1, true).unwrap();
        g.apply_update(UpdateKind::Insert, 0, 1).unwrap();
        assert_eq!(g.overflow_count(), 1);
        assert_eq!(g.current_color(0), OVERFLOW_BASE + 10);
        assert_eq!(g.current_color(1), 10);
    }
}
