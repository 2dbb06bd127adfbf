//! Synchronous hooks fired by the local search.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::{UpdateKind, VertexId};
use crate::palette::{Color, Thresholds};
use crate::partial::{PartialColoring, Violation};
use crate::rng::Draw;

/// Position of a fix target relative to the vertex owning the enclosing scope
/// (the update's first endpoint, or the vertex whose fix is running).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LocalAddr {
    /// The scope owner itself.
    Base,
    /// The other endpoint of the update.
    Partner,
    /// `i`-th neighbor of the owner.
    Hop1(u32),
    /// `j`-th neighbor of the owner's `i`-th neighbor.
    Hop2(u32, u32),
}

/// Read-only view of the neighborhood about to be resampled.
pub struct ResampleView<'a> {
    pub vertex: VertexId,
    pub neighbors: &'a [VertexId],
    pub coloring: &'a PartialColoring,
    pub thresholds: Thresholds,
}

impl ResampleView<'_> {
    pub fn q(&self) -> u32 {
        self.coloring.q()
    }

    /// `a(z) + 1` for each neighbor in order.
    pub fn radices(&self) -> Vec<u32> {
        self.neighbors
            .iter()
            .map(|&z| self.coloring.avail_count(z) + 1)
            .collect()
    }

    pub fn avail_lists(&self) -> Vec<Vec<Color>> {
        self.neighbors
            .iter()
            .map(|&z| self.coloring.avail_colors(z))
            .collect()
    }

    pub fn current(&self) -> Vec<Option<Color>> {
        self.neighbors
            .iter()
            .map(|&z| self.coloring.phi(z))
            .collect()
    }
}

#[allow(unused_variables)]
pub trait EngineObserver {
    /// Fires after step 2 of the update handler, once the blanking decision is known.
    fn update(&mut self, kind: UpdateKind, u: VertexId, v: VertexId, blanked: bool) -> Result<()> {
        Ok(())
    }
    /// `true` when no vertex in the update's scope violates a threshold.
    fn early_termination(&mut self, terminated: bool) -> Result<()> {
        Ok(())
    }
    fn fix_begin(&mut self, vertex: VertexId, addr: LocalAddr, violation: Violation) -> Result<()> {
        Ok(())
    }
    fn resample_begin(&mut self, view: &ResampleView<'_>) -> Result<()> {
        Ok(())
    }
    fn draw(&mut self, draw: Draw) -> Result<()> {
        Ok(())
    }
    fn recolor(&mut self, vertex: VertexId, old: Option<Color>, new: Option<Color>) -> Result<()> {
        Ok(())
    }
    /// After the draws of a resample and before its repair scan.
    fn resample_end(&mut self, vertex: VertexId, availability: u32) -> Result<()> {
        Ok(())
    }
    fn fix_end(&mut self, vertex: VertexId) -> Result<()> {
        Ok(())
    }
    fn update_end(&mut self) -> Result<()> {
        Ok(())
    }
}

pub struct NoopObserver;

impl EngineObserver for NoopObserver {}
