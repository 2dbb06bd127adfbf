//! Dynamic coloring of bounded-degree triangle-free graphs with about
//! `Δ / ln Δ` colors under adversarial edge insertions and deletions.

pub mod adversary;
pub mod entropy;
pub mod error;
pub mod events;
pub mod full;
pub mod graph;
pub mod greedy;
pub mod harness;
pub mod hierarchy;
pub mod palette;
pub mod partial;
pub mod rng;
pub mod verify;

pub use adversary::{MonochromeAttacker, Trace, Update};
pub use entropy::{BitLedger, LogMode, RunLog};
pub use error::{Error, Result};
pub use full::{ColoringEngine, EngineConfig};
pub use graph::{DynamicGraph, Edge, UpdateKind, VertexId};
pub use greedy::GreedyEngine;
pub use harness::{run, Engine, EngineKind, RunConfig, RunOutcome};
pub use hierarchy::Hierarchy;
pub use palette::{Color, Palette, Thresholds};
pub use partial::{Budget, PartialColorer};
pub use rng::{Draw, Draws, ScriptedDraws, SeededRng};
