//! Shared setup for the engine comparison benchmarks.

use trifree_core::adversary::{oblivious_bipartite_trace, Trace};
use trifree_core::events::NoopObserver;
use trifree_core::harness::{Engine, EngineKind, RunConfig};
use trifree_core::Result;

/// `A_k` for each `k` in `ks`, then the greedy baseline, on one oblivious trace.
pub fn comparison_configs(
    n: usize,
    delta: u32,
    steps: u64,
    ks: &[u32],
    seed: u64,
) -> Vec<RunConfig> {
    let mut base = RunConfig::new(n, delta, steps);
    base.seed = seed;
    let mut out: Vec<RunConfig> = ks
        .iter()
        .map(|&k| RunConfig { k, ..base.clone() })
        .collect();
    out.push(RunConfig {
        engine: EngineKind::Greedy,
        ..base
    });
    out
}

pub fn trace_for(cfg: &RunConfig) -> Result<Trace> {
    oblivious_bipartite_trace(cfg.n, cfg.delta, cfg.steps as usize, 0.7, cfg.seed)
}

/// Feeds every update of `trace` to a fresh engine; returns total recourse.
pub fn drive(cfg: &RunConfig, trace: &Trace) -> Result<u64> {
    let mut engine = Engine::build(cfg)?;
    let mut recourse = 0;
    for up in trace.steps.iter().flatten() {
        recourse += engine.apply(up.kind, up.u, up.v, &mut NoopObserver)?;
    }
    Ok(recourse)
}
