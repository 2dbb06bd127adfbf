//! Experiment runner: configuration, engine selection, inline checks and
//! windowed metrics.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::adversary::{oblivious_bipartite_trace, MonochromeAttacker, OracleView, Step, Trace};
use crate::entropy::{BitLedger, LogHeader, LogMode, LogRecorder, RunLog};
use crate::error::{Error, Result};
use crate::events::{EngineObserver, NoopObserver};
use crate::full::{ColoringEngine, EngineConfig};
use crate::graph::{DynamicGraph, Edge, UpdateKind, VertexId};
use crate::greedy::GreedyEngine;
use crate::hierarchy::Hierarchy;
use crate::palette::{Color, Palette, Thresholds};
use crate::partial::Budget;
use crate::rng::{Draws, SeededRng};
use crate::verify;

pub const DEFAULT_CHECKPOINT: u64 = 1024;
pub const SEED_ENV: &str = "TFC_SEED";

/// Parses a seed given in decimal or `0x` hexadecimal.
pub fn parse_seed(s: &str) -> Result<u64> {
    let s = s.trim();
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|_| Error::Config(format!("bad seed {s:?}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AdversaryConfig {
    Oblivious {
        insert_frac: f64,
    },
    Monochrome,
    /// Updates come from a trace supplied by the caller.
    Trace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    /// `A_k`; `k = 1` is the plain two-palette engine.
    Local,
    /// Dynamic greedy with `Δ + 1` colors.
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n: usize,
    pub delta: u32,
    pub steps: u64,
    pub k: u32,
    pub engine: EngineKind,
    pub eps: f64,
    pub q: Option<u32>,
    pub thr_a: Option<u32>,
    pub thr_f: Option<u32>,
    pub seed: u64,
    pub adversary: AdversaryConfig,
    pub budget: Option<u64>,
    pub log_mode: Option<LogMode>,
    pub checkpoint_every: u64,
    /// Run every check after every update.
    pub full_check: bool,
}

impl RunConfig {
    pub fn new(n: usize, delta: u32, steps: u64) -> Self {
        RunConfig {
            n,
            delta,
            steps,
            k: 1,
            engine: EngineKind::Local,
            eps: 1.0,
            q: None,
            thr_a: None,
            thr_f: None,
            seed: 0,
            adversary: AdversaryConfig::Oblivious { insert_frac: 0.7 },
            budget: None,
            log_mode: None,
            checkpoint_every: DEFAULT_CHECKPOINT,
            full_check: false,
        }
    }

    pub fn palette(&self) -> Result<Palette> {
        match self.q {
            Some(q) => Palette::with_q(q, self.eps),
            None => Palette::for_degree(self.delta, self.eps),
        }
    }

    pub fn thresholds(&self) -> Result<Thresholds> {
        Thresholds::resolve(self.delta, &self.palette()?, self.thr_a, self.thr_f)
    }

    pub fn budget_limit(&self) -> u64 {
        self.budget
            .unwrap_or_else(|| Budget::for_run(self.steps, self.n).max_resamples)
    }
}

/// The engine a run drives.
#[derive(Debug, Clone)]
pub enum Engine {
    Local(Box<ColoringEngine>),
    Hier(Box<Hierarchy>),
    Greedy(GreedyEngine),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineCounters {
    pub resamples: u64,
    pub fixes: u64,
    pub moves: u64,
    pub touched: u64,
    pub overflow: u64,
    pub bits_consumed: u64,
}

impl Engine {
    pub fn build(cfg: &RunConfig) -> Result<Self> {
        match (cfg.engine, cfg.k) {
            (EngineKind::Greedy, _) => {
                Ok(Engine::Greedy(GreedyEngine::baseline(cfg.n, cfg.delta)?))
            }
            (EngineKind::Local, 0) => Err(Error::Config("k must be at least 1".into())),
            (EngineKind::Local, 1) => {
                let palette = cfg.palette()?;
                let thresholds = cfg.thresholds()?;
                Ok(Engine::Local(Box::new(ColoringEngine::new(
                    EngineConfig {
                        n: cfg.n,
                        delta: cfg.delta,
                        palette,
                        thresholds,
                        draws: Draws::Seeded(SeededRng::new(cfg.seed)),
                        budget: Budget::new(cfg.budget_limit()),
                        palette_base: 0,
                        strict: true,
                    },
                )?)))
            }
            (EngineKind::Local, k) => Ok(Engine::Hier(Box::new(Hierarchy::new(
                k,
                cfg.n,
                cfg.delta,
                cfg.seed,
                cfg.budget_limit(),
            )?))),
        }
    }

    pub fn graph(&self) -> &DynamicGraph {
        match self {
            Engine::Local(e) => e.graph(),
            Engine::Hier(h) => h.graph(),
            Engine::Greedy(g) => g.graph(),
        }
    }

    pub fn apply(
        &mut self,
        kind: UpdateKind,
        u: VertexId,
        v: VertexId,
        obs: &mut dyn EngineObserver,
    ) -> Result<u64> {
        match self {
            Engine::Local(e) => Ok(u64::from(e.apply_update(kind, u, v, obs)?.recourse)),
            Engine::Hier(h) => h.apply_update(kind, u, v),
            Engine::Greedy(g) => Ok(u64::from(g.apply_update(kind, u, v)?)),
        }
    }

    pub fn current_color(&self, v: VertexId) -> Color {
        match self {
            Engine::Local(e) => e.current_color(v),
            Engine::Hier(h) => h.current_color(v),
            Engine::Greedy(g) => g.current_color(v),
        }
    }

    pub fn colors(&self) -> Vec<Color> {
        (0..self.graph().n() as VertexId)
            .map(|v| self.current_color(v))
            .collect()
    }

    /// Exclusive upper bound on the colors the engine may use without overflow.
    pub fn palette_end(&self) -> Color {
        match self {
            Engine::Local(e) => e.palette_range().end,
            Engine::Hier(h) => h.params().c,
            Engine::Greedy(g) => g.palette_range().end,
        }
    }

    pub fn counters(&self) -> EngineCounters {
        match self {
            Engine::Local(e) => {
                let s = e.partial().stats();
                EngineCounters {
                    resamples: s.resamples,
                    fixes: s.fixes,
                    moves: 0,
                    touched: s.touched + e.stats().touched,
                    overflow: e.overflow_count(),
                    bits_consumed: e.partial().draws().bits_consumed(),
                }
            }
            Engine::Hier(h) => {
                let t = h.root().totals();
                EngineCounters {
                    resamples: t.resamples,
                    fixes: t.fixes,
                    moves: t.moves,
                    touched: t.touched,
                    overflow: t.overflow,
                    bits_consumed: 0,
                }
            }
            Engine::Greedy(g) => EngineCounters {
                touched: g.stats().touched,
                overflow: g.overflow_count(),
                ..Default::default()
            },
        }
    }

    /// Every check that applies to this engine kind; `deep` adds the
    /// from-scratch counter comparison.
    pub fn check(&self, deep: bool) -> verify::CheckReport {
        let colors = self.colors();
        let report = verify::check_proper_full(self.graph(), &colors);
        match self {
            Engine::Local(e) => report
                .and(|| verify::check_proper_partial(e.graph(), e.partial().coloring().phi_slice()))
                .and(|| {
                    verify::check_constraints(
                        e.graph(),
                        e.partial().coloring(),
                        e.partial().thresholds(),
                    )
                })
                .and(|| {
                    if deep {
                        verify::check_counters(e.graph(), e.partial().coloring())
                    } else {
                        verify::CheckReport::pass()
                    }
                }),
            Engine::Hier(h) => report
                .and(|| {
                    let edges: Vec<Edge> = h.graph().edges().collect();
                    verify::check_degree_invariant(h.root(), &edges)
                })
                .and(|| verify::check_leaf_slices(h))
                .and(|| {
                    let mut r = verify::CheckReport::pass();
                    h.root().for_each_internal(&mut |node| {
                        if r.ok {
                            if let Err(e) = node.check_potential() {
                                r = verify::CheckReport::fail(e.to_string());
                            }
                        }
                    });
                    r
                }),
            Engine::Greedy(_) => report,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowMetrics {
    pub index: u64,
    pub first_step: u64,
    pub updates: u64,
    pub noops: u64,
    pub resamples: u64,
    pub fixes: u64,
    pub fix_invariant_moves: u64,
    pub recourse: u64,
    pub touched: u64,
    pub max_color: Color,
    pub overflow: u64,
    pub checks_passed: bool,
    pub wall_ns_per_update: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TotalMetrics {
    pub config: RunConfig,
    pub updates: u64,
    pub noops: u64,
    pub resamples: u64,
    pub fixes: u64,
    pub fix_invariant_moves: u64,
    pub recourse: u64,
    pub touched: u64,
    pub max_color: Color,
    pub palette_end: Color,
    pub overflow: u64,
    pub budget_status: String,
    pub bits_consumed: u64,
    pub checks: u64,
    pub checks_passed: bool,
    pub first_failure: Option<String>,
    pub edges_final: usize,
    pub ledger: Option<BitLedger>,
    pub wall_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum MetricsRecord {
    Window(WindowMetrics),
    Totals(Box<TotalMetrics>),
}

/// Line-delimited JSON, one record per line.
pub fn metrics_jsonl(records: &[MetricsRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("metrics serialize"));
        out.push('\n');
    }
    out
}

/// Drops every field whose name starts with `wall_` so runs can be compared.
pub fn strip_wall_clock(line: &str) -> Result<serde_json::Value> {
    let mut v: serde_json::Value =
        serde_json::from_str(line).map_err(|e| Error::Parse(e.to_string()))?;
    if let Some(obj) = v.as_object_mut() {
        obj.retain(|k, _| !k.starts_with("wall_"));
    }
    Ok(v)
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub records: Vec<MetricsRecord>,
    pub log: Option<RunLog>,
    /// Steps actually applied (the adversary's choices for adaptive runs).
    pub executed: Trace,
    pub engine: Engine,
}

impl RunOutcome {
    pub fn totals(&self) -> &TotalMetrics {
        match self.records.last() {
            Some(MetricsRecord::Totals(t)) => t,
            _ => unreachable!("a run always ends with a totals record"),
        }
    }

    pub fn windows(&self) -> impl Iterator<Item = &WindowMetrics> {
        self.records.iter().filter_map(|r| match r {
            MetricsRecord::Window(w) => Some(w),
            MetricsRecord::Totals(_) => None,
        })
    }

    pub fn succeeded(&self) -> bool {
        let t = self.totals();
        t.checks_passed && t.budget_status == "ok"
    }
}

enum Source<'a> {
    Fixed(&'a [Step]),
    Adaptive(Box<MonochromeAttacker>),
}

/// Runs `cfg` end to end. `trace` is required for `AdversaryConfig::Trace`.
pub fn run(cfg: &RunConfig, trace: Option<&Trace>) -> Result<RunOutcome> {
    if cfg.checkpoint_every == 0 {
        return Err(Error::Config("checkpoint cadence must be positive".into()));
    }
    let generated;
    let mut source = match (&cfg.adversary, trace) {
        (AdversaryConfig::Trace, Some(t)) => {
            if t.n != cfg.n {
                return Err(Error::Config(format!(
                    "trace has n = {}, config n = {}",
                    t.n, cfg.n
                )));
            }
            Source::Fixed(&t.steps)
        }
        (AdversaryConfig::Trace, None) => {
            return Err(Error::Config("trace adversary needs a trace".into()))
        }
        (AdversaryConfig::Oblivious { insert_frac }, _) => {
            generated = oblivious_bipartite_trace(
                cfg.n,
                cfg.delta,
                cfg.steps as usize,
                *insert_frac,
                cfg.seed,
            )?;
            Source::Fixed(&generated.steps)
        }
        (AdversaryConfig::Monochrome, _) => {
            let attacker = MonochromeAttacker::new(cfg.n, cfg.delta, cfg.seed ^ 0x5eed)?;
            Source::Adaptive(Box::new(attacker))
        }
    };

    let mut engine = Engine::build(cfg)?;
    let mut recorder = match (cfg.log_mode, &engine) {
        (Some(mode), Engine::Local(e)) => Some(LogRecorder::new(LogHeader {
            n: cfg.n,
            delta: cfg.delta,
            q: e.palette().q,
            thresholds: *e.partial().thresholds(),
            mode,
            seed: cfg.seed,
        })),
        (Some(_), _) => {
            return Err(Error::Config("logging is available for k = 1 only".into()));
        }
        (None, _) => None,
    };

    let started = Instant::now();
    let mut records = Vec::new();
    let mut executed = Vec::new();
    let mut window = Window::new(0, 0);
    let mut last = engine.counters();
    let mut checks = 0u64;
    let mut first_failure: Option<String> = None;
    let mut budget_status = "ok".to_string();
    let mut colors = Vec::new();

    let total_steps = match &source {
        Source::Fixed(steps) => steps.len() as u64,
        Source::Adaptive(_) => cfg.steps,
    };
    for step_index in 0..total_steps {
        let step = match &mut source {
            Source::Fixed(steps) => steps[step_index as usize],
            Source::Adaptive(att) => {
                colors.clear();
                colors.extend((0..cfg.n as VertexId).map(|v| engine.current_color(v)));
                att.next_update(&OracleView {
                    graph: engine.graph(),
                    colors: &colors,
                    seed: cfg.seed,
                })
            }
        };
        executed.push(step);
        match step {
            None => window.noops += 1,
            Some(up) => {
                let obs: &mut dyn EngineObserver = match recorder.as_mut() {
                    Some(r) => r,
                    None => &mut NoopObserver,
                };
                match engine.apply(up.kind, up.u, up.v, obs) {
                    Ok(r) => window.recourse += r,
                    Err(Error::BudgetExhausted { limit }) => {
                        budget_status = "exhausted".into();
                        first_failure.get_or_insert(format!(
                            "resample budget of {limit} exhausted at step {step_index}"
                        ));
                        window.updates += 1;
                        break;
                    }
                    Err(e) => return Err(e),
                }
                window.updates += 1;
            }
        }
        let done = step_index + 1;
        let at_checkpoint = done % cfg.checkpoint_every == 0 || done == total_steps;
        if cfg.full_check || at_checkpoint {
            checks += 1;
            let r = engine.check(cfg.full_check);
            if !r.ok {
                window.failed = true;
                first_failure.get_or_insert(format!("step {step_index}: {r}"));
            }
        }
        if at_checkpoint {
            let now = engine.counters();
            records.push(MetricsRecord::Window(window.finish(&engine, &last, &now)));
            last = now;
            window = Window::new(window.index + 1, done);
        }
    }
    if window.updates + window.noops > 0 {
        let now = engine.counters();
        checks += 1;
        let r = engine.check(cfg.full_check);
        if !r.ok {
            window.failed = true;
            first_failure.get_or_insert(format!("final state: {r}"));
        }
        records.push(MetricsRecord::Window(window.finish(&engine, &last, &now)));
    }

    let log = match (recorder, &engine) {
        (Some(rec), Engine::Local(e)) => Some(rec.finish(e.partial().coloring().phi_slice())),
        _ => None,
    };
    let c = engine.counters();
    let windows: Vec<&WindowMetrics> = records
        .iter()
        .filter_map(|r| match r {
            MetricsRecord::Window(w) => Some(w),
            MetricsRecord::Totals(_) => None,
        })
        .collect();
    let totals = TotalMetrics {
        config: cfg.clone(),
        updates: windows.iter().map(|w| w.updates).sum(),
        noops: windows.iter().map(|w| w.noops).sum(),
        resamples: windows.iter().map(|w| w.resamples).sum(),
        fixes: windows.iter().map(|w| w.fixes).sum(),
        fix_invariant_moves: windows.iter().map(|w| w.fix_invariant_moves).sum(),
        recourse: windows.iter().map(|w| w.recourse).sum(),
        touched: windows.iter().map(|w| w.touched).sum(),
        max_color: windows.iter().map(|w| w.max_color).max().unwrap_or(0),
        palette_end: engine.palette_end(),
        overflow: c.overflow,
        budget_status,
        bits_consumed: c.bits_consumed,
        checks,
        checks_passed: first_failure.is_none(),
        first_failure,
        edges_final: engine.graph().edge_count(),
        ledger: log.as_ref().map(BitLedger::from_log),
        wall_secs: started.elapsed().as_secs_f64(),
    };
    records.push(MetricsRecord::Totals(Box::new(totals)));
    Ok(RunOutcome {
        records,
        log,
        executed: Trace {
            n: cfg.n,
            delta: cfg.delta,
            steps: executed,
        },
        engine,
    })
}

struct Window {
    index: u64,
    first_step: u64,
    updates: u64,
    noops: u64,
    recourse: u64,
    failed: bool,
    started: Instant,
}

impl Window {
    fn new(index: u64, first_step: u64) -> Self {
        Window {
            index,
            first_step,
            updates: 0,
            noops: 0,
            recourse: 0,
            failed: false,
            started: Instant::now(),
        }
    }

    fn finish(
        &self,
        engine: &Engine,
        before: &EngineCounters,
        now: &EngineCounters,
    ) -> WindowMetrics {
        let max_color = (0..engine.graph().n() as VertexId)
            .map(|v| engine.current_color(v))
            .max()
            .unwrap_or(0);
        WindowMetrics {
            index: self.index,
            first_step: self.first_step,
            updates: self.updates,
            noops: self.noops,
            resamples: now.resamples - before.resamples,
            fixes: now.fixes - before.fixes,
            fix_invariant_moves: now.moves - before.moves,
            recourse: self.recourse,
            touched: now.touched - before.touched,
            max_color,
            overflow: now.overflow,
            checks_passed: !self.failed,
            wall_ns_per_update: self.started.elapsed().as_nanos() as f64
                / (self.updates.max(1)) as f64,
        }
    }
}

/// Graph plus coloring, as written by `run --snapshot` and read by `verify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub n: usize,
    pub delta: u32,
    pub edges: Vec<(VertexId, VertexId)>,
    pub colors: Vec<Color>,
    /// Partial coloring, present for `k = 1` runs.
    pub phi: Option<Vec<Option<Color>>>,
    pub q: Option<u32>,
}

impl Snapshot {
    pub fn of(engine: &Engine) -> Self {
        let g = engine.graph();
        let (phi, q) = match engine {
            Engine::Local(e) => (
                Some(e.partial().coloring().phi_slice().to_vec()),
                Some(e.palette().q),
            ),
            _ => (None, None),
        };
        Snapshot {
            n: g.n(),
            delta: g.delta_cap(),
            edges: g.edges().map(|e| (e.u, e.v)).collect(),
            colors: engine.colors(),
            phi,
            q,
        }
    }

    /// Rebuilds the graph and checks the coloring with the oracles.
    pub fn verify(&self) -> verify::CheckReport {
        if self.colors.len() != self.n {
            return verify::CheckReport::fail("color list length differs from n");
        }
        let mut g = match DynamicGraph::new(self.n, self.delta) {
            Ok(g) => g,
            Err(e) => return verify::CheckReport::fail(e.to_string()),
        };
        for &(u, v) in &self.edges {
            if let Err(e) = g.insert_edge(u, v) {
                return verify::CheckReport::fail(format!("snapshot graph invalid: {e}"));
            }
        }
        let report = verify::check_proper_full(&g, &self.colors);
        match (&self.phi, self.q) {
            (Some(phi), Some(q)) => report
                .and(|| {
                    if phi.len() != self.n {
                        return verify::CheckReport::fail("phi length differs from n");
                    }
                    for (v, (c, col)) in phi.iter().zip(&self.colors).enumerate() {
                        match c {
                            Some(c) if *c >= q || c != col => {
                                return verify::CheckReport::fail(format!(
                                    "vertex {v}: phi {c} disagrees with visible color {col}"
                                ))
                            }
                            None if *col < q => {
                                return verify::CheckReport::fail(format!(
                                    "free vertex {v} shows C1 color {col}"
                                ))
                            }
                            _ => {}
                        }
                    }
                    verify::CheckReport::pass()
                })
                .and(|| verify::check_proper_partial(&g, phi)),
            _ => report,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub label: String,
    pub updates: u64,
    pub amortized_touched: f64,
    pub amortized_recourse: f64,
    pub resamples: u64,
    pub moves: u64,
    pub max_color: Color,
    pub palette_end: Color,
    pub overflow: u64,
    pub ok: bool,
    pub wall_secs: f64,
}

pub fn bench_label(cfg: &RunConfig) -> String {
    match cfg.engine {
        EngineKind::Greedy => format!("greedy n={} delta={}", cfg.n, cfg.delta),
        EngineKind::Local => format!("A_{} n={} delta={}", cfg.k, cfg.n, cfg.delta),
    }
}

/// Runs each configuration on up to `jobs` threads and tabulates per-update
/// costs in input order.
pub fn bench(configs: &[RunConfig], jobs: usize) -> Result<Vec<BenchRow>> {
    let jobs = jobs.clamp(1, configs.len().max(1));
    let chunk = configs.len().div_ceil(jobs).max(1);
    let parts: Vec<Result<Vec<BenchRow>>> = std::thread::scope(|s| {
        let handles: Vec<_> = configs
            .chunks(chunk)
            .map(|part| s.spawn(move || part.iter().map(bench_one).collect::<Result<Vec<_>>>()))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("bench worker panicked"))
            .collect()
    });
    let mut rows = Vec::with_capacity(configs.len());
    for p in parts {
        rows.extend(p?);
    }
    Ok(rows)
}

fn bench_one(cfg: &RunConfig) -> Result<BenchRow> {
    let out = run(cfg, None)?;
    let t = out.totals();
    let per = |x: u64| x as f64 / t.updates.max(1) as f64;
    Ok(BenchRow {
        label: bench_label(cfg),
        updates: t.updates,
        amortized_touched: per(t.touched),
        amortized_recourse: per(t.recourse),
        resamples: t.resamples,
        moves: t.fix_invariant_moves,
        max_color: t.max_color,
        palette_end: t.palette_end,
        overflow: t.overflow,
        ok: out.succeeded(),
        wall_secs: t.wall_secs,
    })
}

pub fn format_bench_table(rows: &[BenchRow]) -> String {
    let mut out = format!(
        "{:<28} {:>9} {:>12} {:>10} {:>10} {:>8} {:>10} {:>9} {:>4} {:>8}\n",
        "engine",
        "updates",
        "touched/up",
        "recourse",
        "resamples",
        "moves",
        "max color",
        "palette",
        "ok",
        "secs"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<28} {:>9} {:>12.2} {:>10.3} {:>10} {:>8} {:>10} {:>9} {:>4} {:>8.3}\n",
            r.label,
            r.updates,
            r.amortized_touched,
            r.amortized_recourse,
            r.resamples,
            r.moves,
            r.max_color,
            r.palette_end,
            if r.ok { "yes" } else { "no" },
            r.wall_secs
        ));
    }
    out
}
