//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines always print; exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use trifree_core::adversary::oblivious_bipartite_trace;
use trifree_core::entropy::{
    record_run, recover, replay, Enumeration, LogHeader, LogMode, DEFAULT_ENUMERATION_CAP,
};
use trifree_core::events::{EngineObserver, ResampleView};
use trifree_core::harness::{
    self, metrics_jsonl, strip_wall_clock, AdversaryConfig, Engine, RunConfig, RunOutcome,
};
use trifree_core::palette::Thresholds;
use trifree_core::verify::{estimate_post_resample_avail, AvailConfig};
use trifree_core::{Draws, Result, SeededRng};

const N: usize = 2000;
const DELTA: u32 = 64;
const Q: u32 = 31;
const THR_A: u32 = 2;
const THR_F: u32 = 24;
const T_LONG: u64 = 100_000;
const T_FULL: u64 = 10_000;
const SEED: u64 = 7;

/// Monochrome-attacker resamples at seed 1, measured once and frozen.
const MONOCHROME_S_T_SEED1: u64 = 0;
const S_T_TOLERANCE: f64 = 1.25;

const TOY_RUNS: u64 = 1000;
const AVAIL_TRIALS: usize = 10_000;
const AVAIL_FRACTION: f64 = 0.9;
const HIER_DELTA: u32 = 4096;

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        ok,
        detail: detail.into(),
    }
}

fn base_config(steps: u64) -> RunConfig {
    let mut cfg = RunConfig::new(N, DELTA, steps);
    cfg.eps = 1.0;
    cfg.thr_a = Some(THR_A);
    cfg.thr_f = Some(THR_F);
    cfg.seed = SEED;
    cfg
}

fn stripped(out: &RunOutcome) -> Vec<serde_json::Value> {
    metrics_jsonl(&out.records)
        .lines()
        .map(|l| strip_wall_clock(l).unwrap())
        .collect()
}

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed <= Duration::from_secs(limit_secs)
}

fn criterion_1(long: &RunOutcome, long_time: Duration, full: &RunOutcome) -> Verdict {
    let t = long.totals();
    let f = full.totals();
    let q = match &long.engine {
        Engine::Local(e) => e.palette().q,
        _ => 0,
    };
    let ok = q == Q
        && t.checks_passed
        && t.checks >= T_LONG / 1024
        && t.overflow == 0
        && t.budget_status == "ok"
        && f.checks_passed
        && f.checks == T_FULL
        && f.overflow == 0
        && f.budget_status == "ok"
        && within(long_time, 60);
    verdict(
        ok,
        format!(
            "q={q}, {} checkpoints ok={}, {} per-update checks ok={}, overflow {}+{}, budget {}/{}, S_T={}, {:.2}s",
            t.checks, t.checks_passed, f.checks, f.checks_passed, t.overflow, f.overflow,
            t.budget_status, f.budget_status, t.resamples, long_time.as_secs_f64()
        ),
    )
}

fn criterion_2() -> Verdict {
    let ceiling = (S_T_TOLERANCE * MONOCHROME_S_T_SEED1 as f64).ceil() as u64;
    let runs: Vec<Result<RunOutcome>> = std::thread::scope(|s| {
        let hs: Vec<_> = (1..=10u64)
            .map(|seed| {
                s.spawn(move || {
                    let mut cfg = base_config(T_LONG);
                    cfg.seed = seed;
                    cfg.adversary = AdversaryConfig::Monochrome;
                    harness::run(&cfg, None)
                })
            })
            .collect();
        hs.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut ok = true;
    let mut s_t = Vec::new();
    for r in runs {
        match r {
            Ok(out) => {
                let t = out.totals();
                ok &= t.checks_passed && t.budget_status == "ok" && t.resamples <= ceiling;
                s_t.push(t.resamples);
            }
            Err(e) => {
                ok = false;
                s_t.push(u64::MAX);
                eprintln!("monochrome run failed: {e}");
            }
        }
    }
    verdict(
        ok,
        format!("S_T over seeds 1-10 = {s_t:?}, ceiling {ceiling}"),
    )
}

fn criterion_3(full: &RunOutcome) -> Verdict {
    // The full-check run evaluates check_constraints after every update.
    let f = full.totals();
    verdict(
        f.checks_passed && f.checks == T_FULL,
        format!(
            "{} updates checked, first failure {:?}",
            f.checks, f.first_failure
        ),
    )
}

fn criterion_4() -> Verdict {
    let started = Instant::now();
    let mut cfg = RunConfig::new(64, 8, T_FULL);
    cfg.seed = SEED;
    cfg.full_check = true;
    match harness::run(&cfg, None) {
        Ok(out) => {
            let t = out.totals();
            let el = started.elapsed();
            verdict(
                t.checks_passed && t.checks == T_FULL && within(el, 30),
                format!(
                    "{} per-step counter comparisons, S_T={}, first failure {:?}, {:.2}s",
                    t.checks,
                    t.resamples,
                    t.first_failure,
                    el.as_secs_f64()
                ),
            )
        }
        Err(e) => verdict(false, e.to_string()),
    }
}

fn toy_header(seed: u64) -> LogHeader {
    LogHeader {
        n: 8,
        delta: 3,
        q: 3,
        thresholds: Thresholds { thr_a: 1, thr_f: 2 },
        mode: LogMode::Toy,
        seed,
    }
}

fn criterion_5() -> Verdict {
    let started = Instant::now();
    let mut exact = 0;
    let mut resamples = 0;
    let mut failures = Vec::new();
    for seed in 0..TOY_RUNS {
        let mut attempt = || -> Result<bool> {
            let trace = oblivious_bipartite_trace(8, 3, 50, 0.7, seed)?;
            let (log, truth) = record_run(
                toy_header(seed),
                &trace,
                Draws::Seeded(SeededRng::new(seed)),
            )?;
            let recovered = recover(&log, &trace)?;
            resamples += log.resample_count();
            if recovered != truth {
                return Ok(false);
            }
            let again = replay(&log, &trace, recovered)?;
            Ok(again.final_coloring() == log.final_coloring())
        };
        match attempt() {
            Ok(true) => exact += 1,
            Ok(false) => failures.push(seed),
            Err(e) => {
                failures.push(seed);
                eprintln!("toy seed {seed}: {e}");
            }
        }
    }
    let el = started.elapsed();
    verdict(
        exact == TOY_RUNS && within(el, 60),
        format!(
            "{exact}/{TOY_RUNS} exact ({resamples} resamples), failing seeds {:?}, {:.2}s",
            &failures[..failures.len().min(5)],
            el.as_secs_f64()
        ),
    )
}

#[derive(Default)]
struct CollectEnumerations {
    seen: Vec<Enumeration>,
}

impl EngineObserver for CollectEnumerations {
    fn resample_begin(&mut self, view: &ResampleView<'_>) -> Result<()> {
        self.seen
            .push(Enumeration::new(view.q(), view.avail_lists()));
        Ok(())
    }
}

fn criterion_6() -> Verdict {
    let mut enums = CollectEnumerations::default();
    for seed in 0..TOY_RUNS {
        let mut cfg = RunConfig::new(8, 3, 50);
        cfg.q = Some(3);
        cfg.thr_a = Some(1);
        cfg.thr_f = Some(2);
        cfg.seed = seed;
        let mut engine = Engine::build(&cfg).unwrap();
        let trace = oblivious_bipartite_trace(8, 3, 50, 0.7, seed).unwrap();
        for up in trace.steps.iter().flatten() {
            engine.apply(up.kind, up.u, up.v, &mut enums).unwrap();
        }
    }
    let t = Thresholds { thr_a: 1, thr_f: 2 };
    let (mut checked, mut indices, mut skipped) = (0u64, 0u64, 0u64);
    let mut ok = true;
    for e in &enums.seen {
        let all = e.all_count();
        if all > 1 << 16 {
            skipped += 1;
            continue;
        }
        checked += 1;
        let bad = e.enumerate_bad(&t, DEFAULT_ENUMERATION_CAP).unwrap();
        let mut expected_bad = Vec::new();
        for i in 0..all as u64 {
            let a = e.assignment_at(i);
            ok &= e.index_of(&a) == Some(i);
            if e.is_bad(&a, &t) {
                expected_bad.push(i);
            }
            indices += 1;
        }
        ok &= bad.bad == expected_bad && bad.all_count == all as u64;
        for (pos, &i) in bad.bad.iter().enumerate() {
            ok &= bad.position(i) == Some(pos as u64);
        }
    }
    verdict(
        ok && checked > 0,
        format!("{checked} enumerations, {indices} indices round-tripped, {skipped} above 2^16"),
    )
}

fn criterion_7() -> Verdict {
    let started = Instant::now();
    let est = estimate_post_resample_avail(&AvailConfig {
        n: N,
        delta: DELTA,
        q: Q,
        thresholds: Thresholds {
            thr_a: THR_A,
            thr_f: THR_F,
        },
        trials: AVAIL_TRIALS,
        seed: SEED,
    });
    let el = started.elapsed();
    match est {
        Ok(e) => {
            let bound = f64::from(Q) * (-(f64::from(DELTA)) / f64::from(Q)).exp();
            verdict(
                e.mean >= AVAIL_FRACTION * bound
                    && (e.bound - bound).abs() < 1e-9
                    && within(el, 60),
                format!(
                    "mean a(u) = {:.3} (stderr {:.3}) vs 0.9 x {:.3} over {} trials, {:.2}s",
                    e.mean,
                    e.stderr,
                    bound,
                    e.trials,
                    el.as_secs_f64()
                ),
            )
        }
        Err(err) => verdict(false, err.to_string()),
    }
}

fn hier_config(k: u32) -> RunConfig {
    let mut cfg = RunConfig::new(N, HIER_DELTA, T_LONG);
    cfg.k = k;
    cfg.seed = SEED;
    cfg
}

fn criteria_8_9(runs: &[(u32, Result<RunOutcome>)], elapsed: Duration) -> (Verdict, Verdict) {
    let (mut ok8, mut ok9) = (within(elapsed, 300), true);
    let mut d8 = Vec::new();
    let mut d9 = Vec::new();
    for (k, r) in runs {
        let out = match r {
            Ok(o) => o,
            Err(e) => {
                ok8 = false;
                ok9 = false;
                d8.push(format!("k={k}: {e}"));
                continue;
            }
        };
        let t = out.totals();
        let Engine::Hier(h) = &out.engine else {
            unreachable!()
        };
        let (mut moves, mut budget_ok) = (0u64, true);
        h.root().for_each_internal(&mut |node| {
            let s = node.stats();
            moves += s.moves;
            let injected = s.phi_injected;
            budget_ok &=
                s.moves * node.params().min_drop() <= injected && node.check_potential().is_ok();
        });
        ok8 &= budget_ok && t.checks_passed && t.budget_status == "ok";
        d8.push(format!(
            "k={k}: {moves} moves, {} checkpoints ok={}",
            t.checks, t.checks_passed
        ));
        let c_k = h.params().c;
        let slices = trifree_core::verify::check_leaf_slices(h);
        ok9 &= slices.ok && t.max_color < c_k && t.overflow == 0;
        d9.push(format!(
            "k={k}: max color {} < c_k {c_k}, slices {}",
            t.max_color, slices
        ));
    }
    d8.push(format!("{:.2}s", elapsed.as_secs_f64()));
    (verdict(ok8, d8.join("; ")), verdict(ok9, d9.join("; ")))
}

fn main() -> ExitCode {
    let mut lines: Vec<(u32, &str, Verdict)> = Vec::new();

    let started = Instant::now();
    let long = harness::run(&base_config(T_LONG), None).expect("criterion 1 run");
    let long_time = started.elapsed();
    let mut full_cfg = base_config(T_FULL);
    full_cfg.full_check = true;
    let full = harness::run(&full_cfg, None).expect("criterion 1 full-check run");
    lines.push((
        1,
        "properness, oblivious",
        criterion_1(&long, long_time, &full),
    ));
    lines.push((2, "properness, monochrome attacker", criterion_2()));
    lines.push((3, "constraint restoration", criterion_3(&full)));
    lines.push((4, "counter oracle equivalence", criterion_4()));
    lines.push((5, "entropy recovery", criterion_5()));
    lines.push((6, "enumeration bijection", criterion_6()));
    lines.push((7, "expected availability", criterion_7()));

    let started = Instant::now();
    let hier: Vec<(u32, Result<RunOutcome>)> = [2, 3]
        .into_iter()
        .map(|k| (k, harness::run(&hier_config(k), None)))
        .collect();
    let (v8, v9) = criteria_8_9(&hier, started.elapsed());
    lines.push((8, "hierarchy potential accounting", v8));
    lines.push((9, "hierarchy palette discipline", v9));

    let long_again = harness::run(&base_config(T_LONG), None).expect("criterion 10 rerun");
    let mut same = stripped(&long) == stripped(&long_again);
    for (k, first) in &hier {
        let again = harness::run(&hier_config(*k), None);
        same &= match (first, again) {
            (Ok(a), Ok(b)) => stripped(a) == stripped(&b),
            _ => false,
        };
    }
    lines.push((
        10,
        "determinism",
        verdict(same, "criteria 1 and 8 reruns compared record by record"),
    ));

    let mut all = true;
    for (n, name, v) in &lines {
        all &= v.ok;
        println!(
            "criterion {n:>2} {}: {name}: {}",
            if v.ok { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
