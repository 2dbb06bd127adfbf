//! Reconstructs every random draw of a run from its toy-mode log, the update
//! trace and the final coloring, walking the resamples backward.

use crate::adversary::Trace;
use crate::entropy::enumerate::{Enumeration, DEFAULT_ENUMERATION_CAP};
use crate::entropy::records::{LogHeader, LogRecord, LogRecorder, RunLog};
use crate::error::{Error, Result};
use crate::events::LocalAddr;
use crate::graph::{DynamicGraph, UpdateKind, VertexId};
use crate::palette::{Color, Palette};
use crate::partial::{Budget, PartialColorer};
use crate::rng::{Draw, Draws, ScriptedDraws};

fn inconsistent(msg: impl Into<String>) -> Error {
    Error::InconsistentLog(msg.into())
}

struct UpdateEntry {
    kind: UpdateKind,
    u: VertexId,
    v: VertexId,
    blanked: bool,
    /// `(resampled vertex, bad index)` in forward order.
    resamples: Vec<(VertexId, u64)>,
}

fn resolve(
    graph: &DynamicGraph,
    addr: LocalAddr,
    base: VertexId,
    partner: Option<VertexId>,
) -> Result<VertexId> {
    let nth = |x: VertexId, i: u32| {
        graph
            .neighbors(x)
            .get(i as usize)
            .copied()
            .ok_or_else(|| inconsistent(format!("vertex {x} has no neighbor #{i}")))
    };
    match addr {
        LocalAddr::Base => Ok(base),
        LocalAddr::Partner => partner.ok_or_else(|| inconsistent("partner address inside a fix")),
        LocalAddr::Hop1(i) => nth(base, i),
        LocalAddr::Hop2(i, j) => nth(nth(base, i)?, j),
    }
}

/// Forward pass: replays the graph and resolves which vertex every resample
/// acted on.
fn parse(log: &RunLog, trace: &Trace, graph: &mut DynamicGraph) -> Result<Vec<UpdateEntry>> {
    let recs = &log.records;
    let mut i = 0;
    let mut entries = Vec::new();
    for step in trace.steps.iter().flatten() {
        let Some(&LogRecord::Update {
            kind,
            u,
            v,
            blanked,
        }) = recs.get(i)
        else {
            return Err(inconsistent(format!("record {i}: expected an update")));
        };
        if (kind, u, v) != (step.kind, step.u, step.v) {
            return Err(inconsistent(format!(
                "record {i}: update differs from the trace"
            )));
        }
        graph.apply(kind, u, v)?;
        i += 1;
        let Some(&LogRecord::EarlyTerm { .. }) = recs.get(i) else {
            return Err(inconsistent(format!(
                "record {i}: expected early-termination flag"
            )));
        };
        i += 1;
        let mut entry = UpdateEntry {
            kind,
            u,
            v,
            blanked,
            resamples: Vec::new(),
        };
        let mut open: Vec<VertexId> = Vec::new();
        loop {
            match recs.get(i) {
                Some(LogRecord::FixBegin { addr, .. }) => {
                    let w = match open.last() {
                        Some(&base) => resolve(graph, *addr, base, None)?,
                        None => resolve(graph, *addr, u, Some(v))?,
                    };
                    open.push(w);
                }
                Some(LogRecord::FixEnd) => {
                    open.pop()
                        .ok_or_else(|| inconsistent(format!("record {i}: stray fix end")))?;
                }
                Some(LogRecord::Resample {
                    vertex, neighbors, ..
                }) => {
                    if open.last() != Some(vertex) {
                        return Err(inconsistent(format!(
                            "record {i}: resample of {vertex} outside its fix"
                        )));
                    }
                    if graph.neighbors(*vertex) != neighbors.as_slice() {
                        return Err(inconsistent(format!(
                            "record {i}: neighbor list of {vertex} differs from the replayed graph"
                        )));
                    }
                    let Some(LogRecord::BadIndex { ell, .. }) = recs.get(i + 1) else {
                        return Err(inconsistent(format!(
                            "record {}: expected a bad index",
                            i + 1
                        )));
                    };
                    entry.resamples.push((*vertex, *ell));
                    i += 1;
                }
                Some(LogRecord::BadIndex { .. }) => {
                    return Err(inconsistent(format!(
                        "record {i}: bad index without context"
                    )))
                }
                Some(LogRecord::RawChoice { .. }) => {}
                _ => break,
            }
            i += 1;
        }
        if !open.is_empty() {
            return Err(inconsistent("fix left open at the end of an update"));
        }
        entries.push(entry);
    }
    match recs.get(i) {
        Some(LogRecord::FinalColoring { .. }) if i + 1 == recs.len() => Ok(entries),
        _ => Err(inconsistent(format!(
            "record {i}: expected the final coloring"
        ))),
    }
}

fn avail_from(graph: &DynamicGraph, phi: &[Option<Color>], q: u32, z: VertexId) -> Vec<Color> {
    let mut used = vec![false; q as usize];
    for &w in graph.neighbors(z) {
        if let Some(c) = phi[w as usize] {
            used[c as usize] = true;
        }
    }
    (0..q).filter(|&c| !used[c as usize]).collect()
}

/// Recovers the run's `uniform_index` outcomes, in order.
pub fn recover(log: &RunLog, trace: &Trace) -> Result<Vec<Draw>> {
    let h = &log.header;
    if !h.mode.bad_index() {
        return Err(inconsistent("recovery needs a log with bad-index records"));
    }
    let mut graph = DynamicGraph::new(h.n, h.delta)?.with_strict(false);
    let entries = parse(log, trace, &mut graph)?;
    let mut phi = log
        .final_coloring()
        .ok_or_else(|| inconsistent("missing final coloring"))?
        .to_vec();
    if phi.iter().flatten().any(|&c| c >= h.q) {
        return Err(inconsistent("final coloring uses a color outside C1"));
    }

    let mut groups: Vec<Vec<Draw>> = Vec::new();
    for entry in entries.iter().rev() {
        for &(vertex, ell) in entry.resamples.iter().rev() {
            let nbrs = graph.neighbors(vertex).to_vec();
            let avail: Vec<Vec<Color>> = nbrs
                .iter()
                .map(|&z| avail_from(&graph, &phi, h.q, z))
                .collect();
            let mut draws = Vec::with_capacity(nbrs.len());
            for (&z, a) in nbrs.iter().zip(&avail) {
                let value = match phi[z as usize] {
                    None => a.len(),
                    Some(c) => a.binary_search(&c).map_err(|_| {
                        inconsistent(format!("color {c} of {z} was not available when drawn"))
                    })?,
                };
                draws.push(Draw {
                    modulus: a.len() as u32 + 1,
                    value: value as u32,
                });
            }
            let en = Enumeration::new(h.q, avail);
            let bad = en.enumerate_bad(&h.thresholds, DEFAULT_ENUMERATION_CAP)?;
            let index = *bad.bad.get(ell as usize).ok_or_else(|| {
                inconsistent(format!("bad index {ell} beyond |Bad| = {}", bad.bad.len()))
            })?;
            for (&z, c) in nbrs.iter().zip(en.assignment_at(index)) {
                phi[z as usize] = c;
            }
            groups.push(draws);
        }
        if entry.blanked {
            if phi[entry.u as usize].is_some() || phi[entry.v as usize].is_none() {
                return Err(inconsistent(format!(
                    "blanking of {} cannot be undone",
                    entry.u
                )));
            }
            phi[entry.u as usize] = phi[entry.v as usize];
        }
        let undo = match entry.kind {
            UpdateKind::Insert => UpdateKind::Delete,
            UpdateKind::Delete => UpdateKind::Insert,
        };
        graph.apply(undo, entry.u, entry.v)?;
    }
    if phi.iter().any(Option::is_some) {
        return Err(inconsistent(
            "backward pass did not reach the all-free start",
        ));
    }
    Ok(groups.into_iter().rev().flatten().collect())
}

/// Runs the partial-coloring engine over `trace` with a recorder attached and
/// returns the log plus the true draw sequence.
pub fn record_run(header: LogHeader, trace: &Trace, draws: Draws) -> Result<(RunLog, Vec<Draw>)> {
    let palette = Palette::with_q(header.q, 1.0)?;
    let mut graph = DynamicGraph::new(header.n, header.delta)?;
    let budget = Budget::for_run(trace.steps.len() as u64, header.n);
    let mut engine = PartialColorer::new(header.n, palette, header.thresholds, draws, budget);
    let mut rec = LogRecorder::new(header);
    for step in trace.steps.iter().flatten() {
        graph.apply(step.kind, step.u, step.v)?;
        engine.handle_update(&graph, step.kind, step.u, step.v, &mut rec)?;
    }
    let shadow = rec.shadow_draws().to_vec();
    Ok((rec.finish(engine.coloring().phi_slice()), shadow))
}

/// Re-runs the engine with `draws` injected and checks it reproduces `log`.
pub fn replay(log: &RunLog, trace: &Trace, draws: Vec<Draw>) -> Result<RunLog> {
    let script = ScriptedDraws::new(draws);
    let (replayed, used) = record_run(log.header.clone(), trace, Draws::Scripted(script))?;
    if replayed != *log {
        let at = replayed
            .records
            .iter()
            .zip(&log.records)
            .position(|(a, b)| a != b)
            .unwrap_or(replayed.records.len().min(log.records.len()));
        return Err(Error::ReplayMismatch(format!(
            "logs diverge at record {at}"
        )));
    }
    debug_assert_eq!(
        used.len(),
        log.records
            .iter()
            .map(|r| match r {
                LogRecord::Resample { neighbors, .. } => neighbors.len(),
                _ => 0,
            })
            .sum::<usize>()
    );
    Ok(replayed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{oblivious_bipartite_trace, Update};
    use crate::entropy::records::{check_grammar, LogMode};
    use crate::palette::Thresholds;
    use crate::rng::SeededRng;

    fn toy_header(mode: LogMode, seed: u64) -> LogHeader {
        LogHeader {
            n: 8,
            delta: 3,
            q: 3,
            thresholds: Thresholds { thr_a: 1, thr_f: 2 },
            mode,
            seed,
        }
    }

    #[test]
    fn no_resamples_recovers_nothing() {
        let trace = Trace {
            n: 8,
            delta: 3,
            steps: vec![Some(Update::insert(0, 4))],
        };
        let (log, draws) = record_run(
            toy_header(LogMode::Toy, 1),
            &trace,
            Draws::Seeded(SeededRng::new(1)),
        )
        .unwrap();
        assert_eq!(
            &log.records[..2],
            &[
                LogRecord::Update {
                    kind: UpdateKind::Insert,
                    u: 0,
                    v: 4,
                    blanked: false
                },
                LogRecord::EarlyTerm { terminated: true },
            ]
        );
        assert!(draws.is_empty());
        assert!(recover(&log, &trace).unwrap().is_empty());
    }

    #[test]
    fn star_fixture_single_resample() {
        // Center 0 with leaves 4, 5, 6 all free: f(0) = 3 > thr_f = 2.
        let trace = Trace {
            n: 8,
            delta: 3,
            steps: vec![
                Some(Update::insert(0, 4)),
                Some(Update::insert(0, 5)),
                Some(Update::insert(0, 6)),
            ],
        };
        let (log, truth) = record_run(
            toy_header(LogMode::Both, 3),
            &trace,
            Draws::Seeded(SeededRng::new(3)),
        )
        .unwrap();
        check_grammar(&log).unwrap();
        assert!(log.resample_count() >= 1);
        let fix_begins = log
            .records
            .iter()
            .filter(|r| matches!(r, LogRecord::FixBegin { .. }))
            .count();
        assert!(fix_begins >= 1);
        for r in &log.records {
            if let LogRecord::BadIndex { ell, bad_count, .. } = r {
                assert!(ell < bad_count);
            }
        }
        let recovered = recover(&log, &trace).unwrap();
        assert_eq!(recovered, truth);
        replay(&log, &trace, recovered).unwrap();
    }

    #[test]
    fn random_toy_runs_recover_exactly() {
        for seed in 0..200 {
            let trace = oblivious_bipartite_trace(8, 3, 50, 0.7, seed).unwrap();
            let (log, truth) = record_run(
                toy_header(LogMode::Both, seed),
                &trace,
                Draws::Seeded(SeededRng::new(seed)),
            )
            .unwrap();
            check_grammar(&log).unwrap();
            let recovered = recover(&log, &trace).unwrap();
            assert_eq!(recovered, truth, "seed {seed}");
            replay(&log, &trace, recovered).unwrap();
        }
    }

    #[test]
    fn production_log_cannot_be_recovered() {
        let trace = Trace {
            n: 8,
            delta: 3,
            steps: vec![],
        };
        let (log, _) = record_run(
            toy_header(LogMode::Production, 0),
            &trace,
            Draws::Seeded(SeededRng::new(0)),
        )
        .unwrap();
        assert!(matches!(
            recover(&log, &trace),
            Err(Error::InconsistentLog(_))
        ));
    }

    #[test]
    fn tampered_index_is_detected() {
        let trace = oblivious_bipartite_trace(8, 3, 50, 0.7, 9).unwrap();
        let (mut log, truth) = record_run(
            toy_header(LogMode::Toy, 9),
            &trace,
            Draws::Seeded(SeededRng::new(9)),
        )
        .unwrap();
        let pos = log
            .records
            .iter()
            .position(|r| matches!(r, LogRecord::BadIndex { bad_count, .. } if *bad_count > 1))
            .expect("fixture has a resample with |Bad| > 1");
        if let LogRecord::BadIndex { ell, bad_count, .. } = &mut log.records[pos] {
            *ell = (*ell + 1) % *bad_count;
        }
        match recover(&log, &trace) {
            Err(_) => {}
            Ok(draws) => assert_ne!(draws, truth),
        }
    }
}
