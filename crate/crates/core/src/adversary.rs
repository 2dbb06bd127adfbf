//! Update sequences over bipartite (hence triangle-free) candidate sets:
//! pre-committed oblivious traces and an adaptive attacker that reads the
//! current coloring.

use std::io::{BufRead, Write};

use indexmap::IndexSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DynamicGraph, Edge, UpdateKind, VertexId};
use crate::palette::Color;

const REJECTION_ATTEMPTS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Update {
    pub kind: UpdateKind,
    pub u: VertexId,
    pub v: VertexId,
}

impl Update {
    pub fn insert(u: VertexId, v: VertexId) -> Self {
        Update {
            kind: UpdateKind::Insert,
            u,
            v,
        }
    }

    pub fn delete(u: VertexId, v: VertexId) -> Self {
        Update {
            kind: UpdateKind::Delete,
            u,
            v,
        }
    }
}

/// One trace step; `None` is a no-op marker.
pub type Step = Option<Update>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub n: usize,
    pub delta: u32,
    pub steps: Vec<Step>,
}

impl Trace {
    pub fn noop_count(&self) -> usize {
        self.steps.iter().filter(|s| s.is_none()).count()
    }

    pub fn write_to(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "n={} delta={}", self.n, self.delta)?;
        for step in &self.steps {
            match step {
                Some(Update {
                    kind: UpdateKind::Insert,
                    u,
                    v,
                }) => writeln!(out, "+ {u} {v}")?,
                Some(Update {
                    kind: UpdateKind::Delete,
                    u,
                    v,
                }) => writeln!(out, "- {u} {v}")?,
                None => writeln!(out, ". ")?,
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("trace text is ASCII")
    }

    pub fn read_from(input: impl BufRead) -> Result<Self> {
        let mut lines = input.lines().enumerate();
        let header = loop {
            match lines.next() {
                Some((_, line)) => {
                    let line = line.map_err(|e| Error::Parse(e.to_string()))?;
                    if !line.trim().is_empty() {
                        break line;
                    }
                }
                None => return Err(Error::Parse("missing trace header".into())),
            }
        };
        let (n, delta) = parse_header(&header)?;
        let mut steps = Vec::new();
        for (no, line) in lines {
            let line = line.map_err(|e| Error::Parse(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let op = parts.next().unwrap_or_default();
            let step = match op {
                "." => None,
                "+" | "-" => {
                    let mut vertex = || -> Result<VertexId> {
                        parts
                            .next()
                            .and_then(|s| s.parse().ok())
                            .ok_or_else(|| Error::Parse(format!("line {}: bad vertex", no + 1)))
                    };
                    let (u, v) = (vertex()?, vertex()?);
                    if op == "+" {
                        Some(Update::insert(u, v))
                    } else {
                        Some(Update::delete(u, v))
                    }
                }
                other => {
                    return Err(Error::Parse(format!(
                        "line {}: unknown op {other:?}",
                        no + 1
                    )))
                }
            };
            if parts.next().is_some() {
                return Err(Error::Parse(format!("line {}: trailing tokens", no + 1)));
            }
            steps.push(step);
        }
        Ok(Trace { n, delta, steps })
    }
}

fn parse_header(line: &str) -> Result<(usize, u32)> {
    let mut n = None;
    let mut delta = None;
    for field in line.split_whitespace() {
        match field.split_once('=') {
            Some(("n", x)) => n = x.parse().ok(),
            Some(("delta", x)) => delta = x.parse().ok(),
            _ => return Err(Error::Parse(format!("bad header field {field:?}"))),
        }
    }
    match (n, delta) {
        (Some(n), Some(d)) => Ok((n, d)),
        _ => Err(Error::Parse(format!("bad trace header {line:?}"))),
    }
}

/// Vertices `[0, n/2)` form the left side, the rest the right side.
fn side_split(n: usize) -> VertexId {
    (n / 2) as VertexId
}

/// Present edges plus degrees of a bipartite shadow graph, supporting uniform
/// sampling of present edges and of legal absent ones.
#[derive(Debug, Clone)]
struct BipartiteShadow {
    n: usize,
    delta: u32,
    edges: IndexSet<Edge>,
    degree: Vec<u32>,
}

impl BipartiteShadow {
    fn new(n: usize, delta: u32) -> Self {
        BipartiteShadow {
            n,
            delta,
            edges: IndexSet::new(),
            degree: vec![0; n],
        }
    }

    fn legal_insert(&self, a: VertexId, b: VertexId) -> bool {
        self.degree[a as usize] < self.delta
            && self.degree[b as usize] < self.delta
            && !self.edges.contains(&Edge::new(a, b))
    }

    fn apply(&mut self, up: &Update) {
        let e = Edge::new(up.u, up.v);
        match up.kind {
            UpdateKind::Insert => {
                self.edges.insert(e);
                self.degree[e.u as usize] += 1;
                self.degree[e.v as usize] += 1;
            }
            UpdateKind::Delete => {
                self.edges.swap_remove(&e);
                self.degree[e.u as usize] -= 1;
                self.degree[e.v as usize] -= 1;
            }
        }
    }

    fn random_present(&self, rng: &mut ChaCha8Rng) -> Option<Update> {
        if self.edges.is_empty() {
            return None;
        }
        let e = self.edges[rng.random_range(0..self.edges.len())];
        Some(Update::delete(e.u, e.v))
    }

    /// Uniform legal absent cross edge: rejection first, exhaustive fallback.
    fn random_absent(&self, rng: &mut ChaCha8Rng) -> Option<Update> {
        let mid = side_split(self.n);
        let right = self.n as VertexId - mid;
        if mid == 0 || right == 0 {
            return None;
        }
        for _ in 0..REJECTION_ATTEMPTS {
            let a = rng.random_range(0..mid);
            let b = mid + rng.random_range(0..right);
            if self.legal_insert(a, b) {
                return Some(Update::insert(a, b));
            }
        }
        let legal: Vec<(VertexId, VertexId)> = (0..mid)
            .filter(|&a| self.degree[a as usize] < self.delta)
            .flat_map(|a| (mid..self.n as VertexId).map(move |b| (a, b)))
            .filter(|&(a, b)| self.legal_insert(a, b))
            .collect();
        if legal.is_empty() {
            return None;
        }
        let (a, b) = legal[rng.random_range(0..legal.len())];
        Some(Update::insert(a, b))
    }
}

/// Oblivious trace over the complete bipartite candidate set, fully
/// determined by the arguments.
pub fn oblivious_bipartite_trace(
    n: usize,
    delta: u32,
    steps: usize,
    insert_frac: f64,
    seed: u64,
) -> Result<Trace> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::Config(format!(
            "bipartite traces need even n >= 2, got {n}"
        )));
    }
    if !(insert_frac > 0.0 && insert_frac <= 1.0) {
        return Err(Error::Config(format!(
            "insert_frac {insert_frac} outside (0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shadow = BipartiteShadow::new(n, delta);
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let step = if rng.random_bool(insert_frac) {
            shadow
                .random_absent(&mut rng)
                .or_else(|| shadow.random_present(&mut rng))
        } else {
            shadow
                .random_present(&mut rng)
                .or_else(|| shadow.random_absent(&mut rng))
        };
        if let Some(up) = &step {
            shadow.apply(up);
        }
        out.push(step);
    }
    Ok(Trace {
        n,
        delta,
        steps: out,
    })
}

/// What an adaptive oracle may read between updates.
pub struct OracleView<'a> {
    pub graph: &'a DynamicGraph,
    /// Visible color of every vertex.
    pub colors: &'a [Color],
    pub seed: u64,
}

/// Inserts edges between equally colored vertices on opposite sides.
#[derive(Debug, Clone)]
pub struct MonochromeAttacker {
    rng: ChaCha8Rng,
    shadow: BipartiteShadow,
}

impl MonochromeAttacker {
    pub fn new(n: usize, delta: u32, seed: u64) -> Result<Self> {
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "bipartite attacker needs even n >= 2, got {n}"
            )));
        }
        Ok(MonochromeAttacker {
            rng: ChaCha8Rng::seed_from_u64(seed),
            shadow: BipartiteShadow::new(n, delta),
        })
    }

    fn legal_mono(&self, colors: &[Color], a: VertexId, b: VertexId) -> bool {
        colors[a as usize] == colors[b as usize] && self.shadow.legal_insert(a, b)
    }

    /// Chooses the next update; the caller must apply it before asking again.
    pub fn next_update(&mut self, view: &OracleView<'_>) -> Step {
        let n = self.shadow.n;
        let mid = side_split(n);
        let right = n as VertexId - mid;
        let mut choice = None;
        for _ in 0..REJECTION_ATTEMPTS {
            let a = self.rng.random_range(0..mid);
            let b = mid + self.rng.random_range(0..right);
            if self.legal_mono(view.colors, a, b) {
                choice = Some(Update::insert(a, b));
                break;
            }
        }
        if choice.is_none() {
            let mut by_color: Vec<(Color, VertexId)> = (0..n as VertexId)
                .map(|v| (view.colors[v as usize], v))
                .collect();
            by_color.sort_unstable();
            let mut pairs = Vec::new();
            for bucket in by_color.chunk_by(|x, y| x.0 == y.0) {
                let split = bucket.partition_point(|&(_, v)| v < mid);
                let (left, right) = bucket.split_at(split);
                for &(_, a) in left {
                    for &(_, b) in right {
                        if self.shadow.legal_insert(a, b) {
                            pairs.push((a, b));
                        }
                    }
                }
            }
            if !pairs.is_empty() {
                let (a, b) = pairs[self.rng.random_range(0..pairs.len())];
                choice = Some(Update::insert(a, b));
            }
        }
        let choice = choice.or_else(|| self.shadow.random_present(&mut self.rng));
        if let Some(up) = &choice {
            debug_assert!(up.kind == UpdateKind::Delete || !view.graph.has_edge(up.u, up.v));
            self.shadow.apply(up);
        }
        choice
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceReport {
    pub steps: usize,
    pub noops: usize,
    /// `(step index, description)` of the first offending update.
    pub first_violation: Option<(usize, String)>,
}

impl TraceReport {
    pub fn is_clean(&self) -> bool {
        self.first_violation.is_none()
    }
}

/// Replays `trace` on a strict shadow graph.
pub fn validate_trace(trace: &Trace, n: usize, delta: u32) -> TraceReport {
    let mut report = TraceReport {
        steps: trace.steps.len(),
        noops: 0,
        first_violation: None,
    };
    let mut g = match DynamicGraph::new(n, delta) {
        Ok(g) => g,
        Err(e) => {
            report.first_violation = Some((0, e.to_string()));
            return report;
        }
    };
    for (i, step) in trace.steps.iter().enumerate() {
        match step {
            None => report.noops += 1,
            Some(up) => {
                if let Err(e) = g.apply(up.kind, up.u, up.v) {
                    report.first_violation = Some((i, e.to_string()));
                    return report;
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_insertion_crosses_sides() {
        let t = oblivious_bipartite_trace(10, 3, 1, 1.0, 5).unwrap();
        let up = t.steps[0].unwrap();
        assert_eq!(up.kind, UpdateKind::Insert);
        assert!(up.u < 5 && up.v >= 5);
    }

    #[test]
    fn generated_traces_validate_and_reproduce() {
        for seed in 0..5 {
            let t = oblivious_bipartite_trace(20, 3, 2000, 0.7, seed).unwrap();
            let r = validate_trace(&t, 20, 3);
            assert!(r.is_clean(), "{r:?}");
            assert_eq!(
                t,
                oblivious_bipartite_trace(20, 3, 2000, 0.7, seed).unwrap()
            );
        }
    }

    #[test]
    fn saturated_candidates_emit_noops_or_deletes() {
        // n = 2: a single candidate edge.
        let t = oblivious_bipartite_trace(2, 1, 4, 1.0, 0).unwrap();
        assert_eq!(t.steps[0], Some(Update::insert(0, 1)));
        assert_eq!(t.steps[1], Some(Update::delete(0, 1)));
        assert!(validate_trace(&t, 2, 1).is_clean());
    }

    #[test]
    fn validation_catches_violations() {
        let empty = Trace {
            n: 4,
            delta: 2,
            steps: vec![],
        };
        assert!(validate_trace(&empty, 4, 2).is_clean());
        let dup = Trace {
            n: 4,
            delta: 2,
            steps: vec![Some(Update::insert(0, 1)), Some(Update::insert(0, 1))],
        };
        assert_eq!(validate_trace(&dup, 4, 2).first_violation.unwrap().0, 1);
        let tri = Trace {
            n: 4,
            delta: 2,
            steps: vec![
                Some(Update::insert(0, 1)),
                Some(Update::insert(1, 2)),
                None,
                Some(Update::insert(0, 2)),
            ],
        };
        let r = validate_trace(&tri, 4, 2);
        assert_eq!(r.first_violation.unwrap().0, 3);
        assert_eq!(r.noops, 1);
    }

    #[test]
    fn text_roundtrip() {
        let t = Trace {
            n: 6,
            delta: 2,
            steps: vec![Some(Update::insert(0, 3)), None, Some(Update::delete(0, 3))],
        };
        let text = t.to_text();
        assert_eq!(text, "n=6 delta=2\n+ 0 3\n. \n- 0 3\n");
        assert_eq!(Trace::read_from(text.as_bytes()).unwrap(), t);
        assert!(Trace::read_from("n=6\n".as_bytes()).is_err());
        assert!(Trace::read_from("n=6 delta=2\n* 1 2\n".as_bytes()).is_err());
        assert!(Trace::read_from("n=6 delta=2\n+ 1\n".as_bytes()).is_err());
    }

    #[test]
    fn attacker_targets_equal_colors() {
        let g = DynamicGraph::new(4, 2).unwrap();
        let mut att = MonochromeAttacker::new(4, 2, 1).unwrap();
        // Sides {0,1} and {2,3}; only 1 and 3 share a color.
        let colors = [0, 5, 1, 5];
        let up = att.next_update(&OracleView {
            graph: &g,
            colors: &colors,
            seed: 0,
        });
        assert_eq!(up, Some(Update::insert(1, 3)));
    }

    #[test]
    fn attacker_falls_through_without_pairs() {
        let g = DynamicGraph::new(4, 2).unwrap();
        let mut att = MonochromeAttacker::new(4, 2, 1).unwrap();
        let colors = [0, 1, 2, 3];
        let up = att.next_update(&OracleView {
            graph: &g,
            colors: &colors,
            seed: 0,
        });
        assert_eq!(up, None);
    }
}
