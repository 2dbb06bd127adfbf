//! Log records and the observer that emits them.

use serde::{Deserialize, Serialize};

use crate::entropy::enumerate::{Enumeration, DEFAULT_ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::events::{EngineObserver, LocalAddr, ResampleView};
use crate::graph::{UpdateKind, VertexId};
use crate::palette::{Color, Thresholds};
use crate::partial::Violation;
use crate::rng::Draw;

/// Which record carries the outcome of each resample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LogMode {
    /// Index into the canonical enumeration of `Bad` (needs enumeration).
    Toy,
    /// The literal draws.
    Production,
    /// Both records, for cross-checking recovery.
    Both,
}

impl LogMode {
    pub fn bad_index(self) -> bool {
        matches!(self, LogMode::Toy | LogMode::Both)
    }

    pub fn raw_choice(self) -> bool {
        matches!(self, LogMode::Production | LogMode::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum LogRecord {
    Update {
        kind: UpdateKind,
        u: VertexId,
        v: VertexId,
        /// Whether step 2 set `φ(u) = ⊥`.
        blanked: bool,
    },
    EarlyTerm {
        terminated: bool,
    },
    FixBegin {
        addr: LocalAddr,
        violation: Violation,
    },
    /// Context for the following outcome record: the resampled vertex, its
    /// neighbors and their radices `a(z) + 1`. Not counted by the ledger.
    Resample {
        vertex: VertexId,
        neighbors: Vec<VertexId>,
        radices: Vec<u32>,
    },
    BadIndex {
        ell: u64,
        bad_count: u64,
        all_count: u64,
    },
    RawChoice {
        draws: Vec<u32>,
    },
    FixEnd,
    FinalColoring {
        phi: Vec<Option<Color>>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogHeader {
    pub n: usize,
    pub delta: u32,
    pub q: u32,
    pub thresholds: Thresholds,
    pub mode: LogMode,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunLog {
    pub header: LogHeader,
    pub records: Vec<LogRecord>,
}

impl RunLog {
    pub fn final_coloring(&self) -> Option<&[Option<Color>]> {
        match self.records.last() {
            Some(LogRecord::FinalColoring { phi }) => Some(phi),
            _ => None,
        }
    }

    pub fn resample_count(&self) -> usize {
        self.records
            .iter()
            .filter(|r| matches!(r, LogRecord::Resample { .. }))
            .count()
    }
}

/// Observer that turns engine events into log records.
#[derive(Debug, Clone)]
pub struct LogRecorder {
    header: LogHeader,
    cap: u64,
    records: Vec<LogRecord>,
    pending: Vec<u32>,
    /// Every draw of the run in order, kept for comparison with recovery.
    shadow: Vec<Draw>,
}

impl LogRecorder {
    pub fn new(header: LogHeader) -> Self {
        LogRecorder {
            header,
            cap: DEFAULT_ENUMERATION_CAP,
            records: Vec::new(),
            pending: Vec::new(),
            shadow: Vec::new(),
        }
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.cap = cap;
        self
    }

    pub fn header(&self) -> &LogHeader {
        &self.header
    }

    pub fn records(&self) -> &[LogRecord] {
        &self.records
    }

    pub fn shadow_draws(&self) -> &[Draw] {
        &self.shadow
    }

    pub fn finish(mut self, phi: &[Option<Color>]) -> RunLog {
        self.records
            .push(LogRecord::FinalColoring { phi: phi.to_vec() });
        RunLog {
            header: self.header,
            records: self.records,
        }
    }
}

impl EngineObserver for LogRecorder {
    fn update(&mut self, kind: UpdateKind, u: VertexId, v: VertexId, blanked: bool) -> Result<()> {
        self.records.push(LogRecord::Update {
            kind,
            u,
            v,
            blanked,
        });
        Ok(())
    }

    fn early_termination(&mut self, terminated: bool) -> Result<()> {
        self.records.push(LogRecord::EarlyTerm { terminated });
        Ok(())
    }

    fn fix_begin(
        &mut self,
        _vertex: VertexId,
        addr: LocalAddr,
        violation: Violation,
    ) -> Result<()> {
        self.records.push(LogRecord::FixBegin { addr, violation });
        Ok(())
    }

    fn resample_begin(&mut self, view: &ResampleView<'_>) -> Result<()> {
        let radices = view.radices();
        self.records.push(LogRecord::Resample {
            vertex: view.vertex,
            neighbors: view.neighbors.to_vec(),
            radices,
        });
        if self.header.mode.bad_index() {
            let en = Enumeration::new(view.q(), view.avail_lists());
            let bad = en.enumerate_bad(&view.thresholds, self.cap)?;
            let current = view.current();
            let index = en.index_of(&current).ok_or_else(|| {
                Error::InconsistentLog(format!(
                    "assignment around {} is not in its own enumeration",
                    view.vertex
                ))
            })?;
            let ell = bad.position(index).ok_or_else(|| {
                Error::InconsistentLog(format!(
                    "resample at {} triggered by an assignment outside Bad",
                    view.vertex
                ))
            })?;
            self.records.push(LogRecord::BadIndex {
                ell,
                bad_count: bad.bad.len() as u64,
                all_count: bad.all_count,
            });
        }
        self.pending.clear();
        Ok(())
    }

    fn draw(&mut self, draw: Draw) -> Result<()> {
        self.pending.push(draw.value);
        self.shadow.push(draw);
        Ok(())
    }

    fn resample_end(&mut self, _vertex: VertexId, _availability: u32) -> Result<()> {
        if self.header.mode.raw_choice() {
            self.records.push(LogRecord::RawChoice {
                draws: std::mem::take(&mut self.pending),
            });
        }
        Ok(())
    }

    fn fix_end(&mut self, _vertex: VertexId) -> Result<()> {
        self.records.push(LogRecord::FixEnd);
        Ok(())
    }
}

/// Checks the record grammar:
/// `(Update EarlyTerm Fix*)* FinalColoring` with
/// `Fix = FixBegin (Resample BadIndex? RawChoice? | Fix)* FixEnd`.
pub fn check_grammar(log: &RunLog) -> Result<()> {
    let recs = &log.records;
    let bad = |i: usize, what: &str| Error::InconsistentLog(format!("record {i}: {what}"));
    let mode = log.header.mode;
    let mut i = 0;
    let mut depth = 0usize;
    let mut in_update = false;
    while i < recs.len() {
        match &recs[i] {
            LogRecord::Update { .. } => {
                if depth != 0 {
                    return Err(bad(i, "update inside an open fix"));
                }
                if !matches!(recs.get(i + 1), Some(LogRecord::EarlyTerm { .. })) {
                    return Err(bad(i, "update without early-termination flag"));
                }
                if let Some(LogRecord::EarlyTerm { terminated: false }) = recs.get(i + 1) {
                    if !matches!(recs.get(i + 2), Some(LogRecord::FixBegin { .. })) {
                        return Err(bad(i + 1, "non-terminating update without a fix"));
                    }
                }
                in_update = true;
                i += 2;
            }
            LogRecord::EarlyTerm { .. } => return Err(bad(i, "stray early-termination flag")),
            LogRecord::FixBegin { violation, .. } => {
                if !in_update {
                    return Err(bad(i, "fix outside an update"));
                }
                if !violation.is_violated() {
                    return Err(bad(i, "fix of a satisfied vertex"));
                }
                depth += 1;
                i += 1;
            }
            LogRecord::FixEnd => {
                if depth == 0 {
                    return Err(bad(i, "unbalanced fix end"));
                }
                depth -= 1;
                i += 1;
            }
            LogRecord::Resample {
                neighbors, radices, ..
            } => {
                if depth == 0 {
                    return Err(bad(i, "resample outside a fix"));
                }
                if neighbors.len() != radices.len() {
                    return Err(bad(i, "radix count differs from neighbor count"));
                }
                i += 1;
                if mode.bad_index() {
                    match recs.get(i) {
                        Some(LogRecord::BadIndex {
                            ell,
                            bad_count,
                            all_count,
                        }) => {
                            if ell >= bad_count || bad_count > all_count {
                                return Err(bad(i, "bad index out of range"));
                            }
                            i += 1;
                        }
                        _ => return Err(bad(i, "missing bad index")),
                    }
                }
                if mode.raw_choice() {
                    match recs.get(i) {
                        Some(LogRecord::RawChoice { draws }) => {
                            if draws.len() != radices.len()
                                || draws.iter().zip(radices).any(|(d, r)| d >= r)
                            {
                                return Err(bad(i, "raw choice does not match radices"));
                            }
                            i += 1;
                        }
                        _ => return Err(bad(i, "missing raw choice")),
                    }
                }
            }
            LogRecord::BadIndex { .. } | LogRecord::RawChoice { .. } => {
                return Err(bad(i, "outcome record without resample context"))
            }
            LogRecord::FinalColoring { phi } => {
                if depth != 0 || i + 1 != recs.len() {
                    return Err(bad(i, "final coloring is not the last record"));
                }
                if phi.len() != log.header.n {
                    return Err(bad(i, "final coloring has the wrong length"));
                }
                return Ok(());
            }
        }
    }
    Err(Error::InconsistentLog("missing final coloring".into()))
}
