//! Analytic bit accounting: random bits consumed versus bits needed to
//! describe the run through its log.

use serde::{Deserialize, Serialize};

use crate::entropy::records::{LogRecord, RunLog};
use crate::events::LocalAddr;
use crate::palette::ceil_tol;

/// `ceil(log2 x)` for `x >= 1`.
pub fn ceil_log2(x: u64) -> u64 {
    if x <= 1 {
        0
    } else {
        u64::from(64 - (x - 1).leading_zeros())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResampleEntry {
    /// `log2 W_i` with `W_i = prod (a(z) + 1)`.
    pub log2_w: f64,
    /// `Δ ceil(log2 Δ) - ceil(log2 W_i)`, floored at zero.
    pub pad: u64,
    pub bad_count: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BitLedger {
    pub n: usize,
    pub delta: u32,
    pub updates: u64,
    /// `S`: number of resamples.
    pub resamples: u64,
    pub entries: Vec<ResampleEntry>,
    /// `S Δ ceil(log2 Δ)`.
    pub r_total: u64,
    /// `sum log2 W_i`: the idealized count of random bits.
    pub r_ideal: f64,
    pub l_total: u64,
    pub l_updates: u64,
    pub l_fixes: u64,
    pub l_outcomes: u64,
    pub l_final: u64,
    /// `g(n, T) = T log2 n + n`.
    pub g: f64,
    /// `h(n, T) = T + n`.
    pub h: u64,
}

impl BitLedger {
    /// Recomputes every total from the record stream.
    pub fn from_log(log: &RunLog) -> Self {
        let n = log.header.n;
        let delta = log.header.delta;
        let lg_n = ceil_log2(n as u64);
        let lg_delta = ceil_log2(u64::from(delta));
        let slot = u64::from(delta) * lg_delta;
        let mut ledger = BitLedger {
            n,
            delta,
            updates: 0,
            resamples: 0,
            entries: Vec::new(),
            r_total: 0,
            r_ideal: 0.0,
            l_total: 0,
            l_updates: 0,
            l_fixes: 0,
            l_outcomes: 0,
            l_final: 0,
            g: 0.0,
            h: 0,
        };
        let recs = &log.records;
        for (i, rec) in recs.iter().enumerate() {
            match rec {
                LogRecord::Update { .. } => {
                    ledger.updates += 1;
                    // Op bit, two endpoints, blank bit.
                    ledger.l_updates += 1 + 2 * lg_n + 1;
                }
                LogRecord::EarlyTerm { .. } => ledger.l_updates += 1,
                LogRecord::FixBegin { addr, .. } => {
                    let hops = match addr {
                        LocalAddr::Base | LocalAddr::Partner => 0,
                        LocalAddr::Hop1(_) => 1,
                        LocalAddr::Hop2(..) => 2,
                    };
                    ledger.l_fixes += 2 + hops * lg_delta + 2;
                }
                LogRecord::FixEnd => ledger.l_fixes += 1,
                LogRecord::Resample { radices, .. } => {
                    let log2_w: f64 = radices.iter().map(|&r| f64::from(r).log2()).sum();
                    let ceil_w = ceil_tol(log2_w).max(0.0) as u64;
                    let pad = slot.saturating_sub(ceil_w);
                    let bad_count = match recs.get(i + 1) {
                        Some(LogRecord::BadIndex { bad_count, .. }) => Some(*bad_count),
                        _ => None,
                    };
                    ledger.l_outcomes += match bad_count {
                        Some(b) => ceil_log2(b) + pad,
                        None => ceil_w + pad,
                    };
                    ledger.resamples += 1;
                    ledger.r_total += slot;
                    ledger.r_ideal += log2_w;
                    ledger.entries.push(ResampleEntry {
                        log2_w,
                        pad,
                        bad_count,
                    });
                }
                LogRecord::BadIndex { .. } | LogRecord::RawChoice { .. } => {}
                LogRecord::FinalColoring { .. } => ledger.l_final = n as u64 * lg_delta,
            }
        }
        ledger.l_total = ledger.l_updates + ledger.l_fixes + ledger.l_outcomes + ledger.l_final;
        let t = ledger.updates;
        ledger.g = t as f64 * (n as f64).log2() + n as f64;
        ledger.h = t + n as u64;
        ledger
    }

    /// `L_total < R_total`: reported, never asserted.
    pub fn compresses(&self) -> bool {
        self.l_total < self.r_total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::records::{LogHeader, LogMode};
    use crate::graph::UpdateKind;
    use crate::palette::Thresholds;
    use crate::partial::Violation;

    fn header(n: usize, delta: u32) -> LogHeader {
        LogHeader {
            n,
            delta,
            q: 3,
            thresholds: Thresholds { thr_a: 1, thr_f: 2 },
            mode: LogMode::Toy,
            seed: 0,
        }
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!([1, 2, 3, 4, 5, 8, 9].map(ceil_log2), [0, 1, 2, 2, 3, 3, 4]);
    }

    #[test]
    fn zero_resamples_zero_r() {
        let log = RunLog {
            header: header(8, 3),
            records: vec![
                LogRecord::Update {
                    kind: UpdateKind::Insert,
                    u: 0,
                    v: 4,
                    blanked: false,
                },
                LogRecord::EarlyTerm { terminated: true },
                LogRecord::FinalColoring { phi: vec![None; 8] },
            ],
        };
        let l = BitLedger::from_log(&log);
        assert_eq!(l.r_total, 0);
        assert_eq!(l.resamples, 0);
        assert_eq!(l.l_updates, 1 + 6 + 1 + 1);
        assert_eq!(l.l_final, 16);
        assert_eq!(l.h, 9);
    }

    #[test]
    fn r_total_is_slot_times_s() {
        let resample = |radices: Vec<u32>| LogRecord::Resample {
            vertex: 0,
            neighbors: (1..=radices.len() as u32).collect(),
            radices,
        };
        let log = RunLog {
            header: header(8, 3),
            records: vec![
                LogRecord::Update {
                    kind: UpdateKind::Insert,
                    u: 0,
                    v: 4,
                    blanked: false,
                },
                LogRecord::EarlyTerm { terminated: false },
                LogRecord::FixBegin {
                    addr: LocalAddr::Base,
                    violation: Violation::HighFree,
                },
                resample(vec![4, 4, 4]),
                LogRecord::BadIndex {
                    ell: 0,
                    bad_count: 5,
                    all_count: 64,
                },
                resample(vec![2, 3]),
                LogRecord::BadIndex {
                    ell: 1,
                    bad_count: 2,
                    all_count: 6,
                },
                LogRecord::FixEnd,
                LogRecord::FinalColoring { phi: vec![None; 8] },
            ],
        };
        let l = BitLedger::from_log(&log);
        assert_eq!(l.resamples, 2);
        assert_eq!(l.r_total, 2 * 3 * 2);
        assert_eq!(l.entries[0].pad, 0);
        assert_eq!(l.entries[1].pad, 6 - 3);
        // Outcome bits: 3 with no pad, then 1 plus a pad of 3.
        assert_eq!(l.l_outcomes, 3 + (1 + 3));
        assert_eq!(l.l_fixes, 4 + 1);
        assert!((l.r_ideal - (6.0 + 6f64.log2())).abs() < 1e-9);
    }
}
