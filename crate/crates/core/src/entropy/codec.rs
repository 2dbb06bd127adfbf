//! Byte-aligned log file: magic, header, tagged records with LEB128 fields,
//! then the ledger as length-prefixed JSON.

use std::io::{Read, Write};

use crate::entropy::ledger::BitLedger;
use crate::entropy::records::{LogHeader, LogMode, LogRecord, RunLog};
use crate::error::{Error, Result};
use crate::events::LocalAddr;
use crate::graph::UpdateKind;
use crate::palette::Thresholds;
use crate::partial::Violation;

pub const MAGIC: &[u8; 7] = b"TFCLOG1";

const TAG_END: u8 = 0x00;
const TAG_UPDATE: u8 = 0x01;
const TAG_EARLY_TERM: u8 = 0x02;
const TAG_FIX_BEGIN: u8 = 0x03;
const TAG_RESAMPLE: u8 = 0x04;
const TAG_BAD_INDEX: u8 = 0x05;
const TAG_RAW_CHOICE: u8 = 0x06;
const TAG_FIX_END: u8 = 0x07;
const TAG_FINAL: u8 = 0x08;

fn io(e: std::io::Error) -> Error {
    Error::Parse(e.to_string())
}

fn put(out: &mut Vec<u8>, x: u64) {
    leb128::write::unsigned(out, x).expect("writing to a Vec cannot fail");
}

fn put_u32s(out: &mut Vec<u8>, xs: impl ExactSizeIterator<Item = u32>) {
    put(out, xs.len() as u64);
    for x in xs {
        put(out, u64::from(x));
    }
}

fn violation_byte(v: Violation) -> u8 {
    match v {
        Violation::None => 0,
        Violation::LowAvail => 1,
        Violation::HighFree => 2,
        Violation::Both => 3,
    }
}

fn mode_byte(m: LogMode) -> u8 {
    match m {
        LogMode::Toy => 0,
        LogMode::Production => 1,
        LogMode::Both => 2,
    }
}

/// Serializes the log and its ledger.
pub fn encode(log: &RunLog) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    let h = &log.header;
    put(&mut out, h.n as u64);
    put(&mut out, u64::from(h.delta));
    put(&mut out, u64::from(h.q));
    put(&mut out, u64::from(h.thresholds.thr_a));
    put(&mut out, u64::from(h.thresholds.thr_f));
    out.push(mode_byte(h.mode));
    out.extend_from_slice(&h.seed.to_le_bytes());
    for rec in &log.records {
        match rec {
            LogRecord::Update {
                kind,
                u,
                v,
                blanked,
            } => {
                out.push(TAG_UPDATE);
                out.push(u8::from(*kind == UpdateKind::Delete) | (u8::from(*blanked) << 1));
                put(&mut out, u64::from(*u));
                put(&mut out, u64::from(*v));
            }
            LogRecord::EarlyTerm { terminated } => {
                out.push(TAG_EARLY_TERM);
                out.push(u8::from(*terminated));
            }
            LogRecord::FixBegin { addr, violation } => {
                out.push(TAG_FIX_BEGIN);
                match addr {
                    LocalAddr::Base => out.push(0),
                    LocalAddr::Partner => out.push(1),
                    LocalAddr::Hop1(i) => {
                        out.push(2);
                        put(&mut out, u64::from(*i));
                    }
                    LocalAddr::Hop2(i, j) => {
                        out.push(3);
                        put(&mut out, u64::from(*i));
                        put(&mut out, u64::from(*j));
                    }
                }
                out.push(violation_byte(*violation));
            }
            LogRecord::Resample {
                vertex,
                neighbors,
                radices,
            } => {
                out.push(TAG_RESAMPLE);
                put(&mut out, u64::from(*vertex));
                put_u32s(&mut out, neighbors.iter().copied());
                put_u32s(&mut out, radices.iter().copied());
            }
            LogRecord::BadIndex {
                ell,
                bad_count,
                all_count,
            } => {
                out.push(TAG_BAD_INDEX);
                put(&mut out, *ell);
                put(&mut out, *bad_count);
                put(&mut out, *all_count);
            }
            LogRecord::RawChoice { draws } => {
                out.push(TAG_RAW_CHOICE);
                put_u32s(&mut out, draws.iter().copied());
            }
            LogRecord::FixEnd => out.push(TAG_FIX_END),
            LogRecord::FinalColoring { phi } => {
                out.push(TAG_FINAL);
                put(&mut out, phi.len() as u64);
                for c in phi {
                    put(&mut out, c.map_or(0, |c| u64::from(c) + 1));
                }
            }
        }
    }
    out.push(TAG_END);
    let ledger = serde_json::to_vec(&BitLedger::from_log(log)).expect("ledger serializes");
    put(&mut out, ledger.len() as u64);
    out.extend_from_slice(&ledger);
    out
}

pub fn write_log(log: &RunLog, mut w: impl Write) -> Result<()> {
    w.write_all(&encode(log)).map_err(io)
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl Reader<'_> {
    fn byte(&mut self) -> Result<u8> {
        let mut b = [0u8];
        self.buf.read_exact(&mut b).map_err(io)?;
        Ok(b[0])
    }

    fn uvar(&mut self) -> Result<u64> {
        leb128::read::unsigned(&mut self.buf).map_err(|e| Error::Parse(e.to_string()))
    }

    fn u32(&mut self) -> Result<u32> {
        let x = self.uvar()?;
        u32::try_from(x).map_err(|_| Error::Parse(format!("field {x} overflows u32")))
    }

    fn u32s(&mut self) -> Result<Vec<u32>> {
        let len = self.uvar()? as usize;
        if len > self.buf.len() {
            return Err(Error::Parse("list length beyond end of input".into()));
        }
        (0..len).map(|_| self.u32()).collect()
    }
}

/// Parses a log file, returning the log and the ledger block it carries.
pub fn decode(bytes: &[u8]) -> Result<(RunLog, BitLedger)> {
    let rest = bytes
        .strip_prefix(MAGIC.as_slice())
        .ok_or_else(|| Error::Parse("bad log magic".into()))?;
    let mut r = Reader { buf: rest };
    let n = r.uvar()? as usize;
    let delta = r.u32()?;
    let q = r.u32()?;
    let thresholds = Thresholds {
        thr_a: r.u32()?,
        thr_f: r.u32()?,
    };
    let mode = match r.byte()? {
        0 => LogMode::Toy,
        1 => LogMode::Production,
        2 => LogMode::Both,
        m => return Err(Error::Parse(format!("unknown log mode {m}"))),
    };
    let mut seed = [0u8; 8];
    r.buf.read_exact(&mut seed).map_err(io)?;
    let header = LogHeader {
        n,
        delta,
        q,
        thresholds,
        mode,
        seed: u64::from_le_bytes(seed),
    };
    let mut records = Vec::new();
    loop {
        let rec = match r.byte()? {
            TAG_END => break,
            TAG_UPDATE => {
                let flags = r.byte()?;
                if flags > 3 {
                    return Err(Error::Parse(format!("bad update flags {flags}")));
                }
                let kind = if flags & 1 == 1 {
                    UpdateKind::Delete
                } else {
                    UpdateKind::Insert
                };
                LogRecord::Update {
                    kind,
                    u: r.u32()?,
                    v: r.u32()?,
                    blanked: flags & 2 != 0,
                }
            }
            TAG_EARLY_TERM => LogRecord::EarlyTerm {
                terminated: r.byte()? != 0,
            },
            TAG_FIX_BEGIN => {
                let addr = match r.byte()? {
                    0 => LocalAddr::Base,
                    1 => LocalAddr::Partner,
                    2 => LocalAddr::Hop1(r.u32()?),
                    3 => LocalAddr::Hop2(r.u32()?, r.u32()?),
                    a => return Err(Error::Parse(format!("bad address tag {a}"))),
                };
                let violation = match r.byte()? {
                    0 => Violation::None,
                    1 => Violation::LowAvail,
                    2 => Violation::HighFree,
                    3 => Violation::Both,
                    v => return Err(Error::Parse(format!("bad violation {v}"))),
                };
                LogRecord::FixBegin { addr, violation }
            }
            TAG_RESAMPLE => LogRecord::Resample {
                vertex: r.u32()?,
                neighbors: r.u32s()?,
                radices: r.u32s()?,
            },
            TAG_BAD_INDEX => LogRecord::BadIndex {
                ell: r.uvar()?,
                bad_count: r.uvar()?,
                all_count: r.uvar()?,
            },
            TAG_RAW_CHOICE => LogRecord::RawChoice { draws: r.u32s()? },
            TAG_FIX_END => LogRecord::FixEnd,
            TAG_FINAL => {
                let raw = r.u32s()?;
                LogRecord::FinalColoring {
                    phi: raw.into_iter().map(|c| c.checked_sub(1)).collect(),
                }
            }
            t => return Err(Error::Parse(format!("unknown record tag {t:#04x}"))),
        };
        records.push(rec);
    }
    let len = r.uvar()? as usize;
    if r.buf.len() != len {
        return Err(Error::Parse("ledger block length mismatch".into()));
    }
    let ledger: BitLedger =
        serde_json::from_slice(r.buf).map_err(|e| Error::Parse(e.to_string()))?;
    Ok((RunLog { header, records }, ledger))
}

pub fn read_log(mut input: impl Read) -> Result<(RunLog, BitLedger)> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes).map_err(io)?;
    decode(&bytes)
}
