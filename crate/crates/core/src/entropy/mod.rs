//! Log of the local search, recovery of its random draws, and bit accounting.

pub mod codec;
pub mod enumerate;
pub mod ledger;
pub mod records;
pub mod recover;

pub use codec::{decode, encode, read_log, write_log};
pub use enumerate::{BadSet, Enumeration, DEFAULT_ENUMERATION_CAP};
pub use ledger::BitLedger;
pub use records::{check_grammar, LogHeader, LogMode, LogRecord, LogRecorder, RunLog};
pub use recover::{record_run, recover, replay};
