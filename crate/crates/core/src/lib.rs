//! Core co-location tracing primitives: a hash-chain pseudonym generator,
//! report entries that let anyone regenerate the reported window of
//! pseudonyms, and local exposure matching against heard broadcasts.
//!
//! Everything in this crate is a pure function over explicit state values.
//! There is no clock, no I/O and no global state; callers pass wall time in
//! as `u64` seconds. A [`ChainState`] must be owned by exactly one logical
//! device at a time — transferring it between threads is fine, sharing it is
//! not.
//!
//! The broadcast schedule lives on a global epoch grid ([`Params`]): every
//! device derives one pseudonym per epoch by iterating a PRG built from
//! SHA-256, keeps a trailing window seed from which the last `Δ` epochs can
//! be regenerated, and reports by publishing that window seed with its time
//! bounds. See [`chain`] for derivation, [`entry`] for the report format and
//! [`matching`] for the checking side.

pub mod chain;
pub mod entry;
pub mod integrity;
pub mod matching;
pub mod params;
pub mod prg;
pub mod types;

pub use chain::{advance, build_report, init_chain, ChainError, ChainState};
pub use entry::{Entry, EntryError, EntrySignature};
pub use integrity::{
    advance_bound, build_report_bound, derive_next_bound, init_chain_bound, sign_entry,
    verify_entry_si, SiKeyPair,
};
pub use matching::{match_exposure, regenerate, ExposureEvent, Observation, TimedId};
pub use params::{Epoch, Params, ParamsError};
pub use prg::derive_next;
pub use types::{PseudonymId, Seed};
