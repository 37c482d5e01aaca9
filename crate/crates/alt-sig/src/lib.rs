//! A signature-based tracing variant. Instead of a seed chain, each device
//! keeps one Ed25519 key pair per day, broadcasts per-epoch identifiers
//! `(σ, R, h)` with a revealed `(r, t)` where `h = H(r, t)` commits to the
//! broadcast time and `σ = Sign(sk_d, R ‖ h)`, and reports by publishing the
//! recent daily verification keys.
//!
//! Replay protection happens at collection time: a hearer rejects anything
//! whose revealed timestamp strays more than a tolerance from its own clock
//! or whose hash commitment does not check out. What gets stored is only the
//! `(σ, R, h)` triple, which reveals nothing about when the interaction
//! happened. Checking exposure is `Vrfy(vk, σ, R ‖ h)` over every stored
//! triple and every reported key.

mod broadcast;
mod cost;
mod keys;
mod report;

pub use broadcast::{
    commit_hash, make_broadcast, validate_broadcast, AltBroadcast, StoredId, BROADCAST_WIRE_LEN,
};
pub use cost::{cost_model, CostEstimate};
pub use keys::{DailyKey, DailyKeyring, SECONDS_PER_DAY};
pub use report::{check_exposure, check_exposure_batch, AltReport, CheckOutcome};

use thiserror::Error;

/// Collection-time tolerance: how far a revealed broadcast timestamp may
/// stray from the hearer's clock. Tight enough to bound the replay radius,
/// loose enough to absorb ordinary clock skew.
pub const DEFAULT_TOLERANCE_SECONDS: u64 = 120;

/// Days of verification keys a report covers (and the keyring retains).
pub const DEFAULT_WINDOW_DAYS: u64 = 14;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AltError {
    #[error("time {t} is outside day {day}")]
    WrongDay { t: u64, day: u64 },
    #[error("signing key for day {day} has been erased")]
    KeyErased { day: u64 },
    #[error("truncated broadcast encoding")]
    BadEncoding,
}
