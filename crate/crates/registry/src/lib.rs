//! The public report server. Entries arrive with plausibility checks and
//! optional signatures, sit in a pending queue for a configured delay, and
//! are then published to an append-only list that clients page through with
//! monotone cursors. A second lane carries the signature-protocol's
//! verification-key reports.
//!
//! The delay is load-bearing: publishing an entry immediately would let
//! anyone rebroadcast its freshest regenerated id and have it accepted as a
//! live observation. Within one release batch the order can be shuffled so
//! the append-only list does not expose submission adjacency.

mod http;
mod log_file;
mod policy;
mod registry;

pub use http::{serve, ServiceHandle};
pub use log_file::{LogFile, RecordKind};
pub use policy::{PolicyError, SignaturePolicy, Tier, WhitelistKey};
pub use registry::{
    AltKeyGroup, CountersignError, PublishedRecord, Registry, RegistryConfig, RejectReason,
    SubmitOutcome,
};
