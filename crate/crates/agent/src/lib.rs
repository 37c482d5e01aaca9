//! The device agent: one logical phone. It broadcasts the current epoch's
//! pseudonym (or a fresh signed identifier, in the signature protocol),
//! collects what it hears with retention and dedup, reports on explicit
//! consent and never otherwise, and syncs the public list to check its own
//! exposure — with alert detail filtered by a redaction policy before
//! anything is shown.
//!
//! Event handling is serialized per agent: tick, on_hear, purge and sync are
//! `&mut self`. Many agents can run side by side in one process; that is
//! exactly what the simulation harness does.

mod agent;
mod snapshot;
mod store;
mod transport;

pub use agent::{Agent, AgentConfig, Alert, AlertDetail, ProtocolKind, SelfReportKey, TickOutcome};
pub use snapshot::{load_snapshot, save_snapshot};
pub use store::{ObservationStore, RedactionPolicy};
pub use transport::{
    BroadcastPayload, InProcessRegistry, RegistryTransport, SpyTransport, TransportError,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("reporting requires explicit consent for this call")]
    ConsentRequired,
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Chain(#[from] pact_core::ChainError),
    #[error(transparent)]
    Alt(#[from] pact_alt_sig::AltError),
    #[error("snapshot is corrupt or from an unknown version")]
    BadSnapshot,
}
