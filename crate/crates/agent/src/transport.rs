//! How an agent reaches the registry. The trait keeps the agent transport
//! agnostic: simulations hand it an in-process registry pinned to virtual
//! time, the CLI hands it an HTTP client, and tests wrap either in a spy
//! that counts every byte leaving the device.

use pact_alt_sig::{AltBroadcast, AltReport, BROADCAST_WIRE_LEN};
use pact_core::{Entry, PseudonymId};
use pact_registry::{AltKeyGroup, PublishedRecord, Registry, SubmitOutcome};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("registry unreachable: {0}")]
    Unreachable(String),
}

pub trait RegistryTransport {
    fn submit_entry(
        &mut self,
        entry: &Entry,
        source: &str,
    ) -> Result<SubmitOutcome, TransportError>;
    fn submit_alt_report(
        &mut self,
        report: &AltReport,
        source: &str,
    ) -> Result<SubmitOutcome, TransportError>;
    fn fetch_entries(
        &mut self,
        cursor: u64,
        limit: usize,
    ) -> Result<(Vec<PublishedRecord>, u64), TransportError>;
    fn fetch_alt_keys(
        &mut self,
        cursor: u64,
        limit: usize,
    ) -> Result<(Vec<AltKeyGroup>, u64), TransportError>;
}

/// Direct calls into a registry owned by the caller, pinned to one instant
/// of (virtual) time.
pub struct InProcessRegistry<'a> {
    registry: &'a mut Registry,
    now: u64,
}

impl<'a> InProcessRegistry<'a> {
    pub fn at(registry: &'a mut Registry, now: u64) -> Self {
        InProcessRegistry { registry, now }
    }
}

impl RegistryTransport for InProcessRegistry<'_> {
    fn submit_entry(
        &mut self,
        entry: &Entry,
        source: &str,
    ) -> Result<SubmitOutcome, TransportError> {
        Ok(self.registry.submit(entry.clone(), source, self.now))
    }

    fn submit_alt_report(
        &mut self,
        report: &AltReport,
        source: &str,
    ) -> Result<SubmitOutcome, TransportError> {
        Ok(self.registry.submit_alt_report(report, source, self.now))
    }

    fn fetch_entries(
        &mut self,
        cursor: u64,
        limit: usize,
    ) -> Result<(Vec<PublishedRecord>, u64), TransportError> {
        Ok(self.registry.fetch(cursor, limit))
    }

    fn fetch_alt_keys(
        &mut self,
        cursor: u64,
        limit: usize,
    ) -> Result<(Vec<AltKeyGroup>, u64), TransportError> {
        Ok(self.registry.fetch_alt(cursor, limit))
    }
}

/// Wraps a transport and accounts for traffic: how many write calls and
/// write bytes left the device, how many read calls were made. The
/// zero-egress tests are built on this.
pub struct SpyTransport<T> {
    pub inner: T,
    pub submit_calls: usize,
    pub submit_bytes: u64,
    pub fetch_calls: usize,
}

impl<T> SpyTransport<T> {
    pub fn new(inner: T) -> Self {
        SpyTransport {
            inner,
            submit_calls: 0,
            submit_bytes: 0,
            fetch_calls: 0,
        }
    }
}

impl<T: RegistryTransport> RegistryTransport for SpyTransport<T> {
    fn submit_entry(
        &mut self,
        entry: &Entry,
        source: &str,
    ) -> Result<SubmitOutcome, TransportError> {
        self.submit_calls += 1;
        self.submit_bytes += entry.encode_canonical().len() as u64;
        self.inner.submit_entry(entry, source)
    }

    fn submit_alt_report(
        &mut self,
        report: &AltReport,
        source: &str,
    ) -> Result<SubmitOutcome, TransportError> {
        self.submit_calls += 1;
        self.submit_bytes += report.encode().len() as u64;
        self.inner.submit_alt_report(report, source)
    }

    fn fetch_entries(
        &mut self,
        cursor: u64,
        limit: usize,
    ) -> Result<(Vec<PublishedRecord>, u64), TransportError> {
        self.fetch_calls += 1;
        self.inner.fetch_entries(cursor, limit)
    }

    fn fetch_alt_keys(
        &mut self,
        cursor: u64,
        limit: usize,
    ) -> Result<(Vec<AltKeyGroup>, u64), TransportError> {
        self.fetch_calls += 1;
        self.inner.fetch_alt_keys(cursor, limit)
    }
}

/// What goes over the radio each epoch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BroadcastPayload {
    CoreId(PseudonymId),
    Alt(AltBroadcast),
}

impl BroadcastPayload {
    /// Radio wire form: a tag byte then the payload.
    pub fn encode(&self) -> Vec<u8> {
        match self {
            BroadcastPayload::CoreId(id) => {
                let mut out = Vec::with_capacity(1 + id.len());
                out.push(0);
                out.extend_from_slice(id.as_bytes());
                out
            }
            BroadcastPayload::Alt(b) => {
                let mut out = Vec::with_capacity(1 + BROADCAST_WIRE_LEN);
                out.push(1);
                out.extend_from_slice(&b.encode());
                out
            }
        }
    }

    pub fn decode(bytes: &[u8]) -> Option<BroadcastPayload> {
        let (&tag, rest) = bytes.split_first()?;
        match tag {
            0 if !rest.is_empty() => Some(BroadcastPayload::CoreId(PseudonymId::from_bytes(rest))),
            1 => AltBroadcast::decode(rest).ok().map(BroadcastPayload::Alt),
            _ => None,
        }
    }
}
