use std::collections::{HashMap, HashSet, VecDeque};
use std::io;
use std::path::Path;

use pact_alt_sig::AltReport;
use pact_core::{verify_entry_si, Entry, Params};
use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::log_file::{LogFile, RecordKind};
use crate::policy::{PolicyError, SignaturePolicy, Tier};

#[derive(Debug, Clone)]
pub struct RegistryConfig {
    pub params: Params,
    /// Seconds an accepted entry waits before publication. Must exceed one
    /// epoch or immediate rebroadcast of a published id defeats the point.
    pub delay: u64,
    /// Oldest t_start accepted relative to now.
    pub max_report_age: u64,
    /// Randomly permute each release batch.
    pub shuffle: bool,
    /// Fixed shuffle seed for reproducible runs; None draws from the OS.
    pub shuffle_seed: Option<u64>,
    /// Require and verify the strong-integrity self-signature.
    pub require_strong_integrity: bool,
    /// Accepted submissions per source per window.
    pub rate_limit_max: usize,
    pub rate_limit_window: u64,
    /// Publish a report's alt keys as one group (true) or as separate
    /// records (false), hiding which keys were reported together.
    pub alt_grouped: bool,
}

impl RegistryConfig {
    pub fn new(params: Params) -> Self {
        RegistryConfig {
            params,
            delay: 2 * params.epoch_seconds(),
            max_report_age: params.window_seconds() + 86_400,
            shuffle: false,
            shuffle_seed: None,
            require_strong_integrity: false,
            rate_limit_max: 10,
            rate_limit_window: 3600,
            alt_grouped: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    Malformed,
    Future,
    Stale,
    WindowTooLong,
    MissingSelfSignature,
    InvalidSelfSignature,
    UnknownSigner,
    BadSignature,
    Duplicate,
    RateLimited,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum SubmitOutcome {
    Accepted { tier: Option<Tier>, release_at: u64 },
    Rejected { reason: RejectReason },
}

impl SubmitOutcome {
    pub fn is_accepted(&self) -> bool {
        matches!(self, SubmitOutcome::Accepted { .. })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CountersignError {
    #[error("no entry with that locator")]
    NotFound,
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

/// One published entry with its audit timestamps. Position in the published
/// list and the core tuple (S*, t_start, t_end) never change after
/// publication; countersigning may grow the signature list and raise the
/// tier in place.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublishedRecord {
    pub seq: u64,
    pub entry: Entry,
    pub submitted_at: u64,
    pub published_at: u64,
    pub tier: Option<Tier>,
}

/// One published batch of alt-protocol verification keys. Grouped mode
/// publishes a whole report as one group; ungrouped mode emits singleton
/// groups so the server does not reveal which keys were reported together.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AltKeyGroup {
    pub keys: Vec<[u8; 32]>,
    pub published_at: u64,
}

#[derive(Debug, Clone)]
struct PendingEntry {
    seq: u64,
    entry: Entry,
    submitted_at: u64,
    release_at: u64,
    tier: Option<Tier>,
}

#[derive(Debug, Clone)]
struct PendingAlt {
    seq: u64,
    keys: Vec<[u8; 32]>,
    release_at: u64,
}

pub struct Registry {
    config: RegistryConfig,
    policy: SignaturePolicy,
    pending: Vec<PendingEntry>,
    published: Vec<PublishedRecord>,
    alt_pending: Vec<PendingAlt>,
    alt_published: Vec<AltKeyGroup>,
    seen_seeds: HashSet<Vec<u8>>,
    seen_alt_keys: HashSet<[u8; 32]>,
    accepted_times: HashMap<String, VecDeque<u64>>,
    next_seq: u64,
    rng: ChaCha20Rng,
    log: Option<LogFile>,
}

impl Registry {
    pub fn new(config: RegistryConfig, policy: SignaturePolicy) -> Registry {
        let rng = match config.shuffle_seed {
            Some(seed) => ChaCha20Rng::seed_from_u64(seed),
            None => ChaCha20Rng::seed_from_u64(rand::rng().next_u64()),
        };
        Registry {
            config,
            policy,
            pending: Vec::new(),
            published: Vec::new(),
            alt_pending: Vec::new(),
            alt_published: Vec::new(),
            seen_seeds: HashSet::new(),
            seen_alt_keys: HashSet::new(),
            accepted_times: HashMap::new(),
            next_seq: 0,
            rng,
            log: None,
        }
    }

    /// Opens a registry backed by an append-only record file, replaying any
    /// existing records (pending submissions included).
    pub fn with_log(
        config: RegistryConfig,
        policy: SignaturePolicy,
        path: &Path,
    ) -> io::Result<Registry> {
        let (log, records) = LogFile::open(path)?;
        let mut reg = Registry::new(config, policy);
        for (kind, body) in records {
            reg.replay(kind, &body);
        }
        reg.log = Some(log);
        Ok(reg)
    }

    pub fn config(&self) -> &RegistryConfig {
        &self.config
    }

    pub fn policy(&self) -> &SignaturePolicy {
        &self.policy
    }

    pub fn published_len(&self) -> u64 {
        self.published.len() as u64
    }

    pub fn pending_len(&self) -> usize {
        self.pending.len()
    }

    pub fn alt_published_len(&self) -> u64 {
        self.alt_published.len() as u64
    }

    /// Intake. Checks, in order: shape, future timestamps, staleness, window
    /// span, the strong-integrity self-signature, third-party signatures,
    /// duplicate window seeds, and the per-source rate limit. Accepted
    /// entries wait `delay` seconds in the pending queue.
    pub fn submit(&mut self, entry: Entry, source: &str, now: u64) -> SubmitOutcome {
        if entry.validate(&self.config.params).is_err() {
            return reject(RejectReason::Malformed);
        }
        if entry.t_end > now {
            return reject(RejectReason::Future);
        }
        if now.saturating_sub(entry.t_start) > self.config.max_report_age {
            return reject(RejectReason::Stale);
        }
        if entry.window_too_long(&self.config.params) {
            return reject(RejectReason::WindowTooLong);
        }
        if self.config.require_strong_integrity && entry.si.is_none() {
            return reject(RejectReason::MissingSelfSignature);
        }
        if entry.si.is_some() && !verify_entry_si(&entry) {
            return reject(RejectReason::InvalidSelfSignature);
        }
        let mut tier = None;
        let signing_bytes = entry.signing_bytes();
        for sig in &entry.signatures {
            match self
                .policy
                .verify(&sig.cert_id, &signing_bytes, &sig.signature)
            {
                Ok(t) => tier = tier.max(Some(t)),
                Err(PolicyError::UnknownSigner(_)) => return reject(RejectReason::UnknownSigner),
                Err(_) => return reject(RejectReason::BadSignature),
            }
        }
        if self.seen_seeds.contains(entry.window_seed.as_bytes()) {
            return reject(RejectReason::Duplicate);
        }
        if !self.rate_limit_ok(source, now) {
            return reject(RejectReason::RateLimited);
        }

        let release_at = now + self.config.delay;
        let seq = self.next_seq;
        self.next_seq += 1;
        self.seen_seeds
            .insert(entry.window_seed.as_bytes().to_vec());
        self.note_accepted(source, now);
        self.log_submission(seq, &entry, source, now, release_at, tier);
        self.pending.push(PendingEntry {
            seq,
            entry,
            submitted_at: now,
            release_at,
            tier,
        });
        SubmitOutcome::Accepted { tier, release_at }
    }

    /// Re-validation by another party: appends a signature to an existing
    /// entry (pending or published) and raises its tier. Idempotent per
    /// authority; the entry's position and core tuple never change.
    pub fn countersign(
        &mut self,
        locator: &[u8],
        cert_id: &str,
        signature: &[u8],
    ) -> Result<Option<Tier>, CountersignError> {
        let (seq, signing_bytes, already) = {
            let found = self
                .pending
                .iter()
                .map(|p| (p.seq, &p.entry))
                .chain(self.published.iter().map(|p| (p.seq, &p.entry)))
                .find(|(_, e)| e.window_seed.as_bytes() == locator);
            let Some((seq, entry)) = found else {
                return Err(CountersignError::NotFound);
            };
            let already = entry
                .signatures
                .iter()
                .any(|s| s.cert_id == cert_id && s.signature == signature);
            (seq, entry.signing_bytes(), already)
        };
        let tier = self.policy.verify(cert_id, &signing_bytes, signature)?;
        if !already {
            self.log_amendment(seq, cert_id, signature);
            self.apply_amendment(seq, cert_id, signature, tier);
        }
        Ok(self.tier_of(seq))
    }

    fn apply_amendment(&mut self, seq: u64, cert_id: &str, signature: &[u8], tier: Tier) {
        let entry_mut = self
            .pending
            .iter_mut()
            .filter(|p| p.seq == seq)
            .map(|p| (&mut p.entry, &mut p.tier))
            .next()
            .or_else(|| {
                self.published
                    .iter_mut()
                    .filter(|p| p.seq == seq)
                    .map(|p| (&mut p.entry, &mut p.tier))
                    .next()
            });
        if let Some((entry, current_tier)) = entry_mut {
            entry.signatures.push(pact_core::EntrySignature {
                cert_id: cert_id.to_string(),
                signature: signature.to_vec(),
            });
            *current_tier = (*current_tier).max(Some(tier));
        }
    }

    fn tier_of(&self, seq: u64) -> Option<Tier> {
        self.pending
            .iter()
            .find(|p| p.seq == seq)
            .map(|p| p.tier)
            .or_else(|| self.published.iter().find(|p| p.seq == seq).map(|p| p.tier))
            .flatten()
    }

    /// Accepts a report of alt-protocol verification keys. Keys already on
    /// the list are dropped; a report with nothing new is a duplicate.
    pub fn submit_alt_report(
        &mut self,
        report: &AltReport,
        source: &str,
        now: u64,
    ) -> SubmitOutcome {
        let fresh: Vec<[u8; 32]> = report
            .verification_keys
            .iter()
            .filter(|vk| !self.seen_alt_keys.contains(*vk))
            .copied()
            .collect();
        if report.verification_keys.is_empty() {
            return reject(RejectReason::Malformed);
        }
        if fresh.is_empty() {
            return reject(RejectReason::Duplicate);
        }
        if !self.rate_limit_ok(source, now) {
            return reject(RejectReason::RateLimited);
        }
        let release_at = now + self.config.delay;
        let seq = self.next_seq;
        self.next_seq += 1;
        for vk in &fresh {
            self.seen_alt_keys.insert(*vk);
        }
        self.note_accepted(source, now);
        self.log_alt_submission(seq, &fresh, now, release_at);
        self.alt_pending.push(PendingAlt {
            seq,
            keys: fresh,
            release_at,
        });
        SubmitOutcome::Accepted {
            tier: None,
            release_at,
        }
    }

    /// Publishes everything due at `now`. Within the batch, order is
    /// randomly permuted when shuffle mode is on. Returns the number of
    /// records published across both lanes.
    pub fn release_tick(&mut self, now: u64) -> usize {
        let mut due: Vec<PendingEntry> = Vec::new();
        self.pending.retain_mut(|p| {
            if p.release_at <= now {
                due.push(p.clone());
                false
            } else {
                true
            }
        });
        if self.config.shuffle {
            due.shuffle(&mut self.rng);
        }
        let mut count = 0;
        for p in due {
            self.log_publication(p.seq, now);
            self.published.push(PublishedRecord {
                seq: p.seq,
                entry: p.entry,
                submitted_at: p.submitted_at,
                published_at: now,
                tier: p.tier,
            });
            count += 1;
        }

        let mut alt_due: Vec<PendingAlt> = Vec::new();
        self.alt_pending.retain_mut(|p| {
            if p.release_at <= now {
                alt_due.push(p.clone());
                false
            } else {
                true
            }
        });
        let mut groups: Vec<(u64, Vec<[u8; 32]>)> = Vec::new();
        for p in alt_due {
            if self.config.alt_grouped {
                groups.push((p.seq, p.keys));
            } else {
                for key in p.keys {
                    groups.push((p.seq, vec![key]));
                }
            }
        }
        if self.config.shuffle {
            groups.shuffle(&mut self.rng);
        }
        for (seq, keys) in groups {
            self.log_alt_publication(seq, &keys, now);
            self.alt_published.push(AltKeyGroup {
                keys,
                published_at: now,
            });
            count += 1;
        }
        count
    }

    /// Pages through the published list. Repeated fetches over a fixed range
    /// always return the same entries in the same order; a cursor at or past
    /// the end yields an empty batch and the same cursor.
    pub fn fetch(&self, cursor: u64, limit: usize) -> (Vec<PublishedRecord>, u64) {
        let start = cursor.min(self.published.len() as u64) as usize;
        let end = (start + limit).min(self.published.len());
        let batch = self.published[start..end].to_vec();
        let next = if batch.is_empty() { cursor } else { end as u64 };
        (batch, next)
    }

    pub fn fetch_alt(&self, cursor: u64, limit: usize) -> (Vec<AltKeyGroup>, u64) {
        let start = cursor.min(self.alt_published.len() as u64) as usize;
        let end = (start + limit).min(self.alt_published.len());
        let batch = self.alt_published[start..end].to_vec();
        let next = if batch.is_empty() { cursor } else { end as u64 };
        (batch, next)
    }

    fn rate_limit_ok(&mut self, source: &str, now: u64) -> bool {
        let window = self.config.rate_limit_window;
        let times = self.accepted_times.entry(source.to_string()).or_default();
        while times.front().is_some_and(|&t| t + window <= now) {
            times.pop_front();
        }
        times.len() < self.config.rate_limit_max
    }

    fn note_accepted(&mut self, source: &str, now: u64) {
        self.accepted_times
            .entry(source.to_string())
            .or_default()
            .push_back(now);
    }

    // --- persistence ---

    fn log_submission(
        &mut self,
        seq: u64,
        entry: &Entry,
        source: &str,
        submitted_at: u64,
        release_at: u64,
        tier: Option<Tier>,
    ) {
        if self.log.is_none() {
            return;
        }
        let mut body = Vec::new();
        body.extend_from_slice(&seq.to_be_bytes());
        body.extend_from_slice(&submitted_at.to_be_bytes());
        body.extend_from_slice(&release_at.to_be_bytes());
        body.push(tier_to_u8(tier));
        let src = source.as_bytes();
        body.extend_from_slice(&(src.len() as u16).to_be_bytes());
        body.extend_from_slice(src);
        body.extend_from_slice(&entry.encode_canonical());
        self.append_log(RecordKind::Submission, &body);
    }

    fn log_publication(&mut self, seq: u64, published_at: u64) {
        if self.log.is_none() {
            return;
        }
        let mut body = Vec::new();
        body.extend_from_slice(&seq.to_be_bytes());
        body.extend_from_slice(&published_at.to_be_bytes());
        self.append_log(RecordKind::Publication, &body);
    }

    fn log_amendment(&mut self, seq: u64, cert_id: &str, signature: &[u8]) {
        if self.log.is_none() {
            return;
        }
        let mut body = Vec::new();
        body.extend_from_slice(&seq.to_be_bytes());
        let cert = cert_id.as_bytes();
        body.extend_from_slice(&(cert.len() as u16).to_be_bytes());
        body.extend_from_slice(cert);
        body.extend_from_slice(&(signature.len() as u16).to_be_bytes());
        body.extend_from_slice(signature);
        self.append_log(RecordKind::Amendment, &body);
    }

    fn log_alt_submission(
        &mut self,
        seq: u64,
        keys: &[[u8; 32]],
        submitted_at: u64,
        release_at: u64,
    ) {
        if self.log.is_none() {
            return;
        }
        let mut body = Vec::new();
        body.extend_from_slice(&seq.to_be_bytes());
        body.extend_from_slice(&submitted_at.to_be_bytes());
        body.extend_from_slice(&release_at.to_be_bytes());
        body.extend_from_slice(&(keys.len() as u16).to_be_bytes());
        for k in keys {
            body.extend_from_slice(k);
        }
        self.append_log(RecordKind::AltSubmission, &body);
    }

    fn log_alt_publication(&mut self, seq: u64, keys: &[[u8; 32]], published_at: u64) {
        if self.log.is_none() {
            return;
        }
        let mut body = Vec::new();
        body.extend_from_slice(&seq.to_be_bytes());
        body.extend_from_slice(&published_at.to_be_bytes());
        body.extend_from_slice(&(keys.len() as u16).to_be_bytes());
        for k in keys {
            body.extend_from_slice(k);
        }
        self.append_log(RecordKind::AltPublication, &body);
    }

    fn append_log(&mut self, kind: RecordKind, body: &[u8]) {
        if let Some(log) = &mut self.log {
            // A failed append is fatal for a public-audit service.
            log.append(kind, body).expect("registry log append");
        }
    }

    fn replay(&mut self, kind: RecordKind, body: &[u8]) {
        match kind {
            RecordKind::Submission => {
                let seq = be64(&body[0..8]);
                let submitted_at = be64(&body[8..16]);
                let release_at = be64(&body[16..24]);
                let tier = tier_from_u8(body[24]);
                let src_len = u16::from_be_bytes(body[25..27].try_into().unwrap()) as usize;
                let entry_bytes = &body[27 + src_len..];
                let entry = Entry::decode_canonical(entry_bytes, &self.config.params)
                    .expect("corrupt submission record");
                self.seen_seeds
                    .insert(entry.window_seed.as_bytes().to_vec());
                self.next_seq = self.next_seq.max(seq + 1);
                self.pending.push(PendingEntry {
                    seq,
                    entry,
                    submitted_at,
                    release_at,
                    tier,
                });
            }
            RecordKind::Publication => {
                let seq = be64(&body[0..8]);
                let published_at = be64(&body[8..16]);
                if let Some(pos) = self.pending.iter().position(|p| p.seq == seq) {
                    let p = self.pending.remove(pos);
                    self.published.push(PublishedRecord {
                        seq: p.seq,
                        entry: p.entry,
                        submitted_at: p.submitted_at,
                        published_at,
                        tier: p.tier,
                    });
                }
            }
            RecordKind::Amendment => {
                let seq = be64(&body[0..8]);
                let cert_len = u16::from_be_bytes(body[8..10].try_into().unwrap()) as usize;
                let cert = String::from_utf8(body[10..10 + cert_len].to_vec())
                    .expect("corrupt amendment record");
                let sig_off = 10 + cert_len;
                let sig_len =
                    u16::from_be_bytes(body[sig_off..sig_off + 2].try_into().unwrap()) as usize;
                let sig = body[sig_off + 2..sig_off + 2 + sig_len].to_vec();
                let tier = self.policy.tier_of(&cert).unwrap_or(Tier::SelfReport);
                self.apply_amendment(seq, &cert, &sig, tier);
            }
            RecordKind::AltSubmission => {
                let seq = be64(&body[0..8]);
                let release_at = be64(&body[16..24]);
                let count = u16::from_be_bytes(body[24..26].try_into().unwrap()) as usize;
                let mut keys = Vec::with_capacity(count);
                for i in 0..count {
                    let off = 26 + i * 32;
                    let key: [u8; 32] = body[off..off + 32].try_into().unwrap();
                    self.seen_alt_keys.insert(key);
                    keys.push(key);
                }
                self.next_seq = self.next_seq.max(seq + 1);
                self.alt_pending.push(PendingAlt {
                    seq,
                    keys,
                    release_at,
                });
            }
            RecordKind::AltPublication => {
                let seq = be64(&body[0..8]);
                let published_at = be64(&body[8..16]);
                let count = u16::from_be_bytes(body[16..18].try_into().unwrap()) as usize;
                let mut keys = Vec::with_capacity(count);
                for i in 0..count {
                    let off = 18 + i * 32;
                    keys.push(body[off..off + 32].try_into().unwrap());
                }
                self.alt_pending.retain(|p| p.seq != seq);
                self.alt_published.push(AltKeyGroup { keys, published_at });
            }
        }
    }
}

fn reject(reason: RejectReason) -> SubmitOutcome {
    SubmitOutcome::Rejected { reason }
}

fn be64(bytes: &[u8]) -> u64 {
    u64::from_be_bytes(bytes.try_into().unwrap())
}

fn tier_to_u8(tier: Option<Tier>) -> u8 {
    match tier {
        None => 0,
        Some(Tier::SelfReport) => 1,
        Some(Tier::HealthcareValidated) => 2,
    }
}

fn tier_from_u8(v: u8) -> Option<Tier> {
    match v {
        1 => Some(Tier::SelfReport),
        2 => Some(Tier::HealthcareValidated),
        _ => None,
    }
}
