use pact_alt_sig::{
    check_exposure, make_broadcast, validate_broadcast, AltReport, DailyKeyring,
    DEFAULT_TOLERANCE_SECONDS, DEFAULT_WINDOW_DAYS, SECONDS_PER_DAY,
};
use pact_core::{
    advance, build_report, build_report_bound, init_chain, init_chain_bound, integrity,
    match_exposure, regenerate, verify_entry_si, ChainError, ChainState, Params, SiKeyPair,
};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::store::{ObservationStore, RedactionPolicy};
use crate::transport::{BroadcastPayload, RegistryTransport};
use crate::AgentError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolKind {
    Core,
    CoreStrongIntegrity,
    AltSig,
}

/// App-level self-report signing material: a whitelisted certificate id and
/// its Ed25519 secret. Weak by design — it only tags the report's tier.
#[derive(Clone)]
pub struct SelfReportKey {
    pub cert_id: String,
    pub secret: [u8; 32],
}

#[derive(Clone)]
pub struct AgentConfig {
    pub params: Params,
    pub protocol: ProtocolKind,
    /// How long heard observations are kept. Default: the infection window.
    pub retention: u64,
    pub redaction: RedactionPolicy,
    /// Clock-skew allowance when matching core candidates.
    pub time_tolerance: u64,
    /// Collection-time staleness bound for alt broadcasts.
    pub alt_tolerance: u64,
    pub alt_window_days: u64,
    /// Start (and restart) chains pre-advanced so the first broadcast does
    /// not reveal chain age.
    pub skip_to_delta: bool,
    pub self_report: Option<SelfReportKey>,
    /// Source identity presented to the registry (rate-limiting key).
    pub source: String,
}

impl AgentConfig {
    pub fn new(params: Params, protocol: ProtocolKind, source: impl Into<String>) -> Self {
        AgentConfig {
            params,
            protocol,
            retention: params.window_seconds(),
            redaction: RedactionPolicy::default(),
            time_tolerance: 2 * params.epoch_seconds(),
            alt_tolerance: DEFAULT_TOLERANCE_SECONDS,
            alt_window_days: DEFAULT_WINDOW_DAYS,
            skip_to_delta: false,
            self_report: None,
            source: source.into(),
        }
    }
}

#[allow(clippy::large_enum_variant)]
enum Identity {
    Core {
        chain: ChainState,
        keypair: Option<SiKeyPair>,
    },
    Alt {
        keyring: DailyKeyring,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TickOutcome {
    pub payload: BroadcastPayload,
    /// Set when the clock ran backwards; the payload is the previous one.
    pub clock_warning: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "alert", rename_all = "kebab-case")]
pub enum Alert {
    None,
    AtRisk { detail: AlertDetail },
}

/// What an at-risk alert reveals, after the redaction policy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlertDetail {
    /// Nothing beyond the flag itself.
    Bare,
    /// Days (UTC day indices) on which exposure happened.
    Days(Vec<u64>),
    /// Exact heard times.
    Times(Vec<u64>),
}

pub struct Agent {
    config: AgentConfig,
    identity: Identity,
    store: ObservationStore,
    cursor: u64,
    alt_cursor: u64,
    rng: ChaCha20Rng,
    last_time: u64,
    last_payload: Option<BroadcastPayload>,
    /// Heard payloads that failed to parse or mismatched the protocol.
    pub malformed_heard: u64,
    /// Alt broadcasts rejected at collection (stale or bad commitment).
    pub rejected_heard: u64,
    /// Published entries skipped for a failed self-signature check.
    pub invalid_entries_seen: u64,
    /// Sticky flag: this agent has been alerted at least once.
    pub alerted: bool,
}

impl Agent {
    /// A fresh agent. `rng_seed` drives all of the agent's randomness
    /// (chain entropy, keys, nonces): simulations pass distinct fixed seeds
    /// for reproducibility, operational callers pass OS entropy.
    pub fn new(config: AgentConfig, rng_seed: u64, now: u64) -> Result<Agent, AgentError> {
        let mut rng = ChaCha20Rng::seed_from_u64(rng_seed);
        let identity = Self::fresh_identity(&config, &mut rng, now)?;
        Ok(Agent {
            config,
            identity,
            store: ObservationStore::new(),
            cursor: 0,
            alt_cursor: 0,
            rng,
            last_time: now,
            last_payload: None,
            malformed_heard: 0,
            rejected_heard: 0,
            invalid_entries_seen: 0,
            alerted: false,
        })
    }

    fn fresh_identity(
        config: &AgentConfig,
        rng: &mut ChaCha20Rng,
        now: u64,
    ) -> Result<Identity, AgentError> {
        let mut entropy = vec![0u8; config.params.id_len()];
        rng.fill_bytes(&mut entropy);
        Ok(match config.protocol {
            ProtocolKind::Core => Identity::Core {
                chain: init_chain(&config.params, &entropy, config.skip_to_delta, now)?,
                keypair: None,
            },
            ProtocolKind::CoreStrongIntegrity => {
                let mut key_entropy = [0u8; 32];
                rng.fill_bytes(&mut key_entropy);
                let keypair = SiKeyPair::from_entropy(&key_entropy);
                let chain = init_chain_bound(
                    &config.params,
                    &entropy,
                    &keypair.verifying_key_bytes(),
                    config.skip_to_delta,
                    now,
                )?;
                Identity::Core {
                    chain,
                    keypair: Some(keypair),
                }
            }
            ProtocolKind::AltSig => {
                let mut keyring = DailyKeyring::new(config.alt_window_days);
                keyring.keygen(now / SECONDS_PER_DAY, rng);
                Identity::Alt { keyring }
            }
        })
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn store(&self) -> &ObservationStore {
        &self.store
    }

    pub fn cursor(&self) -> u64 {
        self.cursor
    }

    /// The broadcast for this instant. Core protocols return the epoch's id
    /// (stable within an epoch); the alt protocol signs a fresh identifier
    /// every call. A backwards clock yields the previous payload unchanged
    /// plus a warning.
    pub fn tick(&mut self, now: u64) -> Result<TickOutcome, AgentError> {
        if now < self.last_time {
            if let Some(previous) = self.last_payload.clone() {
                return Ok(TickOutcome {
                    payload: previous,
                    clock_warning: true,
                });
            }
        }
        let payload = match &mut self.identity {
            Identity::Core { chain, keypair } => {
                let stepped = match keypair {
                    Some(kp) => integrity::advance_bound(
                        chain,
                        now,
                        &kp.verifying_key_bytes(),
                        &self.config.params,
                    ),
                    None => advance(chain, now, &self.config.params),
                };
                match stepped {
                    Ok((next, id)) => {
                        *chain = next;
                        BroadcastPayload::CoreId(id)
                    }
                    Err(ChainError::ClockRegression { .. }) => {
                        return Ok(TickOutcome {
                            payload: BroadcastPayload::CoreId(chain.current_id().clone()),
                            clock_warning: true,
                        })
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            Identity::Alt { keyring } => {
                let day = now / SECONDS_PER_DAY;
                keyring.keygen(day, &mut self.rng);
                let key = keyring.key_for(day).expect("just generated");
                BroadcastPayload::Alt(make_broadcast(key, now, &mut self.rng)?)
            }
        };
        self.last_time = now;
        self.last_payload = Some(payload.clone());
        Ok(TickOutcome {
            payload,
            clock_warning: false,
        })
    }

    /// Handles a heard broadcast. Returns whether it was stored.
    pub fn on_hear(&mut self, payload: &BroadcastPayload, now: u64) -> bool {
        match (&self.config.protocol, payload) {
            (
                ProtocolKind::Core | ProtocolKind::CoreStrongIntegrity,
                BroadcastPayload::CoreId(id),
            ) => {
                if id.len() != self.config.params.id_len() {
                    self.malformed_heard += 1;
                    return false;
                }
                self.store.add_core(id.clone(), now, &self.config.params)
            }
            (ProtocolKind::AltSig, BroadcastPayload::Alt(b)) => {
                if !validate_broadcast(b, now, self.config.alt_tolerance) {
                    self.rejected_heard += 1;
                    return false;
                }
                self.store.add_alt(b.stored(), now / SECONDS_PER_DAY)
            }
            _ => {
                self.malformed_heard += 1;
                false
            }
        }
    }

    /// Raw-bytes entry point for the radio layer.
    pub fn on_hear_bytes(&mut self, bytes: &[u8], now: u64) -> bool {
        match BroadcastPayload::decode(bytes) {
            Some(payload) => self.on_hear(&payload, now),
            None => {
                self.malformed_heard += 1;
                false
            }
        }
    }

    /// Ages out stored observations (and the chain window, which advance
    /// prunes on its own schedule).
    pub fn purge(&mut self, now: u64) -> usize {
        self.store
            .purge(now, self.config.retention, &self.config.params)
    }

    /// Builds and submits a positive report. Requires the consent flag for
    /// this specific call; without it nothing is constructed and nothing
    /// leaves the device. On success the identity restarts from fresh
    /// entropy — no pre-report broadcast is derivable from the new state.
    pub fn make_report(
        &mut self,
        now: u64,
        consent: bool,
        transport: &mut dyn RegistryTransport,
    ) -> Result<pact_registry::SubmitOutcome, AgentError> {
        if !consent {
            return Err(AgentError::ConsentRequired);
        }
        let mut entropy = vec![0u8; self.config.params.id_len()];
        self.rng.fill_bytes(&mut entropy);

        match &mut self.identity {
            Identity::Core { chain, keypair } => {
                let (mut entry, fresh_chain, fresh_keypair) = match keypair {
                    Some(kp) => {
                        let mut key_entropy = [0u8; 32];
                        self.rng.fill_bytes(&mut key_entropy);
                        let next_kp = SiKeyPair::from_entropy(&key_entropy);
                        let (entry, fresh) = build_report_bound(
                            chain,
                            kp,
                            &self.config.params,
                            &entropy,
                            &next_kp.verifying_key_bytes(),
                            self.config.skip_to_delta,
                            now,
                        )?;
                        (entry, fresh, Some(next_kp))
                    }
                    None => {
                        let (entry, fresh) = build_report(
                            chain,
                            &self.config.params,
                            &entropy,
                            self.config.skip_to_delta,
                            now,
                        )?;
                        (entry, fresh, None)
                    }
                };
                if let Some(sr) = &self.config.self_report {
                    let key = SiKeyPair::from_entropy(&sr.secret);
                    entry.signatures.push(pact_core::EntrySignature {
                        cert_id: sr.cert_id.clone(),
                        signature: key.sign_raw(&entry.signing_bytes()),
                    });
                }
                let outcome = transport.submit_entry(&entry, &self.config.source)?;
                *chain = fresh_chain;
                *keypair = fresh_keypair;
                Ok(outcome)
            }
            Identity::Alt { keyring } => {
                let report = AltReport {
                    verification_keys: keyring.window_keys(now / SECONDS_PER_DAY),
                };
                let outcome = transport.submit_alt_report(&report, &self.config.source)?;
                keyring.reset();
                keyring.keygen(now / SECONDS_PER_DAY, &mut self.rng);
                Ok(outcome)
            }
        }
    }

    /// Pulls new publications from the registry, regenerates candidates,
    /// matches against the local store, and reports an alert filtered by
    /// the redaction policy. Cursors advance only after a batch is fully
    /// processed, so a transport failure is retriable without skips.
    pub fn sync_and_check(
        &mut self,
        _now: u64,
        transport: &mut dyn RegistryTransport,
    ) -> Result<Alert, AgentError> {
        match self.config.protocol {
            ProtocolKind::Core | ProtocolKind::CoreStrongIntegrity => {
                let mut match_times = Vec::new();
                loop {
                    let (batch, next) = transport.fetch_entries(self.cursor, 256)?;
                    if batch.is_empty() {
                        break;
                    }
                    for record in &batch {
                        if record.entry.si.is_some() && !verify_entry_si(&record.entry) {
                            self.invalid_entries_seen += 1;
                            continue;
                        }
                        let Ok(candidates) = regenerate(&record.entry, &self.config.params) else {
                            self.invalid_entries_seen += 1;
                            continue;
                        };
                        let events = match_exposure(
                            self.store.core_observations(),
                            &candidates,
                            &self.config.params,
                            self.config.time_tolerance,
                        );
                        match_times.extend(events.iter().map(|e| e.heard_at));
                    }
                    self.cursor = next;
                }
                Ok(self.alert_from_times(match_times))
            }
            ProtocolKind::AltSig => {
                let mut matched_any = false;
                loop {
                    let (groups, next) = transport.fetch_alt_keys(self.alt_cursor, 256)?;
                    if groups.is_empty() {
                        break;
                    }
                    let keys: Vec<[u8; 32]> =
                        groups.iter().flat_map(|g| g.keys.iter().copied()).collect();
                    let stored = self.store.alt_triples();
                    let outcome = check_exposure(&stored, &keys);
                    matched_any |= !outcome.matched.is_empty();
                    self.alt_cursor = next;
                }
                if matched_any {
                    self.alerted = true;
                    // Alt storage is timeless; the alert has nothing to
                    // redact.
                    Ok(Alert::AtRisk {
                        detail: AlertDetail::Bare,
                    })
                } else {
                    Ok(Alert::None)
                }
            }
        }
    }

    fn alert_from_times(&mut self, mut times: Vec<u64>) -> Alert {
        if times.is_empty() {
            return Alert::None;
        }
        self.alerted = true;
        times.sort_unstable();
        times.dedup();
        let detail = match self.config.redaction {
            RedactionPolicy::None => AlertDetail::Times(times),
            RedactionPolicy::DayGranularity => {
                let mut days: Vec<u64> = times.iter().map(|t| t / SECONDS_PER_DAY).collect();
                days.dedup();
                AlertDetail::Days(days)
            }
            RedactionPolicy::SuppressTime => AlertDetail::Bare,
        };
        Alert::AtRisk { detail }
    }

    // Snapshot plumbing.
    pub(crate) fn parts(&self) -> (&AgentConfig, &ObservationStore, u64, u64, &ChaCha20Rng, u64) {
        (
            &self.config,
            &self.store,
            self.cursor,
            self.alt_cursor,
            &self.rng,
            self.last_time,
        )
    }

    pub(crate) fn chain_state(&self) -> Option<(&ChainState, Option<&SiKeyPair>)> {
        match &self.identity {
            Identity::Core { chain, keypair } => Some((chain, keypair.as_ref())),
            Identity::Alt { .. } => None,
        }
    }

    pub(crate) fn keyring(&self) -> Option<&DailyKeyring> {
        match &self.identity {
            Identity::Alt { keyring } => Some(keyring),
            Identity::Core { .. } => None,
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn assemble(
        config: AgentConfig,
        identity_core: Option<(ChainState, Option<SiKeyPair>)>,
        identity_alt: Option<DailyKeyring>,
        store: ObservationStore,
        cursor: u64,
        alt_cursor: u64,
        rng: ChaCha20Rng,
        last_time: u64,
    ) -> Result<Agent, AgentError> {
        let identity = match (identity_core, identity_alt) {
            (Some((chain, keypair)), None) => Identity::Core { chain, keypair },
            (None, Some(keyring)) => Identity::Alt { keyring },
            _ => return Err(AgentError::BadSnapshot),
        };
        Ok(Agent {
            config,
            identity,
            store,
            cursor,
            alt_cursor,
            rng,
            last_time,
            last_payload: None,
            malformed_heard: 0,
            rejected_heard: 0,
            invalid_entries_seen: 0,
            alerted: false,
        })
    }
}
