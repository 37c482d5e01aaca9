//! The agent's local persistence: one versioned binary snapshot with
//! length-prefixed sections — identity (chain or keyring, secrets
//! included), observation store, cursors, RNG position. At-rest encryption
//! is the platform's job, not modeled here.

use std::fs;
use std::path::Path;

use pact_alt_sig::{DailyKeyring, StoredId};
use pact_core::{ChainState, Observation, PseudonymId, SiKeyPair};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::agent::{Agent, AgentConfig, ProtocolKind};
use crate::store::ObservationStore;
use crate::AgentError;

const MAGIC: &[u8; 6] = b"PACTA\x01";

pub fn save_snapshot(agent: &Agent, path: &Path) -> std::io::Result<()> {
    fs::write(path, encode(agent))
}

/// Restores an agent from a snapshot. The config is supplied by the caller
/// (it holds deployment choices and signing material); the snapshot's
/// protocol marker must agree with it.
pub fn load_snapshot(config: AgentConfig, path: &Path) -> Result<Agent, AgentError> {
    let bytes = fs::read(path).map_err(|_| AgentError::BadSnapshot)?;
    decode(config, &bytes)
}

fn section(out: &mut Vec<u8>, body: &[u8]) {
    out.extend_from_slice(&(body.len() as u32).to_be_bytes());
    out.extend_from_slice(body);
}

fn encode(agent: &Agent) -> Vec<u8> {
    let (config, store, cursor, alt_cursor, rng, last_time) = agent.parts();
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.push(match config.protocol {
        ProtocolKind::Core => 0,
        ProtocolKind::CoreStrongIntegrity => 1,
        ProtocolKind::AltSig => 2,
    });
    out.extend_from_slice(&last_time.to_be_bytes());
    out.extend_from_slice(&cursor.to_be_bytes());
    out.extend_from_slice(&alt_cursor.to_be_bytes());
    out.extend_from_slice(&rng.get_seed());
    out.extend_from_slice(&rng.get_word_pos().to_be_bytes());

    // Identity section.
    let mut identity = Vec::new();
    if let Some((chain, keypair)) = agent.chain_state() {
        identity.push(0);
        let chain_bytes = chain.encode();
        identity.extend_from_slice(&(chain_bytes.len() as u32).to_be_bytes());
        identity.extend_from_slice(&chain_bytes);
        match keypair {
            Some(kp) => {
                identity.push(1);
                identity.extend_from_slice(&kp.secret_bytes());
            }
            None => identity.push(0),
        }
    } else if let Some(keyring) = agent.keyring() {
        identity.push(1);
        identity.extend_from_slice(&keyring.encode());
    }
    section(&mut out, &identity);

    // Store section.
    let mut body = Vec::new();
    let core = store.core_observations();
    body.extend_from_slice(&(core.len() as u32).to_be_bytes());
    body.push(config.params.id_len() as u8);
    for obs in core {
        body.extend_from_slice(obs.id.as_bytes());
        body.extend_from_slice(&obs.heard_at.to_be_bytes());
    }
    let buckets = store.alt_buckets();
    body.extend_from_slice(&(buckets.len() as u32).to_be_bytes());
    for (day, triples) in buckets {
        body.extend_from_slice(&day.to_be_bytes());
        body.extend_from_slice(&(triples.len() as u32).to_be_bytes());
        for t in triples {
            body.extend_from_slice(&t.sigma);
            body.extend_from_slice(&t.big_r);
            body.extend_from_slice(&t.h);
        }
    }
    section(&mut out, &body);
    out
}

fn decode(config: AgentConfig, bytes: &[u8]) -> Result<Agent, AgentError> {
    let mut r = Reader(bytes);
    if r.take(6)? != MAGIC {
        return Err(AgentError::BadSnapshot);
    }
    let protocol = match r.u8()? {
        0 => ProtocolKind::Core,
        1 => ProtocolKind::CoreStrongIntegrity,
        2 => ProtocolKind::AltSig,
        _ => return Err(AgentError::BadSnapshot),
    };
    if protocol != config.protocol {
        return Err(AgentError::BadSnapshot);
    }
    let last_time = r.u64()?;
    let cursor = r.u64()?;
    let alt_cursor = r.u64()?;
    let seed: [u8; 32] = r.take(32)?.try_into().unwrap();
    let word_pos = u128::from_be_bytes(r.take(16)?.try_into().unwrap());
    let mut rng = ChaCha20Rng::from_seed(seed);
    rng.set_word_pos(word_pos);

    let identity = r.section()?;
    let (core_identity, alt_identity) = match identity.first() {
        Some(0) => {
            let mut ir = Reader(&identity[1..]);
            let chain_len = ir.u32()? as usize;
            let chain = ChainState::decode(ir.take(chain_len)?).ok_or(AgentError::BadSnapshot)?;
            let keypair = match ir.u8()? {
                1 => {
                    let secret: [u8; 32] = ir.take(32)?.try_into().unwrap();
                    Some(SiKeyPair::from_entropy(&secret))
                }
                _ => None,
            };
            (Some((chain, keypair)), None)
        }
        Some(1) => {
            let keyring = DailyKeyring::decode(&identity[1..]).ok_or(AgentError::BadSnapshot)?;
            (None, Some(keyring))
        }
        _ => return Err(AgentError::BadSnapshot),
    };

    let store_bytes = r.section()?;
    let mut sr = Reader(store_bytes);
    let core_count = sr.u32()? as usize;
    let id_len = sr.u8()? as usize;
    let mut core = Vec::with_capacity(core_count);
    for _ in 0..core_count {
        let id = PseudonymId::from_bytes(sr.take(id_len)?);
        let heard_at = sr.u64()?;
        core.push(Observation { id, heard_at });
    }
    let bucket_count = sr.u32()? as usize;
    let mut alt = std::collections::BTreeMap::new();
    for _ in 0..bucket_count {
        let day = sr.u64()?;
        let count = sr.u32()? as usize;
        let mut triples = Vec::with_capacity(count);
        for _ in 0..count {
            triples.push(StoredId {
                sigma: sr.take(64)?.try_into().unwrap(),
                big_r: sr.take(16)?.try_into().unwrap(),
                h: sr.take(16)?.try_into().unwrap(),
            });
        }
        alt.insert(day, triples);
    }
    let store = ObservationStore::from_parts(core, alt, &config.params);

    Agent::assemble(
        config,
        core_identity,
        alt_identity,
        store,
        cursor,
        alt_cursor,
        rng,
        last_time,
    )
}

struct Reader<'a>(&'a [u8]);

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], AgentError> {
        if self.0.len() < n {
            return Err(AgentError::BadSnapshot);
        }
        let (head, rest) = self.0.split_at(n);
        self.0 = rest;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8, AgentError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, AgentError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, AgentError> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn section(&mut self) -> Result<&'a [u8], AgentError> {
        let len = self.u32()? as usize;
        self.take(len)
    }
}
