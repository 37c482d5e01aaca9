//! Report entries: the `(S*, t_start, t_end)` tuple a positive user
//! publishes, optional binding to a verification key (strong integrity), and
//! any number of third-party signatures.
//!
//! Two byte encodings live here. The canonical binary encoding is what
//! signatures cover and what the registry persists:
//!
//! ```text
//! ENTRY := S* (n/8 bytes) ‖ t_start u64be ‖ t_end u64be ‖ VK_BLOCK ‖ SIG_BLOCK
//! VK_BLOCK := 0x00 | 0x01 ‖ vk (32) ‖ self_sig (64)
//! SIG_BLOCK := count u16be ‖ count × (cert_len u16be ‖ cert ‖ sig_len u16be ‖ sig)
//! ```
//!
//! The JSON presentation used by the service layer base64-encodes all byte
//! fields and is derived from the same struct via serde.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::Params;
use crate::types::Seed;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EntryError {
    #[error("t_start {t_start} is after t_end {t_end}")]
    InvertedWindow { t_start: u64, t_end: u64 },
    #[error("window seed must be {expected} bytes, got {got}")]
    SeedLength { expected: usize, got: usize },
    #[error("truncated or oversized entry encoding")]
    BadEncoding,
}

/// A third-party signature over the entry's signing bytes, keyed by the
/// certificate id the registry resolves against its whitelist.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntrySignature {
    pub cert_id: String,
    #[serde(with = "b64")]
    pub signature: Vec<u8>,
}

/// Strong-integrity block: the verification key baked into the chain steps
/// and the reporter's self-signature over `(S*, t_start, t_end, vk)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiBlock {
    #[serde(with = "b64_arr32")]
    pub vk: [u8; 32],
    #[serde(with = "b64")]
    pub self_sig: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    #[serde(with = "seed_b64")]
    pub window_seed: Seed,
    pub t_start: u64,
    pub t_end: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub si: Option<SiBlock>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub signatures: Vec<EntrySignature>,
}

impl Entry {
    pub fn new(window_seed: Seed, t_start: u64, t_end: u64) -> Self {
        Entry {
            window_seed,
            t_start,
            t_end,
            si: None,
            signatures: Vec::new(),
        }
    }

    /// Structural validity: ordered window with at most Δ·dt + dt of span
    /// (one epoch of slack for partial first/last epochs) and a seed of the
    /// configured width.
    pub fn validate(&self, params: &Params) -> Result<(), EntryError> {
        if self.t_start > self.t_end {
            return Err(EntryError::InvertedWindow {
                t_start: self.t_start,
                t_end: self.t_end,
            });
        }
        if self.window_seed.len() != params.id_len() {
            return Err(EntryError::SeedLength {
                expected: params.id_len(),
                got: self.window_seed.len(),
            });
        }
        Ok(())
    }

    /// True when the window span exceeds the protocol maximum.
    pub fn window_too_long(&self, params: &Params) -> bool {
        self.t_end - self.t_start > params.window_seconds() + params.epoch_seconds()
    }

    /// The bytes every signature (self or third-party) covers:
    /// `S* ‖ t_start ‖ t_end` plus the vk when the entry is key-bound.
    pub fn signing_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.window_seed.len() + 16 + 32);
        out.extend_from_slice(self.window_seed.as_bytes());
        out.extend_from_slice(&self.t_start.to_be_bytes());
        out.extend_from_slice(&self.t_end.to_be_bytes());
        if let Some(si) = &self.si {
            out.extend_from_slice(&si.vk);
        }
        out
    }

    pub fn encode_canonical(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(self.window_seed.as_bytes());
        out.extend_from_slice(&self.t_start.to_be_bytes());
        out.extend_from_slice(&self.t_end.to_be_bytes());
        match &self.si {
            None => out.push(0),
            Some(si) => {
                out.push(1);
                out.extend_from_slice(&si.vk);
                out.extend_from_slice(&si.self_sig);
            }
        }
        out.extend_from_slice(&(self.signatures.len() as u16).to_be_bytes());
        for sig in &self.signatures {
            let cert = sig.cert_id.as_bytes();
            out.extend_from_slice(&(cert.len() as u16).to_be_bytes());
            out.extend_from_slice(cert);
            out.extend_from_slice(&(sig.signature.len() as u16).to_be_bytes());
            out.extend_from_slice(&sig.signature);
        }
        out
    }

    pub fn decode_canonical(bytes: &[u8], params: &Params) -> Result<Entry, EntryError> {
        let mut r = Reader(bytes);
        let window_seed = Seed::from_bytes(r.take(params.id_len())?);
        let t_start = r.u64()?;
        let t_end = r.u64()?;
        let si = match r.u8()? {
            0 => None,
            1 => {
                let vk: [u8; 32] = r.take(32)?.try_into().unwrap();
                let self_sig = r.take(64)?.to_vec();
                Some(SiBlock { vk, self_sig })
            }
            _ => return Err(EntryError::BadEncoding),
        };
        let count = r.u16()? as usize;
        let mut signatures = Vec::with_capacity(count);
        for _ in 0..count {
            let cert_len = r.u16()? as usize;
            let cert_id = String::from_utf8(r.take(cert_len)?.to_vec())
                .map_err(|_| EntryError::BadEncoding)?;
            let sig_len = r.u16()? as usize;
            signatures.push(EntrySignature {
                cert_id,
                signature: r.take(sig_len)?.to_vec(),
            });
        }
        if !r.0.is_empty() {
            return Err(EntryError::BadEncoding);
        }
        let entry = Entry {
            window_seed,
            t_start,
            t_end,
            si,
            signatures,
        };
        entry.validate(params)?;
        Ok(entry)
    }
}

struct Reader<'a>(&'a [u8]);

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], EntryError> {
        if self.0.len() < n {
            return Err(EntryError::BadEncoding);
        }
        let (head, rest) = self.0.split_at(n);
        self.0 = rest;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8, EntryError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, EntryError> {
        Ok(u16::from_be_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, EntryError> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }
}

mod b64 {
    use base64::engine::general_purpose::STANDARD;
    use base64::Engine;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&STANDARD.encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let text = String::deserialize(d)?;
        STANDARD.decode(text).map_err(serde::de::Error::custom)
    }
}

mod b64_arr32 {
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8; 32], s: S) -> Result<S::Ok, S::Error> {
        super::b64::serialize(bytes, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[u8; 32], D::Error> {
        let v = super::b64::deserialize(d)?;
        v.try_into()
            .map_err(|_| serde::de::Error::custom("expected 32 bytes"))
    }
}

mod seed_b64 {
    use serde::{Deserializer, Serializer};

    use crate::types::Seed;

    pub fn serialize<S: Serializer>(seed: &Seed, s: S) -> Result<S::Ok, S::Error> {
        super::b64::serialize(seed.as_bytes(), s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Seed, D::Error> {
        Ok(Seed::from_bytes(super::b64::deserialize(d)?))
    }
}
