use std::collections::HashMap;
use std::fs;
use std::path::Path;

use ed25519_dalek::{Signature, Signer, SigningKey, Verifier, VerifyingKey};
use serde::{Deserialize, Serialize};

use crate::geo::{
    area_intersects_region, cells_overlapping_region, covering_cells, region_of, Area, GeoError,
    Region,
};

/// Recognized announcers: certificate id to verification key. The whole PKI,
/// as with the report registry, is a static whitelist file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct AuthorityWhitelist {
    keys: HashMap<String, String>, // cert id -> hex vk
}

impl AuthorityWhitelist {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, cert_id: impl Into<String>, vk: [u8; 32]) {
        self.keys.insert(cert_id.into(), hex::encode(vk));
    }

    pub fn key_of(&self, cert_id: &str) -> Option<[u8; 32]> {
        let hexed = self.keys.get(cert_id)?;
        let bytes = hex::decode(hexed).ok()?;
        bytes.try_into().ok()
    }

    pub fn load(path: &Path) -> std::io::Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(std::io::Error::other)
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        fs::write(
            path,
            serde_json::to_string_pretty(self).expect("serializable"),
        )
    }
}

/// A stored announcement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NarrowcastEntry {
    pub area: Area,
    #[serde(with = "b64")]
    pub message: Vec<u8>,
    #[serde(with = "b64")]
    pub signature: Vec<u8>,
    pub signer: String,
    pub received_at: u64,
}

/// One query result: an (area, message) pair plus the server receipt time
/// clients resume from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageHit {
    pub area: Area,
    #[serde(with = "b64")]
    pub message: Vec<u8>,
    pub received_at: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnnounceReason {
    Unauthorized,
    BadSignature,
    Radius,
    InvalidArea,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum AnnounceOutcome {
    Accepted,
    Rejected { reason: AnnounceReason },
}

/// The canonical bytes an announcement signature covers: fixed-point
/// coordinates in 1e-7 degree units (i64), radius in whole meters (u32),
/// the validity window (u64 seconds), then the message bytes.
pub fn announcement_signing_bytes(area: &Area, message: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(28 + message.len());
    out.extend_from_slice(&((area.lat * 1e7).round() as i64).to_be_bytes());
    out.extend_from_slice(&((area.lon * 1e7).round() as i64).to_be_bytes());
    out.extend_from_slice(&(area.radius_m.round() as u32).to_be_bytes());
    out.extend_from_slice(&area.t_begin.to_be_bytes());
    out.extend_from_slice(&area.t_end.to_be_bytes());
    out.extend_from_slice(message);
    out
}

/// Convenience for authorities: sign an announcement with a raw key.
pub fn sign_announcement(area: &Area, message: &[u8], key: &SigningKey) -> Vec<u8> {
    key.sign(&announcement_signing_bytes(area, message))
        .to_bytes()
        .to_vec()
}

pub struct Narrowcast {
    whitelist: AuthorityWhitelist,
    entries: Vec<NarrowcastEntry>,
    index: HashMap<(i64, i64), Vec<usize>>,
    index_lat_bits: u8,
    index_lon_bits: u8,
}

impl Narrowcast {
    /// Index grid fixed at 8 bits of latitude, 9 of longitude — roughly
    /// whole-degree cells, coarser than typical IP geolocation.
    pub fn new(whitelist: AuthorityWhitelist) -> Self {
        Narrowcast {
            whitelist,
            entries: Vec::new(),
            index: HashMap::new(),
            index_lat_bits: 8,
            index_lon_bits: 9,
        }
    }

    pub fn whitelist(&self) -> &AuthorityWhitelist {
        &self.whitelist
    }

    pub fn entries(&self) -> &[NarrowcastEntry] {
        &self.entries
    }

    /// Validates and stores an announcement, indexing it under every grid
    /// cell its circle can touch.
    pub fn announce(
        &mut self,
        area: Area,
        message: Vec<u8>,
        signer: &str,
        signature: &[u8],
        now: u64,
    ) -> AnnounceOutcome {
        match area.validate() {
            Err(GeoError::Radius(_)) => {
                return AnnounceOutcome::Rejected {
                    reason: AnnounceReason::Radius,
                }
            }
            Err(_) => {
                return AnnounceOutcome::Rejected {
                    reason: AnnounceReason::InvalidArea,
                }
            }
            Ok(()) => {}
        }
        let Some(vk_bytes) = self.whitelist.key_of(signer) else {
            return AnnounceOutcome::Rejected {
                reason: AnnounceReason::Unauthorized,
            };
        };
        let Ok(vk) = VerifyingKey::from_bytes(&vk_bytes) else {
            return AnnounceOutcome::Rejected {
                reason: AnnounceReason::Unauthorized,
            };
        };
        let sig_bytes: [u8; 64] = match signature.try_into() {
            Ok(b) => b,
            Err(_) => {
                return AnnounceOutcome::Rejected {
                    reason: AnnounceReason::BadSignature,
                }
            }
        };
        let covers = announcement_signing_bytes(&area, &message);
        if vk
            .verify(&covers, &Signature::from_bytes(&sig_bytes))
            .is_err()
        {
            return AnnounceOutcome::Rejected {
                reason: AnnounceReason::BadSignature,
            };
        }

        let idx = self.entries.len();
        for cell in covering_cells(&area, self.index_lat_bits, self.index_lon_bits) {
            self.index.entry(cell).or_default().push(idx);
        }
        self.entries.push(NarrowcastEntry {
            area,
            message,
            signature: signature.to_vec(),
            signer: signer.to_string(),
            received_at: now,
        });
        AnnounceOutcome::Accepted
    }

    /// Everything received strictly after `since` whose area intersects the
    /// region. Served from the cell index; result order is receipt order.
    pub fn get_messages(&self, region: &Region, since: u64) -> Result<Vec<MessageHit>, GeoError> {
        region.validate()?;
        let mut candidates: Vec<usize> = Vec::new();
        for cell in cells_overlapping_region(region, self.index_lat_bits, self.index_lon_bits) {
            if let Some(list) = self.index.get(&cell) {
                candidates.extend_from_slice(list);
            }
        }
        candidates.sort_unstable();
        candidates.dedup();
        Ok(candidates
            .into_iter()
            .map(|i| &self.entries[i])
            .filter(|e| e.received_at > since && area_intersects_region(&e.area, region))
            .map(|e| MessageHit {
                area: e.area.clone(),
                message: e.message.clone(),
                received_at: e.received_at,
            })
            .collect())
    }

    /// The exact byte size of the response `get_messages` would produce for
    /// the same arguments (the JSON envelope the wire layer serves).
    pub fn how_big(&self, region: &Region, since: u64) -> Result<u64, GeoError> {
        let hits = self.get_messages(region, since)?;
        Ok(response_size(&hits))
    }
}

/// Serialized size of the messages envelope; shared by `how_big` and the
/// HTTP layer so "approximate" is in fact exact.
pub fn response_size(hits: &[MessageHit]) -> u64 {
    serde_json::to_vec(&serde_json::json!({ "messages": hits }))
        .expect("serializable")
        .len() as u64
}

/// A privately held (location, time) sample from the device's own log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub lat: f64,
    pub lon: f64,
    pub t: u64,
}

/// Client-side relevance check: which messages apply to a trace. The trace
/// never leaves the caller.
pub fn match_trace(trace: &[TracePoint], pairs: &[MessageHit]) -> Vec<Vec<u8>> {
    pairs
        .iter()
        .filter(|hit| {
            trace
                .iter()
                .any(|p| hit.area.contains_point(p.lat, p.lon, p.t))
        })
        .map(|hit| hit.message.clone())
        .collect()
}

/// The bandwidth/privacy negotiation loop: starting from the global region,
/// refine precision one bit at a time until the download fits the budget or
/// precision is exhausted. Returns the chosen region and its size.
pub fn negotiate_precision(
    lat: f64,
    lon: f64,
    budget_bytes: u64,
    max_bits: u8,
    mut size_of: impl FnMut(&Region) -> u64,
) -> Result<(Region, u64), GeoError> {
    let mut bits = 0u8;
    loop {
        let region = region_of(lat, lon, bits, bits.saturating_add(1).min(max_bits))?;
        let size = size_of(&region);
        if size <= budget_bytes || bits >= max_bits {
            return Ok((region, size));
        }
        bits += 1;
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
