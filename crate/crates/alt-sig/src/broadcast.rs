use ed25519_dalek::{Signature, Verifier, VerifyingKey};
use rand::RngCore;
use sha2::{Digest, Sha256};

use crate::keys::{DailyKey, DailyKeyring};
use crate::AltError;

/// Wire length of one broadcast: σ(64) ‖ R(16) ‖ h(16) ‖ r(16) ‖ t(8).
pub const BROADCAST_WIRE_LEN: usize = 64 + 16 + 16 + 16 + 8;

/// One broadcast identifier `id = (σ, R, h)` together with the revealed
/// commitment opening `(r, t)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AltBroadcast {
    pub sigma: [u8; 64],
    pub big_r: [u8; 16],
    pub h: [u8; 16],
    pub r: [u8; 16],
    pub t: u64,
}

/// What a collector keeps: the identifier triple only. Deliberately no
/// timestamp field — stored data must not reveal when the interaction
/// happened.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StoredId {
    pub sigma: [u8; 64],
    pub big_r: [u8; 16],
    pub h: [u8; 16],
}

/// `H(k, x) = SHA-256(k ‖ x)` truncated to the id width, with the timestamp
/// as 64-bit big-endian seconds.
pub fn commit_hash(r: &[u8; 16], t: u64) -> [u8; 16] {
    let mut hasher = Sha256::new();
    hasher.update(r);
    hasher.update(t.to_be_bytes());
    let digest = hasher.finalize();
    digest[..16].try_into().expect("digest is 32 bytes")
}

/// Builds a fresh broadcast for wall time `t` under the given daily key:
/// new `R` and `r` every call, `h = H(r, t)`, `σ = Sign(sk_d, R ‖ h)`.
pub fn make_broadcast(
    key: &DailyKey,
    t: u64,
    rng: &mut impl RngCore,
) -> Result<AltBroadcast, AltError> {
    if DailyKeyring::day_of(t) != key.day() {
        return Err(AltError::WrongDay { t, day: key.day() });
    }
    let mut big_r = [0u8; 16];
    let mut r = [0u8; 16];
    rng.fill_bytes(&mut big_r);
    rng.fill_bytes(&mut r);
    let h = commit_hash(&r, t);
    let sigma = key.sign(&signed_message(&big_r, &h))?;
    Ok(AltBroadcast {
        sigma: sigma.to_bytes(),
        big_r,
        h,
        r,
        t,
    })
}

/// Collection-time validation: the revealed timestamp must be within
/// `tolerance` of the hearer's clock and the hash commitment must open
/// correctly. Rejection is a normal outcome, not an error.
pub fn validate_broadcast(b: &AltBroadcast, now: u64, tolerance: u64) -> bool {
    now.abs_diff(b.t) <= tolerance && commit_hash(&b.r, b.t) == b.h
}

pub(crate) fn signed_message(big_r: &[u8; 16], h: &[u8; 16]) -> [u8; 32] {
    let mut msg = [0u8; 32];
    msg[..16].copy_from_slice(big_r);
    msg[16..].copy_from_slice(h);
    msg
}

pub(crate) fn verify_triple(vk: &VerifyingKey, stored: &StoredId) -> bool {
    let sig = Signature::from_bytes(&stored.sigma);
    vk.verify(&signed_message(&stored.big_r, &stored.h), &sig)
        .is_ok()
}

impl AltBroadcast {
    pub fn stored(&self) -> StoredId {
        StoredId {
            sigma: self.sigma,
            big_r: self.big_r,
            h: self.h,
        }
    }

    pub fn encode(&self) -> [u8; BROADCAST_WIRE_LEN] {
        let mut out = [0u8; BROADCAST_WIRE_LEN];
        out[..64].copy_from_slice(&self.sigma);
        out[64..80].copy_from_slice(&self.big_r);
        out[80..96].copy_from_slice(&self.h);
        out[96..112].copy_from_slice(&self.r);
        out[112..].copy_from_slice(&self.t.to_be_bytes());
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<AltBroadcast, AltError> {
        if bytes.len() != BROADCAST_WIRE_LEN {
            return Err(AltError::BadEncoding);
        }
        Ok(AltBroadcast {
            sigma: bytes[..64].try_into().unwrap(),
            big_r: bytes[64..80].try_into().unwrap(),
            h: bytes[80..96].try_into().unwrap(),
            r: bytes[96..112].try_into().unwrap(),
            t: u64::from_be_bytes(bytes[112..].try_into().unwrap()),
        })
    }
}
