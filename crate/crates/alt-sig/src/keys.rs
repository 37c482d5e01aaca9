use std::collections::BTreeMap;

use ed25519_dalek::{Signature, Signer, SigningKey};
use rand::RngCore;

use crate::AltError;

pub const SECONDS_PER_DAY: u64 = 86_400;

/// One day's key pair. The verification key stays secret until reported;
/// the signing key lives only while the day is current.
pub struct DailyKey {
    day: u64,
    signing: Option<SigningKey>,
    verifying: [u8; 32],
}

impl DailyKey {
    pub fn day(&self) -> u64 {
        self.day
    }

    pub fn verifying_key(&self) -> [u8; 32] {
        self.verifying
    }

    pub fn can_sign(&self) -> bool {
        self.signing.is_some()
    }

    pub(crate) fn sign(&self, message: &[u8]) -> Result<Signature, AltError> {
        match &self.signing {
            Some(sk) => Ok(sk.sign(message)),
            None => Err(AltError::KeyErased { day: self.day }),
        }
    }
}

/// A device's rolling set of daily keys. Exactly one signing key is live at
/// a time; verification keys are retained for the infection window so a
/// report can cover it, then pruned.
pub struct DailyKeyring {
    keys: BTreeMap<u64, DailyKey>,
    window_days: u64,
}

impl DailyKeyring {
    pub fn new(window_days: u64) -> Self {
        DailyKeyring {
            keys: BTreeMap::new(),
            window_days: window_days.max(1),
        }
    }

    /// Day index for a wall time (UTC midnight boundaries).
    pub fn day_of(t: u64) -> u64 {
        t / SECONDS_PER_DAY
    }

    /// Returns the key for `day`, generating it if needed. Idempotent within
    /// a day: a device restart must not fragment the day's identity. Rolling
    /// to a new day erases every older signing key and prunes verification
    /// keys that have left the window.
    pub fn keygen(&mut self, day: u64, rng: &mut impl RngCore) -> &DailyKey {
        self.keys.entry(day).or_insert_with(|| {
            let mut entropy = [0u8; 32];
            rng.fill_bytes(&mut entropy);
            let sk = SigningKey::from_bytes(&entropy);
            let vk = sk.verifying_key().to_bytes();
            DailyKey {
                day,
                signing: Some(sk),
                verifying: vk,
            }
        });
        let newest = *self.keys.keys().next_back().expect("just inserted");
        for (d, key) in self.keys.iter_mut() {
            if *d < newest {
                key.signing = None;
            }
        }
        let horizon = newest.saturating_sub(self.window_days - 1);
        self.keys.retain(|d, _| *d >= horizon);
        &self.keys[&day]
    }

    pub fn key_for(&self, day: u64) -> Option<&DailyKey> {
        self.keys.get(&day)
    }

    /// Verification keys covering the infection window ending at `day`,
    /// oldest first.
    pub fn window_keys(&self, day: u64) -> Vec<[u8; 32]> {
        let horizon = day.saturating_sub(self.window_days - 1);
        self.keys
            .range(horizon..=day)
            .map(|(_, k)| k.verifying)
            .collect()
    }

    /// Drops everything: called after reporting, when the device restarts
    /// its identity from scratch.
    pub fn reset(&mut self) {
        self.keys.clear();
    }

    /// Binary form for device snapshots. Contains the live signing secret;
    /// at-rest protection is the caller's concern.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&self.window_days.to_be_bytes());
        out.extend_from_slice(&(self.keys.len() as u16).to_be_bytes());
        for (day, key) in &self.keys {
            out.extend_from_slice(&day.to_be_bytes());
            match &key.signing {
                Some(sk) => {
                    out.push(1);
                    out.extend_from_slice(sk.as_bytes());
                }
                None => out.push(0),
            }
            out.extend_from_slice(&key.verifying);
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Option<DailyKeyring> {
        if bytes.len() < 10 {
            return None;
        }
        let window_days = u64::from_be_bytes(bytes[..8].try_into().unwrap());
        let count = u16::from_be_bytes(bytes[8..10].try_into().unwrap()) as usize;
        let mut keys = BTreeMap::new();
        let mut off = 10;
        for _ in 0..count {
            let day = u64::from_be_bytes(bytes.get(off..off + 8)?.try_into().unwrap());
            off += 8;
            let has_sk = *bytes.get(off)?;
            off += 1;
            let signing = if has_sk == 1 {
                let sk: [u8; 32] = bytes.get(off..off + 32)?.try_into().unwrap();
                off += 32;
                Some(SigningKey::from_bytes(&sk))
            } else {
                None
            };
            let verifying: [u8; 32] = bytes.get(off..off + 32)?.try_into().unwrap();
            off += 32;
            keys.insert(
                day,
                DailyKey {
                    day,
                    signing,
                    verifying,
                },
            );
        }
        if off != bytes.len() {
            return None;
        }
        Some(DailyKeyring { keys, window_days })
    }
}
