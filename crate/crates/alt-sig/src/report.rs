use ed25519_dalek::VerifyingKey;

use crate::broadcast::{signed_message, verify_triple, StoredId};
use crate::AltError;

/// A positive report: the recent daily verification keys, oldest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AltReport {
    pub verification_keys: Vec<[u8; 32]>,
}

impl AltReport {
    /// Wire format: u16 big-endian count, then count × 32-byte keys.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(2 + self.verification_keys.len() * 32);
        out.extend_from_slice(&(self.verification_keys.len() as u16).to_be_bytes());
        for vk in &self.verification_keys {
            out.extend_from_slice(vk);
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<AltReport, AltError> {
        if bytes.len() < 2 {
            return Err(AltError::BadEncoding);
        }
        let count = u16::from_be_bytes(bytes[..2].try_into().unwrap()) as usize;
        let body = &bytes[2..];
        if body.len() != count * 32 {
            return Err(AltError::BadEncoding);
        }
        Ok(AltReport {
            verification_keys: body
                .chunks_exact(32)
                .map(|c| c.try_into().unwrap())
                .collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CheckOutcome {
    /// Indices into the stored-triple slice that verified under some
    /// reported key. A set: order-independent, no duplicates.
    pub matched: Vec<usize>,
    /// Reported keys that were not valid Ed25519 points; skipped, not fatal.
    pub malformed_keys: usize,
}

/// Exposure check: every stored triple against every reported key,
/// `Vrfy(vk, σ, R ‖ h)`.
pub fn check_exposure(stored: &[StoredId], report_keys: &[[u8; 32]]) -> CheckOutcome {
    let mut outcome = CheckOutcome::default();
    let keys = parse_keys(report_keys, &mut outcome.malformed_keys);
    for (idx, triple) in stored.iter().enumerate() {
        if keys.iter().any(|vk| verify_triple(vk, triple)) {
            outcome.matched.push(idx);
        }
    }
    outcome
}

/// Same result as [`check_exposure`], batching per reported key. Batch
/// verification only answers "do all of these verify", so the all-match
/// fast path applies when a store is dominated by one reporter's
/// broadcasts; any failing batch falls back to per-triple checks, keeping
/// the outcome identical by construction.
pub fn check_exposure_batch(stored: &[StoredId], report_keys: &[[u8; 32]]) -> CheckOutcome {
    let mut outcome = CheckOutcome::default();
    let keys = parse_keys(report_keys, &mut outcome.malformed_keys);
    let mut matched = vec![false; stored.len()];
    let messages: Vec<[u8; 32]> = stored
        .iter()
        .map(|s| signed_message(&s.big_r, &s.h))
        .collect();
    for vk in &keys {
        let pending: Vec<usize> = (0..stored.len()).filter(|i| !matched[*i]).collect();
        if pending.is_empty() {
            break;
        }
        let msgs: Vec<&[u8]> = pending.iter().map(|&i| messages[i].as_slice()).collect();
        let sigs: Vec<ed25519_dalek::Signature> = pending
            .iter()
            .map(|&i| ed25519_dalek::Signature::from_bytes(&stored[i].sigma))
            .collect();
        let vks = vec![*vk; pending.len()];
        if ed25519_dalek::verify_batch(&msgs, &sigs, &vks).is_ok() {
            for &i in &pending {
                matched[i] = true;
            }
        } else {
            for &i in &pending {
                if verify_triple(vk, &stored[i]) {
                    matched[i] = true;
                }
            }
        }
    }
    outcome.matched = matched
        .iter()
        .enumerate()
        .filter_map(|(i, m)| m.then_some(i))
        .collect();
    outcome
}

fn parse_keys(report_keys: &[[u8; 32]], malformed: &mut usize) -> Vec<VerifyingKey> {
    report_keys
        .iter()
        .filter_map(|bytes| match VerifyingKey::from_bytes(bytes) {
            Ok(vk) => Some(vk),
            Err(_) => {
                *malformed += 1;
                None
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::broadcast::make_broadcast;
    use crate::keys::DailyKeyring;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn report_wire_roundtrip() {
        let report = AltReport {
            verification_keys: vec![[1u8; 32], [2u8; 32]],
        };
        assert_eq!(AltReport::decode(&report.encode()).unwrap(), report);
        assert!(AltReport::decode(&[0]).is_err());
        assert!(AltReport::decode(&[0, 3, 1]).is_err());
    }

    #[test]
    fn stored_triple_from_reported_key_matches() {
        let mut ring = DailyKeyring::new(14);
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let key = ring.keygen(0, &mut rng);
        let vk = key.verifying_key();
        let stored = vec![make_broadcast(key, 50, &mut rng).unwrap().stored()];
        let outcome = check_exposure(&stored, &[vk]);
        assert_eq!(outcome.matched, vec![0]);
        assert_eq!(outcome.malformed_keys, 0);
    }

    #[test]
    fn empty_key_list_matches_nothing() {
        let mut ring = DailyKeyring::new(14);
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let key = ring.keygen(0, &mut rng);
        let stored = vec![make_broadcast(key, 10, &mut rng).unwrap().stored()];
        assert!(check_exposure(&stored, &[]).matched.is_empty());
    }

    #[test]
    fn malformed_keys_are_counted_not_fatal() {
        let mut ring = DailyKeyring::new(14);
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let key = ring.keygen(0, &mut rng);
        let vk = key.verifying_key();
        let stored = vec![make_broadcast(key, 10, &mut rng).unwrap().stored()];
        // Not a decodable curve point.
        let outcome = check_exposure(&stored, &[[2u8; 32], vk]);
        assert_eq!(outcome.malformed_keys, 1);
        assert_eq!(outcome.matched, vec![0]);
    }

    #[test]
    fn batch_path_equals_single_path() {
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let mut ring_a = DailyKeyring::new(14);
        let mut ring_b = DailyKeyring::new(14);
        let vk_a = {
            let k = ring_a.keygen(0, &mut rng);
            k.verifying_key()
        };
        let mut stored = Vec::new();
        for i in 0..6 {
            let k = ring_a.key_for(0).unwrap();
            stored.push(make_broadcast(k, 10 + i, &mut rng).unwrap().stored());
        }
        for i in 0..5 {
            let k = ring_b.keygen(0, &mut rng);
            stored.push(make_broadcast(k, 20 + i, &mut rng).unwrap().stored());
        }
        let single = check_exposure(&stored, &[vk_a]);
        let batched = check_exposure_batch(&stored, &[vk_a]);
        assert_eq!(single, batched);
        assert_eq!(single.matched, vec![0, 1, 2, 3, 4, 5]);

        // All-match fast path.
        let all_a: Vec<_> = stored[..6].to_vec();
        assert_eq!(
            check_exposure(&all_a, &[vk_a]),
            check_exposure_batch(&all_a, &[vk_a])
        );
    }
}
