//! Protocol-level properties: replay rejection under fuzzed inputs,
//! day-scoped key validity, one-wayness and unlinkability proxies.

use pact_alt_sig::{
    check_exposure, make_broadcast, validate_broadcast, AltBroadcast, DailyKeyring, StoredId,
    DEFAULT_TOLERANCE_SECONDS, SECONDS_PER_DAY,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// A reported key validates all and only that day's broadcasts from the
/// reporting device.
#[test]
fn reported_key_scopes_to_its_day() {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let mut ring = DailyKeyring::new(14);
    let vk_day0 = ring.keygen(0, &mut rng).verifying_key();
    let day0: Vec<StoredId> = (0..4)
        .map(|i| {
            make_broadcast(ring.key_for(0).unwrap(), 100 + i, &mut rng)
                .unwrap()
                .stored()
        })
        .collect();
    ring.keygen(1, &mut rng);
    let day1: Vec<StoredId> = (0..4)
        .map(|i| {
            make_broadcast(ring.key_for(1).unwrap(), SECONDS_PER_DAY + i, &mut rng)
                .unwrap()
                .stored()
        })
        .collect();

    let mut stored = day0.clone();
    stored.extend(day1.clone());
    let outcome = check_exposure(&stored, &[vk_day0]);
    assert_eq!(outcome.matched, vec![0, 1, 2, 3]);
}

/// One-wayness proxy: a stored triple from an unreported device never
/// verifies under 10⁴ fresh keys.
#[test]
fn unreported_triple_never_matches_other_keys() {
    let mut rng = ChaCha20Rng::seed_from_u64(12);
    let mut ring = DailyKeyring::new(14);
    let key = ring.keygen(0, &mut rng);
    let stored = vec![make_broadcast(key, 500, &mut rng).unwrap().stored()];

    let mut other = DailyKeyring::new(20_000);
    let mut guesses = Vec::with_capacity(10_000);
    for day in 1..=10_000u64 {
        guesses.push(other.keygen(day, &mut rng).verifying_key());
    }
    let outcome = check_exposure(&stored, &guesses);
    assert!(outcome.matched.is_empty());
    assert_eq!(outcome.malformed_keys, 0);
}

/// Unlinkability proxy: across two days, no field of the same device's
/// broadcasts repeats.
#[test]
fn broadcasts_share_no_fields_across_days() {
    let mut rng = ChaCha20Rng::seed_from_u64(13);
    let mut ring = DailyKeyring::new(14);
    ring.keygen(0, &mut rng);
    let a = make_broadcast(ring.key_for(0).unwrap(), 10, &mut rng).unwrap();
    ring.keygen(1, &mut rng);
    let b = make_broadcast(ring.key_for(1).unwrap(), SECONDS_PER_DAY + 10, &mut rng).unwrap();
    assert_ne!(a.sigma, b.sigma);
    assert_ne!(a.big_r, b.big_r);
    assert_ne!(a.h, b.h);
    assert_ne!(a.r, b.r);
}

/// The stored form is exactly the 96-byte triple; no timestamp survives
/// collection.
#[test]
fn stored_form_carries_no_time() {
    let mut rng = ChaCha20Rng::seed_from_u64(14);
    let mut ring = DailyKeyring::new(14);
    let key = ring.keygen(0, &mut rng);
    let b = make_broadcast(key, 4242, &mut rng).unwrap();
    let stored = b.stored();
    let mut bytes = Vec::new();
    bytes.extend_from_slice(&stored.sigma);
    bytes.extend_from_slice(&stored.big_r);
    bytes.extend_from_slice(&stored.h);
    assert_eq!(bytes.len(), 96);
    assert!(!bytes.windows(8).any(|w| w == 4242u64.to_be_bytes()));
}

proptest! {
    /// Replay rejection: any broadcast whose revealed time strays beyond the
    /// tolerance is never accepted, for all fuzzed inputs.
    #[test]
    fn stale_broadcasts_never_validate(
        t in 0u64..u64::MAX / 2,
        offset in DEFAULT_TOLERANCE_SECONDS + 1..1_000_000u64,
        later in any::<bool>(),
        sigma in any::<[u8; 32]>(),
        r in any::<[u8; 16]>(),
        big_r in any::<[u8; 16]>(),
    ) {
        let h = pact_alt_sig::commit_hash(&r, t);
        let mut full_sigma = [0u8; 64];
        full_sigma[..32].copy_from_slice(&sigma);
        full_sigma[32..].copy_from_slice(&sigma);
        let b = AltBroadcast { sigma: full_sigma, big_r, h, r, t };
        let now = if later { t.saturating_add(offset) } else { t.saturating_sub(offset) };
        // saturating_sub can collapse the offset at t=0; only assert when
        // the clock distance really exceeds the tolerance.
        if now.abs_diff(t) > DEFAULT_TOLERANCE_SECONDS {
            prop_assert!(!validate_broadcast(&b, now, DEFAULT_TOLERANCE_SECONDS));
        }
    }

    /// Within tolerance, validation reduces to the commitment check.
    #[test]
    fn fresh_broadcasts_validate_iff_commitment_opens(
        t in 0u64..u64::MAX / 2,
        skew in 0u64..=DEFAULT_TOLERANCE_SECONDS,
        tamper in any::<bool>(),
        r in any::<[u8; 16]>(),
        big_r in any::<[u8; 16]>(),
    ) {
        let mut h = pact_alt_sig::commit_hash(&r, t);
        if tamper {
            h[3] ^= 0x10;
        }
        let b = AltBroadcast { sigma: [0u8; 64], big_r, h, r, t };
        prop_assert_eq!(validate_broadcast(&b, t + skew, DEFAULT_TOLERANCE_SECONDS), !tamper);
    }
}
