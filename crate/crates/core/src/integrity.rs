//! Strong integrity: binding a verification key into every chain step so a
//! published window seed cannot be peeled and re-reported by a third party.
//!
//! The weakness in the base protocol: given a published `S*`, anyone can
//! take the first half of `G(S*)` as their own "window seed" and re-report
//! a suffix of the same window. Here each step hashes `S_{i−1} ‖ vk`, and an
//! entry carries `vk` plus a self-signature over `(S*, t_start, t_end, vk)`;
//! re-reporting a derived seed fails because the attacker cannot sign under
//! the original vk, and signing under their own vk changes every regenerated
//! id.

use ed25519_dalek::{Signature, Signer, SigningKey, Verifier, VerifyingKey};

use crate::chain::{self, ChainError, ChainState};
use crate::entry::{Entry, SiBlock};
use crate::params::Params;
use crate::types::{PseudonymId, Seed};

/// Ed25519 key pair fixed for the lifetime of one chain.
#[derive(Debug, Clone)]
pub struct SiKeyPair {
    signing: SigningKey,
}

impl SiKeyPair {
    /// Derives the pair from 32 bytes of caller-supplied entropy.
    pub fn from_entropy(entropy: &[u8; 32]) -> Self {
        SiKeyPair {
            signing: SigningKey::from_bytes(entropy),
        }
    }

    pub fn verifying_key_bytes(&self) -> [u8; 32] {
        self.signing.verifying_key().to_bytes()
    }

    /// Detached signature over arbitrary bytes (whitelist signatures, test
    /// fixtures).
    pub fn sign_raw(&self, message: &[u8]) -> Vec<u8> {
        self.signing.sign(message).to_bytes().to_vec()
    }

    /// The 32-byte secret, for device snapshots.
    pub fn secret_bytes(&self) -> [u8; 32] {
        self.signing.to_bytes()
    }
}

/// One chain step with the vk folded into the PRG input:
/// `(S_i, id_i) ← G(S_{i−1} ‖ vk)`.
pub fn derive_next_bound(
    seed: &Seed,
    vk: &[u8; 32],
    params: &Params,
) -> Result<(Seed, PseudonymId), ChainError> {
    crate::prg::step(seed, vk, params)
}

/// `init_chain` with every step bound to `vk`.
pub fn init_chain_bound(
    params: &Params,
    entropy: &[u8],
    vk: &[u8; 32],
    skip_to_delta: bool,
    now: u64,
) -> Result<ChainState, ChainError> {
    chain::init_inner(params, entropy, vk, skip_to_delta, now)
}

/// `advance` with every step bound to `vk`. The vk must be the one the chain
/// was initialized under, or regenerated ids will not match any broadcast.
pub fn advance_bound(
    state: &ChainState,
    now: u64,
    vk: &[u8; 32],
    params: &Params,
) -> Result<(ChainState, PseudonymId), ChainError> {
    chain::advance_inner(state, now, vk, params)
}

/// Attaches the vk and self-signature to an entry, making it a
/// strong-integrity entry `(S*, t_start, t_end, vk, σ)`.
pub fn sign_entry(mut entry: Entry, keypair: &SiKeyPair) -> Entry {
    entry.si = Some(SiBlock {
        vk: keypair.verifying_key_bytes(),
        self_sig: Vec::new(),
    });
    let sig: Signature = keypair.signing.sign(&entry.signing_bytes());
    entry.si.as_mut().expect("just set").self_sig = sig.to_bytes().to_vec();
    entry
}

/// Checks the self-signature of a strong-integrity entry under its embedded
/// vk. Entries without an si block, with a malformed key, or with an invalid
/// signature are all `false`.
pub fn verify_entry_si(entry: &Entry) -> bool {
    let Some(si) = &entry.si else {
        return false;
    };
    let Ok(vk) = VerifyingKey::from_bytes(&si.vk) else {
        return false;
    };
    let sig_bytes: [u8; 64] = match si.self_sig.as_slice().try_into() {
        Ok(b) => b,
        Err(_) => return false,
    };
    let sig = Signature::from_bytes(&sig_bytes);
    vk.verify(&entry.signing_bytes(), &sig).is_ok()
}

/// Report construction for a bound chain: the entry carries the vk and
/// self-signature; the returned state is a fresh chain bound to `next_vk`
/// (a new pair per chain lifetime).
pub fn build_report_bound(
    state: &ChainState,
    keypair: &SiKeyPair,
    params: &Params,
    fresh_entropy: &[u8],
    next_vk: &[u8; 32],
    skip_to_delta: bool,
    now: u64,
) -> Result<(Entry, ChainState), ChainError> {
    let entry = Entry::new(
        state.window_seed().clone(),
        state.window_time(),
        state.current_time(),
    );
    let entry = sign_entry(entry, keypair);
    let fresh = init_chain_bound(params, fresh_entropy, next_vk, skip_to_delta, now)?;
    Ok((entry, fresh))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::regenerate;
    use crate::prg::derive_next;

    fn params() -> Params {
        Params::new(128, 900, 8, 0).unwrap()
    }

    fn keypair(byte: u8) -> SiKeyPair {
        SiKeyPair::from_entropy(&[byte; 32])
    }

    #[test]
    fn bound_steps_differ_from_plain_steps() {
        let p = params();
        let seed = Seed::from_bytes(vec![1u8; 16]);
        let vk = keypair(1).verifying_key_bytes();
        let plain = derive_next(&seed, &p).unwrap();
        let bound = derive_next_bound(&seed, &vk, &p).unwrap();
        assert_ne!(plain.1, bound.1);
    }

    #[test]
    fn honest_report_verifies_and_regenerates() {
        let p = params();
        let kp = keypair(2);
        let vk = kp.verifying_key_bytes();
        let mut state = init_chain_bound(&p, &[3u8; 16], &vk, false, 0).unwrap();
        let mut broadcast = vec![state.current_id().clone()];
        for epoch in 1..4u64 {
            let (next, id) = advance_bound(&state, epoch * 900, &vk, &p).unwrap();
            state = next;
            broadcast.push(id);
        }
        let next_kp = keypair(4);
        let (entry, _) = build_report_bound(
            &state,
            &kp,
            &p,
            &[5u8; 16],
            &next_kp.verifying_key_bytes(),
            false,
            4 * 900,
        )
        .unwrap();
        assert!(verify_entry_si(&entry));
        let regen: Vec<_> = regenerate(&entry, &p)
            .unwrap()
            .into_iter()
            .map(|t| t.id)
            .collect();
        assert_eq!(regen, broadcast);
    }

    #[test]
    fn derived_seed_rereport_fails_verification() {
        let p = params();
        let kp = keypair(6);
        let vk = kp.verifying_key_bytes();
        let state = init_chain_bound(&p, &[7u8; 16], &vk, false, 0).unwrap();
        let (entry, _) = build_report_bound(
            &state,
            &kp,
            &p,
            &[8u8; 16],
            &keypair(9).verifying_key_bytes(),
            false,
            900,
        )
        .unwrap();

        // The attack: take the first half of G(S*) as a new window seed and
        // re-report it. Without sk the signature cannot be produced.
        let (derived, _) = derive_next_bound(&entry.window_seed, &vk, &p).unwrap();
        let mut forged = entry.clone();
        forged.window_seed = derived;
        assert!(!verify_entry_si(&forged));

        // Signing under the attacker's own key passes the signature check but
        // regenerates under the wrong binding, so no honest id can match.
        let attacker = keypair(10);
        let mut reforged = Entry::new(forged.window_seed.clone(), entry.t_start, entry.t_end);
        reforged = sign_entry(reforged, &attacker);
        assert!(verify_entry_si(&reforged));
        let honest = regenerate(&entry, &p).unwrap();
        let forged_ids = regenerate(&reforged, &p).unwrap();
        for f in &forged_ids {
            assert!(honest.iter().all(|h| h.id != f.id));
        }
    }

    #[test]
    fn altered_window_bound_invalidates_signature() {
        let p = params();
        let kp = keypair(11);
        let state = init_chain_bound(&p, &[12u8; 16], &kp.verifying_key_bytes(), false, 0).unwrap();
        let entry = sign_entry(Entry::new(state.window_seed().clone(), 0, 900), &kp);
        assert!(verify_entry_si(&entry));
        let mut tampered = entry.clone();
        tampered.t_end += 3600;
        assert!(!verify_entry_si(&tampered));
    }
}
