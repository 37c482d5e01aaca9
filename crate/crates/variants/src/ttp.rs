//! The centralized scheme: a trusted third party issues registration tokens
//! and every broadcast is a fresh randomized encryption of the owner's
//! token. Only the TTP (holding the decryption key) can map an id back to a
//! user — which is simultaneously the efficiency trick and the trust
//! problem.

use std::collections::HashMap;

use rand::RngCore;

use crate::dual::take_part;
use crate::group::Group;
use crate::VariantError;

/// A user's registration token: a random group element the TTP remembers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TtpToken<G: Group> {
    pub element: G::Elem,
}

/// A broadcast id: an ElGamal-style encryption `(g^k, τ·pk^k)` of the token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TtpId<G: Group> {
    pub c1: G::Elem,
    pub c2: G::Elem,
}

pub struct TtpState<G: Group> {
    secret: G::Scalar,
    public: G::Elem,
    tokens: HashMap<Vec<u8>, String>,
}

impl<G: Group> TtpState<G> {
    pub fn new(group: &G, rng: &mut dyn RngCore) -> Self {
        let secret = group.random_scalar(rng);
        let public = group.pow(&group.generator(), &secret);
        TtpState {
            secret,
            public,
            tokens: HashMap::new(),
        }
    }

    pub fn public_key(&self) -> &G::Elem {
        &self.public
    }

    /// Registers a user and returns their token. Tokens are random group
    /// elements; a clash with an existing token is re-drawn (toy groups are
    /// small enough to run out, hence the error).
    pub fn register(
        &mut self,
        group: &G,
        user: &str,
        rng: &mut dyn RngCore,
    ) -> Result<TtpToken<G>, VariantError> {
        for _ in 0..1000 {
            let exponent = group.random_scalar(rng);
            let element = group.pow(&group.generator(), &exponent);
            let key = group.encode(&element);
            if let std::collections::hash_map::Entry::Vacant(e) = self.tokens.entry(key) {
                e.insert(user.to_string());
                return Ok(TtpToken { element });
            }
        }
        Err(VariantError::TokenSpaceExhausted)
    }

    /// Decrypts an id and looks the token up: `Some(user)` for a registered
    /// token, `None` for a well-formed id under the wrong key or an unknown
    /// token.
    pub fn identify(&self, group: &G, id: &TtpId<G>) -> Option<&str> {
        let shared = group.pow(&id.c1, &group.neg_scalar(&self.secret));
        let token = group.mul(&id.c2, &shared);
        self.tokens.get(&group.encode(&token)).map(String::as_str)
    }
}

/// A fresh randomized encryption of `token` under the TTP's public key;
/// every call yields an independent-looking ciphertext.
pub fn make_id<G: Group>(
    group: &G,
    public_key: &G::Elem,
    token: &TtpToken<G>,
    rng: &mut dyn RngCore,
) -> TtpId<G> {
    let k = group.random_scalar(rng);
    TtpId {
        c1: group.pow(&group.generator(), &k),
        c2: group.mul(&token.element, &group.pow(public_key, &k)),
    }
}

impl<G: Group> TtpId<G> {
    pub fn encode(&self, group: &G) -> Vec<u8> {
        let c1 = group.encode(&self.c1);
        let c2 = group.encode(&self.c2);
        let mut out = Vec::with_capacity(4 + c1.len() + c2.len());
        out.extend_from_slice(&(c1.len() as u16).to_be_bytes());
        out.extend_from_slice(&c1);
        out.extend_from_slice(&(c2.len() as u16).to_be_bytes());
        out.extend_from_slice(&c2);
        out
    }

    /// Malformed bytes (anything that does not decode to two group
    /// elements) are a decryption failure.
    pub fn decode(group: &G, bytes: &[u8]) -> Result<Self, VariantError> {
        let (c1, rest) = take_part(bytes)?;
        let (c2, rest) = take_part(rest)?;
        if !rest.is_empty() {
            return Err(VariantError::MalformedElement);
        }
        Ok(TtpId {
            c1: group.decode(c1)?,
            c2: group.decode(c2)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{RistrettoGroup, ToyGroup};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn register_make_identify_roundtrip() {
        let g = ToyGroup::new(23, 5).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(30);
        let mut ttp = TtpState::new(&g, &mut rng);
        let token = ttp.register(&g, "alice", &mut rng).unwrap();
        let pk = *ttp.public_key();
        let id = make_id(&g, &pk, &token, &mut rng);
        assert_eq!(ttp.identify(&g, &id), Some("alice"));
    }

    #[test]
    fn encryption_is_randomized() {
        let g = RistrettoGroup;
        let mut rng = ChaCha20Rng::seed_from_u64(31);
        let mut ttp = TtpState::new(&g, &mut rng);
        let token = ttp.register(&g, "bob", &mut rng).unwrap();
        let pk = *ttp.public_key();
        let a = make_id(&g, &pk, &token, &mut rng);
        let b = make_id(&g, &pk, &token, &mut rng);
        assert_ne!(a, b);
        assert_eq!(ttp.identify(&g, &a), Some("bob"));
        assert_eq!(ttp.identify(&g, &b), Some("bob"));
    }

    #[test]
    fn foreign_key_ids_are_unidentified() {
        let g = RistrettoGroup;
        let mut rng = ChaCha20Rng::seed_from_u64(32);
        let mut ours = TtpState::new(&g, &mut rng);
        let mut theirs = TtpState::new(&g, &mut rng);
        let token = theirs.register(&g, "carol", &mut rng).unwrap();
        let _ = ours.register(&g, "carol", &mut rng).unwrap();
        let foreign_pk = *theirs.public_key();
        let id = make_id(&g, &foreign_pk, &token, &mut rng);
        assert_eq!(ours.identify(&g, &id), None);
    }

    #[test]
    fn malformed_ids_error_on_decode() {
        let g = ToyGroup::new(23, 5).unwrap();
        assert_eq!(
            TtpId::<ToyGroup>::decode(&g, &[0, 1]).unwrap_err(),
            VariantError::MalformedElement
        );
        let mut rng = ChaCha20Rng::seed_from_u64(33);
        let mut ttp = TtpState::new(&g, &mut rng);
        let token = ttp.register(&g, "dan", &mut rng).unwrap();
        let pk = *ttp.public_key();
        let id = make_id(&g, &pk, &token, &mut rng);
        let decoded = TtpId::decode(&g, &id.encode(&g)).unwrap();
        assert_eq!(decoded, id);
    }

    #[test]
    fn token_space_exhaustion_is_detected() {
        let g = ToyGroup::new(23, 5).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(34);
        let mut ttp = TtpState::new(&g, &mut rng);
        let mut failures = 0;
        for i in 0..25 {
            if ttp.register(&g, &format!("u{i}"), &mut rng).is_err() {
                failures += 1;
            }
        }
        // Only 22 subgroup elements exist, so at least 3 registrations fail.
        assert!(failures >= 3);
    }
}
