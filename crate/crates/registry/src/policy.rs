//! The signature whitelist: certificate ids mapped to verification keys and
//! trust tiers. Self-report keys ship with apps and prove little; healthcare
//! keys belong to validating parties. No certificate chains — a static
//! whitelist file is the entire PKI here.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use ed25519_dalek::{Signature, Verifier, VerifyingKey};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tier {
    SelfReport,
    HealthcareValidated,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolicyError {
    #[error("unknown certificate id {0:?}")]
    UnknownSigner(String),
    #[error("signature does not verify under certificate {0:?}")]
    BadSignature(String),
    #[error("whitelist file is malformed: {0}")]
    BadFile(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WhitelistKey {
    #[serde(with = "hex_arr32")]
    pub vk: [u8; 32],
    pub tier: Tier,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SignaturePolicy {
    keys: HashMap<String, WhitelistKey>,
}

impl SignaturePolicy {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, cert_id: impl Into<String>, vk: [u8; 32], tier: Tier) {
        self.keys.insert(cert_id.into(), WhitelistKey { vk, tier });
    }

    pub fn tier_of(&self, cert_id: &str) -> Option<Tier> {
        self.keys.get(cert_id).map(|k| k.tier)
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// Resolves the certificate and checks the signature over `message`.
    pub fn verify(
        &self,
        cert_id: &str,
        message: &[u8],
        signature: &[u8],
    ) -> Result<Tier, PolicyError> {
        let entry = self
            .keys
            .get(cert_id)
            .ok_or_else(|| PolicyError::UnknownSigner(cert_id.to_string()))?;
        let vk = VerifyingKey::from_bytes(&entry.vk)
            .map_err(|_| PolicyError::BadSignature(cert_id.to_string()))?;
        let sig_bytes: [u8; 64] = signature
            .try_into()
            .map_err(|_| PolicyError::BadSignature(cert_id.to_string()))?;
        vk.verify(message, &Signature::from_bytes(&sig_bytes))
            .map_err(|_| PolicyError::BadSignature(cert_id.to_string()))?;
        Ok(entry.tier)
    }

    pub fn load(path: &Path) -> Result<Self, PolicyError> {
        let text = fs::read_to_string(path).map_err(|e| PolicyError::BadFile(e.to_string()))?;
        serde_json::from_str(&text).map_err(|e| PolicyError::BadFile(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        fs::write(
            path,
            serde_json::to_string_pretty(self).expect("serializable"),
        )
    }
}

mod hex_arr32 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8; 32], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[u8; 32], D::Error> {
        let text = String::deserialize(d)?;
        let v = hex::decode(&text).map_err(serde::de::Error::custom)?;
        v.try_into()
            .map_err(|_| serde::de::Error::custom("expected 32 hex-encoded bytes"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ed25519_dalek::{Signer, SigningKey};

    #[test]
    fn verify_resolves_and_checks() {
        let sk = SigningKey::from_bytes(&[9u8; 32]);
        let mut policy = SignaturePolicy::new();
        policy.add(
            "lab-1",
            sk.verifying_key().to_bytes(),
            Tier::HealthcareValidated,
        );

        let msg = b"window";
        let sig = sk.sign(msg).to_bytes();
        assert_eq!(
            policy.verify("lab-1", msg, &sig),
            Ok(Tier::HealthcareValidated)
        );
        assert_eq!(
            policy.verify("lab-2", msg, &sig),
            Err(PolicyError::UnknownSigner("lab-2".into()))
        );
        assert_eq!(
            policy.verify("lab-1", b"other", &sig),
            Err(PolicyError::BadSignature("lab-1".into()))
        );
    }

    #[test]
    fn whitelist_file_roundtrip() {
        let dir = std::env::temp_dir().join("pact-policy-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("whitelist.json");
        let mut policy = SignaturePolicy::new();
        policy.add("app", [1u8; 32], Tier::SelfReport);
        policy.save(&path).unwrap();
        let loaded = SignaturePolicy::load(&path).unwrap();
        assert_eq!(loaded.tier_of("app"), Some(Tier::SelfReport));
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn tiers_order_self_below_healthcare() {
        assert!(Tier::SelfReport < Tier::HealthcareValidated);
    }
}
