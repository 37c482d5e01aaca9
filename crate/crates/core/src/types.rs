use std::fmt;

/// A chain seed: an n-bit secret from which all later pseudonyms derive.
/// Treated as private material — `Debug` does not print the bytes.
#[derive(Clone, PartialEq, Eq)]
pub struct Seed(Vec<u8>);

impl Seed {
    pub fn from_bytes(bytes: impl Into<Vec<u8>>) -> Self {
        Seed(bytes.into())
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Debug for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Seed({} bits, redacted)", self.0.len() * 8)
    }
}

/// A broadcast pseudonym: an n-bit string valid for one epoch.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PseudonymId(Vec<u8>);

impl PseudonymId {
    pub fn from_bytes(bytes: impl Into<Vec<u8>>) -> Self {
        PseudonymId(bytes.into())
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Debug for PseudonymId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PseudonymId({})", hex::encode(&self.0))
    }
}

impl fmt::Display for PseudonymId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", hex::encode(&self.0))
    }
}
