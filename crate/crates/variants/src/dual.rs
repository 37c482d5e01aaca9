//! The dual ("report collected ids") identifier scheme.
//!
//! A user with secret `s_u` broadcasts pairs `(g^r, g^{r·s_u})` under fresh
//! randomness `r`, recognizes their own pairs by checking `y = x^{s_u}`, and
//! anyone holding a pair can re-randomize it to `(x^r', y^r')` without
//! changing whose it is. Identity-element first components are rejected
//! everywhere — `(1, 1)` would otherwise be "mine" for every secret.

use rand::RngCore;

use crate::group::Group;
use crate::VariantError;

#[derive(Debug, Clone, PartialEq)]
pub struct DualSecret<G: Group> {
    pub exponent: G::Scalar,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualId<G: Group> {
    pub x: G::Elem,
    pub y: G::Elem,
}

pub fn dual_keygen<G: Group>(group: &G, rng: &mut dyn RngCore) -> DualSecret<G> {
    DualSecret {
        exponent: group.random_scalar(rng),
    }
}

pub fn dual_make_id<G: Group>(
    group: &G,
    secret: &DualSecret<G>,
    rng: &mut dyn RngCore,
) -> DualId<G> {
    let r = group.random_scalar(rng);
    dual_make_id_with(group, secret, &r)
}

/// Deterministic construction with an explicit randomizer, for tests and
/// for adversaries that tie the exponent to something (like a location).
pub fn dual_make_id_with<G: Group>(group: &G, secret: &DualSecret<G>, r: &G::Scalar) -> DualId<G> {
    let x = group.pow(&group.generator(), r);
    let y = group.pow(&x, &secret.exponent);
    DualId { x, y }
}

/// Re-randomizes with fresh randomness, retrying the draw if it would
/// collapse the pair. In a prime-order group a nonzero exponent never
/// collapses anything; composite-order toy groups can, hence the loop.
pub fn dual_rerandomize<G: Group>(
    group: &G,
    id: &DualId<G>,
    rng: &mut dyn RngCore,
) -> Result<DualId<G>, VariantError> {
    if group.is_identity(&id.x) {
        return Err(VariantError::DegenerateId);
    }
    for _ in 0..64 {
        let r = group.random_scalar(rng);
        if let Ok(out) = dual_rerandomize_with(group, id, &r) {
            return Ok(out);
        }
    }
    Err(VariantError::DegenerateId)
}

/// Re-randomization with an explicit exponent. Rejects degenerate input and
/// any exponent that would send the first component to the identity (a
/// `(1, 1)` pair would look like everyone's).
pub fn dual_rerandomize_with<G: Group>(
    group: &G,
    id: &DualId<G>,
    r: &G::Scalar,
) -> Result<DualId<G>, VariantError> {
    if group.is_identity(&id.x) {
        return Err(VariantError::DegenerateId);
    }
    let x = group.pow(&id.x, r);
    if group.is_identity(&x) {
        return Err(VariantError::DegenerateId);
    }
    Ok(DualId {
        x,
        y: group.pow(&id.y, r),
    })
}

/// Ownership check `y = x^{s_u}`; degenerate pairs are never mine.
pub fn dual_is_mine<G: Group>(group: &G, id: &DualId<G>, secret: &DualSecret<G>) -> bool {
    if group.is_identity(&id.x) {
        return false;
    }
    group.pow(&id.x, &secret.exponent) == id.y
}

impl<G: Group> DualId<G> {
    /// Wire form: two length-prefixed canonical element encodings.
    pub fn encode(&self, group: &G) -> Vec<u8> {
        let x = group.encode(&self.x);
        let y = group.encode(&self.y);
        let mut out = Vec::with_capacity(4 + x.len() + y.len());
        out.extend_from_slice(&(x.len() as u16).to_be_bytes());
        out.extend_from_slice(&x);
        out.extend_from_slice(&(y.len() as u16).to_be_bytes());
        out.extend_from_slice(&y);
        out
    }

    pub fn decode(group: &G, bytes: &[u8]) -> Result<Self, VariantError> {
        let (x, rest) = take_part(bytes)?;
        let (y, rest) = take_part(rest)?;
        if !rest.is_empty() {
            return Err(VariantError::MalformedElement);
        }
        Ok(DualId {
            x: group.decode(x)?,
            y: group.decode(y)?,
        })
    }
}

pub(crate) fn take_part(bytes: &[u8]) -> Result<(&[u8], &[u8]), VariantError> {
    if bytes.len() < 2 {
        return Err(VariantError::MalformedElement);
    }
    let len = u16::from_be_bytes(bytes[..2].try_into().unwrap()) as usize;
    let rest = &bytes[2..];
    if rest.len() < len {
        return Err(VariantError::MalformedElement);
    }
    Ok(rest.split_at(len))
}
