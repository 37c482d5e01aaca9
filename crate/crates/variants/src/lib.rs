//! Alternative identifier schemes, implemented for side-by-side comparison
//! with the seed-chain protocol rather than for deployment.
//!
//! The dual scheme broadcasts DDH pairs `(g^r, g^{r·s_u})` that the owner
//! recognizes by their secret exponent and that anyone can re-randomize
//! without breaking that recognition. The TTP scheme broadcasts randomized
//! encryptions of a registration token that only the central party can
//! decrypt. Both carry documented weaknesses the simulation harness
//! reproduces on purpose.

pub mod dual;
pub mod group;
pub mod ttp;

pub use dual::{
    dual_is_mine, dual_keygen, dual_make_id, dual_make_id_with, dual_rerandomize,
    dual_rerandomize_with, DualId, DualSecret,
};
pub use group::{Group, RistrettoGroup, ToyGroup};
pub use ttp::{TtpId, TtpState, TtpToken};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VariantError {
    #[error("degenerate id: identity element")]
    DegenerateId,
    #[error("byte string does not decode to a group element")]
    MalformedElement,
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("generator {0} is not a group element")]
    BadGenerator(u64),
    #[error("token space exhausted")]
    TokenSpaceExhausted,
}
