//! The two group backends: Ristretto for realistic key sizes and timings,
//! small multiplicative groups mod a prime for exhaustively checkable tests.
//!
//! Multiplicative naming throughout: `pow` is exponentiation by a scalar,
//! `mul` the group operation. For Ristretto (written additively upstream)
//! those map to scalar multiplication and point addition.

use curve25519_dalek::ristretto::{CompressedRistretto, RistrettoPoint};
use curve25519_dalek::scalar::Scalar;
use curve25519_dalek::traits::Identity;
use rand::RngCore;

use crate::VariantError;

pub trait Group {
    type Elem: Clone + PartialEq + Eq + std::fmt::Debug;
    type Scalar: Clone + PartialEq + std::fmt::Debug;

    fn generator(&self) -> Self::Elem;
    fn identity(&self) -> Self::Elem;
    fn is_identity(&self, e: &Self::Elem) -> bool {
        *e == self.identity()
    }
    /// Uniform nonzero exponent.
    fn random_scalar(&self, rng: &mut dyn RngCore) -> Self::Scalar;
    /// The exponent 1 (useful for degenerate-randomizer cases).
    fn one(&self) -> Self::Scalar;
    fn pow(&self, base: &Self::Elem, exp: &Self::Scalar) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    /// Additive inverse of a scalar mod the group order.
    fn neg_scalar(&self, s: &Self::Scalar) -> Self::Scalar;
    /// Canonical encoding: compressed points for curves, decimal integers
    /// for toy groups.
    fn encode(&self, e: &Self::Elem) -> Vec<u8>;
    fn decode(&self, bytes: &[u8]) -> Result<Self::Elem, VariantError>;
}

/// The production backend: the prime-order Ristretto group over Curve25519.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RistrettoGroup;

impl Group for RistrettoGroup {
    type Elem = RistrettoPoint;
    type Scalar = Scalar;

    fn generator(&self) -> RistrettoPoint {
        RistrettoPoint::mul_base(&Scalar::ONE)
    }

    fn identity(&self) -> RistrettoPoint {
        RistrettoPoint::identity()
    }

    fn random_scalar(&self, rng: &mut dyn RngCore) -> Scalar {
        loop {
            let mut wide = [0u8; 64];
            rng.fill_bytes(&mut wide);
            let s = Scalar::from_bytes_mod_order_wide(&wide);
            if s != Scalar::ZERO {
                return s;
            }
        }
    }

    fn one(&self) -> Scalar {
        Scalar::ONE
    }

    fn pow(&self, base: &RistrettoPoint, exp: &Scalar) -> RistrettoPoint {
        base * exp
    }

    fn mul(&self, a: &RistrettoPoint, b: &RistrettoPoint) -> RistrettoPoint {
        a + b
    }

    fn neg_scalar(&self, s: &Scalar) -> Scalar {
        -s
    }

    fn encode(&self, e: &RistrettoPoint) -> Vec<u8> {
        e.compress().to_bytes().to_vec()
    }

    fn decode(&self, bytes: &[u8]) -> Result<RistrettoPoint, VariantError> {
        let compressed =
            CompressedRistretto::from_slice(bytes).map_err(|_| VariantError::MalformedElement)?;
        compressed
            .decompress()
            .ok_or(VariantError::MalformedElement)
    }
}

/// A small multiplicative group: the subgroup of Z_p* generated by `g`.
/// Everything is brute-forceable, which is the point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ToyGroup {
    modulus: u64,
    generator: u64,
    order: u64,
}

impl ToyGroup {
    pub fn new(modulus: u64, generator: u64) -> Result<Self, VariantError> {
        if !is_prime(modulus) {
            return Err(VariantError::NotPrime(modulus));
        }
        if generator <= 1 || generator >= modulus {
            return Err(VariantError::BadGenerator(generator));
        }
        // Order of g: iterate until the cycle closes.
        let mut order = 1u64;
        let mut x = generator;
        while x != 1 {
            x = x * generator % modulus;
            order += 1;
        }
        Ok(ToyGroup {
            modulus,
            generator,
            order,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Order of the generated subgroup (not necessarily prime; scalars live
    /// mod this).
    pub fn order(&self) -> u64 {
        self.order
    }

    /// All subgroup elements, for exhaustive tests.
    pub fn elements(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.order as usize);
        let mut x = 1u64;
        for _ in 0..self.order {
            out.push(x);
            x = x * self.generator % self.modulus;
        }
        out
    }

    fn modpow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1u64;
        base %= self.modulus;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % self.modulus;
            }
            base = base * base % self.modulus;
            exp >>= 1;
        }
        acc
    }
}

impl Group for ToyGroup {
    type Elem = u64;
    type Scalar = u64;

    fn generator(&self) -> u64 {
        self.generator
    }

    fn identity(&self) -> u64 {
        1
    }

    fn random_scalar(&self, rng: &mut dyn RngCore) -> u64 {
        // Rejection-free uniform draw over 1..order via modulo of a wide
        // sample; bias is irrelevant at toy sizes.
        1 + rng.next_u64() % (self.order - 1)
    }

    fn one(&self) -> u64 {
        1
    }

    fn pow(&self, base: &u64, exp: &u64) -> u64 {
        self.modpow(*base, *exp % self.order)
    }

    fn mul(&self, a: &u64, b: &u64) -> u64 {
        a * b % self.modulus
    }

    fn neg_scalar(&self, s: &u64) -> u64 {
        (self.order - s % self.order) % self.order
    }

    fn encode(&self, e: &u64) -> Vec<u8> {
        e.to_string().into_bytes()
    }

    fn decode(&self, bytes: &[u8]) -> Result<u64, VariantError> {
        let text = std::str::from_utf8(bytes).map_err(|_| VariantError::MalformedElement)?;
        let value: u64 = text.parse().map_err(|_| VariantError::MalformedElement)?;
        if value == 0 || value >= self.modulus {
            return Err(VariantError::MalformedElement);
        }
        // Membership in the generated subgroup.
        if self.modpow(value, self.order) != 1 {
            return Err(VariantError::MalformedElement);
        }
        Ok(value)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}
