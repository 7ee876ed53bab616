//! Pure cryptographic primitives: curve key pairs, signatures, integrated
//! public-key encryption, keyed 64-bit hashing, nonces, and timestamp
//! freshness. All operations are pure or take caller-supplied seeded
//! generators; there is no shared mutable state.

pub mod curve;
pub mod ecdsa;
pub mod ecies;
pub mod freshness;
pub mod siphash;
pub mod u256;

pub use curve::{CurveParams, CurvePoint};
pub use ecdsa::{ecdsa_sign, ecdsa_verify, KeyPair, Signature, SIGNING_DIGEST_KEY};
pub use ecies::{asym_decrypt, asym_encrypt, Ciphertext, MAX_PLAINTEXT_LEN};
pub use freshness::{timestamp_fresh, Nonce64, Timestamp, DEFAULT_FRESHNESS_WINDOW_MS};
pub use siphash::{siphash64, Digest64, HashKey128};
pub use u256::U256;

use rand::RngCore;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CryptoError {
    #[error("ciphertext integrity check failed")]
    IntegrityFailure,
    #[error("plaintext of {len} bytes exceeds the {max}-byte cap")]
    PlaintextTooLarge { len: usize, max: usize },
    #[error("point is not on the curve")]
    InvalidPoint,
    #[error("invalid curve parameters: {0}")]
    InvalidCurve(String),
    #[error("malformed signature encoding")]
    MalformedSignature,
}

/// Generates a key pair from the scenario's seeded generator.
pub fn keypair_generate<R: RngCore>(params: &CurveParams, rng: &mut R) -> KeyPair {
    KeyPair::generate(params, rng)
}

#[cfg(test)]
pub(crate) fn test_rng(seed: u64) -> rand_chacha::ChaCha20Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha20Rng::seed_from_u64(seed)
}
