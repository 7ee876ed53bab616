//! ECDSA key pairs, signing, and verification over a [`CurveParams`] curve.
//!
//! Message hashing for signatures uses the keyed 64-bit hash under a fixed
//! public key, so any holder of the signer's public key can recompute the
//! digest. The digest's 64 bits are zero-extended to scalar width.

use rand::RngCore;

use super::curve::{CurveParams, CurvePoint};
use super::siphash::{siphash64, HashKey128};
use super::u256::U256;
use super::CryptoError;

/// Public constant key for pre-signing message digests. Verifiers must be
/// able to recompute the digest, so this cannot be secret.
pub const SIGNING_DIGEST_KEY: HashKey128 = HashKey128(*b"courier-sign-v1\0");

/// An ECC key pair. The secret scalar never leaves this type and is not
/// serializable.
#[derive(Clone)]
pub struct KeyPair {
    secret: U256,
    public: CurvePoint,
}

impl KeyPair {
    /// Draws a secret scalar in [1, N-1] and derives the public point.
    pub fn generate<R: RngCore>(params: &CurveParams, rng: &mut R) -> KeyPair {
        let secret = random_scalar(params, rng);
        let public = params.mul_g(&secret);
        KeyPair { secret, public }
    }

    /// Builds a key pair from a known secret scalar (hex). Intended for
    /// fixtures and known-answer tests.
    pub fn from_secret_hex(params: &CurveParams, hex: &str) -> Result<KeyPair, CryptoError> {
        let secret =
            U256::from_hex(hex).ok_or_else(|| CryptoError::InvalidCurve("bad scalar hex".into()))?;
        if secret.is_zero() || secret >= *params.order() {
            return Err(CryptoError::InvalidCurve("scalar out of range".into()));
        }
        let public = params.mul_g(&secret);
        Ok(KeyPair { secret, public })
    }

    pub fn public(&self) -> CurvePoint {
        self.public
    }

    pub(crate) fn secret(&self) -> &U256 {
        &self.secret
    }
}

impl std::fmt::Debug for KeyPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KeyPair")
            .field("public", &self.public)
            .field("secret", &"<redacted>")
            .finish()
    }
}

/// ECDSA signature (r_i, s_i), both in [1, N-1].
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature {
    pub r: U256,
    pub s: U256,
}

impl Signature {
    pub fn to_bytes(&self) -> [u8; 64] {
        let mut out = [0u8; 64];
        out[..32].copy_from_slice(&self.r.to_be_bytes());
        out[32..].copy_from_slice(&self.s.to_be_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Signature, CryptoError> {
        if bytes.len() != 64 {
            return Err(CryptoError::MalformedSignature);
        }
        Ok(Signature {
            r: U256::from_be_bytes(bytes[..32].try_into().unwrap()),
            s: U256::from_be_bytes(bytes[32..].try_into().unwrap()),
        })
    }
}

impl std::fmt::Debug for Signature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Signature({}..)", &hex::encode(&self.to_bytes()[..8]))
    }
}

/// Digest scalar for a message: 64-bit keyed hash, zero-extended.
pub fn message_scalar(message: &[u8]) -> U256 {
    U256::from_u64(siphash64(&SIGNING_DIGEST_KEY, message).0)
}

fn random_scalar<R: RngCore>(params: &CurveParams, rng: &mut R) -> U256 {
    loop {
        let mut bytes = [0u8; 32];
        rng.fill_bytes(&mut bytes);
        let k = U256::from_be_bytes(&bytes);
        if !k.is_zero() && k < *params.order() {
            return k;
        }
    }
}

/// Signs a message; retries internally while r or s comes out zero.
pub fn ecdsa_sign<R: RngCore>(
    params: &CurveParams,
    message: &[u8],
    kp: &KeyPair,
    rng: &mut R,
) -> Signature {
    let z = message_scalar(message);
    loop {
        let k = random_scalar(params, rng);
        if let Some(sig) = sign_prehashed(params, &z, kp, &k) {
            return sig;
        }
    }
}

/// One signing attempt with an explicit per-signature scalar `k`; returns
/// `None` when r or s is zero. Deterministic building block used by the
/// known-answer tests.
pub fn sign_prehashed(
    params: &CurveParams,
    z: &U256,
    kp: &KeyPair,
    k: &U256,
) -> Option<Signature> {
    let fq = params.scalar_ctx();
    let point = params.mul_g(k);
    let r = match point {
        CurvePoint::Infinity => return None,
        CurvePoint::Affine { x, .. } => fq.reduce(&x),
    };
    if r.is_zero() {
        return None;
    }
    let km = fq.to_mont(k);
    let k_inv = fq.inv(&km);
    let hm = fq.to_mont(&fq.reduce(z));
    let rm = fq.to_mont(&r);
    let dm = fq.to_mont(kp.secret());
    let s = fq.from_mont(&fq.mul(&k_inv, &fq.add(&hm, &fq.mul(&rm, &dm))));
    if s.is_zero() {
        return None;
    }
    Some(Signature { r, s })
}

/// Verifies a signature over a message. Malformed scalars (outside
/// [1, N-1]) yield `false`, not an error.
pub fn ecdsa_verify(
    params: &CurveParams,
    message: &[u8],
    sig: &Signature,
    public: &CurvePoint,
) -> bool {
    verify_prehashed(params, &message_scalar(message), sig, public)
}

pub fn verify_prehashed(
    params: &CurveParams,
    z: &U256,
    sig: &Signature,
    public: &CurvePoint,
) -> bool {
    let n = params.order();
    if sig.r.is_zero() || sig.s.is_zero() || sig.r >= *n || sig.s >= *n {
        return false;
    }
    if public.is_infinity() || !params.is_on_curve(public) {
        return false;
    }
    let fq = params.scalar_ctx();
    let sm = fq.to_mont(&sig.s);
    let c = fq.inv(&sm);
    let u1 = fq.from_mont(&fq.mul(&fq.to_mont(&fq.reduce(z)), &c));
    let u2 = fq.from_mont(&fq.mul(&fq.to_mont(&sig.r), &c));
    match params.mul_g_add_mul(&u1, &u2, public) {
        CurvePoint::Infinity => false,
        CurvePoint::Affine { x, .. } => fq.reduce(&x) == sig.r,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cryptokit::test_rng;

    #[test]
    fn sign_verify_round_trip() {
        let params = CurveParams::p256();
        let mut rng = test_rng(42);
        let kp = KeyPair::generate(params, &mut rng);
        let sig = ecdsa_sign(params, b"deliver one parcel", &kp, &mut rng);
        assert!(ecdsa_verify(params, b"deliver one parcel", &sig, &kp.public()));
    }

    #[test]
    fn message_substitution_fails() {
        let params = CurveParams::p256();
        let mut rng = test_rng(42);
        let kp = KeyPair::generate(params, &mut rng);
        let sig = ecdsa_sign(params, b"original", &kp, &mut rng);
        assert!(!ecdsa_verify(params, b"tampered", &sig, &kp.public()));
    }

    #[test]
    fn wrong_key_fails() {
        let params = CurveParams::p256();
        let mut rng = test_rng(42);
        let kp = KeyPair::generate(params, &mut rng);
        let other = KeyPair::generate(params, &mut rng);
        let sig = ecdsa_sign(params, b"msg", &kp, &mut rng);
        assert!(!ecdsa_verify(params, b"msg", &sig, &other.public()));
    }

    #[test]
    fn randomized_signing_produces_distinct_signatures() {
        let params = CurveParams::p256();
        let mut rng = test_rng(1);
        let kp = KeyPair::generate(params, &mut rng);
        let s1 = ecdsa_sign(params, b"m", &kp, &mut rng);
        let s2 = ecdsa_sign(params, b"m", &kp, &mut rng);
        assert_ne!(s1.to_bytes(), s2.to_bytes());
        assert!(ecdsa_verify(params, b"m", &s1, &kp.public()));
        assert!(ecdsa_verify(params, b"m", &s2, &kp.public()));
    }

    #[test]
    fn out_of_range_scalars_are_invalid_not_panic() {
        let params = CurveParams::p256();
        let mut rng = test_rng(9);
        let kp = KeyPair::generate(params, &mut rng);
        let bad = Signature {
            r: U256::ZERO,
            s: U256::from_u64(1),
        };
        assert!(!ecdsa_verify(params, b"m", &bad, &kp.public()));
        let bad = Signature {
            r: *params.order(),
            s: U256::from_u64(1),
        };
        assert!(!ecdsa_verify(params, b"m", &bad, &kp.public()));
    }

    #[test]
    fn same_seed_reproduces_keypair() {
        let params = CurveParams::p256();
        let a = KeyPair::generate(params, &mut test_rng(42));
        let b = KeyPair::generate(params, &mut test_rng(42));
        let c = KeyPair::generate(params, &mut test_rng(43));
        assert_eq!(a.public(), b.public());
        assert_ne!(a.public(), c.public());
    }

    #[test]
    fn rfc6979_p256_known_answer() {
        // RFC 6979 A.2.5, P-256 with SHA-256, message "sample":
        // the digest, nonce, and expected (r, s) are published values.
        let params = CurveParams::p256();
        let kp = KeyPair::from_secret_hex(
            params,
            "c9afa9d845ba75166b5c215767b1d6934e50c3db36e89b127b8a622b120f6721",
        )
        .unwrap();
        assert_eq!(
            hex::encode(kp.public().encode()),
            format!(
                "04{}{}",
                "60fed4ba255a9d31c961eb74c6356d68c049b8923b61fa6ce669622e60f29fb6",
                "7903fe1008b8bc99a41ae9e95628bc64f2f1b20c2d7e9f5177a3c294d4462299"
            )
        );
        let z = U256::from_hex("af2bdbe1aa9b6ec1e2ade1d694f41fc71a831d0268e9891562113d8a62add1bf")
            .unwrap();
        let k = U256::from_hex("a6e3c57dd01abe90086538398355dd4c3b17aa873382b0f24d6129493d8aad60")
            .unwrap();
        let sig = sign_prehashed(params, &z, &kp, &k).unwrap();
        assert_eq!(
            hex::encode(sig.r.to_be_bytes()),
            "efd48b2aacb6a8fd1140dd9cd45e81d69d2c877b56aaf991c34d0ea84eaf3716"
        );
        assert_eq!(
            hex::encode(sig.s.to_be_bytes()),
            "f7cb1c942d657c41d436c7a1b6e29f65f3e900dbb9aff4064dc4ab2f843acda8"
        );
        assert!(verify_prehashed(params, &z, &sig, &kp.public()));
    }
}
