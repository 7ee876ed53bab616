//! Integrated public-key encryption: ephemeral ECDH key agreement, a
//! hash-derived keystream, and a 128-bit integrity tag.
//!
//! Ciphertext layout (fixed field order): ephemeral public key (65 bytes,
//! uncompressed) || body || tag (16 bytes).

use rand::RngCore;
use sha2::{Digest, Sha256};

use super::curve::{CurveParams, CurvePoint};
use super::ecdsa::KeyPair;
use super::CryptoError;

/// Default plaintext size cap.
pub const MAX_PLAINTEXT_LEN: usize = 64 * 1024;

const TAG_LEN: usize = 16;
const POINT_LEN: usize = 65;

/// Opaque ciphertext bytes.
#[derive(Clone, PartialEq, Eq)]
pub struct Ciphertext(pub Vec<u8>);

impl std::fmt::Debug for Ciphertext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Ciphertext({} bytes)", self.0.len())
    }
}

fn derive_keys(shared_x: &[u8; 32], eph_pub: &[u8; 65]) -> ([u8; 32], [u8; 32]) {
    let mut h = Sha256::new();
    h.update(b"courier-ecies-enc");
    h.update(shared_x);
    h.update(eph_pub);
    let enc_key: [u8; 32] = h.finalize().into();
    let mut h = Sha256::new();
    h.update(b"courier-ecies-mac");
    h.update(shared_x);
    h.update(eph_pub);
    let mac_key: [u8; 32] = h.finalize().into();
    (enc_key, mac_key)
}

fn apply_keystream(enc_key: &[u8; 32], data: &mut [u8]) {
    for (block_idx, block) in data.chunks_mut(32).enumerate() {
        let mut h = Sha256::new();
        h.update(enc_key);
        h.update((block_idx as u64).to_le_bytes());
        let pad: [u8; 32] = h.finalize().into();
        for (b, p) in block.iter_mut().zip(pad.iter()) {
            *b ^= p;
        }
    }
}

fn compute_tag(mac_key: &[u8; 32], body: &[u8]) -> [u8; 16] {
    let mut h = Sha256::new();
    h.update(mac_key);
    h.update((body.len() as u64).to_le_bytes());
    h.update(body);
    let full: [u8; 32] = h.finalize().into();
    full[..TAG_LEN].try_into().unwrap()
}

/// Encrypts to a public key with a fresh ephemeral key pair per call.
pub fn asym_encrypt<R: RngCore>(
    params: &CurveParams,
    plaintext: &[u8],
    public: &CurvePoint,
    rng: &mut R,
) -> Result<Ciphertext, CryptoError> {
    if plaintext.len() > MAX_PLAINTEXT_LEN {
        return Err(CryptoError::PlaintextTooLarge {
            len: plaintext.len(),
            max: MAX_PLAINTEXT_LEN,
        });
    }
    if public.is_infinity() || !params.is_on_curve(public) {
        return Err(CryptoError::InvalidPoint);
    }
    let eph = KeyPair::generate(params, rng);
    let shared = match params.scalar_mul(eph.secret(), public) {
        CurvePoint::Infinity => return Err(CryptoError::InvalidPoint),
        CurvePoint::Affine { x, .. } => x.to_be_bytes(),
    };
    let eph_pub = eph.public().encode();
    let (enc_key, mac_key) = derive_keys(&shared, &eph_pub);

    let mut body = plaintext.to_vec();
    apply_keystream(&enc_key, &mut body);
    let tag = compute_tag(&mac_key, &body);

    let mut out = Vec::with_capacity(POINT_LEN + body.len() + TAG_LEN);
    out.extend_from_slice(&eph_pub);
    out.extend_from_slice(&body);
    out.extend_from_slice(&tag);
    Ok(Ciphertext(out))
}

/// Decrypts, failing with `IntegrityFailure` on any tampered or
/// wrong-key ciphertext.
pub fn asym_decrypt(
    params: &CurveParams,
    ciphertext: &Ciphertext,
    kp: &KeyPair,
) -> Result<Vec<u8>, CryptoError> {
    let bytes = &ciphertext.0;
    if bytes.len() < POINT_LEN + TAG_LEN {
        return Err(CryptoError::IntegrityFailure);
    }
    let eph_pub: [u8; 65] = bytes[..POINT_LEN].try_into().unwrap();
    let eph_point = params
        .decode_point(&eph_pub)
        .map_err(|_| CryptoError::IntegrityFailure)?;
    let shared = match params.scalar_mul(kp.secret(), &eph_point) {
        CurvePoint::Infinity => return Err(CryptoError::IntegrityFailure),
        CurvePoint::Affine { x, .. } => x.to_be_bytes(),
    };
    let (enc_key, mac_key) = derive_keys(&shared, &eph_pub);
    let body = &bytes[POINT_LEN..bytes.len() - TAG_LEN];
    let tag: [u8; 16] = bytes[bytes.len() - TAG_LEN..].try_into().unwrap();
    if compute_tag(&mac_key, body) != tag {
        return Err(CryptoError::IntegrityFailure);
    }
    let mut plaintext = body.to_vec();
    apply_keystream(&enc_key, &mut plaintext);
    Ok(plaintext)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cryptokit::test_rng;

    #[test]
    fn round_trip() {
        let params = CurveParams::p256();
        let mut rng = test_rng(3);
        let kp = KeyPair::generate(params, &mut rng);
        let ct = asym_encrypt(params, b"parcel manifest", &kp.public(), &mut rng).unwrap();
        assert_eq!(asym_decrypt(params, &ct, &kp).unwrap(), b"parcel manifest");
    }

    #[test]
    fn fresh_ephemeral_per_call() {
        let params = CurveParams::p256();
        let mut rng = test_rng(3);
        let kp = KeyPair::generate(params, &mut rng);
        let c1 = asym_encrypt(params, b"same plaintext", &kp.public(), &mut rng).unwrap();
        let c2 = asym_encrypt(params, b"same plaintext", &kp.public(), &mut rng).unwrap();
        assert_ne!(c1.0, c2.0);
    }

    #[test]
    fn bit_flip_detected() {
        let params = CurveParams::p256();
        let mut rng = test_rng(3);
        let kp = KeyPair::generate(params, &mut rng);
        let ct = asym_encrypt(params, b"flip me", &kp.public(), &mut rng).unwrap();
        for idx in [0usize, POINT_LEN, ct.0.len() - 1] {
            let mut mutated = ct.clone();
            mutated.0[idx] ^= 0x01;
            assert!(matches!(
                asym_decrypt(params, &mutated, &kp),
                Err(CryptoError::IntegrityFailure)
            ));
        }
    }

    #[test]
    fn wrong_key_fails() {
        let params = CurveParams::p256();
        let mut rng = test_rng(3);
        let kp = KeyPair::generate(params, &mut rng);
        let other = KeyPair::generate(params, &mut rng);
        let ct = asym_encrypt(params, b"secret", &kp.public(), &mut rng).unwrap();
        assert!(matches!(
            asym_decrypt(params, &ct, &other),
            Err(CryptoError::IntegrityFailure)
        ));
    }

    #[test]
    fn size_cap_enforced() {
        let params = CurveParams::p256();
        let mut rng = test_rng(3);
        let kp = KeyPair::generate(params, &mut rng);
        let big = vec![0u8; MAX_PLAINTEXT_LEN + 1];
        assert!(matches!(
            asym_encrypt(params, &big, &kp.public(), &mut rng),
            Err(CryptoError::PlaintextTooLarge { .. })
        ));
    }

    #[test]
    fn empty_plaintext_round_trips() {
        let params = CurveParams::p256();
        let mut rng = test_rng(4);
        let kp = KeyPair::generate(params, &mut rng);
        let ct = asym_encrypt(params, b"", &kp.public(), &mut rng).unwrap();
        assert_eq!(asym_decrypt(params, &ct, &kp).unwrap(), Vec::<u8>::new());
    }
}
