//! SipHash-2-4 keyed 64-bit hashing.

use serde::{Deserialize, Serialize};

/// 128-bit secret key for the keyed hash.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct HashKey128(pub [u8; 16]);

impl HashKey128 {
    pub fn from_halves(lo: u64, hi: u64) -> HashKey128 {
        let mut k = [0u8; 16];
        k[..8].copy_from_slice(&lo.to_le_bytes());
        k[8..].copy_from_slice(&hi.to_le_bytes());
        HashKey128(k)
    }
}

/// 64-bit keyed-hash output token.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default, PartialOrd, Ord)]
pub struct Digest64(pub u64);

impl Digest64 {
    /// Wire encoding, little-endian to match the reference output order.
    pub fn to_le_bytes(self) -> [u8; 8] {
        self.0.to_le_bytes()
    }

    pub fn from_le_bytes(bytes: [u8; 8]) -> Digest64 {
        Digest64(u64::from_le_bytes(bytes))
    }

    pub fn to_hex(self) -> String {
        hex::encode(self.to_le_bytes())
    }
}

impl std::fmt::Debug for Digest64 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Digest64({})", self.to_hex())
    }
}

#[inline]
fn sip_round(v: &mut [u64; 4]) {
    v[0] = v[0].wrapping_add(v[1]);
    v[1] = v[1].rotate_left(13);
    v[1] ^= v[0];
    v[0] = v[0].rotate_left(32);
    v[2] = v[2].wrapping_add(v[3]);
    v[3] = v[3].rotate_left(16);
    v[3] ^= v[2];
    v[0] = v[0].wrapping_add(v[3]);
    v[3] = v[3].rotate_left(21);
    v[3] ^= v[0];
    v[2] = v[2].wrapping_add(v[1]);
    v[1] = v[1].rotate_left(17);
    v[1] ^= v[2];
    v[2] = v[2].rotate_left(32);
}

/// SipHash-2-4 of `message` under `key`.
pub fn siphash64(key: &HashKey128, message: &[u8]) -> Digest64 {
    let k0 = u64::from_le_bytes(key.0[..8].try_into().unwrap());
    let k1 = u64::from_le_bytes(key.0[8..].try_into().unwrap());
    let mut v = [
        k0 ^ 0x736f6d6570736575,
        k1 ^ 0x646f72616e646f6d,
        k0 ^ 0x6c7967656e657261,
        k1 ^ 0x7465646279746573,
    ];
    let mut chunks = message.chunks_exact(8);
    for chunk in &mut chunks {
        let m = u64::from_le_bytes(chunk.try_into().unwrap());
        v[3] ^= m;
        sip_round(&mut v);
        sip_round(&mut v);
        v[0] ^= m;
    }
    let rest = chunks.remainder();
    let mut last = [0u8; 8];
    last[..rest.len()].copy_from_slice(rest);
    last[7] = message.len() as u8;
    let m = u64::from_le_bytes(last);
    v[3] ^= m;
    sip_round(&mut v);
    sip_round(&mut v);
    v[0] ^= m;

    v[2] ^= 0xff;
    for _ in 0..4 {
        sip_round(&mut v);
    }
    Digest64(v[0] ^ v[1] ^ v[2] ^ v[3])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_reference_vector() {
        // Key 000102..0f, empty message, from the SipHash reference suite.
        let key = HashKey128(std::array::from_fn(|i| i as u8));
        assert_eq!(siphash64(&key, &[]), Digest64(0x726fdb47dd0e0e31));
    }

    #[test]
    fn determinism_and_key_separation() {
        let k1 = HashKey128([7; 16]);
        let k2 = HashKey128([8; 16]);
        let msg = b"order details";
        assert_eq!(siphash64(&k1, msg), siphash64(&k1, msg));
        assert_ne!(siphash64(&k1, msg), siphash64(&k2, msg));
    }

    #[test]
    fn digest_byte_round_trip() {
        let d = Digest64(0x0123456789abcdef);
        assert_eq!(Digest64::from_le_bytes(d.to_le_bytes()), d);
    }
}
