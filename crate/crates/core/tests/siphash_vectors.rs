//! Keyed-hash correctness against the published 64-vector table and an
//! independent reference implementation.

mod common;

use courier_core::cryptokit::{siphash64, HashKey128};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use common::{load_siphash_vectors, siphash24_reference};

#[test]
fn library_matches_all_64_fixture_vectors() {
    let vectors = load_siphash_vectors();
    assert_eq!(vectors.len(), 64);
    // Message i is the bytes 0..i under the fixed incremental key.
    for (i, v) in vectors.iter().enumerate() {
        assert_eq!(v.msg.len(), i);
        let got = siphash64(&HashKey128(v.key), &v.msg);
        assert_eq!(got.0, v.digest, "vector {i}");
    }
}

#[test]
fn reference_implementation_matches_fixture_vectors() {
    for (i, v) in load_siphash_vectors().iter().enumerate() {
        assert_eq!(siphash24_reference(&v.key, &v.msg), v.digest, "vector {i}");
    }
}

#[test]
fn library_matches_reference_on_random_pairs() {
    let mut rng = ChaCha20Rng::seed_from_u64(0x5349_5048_4153_4824);
    for i in 0..64 {
        let mut key = [0u8; 16];
        rng.fill_bytes(&mut key);
        let mut msg = vec![0u8; (rng.next_u32() % 257) as usize];
        rng.fill_bytes(&mut msg);
        assert_eq!(
            siphash64(&HashKey128(key), &msg).0,
            siphash24_reference(&key, &msg),
            "random pair {i}"
        );
    }
}
