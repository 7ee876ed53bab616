//! Shared helpers for integration tests: an independent SipHash-2-4
//! reference implementation and the fixture-vector loader.

/// Straightforward SipHash-2-4, written separately from the library
/// implementation so the two can serve as oracles for each other.
pub fn siphash24_reference(key: &[u8; 16], msg: &[u8]) -> u64 {
    let k0 = u64::from_le_bytes(key[..8].try_into().unwrap());
    let k1 = u64::from_le_bytes(key[8..].try_into().unwrap());
    let mut v = [
        k0 ^ 0x736f6d6570736575,
        k1 ^ 0x646f72616e646f6d,
        k0 ^ 0x6c7967656e657261,
        k1 ^ 0x7465646279746573,
    ];

    fn sipround(v: &mut [u64; 4]) {
        v[0] = v[0].wrapping_add(v[1]);
        v[1] = v[1].rotate_left(13) ^ v[0];
        v[0] = v[0].rotate_left(32);
        v[2] = v[2].wrapping_add(v[3]);
        v[3] = v[3].rotate_left(16) ^ v[2];
        v[0] = v[0].wrapping_add(v[3]);
        v[3] = v[3].rotate_left(21) ^ v[0];
        v[2] = v[2].wrapping_add(v[1]);
        v[1] = v[1].rotate_left(17) ^ v[2];
        v[2] = v[2].rotate_left(32);
    }

    let mut chunks = msg.chunks_exact(8);
    for chunk in &mut chunks {
        let m = u64::from_le_bytes(chunk.try_into().unwrap());
        v[3] ^= m;
        sipround(&mut v);
        sipround(&mut v);
        v[0] ^= m;
    }
    let mut last = [0u8; 8];
    last[..chunks.remainder().len()].copy_from_slice(chunks.remainder());
    last[7] = msg.len() as u8;
    let m = u64::from_le_bytes(last);
    v[3] ^= m;
    sipround(&mut v);
    sipround(&mut v);
    v[0] ^= m;

    v[2] ^= 0xff;
    for _ in 0..4 {
        sipround(&mut v);
    }
    v[0] ^ v[1] ^ v[2] ^ v[3]
}

/// One fixture vector: key, message, expected digest.
pub struct SipVector {
    pub key: [u8; 16],
    pub msg: Vec<u8>,
    pub digest: u64,
}

/// Parses `fixtures/siphash24_vectors.txt`: three hex columns per line,
/// `-` marking the empty message, digest given as little-endian bytes.
pub fn load_siphash_vectors() -> Vec<SipVector> {
    include_str!("../fixtures/siphash24_vectors.txt")
        .lines()
        .filter(|line| !line.trim().is_empty())
        .map(|line| {
            let mut cols = line.split_whitespace();
            let key: [u8; 16] = hex_decode(cols.next().unwrap()).try_into().unwrap();
            let msg_col = cols.next().unwrap();
            let msg = if msg_col == "-" {
                Vec::new()
            } else {
                hex_decode(msg_col)
            };
            let digest_bytes: [u8; 8] = hex_decode(cols.next().unwrap()).try_into().unwrap();
            SipVector {
                key,
                msg,
                digest: u64::from_le_bytes(digest_bytes),
            }
        })
        .collect()
}

fn hex_decode(s: &str) -> Vec<u8> {
    (0..s.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(&s[i..i + 2], 16).unwrap())
        .collect()
}
