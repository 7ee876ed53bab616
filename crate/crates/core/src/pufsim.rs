//! Deterministic per-device physically-unclonable-function simulation and
//! the manufacturer-to-service-provider CRP enrollment lifecycle.
//!
//! The PUF is modeled as a keyed hash of the challenge under a 256-bit
//! device secret: noiseless, deterministic, and unique per device.

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, Write};

use rand::RngCore;
use thiserror::Error;

use crate::cryptokit::siphash::{siphash64, HashKey128};

/// Default number of enrolled challenge-response pairs per robot.
pub const DEFAULT_CRP_COUNT: usize = 1000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PufError {
    #[error("all enrolled challenges have been issued")]
    CrpExhausted,
    #[error("challenge is not enrolled for this device")]
    UnknownChallenge,
    #[error("malformed CRP record at line {line}")]
    MalformedRecord { line: usize },
    #[error("i/o error: {0}")]
    Io(String),
}

/// 128-bit challenge token.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Challenge(pub [u8; 16]);

/// 128-bit response token.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Response(pub [u8; 16]);

impl Challenge {
    pub fn generate<R: RngCore>(rng: &mut R) -> Challenge {
        let mut bytes = [0u8; 16];
        rng.fill_bytes(&mut bytes);
        Challenge(bytes)
    }
}

impl std::fmt::Debug for Challenge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Challenge({})", hex::encode(self.0))
    }
}

impl std::fmt::Debug for Response {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Response({})", hex::encode(self.0))
    }
}

/// The silicon randomness of one device. The secret never leaves this
/// object; it is not serializable and not readable.
pub struct DeviceSecret {
    device_id: String,
    secret: [u8; 32],
}

impl DeviceSecret {
    pub fn provision<R: RngCore>(device_id: &str, rng: &mut R) -> DeviceSecret {
        let mut secret = [0u8; 32];
        rng.fill_bytes(&mut secret);
        DeviceSecret {
            device_id: device_id.to_string(),
            secret,
        }
    }

    pub fn device_id(&self) -> &str {
        &self.device_id
    }
}

impl std::fmt::Debug for DeviceSecret {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DeviceSecret")
            .field("device_id", &self.device_id)
            .field("secret", &"<redacted>")
            .finish()
    }
}

/// Evaluates the device PUF: deterministic, noiseless, 128-bit output.
pub fn puf_eval(device: &DeviceSecret, challenge: &Challenge) -> Response {
    let k_lo = HashKey128(device.secret[..16].try_into().unwrap());
    let k_hi = HashKey128(device.secret[16..].try_into().unwrap());
    let mut domain_lo = [0u8; 17];
    domain_lo[0] = 0x00;
    domain_lo[1..].copy_from_slice(&challenge.0);
    let mut domain_hi = domain_lo;
    domain_hi[0] = 0x01;
    let lo = siphash64(&k_lo, &domain_lo).to_le_bytes();
    let hi = siphash64(&k_hi, &domain_hi).to_le_bytes();
    let mut out = [0u8; 16];
    out[..8].copy_from_slice(&lo);
    out[8..].copy_from_slice(&hi);
    Response(out)
}

/// Per-robot challenge-response table held by the service provider.
#[derive(Debug, Clone)]
pub struct CrpDatabase {
    device_id: String,
    pairs: BTreeMap<Challenge, Response>,
    issued: HashSet<Challenge>,
}

impl CrpDatabase {
    pub fn device_id(&self) -> &str {
        &self.device_id
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&Challenge, &Response)> {
        self.pairs.iter()
    }

    pub fn remaining(&self) -> usize {
        self.pairs.len() - self.issued.len()
    }

    /// Uniformly selects a not-yet-issued challenge and marks it issued.
    /// A challenge is never handed out twice within a scenario.
    pub fn crp_select<R: RngCore>(&mut self, rng: &mut R) -> Result<Challenge, PufError> {
        let unissued: Vec<Challenge> = self
            .pairs
            .keys()
            .filter(|c| !self.issued.contains(c))
            .copied()
            .collect();
        if unissued.is_empty() {
            return Err(PufError::CrpExhausted);
        }
        let idx = (rng.next_u64() % unissued.len() as u64) as usize;
        let chosen = unissued[idx];
        self.issued.insert(chosen);
        Ok(chosen)
    }

    /// Valid iff the database holds exactly (challenge -> response).
    /// An unenrolled challenge is an error distinct from a wrong response.
    pub fn crp_verify(&self, challenge: &Challenge, response: &Response) -> Result<bool, PufError> {
        match self.pairs.get(challenge) {
            Some(stored) => Ok(stored == response),
            None => Err(PufError::UnknownChallenge),
        }
    }

    /// Line-oriented hex export: `device_id challenge response` per line.
    pub fn export<W: Write>(&self, mut out: W) -> Result<(), PufError> {
        for (c, r) in &self.pairs {
            writeln!(
                out,
                "{} {} {}",
                self.device_id,
                hex::encode(c.0),
                hex::encode(r.0)
            )
            .map_err(|e| PufError::Io(e.to_string()))?;
        }
        Ok(())
    }

    pub fn import<Rd: BufRead>(reader: Rd) -> Result<CrpDatabase, PufError> {
        let mut device_id: Option<String> = None;
        let mut pairs = BTreeMap::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| PufError::Io(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (id, c_hex, r_hex) = match (parts.next(), parts.next(), parts.next(), parts.next())
            {
                (Some(id), Some(c), Some(r), None) => (id, c, r),
                _ => return Err(PufError::MalformedRecord { line: idx + 1 }),
            };
            let mut c = [0u8; 16];
            let mut r = [0u8; 16];
            hex::decode_to_slice(c_hex, &mut c)
                .map_err(|_| PufError::MalformedRecord { line: idx + 1 })?;
            hex::decode_to_slice(r_hex, &mut r)
                .map_err(|_| PufError::MalformedRecord { line: idx + 1 })?;
            match &device_id {
                None => device_id = Some(id.to_string()),
                Some(existing) if existing != id => {
                    return Err(PufError::MalformedRecord { line: idx + 1 })
                }
                _ => {}
            }
            pairs.insert(Challenge(c), Response(r));
        }
        Ok(CrpDatabase {
            device_id: device_id.unwrap_or_default(),
            pairs,
            issued: HashSet::new(),
        })
    }
}

/// Manufacturer-side enrollment: draws `n_pairs` distinct challenges and
/// records the device's response to each.
pub fn crp_enroll<R: RngCore>(device: &DeviceSecret, n_pairs: usize, rng: &mut R) -> CrpDatabase {
    assert!(n_pairs >= 1, "enrollment needs at least one pair");
    let mut pairs = BTreeMap::new();
    while pairs.len() < n_pairs {
        let c = Challenge::generate(rng);
        pairs.entry(c).or_insert_with(|| puf_eval(device, &c));
    }
    CrpDatabase {
        device_id: device.device_id.clone(),
        pairs,
        issued: HashSet::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cryptokit::test_rng;

    #[test]
    fn eval_is_deterministic_and_128_bits() {
        let mut rng = test_rng(5);
        let dev = DeviceSecret::provision("robot-1", &mut rng);
        let c = Challenge::generate(&mut rng);
        let r1 = puf_eval(&dev, &c);
        let r2 = puf_eval(&dev, &c);
        assert_eq!(r1, r2);
        assert_eq!(r1.0.len(), 16);
    }

    #[test]
    fn distinct_devices_distinct_responses() {
        let mut rng = test_rng(5);
        let a = DeviceSecret::provision("robot-a", &mut rng);
        let b = DeviceSecret::provision("robot-b", &mut rng);
        let c = Challenge::generate(&mut rng);
        assert_ne!(puf_eval(&a, &c), puf_eval(&b, &c));
    }

    #[test]
    fn enrollment_yields_distinct_consistent_pairs() {
        let mut rng = test_rng(6);
        let dev = DeviceSecret::provision("robot-1", &mut rng);
        let db = crp_enroll(&dev, 1000, &mut rng);
        assert_eq!(db.len(), 1000);
        for (c, r) in db.pairs() {
            assert_eq!(db.crp_verify(c, r), Ok(true));
        }
    }

    #[test]
    fn cross_device_evaluation_never_matches() {
        let mut rng = test_rng(7);
        let a = DeviceSecret::provision("robot-a", &mut rng);
        let b = DeviceSecret::provision("robot-b", &mut rng);
        let db = crp_enroll(&a, 1000, &mut rng);
        let matches = db
            .pairs()
            .filter(|(c, r)| puf_eval(&b, c) == **r)
            .count();
        assert_eq!(matches, 0);
    }

    #[test]
    fn one_time_issuance_and_exhaustion() {
        let mut rng = test_rng(8);
        let dev = DeviceSecret::provision("robot-1", &mut rng);
        let mut db = crp_enroll(&dev, 1000, &mut rng);
        let mut seen = HashSet::new();
        for _ in 0..1000 {
            let c = db.crp_select(&mut rng).unwrap();
            assert!(seen.insert(c), "challenge issued twice");
        }
        assert_eq!(db.crp_select(&mut rng), Err(PufError::CrpExhausted));
    }

    #[test]
    fn selection_is_seed_reproducible() {
        let mut rng = test_rng(9);
        let dev = DeviceSecret::provision("robot-1", &mut rng);
        let db = crp_enroll(&dev, 50, &mut rng);
        let mut db1 = db.clone();
        let mut db2 = db.clone();
        let seq1: Vec<_> = (0..50).map(|_| db1.crp_select(&mut test_rng(11)).unwrap()).collect();
        let seq2: Vec<_> = (0..50).map(|_| db2.crp_select(&mut test_rng(11)).unwrap()).collect();
        assert_eq!(seq1, seq2);
    }

    #[test]
    fn wrong_response_vs_unknown_challenge() {
        let mut rng = test_rng(10);
        let dev = DeviceSecret::provision("robot-1", &mut rng);
        let db = crp_enroll(&dev, 10, &mut rng);
        let (c, r) = db.pairs().next().map(|(c, r)| (*c, *r)).unwrap();
        let mut wrong = r;
        wrong.0[0] ^= 1;
        assert_eq!(db.crp_verify(&c, &wrong), Ok(false));
        let unknown = Challenge([0xEE; 16]);
        assert_eq!(db.crp_verify(&unknown, &r), Err(PufError::UnknownChallenge));
    }

    #[test]
    fn export_import_round_trip() {
        let mut rng = test_rng(12);
        let dev = DeviceSecret::provision("robot-1", &mut rng);
        let db = crp_enroll(&dev, 25, &mut rng);
        let mut buf = Vec::new();
        db.export(&mut buf).unwrap();
        let restored = CrpDatabase::import(buf.as_slice()).unwrap();
        assert_eq!(restored.device_id(), "robot-1");
        assert_eq!(restored.len(), 25);
        for (c, r) in db.pairs() {
            assert_eq!(restored.crp_verify(c, r), Ok(true));
        }
    }
}
