//! Timestamps, nonces, and the replay-rejection freshness window.

use rand::RngCore;
use serde::{Deserialize, Serialize};

/// Milliseconds since the simulated-scenario epoch.
#[derive(
    Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Default, Serialize, Deserialize, Hash,
)]
pub struct Timestamp {
    pub millis: u64,
}

impl Timestamp {
    pub fn new(millis: u64) -> Timestamp {
        Timestamp { millis }
    }
}

/// Default freshness window of simulated time.
pub const DEFAULT_FRESHNESS_WINDOW_MS: u64 = 2000;

/// A timestamp is fresh iff `0 <= now - ts <= window`. Future-dated
/// timestamps are rejected.
pub fn timestamp_fresh(ts: Timestamp, now: Timestamp, window_ms: u64) -> bool {
    match now.millis.checked_sub(ts.millis) {
        Some(age) => age <= window_ms,
        None => false,
    }
}

/// 64-bit random token drawn from a scenario-seeded generator.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize, Default)]
pub struct Nonce64(pub u64);

impl Nonce64 {
    pub fn generate<R: RngCore>(rng: &mut R) -> Nonce64 {
        Nonce64(rng.next_u64())
    }

    pub fn to_le_bytes(self) -> [u8; 8] {
        self.0.to_le_bytes()
    }

    pub fn from_le_bytes(bytes: [u8; 8]) -> Nonce64 {
        Nonce64(u64::from_le_bytes(bytes))
    }
}
