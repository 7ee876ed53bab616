//! Nominal bit-cost accounting for envelopes.
//!
//! The default profile prices each field at its nominal protocol size
//! (64-bit DIDs, credentials, and hash outputs; 128-bit challenges and
//! responses; 1-bit flags), counts an encrypted payload as the sum of its
//! plaintext fields, and excludes timestamps. Under this profile the
//! order-placing phase costs exactly 448 bits.

use std::collections::BTreeMap;

use super::envelope::{Envelope, Field, FieldKind};
use super::NetbusError;

/// Per-field nominal sizes and the resulting per-message total.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitCost {
    pub per_field: Vec<(FieldKind, u64)>,
    pub total_bits: u64,
}

/// An accounting profile: field-kind to nominal bit size.
#[derive(Clone, Debug)]
pub struct CostProfile {
    name: String,
    sizes: BTreeMap<FieldKind, u64>,
    count_timestamps: bool,
}

impl CostProfile {
    /// The profile that reproduces the published order-placing total.
    pub fn default_profile() -> CostProfile {
        let mut sizes = BTreeMap::new();
        sizes.insert(FieldKind::Did, 64);
        sizes.insert(FieldKind::Nonce, 64);
        sizes.insert(FieldKind::Digest, 64);
        sizes.insert(FieldKind::Signature, 64);
        sizes.insert(FieldKind::SignedNonce, 64);
        sizes.insert(FieldKind::Credential, 64);
        sizes.insert(FieldKind::ProductId, 64);
        sizes.insert(FieldKind::Challenge, 128);
        sizes.insert(FieldKind::SignedChallenge, 128);
        sizes.insert(FieldKind::Response, 128);
        sizes.insert(FieldKind::VerdictBit, 1);
        sizes.insert(FieldKind::FlagBit, 1);
        sizes.insert(FieldKind::Token, 64);
        CostProfile {
            name: "default".to_string(),
            sizes,
            count_timestamps: false,
        }
    }

    pub fn by_name(name: &str) -> Option<CostProfile> {
        match name {
            "default" => Some(CostProfile::default_profile()),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn size_of(&self, kind: FieldKind) -> Result<u64, NetbusError> {
        self.sizes
            .get(&kind)
            .copied()
            .ok_or_else(|| NetbusError::UnknownFieldKind(format!("{kind:?}")))
    }

    /// Computes the nominal cost of one envelope.
    pub fn cost_of(&self, envelope: &Envelope) -> Result<BitCost, NetbusError> {
        let mut per_field = Vec::new();
        let mut total = 0u64;
        for field in &envelope.fields {
            match field {
                Field::Plain { kind, .. } => {
                    let bits = self.size_of(*kind)?;
                    per_field.push((*kind, bits));
                    total += bits;
                }
                Field::Encrypted { inner, .. } => {
                    for kind in inner {
                        let bits = self.size_of(*kind)?;
                        per_field.push((*kind, bits));
                        total += bits;
                    }
                }
            }
        }
        if self.count_timestamps {
            total += 64;
        }
        Ok(BitCost {
            per_field,
            total_bits: total,
        })
    }
}

/// Canonical wire bytes plus the nominal bit cost under a profile.
pub fn encode_envelope(
    envelope: &Envelope,
    profile: &CostProfile,
) -> Result<(Vec<u8>, BitCost), NetbusError> {
    let cost = profile.cost_of(envelope)?;
    Ok((envelope.encode(), cost))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cryptokit::freshness::Timestamp;
    use crate::netbus::envelope::MsgKind;

    fn env(fields: Vec<Field>) -> Envelope {
        Envelope {
            topic: "t".into(),
            kind: MsgKind::OrdM1,
            sender: "a".into(),
            receiver: "b".into(),
            timestamp: Timestamp::new(0),
            fields,
        }
    }

    #[test]
    fn empty_payload_costs_zero() {
        let profile = CostProfile::default_profile();
        assert_eq!(profile.cost_of(&env(vec![])).unwrap().total_bits, 0);
    }

    #[test]
    fn verdict_bit_costs_one() {
        let profile = CostProfile::default_profile();
        let e = env(vec![Field::Plain {
            kind: FieldKind::VerdictBit,
            bytes: vec![1],
        }]);
        assert_eq!(profile.cost_of(&e).unwrap().total_bits, 1);
    }

    #[test]
    fn order_m1_is_320_bits() {
        // X_1 (64) + signed nonce (64) + product id (64) + credential (64)
        // + DID (64), inside one encrypted payload.
        let profile = CostProfile::default_profile();
        let e = env(vec![Field::Encrypted {
            inner: vec![
                FieldKind::Digest,
                FieldKind::SignedNonce,
                FieldKind::ProductId,
                FieldKind::Credential,
                FieldKind::Did,
            ],
            ciphertext: vec![0; 200],
        }]);
        let cost = profile.cost_of(&e).unwrap();
        assert_eq!(cost.total_bits, 320);
        // Sum-of-fields oracle.
        let re_sum: u64 = cost.per_field.iter().map(|(_, b)| b).sum();
        assert_eq!(re_sum, cost.total_bits);
    }
}
