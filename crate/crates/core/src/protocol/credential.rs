//! Credential and presentation objects: the government credential, the
//! provider-issued customer credential, and the order-specific
//! presentation material.

use crate::cryptokit::{ecdsa_verify, CurveParams, CurvePoint, Digest64, Signature};
use crate::didledger::Did;

use super::{Bytes, ProtocolError};

/// What a credential attests.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CredKind {
    /// Government identity credential.
    Gov,
    /// Provider-issued customer credential.
    VcU,
    /// Order-specific credential digest.
    Osvc,
}

impl CredKind {
    fn tag(self) -> u8 {
        match self {
            CredKind::Gov => 0,
            CredKind::VcU => 1,
            CredKind::Osvc => 2,
        }
    }

    fn from_tag(tag: u8) -> Option<CredKind> {
        Some(match tag {
            0 => CredKind::Gov,
            1 => CredKind::VcU,
            2 => CredKind::Osvc,
            _ => None?,
        })
    }
}

/// Eligibility-relevant attributes disclosed by a government credential.
/// The holder's name feeds the digest but is never serialized.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct GovAttrs {
    pub age: u16,
    /// ISO-style two-letter country code.
    pub country: [u8; 2],
}

/// A signed credential: a digest bound to its issuer's DID, with
/// optional disclosed attributes.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Credential {
    pub digest: Digest64,
    pub signature: Signature,
    pub signer_did: Did,
    pub kind: CredKind,
    pub attrs: Option<GovAttrs>,
}

impl Credential {
    /// The bytes the issuer signs: kind, digest, and disclosed
    /// attributes. The signer DID is bound by key ownership, not bytes.
    pub fn signed_message(kind: CredKind, digest: Digest64, attrs: Option<&GovAttrs>) -> Vec<u8> {
        let mut out = b"cred:".to_vec();
        out.push(kind.tag());
        out.extend_from_slice(&digest.to_le_bytes());
        match attrs {
            Some(a) => {
                out.push(1);
                out.extend_from_slice(&a.age.to_le_bytes());
                out.extend_from_slice(&a.country);
            }
            None => out.push(0),
        }
        out
    }

    /// Verifies the issuer signature against a resolved public key.
    pub fn verify(&self, params: &CurveParams, issuer_public: &CurvePoint) -> bool {
        let msg = Credential::signed_message(self.kind, self.digest, self.attrs.as_ref());
        ecdsa_verify(params, &msg, &self.signature, issuer_public)
    }

    /// Canonical serialization (82 bytes without attributes, 86 with).
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(86);
        out.push(self.kind.tag());
        out.extend_from_slice(&self.digest.to_le_bytes());
        out.extend_from_slice(&self.signature.to_bytes());
        out.extend_from_slice(&self.signer_did.suffix.to_le_bytes());
        match &self.attrs {
            Some(a) => {
                out.push(1);
                out.extend_from_slice(&a.age.to_le_bytes());
                out.extend_from_slice(&a.country);
            }
            None => out.push(0),
        }
        out
    }

    /// Reads one credential from the front of a payload reader.
    pub(crate) fn read(r: &mut Bytes<'_>) -> Result<Credential, ProtocolError> {
        let kind = CredKind::from_tag(r.u8()?).ok_or(ProtocolError::MalformedPayload)?;
        let digest = r.digest()?;
        let signature = r.signature()?;
        let signer_did = r.did()?;
        let attrs = match r.u8()? {
            0 => None,
            1 => {
                let age = u16::from_le_bytes(r.take(2)?.try_into().unwrap());
                let country = r.take(2)?.try_into().unwrap();
                Some(GovAttrs { age, country })
            }
            _ => return Err(ProtocolError::MalformedPayload),
        };
        Ok(Credential {
            digest,
            signature,
            signer_did,
            kind,
            attrs,
        })
    }

    pub fn decode(bytes: &[u8]) -> Result<Credential, ProtocolError> {
        let mut r = Bytes::new(bytes);
        let cred = Credential::read(&mut r)?;
        r.finish()?;
        Ok(cred)
    }
}

/// Order-specific verifiable presentation: the provider's credential
/// signature plus the customer's session proof digest.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Presentation {
    pub credential_sig: Signature,
    pub proof_digest: Digest64,
}

/// A 1-bit verdict with the signature that makes it non-repudiable,
/// bound to one session via the binding digest.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct SignedSignal {
    pub verdict: bool,
    pub binding: Digest64,
    pub signature: Signature,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cryptokit::{ecdsa_sign, test_rng, CurveParams, KeyPair};

    fn sample(attrs: Option<GovAttrs>) -> (Credential, KeyPair) {
        let params = CurveParams::p256();
        let mut rng = test_rng(11);
        let kp = KeyPair::generate(params, &mut rng);
        let digest = Digest64(0xfeed);
        let msg = Credential::signed_message(CredKind::Gov, digest, attrs.as_ref());
        let signature = ecdsa_sign(params, &msg, &kp, &mut rng);
        (
            Credential {
                digest,
                signature,
                signer_did: Did { suffix: 5 },
                kind: CredKind::Gov,
                attrs,
            },
            kp,
        )
    }

    #[test]
    fn encode_decode_round_trip() {
        for attrs in [
            None,
            Some(GovAttrs {
                age: 34,
                country: *b"IN",
            }),
        ] {
            let (cred, _) = sample(attrs);
            assert_eq!(Credential::decode(&cred.encode()).unwrap(), cred);
        }
    }

    #[test]
    fn verify_accepts_issuer_key_only() {
        let params = CurveParams::p256();
        let (cred, kp) = sample(Some(GovAttrs {
            age: 40,
            country: *b"IN",
        }));
        assert!(cred.verify(params, &kp.public()));
        let rogue = KeyPair::generate(params, &mut test_rng(99));
        assert!(!cred.verify(params, &rogue.public()));
    }

    #[test]
    fn attribute_tampering_breaks_the_signature() {
        let params = CurveParams::p256();
        let (mut cred, kp) = sample(Some(GovAttrs {
            age: 16,
            country: *b"IN",
        }));
        cred.attrs = Some(GovAttrs {
            age: 21,
            country: *b"IN",
        });
        assert!(!cred.verify(params, &kp.public()));
    }

    #[test]
    fn truncated_encoding_rejected() {
        let (cred, _) = sample(None);
        let bytes = cred.encode();
        assert!(Credential::decode(&bytes[..bytes.len() - 1]).is_err());
    }
}
