//! Actor state machines — government issuer, customer wallet, service
//! provider, delivery robot — and the message handlers for the four
//! phases: credential obtaining, order placing, customer verification,
//! and robot verification.

pub mod catalog;
pub mod credential;
pub mod csp;
pub mod issuer;
pub mod robot;
pub mod wallet;

pub use catalog::{default_catalog, Product, ProductCatalog};
pub use credential::{CredKind, Credential, GovAttrs, Presentation, SignedSignal};
pub use csp::{Csp, CvReason};
pub use issuer::GovIssuer;
pub use robot::{Decision, Robot};
pub use wallet::{OrderContext, Wallet};

use thiserror::Error;

use crate::cryptokit::{CryptoError, Digest64, HashKey128, Nonce64};
use crate::didledger::{Did, LedgerError};
use crate::netbus::NetbusError;
use crate::pufsim::PufError;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("wallet holds no government credential")]
    MissingGovCredential,
    #[error("presented credential failed verification")]
    RejectedCredential,
    #[error("challenge-response signature failed verification")]
    ChallengeResponseFailure,
    #[error("message timestamp is outside the freshness window")]
    StaleTimestamp,
    #[error("recomputed order digest does not match the presented one")]
    ProductMismatch,
    #[error("customer does not meet the product's eligibility rule")]
    IneligibleCustomer,
    #[error("product id is not in the catalog")]
    UnknownProduct,
    #[error("wallet has no active order in the required state")]
    NoActiveOrder,
    #[error("no robot is available for dispatch")]
    NoRobotAvailable,
    #[error("robot has not been provisioned with a service key")]
    UnprovisionedRobot,
    #[error("no session matches this message")]
    UnknownSession,
    #[error("payload bytes do not match the expected layout")]
    MalformedPayload,
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Puf(#[from] PufError),
    #[error(transparent)]
    Netbus(#[from] NetbusError),
}

/// Signature domain tags, so a signature over one nonce or challenge can
/// never stand in for another message type.
pub(crate) mod domain {
    pub const REG_CSP_NONCE: &[u8] = b"reg-nu-csp:";
    pub const REG_CUST_NONCE: &[u8] = b"reg-ncsp-cust:";
    pub const ORDER_NONCE: &[u8] = b"ord-nu-cust:";
    pub const ORDER_CSP_NONCE: &[u8] = b"ord-ncsp-csp:";
    pub const PRESENT_NONCE: &[u8] = b"cv-nu-cust:";
    pub const RV_NONCE: &[u8] = b"rv-n4-cust:";
    pub const RV_CHALLENGE_CSP: &[u8] = b"rv-ch-csp:";
    pub const RV_CHALLENGE_CUST: &[u8] = b"rv-ch-cust:";
    pub const RV_CHALLENGE_RELAY: &[u8] = b"rv-ch-relay:";
    pub const OSVC: &[u8] = b"osvc-csp:";
    pub const SIGNAL: &[u8] = b"signal-csp:";
}

/// Message bytes for a domain-separated nonce signature.
pub(crate) fn nonce_message(tag: &[u8], nonce: Nonce64) -> Vec<u8> {
    let mut out = tag.to_vec();
    out.extend_from_slice(&nonce.to_le_bytes());
    out
}

/// Message bytes for a domain-separated challenge signature.
pub(crate) fn challenge_message(tag: &[u8], challenge: &[u8; 16]) -> Vec<u8> {
    let mut out = tag.to_vec();
    out.extend_from_slice(challenge);
    out
}

/// Message bytes for a signed verdict signal: the bit plus the
/// session-binding digest, so a signal cannot be replayed across orders.
pub(crate) fn signal_message(verdict: bool, binding: Digest64) -> Vec<u8> {
    let mut out = domain::SIGNAL.to_vec();
    out.push(verdict as u8);
    out.extend_from_slice(&binding.to_le_bytes());
    out
}

/// Order session key: both order nonces concatenated, 128 bits total.
/// Both parties can derive it once the second nonce is exchanged.
pub(crate) fn order_key(n_star_u: Nonce64, n_star_csp: Nonce64) -> HashKey128 {
    let mut key = [0u8; 16];
    key[..8].copy_from_slice(&n_star_u.to_le_bytes());
    key[8..].copy_from_slice(&n_star_csp.to_le_bytes());
    HashKey128(key)
}

/// Pre-session key used for the order digest before the provider's
/// nonce exists: the customer nonce repeated to 128 bits.
pub(crate) fn preorder_key(n_star_u: Nonce64) -> HashKey128 {
    let mut key = [0u8; 16];
    key[..8].copy_from_slice(&n_star_u.to_le_bytes());
    key[8..].copy_from_slice(&n_star_u.to_le_bytes());
    HashKey128(key)
}

/// Session-binding digest for success/failure signals: keyed hash of the
/// customer DID and the provider's order nonce.
pub(crate) fn session_binding(key: &HashKey128, did_u: Did, n_star_csp: Nonce64) -> Digest64 {
    let mut msg = did_u.suffix.to_le_bytes().to_vec();
    msg.extend_from_slice(&n_star_csp.to_le_bytes());
    crate::cryptokit::siphash64(key, &msg)
}

/// Message bytes for the provider's signature over an order-specific
/// credential digest.
pub(crate) fn osvc_message(osvc: Digest64) -> Vec<u8> {
    let mut out = domain::OSVC.to_vec();
    out.extend_from_slice(&osvc.to_le_bytes());
    out
}

/// Builds a protocol envelope addressed to `topic`.
pub(crate) fn make_envelope(
    kind: crate::netbus::MsgKind,
    sender: &str,
    receiver: &str,
    topic: &str,
    timestamp: crate::cryptokit::Timestamp,
    fields: Vec<crate::netbus::Field>,
) -> crate::netbus::Envelope {
    crate::netbus::Envelope {
        topic: topic.to_string(),
        kind,
        sender: sender.to_string(),
        receiver: receiver.to_string(),
        timestamp,
        fields,
    }
}

/// Extracts a plaintext field of the expected kind at a fixed position.
pub(crate) fn plain_field<'a>(
    env: &'a crate::netbus::Envelope,
    idx: usize,
    kind: crate::netbus::FieldKind,
) -> Result<&'a [u8], ProtocolError> {
    match env.fields.get(idx) {
        Some(crate::netbus::Field::Plain { kind: k, bytes }) if *k == kind => Ok(bytes),
        _ => Err(ProtocolError::MalformedPayload),
    }
}

/// Extracts the ciphertext of an encrypted field at a fixed position.
pub(crate) fn cipher_field<'a>(
    env: &'a crate::netbus::Envelope,
    idx: usize,
) -> Result<&'a [u8], ProtocolError> {
    match env.fields.get(idx) {
        Some(crate::netbus::Field::Encrypted { ciphertext, .. }) => Ok(ciphertext),
        _ => Err(ProtocolError::MalformedPayload),
    }
}

/// Sequential reader over a plaintext payload with exact-consumption
/// checking.
pub(crate) struct Bytes<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Bytes<'a> {
    pub(crate) fn new(buf: &'a [u8]) -> Bytes<'a> {
        Bytes { buf, pos: 0 }
    }

    pub(crate) fn take(&mut self, n: usize) -> Result<&'a [u8], ProtocolError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&end| end <= self.buf.len())
            .ok_or(ProtocolError::MalformedPayload)?;
        let slice = &self.buf[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    pub(crate) fn u8(&mut self) -> Result<u8, ProtocolError> {
        Ok(self.take(1)?[0])
    }

    pub(crate) fn u64(&mut self) -> Result<u64, ProtocolError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub(crate) fn nonce(&mut self) -> Result<Nonce64, ProtocolError> {
        Ok(Nonce64(self.u64()?))
    }

    pub(crate) fn digest(&mut self) -> Result<Digest64, ProtocolError> {
        Ok(Digest64(self.u64()?))
    }

    pub(crate) fn did(&mut self) -> Result<Did, ProtocolError> {
        Ok(Did { suffix: self.u64()? })
    }

    pub(crate) fn signature(&mut self) -> Result<crate::cryptokit::Signature, ProtocolError> {
        crate::cryptokit::Signature::from_bytes(self.take(64)?)
            .map_err(|_| ProtocolError::MalformedPayload)
    }

    pub(crate) fn array16(&mut self) -> Result<[u8; 16], ProtocolError> {
        Ok(self.take(16)?.try_into().unwrap())
    }

    pub(crate) fn finish(self) -> Result<(), ProtocolError> {
        if self.pos == self.buf.len() {
            Ok(())
        } else {
            Err(ProtocolError::MalformedPayload)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_key_concatenates_both_nonces() {
        let key = order_key(Nonce64(0x0102030405060708), Nonce64(0x1112131415161718));
        assert_eq!(&key.0[..8], &0x0102030405060708u64.to_le_bytes());
        assert_eq!(&key.0[8..], &0x1112131415161718u64.to_le_bytes());
    }

    #[test]
    fn byte_reader_checks_exact_consumption() {
        let buf = [1u8, 2, 3];
        let mut r = Bytes::new(&buf);
        assert_eq!(r.u8().unwrap(), 1);
        assert!(r.take(5).is_err());
        assert_eq!(r.take(2).unwrap(), &[2, 3]);
        r.finish().unwrap();

        let mut r = Bytes::new(&buf);
        r.u8().unwrap();
        assert_eq!(r.finish().unwrap_err(), ProtocolError::MalformedPayload);
    }

    #[test]
    fn signal_messages_differ_by_verdict_and_binding() {
        let a = signal_message(true, Digest64(7));
        let b = signal_message(false, Digest64(7));
        let c = signal_message(true, Digest64(8));
        assert_ne!(a, b);
        assert_ne!(a, c);
    }
}
