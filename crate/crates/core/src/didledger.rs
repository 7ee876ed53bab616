//! Permissioned, append-only, hash-chained DID registry with role-based
//! access control, one-time binding credentials, resolution, and
//! revocation. Single admin writer, no consensus; the mock of the
//! company-operated permissioned blockchain.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cryptokit::curve::{CurveParams, CurvePoint};
use crate::cryptokit::ecdsa::Signature;
use crate::cryptokit::freshness::Timestamp;
use crate::cryptokit::siphash::{siphash64, Digest64, HashKey128};

/// Public chain-hashing key. Tamper evidence, not secrecy, is the goal:
/// anyone may recompute the chain.
const CHAIN_KEY: HashKey128 = HashKey128(*b"courier-chain-v1");

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LedgerError {
    #[error("caller role is not authorized for this operation")]
    Unauthorized,
    #[error("DID is already bound")]
    DuplicateDid,
    #[error("one-time credential was already consumed")]
    ConsumedCredential,
    #[error("DID is not bound on this ledger")]
    UnknownDid,
    #[error("DID has been revoked")]
    RevokedDid,
    #[error("persistence error: {0}")]
    Persistence(String),
}

/// Caller role for ledger access control.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash, Serialize, Deserialize)]
pub enum AccessRole {
    Admin,
    Csp,
    Customer,
    Issuer,
    Anonymous,
}

impl AccessRole {
    fn tag(self) -> u8 {
        match self {
            AccessRole::Admin => 0,
            AccessRole::Csp => 1,
            AccessRole::Customer => 2,
            AccessRole::Issuer => 3,
            AccessRole::Anonymous => 4,
        }
    }

    fn from_tag(tag: u8) -> Option<AccessRole> {
        Some(match tag {
            0 => AccessRole::Admin,
            1 => AccessRole::Csp,
            2 => AccessRole::Customer,
            3 => AccessRole::Issuer,
            4 => AccessRole::Anonymous,
            _ => return None,
        })
    }
}

/// A `did:courier` identifier with a 64-bit suffix, fresh per
/// registration.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
pub struct Did {
    pub suffix: u64,
}

impl Did {
    pub const METHOD: &'static str = "did:courier";

    /// Derives a fresh DID from a public key and a nonce: the suffix is
    /// the 64-bit keyed hash of both.
    pub fn derive(public_key: &CurvePoint, nonce: u64) -> Did {
        let mut material = Vec::with_capacity(73);
        material.extend_from_slice(&public_key.encode());
        material.extend_from_slice(&nonce.to_le_bytes());
        Did {
            suffix: siphash64(&CHAIN_KEY, &material).0,
        }
    }
}

impl fmt::Display for Did {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{:016x}", Did::METHOD, self.suffix)
    }
}

impl std::str::FromStr for Did {
    type Err = LedgerError;

    fn from_str(s: &str) -> Result<Did, LedgerError> {
        let suffix = s
            .strip_prefix(Did::METHOD)
            .and_then(|rest| rest.strip_prefix(':'))
            .filter(|hex| hex.len() == 16)
            .and_then(|hex| u64::from_str_radix(hex, 16).ok())
            .ok_or(LedgerError::UnknownDid)?;
        Ok(Did { suffix })
    }
}

impl fmt::Debug for Did {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{:016x}", Did::METHOD, self.suffix)
    }
}

/// The record a DID resolves to: public key plus hashed order metadata.
/// Order details never appear here in plaintext.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DidDocument {
    pub did: Did,
    pub public_key: CurvePoint,
    pub metadata_digest: Option<Digest64>,
    pub created_at: Timestamp,
    pub revoked: bool,
}

/// One-time binding credential (TID_u, cr_u), usable exactly once.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OneTimeCredential {
    pub tid: u64,
    pub cred: u64,
    pub consumed: bool,
}

/// Ledger event payloads. The credential-issued event stores only a
/// digest of the credential so ledger readers cannot replay it.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum LedgerEvent {
    Bind(DidDocument),
    Revoke { did: Did },
    ResolveGrant { did: Did, requester: AccessRole },
    CredentialIssued { tid: u64, cred_digest: Digest64 },
}

impl LedgerEvent {
    pub fn type_name(&self) -> &'static str {
        match self {
            LedgerEvent::Bind(_) => "bind",
            LedgerEvent::Revoke { .. } => "revoke",
            LedgerEvent::ResolveGrant { .. } => "resolve-grant",
            LedgerEvent::CredentialIssued { .. } => "credential-issued",
        }
    }

    /// Canonical byte encoding: a tag byte followed by fixed-order fields.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        match self {
            LedgerEvent::Bind(doc) => {
                out.push(0x01);
                out.extend_from_slice(&doc.did.suffix.to_le_bytes());
                out.extend_from_slice(&doc.public_key.encode());
                match doc.metadata_digest {
                    Some(d) => {
                        out.push(1);
                        out.extend_from_slice(&d.to_le_bytes());
                    }
                    None => out.push(0),
                }
                out.extend_from_slice(&doc.created_at.millis.to_le_bytes());
            }
            LedgerEvent::Revoke { did } => {
                out.push(0x02);
                out.extend_from_slice(&did.suffix.to_le_bytes());
            }
            LedgerEvent::ResolveGrant { did, requester } => {
                out.push(0x03);
                out.extend_from_slice(&did.suffix.to_le_bytes());
                out.push(requester.tag());
            }
            LedgerEvent::CredentialIssued { tid, cred_digest } => {
                out.push(0x04);
                out.extend_from_slice(&tid.to_le_bytes());
                out.extend_from_slice(&cred_digest.to_le_bytes());
            }
        }
        out
    }

    pub fn decode(params: &CurveParams, bytes: &[u8]) -> Option<LedgerEvent> {
        let (&tag, rest) = bytes.split_first()?;
        match tag {
            0x01 => {
                if rest.len() < 8 + 65 + 1 + 8 {
                    return None;
                }
                let suffix = u64::from_le_bytes(rest[..8].try_into().ok()?);
                let public_key = params.decode_point(&rest[8..73]).ok()?;
                let (metadata_digest, off) = match rest[73] {
                    0 => (None, 74),
                    1 => (
                        Some(Digest64::from_le_bytes(rest[74..82].try_into().ok()?)),
                        82,
                    ),
                    _ => return None,
                };
                let created_at =
                    Timestamp::new(u64::from_le_bytes(rest[off..off + 8].try_into().ok()?));
                Some(LedgerEvent::Bind(DidDocument {
                    did: Did { suffix },
                    public_key,
                    metadata_digest,
                    created_at,
                    revoked: false,
                }))
            }
            0x02 => Some(LedgerEvent::Revoke {
                did: Did {
                    suffix: u64::from_le_bytes(rest.get(..8)?.try_into().ok()?),
                },
            }),
            0x03 => Some(LedgerEvent::ResolveGrant {
                did: Did {
                    suffix: u64::from_le_bytes(rest.get(..8)?.try_into().ok()?),
                },
                requester: AccessRole::from_tag(*rest.get(8)?)?,
            }),
            0x04 => Some(LedgerEvent::CredentialIssued {
                tid: u64::from_le_bytes(rest.get(..8)?.try_into().ok()?),
                cred_digest: Digest64::from_le_bytes(rest.get(8..16)?.try_into().ok()?),
            }),
            _ => None,
        }
    }
}

/// Hash-chained, immutable-once-appended ledger record.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LedgerEntry {
    pub index: u64,
    pub payload: LedgerEvent,
    pub prev_hash: Digest64,
    pub entry_hash: Digest64,
}

fn chain_hash(index: u64, prev_hash: Digest64, payload: &[u8]) -> Digest64 {
    let mut material = Vec::with_capacity(16 + payload.len());
    material.extend_from_slice(&index.to_le_bytes());
    material.extend_from_slice(&prev_hash.to_le_bytes());
    material.extend_from_slice(payload);
    siphash64(&CHAIN_KEY, &material)
}

/// Outcome of a full chain re-verification.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ChainCheck {
    Valid,
    InvalidAt(u64),
}

impl ChainCheck {
    pub fn is_valid(&self) -> bool {
        matches!(self, ChainCheck::Valid)
    }
}

#[derive(Debug, Clone, Copy)]
struct OtcState {
    cred_digest: Digest64,
    consumed: bool,
}

/// The permissioned DID registry.
pub struct Ledger {
    entries: Vec<LedgerEntry>,
    documents: HashMap<Did, DidDocument>,
    issuer_dids: Vec<Did>,
    otcs: HashMap<u64, OtcState>,
}

fn cred_digest(tid: u64, cred: u64) -> Digest64 {
    let mut material = [0u8; 16];
    material[..8].copy_from_slice(&tid.to_le_bytes());
    material[8..].copy_from_slice(&cred.to_le_bytes());
    siphash64(&CHAIN_KEY, &material)
}

impl Ledger {
    pub fn new() -> Ledger {
        Ledger {
            entries: Vec::new(),
            documents: HashMap::new(),
            issuer_dids: Vec::new(),
            otcs: HashMap::new(),
        }
    }

    /// Genesis with pre-seeded government-issuer documents; the registry
    /// must know all valid issuers from the start.
    pub fn with_issuers(issuers: &[DidDocument]) -> Result<Ledger, LedgerError> {
        let mut ledger = Ledger::new();
        for doc in issuers {
            ledger.bind_did(doc.clone(), AccessRole::Admin, None)?;
            ledger.issuer_dids.push(doc.did);
        }
        Ok(ledger)
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn issuer_dids(&self) -> &[Did] {
        &self.issuer_dids
    }

    fn append(&mut self, payload: LedgerEvent) -> &LedgerEntry {
        let index = self.entries.len() as u64;
        let prev_hash = self
            .entries
            .last()
            .map(|e| e.entry_hash)
            .unwrap_or_default();
        let entry_hash = chain_hash(index, prev_hash, &payload.encode());
        self.entries.push(LedgerEntry {
            index,
            payload,
            prev_hash,
            entry_hash,
        });
        self.entries.last().unwrap()
    }

    /// Admin-only: mints a fresh one-time binding credential and records
    /// its issuance (digest only) on the chain.
    pub fn issue_onetime_credential<R: RngCore>(
        &mut self,
        auth: AccessRole,
        rng: &mut R,
    ) -> Result<OneTimeCredential, LedgerError> {
        if auth != AccessRole::Admin {
            return Err(LedgerError::Unauthorized);
        }
        let mut tid = rng.next_u64();
        while self.otcs.contains_key(&tid) {
            tid = rng.next_u64();
        }
        let cred = rng.next_u64();
        let digest = cred_digest(tid, cred);
        self.otcs.insert(
            tid,
            OtcState {
                cred_digest: digest,
                consumed: false,
            },
        );
        self.append(LedgerEvent::CredentialIssued {
            tid,
            cred_digest: digest,
        });
        Ok(OneTimeCredential {
            tid,
            cred,
            consumed: false,
        })
    }

    /// Binds a DID document. Customers must present a matching unconsumed
    /// one-time credential; the CSP and admin bind without one.
    pub fn bind_did(
        &mut self,
        doc: DidDocument,
        auth: AccessRole,
        otc: Option<&mut OneTimeCredential>,
    ) -> Result<LedgerEntry, LedgerError> {
        if self.documents.contains_key(&doc.did) {
            return Err(LedgerError::DuplicateDid);
        }
        match auth {
            AccessRole::Admin | AccessRole::Csp => {}
            AccessRole::Customer => {
                let otc = otc.ok_or(LedgerError::Unauthorized)?;
                let state = self.otcs.get_mut(&otc.tid).ok_or(LedgerError::Unauthorized)?;
                if state.cred_digest != cred_digest(otc.tid, otc.cred) {
                    return Err(LedgerError::Unauthorized);
                }
                if state.consumed {
                    return Err(LedgerError::ConsumedCredential);
                }
                state.consumed = true;
                otc.consumed = true;
            }
            AccessRole::Issuer | AccessRole::Anonymous => return Err(LedgerError::Unauthorized),
        }
        self.documents.insert(doc.did, doc.clone());
        Ok(self.append(LedgerEvent::Bind(doc)).clone())
    }

    /// Resolves a DID into its document and appends a resolve-grant audit
    /// event. The CSP and customers must forward the signed request
    /// material of the holder; issuer documents are public-read to the
    /// CSP. Anonymous callers are always refused.
    pub fn resolve_did(
        &mut self,
        did: Did,
        requester: AccessRole,
        proof: Option<&Signature>,
    ) -> Result<DidDocument, LedgerError> {
        let is_issuer_doc = self.issuer_dids.contains(&did);
        match requester {
            AccessRole::Admin => {}
            AccessRole::Csp if is_issuer_doc => {}
            AccessRole::Csp | AccessRole::Customer => {
                // Signed-request material must accompany the resolution;
                // its cryptographic verification happens at the protocol
                // layer, which holds the relevant public keys.
                if proof.is_none() {
                    return Err(LedgerError::Unauthorized);
                }
            }
            AccessRole::Issuer | AccessRole::Anonymous => return Err(LedgerError::Unauthorized),
        }
        let doc = self.documents.get(&did).ok_or(LedgerError::UnknownDid)?;
        if doc.revoked {
            return Err(LedgerError::RevokedDid);
        }
        let doc = doc.clone();
        self.append(LedgerEvent::ResolveGrant { did, requester });
        Ok(doc)
    }

    /// Admin-only revocation; prior entries stay untouched.
    pub fn revoke_did(&mut self, did: Did, auth: AccessRole) -> Result<LedgerEntry, LedgerError> {
        if auth != AccessRole::Admin {
            return Err(LedgerError::Unauthorized);
        }
        let doc = self.documents.get_mut(&did).ok_or(LedgerError::UnknownDid)?;
        doc.revoked = true;
        Ok(self.append(LedgerEvent::Revoke { did }).clone())
    }

    /// Recomputes every entry hash and checks index continuity.
    pub fn verify_chain(&self) -> ChainCheck {
        let mut prev = Digest64::default();
        for (i, entry) in self.entries.iter().enumerate() {
            if entry.index != i as u64
                || entry.prev_hash != prev
                || entry.entry_hash != chain_hash(entry.index, entry.prev_hash, &entry.payload.encode())
            {
                return ChainCheck::InvalidAt(i as u64);
            }
            prev = entry.entry_hash;
        }
        ChainCheck::Valid
    }

    /// Persists as one JSON object per line with fixed field order.
    pub fn save_to<W: Write>(&self, mut out: W) -> Result<(), LedgerError> {
        for entry in &self.entries {
            let record = PersistedEntry {
                index: entry.index,
                r#type: entry.payload.type_name().to_string(),
                payload: hex::encode(entry.payload.encode()),
                prev_hash: entry.prev_hash.to_hex(),
                entry_hash: entry.entry_hash.to_hex(),
            };
            let line = serde_json::to_string(&record)
                .map_err(|e| LedgerError::Persistence(e.to_string()))?;
            writeln!(out, "{line}").map_err(|e| LedgerError::Persistence(e.to_string()))?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<(), LedgerError> {
        let file =
            std::fs::File::create(path).map_err(|e| LedgerError::Persistence(e.to_string()))?;
        self.save_to(std::io::BufWriter::new(file))
    }

    /// Reloads a persisted ledger, rebuilding the derived state. The
    /// stored hashes are kept as-is so that `verify_chain` re-checks the
    /// persisted bytes rather than silently repairing them.
    pub fn load_from<Rd: BufRead>(params: &CurveParams, reader: Rd) -> Result<Ledger, LedgerError> {
        let mut ledger = Ledger::new();
        for line in reader.lines() {
            let line = line.map_err(|e| LedgerError::Persistence(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let record: PersistedEntry = serde_json::from_str(&line)
                .map_err(|e| LedgerError::Persistence(e.to_string()))?;
            let payload_bytes = hex::decode(&record.payload)
                .map_err(|e| LedgerError::Persistence(e.to_string()))?;
            let payload = LedgerEvent::decode(params, &payload_bytes)
                .ok_or_else(|| LedgerError::Persistence("undecodable payload".into()))?;
            let parse_digest = |s: &str| -> Result<Digest64, LedgerError> {
                let mut bytes = [0u8; 8];
                hex::decode_to_slice(s, &mut bytes)
                    .map_err(|e| LedgerError::Persistence(e.to_string()))?;
                Ok(Digest64::from_le_bytes(bytes))
            };
            let entry = LedgerEntry {
                index: record.index,
                payload,
                prev_hash: parse_digest(&record.prev_hash)?,
                entry_hash: parse_digest(&record.entry_hash)?,
            };
            ledger.apply_loaded(entry);
        }
        Ok(ledger)
    }

    pub fn load(params: &CurveParams, path: &Path) -> Result<Ledger, LedgerError> {
        let file =
            std::fs::File::open(path).map_err(|e| LedgerError::Persistence(e.to_string()))?;
        Ledger::load_from(params, std::io::BufReader::new(file))
    }

    fn apply_loaded(&mut self, entry: LedgerEntry) {
        match &entry.payload {
            LedgerEvent::Bind(doc) => {
                self.documents.insert(doc.did, doc.clone());
            }
            LedgerEvent::Revoke { did } => {
                if let Some(doc) = self.documents.get_mut(did) {
                    doc.revoked = true;
                }
            }
            LedgerEvent::CredentialIssued { tid, cred_digest } => {
                self.otcs.insert(
                    *tid,
                    OtcState {
                        cred_digest: *cred_digest,
                        consumed: false,
                    },
                );
            }
            LedgerEvent::ResolveGrant { .. } => {}
        }
        self.entries.push(entry);
    }
}

impl Default for Ledger {
    fn default() -> Self {
        Ledger::new()
    }
}

#[derive(Serialize, Deserialize)]
struct PersistedEntry {
    index: u64,
    r#type: String,
    payload: String,
    prev_hash: String,
    entry_hash: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cryptokit::ecdsa::KeyPair;
    use crate::cryptokit::test_rng;

    fn sample_doc(seed: u64, nonce: u64) -> DidDocument {
        let params = CurveParams::p256();
        let kp = KeyPair::generate(params, &mut test_rng(seed));
        let public_key = kp.public();
        DidDocument {
            did: Did::derive(&public_key, nonce),
            public_key,
            metadata_digest: None,
            created_at: Timestamp::new(0),
            revoked: false,
        }
    }

    #[test]
    fn otc_issuance_is_admin_only_and_unique() {
        let mut ledger = Ledger::new();
        let mut rng = test_rng(1);
        let a = ledger
            .issue_onetime_credential(AccessRole::Admin, &mut rng)
            .unwrap();
        let b = ledger
            .issue_onetime_credential(AccessRole::Admin, &mut rng)
            .unwrap();
        assert!(!a.consumed);
        assert_ne!(a.tid, b.tid);
        assert_eq!(
            ledger.issue_onetime_credential(AccessRole::Customer, &mut rng),
            Err(LedgerError::Unauthorized)
        );
    }

    #[test]
    fn customer_bind_consumes_otc() {
        let mut ledger = Ledger::new();
        let mut rng = test_rng(2);
        let mut otc = ledger
            .issue_onetime_credential(AccessRole::Admin, &mut rng)
            .unwrap();
        ledger
            .bind_did(sample_doc(1, 1), AccessRole::Customer, Some(&mut otc))
            .unwrap();
        assert!(otc.consumed);
        let err = ledger
            .bind_did(sample_doc(2, 2), AccessRole::Customer, Some(&mut otc))
            .unwrap_err();
        assert_eq!(err, LedgerError::ConsumedCredential);
    }

    #[test]
    fn duplicate_bind_rejected() {
        let mut ledger = Ledger::new();
        let doc = sample_doc(3, 3);
        ledger.bind_did(doc.clone(), AccessRole::Csp, None).unwrap();
        assert_eq!(
            ledger.bind_did(doc, AccessRole::Csp, None).unwrap_err(),
            LedgerError::DuplicateDid
        );
    }

    #[test]
    fn bind_without_otc_or_role_rejected() {
        let mut ledger = Ledger::new();
        assert_eq!(
            ledger
                .bind_did(sample_doc(4, 4), AccessRole::Customer, None)
                .unwrap_err(),
            LedgerError::Unauthorized
        );
        assert_eq!(
            ledger
                .bind_did(sample_doc(4, 5), AccessRole::Anonymous, None)
                .unwrap_err(),
            LedgerError::Unauthorized
        );
    }

    #[test]
    fn resolution_access_control() {
        let params = CurveParams::p256();
        let mut ledger = Ledger::new();
        let doc = sample_doc(5, 5);
        let did = doc.did;
        ledger.bind_did(doc, AccessRole::Csp, None).unwrap();
        // A stand-in signed request; the ledger checks presence.
        let kp = KeyPair::generate(params, &mut test_rng(5));
        let proof =
            crate::cryptokit::ecdsa::ecdsa_sign(params, b"resolve", &kp, &mut test_rng(5));
        assert!(ledger.resolve_did(did, AccessRole::Csp, Some(&proof)).is_ok());
        assert_eq!(
            ledger.resolve_did(did, AccessRole::Csp, None).unwrap_err(),
            LedgerError::Unauthorized
        );
        assert_eq!(
            ledger.resolve_did(did, AccessRole::Anonymous, None).unwrap_err(),
            LedgerError::Unauthorized
        );
        assert_eq!(
            ledger
                .resolve_did(Did { suffix: 0xdead }, AccessRole::Admin, None)
                .unwrap_err(),
            LedgerError::UnknownDid
        );
    }

    #[test]
    fn issuer_docs_are_public_read_for_csp() {
        let doc = sample_doc(6, 6);
        let did = doc.did;
        let mut ledger = Ledger::with_issuers(&[doc]).unwrap();
        assert!(ledger.resolve_did(did, AccessRole::Csp, None).is_ok());
    }

    #[test]
    fn revoke_then_resolve_fails_and_appends_one_entry() {
        let mut ledger = Ledger::new();
        let doc = sample_doc(7, 7);
        let did = doc.did;
        ledger.bind_did(doc, AccessRole::Csp, None).unwrap();
        let before = ledger.len();
        ledger.revoke_did(did, AccessRole::Admin).unwrap();
        assert_eq!(ledger.len(), before + 1);
        assert_eq!(
            ledger.resolve_did(did, AccessRole::Admin, None).unwrap_err(),
            LedgerError::RevokedDid
        );
        assert_eq!(
            ledger
                .revoke_did(Did { suffix: 1 }, AccessRole::Admin)
                .unwrap_err(),
            LedgerError::UnknownDid
        );
        assert_eq!(
            ledger.revoke_did(did, AccessRole::Csp).unwrap_err(),
            LedgerError::Unauthorized
        );
    }

    #[test]
    fn empty_chain_is_valid() {
        assert!(Ledger::new().verify_chain().is_valid());
    }

    #[test]
    fn chain_verifies_and_detects_tampering() {
        let params = CurveParams::p256();
        let mut ledger = Ledger::new();
        for i in 0..5 {
            ledger.bind_did(sample_doc(10 + i, i), AccessRole::Csp, None).unwrap();
        }
        assert!(ledger.verify_chain().is_valid());

        // Tamper with the persisted form and reload.
        let mut buf = Vec::new();
        ledger.save_to(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let tampered = text.replacen("\"payload\":\"01", "\"payload\":\"02", 1);
        assert_ne!(text, tampered);
        let reloaded = Ledger::load_from(params, tampered.as_bytes()).unwrap();
        assert_eq!(reloaded.verify_chain(), ChainCheck::InvalidAt(0));
    }

    #[test]
    fn persistence_round_trip_is_bit_exact() {
        let params = CurveParams::p256();
        let mut ledger = Ledger::new();
        let mut rng = test_rng(20);
        ledger.issue_onetime_credential(AccessRole::Admin, &mut rng).unwrap();
        let doc = sample_doc(21, 1);
        let did = doc.did;
        ledger.bind_did(doc, AccessRole::Csp, None).unwrap();
        let kp = KeyPair::generate(params, &mut test_rng(22));
        let proof = crate::cryptokit::ecdsa::ecdsa_sign(params, b"r", &kp, &mut rng);
        ledger.resolve_did(did, AccessRole::Csp, Some(&proof)).unwrap();
        ledger.revoke_did(did, AccessRole::Admin).unwrap();

        let mut buf = Vec::new();
        ledger.save_to(&mut buf).unwrap();
        let reloaded = Ledger::load_from(params, buf.as_slice()).unwrap();
        assert!(reloaded.verify_chain().is_valid());
        let mut buf2 = Vec::new();
        reloaded.save_to(&mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }
}
