//! Company service provider: verifies government credentials, issues
//! customer credentials, runs the order and verification phases, and
//! manages robot dispatch plus the per-robot CRP databases.

use std::collections::HashMap;

use rand::RngCore;

use crate::cryptokit::{
    asym_decrypt, asym_encrypt, ecdsa_sign, ecdsa_verify, siphash64, timestamp_fresh,
    Ciphertext, CurveParams, CurvePoint, Digest64, HashKey128, KeyPair, Nonce64, Timestamp,
};
use crate::didledger::{AccessRole, Did, DidDocument, Ledger, LedgerError};
use crate::netbus::{Envelope, Field, FieldKind, MsgKind};
use crate::pufsim::{crp_enroll, Challenge, CrpDatabase, Response};

use super::catalog::ProductCatalog;
use super::credential::{CredKind, Credential, GovAttrs};
use super::robot::Robot;
use super::{
    cipher_field, challenge_message, domain, make_envelope, nonce_message, order_key,
    osvc_message, plain_field, preorder_key, session_binding, signal_message, Bytes,
    ProtocolError,
};

/// Why a presentation verdict came out the way it did. Failures are
/// signed failure signals, not errors; the reason is for the harness.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CvReason {
    Ok,
    Stale,
    Revoked,
    SessionMismatch,
    BadSignature,
    ProofMismatch,
    BadCredentialSig,
}

struct RegSession {
    keypair: KeyPair,
    did_csp: Did,
    attrs: GovAttrs,
    vc_u: Credential,
    customer_actor: String,
}

struct CspOrder {
    pid: u64,
    x1: Digest64,
    n_star_u: Nonce64,
    n_star_csp: Nonce64,
    osvc: Digest64,
    robot_id: Option<String>,
    rv_challenge: Option<Challenge>,
}

struct Session {
    keypair: KeyPair,
    did_csp: Did,
    did_u: Did,
    v_u: CurvePoint,
    attrs: GovAttrs,
    vc_u: Credential,
    customer_actor: String,
    order: Option<CspOrder>,
}

/// The service-provider state machine. One instance serves many
/// independent customer sessions.
pub struct Csp {
    actor_id: String,
    k_reg: HashKey128,
    catalog: ProductCatalog,
    min_age: u16,
    required_country: Option<[u8; 2]>,
    freshness_window_ms: u64,
    pending: HashMap<u64, RegSession>,
    sessions: HashMap<Did, Session>,
    by_customer: HashMap<Did, Did>,
    by_robot: HashMap<String, Did>,
    crp_dbs: HashMap<String, CrpDatabase>,
}

impl Csp {
    pub fn new<R: RngCore>(
        catalog: ProductCatalog,
        freshness_window_ms: u64,
        rng: &mut R,
    ) -> Csp {
        let mut k_reg = [0u8; 16];
        rng.fill_bytes(&mut k_reg);
        Csp {
            actor_id: "csp".to_string(),
            k_reg: HashKey128(k_reg),
            catalog,
            min_age: 18,
            required_country: None,
            freshness_window_ms,
            pending: HashMap::new(),
            sessions: HashMap::new(),
            by_customer: HashMap::new(),
            by_robot: HashMap::new(),
            crp_dbs: HashMap::new(),
        }
    }

    pub fn actor_id(&self) -> &str {
        &self.actor_id
    }

    pub fn set_required_country(&mut self, country: Option<[u8; 2]>) {
        self.required_country = country;
    }

    pub fn catalog(&self) -> &ProductCatalog {
        &self.catalog
    }

    /// Manufacture-time CRP enrollment for a robot joining the fleet.
    pub fn register_robot<R: RngCore>(&mut self, robot: &Robot, n_pairs: usize, rng: &mut R) {
        let db = crp_enroll(robot.device(), n_pairs, rng);
        self.crp_dbs.insert(robot.robot_id().to_string(), db);
    }

    pub fn crp_db(&self, robot_id: &str) -> Option<&CrpDatabase> {
        self.crp_dbs.get(robot_id)
    }

    /// The session DID pair for a registered customer, for harness use.
    pub fn session_dids(&self, did_u: Did) -> Option<(Did, Did)> {
        self.by_customer.get(&did_u).map(|csp| (did_u, *csp))
    }

    /// Per-order session tokens (pid, X_1, n*_u, n*_csp, OSVC), for the
    /// harness's unlinkability accounting.
    pub fn order_tokens(
        &self,
        did_u: Did,
    ) -> Option<(u64, Digest64, Nonce64, Nonce64, Digest64)> {
        let did_csp = self.by_customer.get(&did_u)?;
        let order = self.sessions.get(did_csp)?.order.as_ref()?;
        Some((
            order.pid,
            order.x1,
            order.n_star_u,
            order.n_star_csp,
            order.osvc,
        ))
    }

    fn session_from_receiver(&mut self, env: &Envelope) -> Result<&mut Session, ProtocolError> {
        let did_csp: Did = env
            .receiver
            .parse()
            .map_err(|_| ProtocolError::UnknownSession)?;
        self.sessions
            .get_mut(&did_csp)
            .ok_or(ProtocolError::UnknownSession)
    }

    /// Registration step 2: verify the government credential, mint the
    /// per-customer identity and credential, answer the challenge, and
    /// include a one-time ledger binding credential.
    pub fn reg_msg2<R: RngCore>(
        &mut self,
        m1: &Envelope,
        ledger: &mut Ledger,
        now: Timestamp,
        rng: &mut R,
    ) -> Result<Envelope, ProtocolError> {
        let params = CurveParams::p256();
        let mut n = Bytes::new(plain_field(m1, 0, FieldKind::Nonce)?);
        let n_u = n.nonce()?;
        n.finish()?;
        let gov = Credential::decode(plain_field(m1, 1, FieldKind::Credential)?)?;
        let attrs = match (gov.kind, gov.attrs) {
            (CredKind::Gov, Some(attrs)) => attrs,
            _ => return Err(ProtocolError::RejectedCredential),
        };
        let issuer_doc = ledger.resolve_did(gov.signer_did, AccessRole::Csp, None)?;
        if !gov.verify(params, &issuer_doc.public_key) {
            return Err(ProtocolError::RejectedCredential);
        }

        let keypair = KeyPair::generate(params, rng);
        let did_csp = Did::derive(&keypair.public(), rng.next_u64());
        ledger.bind_did(
            DidDocument {
                did: did_csp,
                public_key: keypair.public(),
                metadata_digest: None,
                created_at: now,
                revoked: false,
            },
            AccessRole::Csp,
            None,
        )?;

        let mut n_csp = Nonce64::generate(rng);
        while self.pending.contains_key(&n_csp.0) {
            n_csp = Nonce64::generate(rng);
        }
        let mut vc_input = n_csp.to_le_bytes().to_vec();
        vc_input.extend_from_slice(&n_u.to_le_bytes());
        vc_input.extend_from_slice(&gov.encode());
        let vc_digest = siphash64(&self.k_reg, &vc_input);
        let vc_sig = ecdsa_sign(
            params,
            &Credential::signed_message(CredKind::VcU, vc_digest, None),
            &keypair,
            rng,
        );
        let vc_u = Credential {
            digest: vc_digest,
            signature: vc_sig,
            signer_did: did_csp,
            kind: CredKind::VcU,
            attrs: None,
        };

        let answer = ecdsa_sign(
            params,
            &nonce_message(domain::REG_CSP_NONCE, n_u),
            &keypair,
            rng,
        );
        let otc = ledger.issue_onetime_credential(AccessRole::Admin, rng)?;

        self.pending.insert(
            n_csp.0,
            RegSession {
                keypair,
                did_csp,
                attrs,
                vc_u,
                customer_actor: m1.sender.clone(),
            },
        );

        let mut signed_nonce = n_u.to_le_bytes().to_vec();
        signed_nonce.extend_from_slice(&answer.to_bytes());
        Ok(make_envelope(
            MsgKind::RegM2,
            &self.actor_id,
            &m1.sender,
            &format!("inbox/{}", m1.sender),
            now,
            vec![
                Field::Plain {
                    kind: FieldKind::SignedNonce,
                    bytes: signed_nonce,
                },
                Field::Plain {
                    kind: FieldKind::Credential,
                    bytes: vc_u.encode(),
                },
                Field::Plain {
                    kind: FieldKind::Did,
                    bytes: did_csp.suffix.to_le_bytes().to_vec(),
                },
                Field::Plain {
                    kind: FieldKind::Nonce,
                    bytes: n_csp.to_le_bytes().to_vec(),
                },
                Field::Plain {
                    kind: FieldKind::Token,
                    bytes: otc.tid.to_le_bytes().to_vec(),
                },
                Field::Plain {
                    kind: FieldKind::Token,
                    bytes: otc.cred.to_le_bytes().to_vec(),
                },
            ],
        ))
    }

    /// Registration step 4: resolve the customer DID and verify the
    /// challenge answer; on success the session becomes active.
    pub fn reg_finalize(
        &mut self,
        m3: &Envelope,
        ledger: &mut Ledger,
    ) -> Result<Did, ProtocolError> {
        let params = CurveParams::p256();
        let mut signed = Bytes::new(plain_field(m3, 0, FieldKind::SignedNonce)?);
        let n_csp = signed.nonce()?;
        let sig = signed.signature()?;
        signed.finish()?;
        let mut d = Bytes::new(plain_field(m3, 1, FieldKind::Did)?);
        let did_u = d.did()?;
        d.finish()?;

        if !self.pending.contains_key(&n_csp.0) {
            return Err(ProtocolError::UnknownSession);
        }
        let doc = ledger.resolve_did(did_u, AccessRole::Csp, Some(&sig))?;
        let msg = nonce_message(domain::REG_CUST_NONCE, n_csp);
        if !ecdsa_verify(params, &msg, &sig, &doc.public_key) {
            return Err(ProtocolError::ChallengeResponseFailure);
        }
        let reg = self.pending.remove(&n_csp.0).unwrap();
        let did_csp = reg.did_csp;
        self.by_customer.insert(did_u, did_csp);
        self.sessions.insert(
            did_csp,
            Session {
                keypair: reg.keypair,
                did_csp,
                did_u,
                v_u: doc.public_key,
                attrs: reg.attrs,
                vc_u: reg.vc_u,
                customer_actor: reg.customer_actor,
                order: None,
            },
        );
        Ok(did_u)
    }

    /// Order step 2: verify the order, the customer credential, and the
    /// eligibility rule; mint the order-specific credential.
    pub fn order_msg2<R: RngCore>(
        &mut self,
        m1: &Envelope,
        ledger: &mut Ledger,
        now: Timestamp,
        rng: &mut R,
    ) -> Result<Envelope, ProtocolError> {
        let params = CurveParams::p256();
        if !timestamp_fresh(m1.timestamp, now, self.freshness_window_ms) {
            return Err(ProtocolError::StaleTimestamp);
        }
        let min_age = self.min_age;
        let required_country = self.required_country;
        let ct = Ciphertext(cipher_field(m1, 0)?.to_vec());
        let (pt, session_did_u, did_csp, vc_digest, v_csp, attrs) = {
            let session = self.session_from_receiver(m1)?;
            (
                asym_decrypt(params, &ct, &session.keypair)?,
                session.did_u,
                session.did_csp,
                session.vc_u.digest,
                session.keypair.public(),
                session.attrs,
            )
        };
        let mut r = Bytes::new(&pt);
        let x1 = r.digest()?;
        let n_star_u = r.nonce()?;
        let s1 = r.signature()?;
        let pid = r.u64()?;
        let vc_u = Credential::read(&mut r)?;
        let did_u = r.did()?;
        r.finish()?;

        if did_u != session_did_u {
            return Err(ProtocolError::UnknownSession);
        }
        let doc = ledger.resolve_did(did_u, AccessRole::Csp, Some(&s1))?;
        if !ecdsa_verify(
            params,
            &nonce_message(domain::ORDER_NONCE, n_star_u),
            &s1,
            &doc.public_key,
        ) {
            return Err(ProtocolError::ChallengeResponseFailure);
        }
        let product = self
            .catalog
            .get(pid)
            .ok_or(ProtocolError::UnknownProduct)?;
        let mut digest_input = product.details.clone();
        digest_input.extend_from_slice(&pid.to_le_bytes());
        if siphash64(&preorder_key(n_star_u), &digest_input) != x1 {
            return Err(ProtocolError::ProductMismatch);
        }
        if vc_u.digest != vc_digest || !vc_u.verify(params, &v_csp) {
            return Err(ProtocolError::RejectedCredential);
        }
        if product.age_restricted && attrs.age < min_age {
            return Err(ProtocolError::IneligibleCustomer);
        }
        if let Some(country) = required_country {
            if attrs.country != country {
                return Err(ProtocolError::IneligibleCustomer);
            }
        }
        let session = self
            .sessions
            .get_mut(&did_csp)
            .ok_or(ProtocolError::UnknownSession)?;

        let n_star_csp = Nonce64::generate(rng);
        let key = order_key(n_star_u, n_star_csp);
        let mut osvc_input = n_star_csp.to_le_bytes().to_vec();
        osvc_input.extend_from_slice(&n_star_u.to_le_bytes());
        osvc_input.extend_from_slice(&x1.to_le_bytes());
        let osvc = siphash64(&key, &osvc_input);
        let s2 = ecdsa_sign(params, &osvc_message(osvc), &session.keypair, rng);
        let s3 = ecdsa_sign(
            params,
            &nonce_message(domain::ORDER_CSP_NONCE, n_star_csp),
            &session.keypair,
            rng,
        );
        session.order = Some(CspOrder {
            pid,
            x1,
            n_star_u,
            n_star_csp,
            osvc,
            robot_id: None,
            rv_challenge: None,
        });

        let mut pt = s2.to_bytes().to_vec();
        pt.extend_from_slice(&n_star_csp.to_le_bytes());
        pt.extend_from_slice(&s3.to_bytes());
        let reply = asym_encrypt(params, &pt, &session.v_u, rng)?;
        Ok(make_envelope(
            MsgKind::OrdM2,
            &self.actor_id,
            &m1.sender,
            &format!("inbox/{}", m1.sender),
            now,
            vec![Field::Encrypted {
                inner: vec![FieldKind::Signature, FieldKind::SignedNonce],
                ciphertext: reply.0,
            }],
        ))
    }

    /// Selects and provisions a robot for an accepted order. The robot
    /// receives exactly one key: this session's public key.
    pub fn dispatch_robot(
        &mut self,
        did_u: Did,
        robots: &mut [Robot],
    ) -> Result<String, ProtocolError> {
        let did_csp = *self
            .by_customer
            .get(&did_u)
            .ok_or(ProtocolError::UnknownSession)?;
        let session = self
            .sessions
            .get_mut(&did_csp)
            .ok_or(ProtocolError::UnknownSession)?;
        let order = session.order.as_mut().ok_or(ProtocolError::NoActiveOrder)?;
        let robot = robots
            .iter_mut()
            .find(|r| !r.is_provisioned() && self.crp_dbs.contains_key(r.robot_id()))
            .ok_or(ProtocolError::NoRobotAvailable)?;
        robot.provision(session.keypair.public());
        order.robot_id = Some(robot.robot_id().to_string());
        self.by_robot
            .insert(robot.robot_id().to_string(), did_csp);
        Ok(robot.robot_id().to_string())
    }

    /// Customer verification: check the forwarded presentation and emit
    /// the signed verdict for the robot. Verification failures become
    /// signed failure signals, distinguished by reason.
    pub fn verify_presentation<R: RngCore>(
        &mut self,
        m3: &Envelope,
        ledger: &mut Ledger,
        now: Timestamp,
        rng: &mut R,
    ) -> Result<(Envelope, CvReason), ProtocolError> {
        let params = CurveParams::p256();
        let window = self.freshness_window_ms;
        let ct = Ciphertext(cipher_field(m3, 0)?.to_vec());
        let session = self.session_from_receiver(m3)?;
        let pt = asym_decrypt(params, &ct, &session.keypair)?;
        let mut r = Bytes::new(&pt);
        let s2 = r.signature()?;
        let x2 = r.digest()?;
        let did_u = r.did()?;
        let n_star_u = r.nonce()?;
        let sig = r.signature()?;
        r.finish()?;

        let order = session.order.as_ref().ok_or(ProtocolError::NoActiveOrder)?;
        let robot_id = order
            .robot_id
            .clone()
            .ok_or(ProtocolError::NoRobotAvailable)?;
        let key = order_key(order.n_star_u, order.n_star_csp);
        let binding = session_binding(&key, session.did_u, order.n_star_csp);

        let mut reason = CvReason::Ok;
        if !timestamp_fresh(m3.timestamp, now, window) {
            reason = CvReason::Stale;
        }
        if reason == CvReason::Ok && (did_u != session.did_u || n_star_u != order.n_star_u) {
            reason = CvReason::SessionMismatch;
        }
        if reason == CvReason::Ok {
            match ledger.resolve_did(session.did_csp, AccessRole::Csp, Some(&s2)) {
                Ok(_) => {}
                Err(LedgerError::RevokedDid) => reason = CvReason::Revoked,
                Err(e) => return Err(e.into()),
            }
        }
        if reason == CvReason::Ok {
            let msg = nonce_message(domain::PRESENT_NONCE, n_star_u);
            match ledger.resolve_did(did_u, AccessRole::Csp, Some(&sig)) {
                Ok(doc) if ecdsa_verify(params, &msg, &sig, &doc.public_key) => {}
                Ok(_) => reason = CvReason::BadSignature,
                Err(LedgerError::RevokedDid | LedgerError::UnknownDid) => {
                    reason = CvReason::BadSignature
                }
                Err(e) => return Err(e.into()),
            }
        }
        let session = self
            .sessions
            .get(&m3.receiver.parse().map_err(|_| ProtocolError::UnknownSession)?)
            .ok_or(ProtocolError::UnknownSession)?;
        let order = session.order.as_ref().unwrap();
        if reason == CvReason::Ok {
            let mut x2_input = order.n_star_csp.to_le_bytes().to_vec();
            x2_input.extend_from_slice(&order.n_star_u.to_le_bytes());
            if siphash64(&key, &x2_input) != x2 {
                reason = CvReason::ProofMismatch;
            }
        }
        if reason == CvReason::Ok
            && !ecdsa_verify(params, &osvc_message(order.osvc), &s2, &session.keypair.public())
        {
            reason = CvReason::BadCredentialSig;
        }

        let verdict = reason == CvReason::Ok;
        let s5 = ecdsa_sign(params, &signal_message(verdict, binding), &session.keypair, rng);
        let env = make_envelope(
            MsgKind::CvS5,
            &self.actor_id,
            &robot_id,
            &format!("inbox/{robot_id}"),
            now,
            vec![
                Field::Plain {
                    kind: FieldKind::VerdictBit,
                    bytes: vec![verdict as u8],
                },
                Field::Plain {
                    kind: FieldKind::Digest,
                    bytes: binding.to_le_bytes().to_vec(),
                },
                Field::Plain {
                    kind: FieldKind::Signature,
                    bytes: s5.to_bytes().to_vec(),
                },
            ],
        );
        Ok((env, reason))
    }

    /// Robot verification step 1: authenticate the request and issue a
    /// fresh challenge from the assigned robot's CRP database.
    pub fn rv_issue_challenge<R: RngCore>(
        &mut self,
        m1: &Envelope,
        ledger: &mut Ledger,
        now: Timestamp,
        rng: &mut R,
    ) -> Result<Envelope, ProtocolError> {
        let params = CurveParams::p256();
        if !timestamp_fresh(m1.timestamp, now, self.freshness_window_ms) {
            return Err(ProtocolError::StaleTimestamp);
        }
        let ct = Ciphertext(cipher_field(m1, 0)?.to_vec());
        let session = self.session_from_receiver(m1)?;
        let pt = asym_decrypt(params, &ct, &session.keypair)?;
        let mut r = Bytes::new(&pt);
        let vc_u = Credential::read(&mut r)?;
        let n_rv = r.nonce()?;
        let sig = r.signature()?;
        let did_u = r.did()?;
        let flag = r.u8()?;
        r.finish()?;
        if flag != 1 {
            return Err(ProtocolError::MalformedPayload);
        }
        if did_u != session.did_u {
            return Err(ProtocolError::UnknownSession);
        }
        let did_csp = session.did_csp;
        let v_u = session.v_u;
        let vc_digest = session.vc_u.digest;
        let v_csp = session.keypair.public();

        match ledger.resolve_did(did_csp, AccessRole::Csp, Some(&sig)) {
            Ok(_) => {}
            Err(LedgerError::RevokedDid) => return Err(ProtocolError::RejectedCredential),
            Err(e) => return Err(e.into()),
        }
        if !ecdsa_verify(params, &nonce_message(domain::RV_NONCE, n_rv), &sig, &v_u) {
            return Err(ProtocolError::RejectedCredential);
        }
        if vc_u.digest != vc_digest || !vc_u.verify(params, &v_csp) {
            return Err(ProtocolError::RejectedCredential);
        }

        let session = self
            .sessions
            .get_mut(&did_csp)
            .ok_or(ProtocolError::UnknownSession)?;
        let order = session.order.as_mut().ok_or(ProtocolError::NoActiveOrder)?;
        let robot_id = order
            .robot_id
            .clone()
            .ok_or(ProtocolError::NoRobotAvailable)?;
        let db = self
            .crp_dbs
            .get_mut(&robot_id)
            .ok_or(ProtocolError::NoRobotAvailable)?;
        let challenge = db.crp_select(rng)?;
        order.rv_challenge = Some(challenge);

        let ch_sig = ecdsa_sign(
            params,
            &challenge_message(domain::RV_CHALLENGE_CSP, &challenge.0),
            &session.keypair,
            rng,
        );
        let mut pt = challenge.0.to_vec();
        pt.extend_from_slice(&ch_sig.to_bytes());
        let reply = asym_encrypt(params, &pt, &session.v_u, rng)?;
        Ok(make_envelope(
            MsgKind::RvM2,
            &self.actor_id,
            &m1.sender,
            &format!("inbox/{}", m1.sender),
            now,
            vec![Field::Encrypted {
                inner: vec![FieldKind::SignedChallenge],
                ciphertext: reply.0,
            }],
        ))
    }

    /// Robot verification step 3: verify the customer's countersignature
    /// and relay the challenge to the robot under the provider's key.
    pub fn rv_relay<R: RngCore>(
        &mut self,
        s1: &Envelope,
        now: Timestamp,
        rng: &mut R,
    ) -> Result<Envelope, ProtocolError> {
        let params = CurveParams::p256();
        if !timestamp_fresh(s1.timestamp, now, self.freshness_window_ms) {
            return Err(ProtocolError::StaleTimestamp);
        }
        let session = self.session_from_receiver(s1)?;
        let mut r = Bytes::new(plain_field(s1, 0, FieldKind::SignedChallenge)?);
        let challenge = Challenge(r.array16()?);
        let sig = r.signature()?;
        r.finish()?;

        let order = session.order.as_ref().ok_or(ProtocolError::NoActiveOrder)?;
        if order.rv_challenge != Some(challenge) {
            return Err(ProtocolError::ChallengeResponseFailure);
        }
        let robot_id = order
            .robot_id
            .clone()
            .ok_or(ProtocolError::NoRobotAvailable)?;
        let msg = challenge_message(domain::RV_CHALLENGE_CUST, &challenge.0);
        if !ecdsa_verify(params, &msg, &sig, &session.v_u) {
            return Err(ProtocolError::ChallengeResponseFailure);
        }
        let relay_sig = ecdsa_sign(
            params,
            &challenge_message(domain::RV_CHALLENGE_RELAY, &challenge.0),
            &session.keypair,
            rng,
        );
        let mut bytes = challenge.0.to_vec();
        bytes.extend_from_slice(&relay_sig.to_bytes());
        Ok(make_envelope(
            MsgKind::RvS2,
            &self.actor_id,
            &robot_id,
            &format!("inbox/{robot_id}"),
            now,
            vec![Field::Plain {
                kind: FieldKind::SignedChallenge,
                bytes,
            }],
        ))
    }

    /// Robot verification step 5: validate the challenge/response pair
    /// against the CRP database and sign the verification bit.
    pub fn rv_verify_and_signal<R: RngCore>(
        &mut self,
        m3: &Envelope,
        now: Timestamp,
        rng: &mut R,
    ) -> Result<(Envelope, bool), ProtocolError> {
        let params = CurveParams::p256();
        if !timestamp_fresh(m3.timestamp, now, self.freshness_window_ms) {
            return Err(ProtocolError::StaleTimestamp);
        }
        let did_csp = *self
            .by_robot
            .get(&m3.sender)
            .ok_or(ProtocolError::UnknownSession)?;
        let session = self
            .sessions
            .get(&did_csp)
            .ok_or(ProtocolError::UnknownSession)?;
        let ct = Ciphertext(cipher_field(m3, 0)?.to_vec());
        let pt = asym_decrypt(params, &ct, &session.keypair)?;
        let mut r = Bytes::new(&pt);
        let challenge = Challenge(r.array16()?);
        let response = Response(r.array16()?);
        r.finish()?;

        let order = session.order.as_ref().ok_or(ProtocolError::NoActiveOrder)?;
        if order.rv_challenge != Some(challenge) {
            return Err(ProtocolError::ChallengeResponseFailure);
        }
        let robot_id = order
            .robot_id
            .clone()
            .ok_or(ProtocolError::NoRobotAvailable)?;
        let db = self
            .crp_dbs
            .get(&robot_id)
            .ok_or(ProtocolError::NoRobotAvailable)?;
        let vb = db.crp_verify(&challenge, &response)?;

        let key = order_key(order.n_star_u, order.n_star_csp);
        let binding = session_binding(&key, session.did_u, order.n_star_csp);
        let sig = ecdsa_sign(params, &signal_message(vb, binding), &session.keypair, rng);
        let customer = session.customer_actor.clone();
        let env = make_envelope(
            MsgKind::RvS3,
            &self.actor_id,
            &customer,
            &format!("inbox/{customer}"),
            now,
            vec![
                Field::Plain {
                    kind: FieldKind::VerdictBit,
                    bytes: vec![vb as u8],
                },
                Field::Plain {
                    kind: FieldKind::Digest,
                    bytes: binding.to_le_bytes().to_vec(),
                },
                Field::Plain {
                    kind: FieldKind::Signature,
                    bytes: sig.to_bytes().to_vec(),
                },
            ],
        );
        Ok((env, vb))
    }
}
