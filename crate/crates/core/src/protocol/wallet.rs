//! Customer mobile agent (wallet): holds the government credential, the
//! per-registration key pair and DIDs, and the per-order session
//! material. The private key never leaves this object.

use rand::RngCore;

use crate::cryptokit::{
    asym_decrypt, asym_encrypt, ecdsa_sign, ecdsa_verify, siphash64, timestamp_fresh,
    Ciphertext, CurveParams, CurvePoint, Digest64, KeyPair, Nonce64, Timestamp,
};
use crate::didledger::{AccessRole, Did, DidDocument, Ledger, OneTimeCredential};
use crate::netbus::{Envelope, Field, FieldKind, MsgKind};
use crate::pufsim::Challenge;

use super::catalog::ProductCatalog;
use super::credential::{CredKind, Credential, Presentation};
use super::{
    cipher_field, challenge_message, domain, make_envelope, nonce_message, order_key,
    osvc_message, plain_field, preorder_key, session_binding, signal_message, Bytes,
    ProtocolError,
};

/// Per-order session material held by the wallet.
#[derive(Clone, Debug)]
pub struct OrderContext {
    pub pid: u64,
    pub x1: Digest64,
    pub n_star_u: Nonce64,
    pub n_star_csp: Option<Nonce64>,
    pub osvp: Option<Presentation>,
    pub rv_nonce: Option<Nonce64>,
    pub rv_challenge: Option<Challenge>,
}

/// The customer wallet state machine.
pub struct Wallet {
    actor_id: String,
    freshness_window_ms: u64,
    gov_credential: Option<Credential>,
    keypair: Option<KeyPair>,
    did_u: Option<Did>,
    did_csp: Option<Did>,
    csp_public: Option<CurvePoint>,
    vc_u: Option<Credential>,
    pending_n_u: Option<Nonce64>,
    order: Option<OrderContext>,
}

impl Wallet {
    pub fn new(actor_id: &str, freshness_window_ms: u64) -> Wallet {
        Wallet {
            actor_id: actor_id.to_string(),
            freshness_window_ms,
            gov_credential: None,
            keypair: None,
            did_u: None,
            did_csp: None,
            csp_public: None,
            vc_u: None,
            pending_n_u: None,
            order: None,
        }
    }

    pub fn actor_id(&self) -> &str {
        &self.actor_id
    }

    pub fn set_gov_credential(&mut self, cred: Credential) {
        self.gov_credential = Some(cred);
    }

    pub fn did_u(&self) -> Option<Did> {
        self.did_u
    }

    pub fn did_csp(&self) -> Option<Did> {
        self.did_csp
    }

    pub fn vc_u(&self) -> Option<&Credential> {
        self.vc_u.as_ref()
    }

    pub fn order(&self) -> Option<&OrderContext> {
        self.order.as_ref()
    }

    #[cfg(test)]
    pub(crate) fn order_mut(&mut self) -> Option<&mut OrderContext> {
        self.order.as_mut()
    }

    pub(crate) fn keypair(&self) -> Result<&KeyPair, ProtocolError> {
        self.keypair.as_ref().ok_or(ProtocolError::NoActiveOrder)
    }

    fn csp_public(&self) -> Result<&CurvePoint, ProtocolError> {
        self.csp_public.as_ref().ok_or(ProtocolError::NoActiveOrder)
    }

    fn csp_receiver(&self) -> Result<String, ProtocolError> {
        Ok(self
            .did_csp
            .ok_or(ProtocolError::NoActiveOrder)?
            .to_string())
    }

    /// Clears everything except the government credential, so the next
    /// order starts from a fresh, unlinkable registration.
    pub fn clear_session(&mut self) {
        self.keypair = None;
        self.did_u = None;
        self.did_csp = None;
        self.csp_public = None;
        self.vc_u = None;
        self.pending_n_u = None;
        self.order = None;
    }

    /// Registration step 1: fresh challenge nonce plus the government
    /// credential.
    pub fn reg_msg1<R: RngCore>(
        &mut self,
        now: Timestamp,
        rng: &mut R,
    ) -> Result<Envelope, ProtocolError> {
        let gov = self
            .gov_credential
            .ok_or(ProtocolError::MissingGovCredential)?;
        let n_u = Nonce64::generate(rng);
        self.pending_n_u = Some(n_u);
        Ok(make_envelope(
            MsgKind::RegM1,
            &self.actor_id,
            "csp",
            "inbox/csp",
            now,
            vec![
                Field::Plain {
                    kind: FieldKind::Nonce,
                    bytes: n_u.to_le_bytes().to_vec(),
                },
                Field::Plain {
                    kind: FieldKind::Credential,
                    bytes: gov.encode(),
                },
            ],
        ))
    }

    /// Registration step 3: verify the provider's challenge response,
    /// mint and bind the customer DID, answer the provider's challenge.
    pub fn reg_msg3<R: RngCore>(
        &mut self,
        m2: &Envelope,
        ledger: &mut Ledger,
        now: Timestamp,
        rng: &mut R,
    ) -> Result<Envelope, ProtocolError> {
        let params = CurveParams::p256();
        let mut signed = Bytes::new(plain_field(m2, 0, FieldKind::SignedNonce)?);
        let n_u_echo = signed.nonce()?;
        let sig = signed.signature()?;
        signed.finish()?;
        let vc_u = Credential::decode(plain_field(m2, 1, FieldKind::Credential)?)?;
        let mut did_bytes = Bytes::new(plain_field(m2, 2, FieldKind::Did)?);
        let did_csp = did_bytes.did()?;
        did_bytes.finish()?;
        let mut n_bytes = Bytes::new(plain_field(m2, 3, FieldKind::Nonce)?);
        let n_csp = n_bytes.nonce()?;
        n_bytes.finish()?;
        let mut t = Bytes::new(plain_field(m2, 4, FieldKind::Token)?);
        let tid = t.u64()?;
        t.finish()?;
        let mut t = Bytes::new(plain_field(m2, 5, FieldKind::Token)?);
        let cred = t.u64()?;
        t.finish()?;

        if self.pending_n_u != Some(n_u_echo) {
            return Err(ProtocolError::ChallengeResponseFailure);
        }
        let doc = ledger.resolve_did(did_csp, AccessRole::Customer, Some(&sig))?;
        let msg = nonce_message(domain::REG_CSP_NONCE, n_u_echo);
        if !ecdsa_verify(params, &msg, &sig, &doc.public_key) {
            return Err(ProtocolError::ChallengeResponseFailure);
        }
        if vc_u.kind != CredKind::VcU
            || vc_u.signer_did != did_csp
            || !vc_u.verify(params, &doc.public_key)
        {
            return Err(ProtocolError::RejectedCredential);
        }

        let keypair = KeyPair::generate(params, rng);
        let did_u = Did::derive(&keypair.public(), rng.next_u64());
        let mut otc = OneTimeCredential {
            tid,
            cred,
            consumed: false,
        };
        ledger.bind_did(
            DidDocument {
                did: did_u,
                public_key: keypair.public(),
                metadata_digest: None,
                created_at: now,
                revoked: false,
            },
            AccessRole::Customer,
            Some(&mut otc),
        )?;

        let answer = ecdsa_sign(
            params,
            &nonce_message(domain::REG_CUST_NONCE, n_csp),
            &keypair,
            rng,
        );
        let mut signed_nonce = n_csp.to_le_bytes().to_vec();
        signed_nonce.extend_from_slice(&answer.to_bytes());

        self.keypair = Some(keypair);
        self.did_u = Some(did_u);
        self.did_csp = Some(did_csp);
        self.csp_public = Some(doc.public_key);
        self.vc_u = Some(vc_u);
        self.pending_n_u = None;

        Ok(make_envelope(
            MsgKind::RegM3,
            &self.actor_id,
            "csp",
            "inbox/csp",
            now,
            vec![
                Field::Plain {
                    kind: FieldKind::SignedNonce,
                    bytes: signed_nonce,
                },
                Field::Plain {
                    kind: FieldKind::Did,
                    bytes: did_u.suffix.to_le_bytes().to_vec(),
                },
            ],
        ))
    }

    /// Order step 1: encrypted order with the keyed product digest, the
    /// signed order nonce, and the customer credential.
    pub fn order_msg1<R: RngCore>(
        &mut self,
        pid: u64,
        catalog: &ProductCatalog,
        now: Timestamp,
        rng: &mut R,
    ) -> Result<Envelope, ProtocolError> {
        let params = CurveParams::p256();
        let product = catalog.get(pid).ok_or(ProtocolError::UnknownProduct)?;
        let keypair = self.keypair()?;
        let did_u = self.did_u.ok_or(ProtocolError::NoActiveOrder)?;
        let vc_u = self.vc_u.ok_or(ProtocolError::NoActiveOrder)?;

        let n_star_u = Nonce64::generate(rng);
        let mut digest_input = product.details.clone();
        digest_input.extend_from_slice(&pid.to_le_bytes());
        let x1 = siphash64(&preorder_key(n_star_u), &digest_input);
        let s1 = ecdsa_sign(
            params,
            &nonce_message(domain::ORDER_NONCE, n_star_u),
            keypair,
            rng,
        );

        let mut pt = x1.to_le_bytes().to_vec();
        pt.extend_from_slice(&n_star_u.to_le_bytes());
        pt.extend_from_slice(&s1.to_bytes());
        pt.extend_from_slice(&pid.to_le_bytes());
        pt.extend_from_slice(&vc_u.encode());
        pt.extend_from_slice(&did_u.suffix.to_le_bytes());
        let ct = asym_encrypt(params, &pt, self.csp_public()?, rng)?;

        self.order = Some(OrderContext {
            pid,
            x1,
            n_star_u,
            n_star_csp: None,
            osvp: None,
            rv_nonce: None,
            rv_challenge: None,
        });

        Ok(make_envelope(
            MsgKind::OrdM1,
            &self.actor_id,
            &self.csp_receiver()?,
            "inbox/csp",
            now,
            vec![Field::Encrypted {
                inner: vec![
                    FieldKind::Digest,
                    FieldKind::SignedNonce,
                    FieldKind::ProductId,
                    FieldKind::Credential,
                    FieldKind::Did,
                ],
                ciphertext: ct.0,
            }],
        ))
    }

    /// Order step 3: verify the provider's response and derive the
    /// order-specific presentation.
    pub fn order_accept(&mut self, m2: &Envelope, now: Timestamp) -> Result<(), ProtocolError> {
        let params = CurveParams::p256();
        if !timestamp_fresh(m2.timestamp, now, self.freshness_window_ms) {
            return Err(ProtocolError::StaleTimestamp);
        }
        let ct = Ciphertext(cipher_field(m2, 0)?.to_vec());
        let keypair = self.keypair()?;
        let pt = asym_decrypt(params, &ct, keypair)?;
        let mut r = Bytes::new(&pt);
        let s2 = r.signature()?;
        let n_star_csp = r.nonce()?;
        let s3 = r.signature()?;
        r.finish()?;

        let csp_public = *self.csp_public()?;
        let msg = nonce_message(domain::ORDER_CSP_NONCE, n_star_csp);
        if !ecdsa_verify(params, &msg, &s3, &csp_public) {
            return Err(ProtocolError::ChallengeResponseFailure);
        }

        let order = self.order.as_mut().ok_or(ProtocolError::NoActiveOrder)?;
        let key = order_key(order.n_star_u, n_star_csp);
        let mut x2_input = n_star_csp.to_le_bytes().to_vec();
        x2_input.extend_from_slice(&order.n_star_u.to_le_bytes());
        let x2 = siphash64(&key, &x2_input);
        order.n_star_csp = Some(n_star_csp);
        order.osvp = Some(Presentation {
            credential_sig: s2,
            proof_digest: x2,
        });
        Ok(())
    }

    /// Customer verification: present the order credential to the robot
    /// as a ciphertext only the provider can open.
    pub fn present_to_robot<R: RngCore>(
        &mut self,
        robot_id: &str,
        now: Timestamp,
        rng: &mut R,
    ) -> Result<Envelope, ProtocolError> {
        let params = CurveParams::p256();
        let order = self.order.as_ref().ok_or(ProtocolError::NoActiveOrder)?;
        let osvp = order.osvp.ok_or(ProtocolError::NoActiveOrder)?;
        let did_u = self.did_u.ok_or(ProtocolError::NoActiveOrder)?;
        let keypair = self.keypair()?;
        let sig = ecdsa_sign(
            params,
            &nonce_message(domain::PRESENT_NONCE, order.n_star_u),
            keypair,
            rng,
        );

        let mut pt = osvp.credential_sig.to_bytes().to_vec();
        pt.extend_from_slice(&osvp.proof_digest.to_le_bytes());
        pt.extend_from_slice(&did_u.suffix.to_le_bytes());
        pt.extend_from_slice(&order.n_star_u.to_le_bytes());
        pt.extend_from_slice(&sig.to_bytes());
        let ct = asym_encrypt(params, &pt, self.csp_public()?, rng)?;

        Ok(make_envelope(
            MsgKind::CvM3,
            &self.actor_id,
            &self.csp_receiver()?,
            &format!("inbox/{robot_id}"),
            now,
            vec![Field::Encrypted {
                inner: vec![
                    FieldKind::Signature,
                    FieldKind::Digest,
                    FieldKind::Did,
                    FieldKind::SignedNonce,
                ],
                ciphertext: ct.0,
            }],
        ))
    }

    /// Robot verification step 1: ask the provider to challenge the
    /// assigned robot's device.
    pub fn rv_request_challenge<R: RngCore>(
        &mut self,
        now: Timestamp,
        rng: &mut R,
    ) -> Result<Envelope, ProtocolError> {
        let params = CurveParams::p256();
        if self.order.as_ref().and_then(|o| o.osvp.as_ref()).is_none() {
            return Err(ProtocolError::NoActiveOrder);
        }
        let did_u = self.did_u.ok_or(ProtocolError::NoActiveOrder)?;
        let vc_u = self.vc_u.ok_or(ProtocolError::NoActiveOrder)?;
        let keypair = self.keypair()?;
        let n_rv = Nonce64::generate(rng);
        let sig = ecdsa_sign(params, &nonce_message(domain::RV_NONCE, n_rv), keypair, rng);

        let mut pt = vc_u.encode();
        pt.extend_from_slice(&n_rv.to_le_bytes());
        pt.extend_from_slice(&sig.to_bytes());
        pt.extend_from_slice(&did_u.suffix.to_le_bytes());
        pt.push(1);
        let ct = asym_encrypt(params, &pt, self.csp_public()?, rng)?;
        self.order.as_mut().unwrap().rv_nonce = Some(n_rv);

        Ok(make_envelope(
            MsgKind::RvM1,
            &self.actor_id,
            &self.csp_receiver()?,
            "inbox/csp",
            now,
            vec![Field::Encrypted {
                inner: vec![
                    FieldKind::Credential,
                    FieldKind::SignedNonce,
                    FieldKind::Did,
                    FieldKind::FlagBit,
                ],
                ciphertext: ct.0,
            }],
        ))
    }

    /// Robot verification step 2: countersign the provider's challenge.
    pub fn rv_submit_challenge<R: RngCore>(
        &mut self,
        m2: &Envelope,
        now: Timestamp,
        rng: &mut R,
    ) -> Result<Envelope, ProtocolError> {
        let params = CurveParams::p256();
        if !timestamp_fresh(m2.timestamp, now, self.freshness_window_ms) {
            return Err(ProtocolError::StaleTimestamp);
        }
        let ct = Ciphertext(cipher_field(m2, 0)?.to_vec());
        let pt = asym_decrypt(params, &ct, self.keypair()?)?;
        let mut r = Bytes::new(&pt);
        let challenge = Challenge(r.array16()?);
        let sig = r.signature()?;
        r.finish()?;

        let msg = challenge_message(domain::RV_CHALLENGE_CSP, &challenge.0);
        if !ecdsa_verify(params, &msg, &sig, self.csp_public()?) {
            return Err(ProtocolError::ChallengeResponseFailure);
        }
        let counter = ecdsa_sign(
            params,
            &challenge_message(domain::RV_CHALLENGE_CUST, &challenge.0),
            self.keypair()?,
            rng,
        );
        self.order
            .as_mut()
            .ok_or(ProtocolError::NoActiveOrder)?
            .rv_challenge = Some(challenge);

        let mut bytes = challenge.0.to_vec();
        bytes.extend_from_slice(&counter.to_bytes());
        Ok(make_envelope(
            MsgKind::RvS1,
            &self.actor_id,
            &self.csp_receiver()?,
            "inbox/csp",
            now,
            vec![Field::Plain {
                kind: FieldKind::SignedChallenge,
                bytes,
            }],
        ))
    }

    /// Robot verification step 4: check the provider's signed verdict
    /// and accept or decline the delivery.
    pub fn rv_accept(&self, s3: &Envelope, now: Timestamp) -> Result<bool, ProtocolError> {
        let params = CurveParams::p256();
        if !timestamp_fresh(s3.timestamp, now, self.freshness_window_ms) {
            return Err(ProtocolError::StaleTimestamp);
        }
        let vb_bytes = plain_field(s3, 0, FieldKind::VerdictBit)?;
        let verdict = match vb_bytes {
            [0] => false,
            [1] => true,
            _ => return Err(ProtocolError::MalformedPayload),
        };
        let mut d = Bytes::new(plain_field(s3, 1, FieldKind::Digest)?);
        let binding = d.digest()?;
        d.finish()?;
        let mut s = Bytes::new(plain_field(s3, 2, FieldKind::Signature)?);
        let sig = s.signature()?;
        s.finish()?;

        let order = self.order.as_ref().ok_or(ProtocolError::NoActiveOrder)?;
        let n_star_csp = order.n_star_csp.ok_or(ProtocolError::NoActiveOrder)?;
        let did_u = self.did_u.ok_or(ProtocolError::NoActiveOrder)?;
        let key = order_key(order.n_star_u, n_star_csp);
        if binding != session_binding(&key, did_u, n_star_csp) {
            return Err(ProtocolError::ChallengeResponseFailure);
        }
        let msg = signal_message(verdict, binding);
        if !ecdsa_verify(params, &msg, &sig, self.csp_public()?) {
            return Err(ProtocolError::ChallengeResponseFailure);
        }
        Ok(verdict)
    }

    /// Convenience for the OSVC signature check in tests and harnesses.
    pub fn osvc_message_for_order(&self) -> Option<Vec<u8>> {
        let order = self.order.as_ref()?;
        let n_star_csp = order.n_star_csp?;
        let key = order_key(order.n_star_u, n_star_csp);
        let mut input = n_star_csp.to_le_bytes().to_vec();
        input.extend_from_slice(&order.n_star_u.to_le_bytes());
        input.extend_from_slice(&order.x1.to_le_bytes());
        Some(osvc_message(siphash64(&key, &input)))
    }
}
