//! Named attack drills: each drives the real actor state machines into
//! a hostile situation and reports whether the protocol rejected it.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::cryptokit::{CryptoError, Timestamp};
use crate::didledger::{AccessRole, Ledger};
use crate::netbus::{Envelope, Field, MsgKind};
use crate::protocol::{
    default_catalog, Csp, CvReason, Decision, GovAttrs, GovIssuer, ProtocolError, Robot, Wallet,
};
use crate::pufsim::DeviceSecret;

use super::config::ScenarioError;

/// Names of the attack drills, in suite order.
pub const ATTACK_NAMES: [&str; 7] = [
    "replay",
    "vc-forgery",
    "osvc-cross-session",
    "puf-swap",
    "unauthorized-resolve",
    "tamper",
    "revoked-csp",
];

/// Result of one drill.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackOutcome {
    pub name: String,
    pub rejected: bool,
    pub detail: String,
}

/// Result of a suite run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackReport {
    pub seed: u64,
    pub outcomes: Vec<AttackOutcome>,
    pub all_rejected: bool,
}

const WINDOW: u64 = 2_000;

fn internal<E: std::fmt::Display>(e: E) -> ScenarioError {
    ScenarioError::Internal(e.to_string())
}

/// Direct-call protocol fixture: one provider, one robot, one wallet,
/// messages exchanged in memory and recorded for replay drills.
struct Flow {
    ledger: Ledger,
    csp: Csp,
    wallet: Wallet,
    robots: Vec<Robot>,
    issuer: GovIssuer,
    rng: ChaCha20Rng,
    now: Timestamp,
    record: Vec<Envelope>,
}

impl Flow {
    fn new(seed: u64) -> Result<Flow, ScenarioError> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x61747461636b73);
        let now = Timestamp::new(1_000);
        let (issuer, ledger) = GovIssuer::bootstrap(&mut rng, now).map_err(internal)?;
        let mut csp = Csp::new(default_catalog(), WINDOW, &mut rng);
        let robot = Robot::new("robot-0", &mut rng);
        csp.register_robot(&robot, 8, &mut rng);
        let mut wallet = Wallet::new("wallet-0", WINDOW);
        wallet.set_gov_credential(issuer.issue(
            "resident 0",
            GovAttrs {
                age: 30,
                country: *b"IN",
            },
            &mut rng,
        ));
        Ok(Flow {
            ledger,
            csp,
            wallet,
            robots: vec![robot],
            issuer,
            rng,
            now,
            record: Vec::new(),
        })
    }

    fn rec(&mut self, env: &Envelope) {
        self.record.push(env.clone());
    }

    fn fresh_wallet(&mut self, actor_id: &str) -> Wallet {
        let mut wallet = Wallet::new(actor_id, WINDOW);
        wallet.set_gov_credential(self.issuer.issue(
            actor_id,
            GovAttrs {
                age: 30,
                country: *b"IN",
            },
            &mut self.rng,
        ));
        wallet
    }

    fn register(&mut self) -> Result<(), ProtocolError> {
        let m1 = self.wallet.reg_msg1(self.now, &mut self.rng)?;
        self.rec(&m1);
        let m2 = self.csp.reg_msg2(&m1, &mut self.ledger, self.now, &mut self.rng)?;
        self.rec(&m2);
        let m3 = self.wallet.reg_msg3(&m2, &mut self.ledger, self.now, &mut self.rng)?;
        self.rec(&m3);
        self.csp.reg_finalize(&m3, &mut self.ledger)?;
        Ok(())
    }

    fn place_order(&mut self, pid: u64) -> Result<(), ProtocolError> {
        let catalog = self.csp.catalog().clone();
        let o1 = self.wallet.order_msg1(pid, &catalog, self.now, &mut self.rng)?;
        self.rec(&o1);
        let o2 = self.csp.order_msg2(&o1, &mut self.ledger, self.now, &mut self.rng)?;
        self.rec(&o2);
        self.wallet.order_accept(&o2, self.now)
    }

    fn dispatch(&mut self) -> Result<String, ProtocolError> {
        let did_u = self.wallet.did_u().ok_or(ProtocolError::NoActiveOrder)?;
        self.csp.dispatch_robot(did_u, &mut self.robots)
    }

    fn customer_verify(&mut self) -> Result<(Envelope, Decision, CvReason), ProtocolError> {
        let robot_id = self.robots[0].robot_id().to_string();
        let req = self.robots[0].request(self.wallet.actor_id(), self.now);
        self.rec(&req);
        let cv = self.wallet.present_to_robot(&robot_id, self.now, &mut self.rng)?;
        self.rec(&cv);
        let fwd = self.robots[0].forward(&cv, self.now);
        self.rec(&fwd);
        let (s5, reason) =
            self.csp
                .verify_presentation(&fwd, &mut self.ledger, self.now, &mut self.rng)?;
        self.rec(&s5);
        let decision = self.robots[0].robot_decide(&s5)?;
        Ok((fwd, decision, reason))
    }

    fn robot_verify(&mut self) -> Result<bool, ProtocolError> {
        let r1 = self.wallet.rv_request_challenge(self.now, &mut self.rng)?;
        self.rec(&r1);
        let r2 = self
            .csp
            .rv_issue_challenge(&r1, &mut self.ledger, self.now, &mut self.rng)?;
        self.rec(&r2);
        let s1 = self.wallet.rv_submit_challenge(&r2, self.now, &mut self.rng)?;
        self.rec(&s1);
        let s2 = self.csp.rv_relay(&s1, self.now, &mut self.rng)?;
        self.rec(&s2);
        let r3 = self.robots[0].rv_puf_answer(&s2, self.now, &mut self.rng)?;
        self.rec(&r3);
        let (s3, vb) = self.csp.rv_verify_and_signal(&r3, self.now, &mut self.rng)?;
        self.rec(&s3);
        let accepted = self.wallet.rv_accept(&s3, self.now)?;
        Ok(vb && accepted)
    }

    fn full_order(&mut self, pid: u64) -> Result<(Decision, bool), ProtocolError> {
        self.register()?;
        self.place_order(pid)?;
        self.dispatch()?;
        let (_, decision, _) = self.customer_verify()?;
        let vb1 = self.robot_verify()?;
        Ok((decision, vb1))
    }
}

fn outcome(name: &str, rejected: bool, detail: String) -> AttackOutcome {
    AttackOutcome {
        name: name.to_string(),
        rejected,
        detail,
    }
}

/// Every recorded message re-injected after the freshness window, into
/// a provider/wallet whose session has moved on and a robot returned to
/// the pool. None may produce an accept.
fn attack_replay(seed: u64) -> Result<AttackOutcome, ScenarioError> {
    let mut flow = Flow::new(seed)?;
    let (decision, vb1) = flow.full_order(1).map_err(internal)?;
    if decision != Decision::Deliver || !vb1 {
        return Err(ScenarioError::Internal("baseline order failed".to_string()));
    }
    flow.robots[0].reset();
    flow.wallet.clear_session();
    flow.now.millis += 10 * WINDOW;

    let record = flow.record.clone();
    let mut checked = 0usize;
    for env in &record {
        let accepted = match env.kind {
            // Fresh-challenge openers carry no session to hijack.
            MsgKind::RegM1 | MsgKind::CvReq => continue,
            MsgKind::RegM2 => flow
                .wallet
                .reg_msg3(env, &mut flow.ledger, flow.now, &mut flow.rng)
                .is_ok(),
            MsgKind::RegM3 => flow.csp.reg_finalize(env, &mut flow.ledger).is_ok(),
            MsgKind::OrdM1 => flow
                .csp
                .order_msg2(env, &mut flow.ledger, flow.now, &mut flow.rng)
                .is_ok(),
            MsgKind::OrdM2 => flow.wallet.order_accept(env, flow.now).is_ok(),
            MsgKind::CvM3 => matches!(
                flow.csp
                    .verify_presentation(env, &mut flow.ledger, flow.now, &mut flow.rng),
                Ok((_, CvReason::Ok))
            ),
            MsgKind::CvS5 => matches!(
                flow.robots[0].robot_decide(env),
                Ok(Decision::Deliver)
            ),
            MsgKind::RvM1 => flow
                .csp
                .rv_issue_challenge(env, &mut flow.ledger, flow.now, &mut flow.rng)
                .is_ok(),
            MsgKind::RvM2 => flow
                .wallet
                .rv_submit_challenge(env, flow.now, &mut flow.rng)
                .is_ok(),
            MsgKind::RvS1 => flow.csp.rv_relay(env, flow.now, &mut flow.rng).is_ok(),
            MsgKind::RvS2 => flow.robots[0]
                .rv_puf_answer(env, flow.now, &mut flow.rng)
                .is_ok(),
            MsgKind::RvM3 => flow
                .csp
                .rv_verify_and_signal(env, flow.now, &mut flow.rng)
                .is_ok(),
            MsgKind::RvS3 => flow.wallet.rv_accept(env, flow.now).unwrap_or(false),
        };
        checked += 1;
        if accepted {
            return Ok(outcome(
                "replay",
                false,
                format!("replayed {} was accepted", env.kind.label()),
            ));
        }
    }
    Ok(outcome(
        "replay",
        true,
        format!("{checked} recorded messages replayed past the window; all rejected"),
    ))
}

/// A credential signed by an unknown issuer, and a genuine credential
/// with altered attributes, must both fail registration.
fn attack_vc_forgery(seed: u64) -> Result<AttackOutcome, ScenarioError> {
    let mut flow = Flow::new(seed)?;
    let rogue = GovIssuer::generate(&mut flow.rng);
    let attrs = GovAttrs {
        age: 30,
        country: *b"IN",
    };
    flow.wallet
        .set_gov_credential(rogue.issue("resident 0", attrs, &mut flow.rng));
    let rogue_rejected = flow.register().is_err();
    flow.wallet.clear_session();

    let mut doctored = flow.issuer.issue("resident 0", attrs, &mut flow.rng);
    doctored.attrs = Some(GovAttrs {
        age: 30,
        country: *b"ZZ",
    });
    flow.wallet.set_gov_credential(doctored);
    let doctored_rejected = flow.register().is_err();

    Ok(outcome(
        "vc-forgery",
        rogue_rejected && doctored_rejected,
        format!("rogue-issuer rejected: {rogue_rejected}, altered-attrs rejected: {doctored_rejected}"),
    ))
}

/// A presentation captured in one session and re-addressed to another
/// session must not verify.
fn attack_osvc_cross_session(seed: u64) -> Result<AttackOutcome, ScenarioError> {
    let mut flow = Flow::new(seed)?;
    flow.register().map_err(internal)?;
    flow.place_order(1).map_err(internal)?;
    flow.dispatch().map_err(internal)?;
    let (fwd_a, decision, _) = flow.customer_verify().map_err(internal)?;
    if decision != Decision::Deliver {
        return Err(ScenarioError::Internal("baseline order failed".to_string()));
    }

    // Second, independent session with its own order.
    flow.robots[0].reset();
    flow.wallet = flow.fresh_wallet("wallet-1");
    flow.register().map_err(internal)?;
    flow.place_order(3).map_err(internal)?;
    flow.dispatch().map_err(internal)?;
    let did_csp_b = flow.wallet.did_csp().unwrap();

    let mut cross = fwd_a;
    cross.receiver = did_csp_b.to_string();
    let rejected = !matches!(
        flow.csp
            .verify_presentation(&cross, &mut flow.ledger, flow.now, &mut flow.rng),
        Ok((_, CvReason::Ok))
    );
    Ok(outcome(
        "osvc-cross-session",
        rejected,
        "presentation from session A re-addressed to session B".to_string(),
    ))
}

/// A robot whose device was substituted after CRP enrollment must fail
/// robot verification even though it holds the right provisioned key.
fn attack_puf_swap(seed: u64) -> Result<AttackOutcome, ScenarioError> {
    let mut flow = Flow::new(seed)?;
    flow.register().map_err(internal)?;
    flow.place_order(1).map_err(internal)?;
    flow.dispatch().map_err(internal)?;
    let (_, decision, _) = flow.customer_verify().map_err(internal)?;
    if decision != Decision::Deliver {
        return Err(ScenarioError::Internal("baseline order failed".to_string()));
    }
    let counterfeit = DeviceSecret::provision("counterfeit", &mut flow.rng);
    flow.robots[0].swap_device(counterfeit);
    let vb1 = flow.robot_verify().map_err(internal)?;
    Ok(outcome(
        "puf-swap",
        !vb1,
        format!("verification bit after device swap: {}", vb1 as u8),
    ))
}

/// Ledger resolution demands a role grant: anonymous callers and
/// customers without an ownership proof are refused.
fn attack_unauthorized_resolve(seed: u64) -> Result<AttackOutcome, ScenarioError> {
    let mut flow = Flow::new(seed)?;
    flow.register().map_err(internal)?;
    let did_u = flow.wallet.did_u().unwrap();
    let anon = flow
        .ledger
        .resolve_did(did_u, AccessRole::Anonymous, None)
        .is_err();
    let unproven = flow
        .ledger
        .resolve_did(did_u, AccessRole::Customer, None)
        .is_err();
    Ok(outcome(
        "unauthorized-resolve",
        anon && unproven,
        format!("anonymous refused: {anon}, proofless customer refused: {unproven}"),
    ))
}

/// A single flipped ciphertext byte must surface as an integrity
/// failure, never as a quietly different order.
fn attack_tamper(seed: u64) -> Result<AttackOutcome, ScenarioError> {
    let mut flow = Flow::new(seed)?;
    flow.register().map_err(internal)?;
    let catalog = flow.csp.catalog().clone();
    let mut o1 = flow
        .wallet
        .order_msg1(1, &catalog, flow.now, &mut flow.rng)
        .map_err(internal)?;
    match &mut o1.fields[0] {
        Field::Encrypted { ciphertext, .. } => ciphertext[5] ^= 0x80,
        Field::Plain { .. } => {
            return Err(ScenarioError::Internal("order payload not encrypted".to_string()))
        }
    }
    let result = flow
        .csp
        .order_msg2(&o1, &mut flow.ledger, flow.now, &mut flow.rng);
    let rejected = matches!(
        result,
        Err(ProtocolError::Crypto(CryptoError::IntegrityFailure))
    );
    Ok(outcome(
        "tamper",
        rejected,
        format!("flipped ciphertext bit -> {result:?}").chars().take(120).collect(),
    ))
}

/// After the provider's session DID is revoked, both verification
/// phases must refuse to proceed for that session.
fn attack_revoked_csp(seed: u64) -> Result<AttackOutcome, ScenarioError> {
    let mut flow = Flow::new(seed)?;
    flow.register().map_err(internal)?;
    flow.place_order(1).map_err(internal)?;
    flow.dispatch().map_err(internal)?;
    let did_csp = flow.wallet.did_csp().unwrap();
    flow.ledger
        .revoke_did(did_csp, AccessRole::Admin)
        .map_err(internal)?;

    let (_, decision, reason) = flow.customer_verify().map_err(internal)?;
    let cv_refused = decision == Decision::Refuse && reason == CvReason::Revoked;
    let r1 = flow
        .wallet
        .rv_request_challenge(flow.now, &mut flow.rng)
        .map_err(internal)?;
    let rv_refused = matches!(
        flow.csp
            .rv_issue_challenge(&r1, &mut flow.ledger, flow.now, &mut flow.rng),
        Err(ProtocolError::RejectedCredential)
    );
    Ok(outcome(
        "revoked-csp",
        cv_refused && rv_refused,
        format!("doorstep verdict refused: {cv_refused}, challenge refused: {rv_refused}"),
    ))
}

/// Runs one named drill.
pub fn run_attack(name: &str, seed: u64) -> Result<AttackOutcome, ScenarioError> {
    match name {
        "replay" => attack_replay(seed),
        "vc-forgery" => attack_vc_forgery(seed),
        "osvc-cross-session" => attack_osvc_cross_session(seed),
        "puf-swap" => attack_puf_swap(seed),
        "unauthorized-resolve" => attack_unauthorized_resolve(seed),
        "tamper" => attack_tamper(seed),
        "revoked-csp" => attack_revoked_csp(seed),
        other => Err(ScenarioError::ConfigInvalid(format!(
            "unknown attack name: {other}"
        ))),
    }
}

/// Runs a list of drills (all of them for an empty list).
pub fn run_attack_suite(names: &[String], seed: u64) -> Result<AttackReport, ScenarioError> {
    let selected: Vec<String> = if names.is_empty() {
        ATTACK_NAMES.iter().map(|n| n.to_string()).collect()
    } else {
        names.to_vec()
    };
    let mut outcomes = Vec::new();
    for name in &selected {
        outcomes.push(run_attack(name, seed)?);
    }
    let all_rejected = outcomes.iter().all(|o| o.rejected);
    Ok(AttackReport {
        seed,
        outcomes,
        all_rejected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_suite_rejects_every_attack() {
        let report = run_attack_suite(&[], 7).unwrap();
        assert_eq!(report.outcomes.len(), ATTACK_NAMES.len());
        for o in &report.outcomes {
            assert!(o.rejected, "{}: {}", o.name, o.detail);
        }
        assert!(report.all_rejected);
    }

    #[test]
    fn unknown_attack_name_is_config_invalid() {
        let err = run_attack_suite(&["mitm".to_string()], 1).unwrap_err();
        assert!(matches!(err, ScenarioError::ConfigInvalid(_)));
    }

    #[test]
    fn suite_is_deterministic_per_seed() {
        assert_eq!(run_attack_suite(&[], 3).unwrap(), run_attack_suite(&[], 3).unwrap());
    }
}
