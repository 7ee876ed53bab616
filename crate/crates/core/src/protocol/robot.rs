//! Delivery robot: stores exactly one provisioned public key and no
//! customer data. Forwards the customer's presentation unopened, acts on
//! signed verdicts, and answers PUF challenges with its device.

use rand::RngCore;

use crate::cryptokit::{
    asym_encrypt, ecdsa_verify, CurveParams, CurvePoint, Timestamp,
};
use crate::netbus::{Envelope, Field, FieldKind, MsgKind};
use crate::pufsim::{puf_eval, Challenge, DeviceSecret};

use super::{
    challenge_message, domain, make_envelope, plain_field, signal_message, Bytes, ProtocolError,
};

/// The robot's delivery decision.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Decision {
    Pending,
    Deliver,
    Refuse,
}

/// One delivery robot.
pub struct Robot {
    robot_id: String,
    device: DeviceSecret,
    csp_public: Option<CurvePoint>,
    decision: Decision,
}

impl Robot {
    pub fn new<R: RngCore>(robot_id: &str, rng: &mut R) -> Robot {
        Robot {
            robot_id: robot_id.to_string(),
            device: DeviceSecret::provision(robot_id, rng),
            csp_public: None,
            decision: Decision::Pending,
        }
    }

    /// Builds a robot around an existing device, for device-swap tests.
    pub fn with_device(robot_id: &str, device: DeviceSecret) -> Robot {
        Robot {
            robot_id: robot_id.to_string(),
            device,
            csp_public: None,
            decision: Decision::Pending,
        }
    }

    pub fn robot_id(&self) -> &str {
        &self.robot_id
    }

    pub(crate) fn device(&self) -> &DeviceSecret {
        &self.device
    }

    /// Swaps the silicon, keeping identity and provisioning. Models a
    /// cloned or substituted robot.
    pub fn swap_device(&mut self, device: DeviceSecret) {
        self.device = device;
    }

    pub fn is_provisioned(&self) -> bool {
        self.csp_public.is_some()
    }

    pub fn decision(&self) -> Decision {
        self.decision
    }

    /// Stores the order-specific provider public key — the only key the
    /// robot ever holds.
    pub fn provision(&mut self, csp_public: CurvePoint) {
        self.csp_public = Some(csp_public);
        self.decision = Decision::Pending;
    }

    /// Returns the robot to the pool after a delivery.
    pub fn reset(&mut self) {
        self.csp_public = None;
        self.decision = Decision::Pending;
    }

    fn key(&self) -> Result<&CurvePoint, ProtocolError> {
        self.csp_public
            .as_ref()
            .ok_or(ProtocolError::UnprovisionedRobot)
    }

    /// Asks the customer for their order presentation (1-bit request).
    pub fn request(&self, wallet_actor: &str, now: Timestamp) -> Envelope {
        make_envelope(
            MsgKind::CvReq,
            &self.robot_id,
            wallet_actor,
            &format!("inbox/{wallet_actor}"),
            now,
            vec![Field::Plain {
                kind: FieldKind::FlagBit,
                bytes: vec![1],
            }],
        )
    }

    /// Forwards the customer's presentation to the provider unopened:
    /// the payload stays addressed to the provider's order DID.
    pub fn forward(&self, m3: &Envelope, now: Timestamp) -> Envelope {
        let mut out = m3.clone();
        out.topic = "inbox/csp".to_string();
        out.sender = self.robot_id.clone();
        out.timestamp = now;
        out
    }

    /// Acts on the provider's signed verdict.
    pub fn robot_decide(&mut self, s5: &Envelope) -> Result<Decision, ProtocolError> {
        let params = CurveParams::p256();
        let key = *self.key()?;
        let verdict = match plain_field(s5, 0, FieldKind::VerdictBit)? {
            [0] => false,
            [1] => true,
            _ => return Err(ProtocolError::MalformedPayload),
        };
        let mut d = Bytes::new(plain_field(s5, 1, FieldKind::Digest)?);
        let binding = d.digest()?;
        d.finish()?;
        let mut s = Bytes::new(plain_field(s5, 2, FieldKind::Signature)?);
        let sig = s.signature()?;
        s.finish()?;

        let valid = ecdsa_verify(params, &signal_message(verdict, binding), &sig, &key);
        self.decision = if valid && verdict {
            Decision::Deliver
        } else {
            Decision::Refuse
        };
        Ok(self.decision)
    }

    /// Verifies the relayed challenge signature, evaluates the device,
    /// and returns the encrypted challenge/response pair.
    pub fn rv_puf_answer<R: RngCore>(
        &self,
        s2: &Envelope,
        now: Timestamp,
        rng: &mut R,
    ) -> Result<Envelope, ProtocolError> {
        let params = CurveParams::p256();
        let key = *self.key()?;
        let mut r = Bytes::new(plain_field(s2, 0, FieldKind::SignedChallenge)?);
        let challenge = Challenge(r.array16()?);
        let sig = r.signature()?;
        r.finish()?;

        let msg = challenge_message(domain::RV_CHALLENGE_RELAY, &challenge.0);
        if !ecdsa_verify(params, &msg, &sig, &key) {
            return Err(ProtocolError::ChallengeResponseFailure);
        }
        let response = puf_eval(&self.device, &challenge);
        let mut pt = challenge.0.to_vec();
        pt.extend_from_slice(&response.0);
        let ct = asym_encrypt(params, &pt, &key, rng)?;
        Ok(make_envelope(
            MsgKind::RvM3,
            &self.robot_id,
            "csp",
            "inbox/csp",
            now,
            vec![Field::Encrypted {
                inner: vec![FieldKind::Challenge, FieldKind::Response],
                ciphertext: ct.0,
            }],
        ))
    }

    /// Robots hold no decryption key at all; any attempt to open a
    /// forwarded ciphertext is structurally impossible. Exposed for
    /// tests as a named fact.
    pub fn can_decrypt(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cryptokit::test_rng;

    #[test]
    fn unprovisioned_robot_refuses_protocol_work(){
        let mut rng = test_rng(21);
        let mut robot = Robot::new("robot-0", &mut rng);
        let s5 = make_envelope(
            MsgKind::CvS5,
            "csp",
            "robot-0",
            "inbox/robot-0",
            Timestamp::new(0),
            vec![],
        );
        assert_eq!(
            robot.robot_decide(&s5).unwrap_err(),
            ProtocolError::UnprovisionedRobot
        );
        assert_eq!(
            robot.rv_puf_answer(&s5, Timestamp::new(0), &mut rng).unwrap_err(),
            ProtocolError::UnprovisionedRobot
        );
    }

    #[test]
    fn forward_preserves_payload_and_receiver() {
        let mut rng = test_rng(22);
        let robot = Robot::new("robot-1", &mut rng);
        let m3 = make_envelope(
            MsgKind::CvM3,
            "wallet-0",
            "did:courier:00000000000000aa",
            "inbox/robot-1",
            Timestamp::new(5),
            vec![Field::Encrypted {
                inner: vec![FieldKind::Signature],
                ciphertext: vec![7; 99],
            }],
        );
        let fwd = robot.forward(&m3, Timestamp::new(9));
        assert_eq!(fwd.topic, "inbox/csp");
        assert_eq!(fwd.receiver, m3.receiver);
        assert_eq!(fwd.fields, m3.fields);
        assert_eq!(fwd.sender, "robot-1");
    }

    #[test]
    fn request_is_a_single_flag_bit() {
        let mut rng = test_rng(23);
        let robot = Robot::new("robot-2", &mut rng);
        let req = robot.request("wallet-0", Timestamp::new(1));
        assert_eq!(
            req.fields,
            vec![Field::Plain {
                kind: FieldKind::FlagBit,
                bytes: vec![1],
            }]
        );
    }
}
