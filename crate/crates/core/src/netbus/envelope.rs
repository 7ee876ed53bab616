//! Typed protocol envelopes with canonical, length-prefixed serialization.
//! Byte equality of encoded envelopes equals semantic equality.

use serde::{Deserialize, Serialize};

use crate::cryptokit::freshness::Timestamp;
use super::NetbusError;

/// Protocol message label.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash, Serialize, Deserialize, PartialOrd, Ord)]
pub enum MsgKind {
    RegM1,
    RegM2,
    RegM3,
    OrdM1,
    OrdM2,
    CvReq,
    CvM3,
    CvS5,
    RvM1,
    RvM2,
    RvS1,
    RvS2,
    RvM3,
    RvS3,
}

/// Protocol phase a message belongs to.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash, Serialize, Deserialize)]
pub enum Phase {
    Registration,
    OrderPlacing,
    CustomerVerification,
    RobotVerification,
}

impl Phase {
    pub fn label(&self) -> &'static str {
        match self {
            Phase::Registration => "registration",
            Phase::OrderPlacing => "order-placing",
            Phase::CustomerVerification => "customer-verification",
            Phase::RobotVerification => "robot-verification",
        }
    }

    pub fn from_label(label: &str) -> Result<Phase, NetbusError> {
        Ok(match label {
            "registration" => Phase::Registration,
            "order-placing" => Phase::OrderPlacing,
            "customer-verification" => Phase::CustomerVerification,
            "robot-verification" => Phase::RobotVerification,
            _ => return Err(NetbusError::UnknownPhase(label.to_string())),
        })
    }

    pub fn all() -> [Phase; 4] {
        [
            Phase::Registration,
            Phase::OrderPlacing,
            Phase::CustomerVerification,
            Phase::RobotVerification,
        ]
    }
}

impl MsgKind {
    pub fn label(&self) -> &'static str {
        match self {
            MsgKind::RegM1 => "REG_M1",
            MsgKind::RegM2 => "REG_M2",
            MsgKind::RegM3 => "REG_M3",
            MsgKind::OrdM1 => "ORD_M1",
            MsgKind::OrdM2 => "ORD_M2",
            MsgKind::CvReq => "CV_REQ",
            MsgKind::CvM3 => "CV_M3",
            MsgKind::CvS5 => "CV_S5",
            MsgKind::RvM1 => "RV_M1",
            MsgKind::RvM2 => "RV_M2",
            MsgKind::RvS1 => "RV_S1",
            MsgKind::RvS2 => "RV_S2",
            MsgKind::RvM3 => "RV_M3",
            MsgKind::RvS3 => "RV_S3",
        }
    }

    pub fn phase(&self) -> Phase {
        match self {
            MsgKind::RegM1 | MsgKind::RegM2 | MsgKind::RegM3 => Phase::Registration,
            MsgKind::OrdM1 | MsgKind::OrdM2 => Phase::OrderPlacing,
            MsgKind::CvReq | MsgKind::CvM3 | MsgKind::CvS5 => Phase::CustomerVerification,
            MsgKind::RvM1
            | MsgKind::RvM2
            | MsgKind::RvS1
            | MsgKind::RvS2
            | MsgKind::RvM3
            | MsgKind::RvS3 => Phase::RobotVerification,
        }
    }

    fn tag(&self) -> u8 {
        *self as u8
    }

    fn from_tag(tag: u8) -> Option<MsgKind> {
        use MsgKind::*;
        const ALL: [MsgKind; 14] = [
            RegM1, RegM2, RegM3, OrdM1, OrdM2, CvReq, CvM3, CvS5, RvM1, RvM2, RvS1, RvS2, RvM3,
            RvS3,
        ];
        ALL.get(tag as usize).copied()
    }
}

/// Kind of a payload field; each kind has a nominal bit size in the
/// active accounting profile.
#[derive(
    Clone, Copy, PartialEq, Eq, Debug, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub enum FieldKind {
    /// 64-bit DID suffix.
    Did,
    /// 64-bit random nonce.
    Nonce,
    /// 64-bit keyed-hash digest.
    Digest,
    /// Bare signature.
    Signature,
    /// Signature together with the nonce it covers; priced as one
    /// 64-bit signed-nonce unit.
    SignedNonce,
    /// Verifiable credential (digest + signature + signer DID).
    Credential,
    /// 64-bit product id.
    ProductId,
    /// 128-bit PUF challenge.
    Challenge,
    /// Signature together with the challenge it covers.
    SignedChallenge,
    /// 128-bit PUF response.
    Response,
    /// 1-bit verification verdict.
    VerdictBit,
    /// 1-bit request/robot-verify flag.
    FlagBit,
    /// 64-bit one-time token (TID_u / cr_u).
    Token,
}

impl FieldKind {
    fn tag(&self) -> u8 {
        *self as u8
    }

    fn from_tag(tag: u8) -> Option<FieldKind> {
        use FieldKind::*;
        const ALL: [FieldKind; 13] = [
            Did, Nonce, Digest, Signature, SignedNonce, Credential, ProductId, Challenge,
            SignedChallenge, Response, VerdictBit, FlagBit, Token,
        ];
        ALL.get(tag as usize).copied()
    }
}

/// One payload field: either plaintext bytes of a known kind, or a
/// ciphertext whose plaintext field kinds are carried for cost
/// accounting.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Field {
    Plain { kind: FieldKind, bytes: Vec<u8> },
    Encrypted { inner: Vec<FieldKind>, ciphertext: Vec<u8> },
}

/// A deterministic, typed message on the simulated bus.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Envelope {
    pub topic: String,
    pub kind: MsgKind,
    pub sender: String,
    pub receiver: String,
    pub timestamp: Timestamp,
    pub fields: Vec<Field>,
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u16).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], NetbusError> {
        let end = self.pos.checked_add(n).ok_or(NetbusError::MalformedEnvelope)?;
        if end > self.bytes.len() {
            return Err(NetbusError::MalformedEnvelope);
        }
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8, NetbusError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, NetbusError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, NetbusError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, NetbusError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String, NetbusError> {
        let len = self.u16()? as usize;
        String::from_utf8(self.take(len)?.to_vec()).map_err(|_| NetbusError::MalformedEnvelope)
    }
}

impl Envelope {
    /// Canonical byte encoding with fixed field order.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.push(self.kind.tag());
        put_str(&mut out, &self.topic);
        put_str(&mut out, &self.sender);
        put_str(&mut out, &self.receiver);
        out.extend_from_slice(&self.timestamp.millis.to_le_bytes());
        out.extend_from_slice(&(self.fields.len() as u16).to_le_bytes());
        for field in &self.fields {
            match field {
                Field::Plain { kind, bytes } => {
                    out.push(0);
                    out.push(kind.tag());
                    out.extend_from_slice(&(bytes.len() as u32).to_le_bytes());
                    out.extend_from_slice(bytes);
                }
                Field::Encrypted { inner, ciphertext } => {
                    out.push(1);
                    out.extend_from_slice(&(inner.len() as u16).to_le_bytes());
                    for kind in inner {
                        out.push(kind.tag());
                    }
                    out.extend_from_slice(&(ciphertext.len() as u32).to_le_bytes());
                    out.extend_from_slice(ciphertext);
                }
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Envelope, NetbusError> {
        let mut r = Reader { bytes, pos: 0 };
        let kind = MsgKind::from_tag(r.u8()?).ok_or(NetbusError::MalformedEnvelope)?;
        let topic = r.string()?;
        let sender = r.string()?;
        let receiver = r.string()?;
        let timestamp = Timestamp::new(r.u64()?);
        let n_fields = r.u16()? as usize;
        let mut fields = Vec::with_capacity(n_fields);
        for _ in 0..n_fields {
            match r.u8()? {
                0 => {
                    let kind =
                        FieldKind::from_tag(r.u8()?).ok_or(NetbusError::MalformedEnvelope)?;
                    let len = r.u32()? as usize;
                    fields.push(Field::Plain {
                        kind,
                        bytes: r.take(len)?.to_vec(),
                    });
                }
                1 => {
                    let n_inner = r.u16()? as usize;
                    let mut inner = Vec::with_capacity(n_inner);
                    for _ in 0..n_inner {
                        inner.push(
                            FieldKind::from_tag(r.u8()?).ok_or(NetbusError::MalformedEnvelope)?,
                        );
                    }
                    let len = r.u32()? as usize;
                    fields.push(Field::Encrypted {
                        inner,
                        ciphertext: r.take(len)?.to_vec(),
                    });
                }
                _ => return Err(NetbusError::MalformedEnvelope),
            }
        }
        if r.pos != bytes.len() {
            return Err(NetbusError::MalformedEnvelope);
        }
        Ok(Envelope {
            topic,
            kind,
            sender,
            receiver,
            timestamp,
            fields,
        })
    }
}
