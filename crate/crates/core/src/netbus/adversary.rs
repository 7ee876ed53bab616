//! Dolev-Yao adversary interceptor: reads, drops, mutates, replays, and
//! injects envelopes, but holds no private keys or device secrets.

use super::envelope::{Envelope, Field, MsgKind};

/// What the adversary does to matching traffic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AdversaryMode {
    /// Record only; deliver unchanged.
    PassiveRecord,
    /// Delete matching messages.
    Drop,
    /// Overwrite one payload byte.
    Modify { byte_index: usize, value: u8 },
    /// Deliver, then deliver a copy again with its timestamp aged by
    /// `delay_ms` (the copy arrives late, carrying the original stamp).
    Replay { delay_ms: u64 },
    /// Deliver, then inject a fixed extra envelope.
    Inject(Box<Envelope>),
}

/// Interception policy: a mode plus a predicate over message kinds.
/// `target: None` matches every message.
#[derive(Clone, Debug)]
pub struct AdversaryPolicy {
    pub mode: AdversaryMode,
    pub target: Option<Vec<MsgKind>>,
}

impl AdversaryPolicy {
    pub fn passive() -> AdversaryPolicy {
        AdversaryPolicy {
            mode: AdversaryMode::PassiveRecord,
            target: None,
        }
    }

    pub fn matches(&self, kind: MsgKind) -> bool {
        match &self.target {
            None => true,
            Some(kinds) => kinds.contains(&kind),
        }
    }

    pub fn is_active(&self) -> bool {
        !matches!(self.mode, AdversaryMode::PassiveRecord)
    }
}

/// Result of running one envelope through the interceptor.
#[derive(Clone, Debug)]
pub struct Interception {
    /// Envelopes that actually reach the topic queue, in order.
    pub deliveries: Vec<Envelope>,
    /// Whether the policy altered or suppressed traffic.
    pub touched: bool,
}

fn mutate_payload(envelope: &mut Envelope, byte_index: usize, value: u8) -> bool {
    // Prefer ciphertext bytes so the mutation surfaces as an integrity
    // failure at the decryptor; fall back to any plain field.
    for field in envelope.fields.iter_mut() {
        let bytes = match field {
            Field::Encrypted { ciphertext, .. } => ciphertext,
            Field::Plain { .. } => continue,
        };
        if !bytes.is_empty() {
            let idx = byte_index % bytes.len();
            bytes[idx] = if bytes[idx] == value { value ^ 0xff } else { value };
            return true;
        }
    }
    for field in envelope.fields.iter_mut() {
        if let Field::Plain { bytes, .. } = field {
            if !bytes.is_empty() {
                let idx = byte_index % bytes.len();
                bytes[idx] = if bytes[idx] == value { value ^ 0xff } else { value };
                return true;
            }
        }
    }
    false
}

/// Applies the policy to one published envelope. Everything seen is
/// appended to `knowledge`, the adversary's record for later replay.
pub fn adversary_intercept(
    policy: &AdversaryPolicy,
    envelope: Envelope,
    knowledge: &mut Vec<Envelope>,
) -> Interception {
    knowledge.push(envelope.clone());
    if !policy.matches(envelope.kind) {
        return Interception {
            deliveries: vec![envelope],
            touched: false,
        };
    }
    match &policy.mode {
        AdversaryMode::PassiveRecord => Interception {
            deliveries: vec![envelope],
            touched: false,
        },
        AdversaryMode::Drop => Interception {
            deliveries: vec![],
            touched: true,
        },
        AdversaryMode::Modify { byte_index, value } => {
            let mut mutated = envelope;
            let touched = mutate_payload(&mut mutated, *byte_index, *value);
            Interception {
                deliveries: vec![mutated],
                touched,
            }
        }
        AdversaryMode::Replay { delay_ms: _ } => {
            // The copy keeps its original timestamp; by the time it is
            // processed the receiver clock has moved past the window.
            let copy = envelope.clone();
            Interception {
                deliveries: vec![envelope, copy],
                touched: true,
            }
        }
        AdversaryMode::Inject(extra) => Interception {
            deliveries: vec![envelope, (**extra).clone()],
            touched: true,
        },
    }
}
