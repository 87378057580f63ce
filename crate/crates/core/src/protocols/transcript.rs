use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::io::Write;

use crate::error::Result;

/// 1-based agent index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub usize);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryKind {
    Broadcast,
    Private,
    Derived,
}

/// Logged value. Bit vectors serialize as strings of '0'/'1'.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Bit(u8),
    Bits(Vec<u8>),
    Count(u64),
}

impl Value {
    pub fn as_bit(&self) -> Option<u8> {
        match self {
            Value::Bit(b) => Some(*b),
            _ => None,
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Value::Bit(b) => s.serialize_u8(*b),
            Value::Count(c) => s.serialize_u64(*c),
            Value::Bits(bits) => s.serialize_str(&bits_to_string(bits)),
        }
    }
}

pub fn bits_to_string(bits: &[u8]) -> String {
    bits.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub seq: u64,
    /// `None` for values every agent can compute from public data.
    pub agent: Option<AgentId>,
    pub kind: EntryKind,
    pub name: String,
    pub value: Value,
}

impl Serialize for Entry {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Entry", 5)?;
        st.serialize_field("seq", &self.seq)?;
        st.serialize_field("agent", &self.agent)?;
        st.serialize_field("kind", &self.kind)?;
        st.serialize_field("name", &self.name)?;
        st.serialize_field("value", &self.value)?;
        st.end()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolName {
    Parity,
    LogicalOr,
    Notification,
    Authentication,
    CollisionDetection,
    EntanglementGeneration,
    AnonymousTransmission,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbortReason {
    /// The repetition cap was reached before entanglement mode was entered.
    Timeout,
    /// The receiver saw a failed verification round.
    Verification,
    /// Sender and receiver disagreed on the mode of a repetition.
    ModeMismatch,
    /// The sender decoded an abort flag from the final parity run.
    FinalSignal,
    /// Collision detection did not report exactly one sender.
    Collision,
    /// The intended receiver never identified itself.
    ReceiverNotNotified,
    /// An agent other than the intended receiver identified itself.
    SpuriousReceiver,
    /// Authentication of the receiver failed.
    Authentication,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FinalOutput {
    Parity(u8),
    Veto(u8),
    Beliefs(String),
    Authentication { abort: bool, mismatches: u64 },
    Collision(u8),
    Entanglement { fidelity: f64, repetitions: u64 },
    Aborted { repetitions: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transcript {
    pub protocol: ProtocolName,
    pub entries: Vec<Entry>,
    pub final_output: FinalOutput,
    pub aborted: Option<AbortReason>,
}

impl Transcript {
    /// One JSON object per entry, newline-terminated.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("entries serialize"));
            out.push('\n');
        }
        out
    }

    pub fn write_jsonl(&self, mut w: impl Write) -> Result<()> {
        w.write_all(self.to_jsonl().as_bytes())?;
        Ok(())
    }

    pub fn find(&self, name: &str) -> impl Iterator<Item = &Entry> {
        let name = name.to_owned();
        self.entries.iter().filter(move |e| e.name == name)
    }

    /// The bit logged under `name` by `agent`.
    pub fn bit(&self, name: &str, agent: Option<AgentId>) -> Option<u8> {
        self.entries
            .iter()
            .find(|e| e.name == name && e.agent == agent)
            .and_then(|e| e.value.as_bit())
    }

    /// Everything an outside observer of the broadcast channel sees.
    pub fn broadcast_view(&self) -> Vec<(Option<AgentId>, &str, &Value)> {
        self.entries
            .iter()
            .filter(|e| e.kind == EntryKind::Broadcast)
            .map(|e| (e.agent, e.name.as_str(), &e.value))
            .collect()
    }

    /// Canonical string form of [`Self::broadcast_view`], usable as a map key.
    pub fn broadcast_key(&self) -> String {
        let mut key = String::new();
        for (agent, name, value) in self.broadcast_view() {
            let agent = agent.map_or_else(|| "-".to_string(), |a| a.to_string());
            let value = serde_json::to_string(value).expect("values serialize");
            key.push_str(&format!("{agent}:{name}={value};"));
        }
        key
    }

    /// Recomputes every derived output from the logged values it depends on.
    /// Returns a description of the first inconsistency.
    pub fn verify(&self) -> std::result::Result<(), String> {
        let mut last = None;
        for e in &self.entries {
            if last.is_some_and(|s| e.seq <= s) {
                return Err(format!("sequence number {} is not increasing", e.seq));
            }
            last = Some(e.seq);
            if e.kind == EntryKind::Broadcast && e.agent.is_none() {
                return Err(format!("broadcast '{}' has no broadcaster", e.name));
            }
        }

        let mut by_name: HashMap<&str, Vec<&Entry>> = HashMap::new();
        for e in &self.entries {
            by_name.entry(e.name.as_str()).or_default().push(e);
        }
        let xor_of = |name: &str| -> Option<u8> {
            by_name
                .get(name)
                .map(|es| es.iter().filter_map(|e| e.value.as_bit()).fold(0, |a, b| a ^ b))
        };
        let single = |name: &str| -> Option<u8> {
            by_name.get(name).and_then(|es| es.first()).and_then(|e| e.value.as_bit())
        };

        for e in self.entries.iter().filter(|e| e.kind == EntryKind::Derived) {
            let Some(v) = e.value.as_bit() else { continue };
            let name = e.name.as_str();
            let expected = if let Some(prefix) = name.strip_suffix(".y") {
                xor_of(&format!("{prefix}.outcome"))
            } else if let Some(prefix) = name
                .strip_suffix(".V")
                .or_else(|| name.strip_suffix(".belief"))
            {
                let copies = format!("{prefix}.copy");
                let ys: Vec<u8> = self
                    .entries
                    .iter()
                    .filter(|x| {
                        x.kind == EntryKind::Derived
                            && x.name
                                .strip_prefix(&copies)
                                .and_then(|rest| rest.strip_suffix(".y"))
                                .is_some_and(|d| !d.is_empty() && d.bytes().all(|c| c.is_ascii_digit()))
                    })
                    .filter_map(|x| x.value.as_bit())
                    .collect();
                Some(ys.iter().fold(0, |a, b| a | b))
            } else if let Some(prefix) = name.strip_suffix(".decoded_mode") {
                single(&format!("{prefix}.mode.y"))
                    .zip(single(&format!("{prefix}.x_r")))
                    .map(|(y, x)| y ^ x)
            } else if let Some(prefix) = name.strip_suffix(".y_prime") {
                let receiver = e.agent;
                let announced = by_name.get(format!("{prefix}.announce").as_str()).map(|es| {
                    es.iter()
                        .filter(|x| x.agent != receiver)
                        .filter_map(|x| x.value.as_bit())
                        .fold(0, |a, b| a ^ b)
                });
                announced
                    .zip(single(&format!("{prefix}.a_r")))
                    .map(|(s, a)| s ^ a)
            } else if let Some(prefix) = name.strip_suffix(".decoded_abort") {
                single(&format!("{prefix}.final.y"))
                    .zip(single(&format!("{prefix}.x_tilde_s")))
                    .map(|(y, x)| y ^ x)
            } else if name == "auth.abort" {
                let count = |n: &str| match by_name.get(n).and_then(|es| es.first()).map(|e| &e.value) {
                    Some(Value::Count(c)) => Some(*c),
                    _ => None,
                };
                count("auth.mismatches")
                    .zip(count("auth.tolerance"))
                    .map(|(m, t)| u8::from(m > t))
            } else {
                continue;
            };
            match expected {
                Some(x) if x == v => {}
                Some(x) => {
                    return Err(format!("'{name}' logged {v} but recomputes to {x}"));
                }
                None => return Err(format!("'{name}' cannot be recomputed: inputs missing")),
            }
        }
        Ok(())
    }
}
