use serde::Serialize;

use crate::error::{Error, Result};

use super::parity::parity;
use super::session::Session;
use super::transcript::{AgentId, EntryKind, Transcript, Value};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NotificationOutcome {
    /// `y_i` for each agent: 1 if it concluded it is the receiver.
    pub beliefs: Vec<u8>,
    /// `round_outputs[i][c]`: parity agent `i+1` computed on copy `c` of its own round.
    pub round_outputs: Vec<Vec<u8>>,
    /// The sender's random inputs in the receiver's round, per copy.
    pub sender_inputs: Vec<u8>,
}

/// One round per agent `i`; within it only the sender feeds random bits, and
/// only when `i` is the receiver. Agent `i` withholds its own outcome so that
/// it alone learns the parity. In the sender's own round every input is 0.
pub(crate) fn notification(
    s: &mut Session<'_>,
    sender: AgentId,
    receiver: AgentId,
) -> Result<NotificationOutcome> {
    let snd = s.check_agent(sender)?;
    let rcv = s.check_agent(receiver)?;
    if snd == rcv {
        return Err(Error::InvalidParameter(format!(
            "agent {snd} cannot notify itself"
        )));
    }
    s.record(Some(snd), EntryKind::Private, || "notify.receiver".into(), || Value::Count(rcv as u64));
    let mut beliefs = vec![0u8; s.n];
    let mut round_outputs = vec![Vec::with_capacity(s.security); s.n];
    let mut sender_inputs = Vec::with_capacity(s.security);
    for i in 1..=s.n {
        for c in 1..=s.security {
            let mut inputs = vec![0u8; s.n];
            if i == rcv {
                let p = s.rng.bit();
                inputs[snd - 1] = p;
                sender_inputs.push(p);
            }
            let run = parity(s, &format!("notify.round{i}.copy{c}"), &inputs, Some(i))?;
            round_outputs[i - 1].push(run.y);
            beliefs[i - 1] |= run.y;
        }
        let b = beliefs[i - 1];
        s.record(Some(i), EntryKind::Derived, || format!("notify.round{i}.belief"), || Value::Bit(b));
    }
    Ok(NotificationOutcome {
        beliefs,
        round_outputs,
        sender_inputs,
    })
}

/// What each agent replays during authentication.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuthenticationInputs {
    pub sender: AgentId,
    /// `inputs[c][i]`: input of agent `i+1` on copy `c`; the sender's is always 0.
    pub inputs: Vec<Vec<u8>>,
    /// What the sender expects the receiver to have seen on each copy.
    pub expected: Vec<u8>,
}

impl AuthenticationInputs {
    pub fn from_outcome(outcome: &NotificationOutcome, sender: AgentId) -> Self {
        let n = outcome.beliefs.len();
        let copies = outcome.sender_inputs.len();
        let inputs = (0..copies)
            .map(|c| {
                (0..n)
                    .map(|i| if i + 1 == sender.0 { 0 } else { outcome.round_outputs[i][c] })
                    .collect()
            })
            .collect();
        Self {
            sender,
            inputs,
            expected: outcome.sender_inputs.clone(),
        }
    }

    /// Rebuilds the replay from a recorded notification transcript.
    pub fn from_transcript(t: &Transcript, sender: AgentId) -> Result<Self> {
        let receiver = t
            .entries
            .iter()
            .find(|e| e.name == "notify.receiver" && e.agent == Some(sender))
            .and_then(|e| match e.value {
                super::transcript::Value::Count(r) => Some(r as usize),
                _ => None,
            })
            .ok_or_else(|| Error::MissingTranscript("the sender's choice of receiver".into()))?;
        let mut n = 0;
        while t.bit(&format!("notify.round{}.belief", n + 1), Some(AgentId(n + 1))).is_some() {
            n += 1;
        }
        if n == 0 || receiver == 0 || receiver > n {
            return Err(Error::MissingTranscript("notification rounds".into()));
        }
        let mut copies = 0;
        while t
            .bit(&format!("notify.round1.copy{}.y", copies + 1), Some(AgentId(1)))
            .is_some()
        {
            copies += 1;
        }
        let mut inputs = Vec::with_capacity(copies);
        let mut expected = Vec::with_capacity(copies);
        for c in 1..=copies {
            let mut row = Vec::with_capacity(n);
            for i in 1..=n {
                if i == sender.0 {
                    row.push(0);
                    continue;
                }
                let y = t
                    .bit(&format!("notify.round{i}.copy{c}.y"), Some(AgentId(i)))
                    .ok_or_else(|| {
                        Error::MissingTranscript(format!("round {i} copy {c} output"))
                    })?;
                row.push(y);
            }
            inputs.push(row);
            let p = t
                .bit(&format!("notify.round{receiver}.copy{c}.input"), Some(sender))
                .ok_or_else(|| Error::MissingTranscript(format!("sender input on copy {c}")))?;
            expected.push(p);
        }
        Ok(Self {
            sender,
            inputs,
            expected,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuthenticationOutcome {
    pub abort: bool,
    pub mismatches: u64,
    pub parities: Vec<u8>,
}

/// Every agent but the sender re-enters its notification output for each copy;
/// the sender compares each parity against what it sent and aborts when more
/// than `tolerance` copies disagree.
pub(crate) fn authentication(
    s: &mut Session<'_>,
    replay: &AuthenticationInputs,
    tolerance: u64,
) -> Result<AuthenticationOutcome> {
    let snd = s.check_agent(replay.sender)?;
    if replay.inputs.len() != replay.expected.len() || replay.inputs.is_empty() {
        return Err(Error::MissingTranscript("notification copies to replay".into()));
    }
    let mut parities = Vec::with_capacity(replay.inputs.len());
    let mut mismatches = 0;
    for (c, (row, &want)) in replay.inputs.iter().zip(&replay.expected).enumerate() {
        let mut row = row.clone();
        if let Some(x) = row.get_mut(snd - 1) {
            *x = 0;
        }
        let run = parity(s, &format!("auth.copy{}", c + 1), &row, None)?;
        mismatches += u64::from(run.y != want);
        parities.push(run.y);
    }
    let abort = mismatches > tolerance;
    s.record(Some(snd), EntryKind::Private, || "auth.tolerance".into(), || Value::Count(tolerance));
    s.record(Some(snd), EntryKind::Derived, || "auth.mismatches".into(), || Value::Count(mismatches));
    s.record(Some(snd), EntryKind::Derived, || "auth.abort".into(), || Value::Bit(abort as u8));
    Ok(AuthenticationOutcome {
        abort,
        mismatches,
        parities,
    })
}
