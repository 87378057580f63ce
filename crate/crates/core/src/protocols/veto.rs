use serde::Serialize;

use crate::error::Result;

use super::parity::parity;
use super::session::Session;
use super::transcript::{EntryKind, Value};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VetoRound {
    /// Per-agent parity contribution `p_i` of this copy.
    pub contributions: Vec<u8>,
    pub y: u8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VetoOutcome {
    pub v: u8,
    pub rounds: Vec<VetoRound>,
}

/// Anonymous logical OR over `S` copies: an agent with input 1 feeds a fresh
/// random bit into each parity run, everyone else feeds 0. `V = 1` iff some
/// run returns parity 1.
pub(crate) fn logical_or(s: &mut Session<'_>, scope: &str, inputs: &[u8]) -> Result<VetoOutcome> {
    s.check_bits(inputs, "logical-OR inputs")?;
    for (i, &x) in inputs.iter().enumerate() {
        s.record(Some(i + 1), EntryKind::Private, || format!("{scope}.x"), || Value::Bit(x));
    }
    let mut rounds = Vec::with_capacity(s.security);
    for c in 1..=s.security {
        let contributions: Vec<u8> = inputs
            .iter()
            .map(|&x| if x == 0 { 0 } else { s.rng.bit() })
            .collect();
        let run = parity(s, &format!("{scope}.copy{c}"), &contributions, None)?;
        rounds.push(VetoRound {
            contributions,
            y: run.y,
        });
    }
    let v = rounds.iter().fold(0, |acc, r| acc | r.y);
    s.record(None, EntryKind::Derived, || format!("{scope}.V"), || Value::Bit(v));
    Ok(VetoOutcome { v, rounds })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CollisionOutcome {
    /// 0: no sender, 1: exactly one sender, 2: collision.
    pub v: u8,
    pub veto_a: VetoOutcome,
    pub veto_b: Option<VetoOutcome>,
    /// `b_i`: agent wished to send and saw evidence of another sender.
    pub detections: Vec<u8>,
}

/// Two-stage veto. A wishing agent flags another sender when some Veto-A run
/// returned a parity different from its own contribution.
pub(crate) fn collision_detection(s: &mut Session<'_>, wish_bits: &[u8]) -> Result<CollisionOutcome> {
    let veto_a = logical_or(s, "veto_a", wish_bits)?;
    let detections: Vec<u8> = (0..s.n)
        .map(|i| {
            let saw_other = veto_a.rounds.iter().any(|r| r.y ^ r.contributions[i] == 1);
            u8::from(wish_bits[i] == 1 && saw_other)
        })
        .collect();
    for (i, &b) in detections.iter().enumerate() {
        s.record(Some(i + 1), EntryKind::Private, || "veto_b.b".into(), || Value::Bit(b));
    }
    let (v, veto_b) = if veto_a.v == 0 {
        (0, None)
    } else {
        let veto_b = logical_or(s, "veto_b", &detections)?;
        (1 + veto_b.v, Some(veto_b))
    };
    s.record(None, EntryKind::Derived, || "collision.result".into(), || Value::Count(v as u64));
    Ok(CollisionOutcome {
        v,
        veto_a,
        veto_b,
        detections,
    })
}
