use serde::Serialize;

use crate::error::Result;
use crate::qstate::{measure_basis, Basis, Pauli};

use super::session::Session;
use super::transcript::{EntryKind, Value};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ParityOptions {
    /// Agent that keeps its measurement outcome private.
    pub withhold: Option<super::AgentId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParityOutcome {
    /// XOR of all outcomes. When an agent withholds, only that agent knows it.
    pub y: u8,
    /// Outcome bit of every agent, index `i` for agent `i+1`.
    pub outcomes: Vec<u8>,
    pub withheld_by: Option<usize>,
}

/// One parity run on a fresh copy: agents with input 1 apply Z, everybody
/// measures X and announces the outcome (except the withholding agent).
pub(crate) fn parity(
    s: &mut Session<'_>,
    scope: &str,
    inputs: &[u8],
    withhold: Option<usize>,
) -> Result<ParityOutcome> {
    s.check_bits(inputs, "parity inputs")?;
    let mut state = s.draw()?;
    for (i, &x) in inputs.iter().enumerate() {
        s.record(Some(i + 1), EntryKind::Private, || format!("{scope}.input"), || Value::Bit(x));
        if x == 1 {
            state.apply_pauli_mut(i + 1, Pauli::Z)?;
        }
    }
    let all: Vec<usize> = (1..=s.n).collect();
    let (outcome, _) = measure_basis(&state, &all, Basis::X, s.rng)?;
    for (i, &a) in outcome.bits.iter().enumerate() {
        let kind = if withhold == Some(i + 1) {
            EntryKind::Private
        } else {
            EntryKind::Broadcast
        };
        s.record(Some(i + 1), kind, || format!("{scope}.outcome"), || Value::Bit(a));
    }
    let y = outcome.parity();
    s.record(withhold, EntryKind::Derived, || format!("{scope}.y"), || Value::Bit(y));
    Ok(ParityOutcome {
        y,
        outcomes: outcome.bits,
        withheld_by: withhold,
    })
}
