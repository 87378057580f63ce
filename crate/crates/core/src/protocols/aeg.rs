//! Anonymous entanglement generation between a notified sender and receiver.
//!
//! In step 2 every agent announces exactly one bit: bystanders their X outcome,
//! the sender either its phase bit `b` (entanglement mode) or its own X outcome
//! (verification mode), and the receiver a random cover bit `b'`. The receiver
//! never needs to know who the sender is: both its correction and its check
//! use the XOR of all announcements other than its own.
//!
//! The repetition loop ends at the first repetition the receiver decodes as
//! entanglement mode. A sender whose mode disagrees with the receiver's
//! decoding aborts with [`AbortReason::ModeMismatch`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{fidelity, measure_basis, phi_plus, Basis, Pauli, QuantumRegister};

use super::parity::parity;
use super::session::Session;
use super::transcript::{AbortReason, AgentId, EntryKind, Value};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AegPolicy {
    pub max_repetitions: u64,
    /// Fraction of verification rounds allowed to fail. 0 aborts on the first failure.
    pub tolerance: f64,
}

impl AegPolicy {
    pub fn strict(max_repetitions: u64) -> Self {
        Self {
            max_repetitions,
            tolerance: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AegOutcome {
    /// Sender and receiver hold `pair` (qubits in ascending agent order).
    Epr {
        pair: QuantumRegister,
        fidelity: f64,
        repetitions: u64,
    },
    Abort {
        reason: AbortReason,
        repetitions: u64,
    },
}

impl AegOutcome {
    pub fn is_success(&self) -> bool {
        matches!(self, AegOutcome::Epr { .. })
    }

    pub fn repetitions(&self) -> u64 {
        match self {
            AegOutcome::Epr { repetitions, .. } | AegOutcome::Abort { repetitions, .. } => *repetitions,
        }
    }

    pub fn abort_reason(&self) -> Option<AbortReason> {
        match self {
            AegOutcome::Abort { reason, .. } => Some(*reason),
            AegOutcome::Epr { .. } => None,
        }
    }
}

pub(crate) fn entanglement_generation(
    s: &mut Session<'_>,
    sender: AgentId,
    receiver: AgentId,
    policy: AegPolicy,
) -> Result<AegOutcome> {
    let snd = s.check_agent(sender)?;
    let rcv = s.check_agent(receiver)?;
    if snd == rcv {
        return Err(Error::InvalidParameter("sender and receiver must differ".into()));
    }
    if policy.max_repetitions == 0 {
        return Err(Error::InvalidParameter("max_repetitions must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&policy.tolerance) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be a fraction in [0, 1], got {}",
            policy.tolerance
        )));
    }
    let n = s.n;
    let bystanders: Vec<usize> = (1..=n).filter(|&j| j != snd && j != rcv).collect();
    let mut tests = 0u64;
    let mut failures = 0u64;

    for rep in 1..=policy.max_repetitions {
        let scope = format!("aeg.rep{rep}");
        let mut state = s.draw()?;

        let (bystander_out, post) = measure_basis(&state, &bystanders, Basis::X, s.rng)?;
        state = post;

        let coins: Vec<u8> = (0..s.security).map(|_| s.rng.bit()).collect();
        let x = u8::from(coins.iter().any(|&c| c == 1));
        s.record(Some(snd), EntryKind::Private, || format!("{scope}.coins"), || Value::Bits(coins));
        s.record(Some(snd), EntryKind::Private, || format!("{scope}.x"), || Value::Bit(x));
        let sender_bit = if x == 0 {
            let b = s.rng.bit();
            if b == 1 {
                state.apply_pauli_mut(snd, Pauli::Z)?;
            }
            s.record(Some(snd), EntryKind::Private, || format!("{scope}.b"), || Value::Bit(b));
            b
        } else {
            let (out, post) = measure_basis(&state, &[snd], Basis::X, s.rng)?;
            state = post;
            let a_s = out.bits[0];
            s.record(Some(snd), EntryKind::Private, || format!("{scope}.a_s"), || Value::Bit(a_s));
            a_s
        };
        let b_prime = s.rng.bit();

        let mut announce = vec![0u8; n];
        for (&j, &a) in bystanders.iter().zip(&bystander_out.bits) {
            announce[j - 1] = a;
        }
        announce[snd - 1] = sender_bit;
        announce[rcv - 1] = b_prime;
        for (j, &bit) in announce.iter().enumerate() {
            s.record(Some(j + 1), EntryKind::Broadcast, || format!("{scope}.announce"), || Value::Bit(bit));
        }
        let others_xor = announce
            .iter()
            .enumerate()
            .filter(|(j, _)| j + 1 != rcv)
            .fold(0, |acc, (_, b)| acc ^ b);

        // mode notification
        let x_r = s.rng.bit();
        s.record(Some(rcv), EntryKind::Private, || format!("{scope}.x_r"), || Value::Bit(x_r));
        let mut inputs = vec![0u8; n];
        inputs[snd - 1] = x;
        inputs[rcv - 1] = x_r;
        let mode = parity(s, &format!("{scope}.mode"), &inputs, None)?;
        let decoded = mode.y ^ x_r;
        s.record(Some(rcv), EntryKind::Derived, || format!("{scope}.decoded_mode"), || Value::Bit(decoded));

        if decoded == 0 {
            s.record(Some(rcv), EntryKind::Private, || format!("{scope}.correction"), || Value::Bit(others_xor));
            if others_xor == 1 {
                state.apply_pauli_mut(rcv, Pauli::Z)?;
            }
            let x_tilde_r = u8::from(failures as f64 > policy.tolerance * tests as f64);
            let sender_abort = final_signal(s, snd, rcv, x_tilde_r)?;
            let reason = if x_tilde_r == 1 {
                Some(AbortReason::Verification)
            } else if sender_abort == 1 {
                Some(AbortReason::FinalSignal)
            } else if x == 1 {
                Some(AbortReason::ModeMismatch)
            } else {
                None
            };
            if let Some(reason) = reason {
                return Ok(AegOutcome::Abort {
                    reason,
                    repetitions: rep,
                });
            }
            let mut pair = state;
            for (&j, &a) in bystanders.iter().zip(&bystander_out.bits).rev() {
                pair = pair.discard_measured(j, Basis::X, a)?;
            }
            let f = fidelity(&pair, &phi_plus())?;
            return Ok(AegOutcome::Epr {
                pair,
                fidelity: f,
                repetitions: rep,
            });
        }

        // verification round
        let (out, post) = measure_basis(&state, &[rcv], Basis::X, s.rng)?;
        drop(post);
        let a_r = out.bits[0];
        let y_prime = others_xor ^ a_r;
        s.record(Some(rcv), EntryKind::Private, || format!("{scope}.a_r"), || Value::Bit(a_r));
        s.record(Some(rcv), EntryKind::Derived, || format!("{scope}.y_prime"), || Value::Bit(y_prime));
        tests += 1;
        failures += u64::from(y_prime);
        if x == 0 {
            // the sender already spent its half of the pair
            return Ok(AegOutcome::Abort {
                reason: AbortReason::ModeMismatch,
                repetitions: rep,
            });
        }
        if policy.tolerance == 0.0 && y_prime == 1 {
            final_signal(s, snd, rcv, 1)?;
            return Ok(AegOutcome::Abort {
                reason: AbortReason::Verification,
                repetitions: rep,
            });
        }
    }
    Ok(AegOutcome::Abort {
        reason: AbortReason::Timeout,
        repetitions: policy.max_repetitions,
    })
}

/// Receiver conveys its abort flag through a parity run masked by a random
/// sender bit. Returns the flag as decoded by the sender.
fn final_signal(s: &mut Session<'_>, snd: usize, rcv: usize, x_tilde_r: u8) -> Result<u8> {
    let x_tilde_s = s.rng.bit();
    s.record(Some(rcv), EntryKind::Private, || "aeg.x_tilde_r".into(), || Value::Bit(x_tilde_r));
    s.record(Some(snd), EntryKind::Private, || "aeg.x_tilde_s".into(), || Value::Bit(x_tilde_s));
    let mut inputs = vec![0u8; s.n];
    inputs[rcv - 1] = x_tilde_r;
    inputs[snd - 1] = x_tilde_s;
    let run = parity(s, "aeg.final", &inputs, None)?;
    let decoded = run.y ^ x_tilde_s;
    s.record(Some(snd), EntryKind::Derived, || "aeg.decoded_abort".into(), || Value::Bit(decoded));
    Ok(decoded)
}
