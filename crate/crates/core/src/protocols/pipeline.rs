use serde::Serialize;

use crate::error::Result;

use super::aeg::{entanglement_generation, AegOutcome, AegPolicy};
use super::notification::{authentication, notification, AuthenticationInputs};
use super::session::Session;
use super::transcript::{AbortReason, AgentId};
use super::veto::collision_detection;

/// Result of each stage of a full anonymous transmission.
#[derive(Clone, Debug, PartialEq)]
pub struct TransmissionOutcome {
    pub collision: u8,
    pub beliefs: Option<Vec<u8>>,
    pub auth_mismatches: Option<u64>,
    /// Aborts raised before entanglement generation report zero repetitions.
    pub result: AegOutcome,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TransmissionPolicy {
    pub aeg: AegPolicy,
    pub auth_tolerance: u64,
}

fn abort(reason: AbortReason) -> AegOutcome {
    AegOutcome::Abort {
        reason,
        repetitions: 0,
    }
}

/// Collision detection, notification, authentication and entanglement
/// generation, with only `sender` wishing to send.
pub(crate) fn anonymous_transmission(
    s: &mut Session<'_>,
    sender: AgentId,
    receiver: AgentId,
    policy: TransmissionPolicy,
) -> Result<TransmissionOutcome> {
    let snd = s.check_agent(sender)?;
    s.check_agent(receiver)?;
    let mut wish = vec![0u8; s.n];
    wish[snd - 1] = 1;
    let collision = collision_detection(s, &wish)?.v;
    let mut out = TransmissionOutcome {
        collision,
        beliefs: None,
        auth_mismatches: None,
        result: abort(AbortReason::Collision),
    };
    if collision != 1 {
        return Ok(out);
    }

    let notified = notification(s, sender, receiver)?;
    out.beliefs = Some(notified.beliefs.clone());
    if notified.sender_inputs.iter().all(|&p| p == 0) {
        out.result = abort(AbortReason::ReceiverNotNotified);
        return Ok(out);
    }

    let replay = AuthenticationInputs::from_outcome(&notified, sender);
    let auth = authentication(s, &replay, policy.auth_tolerance)?;
    out.auth_mismatches = Some(auth.mismatches);
    if auth.abort {
        out.result = abort(AbortReason::Authentication);
        return Ok(out);
    }
    if notified.beliefs[receiver.0 - 1] == 0 {
        out.result = abort(AbortReason::ReceiverNotNotified);
        return Ok(out);
    }
    if notified
        .beliefs
        .iter()
        .enumerate()
        .any(|(i, &b)| b == 1 && i + 1 != receiver.0)
    {
        out.result = abort(AbortReason::SpuriousReceiver);
        return Ok(out);
    }

    out.result = entanglement_generation(s, sender, receiver, policy.aeg)?;
    Ok(out)
}
