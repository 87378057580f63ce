//! Agent-level protocol stack over a shared GHZ source.
//!
//! Every parity run consumes one fresh copy from the source. Each `run_*`
//! method executes one protocol and returns its outcome together with the
//! [`Transcript`] of broadcasts, private values and derived outputs.

mod aeg;
mod notification;
mod parity;
mod pipeline;
mod session;
mod transcript;
mod veto;

use serde::{Deserialize, Serialize};

use crate::error::{check_odd_n, Error, Result};
use crate::random::{trial_stream, Randomness, TrialRng};
use crate::source::StateSource;

pub use aeg::{AegOutcome, AegPolicy};
pub use notification::{AuthenticationInputs, AuthenticationOutcome, NotificationOutcome};
pub use parity::{ParityOptions, ParityOutcome};
pub use pipeline::{TransmissionOutcome, TransmissionPolicy};
pub use transcript::{
    bits_to_string, AbortReason, AgentId, Entry, EntryKind, FinalOutput, ProtocolName, Transcript, Value,
};
pub use veto::{CollisionOutcome, VetoOutcome, VetoRound};

use session::Session;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub n: usize,
    /// Security parameter `S`.
    pub security: usize,
    pub rng_seed: u64,
}

impl NetworkConfig {
    pub fn new(n: usize, security: usize, rng_seed: u64) -> Result<Self> {
        check_odd_n(n)?;
        if security == 0 {
            return Err(Error::InvalidParameter("security parameter S must be at least 1".into()));
        }
        Ok(Self { n, security, rng_seed })
    }
}

enum Rng<'a> {
    Owned(TrialRng),
    Borrowed(&'a mut dyn Randomness),
}

/// `n` agents sharing a broadcast channel and a state source.
pub struct Network<'a> {
    cfg: NetworkConfig,
    source: &'a dyn StateSource,
    rng: Rng<'a>,
    recording: bool,
    copy_budget: Option<u64>,
}

impl<'a> Network<'a> {
    /// Randomness comes from stream 0 of `cfg.rng_seed`.
    pub fn new(cfg: NetworkConfig, source: &'a dyn StateSource) -> Result<Self> {
        Self::build(cfg, source, Rng::Owned(trial_stream(cfg.rng_seed, 0)))
    }

    /// Uses caller-supplied randomness; `cfg.rng_seed` is ignored.
    pub fn with_randomness(
        cfg: NetworkConfig,
        source: &'a dyn StateSource,
        rng: &'a mut dyn Randomness,
    ) -> Result<Self> {
        Self::build(cfg, source, Rng::Borrowed(rng))
    }

    fn build(cfg: NetworkConfig, source: &'a dyn StateSource, rng: Rng<'a>) -> Result<Self> {
        let cfg = NetworkConfig::new(cfg.n, cfg.security, cfg.rng_seed)?;
        if source.n_qubits() != cfg.n {
            return Err(Error::DimensionMismatch {
                left: cfg.n,
                right: source.n_qubits(),
            });
        }
        Ok(Self {
            cfg,
            source,
            rng,
            recording: true,
            copy_budget: None,
        })
    }

    /// Transcripts stay empty when recording is off; useful for bulk Monte Carlo.
    pub fn recording(mut self, on: bool) -> Self {
        self.recording = on;
        self
    }

    /// Limit on state copies per protocol run; exceeding it is [`Error::SourceExhausted`].
    pub fn copy_budget(mut self, budget: Option<u64>) -> Self {
        self.copy_budget = budget;
        self
    }

    pub fn config(&self) -> NetworkConfig {
        self.cfg
    }

    fn run<T>(
        &mut self,
        protocol: ProtocolName,
        body: impl FnOnce(&mut Session<'_>) -> Result<T>,
        summary: impl FnOnce(&T) -> (FinalOutput, Option<AbortReason>),
    ) -> Result<(T, Transcript)> {
        let rng: &mut dyn Randomness = match &mut self.rng {
            Rng::Owned(r) => r,
            Rng::Borrowed(r) => &mut **r,
        };
        let mut s = Session::new(
            self.cfg.n,
            self.cfg.security,
            self.source,
            rng,
            self.recording,
            self.copy_budget,
        );
        let out = body(&mut s)?;
        let (final_output, aborted) = summary(&out);
        let transcript = Transcript {
            protocol,
            entries: s.take_log(),
            final_output,
            aborted,
        };
        Ok((out, transcript))
    }

    pub fn run_parity(&mut self, inputs: &[u8], options: ParityOptions) -> Result<(ParityOutcome, Transcript)> {
        self.run(
            ProtocolName::Parity,
            |s| {
                let withhold = options.withhold.map(|a| s.check_agent(a)).transpose()?;
                parity::parity(s, "parity", inputs, withhold)
            },
            |o| (FinalOutput::Parity(o.y), None),
        )
    }

    pub fn run_logical_or(&mut self, inputs: &[u8]) -> Result<(VetoOutcome, Transcript)> {
        self.run(
            ProtocolName::LogicalOr,
            |s| veto::logical_or(s, "veto", inputs),
            |o| (FinalOutput::Veto(o.v), None),
        )
    }

    pub fn run_notification(
        &mut self,
        sender: AgentId,
        receiver: AgentId,
    ) -> Result<(NotificationOutcome, Transcript)> {
        self.run(
            ProtocolName::Notification,
            |s| notification::notification(s, sender, receiver),
            |o| (FinalOutput::Beliefs(bits_to_string(&o.beliefs)), None),
        )
    }

    /// Replays a recorded notification transcript.
    pub fn run_authentication(
        &mut self,
        notification: &Transcript,
        sender: AgentId,
        tolerance: u64,
    ) -> Result<(AuthenticationOutcome, Transcript)> {
        let replay = AuthenticationInputs::from_transcript(notification, sender)?;
        self.run_authentication_with(&replay, tolerance)
    }

    pub fn run_authentication_with(
        &mut self,
        replay: &AuthenticationInputs,
        tolerance: u64,
    ) -> Result<(AuthenticationOutcome, Transcript)> {
        self.run(
            ProtocolName::Authentication,
            |s| notification::authentication(s, replay, tolerance),
            |o| {
                (
                    FinalOutput::Authentication {
                        abort: o.abort,
                        mismatches: o.mismatches,
                    },
                    o.abort.then_some(AbortReason::Authentication),
                )
            },
        )
    }

    pub fn run_collision_detection(&mut self, wish_bits: &[u8]) -> Result<(CollisionOutcome, Transcript)> {
        self.run(
            ProtocolName::CollisionDetection,
            |s| veto::collision_detection(s, wish_bits),
            |o| (FinalOutput::Collision(o.v), None),
        )
    }

    pub fn run_aeg(
        &mut self,
        sender: AgentId,
        receiver: AgentId,
        policy: AegPolicy,
    ) -> Result<(AegOutcome, Transcript)> {
        self.run(
            ProtocolName::EntanglementGeneration,
            |s| aeg::entanglement_generation(s, sender, receiver, policy),
            aeg_summary,
        )
    }

    pub fn run_anonymous_transmission(
        &mut self,
        sender: AgentId,
        receiver: AgentId,
        policy: TransmissionPolicy,
    ) -> Result<(TransmissionOutcome, Transcript)> {
        self.run(
            ProtocolName::AnonymousTransmission,
            |s| pipeline::anonymous_transmission(s, sender, receiver, policy),
            |o| aeg_summary(&o.result),
        )
    }
}

fn aeg_summary(o: &AegOutcome) -> (FinalOutput, Option<AbortReason>) {
    match o {
        AegOutcome::Epr {
            fidelity,
            repetitions,
            ..
        } => (
            FinalOutput::Entanglement {
                fidelity: *fidelity,
                repetitions: *repetitions,
            },
            None,
        ),
        AegOutcome::Abort { reason, repetitions } => (
            FinalOutput::Aborted {
                repetitions: *repetitions,
            },
            Some(*reason),
        ),
    }
}
