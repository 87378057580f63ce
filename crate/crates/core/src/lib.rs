//! Simulation of GHZ-based anonymous communication on an n-agent quantum
//! network, together with exact and Monte Carlo checks of its certification
//! and security bounds.
//!
//! * [`qstate`]: dense pure-state simulator.
//! * [`bellcert`]: Bell-type operator, spectrum, local-realistic bound, self-test.
//! * [`protocols`]: parity, veto, notification, authentication, collision
//!   detection and anonymous entanglement generation.
//! * [`adversary`]: noisy sources, sender-guessing attacks, closed-form bounds.
//! * [`harness`]: seeded experiment runner behind the `ghzanon` CLI.

pub mod adversary;
pub mod bellcert;
pub mod error;
pub mod harness;
pub mod protocols;
pub mod qstate;
pub mod random;
pub mod source;

pub use error::{Error, Result};
pub use qstate::{Basis, GhzSign, MeasurementOutcome, Pauli, QuantumRegister};
pub use source::StateSource;
