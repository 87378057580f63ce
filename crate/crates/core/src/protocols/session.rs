use crate::error::{Error, Result};
use crate::qstate::QuantumRegister;
use crate::random::Randomness;
use crate::source::{check_draw, StateSource};

use super::transcript::{AgentId, Entry, EntryKind, Value};

/// Execution context shared by nested sub-protocols: the resource source, the
/// injected randomness and the running log.
pub(crate) struct Session<'a> {
    pub n: usize,
    pub security: usize,
    source: &'a dyn StateSource,
    pub rng: &'a mut dyn Randomness,
    log: Option<Vec<Entry>>,
    seq: u64,
    copies_used: u64,
    copy_budget: Option<u64>,
}

impl<'a> Session<'a> {
    pub fn new(
        n: usize,
        security: usize,
        source: &'a dyn StateSource,
        rng: &'a mut dyn Randomness,
        recording: bool,
        copy_budget: Option<u64>,
    ) -> Self {
        Self {
            n,
            security,
            source,
            rng,
            log: recording.then(Vec::new),
            seq: 0,
            copies_used: 0,
            copy_budget,
        }
    }

    /// One fresh resource copy.
    pub fn draw(&mut self) -> Result<QuantumRegister> {
        if self.copy_budget.is_some_and(|b| self.copies_used >= b) {
            return Err(Error::SourceExhausted);
        }
        self.copies_used += 1;
        let state = self.source.draw(self.rng)?;
        check_draw(&state, self.n)?;
        Ok(state)
    }

    /// Appends a log entry; `name` is only evaluated when recording.
    pub fn record(
        &mut self,
        agent: Option<usize>,
        kind: EntryKind,
        name: impl FnOnce() -> String,
        value: impl FnOnce() -> Value,
    ) {
        if let Some(log) = self.log.as_mut() {
            self.seq += 1;
            log.push(Entry {
                seq: self.seq,
                agent: agent.map(AgentId),
                kind,
                name: name(),
                value: value(),
            });
        }
    }

    pub fn take_log(&mut self) -> Vec<Entry> {
        self.log.take().unwrap_or_default()
    }

    pub fn check_agent(&self, agent: AgentId) -> Result<usize> {
        if agent.0 == 0 || agent.0 > self.n {
            return Err(Error::InvalidParameter(format!(
                "agent {} out of range 1..={}",
                agent.0, self.n
            )));
        }
        Ok(agent.0)
    }

    pub fn check_bits(&self, bits: &[u8], what: &str) -> Result<()> {
        if bits.len() != self.n {
            return Err(Error::InvalidParameter(format!(
                "{what}: expected {} bits, got {}",
                self.n,
                bits.len()
            )));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidParameter(format!("{what}: values must be 0 or 1")));
        }
        Ok(())
    }
}
