//! Suppliers of n-qubit resource states.

use crate::error::{check_odd_n, Error, Result};
use crate::qstate::{ghz_state, GhzSign, QuantumRegister};
use crate::random::Randomness;

/// A (possibly noisy, possibly untrusted) source of resource states. Each call to
/// [`StateSource::draw`] hands out one fresh copy.
pub trait StateSource: Sync {
    fn n_qubits(&self) -> usize;
    fn draw(&self, rng: &mut dyn Randomness) -> Result<QuantumRegister>;
}

/// Always emits `|ψₙ⁺⟩`.
#[derive(Clone, Debug)]
pub struct IdealSource {
    ghz: QuantumRegister,
}

impl IdealSource {
    pub fn new(n: usize) -> Result<Self> {
        check_odd_n(n)?;
        Ok(Self {
            ghz: ghz_state(n, GhzSign::Plus)?,
        })
    }
}

impl StateSource for IdealSource {
    fn n_qubits(&self) -> usize {
        self.ghz.n_qubits()
    }

    fn draw(&self, _rng: &mut dyn Randomness) -> Result<QuantumRegister> {
        Ok(self.ghz.clone())
    }
}

/// Always emits the same (arbitrary) state.
#[derive(Clone, Debug)]
pub struct FixedSource {
    state: QuantumRegister,
}

impl FixedSource {
    pub fn new(state: QuantumRegister) -> Self {
        Self { state }
    }
}

impl StateSource for FixedSource {
    fn n_qubits(&self) -> usize {
        self.state.n_qubits()
    }

    fn draw(&self, _rng: &mut dyn Randomness) -> Result<QuantumRegister> {
        Ok(self.state.clone())
    }
}

pub(crate) fn check_draw(state: &QuantumRegister, n: usize) -> Result<()> {
    if state.n_qubits() != n {
        return Err(Error::DimensionMismatch {
            left: n,
            right: state.n_qubits(),
        });
    }
    Ok(())
}
