use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::qstate::{Pauli, QuantumRegister};

/// Tensor product of single-qubit Paulis with an overall ±1 sign.
/// `letters[0]` acts on qubit 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    pub letters: Vec<Pauli>,
    pub sign: i8,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Self {
        Self { letters, sign: 1 }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Image of the basis state `|k>`: the string maps it to `phase * |k'>`.
    pub fn act_on_basis(&self, k: usize) -> (usize, Complex64) {
        let n = self.letters.len();
        let mut target = k;
        let mut phase = Complex64::new(self.sign as f64, 0.0);
        for (pos, letter) in self.letters.iter().enumerate() {
            let m = 1usize << (n - 1 - pos);
            let bit_set = k & m != 0;
            match letter {
                Pauli::I => {}
                Pauli::X => target ^= m,
                Pauli::Z => {
                    if bit_set {
                        phase = -phase;
                    }
                }
                Pauli::Y => {
                    target ^= m;
                    phase *= if bit_set {
                        Complex64::new(0.0, -1.0)
                    } else {
                        Complex64::new(0.0, 1.0)
                    };
                }
            }
        }
        (target, phase)
    }

    fn check(&self, reg: &QuantumRegister) -> Result<()> {
        if self.letters.len() != reg.n_qubits() {
            return Err(Error::DimensionMismatch {
                left: self.letters.len(),
                right: reg.n_qubits(),
            });
        }
        Ok(())
    }

    pub fn apply(&self, reg: &QuantumRegister) -> Result<QuantumRegister> {
        self.check(reg)?;
        let amps = reg.amplitudes();
        let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
        for (k, a) in amps.iter().enumerate() {
            let (t, phase) = self.act_on_basis(k);
            out[t] += phase * a;
        }
        QuantumRegister::from_amplitudes(out)
    }

    /// `<reg|P|reg>` (complex, for the caller to check the imaginary part).
    pub fn expectation(&self, reg: &QuantumRegister) -> Result<Complex64> {
        self.check(reg)?;
        let amps = reg.amplitudes();
        Ok(amps
            .iter()
            .enumerate()
            .map(|(k, a)| {
                let (t, phase) = self.act_on_basis(k);
                amps[t].conj() * phase * a
            })
            .sum())
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.sign < 0 { "-" } else { "+" })?;
        for l in &self.letters {
            write!(f, "{}", l.symbol())?;
        }
        Ok(())
    }
}
