//! Dense pure-state simulator.
//!
//! Basis ordering: qubit 1 is the most significant bit of the amplitude index,
//! so amplitude `k` belongs to `|b_1 b_2 ... b_n>` where `k = b_1 b_2 ... b_n` in
//! binary. Qubits are addressed 1-based, matching agent numbering.
//!
//! Measurement outcomes are bits: eigenvalue +1 is recorded as 0 and -1 as 1.
//! Mixed states never appear here; noisy resources are classical mixtures of
//! registers drawn by a [`crate::source::StateSource`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{check_odd_n, Error, Result};
use crate::random::Randomness;

/// Tolerance for algebraic identities (norms, Pauli involutions).
pub const ALGEBRA_TOL: f64 = 1e-12;
/// Tolerance for eigenvalue and Born-probability comparisons.
pub const SPECTRAL_TOL: f64 = 1e-9;
/// Largest register the dense engine accepts.
pub const MAX_QUBITS: usize = 14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Local measurement basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    X,
    Y,
    Z,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GhzSign {
    Plus,
    Minus,
}

/// Result of measuring a set of qubits; `bits[i]` belongs to `qubits[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MeasurementOutcome {
    pub qubits: Vec<usize>,
    pub bits: Vec<u8>,
}

impl MeasurementOutcome {
    pub fn parity(&self) -> u8 {
        self.bits.iter().fold(0, |acc, b| acc ^ b)
    }

    pub fn bit_of(&self, qubit: usize) -> Option<u8> {
        self.qubits
            .iter()
            .position(|&q| q == qubit)
            .map(|i| self.bits[i])
    }
}

/// Pure state of `n >= 2` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumRegister {
    n: usize,
    amps: Vec<Complex64>,
}

impl QuantumRegister {
    /// Wraps a normalized amplitude vector of length `2^n`.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let reg = Self::unchecked(amps)?;
        let norm = reg.norm_sqr();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized(norm));
        }
        Ok(reg)
    }

    /// Like [`Self::from_amplitudes`] but rescales to unit norm first.
    pub fn normalized(amps: Vec<Complex64>) -> Result<Self> {
        let mut reg = Self::unchecked(amps)?;
        let norm = reg.norm_sqr();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        let scale = 1.0 / norm.sqrt();
        reg.amps.iter_mut().for_each(|a| *a *= scale);
        Ok(reg)
    }

    fn unchecked(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 4 || !len.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "amplitude vector length {len} is not 2^n with n >= 2"
            )));
        }
        let n = len.trailing_zeros() as usize;
        if n > MAX_QUBITS {
            return Err(Error::TooLarge {
                n,
                limit: MAX_QUBITS,
                what: "dense state vectors",
            });
        }
        Ok(Self { n, amps })
    }

    /// Computational basis state `|index>`.
    pub fn basis_state(n: usize, index: usize) -> Result<Self> {
        if !(2..=MAX_QUBITS).contains(&n) {
            return Err(Error::InvalidParameter(format!(
                "register size {n} outside 2..={MAX_QUBITS}"
            )));
        }
        if index >= 1 << n {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} out of range for {n} qubits"
            )));
        }
        let mut amps = vec![ZERO; 1 << n];
        amps[index] = ONE;
        Ok(Self { n, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_same_size(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    fn check_same_size(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    pub(crate) fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit == 0 || qubit > self.n {
            return Err(Error::QubitOutOfRange {
                index: qubit,
                n: self.n,
            });
        }
        Ok(())
    }

    fn mask(&self, qubit: usize) -> usize {
        1 << (self.n - qubit)
    }

    /// Applies a single-qubit Pauli in place.
    pub fn apply_pauli_mut(&mut self, qubit: usize, letter: Pauli) -> Result<()> {
        self.check_qubit(qubit)?;
        let m = self.mask(qubit);
        match letter {
            Pauli::I => {}
            Pauli::Z => {
                for (k, a) in self.amps.iter_mut().enumerate() {
                    if k & m != 0 {
                        *a = -*a;
                    }
                }
            }
            Pauli::X => {
                for k in 0..self.amps.len() {
                    if k & m == 0 {
                        self.amps.swap(k, k | m);
                    }
                }
            }
            Pauli::Y => {
                // Y|0> = i|1>, Y|1> = -i|0>
                for k in 0..self.amps.len() {
                    if k & m == 0 {
                        let a0 = self.amps[k];
                        let a1 = self.amps[k | m];
                        self.amps[k] = -I * a1;
                        self.amps[k | m] = I * a0;
                    }
                }
            }
        }
        Ok(())
    }

    /// Applies the 2x2 unitary `[[u00, u01], [u10, u11]]` to `qubit`.
    fn apply_single(&mut self, qubit: usize, u: [[Complex64; 2]; 2]) {
        let m = self.mask(qubit);
        for k in 0..self.amps.len() {
            if k & m == 0 {
                let a0 = self.amps[k];
                let a1 = self.amps[k | m];
                self.amps[k] = u[0][0] * a0 + u[0][1] * a1;
                self.amps[k | m] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
    }

    /// Maps the `basis` eigenstates of `qubit` onto |0>, |1> (or back, if `inverse`).
    fn rotate_to_z(&mut self, qubit: usize, basis: Basis, inverse: bool) {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let u = match (basis, inverse) {
            (Basis::Z, _) => return,
            (Basis::X, _) => [[h, h], [h, -h]],
            // H S^dagger and its inverse S H
            (Basis::Y, false) => [[h, -I * h], [h, I * h]],
            (Basis::Y, true) => [[h, h], [I * h, -I * h]],
        };
        self.apply_single(qubit, u);
    }

    fn check_qubit_set(&self, qubits: &[usize]) -> Result<()> {
        if qubits.is_empty() {
            return Err(Error::EmptyQubitSet);
        }
        for (i, &q) in qubits.iter().enumerate() {
            self.check_qubit(q)?;
            if qubits[..i].contains(&q) {
                return Err(Error::DuplicateQubit(q));
            }
        }
        Ok(())
    }

    /// Outcome pattern of `qubits` encoded in basis index `k` (first listed qubit is the MSB).
    fn pattern(&self, k: usize, qubits: &[usize]) -> usize {
        qubits
            .iter()
            .fold(0, |acc, &q| (acc << 1) | usize::from(k & self.mask(q) != 0))
    }

    /// Born distribution over joint outcomes of `qubits` measured in `basis`.
    ///
    /// Entry `p` is the probability of the bit pattern `p`, with the first listed
    /// qubit as most significant bit.
    pub fn outcome_distribution(&self, qubits: &[usize], basis: Basis) -> Result<Vec<f64>> {
        self.check_qubit_set(qubits)?;
        let mut rotated = self.clone();
        for &q in qubits {
            rotated.rotate_to_z(q, basis, false);
        }
        let mut probs = vec![0.0; 1 << qubits.len()];
        for (k, a) in rotated.amps.iter().enumerate() {
            probs[rotated.pattern(k, qubits)] += a.norm_sqr();
        }
        Ok(probs)
    }

    /// Post-measurement state after observing `bits` on `qubits` in `basis`.
    pub fn collapse(&self, qubits: &[usize], basis: Basis, bits: &[u8]) -> Result<Self> {
        self.check_qubit_set(qubits)?;
        if bits.len() != qubits.len() {
            return Err(Error::InvalidParameter(format!(
                "{} bits given for {} qubits",
                bits.len(),
                qubits.len()
            )));
        }
        let want = bits.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b & 1));
        let mut rotated = self.clone();
        for &q in qubits {
            rotated.rotate_to_z(q, basis, false);
        }
        for k in 0..rotated.amps.len() {
            if rotated.pattern(k, qubits) != want {
                rotated.amps[k] = ZERO;
            }
        }
        let norm = rotated.norm_sqr();
        if norm <= 0.0 {
            return Err(Error::Numerical(
                "collapse onto an outcome of probability zero".into(),
            ));
        }
        let scale = 1.0 / norm.sqrt();
        rotated.amps.iter_mut().for_each(|a| *a *= scale);
        for &q in qubits {
            rotated.rotate_to_z(q, basis, true);
        }
        Ok(rotated)
    }

    /// Contracts `qubit` against the `basis` eigenstate labelled `bit`, returning
    /// the unnormalized-then-renormalized state of the remaining qubits in
    /// ascending order. Exact when `qubit` was already measured with that outcome.
    pub fn discard_measured(&self, qubit: usize, basis: Basis, bit: u8) -> Result<Self> {
        self.check_qubit(qubit)?;
        if self.n <= 2 {
            return Err(Error::InvalidParameter(
                "cannot reduce a register below two qubits".into(),
            ));
        }
        let mut rotated = self.clone();
        rotated.rotate_to_z(qubit, basis, false);
        let m = rotated.mask(qubit);
        let low = m - 1;
        let amps: Vec<Complex64> = (0..1usize << (self.n - 1))
            .map(|j| {
                let k = ((j & !low) << 1) | (j & low) | if bit & 1 == 1 { m } else { 0 };
                rotated.amps[k]
            })
            .collect();
        Self::normalized(amps)
    }
}

/// `(|0...0> ± |1...1>)/√2` on `n` qubits; `n` must be odd and at least 3.
pub fn ghz_state(n: usize, sign: GhzSign) -> Result<QuantumRegister> {
    check_odd_n(n)?;
    if n > MAX_QUBITS {
        return Err(Error::TooLarge {
            n,
            limit: MAX_QUBITS,
            what: "dense state vectors",
        });
    }
    let mut amps = vec![ZERO; 1 << n];
    amps[0] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    amps[(1 << n) - 1] = match sign {
        GhzSign::Plus => Complex64::new(FRAC_1_SQRT_2, 0.0),
        GhzSign::Minus => Complex64::new(-FRAC_1_SQRT_2, 0.0),
    };
    Ok(QuantumRegister { n, amps })
}

/// `(|00> + |11>)/√2`.
pub fn phi_plus() -> QuantumRegister {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    QuantumRegister {
        n: 2,
        amps: vec![h, ZERO, ZERO, h],
    }
}

pub fn apply_pauli(reg: &QuantumRegister, qubit: usize, letter: Pauli) -> Result<QuantumRegister> {
    let mut out = reg.clone();
    out.apply_pauli_mut(qubit, letter)?;
    Ok(out)
}

/// Samples a joint outcome of `qubits` in `basis` and returns it with the
/// collapsed register.
pub fn measure_basis(
    reg: &QuantumRegister,
    qubits: &[usize],
    basis: Basis,
    rng: &mut dyn Randomness,
) -> Result<(MeasurementOutcome, QuantumRegister)> {
    let probs = reg.outcome_distribution(qubits, basis)?;
    let pattern = rng.choose(&probs);
    let k = qubits.len();
    let bits: Vec<u8> = (0..k).map(|i| ((pattern >> (k - 1 - i)) & 1) as u8).collect();
    let collapsed = reg.collapse(qubits, basis, &bits)?;
    Ok((
        MeasurementOutcome {
            qubits: qubits.to_vec(),
            bits,
        },
        collapsed,
    ))
}

/// `|<a|b>|`.
pub fn fidelity(a: &QuantumRegister, b: &QuantumRegister) -> Result<f64> {
    Ok(a.inner(b)?.norm().min(1.0))
}

/// Trace distance of two pure states, `sqrt(1 - F^2)`.
pub fn trace_distance_pure(a: &QuantumRegister, b: &QuantumRegister) -> Result<f64> {
    let f = fidelity(a, b)?;
    Ok((1.0 - f * f).max(0.0).sqrt())
}
