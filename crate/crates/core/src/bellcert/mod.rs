//! Certification of the GHZ resource through the Bell-type operator
//! `O = X...X - Σᵢ X..Yᵢ Yᵢ₊₁..X` (indices cyclic, so term `n` pairs qubits `n` and `1`).
//!
//! The operator reaches `±(n+1)` only on `|ψₙ^±⟩`, while any local-realistic
//! assignment stays within `±(n-1)`. Everything here is exact linear algebra
//! except [`self_test`], which estimates `⟨O⟩` from sampled measurement rounds.

mod pauli;

pub use pauli::PauliString;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{check_odd_n, Error, Result};
use crate::qstate::{fidelity, ghz_state, Basis, GhzSign, Pauli, QuantumRegister, SPECTRAL_TOL};
use crate::random::Randomness;
use crate::source::{check_draw, StateSource};

/// Largest `n` for the dense eigendecomposition.
pub const MAX_SPECTRUM_N: usize = 11;
/// Largest `n` for the 2^(2n) local-realistic enumeration.
pub const MAX_LR_N: usize = 9;

/// Imaginary parts of expectation values above this are reported as errors.
const IMAG_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellTerm {
    pub coefficient: i8,
    pub string: PauliString,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellOperator {
    n: usize,
    terms: Vec<BellTerm>,
}

impl BellOperator {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Term 0 is the all-X string; term `i` carries Y on qubits `i` and `i+1`.
    pub fn terms(&self) -> &[BellTerm] {
        &self.terms
    }

    /// Dense matrix in the computational basis.
    pub fn matrix(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.n;
        let mut m = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
        for term in &self.terms {
            for k in 0..dim {
                let (t, phase) = term.string.act_on_basis(k);
                m[(t, k)] += phase * term.coefficient as f64;
            }
        }
        m
    }
}

impl fmt::Display for BellOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, term) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            let s = PauliString {
                letters: term.string.letters.clone(),
                sign: term.string.sign * term.coefficient,
            };
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

pub fn build_bell_operator(n: usize) -> Result<BellOperator> {
    check_odd_n(n)?;
    let mut terms = Vec::with_capacity(n + 1);
    terms.push(BellTerm {
        coefficient: 1,
        string: PauliString::new(vec![Pauli::X; n]),
    });
    for i in 0..n {
        let mut letters = vec![Pauli::X; n];
        letters[i] = Pauli::Y;
        letters[(i + 1) % n] = Pauli::Y;
        terms.push(BellTerm {
            coefficient: -1,
            string: PauliString::new(letters),
        });
    }
    Ok(BellOperator { n, terms })
}

/// Exact `⟨reg|O|reg⟩`.
pub fn expectation(op: &BellOperator, reg: &QuantumRegister) -> Result<f64> {
    let mut total = Complex64::new(0.0, 0.0);
    for term in &op.terms {
        total += term.string.expectation(reg)? * term.coefficient as f64;
    }
    if total.im.abs() > IMAG_TOL {
        return Err(Error::Numerical(format!(
            "Bell expectation has imaginary part {}",
            total.im
        )));
    }
    Ok(total.re)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Multiplicity {
    pub value: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub n: usize,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    pub multiplicities: Vec<Multiplicity>,
    pub on_lattice: bool,
    pub extremal_nondegenerate: bool,
    /// The smaller of the two fidelities (top eigenvector vs `ψ⁺`, bottom vs `ψ⁻`).
    pub extremal_eigenvector_fidelity_to_ghz: f64,
}

impl SpectrumReport {
    pub fn multiplicity_of(&self, value: f64) -> usize {
        self.multiplicities
            .iter()
            .find(|m| (m.value - value).abs() < 1e-6)
            .map_or(0, |m| m.count)
    }
}

/// The allowed eigenvalues `±[(n+1) - 4k]`, `k = 0..=⌊(n+1)/4⌋`.
pub fn lattice_values(n: usize) -> Vec<i64> {
    let top = n as i64 + 1;
    let mut out: Vec<i64> = (0..=top / 4)
        .flat_map(|k| [top - 4 * k, -(top - 4 * k)])
        .collect();
    out.sort_unstable_by(|a, b| b.cmp(a));
    out.dedup();
    out
}

pub fn on_lattice(n: usize, value: f64) -> bool {
    lattice_values(n)
        .iter()
        .any(|&v| (value - v as f64).abs() <= SPECTRAL_TOL)
}

/// Dense Hermitian eigendecomposition of `O`.
pub fn spectrum(op: &BellOperator) -> Result<SpectrumReport> {
    let n = op.n;
    if n > MAX_SPECTRUM_N {
        return Err(Error::TooLarge {
            n,
            limit: MAX_SPECTRUM_N,
            what: "dense eigendecomposition",
        });
    }
    let m = op.matrix();
    let dim = m.nrows();
    for i in 0..dim {
        for j in 0..=i {
            if (m[(i, j)] - m[(j, i)].conj()).norm() > 1e-12 {
                return Err(Error::Numerical(format!("operator not Hermitian at ({i}, {j})")));
            }
        }
    }
    // Every term carries an even number of Y's, so the matrix is real symmetric.
    if m.iter().any(|z| z.im.abs() > 1e-12) {
        return Err(Error::Numerical("operator matrix is not real".into()));
    }
    let real = m.map(|z| z.re);
    let eig = nalgebra::SymmetricEigen::new(real);

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();

    let mut multiplicities: Vec<Multiplicity> = Vec::new();
    let mut sums: Vec<f64> = Vec::new();
    for &v in &eigenvalues {
        match multiplicities.last_mut() {
            Some(last) if (last.value - v).abs() < 1e-6 => {
                last.count += 1;
                *sums.last_mut().unwrap() += v;
                last.value = sums.last().unwrap() / last.count as f64;
            }
            _ => {
                multiplicities.push(Multiplicity { value: v, count: 1 });
                sums.push(v);
            }
        }
    }

    let top = (n + 1) as f64;
    let first = multiplicities.first().expect("nonempty spectrum");
    let last = multiplicities.last().expect("nonempty spectrum");
    let extremal_nondegenerate = first.count == 1
        && last.count == 1
        && (first.value - top).abs() <= SPECTRAL_TOL
        && (last.value + top).abs() <= SPECTRAL_TOL;

    let column = |idx: usize| -> Result<QuantumRegister> {
        let v = eig.eigenvectors.column(idx);
        QuantumRegister::normalized(v.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    };
    let f_top = fidelity(&column(order[0])?, &ghz_state(n, GhzSign::Plus)?)?;
    let f_bottom = fidelity(&column(order[dim - 1])?, &ghz_state(n, GhzSign::Minus)?)?;

    Ok(SpectrumReport {
        n,
        on_lattice: eigenvalues.iter().all(|&v| on_lattice(n, v)),
        eigenvalues,
        multiplicities,
        extremal_nondegenerate,
        extremal_eigenvector_fidelity_to_ghz: f_top.min(f_bottom),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LrMax {
    pub max_value: i64,
    /// `(x_i, y_i)` for each agent, values in {+1, -1}.
    pub assignment: Vec<(i8, i8)>,
}

/// Brute-force maximum of `v(O)` over deterministic ±1 assignments to every
/// agent's X and Y observables.
pub fn lr_max(n: usize) -> Result<LrMax> {
    check_odd_n(n)?;
    if n > MAX_LR_N {
        return Err(Error::TooLarge {
            n,
            limit: MAX_LR_N,
            what: "local-realistic enumeration",
        });
    }
    // bit j of a mask set means the value of agent j+1 is -1
    let sign = |mask: u32| if mask.count_ones() % 2 == 0 { 1i64 } else { -1 };
    let mut best: Option<(i64, u32, u32)> = None;
    for xs in 0u32..(1 << n) {
        for ys in 0u32..(1 << n) {
            let mut v = sign(xs);
            for i in 0..n {
                let pair = (1u32 << i) | (1u32 << ((i + 1) % n));
                v -= sign((xs & !pair) | (ys & pair));
            }
            if best.map_or(true, |(b, _, _)| v > b) {
                best = Some((v, xs, ys));
            }
        }
    }
    let (max_value, xs, ys) = best.expect("nonempty enumeration");
    let val = |mask: u32, i: usize| if mask >> i & 1 == 1 { -1 } else { 1 };
    Ok(LrMax {
        max_value,
        assignment: (0..n).map(|i| (val(xs, i), val(ys, i))).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelfTestVerdict {
    pub estimate: f64,
    pub epsilon_hat: f64,
    pub stderr: f64,
    pub rounds_used: u64,
    pub accepted: bool,
    pub threshold: f64,
}

/// Statistical self-test: each round measures one fresh copy in the local
/// settings of a uniformly chosen term of `O` and records the coefficient
/// times the product of the ±1 outcomes. The estimate is `(n+1)` times the
/// mean record, and the source is accepted when `(n+1) - estimate <= threshold`.
pub fn self_test(
    source: &dyn StateSource,
    n: usize,
    rounds: u64,
    threshold: f64,
    rng: &mut dyn Randomness,
) -> Result<SelfTestVerdict> {
    let op = build_bell_operator(n)?;
    if rounds < (n + 1) as u64 {
        return Err(Error::InvalidParameter(format!(
            "self-test needs at least n+1 = {} rounds, got {rounds}",
            n + 1
        )));
    }
    if !(threshold > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "self-test threshold must be positive, got {threshold}"
        )));
    }
    let uniform = vec![1.0; n + 1];
    let mut sum: i64 = 0;
    for _ in 0..rounds {
        let state = source.draw(rng)?;
        check_draw(&state, n)?;
        let term = &op.terms[rng.choose(&uniform)];
        sum += term.coefficient as i64 * measure_term(&state, &term.string, rng)? as i64;
    }
    let mean = sum as f64 / rounds as f64;
    // records are ±1, so the sample variance follows from the mean
    let var = if rounds > 1 {
        (1.0 - mean * mean) * rounds as f64 / (rounds - 1) as f64
    } else {
        0.0
    };
    let scale = (n + 1) as f64;
    let estimate = scale * mean;
    let epsilon_hat = scale - estimate;
    Ok(SelfTestVerdict {
        estimate,
        epsilon_hat,
        stderr: scale * (var.max(0.0) / rounds as f64).sqrt(),
        rounds_used: rounds,
        accepted: epsilon_hat <= threshold,
        threshold,
    })
}

/// Measures every qubit in the basis named by its letter and returns the
/// product of the ±1 outcomes (sign of the string included).
fn measure_term(state: &QuantumRegister, string: &PauliString, rng: &mut dyn Randomness) -> Result<i8> {
    let pick = |want: Pauli| -> Vec<usize> {
        string
            .letters
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == want)
            .map(|(i, _)| i + 1)
            .collect()
    };
    let mut parity = 0u8;
    let mut current = state.clone();
    for (letter, basis) in [(Pauli::X, Basis::X), (Pauli::Y, Basis::Y), (Pauli::Z, Basis::Z)] {
        let qubits = pick(letter);
        if qubits.is_empty() {
            continue;
        }
        let (outcome, post) = crate::qstate::measure_basis(&current, &qubits, basis, rng)?;
        parity ^= outcome.parity();
        current = post;
    }
    Ok(if parity == 0 { string.sign } else { -string.sign })
}

/// Bounds on the fidelity deficit implied by an observed violation `(n+1) - ε`:
/// `(ε / (2(n-1)), ε / 4)`.
pub fn fidelity_deficit_bounds(epsilon: f64, n: usize) -> Result<(f64, f64)> {
    check_odd_n(n)?;
    let cap = 2.0 * (n + 1) as f64;
    if !(0.0..=cap).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in [0, {cap}], got {epsilon}"
        )));
    }
    Ok((epsilon / (2.0 * (n - 1) as f64), epsilon / 4.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::trial_stream;
    use crate::source::{FixedSource, IdealSource};

    #[test]
    fn three_agent_terms() {
        let op = build_bell_operator(3).unwrap();
        assert_eq!(op.to_string(), "+XXX -YYX -XYY -YXY");
    }

    #[test]
    fn last_term_wraps_around() {
        let op = build_bell_operator(5).unwrap();
        let last = &op.terms()[5];
        assert_eq!(last.coefficient, -1);
        assert_eq!(
            last.string.letters,
            vec![Pauli::Y, Pauli::X, Pauli::X, Pauli::X, Pauli::Y]
        );
        assert_eq!(op.terms().len(), 6);
    }

    #[test]
    fn even_n_rejected() {
        assert_eq!(build_bell_operator(2), Err(Error::OddAgentCount(2)));
        assert!(lr_max(4).is_err());
    }

    #[test]
    fn ghz_expectations() {
        for (n, want) in [(3, 4.0), (5, 6.0), (7, 8.0)] {
            let op = build_bell_operator(n).unwrap();
            let plus = ghz_state(n, GhzSign::Plus).unwrap();
            let minus = ghz_state(n, GhzSign::Minus).unwrap();
            assert!((expectation(&op, &plus).unwrap() - want).abs() < 1e-10);
            assert!((expectation(&op, &minus).unwrap() + want).abs() < 1e-10);
        }
    }

    #[test]
    fn expectation_dimension_mismatch() {
        let op = build_bell_operator(3).unwrap();
        let five = ghz_state(5, GhzSign::Plus).unwrap();
        assert!(matches!(
            expectation(&op, &five),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn stabilizer_relations() {
        for n in [3, 5, 7] {
            let op = build_bell_operator(n).unwrap();
            let plus = ghz_state(n, GhzSign::Plus).unwrap();
            for (i, term) in op.terms().iter().enumerate() {
                let e = term.string.expectation(&plus).unwrap();
                let want = if i == 0 { 1.0 } else { -1.0 };
                assert!((e.re - want).abs() < 1e-10 && e.im.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn matrix_is_hermitian() {
        let m = build_bell_operator(5).unwrap().matrix();
        assert!((&m - m.adjoint()).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn lattice_for_small_n() {
        assert_eq!(lattice_values(3), vec![4, 0, -4]);
        assert_eq!(lattice_values(5), vec![6, 2, -2, -6]);
        assert_eq!(lattice_values(7), vec![8, 4, 0, -4, -8]);
    }

    #[test]
    fn spectrum_too_large() {
        let op = build_bell_operator(13).unwrap();
        assert!(matches!(spectrum(&op), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn lr_values() {
        assert_eq!(lr_max(3).unwrap().max_value, 2);
        assert_eq!(lr_max(5).unwrap().max_value, 4);
        assert!(matches!(lr_max(11), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn lr_witness_reproduces_value() {
        let lr = lr_max(5).unwrap();
        let x: Vec<i64> = lr.assignment.iter().map(|p| p.0 as i64).collect();
        let y: Vec<i64> = lr.assignment.iter().map(|p| p.1 as i64).collect();
        let n = 5;
        let mut v: i64 = x.iter().product();
        for i in 0..n {
            let j = (i + 1) % n;
            let mut t = y[i] * y[j];
            for (k, xk) in x.iter().enumerate() {
                if k != i && k != j {
                    t *= xk;
                }
            }
            v -= t;
        }
        assert_eq!(v, lr.max_value);
    }

    #[test]
    fn self_test_ideal_source_is_exact() {
        let src = IdealSource::new(5).unwrap();
        let mut rng = trial_stream(3, 0);
        let v = self_test(&src, 5, 600, 0.1, &mut rng).unwrap();
        assert_eq!(v.estimate, 6.0);
        assert_eq!(v.epsilon_hat, 0.0);
        assert!(v.accepted);
    }

    #[test]
    fn self_test_product_state_is_rejected() {
        let zero = QuantumRegister::basis_state(3, 0).unwrap();
        let src = FixedSource::new(zero);
        let mut rng = trial_stream(3, 1);
        let v = self_test(&src, 3, 40_000, 1.0, &mut rng).unwrap();
        assert!(v.estimate.abs() < 5.0 * v.stderr.max(1e-3));
        assert!(!v.accepted);
    }

    #[test]
    fn self_test_preconditions() {
        let src = IdealSource::new(3).unwrap();
        let mut rng = trial_stream(0, 0);
        assert!(self_test(&src, 3, 0, 0.1, &mut rng).is_err());
        assert!(self_test(&src, 3, 100, 0.0, &mut rng).is_err());
        assert!(matches!(
            self_test(&src, 5, 100, 0.1, &mut rng),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn deficit_bounds() {
        let (lo, hi) = fidelity_deficit_bounds(0.4, 3).unwrap();
        assert!((lo - 0.1).abs() < 1e-15 && (hi - 0.1).abs() < 1e-15);
        assert_eq!(fidelity_deficit_bounds(0.0, 7).unwrap(), (0.0, 0.0));
        let (lo, hi) = fidelity_deficit_bounds(0.8, 5).unwrap();
        assert!((lo - 0.1).abs() < 1e-15 && (hi - 0.2).abs() < 1e-15);
        assert!(fidelity_deficit_bounds(-0.1, 5).is_err());
    }
}
