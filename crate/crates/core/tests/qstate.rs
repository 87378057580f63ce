use num_complex::Complex64;
use proptest::prelude::*;

use ghzanon::qstate::{
    apply_pauli, fidelity, ghz_state, measure_basis, trace_distance_pure, Basis, GhzSign, Pauli, QuantumRegister,
};
use ghzanon::random::{enumerate_executions, trial_stream};

fn register(n: usize) -> impl Strategy<Value = QuantumRegister> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n)
        .prop_filter("nonzero", |v| v.iter().any(|(re, im)| re.abs() + im.abs() > 1e-3))
        .prop_map(|v| QuantumRegister::normalized(v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect()).unwrap())
}

fn any_register() -> impl Strategy<Value = QuantumRegister> {
    prop_oneof![register(2), register(3), register(5)]
}

fn pauli() -> impl Strategy<Value = Pauli> {
    prop_oneof![Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)]
}

fn basis() -> impl Strategy<Value = Basis> {
    prop_oneof![Just(Basis::X), Just(Basis::Y), Just(Basis::Z)]
}

fn close(a: &QuantumRegister, b: &QuantumRegister, tol: f64) -> bool {
    a.amplitudes().iter().zip(b.amplitudes()).all(|(x, y)| (x - y).norm() <= tol)
}

proptest! {
    #[test]
    fn paulis_preserve_norm(reg in any_register(), ops in prop::collection::vec((0usize..5, pauli()), 0..20)) {
        let n = reg.n_qubits();
        let mut state = reg;
        for (q, p) in ops {
            state.apply_pauli_mut(q % n + 1, p).unwrap();
            prop_assert!((state.norm_sqr() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn paulis_are_involutions(reg in any_register(), q in 0usize..5, p in pauli()) {
        let q = q % reg.n_qubits() + 1;
        let twice = apply_pauli(&apply_pauli(&reg, q, p).unwrap(), q, p).unwrap();
        prop_assert!(close(&twice, &reg, 1e-12));
    }

    #[test]
    fn born_probabilities_sum_to_one(reg in any_register(), mask in 1usize..32, b in basis()) {
        let n = reg.n_qubits();
        let qubits: Vec<usize> = (1..=n).filter(|q| mask >> (q - 1) & 1 == 1).collect();
        prop_assume!(!qubits.is_empty());
        let probs = reg.outcome_distribution(&qubits, b).unwrap();
        prop_assert_eq!(probs.len(), 1 << qubits.len());
        prop_assert!(probs.iter().all(|&p| p >= -1e-15));
        prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn repeated_measurement_is_repeatable(reg in register(3), q in 1usize..=3, b in basis(), seed in any::<u64>()) {
        let mut rng = trial_stream(seed, 0);
        let (first, post) = measure_basis(&reg, &[q], b, &mut rng).unwrap();
        prop_assert!((post.norm_sqr() - 1.0).abs() <= 1e-12);
        let probs = post.outcome_distribution(&[q], b).unwrap();
        prop_assert!((probs[first.bits[0] as usize] - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn trace_distance_matches_fidelity(a in register(3), b in register(3)) {
        let f = fidelity(&a, &b).unwrap();
        let d = trace_distance_pure(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!((d - (1.0 - f * f).max(0.0).sqrt()).abs() <= 1e-10);
    }
}

#[test]
fn ghz_amplitude_examples() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = ghz_state(3, GhzSign::Plus).unwrap();
    let minus = ghz_state(3, GhzSign::Minus).unwrap();
    assert!((plus.amplitudes()[0].re - h).abs() < 1e-15 && (plus.amplitudes()[7].re - h).abs() < 1e-15);
    assert!((minus.amplitudes()[7].re + h).abs() < 1e-15);
    assert!(plus.amplitudes()[1..7].iter().all(|a| a.norm() == 0.0));
    assert!(ghz_state(4, GhzSign::Plus).is_err());
}

#[test]
fn pauli_examples() {
    let plus = ghz_state(3, GhzSign::Plus).unwrap();
    let minus = ghz_state(3, GhzSign::Minus).unwrap();
    assert!(close(&apply_pauli(&plus, 1, Pauli::Z).unwrap(), &minus, 1e-15));
    assert!(close(&apply_pauli(&minus, 2, Pauli::Z).unwrap(), &plus, 1e-15));
    let mut all_x = plus.clone();
    for q in 1..=3 {
        all_x.apply_pauli_mut(q, Pauli::X).unwrap();
    }
    assert!(close(&all_x, &plus, 1e-15));
    assert!((fidelity(&plus, &all_x).unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn fidelity_and_distance_examples() {
    let plus = ghz_state(3, GhzSign::Plus).unwrap();
    let minus = ghz_state(3, GhzSign::Minus).unwrap();
    assert!((fidelity(&plus, &plus).unwrap() - 1.0).abs() < 1e-15);
    assert!(fidelity(&plus, &minus).unwrap().abs() < 1e-15);
    assert!((trace_distance_pure(&plus, &minus).unwrap() - 1.0).abs() < 1e-15);
    assert!(trace_distance_pure(&plus, &plus).unwrap().abs() < 1e-7);
    // overlap 0.8 between |00> and 0.8|00> + 0.6|01>
    let a = QuantumRegister::basis_state(2, 0).unwrap();
    let z = Complex64::new(0.0, 0.0);
    let b = QuantumRegister::from_amplitudes(vec![Complex64::new(0.8, 0.0), Complex64::new(0.6, 0.0), z, z]).unwrap();
    assert!((trace_distance_pure(&a, &b).unwrap() - 0.6).abs() < 1e-12);
}

/// The XOR of all X outcomes is fixed on both GHZ states, by exhaustive Born enumeration.
#[test]
fn ghz_x_parity_law() {
    for n in [3, 5] {
        for (sign, want) in [(GhzSign::Plus, 0u8), (GhzSign::Minus, 1)] {
            let state = ghz_state(n, sign).unwrap();
            let all: Vec<usize> = (1..=n).collect();
            let leaves = enumerate_executions(|rng| measure_basis(&state, &all, Basis::X, rng).unwrap().0.parity());
            assert_eq!(leaves.len(), 1 << (n - 1));
            assert!((leaves.iter().map(|(p, _)| p).sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(leaves.iter().all(|(_, y)| *y == want));
        }
    }
}

#[test]
fn sequential_measurement_matches_joint_parity() {
    let state = ghz_state(3, GhzSign::Plus).unwrap();
    let leaves = enumerate_executions(|rng| {
        let (a, post) = measure_basis(&state, &[1], Basis::X, rng).unwrap();
        let (b, _) = measure_basis(&post, &[2, 3], Basis::X, rng).unwrap();
        a.parity() ^ b.parity()
    });
    assert_eq!(leaves.len(), 4);
    assert!(leaves.iter().all(|(_, y)| *y == 0));
}
