use std::collections::HashMap;

use proptest::prelude::*;

use ghzanon::adversary::{make_noisy_source, JunkKind, NoiseSpec};
use ghzanon::protocols::{
    AbortReason, AegOutcome, AegPolicy, AgentId, AuthenticationInputs, EntryKind, Network, NetworkConfig,
    ParityOptions, Transcript, TransmissionPolicy, Value,
};
use ghzanon::random::{enumerate_executions, trial_stream, Randomness};
use ghzanon::source::{IdealSource, StateSource};
use ghzanon::Error;

fn cfg(n: usize, s: usize) -> NetworkConfig {
    NetworkConfig::new(n, s, 0).unwrap()
}

fn exact<T: Eq + std::hash::Hash>(
    src: &dyn StateSource,
    config: NetworkConfig,
    run: impl Fn(&mut Network<'_>) -> T,
) -> HashMap<T, f64> {
    let mut dist = HashMap::new();
    for (p, v) in enumerate_executions(|rng| run(&mut Network::with_randomness(config, src, rng).unwrap())) {
        *dist.entry(v).or_insert(0.0) += p;
    }
    dist
}

fn total_variation<T: Eq + std::hash::Hash>(a: &HashMap<T, f64>, b: &HashMap<T, f64>) -> f64 {
    let mut tv = 0.0;
    for (k, p) in a {
        tv += (p - b.get(k).unwrap_or(&0.0)).abs();
    }
    for (k, p) in b {
        if !a.contains_key(k) {
            tv += p;
        }
    }
    tv / 2.0
}

#[test]
fn parity_examples() {
    let cases: [(&[u8], u8); 3] = [(&[0, 0, 0], 0), (&[1, 0, 0], 1), (&[1, 1, 0, 0, 0], 0)];
    for (inputs, want) in cases {
        let src = IdealSource::new(inputs.len()).unwrap();
        let dist = exact(&src, cfg(inputs.len(), 1), |net| {
            net.run_parity(inputs, ParityOptions::default()).unwrap().0.y
        });
        assert_eq!(dist.len(), 1);
        assert!((dist[&want] - 1.0).abs() < 1e-12);
    }
}

#[test]
fn parity_rejects_bad_inputs() {
    let src = IdealSource::new(3).unwrap();
    let mut net = Network::new(cfg(3, 1), &src).unwrap();
    assert!(net.run_parity(&[0, 1], ParityOptions::default()).is_err());
    assert!(net.run_parity(&[0, 2, 0], ParityOptions::default()).is_err());
    assert!(NetworkConfig::new(4, 1, 0).is_err());
    assert!(NetworkConfig::new(5, 0, 0).is_err());
    let five = IdealSource::new(5).unwrap();
    assert!(matches!(
        Network::new(cfg(3, 1), &five),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn logical_or_of_zeros_is_zero() {
    let src = IdealSource::new(3).unwrap();
    let dist = exact(&src, cfg(3, 3), |net| net.run_logical_or(&[0, 0, 0]).unwrap().0.v);
    assert!((dist[&0] - 1.0).abs() < 1e-12);
}

#[test]
fn logical_or_exact_success() {
    let src = IdealSource::new(3).unwrap();
    for (inputs, s) in [([1u8, 0, 0], 3usize), ([1, 1, 0], 2), ([1, 1, 1], 2)] {
        let dist = exact(&src, cfg(3, s), |net| net.run_logical_or(&inputs).unwrap().0.v);
        let want = 1.0 - 0.5f64.powi(s as i32);
        assert!((dist[&1] - want).abs() < 1e-12, "{inputs:?}: {}", dist[&1]);
    }
}

/// `Pr[V = 0] = 2^-S`; a collision is missed only when an odd number of wishers
/// all draw identical coins in every round.
fn collision_closed_form(m: usize, s: usize) -> [f64; 3] {
    if m == 0 {
        return [1.0, 0.0, 0.0];
    }
    let quiet = 0.5f64.powi(s as i32);
    let missed = if m % 2 == 1 {
        (2f64.powi(s as i32) - 1.0) * 0.5f64.powi((m * s) as i32)
    } else {
        0.0
    };
    let two = (1.0 - quiet) * (1.0 - quiet - missed);
    [quiet, 1.0 - quiet - two, two]
}

#[test]
fn collision_distribution_by_enumeration() {
    let src = IdealSource::new(3).unwrap();
    for (wishes, s) in [
        ([0u8, 0, 0], 2usize),
        ([1, 0, 0], 2),
        ([0, 1, 0], 1),
        ([1, 1, 0], 1),
        ([1, 0, 1], 2),
        ([1, 1, 1], 1),
    ] {
        let m = wishes.iter().filter(|&&w| w == 1).count();
        let dist = exact(&src, cfg(3, s), |net| net.run_collision_detection(&wishes).unwrap().0.v);
        let want = collision_closed_form(m, s);
        for v in 0..3u8 {
            let got = dist.get(&v).copied().unwrap_or(0.0);
            assert!((got - want[v as usize]).abs() < 1e-12, "{wishes:?} S={s} V={v}: {got} vs {}", want[v as usize]);
        }
    }
}

#[test]
fn lone_wisher_never_reports_collision() {
    let src = IdealSource::new(5).unwrap();
    for seed in 0..200 {
        let mut rng = trial_stream(seed, 0);
        let mut net = Network::with_randomness(cfg(5, 4), &src, &mut rng).unwrap().recording(false);
        let (o, _) = net.run_collision_detection(&[0, 0, 1, 0, 0]).unwrap();
        assert_ne!(o.v, 2);
        assert!(o.detections.iter().all(|&b| b == 0));
    }
}

#[test]
fn notification_on_ideal_source() {
    let src = IdealSource::new(3).unwrap();
    let dist = exact(&src, cfg(3, 2), |net| {
        net.run_notification(AgentId(1), AgentId(3)).unwrap().0.beliefs
    });
    let mut receiver_told = 0.0;
    for (beliefs, p) in &dist {
        assert!(beliefs[..2].iter().all(|&b| b == 0), "{beliefs:?}");
        receiver_told += p * f64::from(beliefs[2]);
    }
    assert!((receiver_told - 0.75).abs() < 1e-12, "{receiver_told}");
    let mut net = Network::new(cfg(3, 2), &src).unwrap();
    assert!(net.run_notification(AgentId(3), AgentId(3)).is_err());
    assert!(net.run_notification(AgentId(0), AgentId(3)).is_err());
}

#[test]
fn authentication_replay_and_tampering() {
    let src = IdealSource::new(5).unwrap();
    for seed in 0..50 {
        let mut rng = trial_stream(seed, 0);
        let mut net = Network::with_randomness(cfg(5, 4), &src, &mut rng).unwrap();
        let (_, transcript) = net.run_notification(AgentId(1), AgentId(3)).unwrap();
        let (honest, _) = net.run_authentication(&transcript, AgentId(1), 0).unwrap();
        assert!(!honest.abort);
        assert_eq!(honest.mismatches, 0);

        let mut forged = AuthenticationInputs::from_transcript(&transcript, AgentId(1)).unwrap();
        forged.inputs[2][4] ^= 1;
        let (caught, t) = net.run_authentication_with(&forged, 0).unwrap();
        assert!(caught.abort);
        assert_eq!(caught.mismatches, 1);
        assert_eq!(t.aborted, Some(AbortReason::Authentication));
        let (tolerated, _) = net.run_authentication_with(&forged, 1).unwrap();
        assert!(!tolerated.abort);
    }
}

#[test]
fn replay_from_transcript_matches_outcome() {
    let src = IdealSource::new(5).unwrap();
    let mut net = Network::new(cfg(5, 3), &src).unwrap();
    let (o, t) = net.run_notification(AgentId(5), AgentId(2)).unwrap();
    assert_eq!(
        AuthenticationInputs::from_transcript(&t, AgentId(5)).unwrap(),
        AuthenticationInputs::from_outcome(&o, AgentId(5))
    );
    assert!(AuthenticationInputs::from_transcript(&t, AgentId(1)).is_err());
}

#[test]
fn aeg_on_ideal_source_always_succeeds() {
    let src = IdealSource::new(5).unwrap();
    let mut first_try = 0;
    let trials = 4000;
    for seed in 0..trials {
        let mut rng = trial_stream(seed, 0);
        let mut net = Network::with_randomness(cfg(5, 2), &src, &mut rng).unwrap().recording(false);
        let (o, _) = net.run_aeg(AgentId(3), AgentId(1), AegPolicy::strict(1000)).unwrap();
        match o {
            AegOutcome::Epr { fidelity, repetitions, pair } => {
                assert!((fidelity - 1.0).abs() < 1e-10);
                assert_eq!(pair.n_qubits(), 2);
                first_try += usize::from(repetitions == 1);
            }
            AegOutcome::Abort { reason, .. } => panic!("seed {seed}: aborted with {reason:?}"),
        }
    }
    // entanglement mode is entered with probability 2^-S per repetition
    let p = first_try as f64 / trials as f64;
    let sigma = (0.25f64 * 0.75 / trials as f64).sqrt();
    assert!((p - 0.25).abs() <= 3.0 * sigma, "first-repetition rate {p}");
}

#[test]
fn aeg_parameter_errors() {
    let src = IdealSource::new(5).unwrap();
    let mut net = Network::new(cfg(5, 2), &src).unwrap();
    assert!(net.run_aeg(AgentId(2), AgentId(2), AegPolicy::strict(10)).is_err());
    assert!(net.run_aeg(AgentId(2), AgentId(6), AegPolicy::strict(10)).is_err());
    assert!(net.run_aeg(AgentId(2), AgentId(3), AegPolicy::strict(0)).is_err());
    let loose = AegPolicy {
        max_repetitions: 10,
        tolerance: 1.5,
    };
    assert!(net.run_aeg(AgentId(2), AgentId(3), loose).is_err());
}

/// One repetition, noisy source: success needs entanglement mode (2^-S) and two
/// correct parity runs, the mode signal and the final signal.
#[test]
fn aeg_single_repetition_exact() {
    let delta = 0.1;
    let spec = NoiseSpec::with_kind(3, delta, JunkKind::Minus).unwrap();
    let q = spec.parity_success();
    assert!((q - (1.0 - delta)).abs() < 1e-15);
    let src = make_noisy_source(spec).unwrap();
    let dist = exact(&src, cfg(3, 1), |net| {
        net.run_aeg(AgentId(1), AgentId(2), AegPolicy::strict(1)).unwrap().0.is_success()
    });
    assert!((dist[&true] - 0.5 * q * q).abs() < 1e-12, "{}", dist[&true]);
}

#[test]
fn copy_budget_is_enforced() {
    let src = IdealSource::new(3).unwrap();
    let mut net = Network::new(cfg(3, 4), &src).unwrap().copy_budget(Some(3));
    assert!(matches!(net.run_logical_or(&[1, 0, 0]), Err(Error::SourceExhausted)));
    let mut net = Network::new(cfg(3, 3), &src).unwrap().copy_budget(Some(3));
    assert!(net.run_logical_or(&[1, 0, 0]).is_ok());
}

#[test]
fn withheld_outcome_stays_private() {
    let src = IdealSource::new(3).unwrap();
    let mut net = Network::new(cfg(3, 1), &src).unwrap();
    let opts = ParityOptions {
        withhold: Some(AgentId(2)),
    };
    let (_, t) = net.run_parity(&[1, 0, 0], opts).unwrap();
    assert!(t
        .broadcast_view()
        .iter()
        .all(|(agent, _, _)| *agent != Some(AgentId(2))));
    assert_eq!(t.bit("parity.y", Some(AgentId(2))), Some(1));
    assert!(t.verify().is_ok());
}

#[test]
fn full_transmission_on_ideal_source() {
    let src = IdealSource::new(5).unwrap();
    let policy = TransmissionPolicy {
        aeg: AegPolicy::strict(1000),
        auth_tolerance: 0,
    };
    let mut successes = 0;
    for seed in 0..300 {
        let mut rng = trial_stream(seed, 0);
        let mut net = Network::with_randomness(cfg(5, 3), &src, &mut rng).unwrap();
        let (o, t) = net.run_anonymous_transmission(AgentId(2), AgentId(5), policy).unwrap();
        assert!(t.verify().is_ok(), "seed {seed}: {:?}", t.verify());
        match &o.result {
            AegOutcome::Epr { fidelity, .. } => {
                assert!((fidelity - 1.0).abs() < 1e-10);
                assert_eq!(o.collision, 1);
                assert_eq!(o.beliefs.as_deref(), Some(&[0u8, 0, 0, 0, 1][..]));
                assert_eq!(o.auth_mismatches, Some(0));
                successes += 1;
            }
            AegOutcome::Abort { reason, repetitions } => {
                assert!(matches!(reason, AbortReason::Collision | AbortReason::ReceiverNotNotified), "{reason:?}");
                assert_eq!(*repetitions, 0);
            }
        }
    }
    assert!(successes > 200);
}

/// Inputs with the same parity produce the same broadcast distribution.
#[test]
fn parity_broadcasts_hide_which_agent_flipped() {
    for n in [3, 5] {
        let src = IdealSource::new(n).unwrap();
        let mut odd = vec![0u8; n];
        odd[0] = 1;
        let mut other_odd = vec![0u8; n];
        other_odd[n - 1] = 1;
        let mut even = vec![0u8; n];
        even[0] = 1;
        even[1] = 1;
        let run = |inputs: &Vec<u8>| {
            exact(&src, cfg(n, 1), |net| {
                net.run_parity(inputs, ParityOptions::default()).unwrap().1.broadcast_key()
            })
        };
        assert!(total_variation(&run(&odd), &run(&other_odd)) < 1e-12);
        assert!(total_variation(&run(&even), &run(&vec![0u8; n])) < 1e-12);
        assert!(total_variation(&run(&odd), &run(&even)) > 0.99);
    }
}

#[test]
fn aeg_broadcasts_hide_the_sender() {
    let src = IdealSource::new(3).unwrap();
    let run = |sender: usize| {
        exact(&src, cfg(3, 2), |net| {
            net.run_aeg(AgentId(sender), AgentId(3), AegPolicy::strict(2)).unwrap().1.broadcast_key()
        })
    };
    assert!(total_variation(&run(1), &run(2)) < 1e-12);
}

fn noisy_source(n: usize) -> impl StateSource {
    make_noisy_source(NoiseSpec::with_kind(n, 0.3, JunkKind::default_for(n)).unwrap()).unwrap()
}

fn run_any(which: u8, net: &mut Network<'_>, n: usize, rng_bits: &[u8]) -> Transcript {
    let a = AgentId(1 + rng_bits[0] as usize % n);
    let b = AgentId(1 + (a.0 + rng_bits[1] as usize % (n - 1)) % n);
    let inputs: Vec<u8> = (0..n).map(|i| rng_bits[2 + i] & 1).collect();
    match which {
        0 => net.run_parity(&inputs, ParityOptions::default()).unwrap().1,
        1 => net.run_logical_or(&inputs).unwrap().1,
        2 => net.run_notification(a, b).unwrap().1,
        3 => net.run_collision_detection(&inputs).unwrap().1,
        4 => net.run_aeg(a, b, AegPolicy::strict(50)).unwrap().1,
        _ => {
            let policy = TransmissionPolicy {
                aeg: AegPolicy::strict(50),
                auth_tolerance: 1,
            };
            net.run_anonymous_transmission(a, b, policy).unwrap().1
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transcripts_verify(which in 0u8..6, seed in any::<u64>(), bits in prop::collection::vec(any::<u8>(), 7)) {
        let n = 5;
        let src = noisy_source(n);
        let mut rng = trial_stream(seed, 0);
        let mut net = Network::with_randomness(cfg(n, 2), &src, &mut rng).unwrap();
        let t = run_any(which, &mut net, n, &bits);
        prop_assert!(t.verify().is_ok(), "{:?}", t.verify());
        let jsonl = t.to_jsonl();
        prop_assert_eq!(jsonl.lines().count(), t.entries.len());
        for line in jsonl.lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            prop_assert!(v["seq"].is_u64() && v["name"].is_string());
        }
    }

    #[test]
    fn tampered_outputs_fail_verification(which in 0u8..6, seed in any::<u64>(), bits in prop::collection::vec(any::<u8>(), 7), pick in any::<prop::sample::Index>()) {
        let n = 5;
        let src = noisy_source(n);
        let mut rng = trial_stream(seed, 0);
        let mut net = Network::with_randomness(cfg(n, 2), &src, &mut rng).unwrap();
        let mut t = run_any(which, &mut net, n, &bits);
        let derived: Vec<usize> = t
            .entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.kind == EntryKind::Derived && matches!(e.value, Value::Bit(_)))
            .map(|(i, _)| i)
            .collect();
        prop_assume!(!derived.is_empty());
        let i = derived[pick.index(derived.len())];
        if let Value::Bit(b) = &mut t.entries[i].value {
            *b ^= 1;
        }
        prop_assert!(t.verify().is_err());
    }

    #[test]
    fn ideal_parity_is_exact(seed in any::<u64>(), mask in 0u32..128, big in any::<bool>()) {
        let n = if big { 7 } else { 5 };
        let src = IdealSource::new(n).unwrap();
        let inputs: Vec<u8> = (0..n).map(|i| (mask >> i & 1) as u8).collect();
        let mut rng = trial_stream(seed, 1);
        let r: &mut dyn Randomness = &mut rng;
        let mut net = Network::with_randomness(cfg(n, 1), &src, r).unwrap();
        let (o, t) = net.run_parity(&inputs, ParityOptions::default()).unwrap();
        prop_assert_eq!(o.y, inputs.iter().fold(0, |a, b| a ^ b));
        prop_assert_eq!(o.outcomes.iter().fold(0, |a, b| a ^ b), o.y);
        prop_assert!(t.verify().is_ok());
    }
}
