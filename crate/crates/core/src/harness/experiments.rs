use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde_json::{json, Value as Json};

use crate::adversary::{
    junk_states, make_noisy_source, parity_success_bounds, perturbed_state, sender_guess_attack, theorem2_bound,
    JunkKind, NoiseSpec, NoisySource,
};
use crate::bellcert::{build_bell_operator, fidelity_deficit_bounds, lr_max, self_test, spectrum};
use crate::error::{check_odd_n, Error, Result};
use crate::protocols::{
    AegOutcome, AegPolicy, AgentId, AuthenticationInputs, Network, NetworkConfig, ParityOptions, Transcript,
};
use crate::qstate::SPECTRAL_TOL;
use crate::random::{trial_stream, Randomness};

use super::report::{Bound, BoundReport, Relation};
use super::stats::Estimate;
use super::{ExperimentKind, Params};

/// Fidelity counted as a perfect EPR pair.
const UNIT_FIDELITY_TOL: f64 = 1e-10;

const SWEEP_EPSILONS: [f64; 6] = [0.0, 0.05, 0.1, 0.2, 0.4, 0.8];

pub(super) fn run(kind: ExperimentKind, p: &Params, transcripts: Option<&Path>) -> Result<Vec<BoundReport>> {
    check_odd_n(p.n)?;
    let reports = match kind {
        ExperimentKind::Spectrum => vec![spectrum_report(p)?],
        ExperimentKind::LrBound => vec![lr_report(p)?],
        ExperimentKind::Selftest => vec![selftest_report(p)?],
        ExperimentKind::Parity => vec![parity_report(p, transcripts)?],
        ExperimentKind::Veto => vec![veto_report(p, transcripts)?],
        ExperimentKind::Notify => vec![notify_report(p, transcripts)?],
        ExperimentKind::Authenticate => vec![authenticate_report(p, transcripts)?],
        ExperimentKind::Collision => vec![collision_report(p, transcripts)?],
        ExperimentKind::Aeg => vec![aeg_report(p, transcripts)?],
        ExperimentKind::Guess => vec![guess_report(p)?],
        ExperimentKind::BoundsSweep => sweep_reports(p)?,
    };
    Ok(reports)
}

fn params_json(p: &Params) -> Json {
    serde_json::to_value(p).expect("params serialize")
}

fn noise_spec(p: &Params) -> Result<NoiseSpec> {
    let junk = junk_states(p.n, p.junk.unwrap_or_else(|| JunkKind::default_for(p.n)))?;
    match (p.epsilon, p.delta) {
        (Some(_), Some(_)) => Err(Error::InvalidParameter("give either epsilon or delta, not both".into())),
        (Some(eps), None) => NoiseSpec::with_target_epsilon(p.n, eps, junk),
        (None, Some(delta)) => NoiseSpec::new(p.n, delta, junk),
        (None, None) => NoiseSpec::new(p.n, 0.0, junk),
    }
}

fn noise_json(spec: &NoiseSpec) -> Json {
    json!({
        "delta": spec.delta(),
        "epsilon": spec.epsilon(),
        "bell_expectation": spec.bell_expectation(),
        "parity_success": spec.parity_success(),
    })
}

fn config(p: &Params) -> Result<NetworkConfig> {
    NetworkConfig::new(p.n, p.security, p.seed)
}

fn parse_bits(s: &str, n: usize) -> Result<Vec<u8>> {
    let bits: Vec<u8> = s
        .chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(Error::InvalidParameter(format!("inputs must be a string of 0/1, got {s:?}"))),
        })
        .collect::<Result<_>>()?;
    if bits.len() != n {
        return Err(Error::InvalidParameter(format!(
            "inputs {s:?} has {} bits, expected n = {n}",
            bits.len()
        )));
    }
    Ok(bits)
}

fn roles(p: &Params) -> (AgentId, AgentId) {
    (AgentId(p.sender.unwrap_or(1)), AgentId(p.receiver.unwrap_or(p.n)))
}

/// Runs `trial` once per index in parallel. The second argument asks the
/// trial to record transcripts; only the optional replay of trial 0 does.
fn run_trials<T: Send>(
    p: &Params,
    transcripts: Option<&Path>,
    trial: impl Fn(&mut dyn Randomness, bool) -> Result<(T, Vec<Transcript>)> + Sync,
) -> Result<Vec<T>> {
    let out = (0..p.trials)
        .into_par_iter()
        .map(|i| trial(&mut trial_stream(p.seed, i), false).map(|(t, _)| t))
        .collect::<Result<Vec<T>>>()?;
    if let Some(path) = transcripts {
        let (_, logs) = trial(&mut trial_stream(p.seed, 0), true)?;
        let mut w = BufWriter::new(File::create(path)?);
        for t in &logs {
            t.write_jsonl(&mut w)?;
        }
        w.flush()?;
    }
    Ok(out)
}

fn count(hits: &[bool]) -> u64 {
    hits.iter().filter(|&&h| h).count() as u64
}

fn network<'a>(
    p: &Params,
    src: &'a NoisySource,
    rng: &'a mut dyn Randomness,
    record: bool,
) -> Result<Network<'a>> {
    Ok(Network::with_randomness(config(p)?, src, rng)?.recording(record))
}

fn spectrum_report(p: &Params) -> Result<BoundReport> {
    let report = spectrum(&build_bell_operator(p.n)?)?;
    let top = report.eigenvalues.first().copied().unwrap_or(f64::NAN);
    let want = (p.n + 1) as f64;
    let structural = report.on_lattice
        && report.extremal_nondegenerate
        && report.extremal_eigenvector_fidelity_to_ghz >= 1.0 - SPECTRAL_TOL;
    Ok(BoundReport::new(
        "spectrum",
        params_json(p),
        Estimate::exact(top),
        Relation::Within,
        Bound::Interval(want - SPECTRAL_TOL, want + SPECTRAL_TOL),
        structural,
        0,
        p.seed,
    )
    .with_details(json!({
        "multiplicities": report.multiplicities,
        "on_lattice": report.on_lattice,
        "extremal_nondegenerate": report.extremal_nondegenerate,
        "extremal_eigenvector_fidelity_to_ghz": report.extremal_eigenvector_fidelity_to_ghz,
    })))
}

fn lr_report(p: &Params) -> Result<BoundReport> {
    let lr = lr_max(p.n)?;
    Ok(BoundReport::new(
        "lr-bound",
        params_json(p),
        Estimate::exact(lr.max_value as f64),
        Relation::AtMost,
        Bound::Value((p.n - 1) as f64),
        true,
        0,
        p.seed,
    )
    .with_details(json!({
        "assignment": lr.assignment,
        "quantum_value": p.n + 1,
    })))
}

fn selftest_report(p: &Params) -> Result<BoundReport> {
    let spec = noise_spec(p)?;
    let src = make_noisy_source(spec.clone())?;
    let threshold = p.threshold.unwrap_or(1.0);
    let verdict = self_test(&src, p.n, p.trials, threshold, &mut trial_stream(p.seed, 0))?;
    let exact = spec.bell_expectation();
    Ok(BoundReport::new(
        "selftest",
        params_json(p),
        Estimate::with_stderr(verdict.estimate, verdict.stderr),
        Relation::Within,
        Bound::Value(exact),
        true,
        p.trials,
        p.seed,
    )
    .with_details(json!({ "noise": noise_json(&spec), "verdict": verdict })))
}

fn parity_report(p: &Params, transcripts: Option<&Path>) -> Result<BoundReport> {
    let spec = noise_spec(p)?;
    let src = make_noisy_source(spec.clone())?;
    let inputs = match &p.inputs {
        Some(s) => parse_bits(s, p.n)?,
        None => vec![0; p.n],
    };
    let want = inputs.iter().fold(0, |a, b| a ^ b);
    let hits = run_trials(p, transcripts, |rng, record| {
        let (o, t) = network(p, &src, rng, record)?.run_parity(&inputs, ParityOptions::default())?;
        Ok((o.y == want, vec![t]))
    })?;
    let (lo, hi) = parity_success_bounds(p.n, spec.epsilon())?;
    Ok(BoundReport::new(
        "parity",
        params_json(p),
        Estimate::bernoulli(count(&hits), p.trials),
        Relation::Within,
        Bound::Interval(lo, hi),
        true,
        p.trials,
        p.seed,
    )
    .with_details(json!({ "noise": noise_json(&spec), "expected_parity": want })))
}

fn veto_report(p: &Params, transcripts: Option<&Path>) -> Result<BoundReport> {
    let spec = noise_spec(p)?;
    let src = make_noisy_source(spec.clone())?;
    let inputs = match &p.inputs {
        Some(s) => parse_bits(s, p.n)?,
        None => {
            let mut v = vec![0; p.n];
            v[0] = 1;
            v
        }
    };
    let want = inputs.iter().fold(0, |a, b| a | b);
    let hits = run_trials(p, transcripts, |rng, record| {
        let (o, t) = network(p, &src, rng, record)?.run_logical_or(&inputs)?;
        Ok((o.v == want, vec![t]))
    })?;
    // a parity of fresh random bits stays uniform under any independent flip
    let exact = if want == 1 {
        1.0 - 0.5f64.powi(p.security as i32)
    } else {
        spec.parity_success().powi(p.security as i32)
    };
    Ok(BoundReport::new(
        "veto",
        params_json(p),
        Estimate::bernoulli(count(&hits), p.trials),
        Relation::Within,
        Bound::Value(exact),
        true,
        p.trials,
        p.seed,
    )
    .with_details(json!({ "noise": noise_json(&spec), "expected_v": want })))
}

fn notify_report(p: &Params, transcripts: Option<&Path>) -> Result<BoundReport> {
    let spec = noise_spec(p)?;
    let src = make_noisy_source(spec.clone())?;
    let (sender, receiver) = roles(p);
    let runs = run_trials(p, transcripts, |rng, record| {
        let (o, t) = network(p, &src, rng, record)?.run_notification(sender, receiver)?;
        let spurious = o
            .beliefs
            .iter()
            .enumerate()
            .filter(|&(i, &b)| b == 1 && i + 1 != receiver.0)
            .count() as u64;
        Ok(((o.beliefs[receiver.0 - 1] == 1, spurious), vec![t]))
    })?;
    let hits = runs.iter().filter(|r| r.0).count() as u64;
    let spurious: u64 = runs.iter().map(|r| r.1).sum();
    let exact = 1.0 - 0.5f64.powi(p.security as i32);
    Ok(BoundReport::new(
        "notify",
        params_json(p),
        Estimate::bernoulli(hits, p.trials),
        Relation::Within,
        Bound::Value(exact),
        true,
        p.trials,
        p.seed,
    )
    .with_details(json!({
        "noise": noise_json(&spec),
        "spurious_beliefs": spurious,
        "spurious_probability_per_agent": 1.0 - spec.parity_success().powi(p.security as i32),
    })))
}

fn integer_tolerance(p: &Params) -> Result<u64> {
    let t = p.tolerance.unwrap_or(0.0);
    if t < 0.0 || t.fract() != 0.0 {
        return Err(Error::InvalidParameter(format!(
            "authentication tolerance must be a nonnegative integer, got {t}"
        )));
    }
    Ok(t as u64)
}

fn binomial_tail_above(trials: usize, p: f64, threshold: u64) -> f64 {
    let mut coeff = 1.0;
    let mut total = 0.0;
    for j in 0..=trials {
        if j > 0 {
            coeff *= (trials - j + 1) as f64 / j as f64;
        }
        if j as u64 > threshold {
            total += coeff * p.powi(j as i32) * (1.0 - p).powi((trials - j) as i32);
        }
    }
    total
}

fn authenticate_report(p: &Params, transcripts: Option<&Path>) -> Result<BoundReport> {
    let spec = noise_spec(p)?;
    let src = make_noisy_source(spec.clone())?;
    let (sender, receiver) = roles(p);
    let tolerance = integer_tolerance(p)?;
    let runs = run_trials(p, transcripts, |rng, record| {
        let mut net = network(p, &src, rng, record)?;
        let (notified, nt) = net.run_notification(sender, receiver)?;
        let replay = AuthenticationInputs::from_outcome(&notified, sender);
        let (auth, at) = net.run_authentication_with(&replay, tolerance)?;
        Ok(((auth.abort, auth.mismatches), vec![nt, at]))
    })?;
    let aborts = runs.iter().filter(|r| r.0).count() as u64;
    let mismatches: u64 = runs.iter().map(|r| r.1).sum();
    // each copy's comparison passes through n noisy parity runs: the n-1
    // replayed notification outputs and the authentication run itself
    let flip = 1.0 - spec.parity_success();
    let per_copy = 0.5 * (1.0 - (1.0 - 2.0 * flip).powi(p.n as i32));
    let exact = binomial_tail_above(p.security, per_copy, tolerance);
    Ok(BoundReport::new(
        "authenticate",
        params_json(p),
        Estimate::bernoulli(aborts, p.trials),
        Relation::Within,
        Bound::Value(exact),
        true,
        p.trials,
        p.seed,
    )
    .with_details(json!({
        "noise": noise_json(&spec),
        "mismatch_probability_per_copy": per_copy,
        "mean_mismatches": mismatches as f64 / p.trials as f64,
    })))
}

/// Exact distribution of the collision output `V` for `m` wishers and an ideal source.
pub(crate) fn collision_distribution(m: usize, security: usize) -> [f64; 3] {
    if m == 0 {
        return [1.0, 0.0, 0.0];
    }
    let quiet = 0.5f64.powi(security as i32);
    let undetected = if m % 2 == 1 {
        (2f64.powi(security as i32) - 1.0) * 0.5f64.powi((m * security) as i32)
    } else {
        0.0
    };
    let two = (1.0 - quiet) * (1.0 - quiet - undetected);
    [quiet, 1.0 - quiet - two, two]
}

fn collision_report(p: &Params, transcripts: Option<&Path>) -> Result<BoundReport> {
    let spec = noise_spec(p)?;
    if spec.delta() > 0.0 {
        return Err(Error::InvalidParameter(
            "the collision experiment compares against the ideal-source distribution; omit epsilon/delta".into(),
        ));
    }
    let src = make_noisy_source(spec)?;
    let wishes = match &p.inputs {
        Some(s) => parse_bits(s, p.n)?,
        None => {
            let mut v = vec![0; p.n];
            v[0] = 1;
            v[1] = 1;
            v
        }
    };
    let m = wishes.iter().filter(|&&w| w == 1).count();
    let target = m.min(2) as u8;
    let hits = run_trials(p, transcripts, |rng, record| {
        let (o, t) = network(p, &src, rng, record)?.run_collision_detection(&wishes)?;
        Ok((o.v == target, vec![t]))
    })?;
    let dist = collision_distribution(m, p.security);
    Ok(BoundReport::new(
        "collision",
        params_json(p),
        Estimate::bernoulli(count(&hits), p.trials),
        Relation::Within,
        Bound::Value(dist[target as usize]),
        true,
        p.trials,
        p.seed,
    )
    .with_details(json!({ "wishers": m, "target_v": target, "exact_distribution": dist })))
}

struct AegTrial {
    success: bool,
    fidelity: Option<f64>,
    abort: Option<String>,
    repetitions: u64,
}

fn aeg_report(p: &Params, transcripts: Option<&Path>) -> Result<BoundReport> {
    let spec = noise_spec(p)?;
    let src = make_noisy_source(spec.clone())?;
    let (sender, receiver) = roles(p);
    let policy = AegPolicy {
        max_repetitions: p.max_repetitions,
        tolerance: p.tolerance.unwrap_or(0.0),
    };
    let runs = run_trials(p, transcripts, |rng, record| {
        let (o, t) = network(p, &src, rng, record)?.run_aeg(sender, receiver, policy)?;
        let trial = match o {
            AegOutcome::Epr {
                fidelity,
                repetitions,
                ..
            } => AegTrial {
                success: true,
                fidelity: Some(fidelity),
                abort: None,
                repetitions,
            },
            AegOutcome::Abort { reason, repetitions } => AegTrial {
                success: false,
                fidelity: None,
                abort: Some(serde_json::to_value(reason).expect("reasons serialize").to_string()),
                repetitions,
            },
        };
        Ok((trial, vec![t]))
    })?;
    let successes = runs.iter().filter(|r| r.success).count() as u64;
    let min_fidelity = runs.iter().filter_map(|r| r.fidelity).reduce(f64::min);
    let unit = runs
        .iter()
        .filter(|r| r.fidelity.is_some_and(|f| f >= 1.0 - UNIT_FIDELITY_TOL))
        .count() as u64;
    let mut reasons: BTreeMap<String, u64> = BTreeMap::new();
    for r in &runs {
        if let Some(a) = &r.abort {
            *reasons.entry(a.trim_matches('"').to_string()).or_default() += 1;
        }
    }
    let total_reps: u64 = runs.iter().map(|r| r.repetitions).sum();
    let bound = theorem2_bound(p.n, p.security, spec.epsilon())?;
    Ok(BoundReport::new(
        "aeg",
        params_json(p),
        Estimate::bernoulli(successes, p.trials),
        Relation::AtMost,
        Bound::Value(bound),
        true,
        p.trials,
        p.seed,
    )
    .with_details(json!({
        "noise": noise_json(&spec),
        "successes": successes,
        "successes_with_unit_fidelity": unit,
        "min_fidelity": min_fidelity,
        "abort_reasons": reasons,
        "mean_repetitions": total_reps as f64 / p.trials as f64,
    })))
}

fn guess_for(n: usize, k: usize, spec: &NoiseSpec) -> Result<crate::adversary::GuessReport> {
    let state = perturbed_state(spec)?;
    let honest: Vec<AgentId> = (1..=k).map(AgentId).collect();
    sender_guess_attack(&state, &honest).map_err(|e| match e {
        Error::InvalidParameter(m) => Error::InvalidParameter(format!("{m} (n = {n})")),
        other => other,
    })
}

fn guess_report(p: &Params) -> Result<BoundReport> {
    let spec = noise_spec(p)?;
    let k = p.k.unwrap_or(2);
    let g = guess_for(p.n, k, &spec)?;
    Ok(BoundReport::new(
        "guess",
        params_json(p),
        Estimate::exact(g.best_attack()),
        Relation::AtMost,
        Bound::Value(g.paper_bound),
        true,
        0,
        p.seed,
    )
    .with_details(g))
}

fn sweep_reports(p: &Params) -> Result<Vec<BoundReport>> {
    if p.delta.is_some() {
        return Err(Error::InvalidParameter("bounds-sweep takes epsilon, not delta".into()));
    }
    let epsilons = p.epsilon.map_or_else(|| SWEEP_EPSILONS.to_vec(), |e| vec![e]);
    let kinds = p
        .junk
        .map_or_else(|| vec![JunkKind::Minus, JunkKind::default_for(p.n)], |j| vec![j]);
    let mut out = Vec::new();
    for &kind in &kinds {
        for &eps in &epsilons {
            let spec = NoiseSpec::with_target_epsilon(p.n, eps, junk_states(p.n, kind)?)?;
            let mut row = params_json(p);
            row["epsilon"] = json!(eps);
            row["junk"] = json!(kind.to_string());

            let (lo, hi) = parity_success_bounds(p.n, eps)?;
            out.push(
                BoundReport::new(
                    "bounds-sweep/parity",
                    row.clone(),
                    Estimate::exact(spec.parity_success()),
                    Relation::Within,
                    Bound::Interval(lo, hi),
                    true,
                    0,
                    p.seed,
                )
                .with_details(noise_json(&spec)),
            );

            let (dlo, dhi) = fidelity_deficit_bounds(eps, p.n)?;
            let lower_applies = spec.alpha() >= -((p.n - 3) as f64) - 1e-12;
            let (relation, bound) = if lower_applies {
                (Relation::Within, Bound::Interval(dlo, dhi))
            } else {
                (Relation::AtMost, Bound::Value(dhi))
            };
            out.push(
                BoundReport::new(
                    "bounds-sweep/fidelity-deficit",
                    row.clone(),
                    Estimate::exact(spec.delta()),
                    relation,
                    bound,
                    true,
                    0,
                    p.seed,
                )
                .with_details(json!({
                    "alpha": spec.alpha(),
                    "printed_lower": dlo,
                    "lower_applies": lower_applies,
                })),
            );

            for k in 2..=p.n {
                let g = guess_for(p.n, k, &spec)?;
                let mut row = row.clone();
                row["k"] = json!(k);
                out.push(
                    BoundReport::new(
                        "bounds-sweep/guess",
                        row,
                        Estimate::exact(g.best_attack()),
                        Relation::AtMost,
                        Bound::Value(g.paper_bound),
                        true,
                        0,
                        p.seed,
                    )
                    .with_details(json!({
                        "pgm_success": g.pgm_success,
                        "helstrom_success": g.helstrom_success,
                    })),
                );
            }
        }
    }
    Ok(out)
}
