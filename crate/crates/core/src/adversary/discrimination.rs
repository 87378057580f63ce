use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::bellcert::{build_bell_operator, expectation, MAX_SPECTRUM_N};
use crate::error::{check_odd_n, Error, Result};
use crate::protocols::AgentId;
use crate::qstate::{apply_pauli, fidelity, ghz_state, trace_distance_pure, GhzSign, Pauli, QuantumRegister};

use super::bounds::theorem3_bound;

/// Gram eigenvalues within this distance of 0 are rounding noise and count as 0;
/// anything more negative is an error.
const GRAM_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GuessReport {
    pub k: usize,
    pub honest: Vec<AgentId>,
    /// `(n+1) - ⟨O⟩` on the attacked state.
    pub epsilon: f64,
    /// `1 - |⟨ψₙ⁺|ψ⟩|²`.
    pub delta: f64,
    /// Optimal two-state success, `k = 2` only.
    pub helstrom_success: Option<f64>,
    pub pgm_success: f64,
    pub pairwise_fidelities: Vec<Vec<f64>>,
    pub pairwise_trace_distances: Vec<Vec<f64>>,
    pub paper_bound: f64,
}

impl GuessReport {
    /// Best success among the computed attacks.
    pub fn best_attack(&self) -> f64 {
        self.helstrom_success.map_or(self.pgm_success, |h| h.max(self.pgm_success))
    }

    pub fn within_bound(&self) -> bool {
        self.best_attack() <= self.paper_bound + 1e-12
    }
}

/// Adversary holding the global state tries to tell which honest agent
/// applied `Z`, with the candidate senders equally likely.
pub fn sender_guess_attack(state: &QuantumRegister, honest: &[AgentId]) -> Result<GuessReport> {
    let n = state.n_qubits();
    check_odd_n(n)?;
    if n > MAX_SPECTRUM_N {
        return Err(Error::TooLarge {
            n,
            limit: MAX_SPECTRUM_N,
            what: "sender-guessing attacks",
        });
    }
    let norm = state.norm_sqr();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized(norm));
    }
    let k = honest.len();
    if k < 2 || k > n {
        return Err(Error::InvalidParameter(format!("honest set size must be in 2..={n}, got {k}")));
    }
    for (i, a) in honest.iter().enumerate() {
        if a.0 == 0 || a.0 > n {
            return Err(Error::InvalidParameter(format!("agent {} out of range 1..={n}", a.0)));
        }
        if honest[..i].contains(a) {
            return Err(Error::InvalidParameter(format!("agent {} listed twice", a.0)));
        }
    }

    let op = build_bell_operator(n)?;
    let epsilon = ((n + 1) as f64 - expectation(&op, state)?).max(0.0);
    let ghz = ghz_state(n, GhzSign::Plus)?;
    let delta = (1.0 - ghz.inner(state)?.norm_sqr()).max(0.0);

    let candidates: Vec<QuantumRegister> = honest
        .iter()
        .map(|a| apply_pauli(state, a.0, Pauli::Z))
        .collect::<Result<_>>()?;
    let mut gram = DMatrix::<Complex64>::zeros(k, k);
    let mut fid = vec![vec![0.0; k]; k];
    let mut dist = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            gram[(i, j)] = candidates[i].inner(&candidates[j])?;
            fid[i][j] = fidelity(&candidates[i], &candidates[j])?;
            dist[i][j] = trace_distance_pure(&candidates[i], &candidates[j])?;
        }
    }
    let pgm_success = pgm_success(&gram)?;
    let helstrom_success = (k == 2).then(|| 0.5 * (1.0 + dist[0][1]));
    Ok(GuessReport {
        k,
        honest: honest.to_vec(),
        epsilon,
        delta,
        helstrom_success,
        pgm_success,
        pairwise_fidelities: fid,
        pairwise_trace_distances: dist,
        paper_bound: theorem3_bound(k, epsilon)?,
    })
}

/// Pretty-good-measurement success for equiprobable pure states with Gram
/// matrix `G`: `(1/k) Σᵢ [(G^½)ᵢᵢ]²`.
pub fn pgm_success(gram: &DMatrix<Complex64>) -> Result<f64> {
    let k = gram.nrows();
    if k == 0 || gram.ncols() != k {
        return Err(Error::InvalidParameter("Gram matrix must be square and nonempty".into()));
    }
    let eig = gram.clone().symmetric_eigen();
    let mut roots = Vec::with_capacity(k);
    for &lambda in eig.eigenvalues.iter() {
        if lambda < -GRAM_TOL {
            return Err(Error::Numerical(format!("Gram matrix has eigenvalue {lambda:e}")));
        }
        roots.push(if lambda <= GRAM_TOL { 0.0 } else { lambda.sqrt() });
    }
    let v = &eig.eigenvectors;
    let success: f64 = (0..k)
        .map(|i| {
            let diag: f64 = (0..k).map(|m| v[(i, m)].norm_sqr() * roots[m]).sum();
            diag * diag
        })
        .sum();
    Ok(success / k as f64)
}
