use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bellcert::{build_bell_operator, expectation, PauliString};
use crate::error::{check_odd_n, Error, Result};
use crate::qstate::{ghz_state, GhzSign, Pauli, QuantumRegister};
use crate::random::Randomness;
use crate::source::StateSource;

/// Largest n for which junk eigenstates are built (same limit as the dense spectrum).
pub const MAX_NOISE_N: usize = 11;

const ORTHO_TOL: f64 = 1e-10;

/// Named junk families for `σ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum JunkKind {
    /// `|ψₙ⁻⟩`, the eigenvector for `-(n+1)`.
    Minus,
    /// Equal mixture over the eigenvectors of `O` with this eigenvalue, `ψₙ⁺` excluded.
    Eigen(i64),
}

impl JunkKind {
    /// The default junk: the `(n-3)` eigenspace.
    pub fn default_for(n: usize) -> Self {
        JunkKind::Eigen(n as i64 - 3)
    }
}

impl fmt::Display for JunkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JunkKind::Minus => f.write_str("minus"),
            JunkKind::Eigen(v) => write!(f, "eigen:{v}"),
        }
    }
}

impl FromStr for JunkKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "minus" {
            return Ok(JunkKind::Minus);
        }
        s.strip_prefix("eigen:")
            .and_then(|v| v.parse().ok())
            .map(JunkKind::Eigen)
            .ok_or_else(|| Error::InvalidNoise(format!("unknown junk kind {s:?}; use \"minus\" or \"eigen:<value>\"")))
    }
}

impl From<JunkKind> for String {
    fn from(k: JunkKind) -> Self {
        k.to_string()
    }
}

impl TryFrom<String> for JunkKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Eigenvectors `(|b⟩ ± |b̄⟩)/√2` of `O` with eigenvalue `value`, excluding
/// `ψₙ⁺`. `O|b⟩ = (1 + Σ(-1)^(bᵢ⊕bᵢ₊₁))|b̄⟩`, so the sign `±` multiplies
/// `n+1-2f`, where `f` counts anti-correlated cyclic neighbours of `b`.
/// Returned in increasing order of `b` (with `b₁ = 0`), `+` before `-`.
pub fn eigenstates_with_value(n: usize, value: i64) -> Result<Vec<QuantumRegister>> {
    check_odd_n(n)?;
    if n > MAX_NOISE_N {
        return Err(Error::TooLarge {
            n,
            limit: MAX_NOISE_N,
            what: "junk eigenstates",
        });
    }
    let dim = 1usize << n;
    let amp = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::new();
    for b in 0..dim / 2 {
        let f = (0..n)
            .filter(|&i| {
                let bit = |q: usize| (b >> (n - 1 - q)) & 1;
                bit(i) != bit((i + 1) % n)
            })
            .count() as i64;
        let magnitude = n as i64 + 1 - 2 * f;
        for sign in [1i64, -1] {
            if sign * magnitude != value || (b == 0 && sign == 1) {
                continue;
            }
            let mut amps = vec![Complex64::new(0.0, 0.0); dim];
            amps[b] = Complex64::new(amp, 0.0);
            amps[dim - 1 - b] = Complex64::new(sign as f64 * amp, 0.0);
            out.push(QuantumRegister::from_amplitudes(amps)?);
        }
    }
    Ok(out)
}

/// Equal-weight junk list for a named family.
pub fn junk_states(n: usize, kind: JunkKind) -> Result<Vec<(f64, QuantumRegister)>> {
    let states = match kind {
        JunkKind::Minus => vec![ghz_state(n, GhzSign::Minus)?],
        JunkKind::Eigen(v) => eigenstates_with_value(n, v)?,
    };
    if states.is_empty() {
        return Err(Error::InvalidNoise(format!(
            "no eigenvector orthogonal to the GHZ state has eigenvalue {kind}"
        )));
    }
    let w = 1.0 / states.len() as f64;
    Ok(states.into_iter().map(|s| (w, s)).collect())
}

/// `ρ̃ = (1-δ)|ψₙ⁺⟩⟨ψₙ⁺| + δσ` with `σ` a weighted list of pure states orthogonal to `ψₙ⁺`.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseSpec {
    n: usize,
    delta: f64,
    junk: Vec<(f64, QuantumRegister)>,
    alpha: f64,
    junk_parity_success: f64,
}

impl NoiseSpec {
    pub fn new(n: usize, delta: f64, junk: Vec<(f64, QuantumRegister)>) -> Result<Self> {
        check_odd_n(n)?;
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::InvalidNoise(format!("delta must lie in [0, 1], got {delta}")));
        }
        if junk.is_empty() {
            return Err(Error::InvalidNoise("junk list is empty".into()));
        }
        if junk.iter().any(|(w, _)| !(*w >= 0.0)) {
            return Err(Error::InvalidNoise("junk weights must be nonnegative".into()));
        }
        let total: f64 = junk.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidNoise(format!("junk weights sum to {total}, not 1")));
        }
        let ghz = ghz_state(n, GhzSign::Plus)?;
        let op = build_bell_operator(n)?;
        let all_x = PauliString::new(vec![Pauli::X; n]);
        let mut alpha = 0.0;
        let mut junk_parity_success = 0.0;
        for (i, (w, state)) in junk.iter().enumerate() {
            if state.n_qubits() != n {
                return Err(Error::DimensionMismatch {
                    left: n,
                    right: state.n_qubits(),
                });
            }
            let overlap = ghz.inner(state)?.norm();
            if overlap > ORTHO_TOL {
                return Err(Error::InvalidNoise(format!(
                    "junk state {i} has overlap {overlap:e} with the GHZ state"
                )));
            }
            alpha += w * expectation(&op, state)?;
            junk_parity_success += w * 0.5 * (1.0 + all_x.expectation(state)?.re);
        }
        Ok(Self {
            n,
            delta,
            junk,
            alpha,
            junk_parity_success,
        })
    }

    pub fn ideal(n: usize) -> Result<Self> {
        Self::new(n, 0.0, junk_states(n, JunkKind::Minus)?)
    }

    pub fn with_kind(n: usize, delta: f64, kind: JunkKind) -> Result<Self> {
        Self::new(n, delta, junk_states(n, kind)?)
    }

    /// Solves `ε = δ((n+1) - α)` for `δ`.
    pub fn with_target_epsilon(n: usize, epsilon: f64, junk: Vec<(f64, QuantumRegister)>) -> Result<Self> {
        let probe = Self::new(n, 0.0, junk)?;
        if !(epsilon >= 0.0) {
            return Err(Error::InvalidNoise(format!("epsilon must be nonnegative, got {epsilon}")));
        }
        let gap = (n + 1) as f64 - probe.alpha;
        if gap <= ORTHO_TOL {
            return Err(Error::InvalidNoise(format!(
                "junk with expectation {} cannot lower the violation",
                probe.alpha
            )));
        }
        let delta = epsilon / gap;
        if delta > 1.0 {
            return Err(Error::InvalidNoise(format!(
                "epsilon {epsilon} needs delta = {delta} > 1 for this junk (maximum epsilon {gap})"
            )));
        }
        Self::new(n, delta, probe.junk)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn junk(&self) -> &[(f64, QuantumRegister)] {
        &self.junk
    }

    /// Weighted `⟨O⟩` of the junk.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Exact `⟨O⟩ = (1-δ)(n+1) + δα`.
    pub fn bell_expectation(&self) -> f64 {
        (1.0 - self.delta) * (self.n + 1) as f64 + self.delta * self.alpha
    }

    pub fn epsilon(&self) -> f64 {
        ((self.n + 1) as f64 - self.bell_expectation()).max(0.0)
    }

    /// Exact probability that one parity run returns the XOR of the inputs.
    pub fn parity_success(&self) -> f64 {
        (1.0 - self.delta) + self.delta * self.junk_parity_success
    }
}

/// Draws `ψₙ⁺` with probability `1-δ`, otherwise a junk state by weight.
#[derive(Clone, Debug)]
pub struct NoisySource {
    spec: NoiseSpec,
    ghz: QuantumRegister,
    weights: Vec<f64>,
}

impl NoisySource {
    pub fn spec(&self) -> &NoiseSpec {
        &self.spec
    }
}

pub fn make_noisy_source(spec: NoiseSpec) -> Result<NoisySource> {
    let ghz = ghz_state(spec.n, GhzSign::Plus)?;
    let weights = std::iter::once(1.0 - spec.delta)
        .chain(spec.junk.iter().map(|(w, _)| spec.delta * w))
        .collect();
    Ok(NoisySource { spec, ghz, weights })
}

impl StateSource for NoisySource {
    fn n_qubits(&self) -> usize {
        self.spec.n
    }

    fn draw(&self, rng: &mut dyn Randomness) -> Result<QuantumRegister> {
        if self.spec.delta == 0.0 {
            return Ok(self.ghz.clone());
        }
        match rng.choose(&self.weights) {
            0 => Ok(self.ghz.clone()),
            i => Ok(self.spec.junk[i - 1].1.clone()),
        }
    }
}

/// Coherent version of the noise: `√(1-δ)|ψₙ⁺⟩ + Σ √(δ wᵢ)|φᵢ⟩`.
pub fn perturbed_state(spec: &NoiseSpec) -> Result<QuantumRegister> {
    let ghz = ghz_state(spec.n, GhzSign::Plus)?;
    let mut amps: Vec<Complex64> = ghz
        .amplitudes()
        .iter()
        .map(|a| a * (1.0 - spec.delta).sqrt())
        .collect();
    for (w, state) in &spec.junk {
        let c = (spec.delta * w).sqrt();
        for (a, j) in amps.iter_mut().zip(state.amplitudes()) {
            *a += j * c;
        }
    }
    QuantumRegister::normalized(amps)
}
