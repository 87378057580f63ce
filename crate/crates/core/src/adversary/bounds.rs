use crate::error::{check_odd_n, Error, Result};

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!("epsilon must be nonnegative, got {epsilon}")));
    }
    Ok(())
}

/// `(1 - ε/4, 1 - ε/(4(n-1)))` for the single-run parity success probability.
pub fn parity_success_bounds(n: usize, epsilon: f64) -> Result<(f64, f64)> {
    check_odd_n(n)?;
    check_epsilon(epsilon)?;
    Ok((1.0 - epsilon / 4.0, 1.0 - epsilon / (4.0 * (n - 1) as f64)))
}

/// Upper bound on the probability that entanglement generation does not abort:
/// `2^-S q^(S-1) / (1 - (1 - 2^-S) q²)` with `q = 1 - ε/(4(n-1))`.
pub fn theorem2_bound(n: usize, security: usize, epsilon: f64) -> Result<f64> {
    check_odd_n(n)?;
    check_epsilon(epsilon)?;
    if security == 0 {
        return Err(Error::InvalidParameter("security parameter S must be at least 1".into()));
    }
    let q = 1.0 - epsilon / (4.0 * (n - 1) as f64);
    let p = 0.5f64.powi(security as i32);
    let denominator = 1.0 - (1.0 - p) * q * q;
    if denominator <= 0.0 {
        return Err(Error::Numerical(format!("non-positive denominator {denominator}")));
    }
    Ok(p * q.powi(security as i32 - 1) / denominator)
}

/// `min(1, 1/k + √ε)`.
pub fn theorem3_bound(k: usize, epsilon: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    check_epsilon(epsilon)?;
    Ok((1.0 / k as f64 + epsilon.sqrt()).min(1.0))
}
