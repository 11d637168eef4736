//! Associated Laguerre polynomials and displaced-frame matrix elements.
//!
//! The displacement operator e^{λ(a†−a)} connects Fock levels n and n+m with
//! amplitude √((n+m)!/n!) F_m(n), where
//!
//! F_m(n) = e^{−λ²/2} λ^m (n!/(n+m)!) L_n^m(λ²).
//!
//! L_n^m is evaluated by the ascending three-term recurrence in n at fixed m,
//!
//! (n+1) L_{n+1}^m = (2n+m+1−x) L_n^m − (n+m) L_{n−1}^m,
//!
//! which is numerically stable where the factorial-sum closed form cancels
//! catastrophically. The factorial ratio n!/(n+m)! is accumulated as a
//! running product (in log space once n+m > 170 to stay inside f64 range).

use crate::{Error, Result};

/// Default cap on n + m for [`f_coeff`]; beyond it the factorial-ratio and
/// Laguerre magnitudes are no longer trustworthy without arbitrary precision.
pub const FOCK_CAP: usize = 4096;

/// Associated Laguerre polynomial L_n^m(x) for x ≥ 0.
pub fn laguerre_assoc(n: usize, m: usize, x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::InvalidInput(format!(
            "laguerre_assoc requires x >= 0, got {x}"
        )));
    }
    if n == 0 {
        return Ok(1.0);
    }
    let m = m as f64;
    let mut prev = 1.0; // L_0^m
    let mut cur = 1.0 + m - x; // L_1^m
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + m + 1.0 - x) * cur - (k + m) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// n!/(n+m)! as a running product; log space when n + m is large.
fn factorial_ratio(n: usize, m: usize) -> f64 {
    if n + m > 170 {
        let log_sum: f64 = (n + 1..=n + m).map(|k| (k as f64).ln()).sum();
        (-log_sum).exp()
    } else {
        (n + 1..=n + m).fold(1.0, |acc, k| acc / k as f64)
    }
}

/// Displacement matrix-element coefficient F_m(n) with a cap on n + m.
pub fn f_coeff_with_cap(m: usize, n: usize, lambda: f64, cap: usize) -> Result<f64> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidInput(format!(
            "f_coeff requires lambda >= 0, got {lambda}"
        )));
    }
    if n + m > cap {
        return Err(Error::InvalidInput(format!(
            "f_coeff overflow guard: n + m = {} exceeds cap {cap}",
            n + m
        )));
    }
    let x = lambda * lambda;
    Ok((-x / 2.0).exp() * lambda.powi(m as i32) * factorial_ratio(n, m) * laguerre_assoc(n, m, x)?)
}

/// F_m(n) = e^{−λ²/2} λ^m (n!/(n+m)!) L_n^m(λ²), capped at n + m ≤ [`FOCK_CAP`].
pub fn f_coeff(m: usize, n: usize, lambda: f64) -> Result<f64> {
    f_coeff_with_cap(m, n, lambda, FOCK_CAP)
}

/// Dense cache of F_m(n) for one λ: every block row re-reads these values,
/// so they are computed once per (λ, m) and shared immutably.
#[derive(Debug, Clone)]
pub struct FCoeffTable {
    lambda: f64,
    /// values[m][n] = F_m(n)
    values: Vec<Vec<f64>>,
}

impl FCoeffTable {
    /// Tabulate F_m(n) for m ≤ m_max, n ≤ n_max.
    pub fn new(lambda: f64, m_max: usize, n_max: usize) -> Result<Self> {
        let mut values = Vec::with_capacity(m_max + 1);
        for m in 0..=m_max {
            let mut row = Vec::with_capacity(n_max + 1);
            for n in 0..=n_max {
                row.push(f_coeff(m, n, lambda)?);
            }
            values.push(row);
        }
        Ok(FCoeffTable { lambda, values })
    }

    /// The λ this table was built for.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Cached F_m(n); panics on out-of-range indices (construction fixed them).
    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.values[m][n]
    }
}

/// Coherent-state weights ζ_n = e^{−α²/2} α^n / √(n!) for n = 0..=cutoff,
/// by the running product ζ_{n+1} = ζ_n α / √(n+1). Errors if the retained
/// weight Σ ζ_n² falls short of 1 by more than 1e−12 (cutoff too small).
/// Negative α is allowed (a displaced amplitude α − λ can be negative); the
/// weights then alternate in sign.
pub fn coherent_weights(alpha: f64, cutoff: usize) -> Result<Vec<f64>> {
    if !alpha.is_finite() {
        return Err(Error::InvalidInput(format!(
            "coherent_weights requires finite alpha, got {alpha}"
        )));
    }
    let mut z = Vec::with_capacity(cutoff + 1);
    let mut cur = (-alpha * alpha / 2.0).exp();
    let mut mass = 0.0;
    for n in 0..=cutoff {
        z.push(cur);
        mass += cur * cur;
        cur *= alpha / ((n + 1) as f64).sqrt();
    }
    if 1.0 - mass > 1e-12 {
        return Err(Error::NonConvergence(format!(
            "coherent-state cutoff {cutoff} too small for alpha = {alpha}: tail weight {:.3e}",
            1.0 - mass
        )));
    }
    Ok(z)
}
