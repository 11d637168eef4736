//! Solver library for the two-qubit quantum Rabi model
//!
//! H = ω a†a + Ω J_x + g J_z (a† + a)
//!
//! restricted to the spin-triplet (J = 1) sector; the singlet is decoupled
//! from the oscillator and is excluded from every basis. The crate provides
//!
//! * an exact-diagonalization benchmark in a truncated Fock basis
//!   ([`exact`]),
//! * the generalized rotating-wave approximation (GRWA) built on a displaced
//!   frame e^{λ J_z (a† − a)}, with the displacement λ either fixed at g/ω or
//!   chosen variationally by minimizing the trial ground-state energy
//!   ([`vgrwa`]),
//! * the adiabatic (zeroth-order displaced-frame) approximation ([`vgrwa`]),
//! * mean-photon-number observables in the displaced frame ([`observables`]),
//! * analytical dynamics of ⟨J_z⟩(t) and the qubit population P₋₁(t) from a
//!   coherent-state start ([`dynamics`]),
//! * a deterministic CLI with CSV/JSON output ([`cli`]) and a self-contained
//!   validation suite ([`validate`]).
//!
//! Throughout, ω is the oscillator frequency (docs use ω = 1 as the energy
//! unit), Ω the qubit splitting, and g the collective coupling.

pub mod cli;
pub mod dynamics;
pub mod exact;
pub mod model;
pub mod observables;
pub mod special;
pub mod validate;
pub mod vgrwa;

use std::sync::OnceLock;

/// Library error type. The CLI maps `InvalidInput` to exit code 2 and
/// `NonConvergence` (iteration caps, truncation/cutoff failures) to exit 3.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Invalid parameters or configuration.
    InvalidInput(String),
    /// An iterative routine failed to converge or a truncation check failed.
    NonConvergence(String),
}

impl std::fmt::Display for Error {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::NonConvergence(msg) => write!(f, "no convergence: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl Error {
    /// Process exit code the CLI uses for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) => 2,
            Error::NonConvergence(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Worker pool shared by parameter sweeps. `QRABI_THREADS` caps its size;
/// unset or unparsable values fall back to the number of available cores.
/// Sweep results are always gathered and re-sorted, so the pool size never
/// affects output bytes.
pub fn thread_pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = std::env::var("QRABI_THREADS")
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .filter(|&n| n >= 1)
        {
            builder = builder.num_threads(n);
        }
        builder
            .build()
            .expect("worker pool construction cannot fail with these settings")
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_display_and_exit_codes() {
        let e = Error::InvalidInput("bad g".into());
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("bad g"));
        let e = Error::NonConvergence("truncation".into());
        assert_eq!(e.exit_code(), 3);
        assert!(e.to_string().contains("truncation"));
    }

    #[test]
    fn thread_pool_is_usable() {
        let sum: i32 = thread_pool().install(|| (0..100).sum());
        assert_eq!(sum, 4950);
    }
}
