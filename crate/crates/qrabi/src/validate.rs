//! Property-based validation of the solver stack.
//!
//! Every check is an invariant the approximations must satisfy — variational
//! bounds, error dominance, closed-form/numeric equivalence, exact limits —
//! evaluated against the exact-diagonalization oracle built by this crate.
//! No external reference tables are involved. Each check also carries a
//! wall-clock budget; blowing the budget fails the check even when the
//! numbers are right.
//!
//! The [`Mutation`] hooks deliberately corrupt one constant inside a specific
//! invariant computation, so a healthy harness can be shown to detect a
//! broken implementation.

use std::str::FromStr;
use std::time::Instant;

use crate::dynamics::{exact_dynamics, grwa_dynamics, TimeGrid};
use crate::exact::{ed_mean_photon, ed_spectrum, eig_sym};
use crate::model::{displacement_cosh_sinh, ModelParams};
use crate::observables::{mean_abs_error, photon_ground_grwa, photon_ground_variational};
use crate::special::f_coeff;
use crate::vgrwa::{
    assemble_spectrum, blocks_needed, grwa_block, grwa_matrix, Displacement, LambdaStrategy,
};
use crate::{Error, Result};

/// Validation depth: `Fast` skips the 500-period dynamics run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    /// All checks except the long dynamics comparison; finishes in well
    /// under a minute.
    Fast,
    /// Every check, including dynamics RMS dominance over 500 periods.
    Full,
}

impl Level {
    /// The name used on the command line and in the report header.
    pub fn name(&self) -> &'static str {
        match self {
            Level::Fast => "fast",
            Level::Full => "full",
        }
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Level> {
        match s {
            "fast" => Ok(Level::Fast),
            "full" => Ok(Level::Full),
            other => Err(Error::InvalidInput(format!(
                "unknown validation level '{other}' (expected fast or full)"
            ))),
        }
    }
}

/// Intentional corruption hooks for harness self-tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    /// Halve the closed-form ground-photon coefficient inside the photon
    /// invariants; `photon-ordering` and `large-splitting-asymptote` must
    /// then fail.
    PhotonGrwaCoeff,
    /// Shift the closed-form block eigenvalues by one part in 10⁶ inside
    /// the block-equivalence invariant; `block-equivalence` must then fail.
    CubicTheta,
}

impl Mutation {
    /// The key used on the command line and in the report header.
    pub fn key(&self) -> &'static str {
        match self {
            Mutation::PhotonGrwaCoeff => "photon-grwa-coeff",
            Mutation::CubicTheta => "cubic-theta",
        }
    }
}

impl FromStr for Mutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Mutation> {
        match s {
            "photon-grwa-coeff" => Ok(Mutation::PhotonGrwaCoeff),
            "cubic-theta" => Ok(Mutation::CubicTheta),
            other => Err(Error::InvalidInput(format!(
                "unknown mutation key '{other}' (expected photon-grwa-coeff or cubic-theta)"
            ))),
        }
    }
}

/// Result of one invariant check.
#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    /// Stable invariant identifier, named in the report on failure.
    pub id: &'static str,
    /// 1-based position in the report.
    pub index: usize,
    /// Whether the invariant held within its runtime budget.
    pub passed: bool,
    /// True when the level skipped this check entirely.
    pub skipped: bool,
    /// Margins achieved, or the reason for failure.
    pub detail: String,
    /// Wall-clock seconds spent on the check.
    pub seconds: f64,
}

/// A full validation run.
#[derive(Debug, Clone)]
pub struct Report {
    /// The level the run was invoked at.
    pub level: Level,
    /// The corruption hook that was active, if any.
    pub mutation: Option<Mutation>,
    /// One outcome per invariant, in report order.
    pub outcomes: Vec<CriterionOutcome>,
}

impl Report {
    /// True when every non-skipped invariant held.
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.skipped || o.passed)
    }

    /// Identifiers of the invariants that failed.
    pub fn failed_ids(&self) -> Vec<&'static str> {
        self.outcomes
            .iter()
            .filter(|o| !o.skipped && !o.passed)
            .map(|o| o.id)
            .collect()
    }

    /// Human-readable report, one line per invariant.
    pub fn render(&self) -> String {
        let mut out = format!("solver validation ({} level)\n", self.level.name());
        if let Some(m) = self.mutation {
            out.push_str(&format!(
                "mutation hook active: {} (intentional corruption; a failure below is expected)\n",
                m.key()
            ));
        }
        out.push_str(
            "checks are property-based invariants — orderings, variational bounds,\n\
             closed-form/numeric equivalences, and RMS error dominance — evaluated\n\
             against the exact-diagonalization oracle built by this crate; no\n\
             external reference tables are involved.\n\n",
        );
        for o in &self.outcomes {
            let status = if o.skipped {
                "SKIP"
            } else if o.passed {
                "PASS"
            } else {
                "FAIL"
            };
            out.push_str(&format!(
                "{status}  {} {:<26} {:>7.2}s  {}\n",
                o.index, o.id, o.seconds, o.detail
            ));
        }
        let checked = self.outcomes.iter().filter(|o| !o.skipped).count();
        let skipped = self.outcomes.len() - checked;
        let failed = self.failed_ids();
        if failed.is_empty() {
            out.push_str(&format!(
                "\nresult: PASS ({checked} checked, {skipped} skipped)\n"
            ));
        } else {
            out.push_str(&format!(
                "\nresult: FAIL — failed invariants: {}\n",
                failed.join(", ")
            ));
        }
        out
    }
}

/// Time one invariant body and fold its runtime budget into the verdict.
fn run_criterion(
    index: usize,
    id: &'static str,
    budget_seconds: f64,
    body: impl FnOnce() -> Result<(bool, String)>,
) -> CriterionOutcome {
    let started = Instant::now();
    let (mut passed, mut detail) = match body() {
        Ok(outcome) => outcome,
        Err(e) => (false, format!("errored: {e}")),
    };
    let seconds = started.elapsed().as_secs_f64();
    // Budgets describe the optimized artifact; unoptimized test builds get
    // a 4x allowance so the build profile cannot flip a verdict.
    let allowed = if cfg!(debug_assertions) {
        budget_seconds * 4.0
    } else {
        budget_seconds
    };
    if passed && seconds > allowed {
        passed = false;
        detail = format!("{detail}; runtime {seconds:.1}s exceeded the {budget_seconds:.0}s budget");
    }
    CriterionOutcome {
        id,
        index,
        passed,
        skipped: false,
        detail,
        seconds,
    }
}

/// The shared coupling/splitting grid: g ∈ {0.1, …, 1.0} × S ∈ {0.5, 1, 2, 5}.
fn coupling_grid() -> Result<Vec<ModelParams>> {
    let mut grid = Vec::with_capacity(40);
    for i in 1..=10 {
        let coupling = f64::from(i) * 0.1;
        for &splitting in &[0.5, 1.0, 2.0, 5.0] {
            grid.push(ModelParams::new(1.0, splitting, coupling)?);
        }
    }
    Ok(grid)
}

/// Ground energies must be ordered ED ≤ exact-root ≤ closed-form ≤ fixed λ.
fn criterion_variational_bound() -> Result<(bool, String)> {
    let mut worst_ed = f64::NEG_INFINITY;
    let mut worst_root = f64::NEG_INFINITY;
    let mut worst_closed = f64::NEG_INFINITY;
    for params in coupling_grid()? {
        let e_ed = ed_spectrum(&params, 120, 1)?[0];
        let ground = |strategy| -> Result<f64> {
            Ok(Displacement::new(&params, strategy, 1)?.ground_energy())
        };
        let e_root = ground(LambdaStrategy::ExactRoot)?;
        let e_closed = ground(LambdaStrategy::ClosedForm)?;
        let e_fixed = ground(LambdaStrategy::GrwaFixed)?;
        worst_ed = worst_ed.max(e_ed - e_root);
        worst_root = worst_root.max(e_root - e_closed);
        worst_closed = worst_closed.max(e_closed - e_fixed);
    }
    let passed = worst_ed <= 1e-9 && worst_root <= 1e-12 && worst_closed <= 1e-12;
    Ok((
        passed,
        format!(
            "40 grid points: max(E_ed − E_exact-root) = {worst_ed:.3e} (tol 1e-9), \
             max(E_exact-root − E_closed-form) = {worst_root:.3e} (tol 1e-12), \
             max(E_closed-form − E_grwa) = {worst_closed:.3e} (tol 1e-12)"
        ),
    ))
}

/// The variational spectrum must beat the fixed-λ one in MAE over the 7
/// lowest levels at S = 2 for each strong coupling; the achieved MAE values
/// are recorded in the report.
fn criterion_spectrum_improvement() -> Result<(bool, String)> {
    let mut passed = true;
    let mut details = Vec::new();
    for &coupling in &[0.4, 0.6, 0.8, 1.0] {
        let params = ModelParams::new(1.0, 2.0, coupling)?;
        let exact = ed_spectrum(&params, 120, 7)?;
        let mae = |strategy| -> Result<f64> {
            let n_blocks = blocks_needed(&params, 7);
            let disp = Displacement::new(&params, strategy, n_blocks)?;
            let energies: Vec<f64> = assemble_spectrum(&disp, n_blocks)?
                .iter()
                .take(7)
                .map(|level| level.energy)
                .collect();
            Ok(mean_abs_error(&energies, &exact))
        };
        let mae_variational = mae(LambdaStrategy::ClosedForm)?;
        let mae_fixed = mae(LambdaStrategy::GrwaFixed)?;
        passed &= mae_variational < mae_fixed;
        details.push(format!(
            "g={coupling}: MAE vgrwa {mae_variational:.3e} vs grwa {mae_fixed:.3e}"
        ));
    }
    Ok((passed, details.join("; ")))
}

/// At g = 0.1 the ground photon numbers must straddle g²/(2ω²) from the
/// right sides, and the variational value must beat the fixed-λ one against
/// the exact oracle for every splitting ≥ 1.
fn criterion_photon_ordering(mutation: Option<Mutation>) -> Result<(bool, String)> {
    let coupling = 0.1;
    let reference = coupling * coupling / 2.0;
    let mut min_above = f64::INFINITY;
    let mut min_below = f64::INFINITY;
    let mut worst_ratio = 0.0f64;
    for i in 1..=20 {
        let splitting = 0.5 * f64::from(i);
        let params = ModelParams::new(1.0, splitting, coupling)?;
        let mut fixed = photon_ground_grwa(&params)?;
        if mutation == Some(Mutation::PhotonGrwaCoeff) {
            fixed *= 0.5;
        }
        let disp = Displacement::new(&params, LambdaStrategy::ClosedForm, 1)?;
        let variational = photon_ground_variational(&disp);
        min_above = min_above.min(fixed - reference);
        min_below = min_below.min(reference - variational);
        if min_above < 1e-12 || min_below < 1e-12 {
            return Ok((
                false,
                format!(
                    "ordering broken at splitting {splitting}: photon_grwa − g²/2ω² = {:.3e}, \
                     g²/2ω² − photon_variational = {:.3e} (both must exceed 1e-12)",
                    fixed - reference,
                    reference - variational
                ),
            ));
        }
        if splitting >= 1.0 {
            let exact = ed_mean_photon(&params, 200)?;
            let gap_variational = (variational - exact).abs();
            let gap_fixed = (fixed - exact).abs();
            if gap_variational >= gap_fixed {
                return Ok((
                    false,
                    format!(
                        "accuracy lost at splitting {splitting}: |vgrwa − ed| = \
                         {gap_variational:.3e} vs |grwa − ed| = {gap_fixed:.3e}"
                    ),
                ));
            }
            worst_ratio = worst_ratio.max(gap_variational / gap_fixed);
        }
    }
    Ok((
        true,
        format!(
            "20 splittings in [0.5, 10]: min(photon_grwa − g²/2ω²) = {min_above:.3e}, \
             min(g²/2ω² − photon_variational) = {min_below:.3e}, \
             worst |vgrwa − ed| / |grwa − ed| = {worst_ratio:.3}"
        ),
    ))
}

/// At g = 0.1, S = 100 the variational photon estimate must collapse toward
/// zero while the fixed-λ one stays pinned near g²/(2ω²), matching the exact
/// oracle's behaviour.
fn criterion_large_splitting(mutation: Option<Mutation>) -> Result<(bool, String)> {
    let params = ModelParams::new(1.0, 100.0, 0.1)?;
    let disp = Displacement::new(&params, LambdaStrategy::ClosedForm, 1)?;
    let variational = photon_ground_variational(&disp);
    let mut fixed = photon_ground_grwa(&params)?;
    if mutation == Some(Mutation::PhotonGrwaCoeff) {
        fixed *= 0.5;
    }
    let exact = ed_mean_photon(&params, 200)?;
    let passed = variational < 1e-5 && (fixed - 0.005).abs() < 1e-4 && exact < 1e-4;
    Ok((
        passed,
        format!(
            "splitting 100: photon_variational = {variational:.3e} (tol 1e-5), \
             photon_grwa = {fixed:.6} (within 1e-4 of 0.005), \
             photon_ed = {exact:.3e} (tol 1e-4)"
        ),
    ))
}

/// Over 500 splitting periods the variational dynamics must dominate the
/// fixed-λ dynamics in RMS distance to the exact run, for both observables.
fn criterion_dynamics_dominance() -> Result<(bool, String)> {
    let params = ModelParams::new(1.0, 2.0, 0.2)?;
    let grid = TimeGrid::from_periods(params.splitting, 500.0, 4096)?;
    let alpha = 2.0;
    let variational = grwa_dynamics(&params, LambdaStrategy::ClosedForm, alpha, &grid)?;
    let fixed = grwa_dynamics(&params, LambdaStrategy::GrwaFixed, alpha, &grid)?;
    let exact = exact_dynamics(&params, alpha, &grid, 200)?;
    let rms = |a: &[f64], b: &[f64]| {
        let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
        (sum / a.len() as f64).sqrt()
    };
    let jz_variational = rms(&variational.series.jz, &exact.jz);
    let jz_fixed = rms(&fixed.series.jz, &exact.jz);
    let p_variational = rms(&variational.series.p_minus1, &exact.p_minus1);
    let p_fixed = rms(&fixed.series.p_minus1, &exact.p_minus1);
    let drift = variational.norm_drift.max(fixed.norm_drift);
    let passed = jz_variational < jz_fixed && p_variational < p_fixed && drift < 1e-12;
    Ok((
        passed,
        format!(
            "500 periods, 4096 samples: RMS jz vgrwa {jz_variational:.3e} vs grwa \
             {jz_fixed:.3e}; RMS p_minus1 vgrwa {p_variational:.3e} vs grwa \
             {p_fixed:.3e}; norm drift {drift:.3e} (tol 1e-12)"
        ),
    ))
}

/// Closed-form block eigenpairs must agree with direct 3×3 numeric
/// diagonalization for every block n ≤ 20 across the coupling grid.
fn criterion_block_equivalence(mutation: Option<Mutation>) -> Result<(bool, String)> {
    let bias = if mutation == Some(Mutation::CubicTheta) {
        1e-6
    } else {
        0.0
    };
    let mut max_gap = 0.0f64;
    let mut max_residual = 0.0f64;
    for params in coupling_grid()? {
        for strategy in [LambdaStrategy::ClosedForm, LambdaStrategy::GrwaFixed] {
            let disp = Displacement::new(&params, strategy, 20)?;
            for n in 1..=20 {
                let block = grwa_block(&disp, n)?;
                let m3 = grwa_matrix(&disp, n)?;
                let dense = nalgebra::DMatrix::from_fn(3, 3, |i, j| m3[(i, j)]);
                let numeric = eig_sym(&dense)?;
                for j in 0..3 {
                    let energy = block.values[j] + bias * (1.0 + block.values[j].abs());
                    max_gap = max_gap.max((energy - numeric.values[j]).abs());
                    let residual = m3 * block.vectors[j] - energy * block.vectors[j];
                    max_residual = max_residual.max(residual.norm());
                }
            }
        }
    }
    let passed = max_gap < 1e-10 && max_residual < 1e-10;
    Ok((
        passed,
        format!(
            "40 grid points × 2 displacement choices × blocks n ≤ 20: \
             max |E_closed − E_numeric| = {max_gap:.3e}, \
             max eigenvector residual = {max_residual:.3e} (tol 1e-10)"
        ),
    ))
}

/// F_m(n) values must reproduce truncated-Fock displacement-operator matrix
/// elements: ⟨n+m|e^{λ(a†−a)}|n⟩ = √((n+m)!/n!) F_m(n).
fn criterion_displacement_oracle() -> Result<(bool, String)> {
    let mut max_gap = 0.0f64;
    for &lambda in &[0.1, 0.5, 1.0] {
        let (cosh, sinh) = displacement_cosh_sinh(lambda, 80)?;
        let d = &cosh + &sinh;
        for n in 0..=20usize {
            for m in 0..=4usize {
                let ratio: f64 = (n + 1..=n + m).map(|k| k as f64).product();
                let want = ratio.sqrt() * f_coeff(m, n, lambda)?;
                max_gap = max_gap.max((d[(n + m, n)] - want).abs());
            }
        }
    }
    Ok((
        max_gap < 1e-10,
        format!(
            "n ≤ 20, m ≤ 4, λ ∈ {{0.1, 0.5, 1.0}}: \
             max |⟨n+m|D|n⟩ − √((n+m)!/n!) F_m(n)| = {max_gap:.3e} (tol 1e-10)"
        ),
    ))
}

/// At g = 0 the analytic dynamics must reduce to free spin precession:
/// J_z(t) = −cos(St) and P₋₁(t) = cos⁴(St/2).
fn criterion_decoupled_limit() -> Result<(bool, String)> {
    let params = ModelParams::new(1.0, 2.0, 0.0)?;
    let grid = TimeGrid::from_periods(params.splitting, 100.0, 2048)?;
    let run = grwa_dynamics(&params, LambdaStrategy::ClosedForm, 2.0, &grid)?;
    let mut max_jz = 0.0f64;
    let mut max_p = 0.0f64;
    for (i, &t) in grid.times.iter().enumerate() {
        let st = params.splitting * t;
        max_jz = max_jz.max((run.series.jz[i] + st.cos()).abs());
        max_p = max_p.max((run.series.p_minus1[i] - (st / 2.0).cos().powi(4)).abs());
    }
    Ok((
        max_jz < 1e-9 && max_p < 1e-9,
        format!(
            "100 decoupled periods: max |jz + cos(St)| = {max_jz:.3e}, \
             max |p_minus1 − cos⁴(St/2)| = {max_p:.3e} (tol 1e-9)"
        ),
    ))
}

/// Run every invariant at the given level, with an optional corruption hook.
pub fn run_validation(level: Level, mutation: Option<Mutation>) -> Report {
    let mut outcomes = Vec::with_capacity(8);
    outcomes.push(run_criterion(
        1,
        "variational-bound",
        10.0,
        criterion_variational_bound,
    ));
    outcomes.push(run_criterion(
        2,
        "spectrum-improvement",
        30.0,
        criterion_spectrum_improvement,
    ));
    outcomes.push(run_criterion(3, "photon-ordering", 20.0, || {
        criterion_photon_ordering(mutation)
    }));
    outcomes.push(run_criterion(4, "large-splitting-asymptote", 5.0, || {
        criterion_large_splitting(mutation)
    }));
    if level == Level::Full {
        outcomes.push(run_criterion(
            5,
            "dynamics-dominance",
            120.0,
            criterion_dynamics_dominance,
        ));
    } else {
        outcomes.push(CriterionOutcome {
            id: "dynamics-dominance",
            index: 5,
            passed: true,
            skipped: true,
            detail: "skipped at fast level (500-period dynamics run)".into(),
            seconds: 0.0,
        });
    }
    outcomes.push(run_criterion(6, "block-equivalence", 5.0, || {
        criterion_block_equivalence(mutation)
    }));
    outcomes.push(run_criterion(
        7,
        "displacement-oracle",
        10.0,
        criterion_displacement_oracle,
    ));
    outcomes.push(run_criterion(
        8,
        "decoupled-limit",
        5.0,
        criterion_decoupled_limit,
    ));
    Report {
        level,
        mutation,
        outcomes,
    }
}
