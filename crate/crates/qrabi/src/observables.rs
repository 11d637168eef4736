//! Mean photon number ⟨a†a⟩ of the lab frame, evaluated on displaced-frame
//! eigenstates.
//!
//! In the displaced frame the lab-frame number operator becomes
//! ñ = a†a − λ J_z (a† + a) + λ² J_z², so every block eigenstate has a short
//! closed form. For the trial ground state |−1_x, 0⟩ the value is λ²/2
//! (⟨J_z²⟩ = 1/2 on |−1_x⟩). The conventional-GRWA ground value is the
//! closed form ½(1 + χ₀/√(χ₀² + 8)) g²/ω² with
//! χ₀ = √2 g²/(Ωω) e^{g²/(2ω²)}, always above the free-displacement value
//! g²/(2ω²), while the variational ground value λ²/2 sits below it.

use crate::model::ModelParams;
use crate::vgrwa::{
    adiabatic_block, assemble_spectrum, blocks_needed, grwa_block, grwa_block0, AdiabaticBlock,
    Block0, Displacement, GrwaBlock, LambdaStrategy, LevelOrigin,
};
use crate::{Error, Result};

/// χ₀ = √2 g²/(Ωω) e^{g²/(2ω²)}, the GRWA ground-sector mixing parameter.
pub fn chi0_grwa(params: &ModelParams) -> Result<f64> {
    if params.splitting <= 0.0 {
        return Err(Error::InvalidInput(
            "the GRWA ground photon formula requires a positive splitting".into(),
        ));
    }
    let g2 = params.coupling * params.coupling;
    let w2 = params.omega * params.omega;
    Ok(2.0_f64.sqrt() * g2 / (params.splitting * params.omega) * (g2 / (2.0 * w2)).exp())
}

/// Conventional-GRWA ground-state photon number ½(1 + χ₀/√(χ₀²+8)) g²/ω².
pub fn photon_ground_grwa(params: &ModelParams) -> Result<f64> {
    let chi0 = chi0_grwa(params)?;
    let g2 = params.coupling * params.coupling;
    let w2 = params.omega * params.omega;
    Ok(0.5 * (1.0 + chi0 / (chi0 * chi0 + 8.0).sqrt()) * g2 / w2)
}

/// Variational ground-state photon number λ²/2.
pub fn photon_ground_variational(disp: &Displacement) -> f64 {
    disp.lambda * disp.lambda / 2.0
}

/// Photon number of eigenstate j of the n = 0 block:
/// λ²/2 + (λ/√2 · c₀ − c₋₁)².
pub fn photon_manifold0(block0: &Block0, j: usize, disp: &Displacement) -> f64 {
    let l = disp.lambda;
    let c0 = block0.vectors[j][0];
    let cm1 = block0.vectors[j][1];
    let cross = l / 2.0_f64.sqrt() * c0 - cm1;
    l * l / 2.0 + cross * cross
}

/// Photon number of eigenstate j of the n-th block (n ≥ 1):
/// n + λ²/2 + (λ²/2)c₀² − c₁² + c₋₁² − √(2n) λ c₀c₁ − √(2(n+1)) λ c₀c₋₁.
pub fn photon_manifold_n(block: &GrwaBlock, j: usize, disp: &Displacement) -> f64 {
    let l = disp.lambda;
    let n = block.n as f64;
    let (c1, c0, cm1) = (
        block.vectors[j][0],
        block.vectors[j][1],
        block.vectors[j][2],
    );
    n + l * l / 2.0 + l * l / 2.0 * c0 * c0 - c1 * c1 + cm1 * cm1
        - (2.0 * n).sqrt() * l * c0 * c1
        - (2.0 * (n + 1.0)).sqrt() * l * c0 * cm1
}

/// Photon number of branch j of the adiabatic block at Fock level n:
/// n + λ² (½(v₁² + v₃²) + v₁v₃ + v₂²), all three spin components sharing
/// one Fock level so only J_z² contributes beyond n itself.
pub fn photon_adiabatic(block: &AdiabaticBlock, j: usize, disp: &Displacement) -> f64 {
    let l = disp.lambda;
    let v = &block.vectors[j];
    block.n as f64 + l * l * (0.5 * (v[0] * v[0] + v[2] * v[2]) + v[0] * v[2] + v[1] * v[1])
}

/// Photon numbers of the `count` lowest GRWA levels, in energy order.
pub fn photon_levels(
    params: &ModelParams,
    strategy: LambdaStrategy,
    count: usize,
) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::InvalidInput("level count must be >= 1".into()));
    }
    let n_blocks = blocks_needed(params, count);
    let disp = Displacement::new(params, strategy, n_blocks)?;
    let levels = assemble_spectrum(&disp, n_blocks)?;
    let block0 = grwa_block0(&disp);
    levels
        .iter()
        .take(count)
        .map(|level| match level.origin {
            LevelOrigin::Ground => Ok(photon_ground_variational(&disp)),
            LevelOrigin::Block0(j) => Ok(photon_manifold0(&block0, j, &disp)),
            LevelOrigin::Block(n, j) => {
                Ok(photon_manifold_n(&grwa_block(&disp, n)?, j, &disp))
            }
            LevelOrigin::Adiabatic(..) => unreachable!("GRWA spectrum carries no such levels"),
        })
        .collect()
}

/// Photon numbers of the `count` lowest adiabatic levels (λ = g/ω), in
/// energy order.
pub fn adiabatic_photon_levels(params: &ModelParams, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::InvalidInput("level count must be >= 1".into()));
    }
    let n_blocks = blocks_needed(params, count);
    let disp = Displacement::new(params, LambdaStrategy::GrwaFixed, n_blocks)?;
    let levels = crate::vgrwa::adiabatic_spectrum(&disp, n_blocks)?;
    Ok(levels
        .iter()
        .take(count)
        .map(|level| match level.origin {
            LevelOrigin::Adiabatic(n, j) => photon_adiabatic(&adiabatic_block(&disp, n), j, &disp),
            _ => unreachable!("adiabatic spectrum carries only adiabatic levels"),
        })
        .collect())
}

/// For each approximate energy, the index of the nearest exact energy
/// (energy-nearest matching; level crossings make index matching wrong).
pub fn match_levels(approx: &[f64], exact: &[f64]) -> Vec<usize> {
    approx
        .iter()
        .map(|a| {
            let mut best = 0;
            for (k, e) in exact.iter().enumerate() {
                if (a - e).abs() < (a - exact[best]).abs() {
                    best = k;
                }
            }
            best
        })
        .collect()
}

/// Mean absolute error between two equally long level lists, paired by index.
pub fn mean_abs_error(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ed_mean_photon_levels;
    use crate::model::{basis_index, dim, displaced_number_operator};
    use nalgebra::DVector;

    fn params(splitting: f64, coupling: f64) -> ModelParams {
        ModelParams::new(1.0, splitting, coupling).unwrap()
    }

    #[test]
    fn ground_variational_is_half_lambda_squared() {
        let d = Displacement::new(&params(2.0, 0.0), LambdaStrategy::ClosedForm, 1).unwrap();
        assert_eq!(photon_ground_variational(&d), 0.0);
        let d = Displacement::new(&params(2.0, 0.1), LambdaStrategy::ClosedForm, 1).unwrap();
        assert!((photon_ground_variational(&d) - 1.0 / 1800.0).abs() < 1e-15);
    }

    #[test]
    fn grwa_ground_formula_matches_frozen_values() {
        let p = params(2.0, 0.1);
        assert!((chi0_grwa(&p).unwrap() - 0.007106511686770691).abs() < 1e-15);
        assert!((photon_ground_grwa(&p).unwrap() - 0.005012562616858076).abs() < 1e-15);
        assert!(photon_ground_grwa(&params(0.0, 0.1)).is_err());
    }

    #[test]
    fn grwa_ground_always_exceeds_the_free_displacement_value() {
        for &g in &[0.05, 0.1, 0.5, 1.0] {
            for &splitting in &[0.5, 1.0, 2.0, 10.0] {
                let p = params(splitting, g);
                assert!(photon_ground_grwa(&p).unwrap() > g * g / 2.0);
            }
        }
        // Large splitting pushes it back down toward g²/2.
        let p = params(1e6, 0.1);
        let v = photon_ground_grwa(&p).unwrap();
        assert!(v > 0.005 && v - 0.005 < 1e-8);
    }

    #[test]
    fn ground_photon_ordering_brackets_the_exact_value() {
        // Frozen exact ground photon number at g = 0.1, splitting = 2.
        let exact = 0.0005606770431286644;
        let p = params(2.0, 0.1);
        let d = Displacement::new(&p, LambdaStrategy::ClosedForm, 1).unwrap();
        let var = photon_ground_variational(&d);
        let grwa = photon_ground_grwa(&p).unwrap();
        assert!(grwa > 0.005 && 0.005 > var);
        assert!((var - exact).abs() < (grwa - exact).abs());
    }

    #[test]
    fn manifold_formulas_recover_bare_fock_content_when_decoupled() {
        let d = Displacement::new(&params(2.0, 0.0), LambdaStrategy::ClosedForm, 2).unwrap();
        let b0 = grwa_block0(&d);
        // Ascending: j = 0 is |−1_x, 1⟩ (photon 1), j = 1 is |0_x, 0⟩.
        assert!((photon_manifold0(&b0, 0, &d) - 1.0).abs() < 1e-14);
        assert!(photon_manifold0(&b0, 1, &d).abs() < 1e-14);

        let b1 = grwa_block(&d, 1).unwrap();
        // Ascending at splitting 2: |−1_x,2⟩, |0_x,1⟩, |1_x,0⟩.
        assert!((photon_manifold_n(&b1, 0, &d) - 2.0).abs() < 1e-14);
        assert!((photon_manifold_n(&b1, 1, &d) - 1.0).abs() < 1e-14);
        assert!(photon_manifold_n(&b1, 2, &d).abs() < 1e-14);
    }

    /// ⟨state|op|state⟩ for a sparse product-basis state.
    fn operator_expectation(
        entries: &[(usize, usize, f64)],
        op: &nalgebra::DMatrix<f64>,
        n_max: usize,
    ) -> f64 {
        let mut psi = DVector::zeros(dim(n_max));
        for &(n, s, v) in entries {
            psi[basis_index(n, s)] = v;
        }
        psi.dot(&(op * &psi))
    }

    #[test]
    fn manifold_formulas_match_the_displaced_number_operator() {
        use crate::model::{S_MINUS_X, S_PLUS_X, S_ZERO_X};
        let p = params(1.0, 0.5);
        let d = Displacement::new(&p, LambdaStrategy::ExactRoot, 8).unwrap();
        let n_max = 30;
        let op = displaced_number_operator(d.lambda, n_max);

        let b0 = grwa_block0(&d);
        for j in 0..2 {
            let want = operator_expectation(
                &[
                    (0, S_ZERO_X, b0.vectors[j][0]),
                    (1, S_MINUS_X, b0.vectors[j][1]),
                ],
                &op,
                n_max,
            );
            let got = photon_manifold0(&b0, j, &d);
            assert!((got - want).abs() < 1e-12, "block0 j={j}: {got} vs {want}");
        }
        for n in 1..=8usize {
            let block = grwa_block(&d, n).unwrap();
            for j in 0..3 {
                let want = operator_expectation(
                    &[
                        (n - 1, S_PLUS_X, block.vectors[j][0]),
                        (n, S_ZERO_X, block.vectors[j][1]),
                        (n + 1, S_MINUS_X, block.vectors[j][2]),
                    ],
                    &op,
                    n_max,
                );
                let got = photon_manifold_n(&block, j, &d);
                assert!((got - want).abs() < 1e-12, "n={n} j={j}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn adiabatic_photon_matches_the_displaced_number_operator() {
        use crate::model::{S_MINUS_X, S_PLUS_X, S_ZERO_X};
        let p = params(0.1, 0.3);
        let d = Displacement::new(&p, LambdaStrategy::GrwaFixed, 6).unwrap();
        let n_max = 30;
        let op = displaced_number_operator(d.lambda, n_max);
        for n in 0..=6usize {
            let block = adiabatic_block(&d, n);
            for j in 0..3 {
                let want = operator_expectation(
                    &[
                        (n, S_PLUS_X, block.vectors[j][0]),
                        (n, S_ZERO_X, block.vectors[j][1]),
                        (n, S_MINUS_X, block.vectors[j][2]),
                    ],
                    &op,
                    n_max,
                );
                let got = photon_adiabatic(&block, j, &d);
                assert!((got - want).abs() < 1e-12, "n={n} j={j}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn level_photon_lists_track_the_exact_oracle_at_weak_coupling() {
        let p = params(2.0, 0.1);
        let approx = photon_levels(&p, LambdaStrategy::ClosedForm, 4).unwrap();
        let exact = ed_mean_photon_levels(&p, 120, 4).unwrap();
        for (k, (a, e)) in approx.iter().zip(exact.iter()).enumerate() {
            assert!((a - e).abs() < 0.02, "level {k}: {a} vs {e}");
        }
        assert!(photon_levels(&p, LambdaStrategy::ClosedForm, 0).is_err());
    }

    #[test]
    fn adiabatic_photon_levels_are_fock_numbers_plus_a_lambda_shift() {
        let p = params(0.5, 0.4);
        let vals = adiabatic_photon_levels(&p, 6).unwrap();
        assert_eq!(vals.len(), 6);
        for v in &vals {
            assert!(*v >= 0.0);
        }
        // Decoupled: plain Fock ladder photon numbers in energy order; the
        // 0.5-energy tie keeps the n = 0 branch first (stable sort).
        let vals = adiabatic_photon_levels(&params(0.5, 0.0), 4).unwrap();
        let want = [0.0, 0.0, 0.0, 1.0];
        for (got, want) in vals.iter().zip(want.iter()) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn nearest_energy_matching_handles_crossings() {
        assert_eq!(
            match_levels(&[1.0, 2.0, 3.1], &[0.9, 2.05, 3.0, 7.0]),
            vec![0, 1, 2]
        );
        assert_eq!(match_levels(&[1.0, 1.9], &[2.0, 1.0]), vec![1, 0]);
        assert!((mean_abs_error(&[1.0, 2.0], &[1.5, 1.0]) - 0.75).abs() < 1e-15);
    }
}
