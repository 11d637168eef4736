//! Model definition: a spin-1 triplet coupled to one oscillator mode.
//!
//! H = ω a†a + Ω J_x + g J_z (a† + a)
//!
//! Everything is expressed in the J_x eigenbasis ordered (|1_x⟩, |0_x⟩,
//! |−1_x⟩), where J_x is diagonal and J_z, iJ_y are real. Combined with real
//! Fock amplitudes this keeps every operator in the crate a real symmetric
//! matrix. Product-basis states are Fock-major: index 3n + s.
//!
//! The displaced frame is reached with U = e^{λ J_z (a† − a)}, under which
//! U a U† = a − λ J_z and
//!
//! H̃ = U H U† = ω a†a + (λ²ω − 2gλ) J_z² + (g − λω) J_z (a† + a)
//!            + Ω [cosh(λ(a† − a)) J_x + sinh(λ(a† − a)) iJ_y].
//!
//! cosh/sinh of the antisymmetric generator are evaluated exactly (within
//! roundoff) in the truncated Fock space through the quadrature identity
//! a† − a = T (i(a† + a)) T⁻¹ with T = diag(iⁿ), which maps them onto
//! cos/sin of the real symmetric operator a† + a.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::exact::eig_sym;
use crate::{Error, Result};

/// Spin component index of |1_x⟩ within a product-basis block.
pub const S_PLUS_X: usize = 0;
/// Spin component index of |0_x⟩.
pub const S_ZERO_X: usize = 1;
/// Spin component index of |−1_x⟩.
pub const S_MINUS_X: usize = 2;

/// Model parameters (ω, Ω, g), all in units of ω when ω = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Oscillator frequency ω > 0.
    pub omega: f64,
    /// Spin level splitting Ω ≥ 0.
    pub splitting: f64,
    /// Spin–oscillator coupling g ≥ 0.
    pub coupling: f64,
}

impl ModelParams {
    /// Validated constructor; ω must be positive, Ω and g non-negative.
    pub fn new(omega: f64, splitting: f64, coupling: f64) -> Result<Self> {
        if !omega.is_finite() || omega <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "oscillator frequency must be positive, got {omega}"
            )));
        }
        if !splitting.is_finite() || splitting < 0.0 {
            return Err(Error::InvalidInput(format!(
                "level splitting must be non-negative, got {splitting}"
            )));
        }
        if !coupling.is_finite() || coupling < 0.0 {
            return Err(Error::InvalidInput(format!(
                "coupling must be non-negative, got {coupling}"
            )));
        }
        Ok(ModelParams {
            omega,
            splitting,
            coupling,
        })
    }
}

/// Spin-1 operators and z-basis states, all in the ordered x basis
/// (|1_x⟩, |0_x⟩, |−1_x⟩).
pub struct SpinTriplet;

impl SpinTriplet {
    /// J_x = diag(1, 0, −1).
    pub fn jx() -> Matrix3<f64> {
        Matrix3::from_diagonal(&Vector3::new(1.0, 0.0, -1.0))
    }

    /// J_z (real symmetric in the x basis).
    pub fn jz() -> Matrix3<f64> {
        let r = 1.0 / 2.0_f64.sqrt();
        Matrix3::new(0.0, r, 0.0, r, 0.0, r, 0.0, r, 0.0)
    }

    /// iJ_y (real antisymmetric in the x basis).
    pub fn i_jy() -> Matrix3<f64> {
        let r = 1.0 / 2.0_f64.sqrt();
        Matrix3::new(0.0, -r, 0.0, r, 0.0, -r, 0.0, r, 0.0)
    }

    /// J_z².
    pub fn jz2() -> Matrix3<f64> {
        Self::jz() * Self::jz()
    }

    /// Ladder combination Ĵ₊ = (Ĵ_z − iĴ_y)/2, raising the J_x quantum
    /// number (half the conventional raising-operator normalization).
    pub fn jplus() -> Matrix3<f64> {
        (Self::jz() - Self::i_jy()) * 0.5
    }

    /// Ladder combination Ĵ₋ = (Ĵ_z + iĴ_y)/2 = Ĵ₊ᵀ.
    pub fn jminus() -> Matrix3<f64> {
        (Self::jz() + Self::i_jy()) * 0.5
    }

    /// |1_z⟩ in the x basis.
    pub fn plus1_z() -> Vector3<f64> {
        let r = 1.0 / 2.0_f64.sqrt();
        Vector3::new(0.5, r, 0.5)
    }

    /// |0_z⟩ in the x basis.
    pub fn zero_z() -> Vector3<f64> {
        let r = 1.0 / 2.0_f64.sqrt();
        Vector3::new(r, 0.0, -r)
    }

    /// |−1_z⟩ in the x basis.
    pub fn minus1_z() -> Vector3<f64> {
        let r = 1.0 / 2.0_f64.sqrt();
        Vector3::new(0.5, -r, 0.5)
    }
}

/// Product-basis index of |spin s⟩ ⊗ |Fock n⟩ (Fock-major).
pub fn basis_index(n: usize, s: usize) -> usize {
    3 * n + s
}

/// Total matrix dimension for Fock levels 0..=n_max.
pub fn dim(n_max: usize) -> usize {
    3 * (n_max + 1)
}

/// Number operator a†a on Fock levels 0..=n_max.
pub fn fock_number(n_max: usize) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_iterator(
        n_max + 1,
        (0..=n_max).map(|n| n as f64),
    ))
}

/// Quadrature a + a† on Fock levels 0..=n_max.
pub fn fock_position(n_max: usize) -> DMatrix<f64> {
    let dim = n_max + 1;
    let mut x = DMatrix::zeros(dim, dim);
    for n in 0..n_max {
        let v = ((n + 1) as f64).sqrt();
        x[(n, n + 1)] = v;
        x[(n + 1, n)] = v;
    }
    x
}

/// out += coeff · (fock ⊗ spin) in the Fock-major product basis.
fn add_kron(out: &mut DMatrix<f64>, coeff: f64, fock: &DMatrix<f64>, spin: &Matrix3<f64>) {
    let nf = fock.nrows();
    for i in 0..nf {
        for j in 0..nf {
            let fij = fock[(i, j)];
            if fij == 0.0 {
                continue;
            }
            for a in 0..3 {
                for b in 0..3 {
                    let sab = spin[(a, b)];
                    if sab != 0.0 {
                        out[(3 * i + a, 3 * j + b)] += coeff * fij * sab;
                    }
                }
            }
        }
    }
}

/// fock ⊗ spin in the Fock-major product basis.
pub fn kron_fock_spin(fock: &DMatrix<f64>, spin: &Matrix3<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(3 * fock.nrows(), 3 * fock.ncols());
    add_kron(&mut out, 1.0, fock, spin);
    out
}

/// Full Hamiltonian ω a†a + Ω J_x + g J_z (a† + a) truncated at n_max.
pub fn build_hamiltonian(params: &ModelParams, n_max: usize) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(dim(n_max), dim(n_max));
    add_kron(&mut h, params.omega, &fock_number(n_max), &Matrix3::identity());
    add_kron(
        &mut h,
        params.splitting,
        &DMatrix::identity(n_max + 1, n_max + 1),
        &SpinTriplet::jx(),
    );
    add_kron(
        &mut h,
        params.coupling,
        &fock_position(n_max),
        &SpinTriplet::jz(),
    );
    h
}

/// cosh and sinh of λ(a† − a) on Fock levels 0..=n_max.
///
/// Diagonalizing the real symmetric X = a + a† = VΛVᵀ gives
/// cos(λX) = V cos(λΛ) Vᵀ and sin(λX) = V sin(λΛ) Vᵀ; conjugation with
/// T = diag(iⁿ) turns these into the cosh/sinh of the antisymmetric
/// generator, which keeps the whole computation inside real symmetric
/// eigensolves. Entry (j, k) picks up Re(i^{k−j}) or Re(i^{k−j+1}).
pub fn displacement_cosh_sinh(lambda: f64, n_max: usize) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if !lambda.is_finite() {
        return Err(Error::InvalidInput(format!(
            "displacement requires finite lambda, got {lambda}"
        )));
    }
    let eig = eig_sym(&fock_position(n_max))?;
    let nf = n_max + 1;
    let cos_l = DMatrix::from_diagonal(&DVector::from_iterator(
        nf,
        eig.values.iter().map(|e| (lambda * e).cos()),
    ));
    let sin_l = DMatrix::from_diagonal(&DVector::from_iterator(
        nf,
        eig.values.iter().map(|e| (lambda * e).sin()),
    ));
    let c = &eig.vectors * cos_l * eig.vectors.transpose();
    let s = &eig.vectors * sin_l * eig.vectors.transpose();
    let mut cosh = DMatrix::zeros(nf, nf);
    let mut sinh = DMatrix::zeros(nf, nf);
    for j in 0..nf {
        for k in 0..nf {
            match (k as i64 - j as i64).rem_euclid(4) {
                0 => cosh[(j, k)] = c[(j, k)],
                2 => cosh[(j, k)] = -c[(j, k)],
                _ => {}
            }
            match (k as i64 - j as i64 + 1).rem_euclid(4) {
                0 => sinh[(j, k)] = s[(j, k)],
                2 => sinh[(j, k)] = -s[(j, k)],
                _ => {}
            }
        }
    }
    Ok((cosh, sinh))
}

/// Displaced-frame Hamiltonian H̃ = U H U† truncated at n_max.
pub fn build_transformed_hamiltonian(
    params: &ModelParams,
    lambda: f64,
    n_max: usize,
) -> Result<DMatrix<f64>> {
    let (cosh, sinh) = displacement_cosh_sinh(lambda, n_max)?;
    let nf = n_max + 1;
    let mut h = DMatrix::zeros(dim(n_max), dim(n_max));
    add_kron(&mut h, params.omega, &fock_number(n_max), &Matrix3::identity());
    add_kron(
        &mut h,
        lambda * lambda * params.omega - 2.0 * params.coupling * lambda,
        &DMatrix::identity(nf, nf),
        &SpinTriplet::jz2(),
    );
    add_kron(
        &mut h,
        params.coupling - lambda * params.omega,
        &fock_position(n_max),
        &SpinTriplet::jz(),
    );
    add_kron(&mut h, params.splitting, &cosh, &SpinTriplet::jx());
    add_kron(&mut h, params.splitting, &sinh, &SpinTriplet::i_jy());
    Ok(h)
}

/// U a†a U† = a†a − λ J_z (a† + a) + λ² J_z²: the lab-frame photon number
/// expressed in the displaced frame.
pub fn displaced_number_operator(lambda: f64, n_max: usize) -> DMatrix<f64> {
    let nf = n_max + 1;
    let mut op = kron_fock_spin(&fock_number(n_max), &Matrix3::identity());
    add_kron(&mut op, -lambda, &fock_position(n_max), &SpinTriplet::jz());
    add_kron(
        &mut op,
        lambda * lambda,
        &DMatrix::identity(nf, nf),
        &SpinTriplet::jz2(),
    );
    op
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::eig_sym_values;
    use crate::special::{coherent_weights, f_coeff};

    fn max_abs(m: &DMatrix<f64>) -> f64 {
        m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    #[test]
    fn spin_algebra_holds() {
        let jx = SpinTriplet::jx();
        let jz = SpinTriplet::jz();
        let k = SpinTriplet::i_jy(); // k = iJ_y

        // [J_x, iJ_y] = -J_z and [J_z, iJ_y] = J_x
        assert!(((jx * k - k * jx) + jz).abs().max() < 1e-15);
        assert!(((jz * k - k * jz) - jx).abs().max() < 1e-15);
        // J_x^2 + J_y^2 + J_z^2 = 2 I with J_y^2 = -(iJ_y)^2
        let casimir = jx * jx - k * k + jz * jz;
        assert!((casimir - 2.0 * Matrix3::<f64>::identity()).abs().max() < 1e-15);
        // J_z^2 is what jz2() returns
        assert!((SpinTriplet::jz2() - jz * jz).abs().max() < 1e-15);
    }

    #[test]
    fn ladder_operators_shift_jx_by_one() {
        let jx = SpinTriplet::jx();
        let jp = SpinTriplet::jplus();
        let jm = SpinTriplet::jminus();
        // [J_x, J_±] = ±J_± (halving both sides leaves this intact).
        assert!(((jx * jp - jp * jx) - jp).abs().max() < 1e-15);
        assert!(((jx * jm - jm * jx) + jm).abs().max() < 1e-15);
        assert!((jm - jp.transpose()).abs().max() < 1e-15);
        // They resolve J_z: J_+ + J_- = J_z.
        assert!(((jp + jm) - SpinTriplet::jz()).abs().max() < 1e-15);
    }

    #[test]
    fn z_basis_states_diagonalize_jz() {
        let jz = SpinTriplet::jz();
        for (state, m) in [
            (SpinTriplet::plus1_z(), 1.0),
            (SpinTriplet::zero_z(), 0.0),
            (SpinTriplet::minus1_z(), -1.0),
        ] {
            assert!((state.norm() - 1.0).abs() < 1e-15);
            assert!((jz * state - m * state).norm() < 1e-15, "m = {m}");
        }
        // Mutually orthogonal
        assert!(SpinTriplet::plus1_z().dot(&SpinTriplet::minus1_z()).abs() < 1e-15);
        assert!(SpinTriplet::plus1_z().dot(&SpinTriplet::zero_z()).abs() < 1e-15);
    }

    #[test]
    fn params_are_validated() {
        assert!(ModelParams::new(1.0, 2.0, 0.5).is_ok());
        assert!(ModelParams::new(0.0, 2.0, 0.5).is_err());
        assert!(ModelParams::new(1.0, -0.1, 0.5).is_err());
        assert!(ModelParams::new(1.0, 2.0, -0.5).is_err());
        assert!(ModelParams::new(f64::NAN, 2.0, 0.5).is_err());
    }

    #[test]
    fn basis_index_is_fock_major() {
        assert_eq!(basis_index(0, S_PLUS_X), 0);
        assert_eq!(basis_index(0, S_MINUS_X), 2);
        assert_eq!(basis_index(2, S_ZERO_X), 7);
        assert_eq!(dim(10), 33);
        assert_eq!(dim(200), 603);
    }

    #[test]
    fn hamiltonian_is_symmetric_and_decouples_at_zero_coupling() {
        let params = ModelParams::new(1.0, 2.0, 0.0).unwrap();
        let h = build_hamiltonian(&params, 40);
        assert!(max_abs(&(h.clone() - h.transpose())) < 1e-15);

        // Spectrum must be {omega n + splitting m : m = -1, 0, 1}.
        let vals = eig_sym_values(&h).unwrap();
        let mut want: Vec<f64> = Vec::new();
        for n in 0..=40 {
            for m in [-1.0, 0.0, 1.0] {
                want.push(n as f64 + 2.0 * m);
            }
        }
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in vals.iter().zip(want.iter()).take(60) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn displacement_columns_are_coherent_states() {
        // (cosh + sinh) e_0 is the coherent state |lambda> in the Fock basis.
        let lambda = 0.8;
        let (cosh, sinh) = displacement_cosh_sinh(lambda, 60).unwrap();
        let d = &cosh + &sinh;
        let weights = coherent_weights(lambda, 60).unwrap();
        for n in 0..=50 {
            assert!(
                (d[(n, 0)] - weights[n]).abs() < 1e-13,
                "entry {n}: {} vs {}",
                d[(n, 0)],
                weights[n]
            );
        }
    }

    #[test]
    fn displacement_is_orthogonal_with_even_odd_parts() {
        let (cosh, sinh) = displacement_cosh_sinh(0.6, 50).unwrap();
        // cosh is symmetric, sinh antisymmetric.
        assert!(max_abs(&(cosh.clone() - cosh.transpose())) < 1e-13);
        assert!(max_abs(&(sinh.clone() + sinh.transpose())) < 1e-13);
        // cosh + sinh is orthogonal: truncation commutes with the quadrature
        // construction, so this holds to roundoff even at finite n_max.
        let d = &cosh + &sinh;
        let gram = d.transpose() * &d;
        assert!(max_abs(&(gram - DMatrix::identity(51, 51))) < 1e-12);
        // Parity: cosh only connects even n-differences, sinh odd ones.
        for j in 0..=50usize {
            for k in 0..=50usize {
                if (j + k) % 2 == 1 {
                    assert_eq!(cosh[(j, k)], 0.0);
                } else {
                    assert_eq!(sinh[(j, k)], 0.0);
                }
            }
        }
    }

    #[test]
    fn displacement_matrix_elements_match_laguerre_form() {
        // <n+m| e^{lambda(a†-a)} |n> = sqrt((n+m)!/n!) F_m(n)
        let lambda = 0.8;
        let (cosh, sinh) = displacement_cosh_sinh(lambda, 80).unwrap();
        let d = &cosh + &sinh;
        for n in 0..=20usize {
            for m in 0..=4usize {
                let ratio: f64 = (n + 1..=n + m).map(|k| k as f64).product();
                let want = ratio.sqrt() * f_coeff(m, n, lambda).unwrap();
                let got = d[(n + m, n)];
                assert!(
                    (got - want).abs() < 1e-12,
                    "n={n} m={m}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn transformed_hamiltonian_is_isospectral() {
        let params = ModelParams::new(1.0, 2.0, 0.5).unwrap();
        let n_max = 120;
        let h = build_hamiltonian(&params, n_max);
        let ht = build_transformed_hamiltonian(&params, 0.35, n_max).unwrap();
        assert!(max_abs(&(ht.clone() - ht.transpose())) < 1e-12);
        let e = eig_sym_values(&h).unwrap();
        let et = eig_sym_values(&ht).unwrap();
        // Low-lying levels agree; truncation effects only reach the top edge.
        for k in 0..20 {
            assert!(
                (e[k] - et[k]).abs() < 1e-10,
                "level {k}: {} vs {}",
                e[k],
                et[k]
            );
        }
        // At lambda = 0 the transformation is the identity.
        let h0 = build_transformed_hamiltonian(&params, 0.0, 40).unwrap();
        assert!(max_abs(&(h0 - build_hamiltonian(&params, 40))) < 1e-12);
    }

    #[test]
    fn displaced_number_operator_reduces_at_zero_lambda() {
        let op = displaced_number_operator(0.0, 30);
        let want = kron_fock_spin(&fock_number(30), &Matrix3::identity());
        assert!(max_abs(&(op - want)) < 1e-15);

        // For lambda > 0 it is symmetric and its ground expectation in the
        // displaced vacuum |−1_x, 0⟩ is lambda²/2 (spin average of J_z²).
        let lambda = 0.4;
        let op = displaced_number_operator(lambda, 30);
        let idx = basis_index(0, S_MINUS_X);
        assert!((op[(idx, idx)] - lambda * lambda / 2.0).abs() < 1e-15);
    }
}
