//! Displaced-frame solvers: variational λ selection, the adiabatic
//! approximation, and the generalized rotating-wave approximation (GRWA).
//!
//! After the displacement U = e^{λ J_z (a† − a)} and a rotating-wave
//! truncation of the residual coupling, the Hamiltonian splits into a
//! one-dimensional ground sector |−1_x, 0⟩, one 2×2 block spanning
//! (|0_x, 0⟩, |−1_x, 1⟩), and for each n ≥ 1 a 3×3 block spanning
//! (|1_x, n−1⟩, |0_x, n⟩, |−1_x, n+1⟩):
//!
//!   ⎡ ν₋  z   0 ⎤      ν₋ = ω(n−1) + f⁰_{n−1} + ε_λ     z = √(n/2)(f¹_{n−1} + λ′)
//!   ⎢ z   ν₀  y ⎥      ν₀ = ωn + 2ε_λ                   y = √((n+1)/2)(f¹_n + λ′)
//!   ⎣ 0   y   ν₊ ⎦      ν₊ = ω(n+1) − f⁰_{n+1} + ε_λ
//!
//! with f⁰_n = Ω F₀(n), f¹_n = Ω F₁(n), λ′ = g − λω and
//! ε_λ = (λ²ω − 2gλ)/2. The displacement λ is picked per strategy: the plain
//! GRWA fixes λ = g/ω; the variational flavors minimize the trial ground
//! energy E_g(λ) = ε_λ − Ω e^{−λ²/2}, whose stationarity condition is
//! g − λω − λΩ e^{−λ²/2} = 0, solved exactly by bisection or approximated in
//! closed form by λ = g/(ω + Ω) or one self-consistent refinement of it.
//!
//! Dropping the off-diagonal F couplings entirely instead gives the
//! adiabatic approximation: per Fock level n the 3×3 spin matrix
//! diag(ξ⁺, ξ⁰, ξ⁻) + ε_λ on the corners, ξ^± = ωn + ε_λ ± f⁰_n,
//! ξ⁰ = ωn + 2ε_λ, diagonalized in closed form.

use nalgebra::{DMatrix, Matrix3, Vector2, Vector3};

use crate::exact::eig_sym;
use crate::model::ModelParams;
use crate::special::FCoeffTable;
use crate::{Error, Result};

/// How the displacement parameter λ is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaStrategy {
    /// λ = g/ω: the conventional GRWA displacement.
    GrwaFixed,
    /// λ = g/(ω + Ω): closed-form variational choice (the default).
    ClosedForm,
    /// λ = g/(ω + Ω e^{−λ₀²/2}) with λ₀ = g/(ω + Ω).
    SelfConsistent,
    /// Bisection root of g − λω − λΩ e^{−λ²/2} = 0 on [0, g/ω].
    ExactRoot,
}

impl LambdaStrategy {
    /// Stable identifier used on the CLI and in output metadata.
    pub fn name(&self) -> &'static str {
        match self {
            LambdaStrategy::GrwaFixed => "grwa",
            LambdaStrategy::ClosedForm => "closed-form",
            LambdaStrategy::SelfConsistent => "self-consistent",
            LambdaStrategy::ExactRoot => "exact-root",
        }
    }
}

impl std::str::FromStr for LambdaStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grwa" => Ok(LambdaStrategy::GrwaFixed),
            "closed-form" => Ok(LambdaStrategy::ClosedForm),
            "self-consistent" => Ok(LambdaStrategy::SelfConsistent),
            "exact-root" => Ok(LambdaStrategy::ExactRoot),
            other => Err(Error::InvalidInput(format!(
                "unknown lambda strategy '{other}' \
                 (expected grwa|closed-form|self-consistent|exact-root)"
            ))),
        }
    }
}

/// Displacement parameter for the given strategy; 0 ≤ λ ≤ g/ω always.
pub fn solve_lambda(params: &ModelParams, strategy: LambdaStrategy) -> f64 {
    let (omega, splitting, g) = (params.omega, params.splitting, params.coupling);
    match strategy {
        LambdaStrategy::GrwaFixed => g / omega,
        LambdaStrategy::ClosedForm => g / (omega + splitting),
        LambdaStrategy::SelfConsistent => {
            let l0 = g / (omega + splitting);
            g / (omega + splitting * (-l0 * l0 / 2.0).exp())
        }
        LambdaStrategy::ExactRoot => {
            if g == 0.0 {
                return 0.0;
            }
            // Residual is g > 0 at lambda = 0 and strictly negative at g/omega.
            let residual = |l: f64| g - l * omega - l * splitting * (-l * l / 2.0).exp();
            let (mut lo, mut hi) = (0.0, g / omega);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if residual(mid) >= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-15 * (1.0 + g / omega) {
                    break;
                }
            }
            0.5 * (lo + hi)
        }
    }
}

/// A chosen displacement λ with its derived scalars and cached F tables.
#[derive(Debug, Clone)]
pub struct Displacement {
    /// Strategy that produced λ.
    pub strategy: LambdaStrategy,
    /// Displacement magnitude.
    pub lambda: f64,
    /// Residual linear coupling λ′ = g − λω (exactly 0 for `GrwaFixed`).
    pub lambda_prime: f64,
    /// Displacement energy ε_λ = (λ²ω − 2gλ)/2.
    pub eps_lambda: f64,
    params: ModelParams,
    table: FCoeffTable,
    max_block: usize,
}

impl Displacement {
    /// Solve λ for the strategy and tabulate F₀/F₁ for blocks up to
    /// `max_block` (the table reaches Fock index max_block + 1, which is the
    /// highest index any block entry reads).
    pub fn new(params: &ModelParams, strategy: LambdaStrategy, max_block: usize) -> Result<Self> {
        let lambda = solve_lambda(params, strategy);
        // The GRWA drops the residual linear coupling identically, so keep
        // it an exact zero rather than the roundoff of g − (g/ω)ω.
        let lambda_prime = if strategy == LambdaStrategy::GrwaFixed {
            0.0
        } else {
            params.coupling - lambda * params.omega
        };
        let eps_lambda = (lambda * lambda * params.omega - 2.0 * params.coupling * lambda) / 2.0;
        let table = FCoeffTable::new(lambda, 1, max_block + 1)?;
        Ok(Displacement {
            strategy,
            lambda,
            lambda_prime,
            eps_lambda,
            params: *params,
            table,
            max_block,
        })
    }

    /// The model this displacement was solved for.
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Highest block index the cached tables cover.
    pub fn max_block(&self) -> usize {
        self.max_block
    }

    /// f⁰_n = Ω F₀(n).
    pub fn f0(&self, n: usize) -> f64 {
        self.params.splitting * self.table.get(0, n)
    }

    /// f¹_n = Ω F₁(n).
    pub fn f1(&self, n: usize) -> f64 {
        self.params.splitting * self.table.get(1, n)
    }

    /// Trial ground energy E_g(λ) = ε_λ − Ω e^{−λ²/2}.
    pub fn ground_energy(&self) -> f64 {
        self.eps_lambda - self.params.splitting * (-self.lambda * self.lambda / 2.0).exp()
    }

    /// Coefficient of the n-th counter-rotating term left after the
    /// rotating-wave truncation: λ′ − Ω e^{−λ²/2} λ L_n¹(λ²)/(n+1).
    /// Zero at n = 0 for the `ExactRoot` λ.
    pub fn counter_rotating_coeff(&self, n: usize) -> Result<f64> {
        Ok(self.lambda_prime
            - self.params.splitting * crate::special::f_coeff(1, n, self.lambda)?)
    }
}

/// One Fock level of the adiabatic approximation, diagonalized.
#[derive(Debug, Clone)]
pub struct AdiabaticBlock {
    /// Fock index.
    pub n: usize,
    /// Diagonal entries ξ⁺, ξ⁰, ξ⁻ in the (|1_x⟩, |0_x⟩, |−1_x⟩) order.
    pub xi: [f64; 3],
    /// Eigenvalues, ascending.
    pub values: [f64; 3],
    /// Matching spin eigenvectors (components on |1_x⟩, |0_x⟩, |−1_x⟩).
    pub vectors: [Vector3<f64>; 3],
}

/// The 3×3 adiabatic spin matrix at Fock level n: diag(ξ⁺, ξ⁰, ξ⁻) with
/// ε_λ on the (1,3) corners.
pub fn adiabatic_matrix(disp: &Displacement, n: usize) -> Matrix3<f64> {
    let en = disp.params().omega * n as f64;
    let f0 = disp.f0(n);
    let e = disp.eps_lambda;
    Matrix3::new(
        en + e + f0, 0.0, e,
        0.0, en + 2.0 * e, 0.0,
        e, 0.0, en + e - f0,
    )
}

fn sign_fix3(v: Vector3<f64>) -> Vector3<f64> {
    let mut lead = 0;
    for i in 1..3 {
        if v[i].abs() > v[lead].abs() {
            lead = i;
        }
    }
    if v[lead] < 0.0 {
        -v
    } else {
        v
    }
}

/// Diagonalize the adiabatic block at Fock level n in closed form.
pub fn adiabatic_block(disp: &Displacement, n: usize) -> AdiabaticBlock {
    let m = adiabatic_matrix(disp, n);
    let (xi_plus, xi_zero, xi_minus) = (m[(0, 0)], m[(1, 1)], m[(2, 2)]);
    let e = disp.eps_lambda;
    let root = ((xi_minus - xi_plus).powi(2) + 4.0 * e * e).sqrt();
    let e_lower = 0.5 * (xi_minus + xi_plus - root);
    let e_upper = 0.5 * (xi_minus + xi_plus + root);
    let corner_vector = |energy: f64| -> Vector3<f64> {
        if e == 0.0 {
            // Corners vanish: eigenvectors are the basis vectors.
            if (energy - xi_plus).abs() <= (energy - xi_minus).abs() {
                Vector3::new(1.0, 0.0, 0.0)
            } else {
                Vector3::new(0.0, 0.0, 1.0)
            }
        } else {
            sign_fix3(Vector3::new(e, 0.0, energy - xi_plus).normalize())
        }
    };
    let mut pairs = [
        (e_lower, corner_vector(e_lower)),
        (xi_zero, Vector3::new(0.0, 1.0, 0.0)),
        (e_upper, corner_vector(e_upper)),
    ];
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    AdiabaticBlock {
        n,
        xi: [xi_plus, xi_zero, xi_minus],
        values: [pairs[0].0, pairs[1].0, pairs[2].0],
        vectors: [pairs[0].1, pairs[1].1, pairs[2].1],
    }
}

/// Numerically minimize the adiabatic ground level
/// ε̃₀⁻(λ) = ε_λ − √((Ω e^{−λ²/2})² + ε_λ²) over λ ∈ [0, 2g/ω]
/// by golden-section search. No closed form exists for this optimum.
pub fn minimize_adiabatic_lambda(params: &ModelParams) -> f64 {
    if params.coupling == 0.0 {
        return 0.0;
    }
    let energy = |lambda: f64| {
        let eps = (lambda * lambda * params.omega - 2.0 * params.coupling * lambda) / 2.0;
        let f00 = params.splitting * (-lambda * lambda / 2.0).exp();
        eps - (f00 * f00 + eps * eps).sqrt()
    };
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, 2.0 * params.coupling / params.omega);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (energy(c), energy(d));
    for _ in 0..200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = energy(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = energy(d);
        }
        if b - a < 1e-14 * (1.0 + b.abs()) {
            break;
        }
    }
    0.5 * (a + b)
}

/// Ascending real roots of x³ + bx² + cx + d by the trigonometric method.
///
/// Returns None when b² − 3c is (numerically) zero — a triple-root
/// degeneracy — or when the arccos argument lands more than 1e−9 outside
/// [−1, 1]; callers fall back to a numeric eigensolve.
pub fn cubic_roots(b: f64, c: f64, d: f64) -> Option<[f64; 3]> {
    let p = b * b - 3.0 * c;
    if p < 1e-30 {
        return None;
    }
    let mut arg = (2.0 * b * b * b - 9.0 * b * c + 27.0 * d) / (2.0 * p.powf(1.5));
    if arg.abs() > 1.0 {
        if arg.abs() > 1.0 + 1e-9 {
            return None;
        }
        arg = arg.clamp(-1.0, 1.0);
    }
    let theta = arg.acos() / 3.0;
    let sq = p.sqrt();
    let (sin_t, cos_t) = theta.sin_cos();
    let mut roots = [
        (-b - 2.0 * sq * cos_t) / 3.0,
        (-b + sq * (cos_t + 3.0_f64.sqrt() * sin_t)) / 3.0,
        (-b + sq * (cos_t - 3.0_f64.sqrt() * sin_t)) / 3.0,
    ];
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Some(roots)
}

/// One n ≥ 1 block of the GRWA Hamiltonian, diagonalized.
#[derive(Debug, Clone)]
pub struct GrwaBlock {
    /// Block index n; the block spans (|1_x, n−1⟩, |0_x, n⟩, |−1_x, n+1⟩).
    pub n: usize,
    /// Diagonal entries (ν₋, ν₀, ν₊).
    pub nu: [f64; 3],
    /// Upper-left coupling z = √(n/2)(f¹_{n−1} + λ′).
    pub z: f64,
    /// Lower-right coupling y = √((n+1)/2)(f¹_n + λ′).
    pub y: f64,
    /// Eigenvalues E_n^j, ascending.
    pub values: [f64; 3],
    /// Normalized coefficient vectors (c₁, c₀, c₋₁) per eigenvalue.
    pub vectors: [Vector3<f64>; 3],
}

/// The n-th GRWA block matrix (n ≥ 1).
pub fn grwa_matrix(disp: &Displacement, n: usize) -> Result<Matrix3<f64>> {
    if n == 0 {
        return Err(Error::InvalidInput(
            "block index must be >= 1; the n = 0 sector is the 2x2 block".into(),
        ));
    }
    let omega = disp.params().omega;
    let e = disp.eps_lambda;
    let nf = n as f64;
    let nu_minus = omega * (nf - 1.0) + disp.f0(n - 1) + e;
    let nu_zero = omega * nf + 2.0 * e;
    let nu_plus = omega * (nf + 1.0) - disp.f0(n + 1) + e;
    let z = (nf / 2.0).sqrt() * (disp.f1(n - 1) + disp.lambda_prime);
    let y = ((nf + 1.0) / 2.0).sqrt() * (disp.f1(n) + disp.lambda_prime);
    Ok(Matrix3::new(
        nu_minus, z, 0.0,
        z, nu_zero, y,
        0.0, y, nu_plus,
    ))
}

fn numeric_eigenpairs3(m: &Matrix3<f64>) -> Result<([f64; 3], [Vector3<f64>; 3])> {
    let dm = DMatrix::from_fn(3, 3, |i, j| m[(i, j)]);
    let eig = eig_sym(&dm)?;
    let vec_at = |k: usize| {
        Vector3::new(eig.vectors[(0, k)], eig.vectors[(1, k)], eig.vectors[(2, k)])
    };
    Ok((
        [eig.values[0], eig.values[1], eig.values[2]],
        [vec_at(0), vec_at(1), vec_at(2)],
    ))
}

/// Diagonalize the n-th GRWA block (n ≥ 1): eigenvalues from the
/// characteristic cubic, eigenvectors from the adjugate columns
/// (c₁, c₀, c₋₁) ∝ (z(E − ν₊), (E − ν₊)(E − ν₋), y(E − ν₋)),
/// with a numeric fallback when either formula degenerates.
pub fn grwa_block(disp: &Displacement, n: usize) -> Result<GrwaBlock> {
    let m = grwa_matrix(disp, n)?;
    let (nu_minus, nu_zero, nu_plus) = (m[(0, 0)], m[(1, 1)], m[(2, 2)]);
    let (z, y) = (m[(0, 1)], m[(1, 2)]);
    let b = -(nu_minus + nu_zero + nu_plus);
    let c = nu_minus * nu_zero + nu_plus * (nu_minus + nu_zero) - z * z - y * y;
    let d = -nu_minus * nu_zero * nu_plus + z * z * nu_plus + y * y * nu_minus;
    let scale = 1.0 + nu_minus.abs().max(nu_zero.abs()).max(nu_plus.abs());

    let closed_form = cubic_roots(b, c, d).and_then(|values| {
        let mut vectors = [Vector3::zeros(); 3];
        for (j, &energy) in values.iter().enumerate() {
            let v = Vector3::new(
                z * (energy - nu_plus),
                (energy - nu_plus) * (energy - nu_minus),
                y * (energy - nu_minus),
            );
            let eta = v.norm();
            if eta < 1e-12 * scale * scale {
                return None; // adjugate column vanished (decoupled block)
            }
            let unit = v / eta;
            if (m * unit - energy * unit).norm() > 1e-12 * scale {
                return None; // roots too clustered for the adjugate to resolve
            }
            vectors[j] = sign_fix3(unit);
        }
        Some((values, vectors))
    });
    let (values, vectors) = match closed_form {
        Some(pairs) => pairs,
        None => numeric_eigenpairs3(&m)?,
    };
    Ok(GrwaBlock {
        n,
        nu: [nu_minus, nu_zero, nu_plus],
        z,
        y,
        values,
        vectors,
    })
}

/// The 2×2 n = 0 sector of the GRWA Hamiltonian, diagonalized.
#[derive(Debug, Clone)]
pub struct Block0 {
    /// ⟨0_x, 0| entry: ε₀⁰ = 2ε_λ.
    pub eps00: f64,
    /// ⟨−1_x, 1| entry: ε₁⁻ = ω − f⁰₁ + ε_λ.
    pub eps1m: f64,
    /// Coupling R₀,₁ = √(1/2)(f¹₀ + λ′).
    pub r01: f64,
    /// Eigenvalues E₀^∓, ascending.
    pub values: [f64; 2],
    /// Normalized coefficient vectors (c₀, c₋₁) per eigenvalue.
    pub vectors: [Vector2<f64>; 2],
}

/// Diagonalize the n = 0 sector spanning (|0_x, 0⟩, |−1_x, 1⟩).
pub fn grwa_block0(disp: &Displacement) -> Block0 {
    let eps00 = 2.0 * disp.eps_lambda;
    let eps1m = disp.params().omega - disp.f0(1) + disp.eps_lambda;
    let r01 = 0.5_f64.sqrt() * (disp.f1(0) + disp.lambda_prime);
    let root = ((eps00 - eps1m).powi(2) + 4.0 * r01 * r01).sqrt();
    let values = [
        0.5 * (eps00 + eps1m - root),
        0.5 * (eps00 + eps1m + root),
    ];
    let vector = |energy: f64| -> Vector2<f64> {
        if r01 == 0.0 {
            if (energy - eps00).abs() <= (energy - eps1m).abs() {
                Vector2::new(1.0, 0.0)
            } else {
                Vector2::new(0.0, 1.0)
            }
        } else {
            let v = Vector2::new(r01, energy - eps00).normalize();
            let lead = if v[1].abs() > v[0].abs() { 1 } else { 0 };
            if v[lead] < 0.0 {
                -v
            } else {
                v
            }
        }
    };
    Block0 {
        eps00,
        eps1m,
        r01,
        values,
        vectors: [vector(values[0]), vector(values[1])],
    }
}

/// Where a spectrum level came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelOrigin {
    /// The decoupled ground sector |−1_x, 0⟩.
    Ground,
    /// Eigenvalue j of the 2×2 n = 0 block.
    Block0(usize),
    /// Eigenvalue j of the n-th 3×3 block (n ≥ 1).
    Block(usize, usize),
    /// Branch j of the adiabatic block at Fock level n.
    Adiabatic(usize, usize),
}

/// One energy level with its block provenance.
#[derive(Debug, Clone, Copy)]
pub struct SpectrumLevel {
    /// Energy value.
    pub energy: f64,
    /// Generating block and branch.
    pub origin: LevelOrigin,
}

/// GRWA spectrum: ground level, the n = 0 doublet, and blocks 1..=n_blocks,
/// sorted ascending (1 + 2 + 3·n_blocks levels).
pub fn assemble_spectrum(disp: &Displacement, n_blocks: usize) -> Result<Vec<SpectrumLevel>> {
    if n_blocks < 1 {
        return Err(Error::InvalidInput("n_blocks must be >= 1".into()));
    }
    if n_blocks > disp.max_block() {
        return Err(Error::InvalidInput(format!(
            "n_blocks = {n_blocks} exceeds the tabulated range {}",
            disp.max_block()
        )));
    }
    let mut levels = Vec::with_capacity(3 + 3 * n_blocks);
    levels.push(SpectrumLevel {
        energy: disp.ground_energy(),
        origin: LevelOrigin::Ground,
    });
    let b0 = grwa_block0(disp);
    for j in 0..2 {
        levels.push(SpectrumLevel {
            energy: b0.values[j],
            origin: LevelOrigin::Block0(j),
        });
    }
    for n in 1..=n_blocks {
        let block = grwa_block(disp, n)?;
        for j in 0..3 {
            levels.push(SpectrumLevel {
                energy: block.values[j],
                origin: LevelOrigin::Block(n, j),
            });
        }
    }
    levels.sort_by(|a, b| a.energy.partial_cmp(&b.energy).unwrap());
    Ok(levels)
}

/// Adiabatic spectrum over Fock levels 0..=n_blocks, sorted ascending.
pub fn adiabatic_spectrum(disp: &Displacement, n_blocks: usize) -> Result<Vec<SpectrumLevel>> {
    if n_blocks > disp.max_block() {
        return Err(Error::InvalidInput(format!(
            "n_blocks = {n_blocks} exceeds the tabulated range {}",
            disp.max_block()
        )));
    }
    let mut levels = Vec::with_capacity(3 * (n_blocks + 1));
    for n in 0..=n_blocks {
        let block = adiabatic_block(disp, n);
        for j in 0..3 {
            levels.push(SpectrumLevel {
                energy: block.values[j],
                origin: LevelOrigin::Adiabatic(n, j),
            });
        }
    }
    levels.sort_by(|a, b| a.energy.partial_cmp(&b.energy).unwrap());
    Ok(levels)
}

/// Blocks needed for a trustworthy k-level spectrum: higher blocks can dip
/// into the low spectrum by at most ~Ω, so pad by Ω/ω plus a guard band.
pub fn blocks_needed(params: &ModelParams, k: usize) -> usize {
    k + (params.splitting / params.omega).ceil() as usize + 10
}
