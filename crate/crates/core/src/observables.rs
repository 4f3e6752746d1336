//! Fidelities, eigenbasis amplitudes and boundary-boundary entanglement.

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{dense_symmetric_eigen, SpectralDecomposition};
use crate::state::{inner, inner_real};

/// Slack allowed on positivity checks.
const POSITIVITY_TOLERANCE: f64 = 1e-10;

/// `|⟨ψ|φ⟩|`.
pub fn fidelity(psi: &[Complex64], phi: &[Complex64]) -> f64 {
    inner(psi, phi).norm()
}

/// `aᵢ = ⟨λᵢ|ψ⟩` in spectral order.
pub fn eigen_amplitudes(psi: &[Complex64], d: &SpectralDecomposition) -> Vec<Complex64> {
    d.eigenvectors().iter().map(|v| inner_real(v, psi)).collect()
}

/// Reduced state of sites 1 and N in the basis `{|00⟩, |10⟩, |01⟩, |11⟩}`:
///
/// ```text
/// ⎡ a  0  0  0 ⎤
/// ⎢ 0  b  d  0 ⎥
/// ⎢ 0  d* c  0 ⎥
/// ⎣ 0  0  0  0 ⎦
/// ```
///
/// The `|11⟩` population is identically zero for a single excitation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryDensityBlock {
    /// Population of the interior sites.
    pub a: f64,
    /// `|C₁|²`
    pub b: f64,
    /// `|C_N|²`
    pub c: f64,
    /// `C₁·C_N*`
    pub d: Complex64,
}

impl BoundaryDensityBlock {
    pub fn trace(&self) -> f64 {
        self.a + self.b + self.c
    }

    pub fn to_matrix(&self) -> Matrix4<Complex64> {
        let z = Complex64::new(0.0, 0.0);
        let r = |x: f64| Complex64::new(x, 0.0);
        Matrix4::new(
            r(self.a), z, z, z, //
            z, r(self.b), self.d, z, //
            z, self.d.conj(), r(self.c), z, //
            z, z, z, z,
        )
    }

    /// Largest violation of `a, b, c ≥ 0` and `|d|² ≤ b·c`; zero when positive semidefinite.
    pub fn positivity_violation(&self) -> f64 {
        let neg = (-self.a).max(-self.b).max(-self.c).max(0.0);
        let cs = (self.d.norm_sqr() - self.b * self.c).max(0.0);
        neg.max(cs)
    }
}

pub fn reduced_density_1n(psi: &[Complex64]) -> BoundaryDensityBlock {
    let n = psi.len();
    let (c1, cn) = (psi[0], psi[n - 1]);
    let a = psi[1..n - 1].iter().map(|c| c.norm_sqr()).sum();
    BoundaryDensityBlock { a, b: c1.norm_sqr(), c: cn.norm_sqr(), d: c1 * cn.conj() }
}

/// `max{0, 2√(bc), 2|d|}`.
pub fn concurrence(block: &BoundaryDensityBlock) -> Result<f64> {
    let violation = block.positivity_violation();
    if violation > POSITIVITY_TOLERANCE {
        return Err(Error::NotPositive { violation });
    }
    let bc = (block.b * block.c).max(0.0);
    Ok((2.0 * bc.sqrt()).max(2.0 * block.d.norm()).max(0.0))
}

/// `2|C₁||C_N|`, the concurrence of a normalized single-excitation state.
#[inline]
pub fn concurrence_of_state(psi: &[Complex64]) -> f64 {
    2.0 * psi[0].norm() * psi[psi.len() - 1].norm()
}

/// Real symmetric embedding `[[Re, −Im], [Im, Re]]` of a Hermitian matrix.
/// Every eigenvalue of the original appears twice.
fn real_embedding(h: &Matrix4<Complex64>) -> DMatrix<f64> {
    DMatrix::from_fn(8, 8, |r, c| {
        let z = h[(r % 4, c % 4)];
        match (r < 4, c < 4) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Wootters concurrence of a general two-qubit density matrix:
/// `max{0, λ₁ − λ₂ − λ₃ − λ₄}` with `λᵢ` the decreasing square roots of the
/// spectrum of `ρ·(σy⊗σy)·ρ*·(σy⊗σy)`.
///
/// The spectrum is taken from the Hermitian form `√ρ·ρ̃·√ρ`, which shares it.
/// Eigenvalues of `ρ` and of `√ρ·ρ̃·√ρ` below the round-off floor are set to
/// zero, so a genuine `λᵢ` below roughly `1e-7` is not resolved.
pub fn wootters_concurrence(rho: &Matrix4<Complex64>) -> Result<f64> {
    const FLOOR: f64 = 64.0 * f64::EPSILON;

    // σy⊗σy is real; it is unchanged by swapping the two middle basis states.
    let yy = Matrix4::new(
        0.0, 0.0, 0.0, -1.0, //
        0.0, 0.0, 1.0, 0.0, //
        0.0, 1.0, 0.0, 0.0, //
        -1.0, 0.0, 0.0, 0.0,
    )
    .map(|x| Complex64::new(x, 0.0));
    let rho_tilde = yy * rho.conjugate() * yy;

    let scale = rho.iter().fold(0.0f64, |m, z| m.max(z.norm())).max(f64::MIN_POSITIVE);
    let rho_eig = dense_symmetric_eigen(&real_embedding(rho))?;
    let min_eig = rho_eig.eigenvalues()[0];
    if min_eig < -POSITIVITY_TOLERANCE * scale {
        return Err(Error::NotPositive { violation: -min_eig });
    }
    let roots: Vec<f64> =
        rho_eig.eigenvalues().iter().map(|&p| if p > FLOOR * scale { p.sqrt() } else { 0.0 }).collect();
    let sqrt_rho = rho_eig.operator_from_coefficients(&roots);

    let m = &sqrt_rho * real_embedding(&rho_tilde) * &sqrt_rho;
    let m = (&m + m.transpose()) * 0.5;
    let m_eig = dense_symmetric_eigen(&m)?;
    let top = m_eig.eigenvalues().last().copied().unwrap_or(0.0).abs().max(scale * scale);

    // Descending, one of each degenerate pair.
    let lambdas: Vec<f64> = m_eig
        .eigenvalues()
        .iter()
        .rev()
        .step_by(2)
        .map(|&mu| if mu > FLOOR * top { mu.sqrt() } else { 0.0 })
        .collect();
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}
