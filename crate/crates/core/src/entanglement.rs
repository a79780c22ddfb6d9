//! Wootters concurrence: the spin-flip `ρ̃`, the eigenvalue spectrum of
//! `ρρ̃`, and the ratio signature that local filters preserve.

use nalgebra::Schur;

use crate::error::{Error, Result};
use crate::linalg::{kron2, pauli, Mat4};
use crate::qstate::DensityMatrix;

/// Imaginary parts of the eigenvalues of `ρρ̃` above this are a breakdown.
pub const IMAG_TOL: f64 = 1e-9;
/// Real parts below `-NEG_TOL` are a breakdown; between it and zero, dust.
pub const NEG_TOL: f64 = 1e-10;

/// `λ₁ ≥ λ₂ ≥ λ₃ ≥ λ₄ ≥ 0` and `max(0, λ₁ − λ₂ − λ₃ − λ₄)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcurrenceSpectrum {
    pub lambdas: [f64; 4],
    pub concurrence: f64,
}

impl ConcurrenceSpectrum {
    pub fn from_lambdas(mut lambdas: [f64; 4]) -> Self {
        lambdas.sort_by(|a, b| b.total_cmp(a));
        let [l1, l2, l3, l4] = lambdas;
        let concurrence = (l1 - l2 - l3 - l4).clamp(0.0, 1.0);
        ConcurrenceSpectrum { lambdas, concurrence }
    }

    pub fn sum(&self) -> f64 {
        self.lambdas.iter().sum()
    }
}

fn yy() -> Mat4 {
    kron2(&pauli(2), &pauli(2))
}

/// `(Y ⊗ Y) ρ* (Y ⊗ Y)`.
pub fn tilde(rho: &DensityMatrix) -> DensityMatrix {
    let f = yy();
    DensityMatrix::from_operator(f * rho.matrix().conjugate() * f).expect("spin flip preserves positivity")
}

/// Square roots of the eigenvalues of `ρρ̃`, sorted descending.
///
/// Eigenvalues below `64 ε ‖ρρ̃‖` are treated as exact zeros, which keeps the
/// spectrum of rank-deficient states clean.
pub fn concurrence_spectrum(rho: &DensityMatrix) -> Result<ConcurrenceSpectrum> {
    let prod = rho.matrix() * tilde(rho).matrix();
    let eig = Schur::new(prod)
        .eigenvalues()
        .ok_or_else(|| Error::NumericalBreakdown("Schur form of ρρ̃ not triangular".into()))?;
    let scale = prod.norm().max(f64::MIN_POSITIVE);
    let dust = 64.0 * f64::EPSILON * scale;
    let mut lambdas = [0.0; 4];
    for (k, z) in eig.iter().enumerate() {
        if z.im.abs() > IMAG_TOL {
            return Err(Error::NumericalBreakdown(format!("eigenvalue of ρρ̃ has imaginary part {:e}", z.im)));
        }
        if z.re < -NEG_TOL {
            return Err(Error::NumericalBreakdown(format!("eigenvalue of ρρ̃ is negative: {:e}", z.re)));
        }
        lambdas[k] = if z.re <= dust { 0.0 } else { z.re.sqrt() };
    }
    Ok(ConcurrenceSpectrum::from_lambdas(lambdas))
}

pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    Ok(concurrence_spectrum(rho)?.concurrence)
}

/// `(λ₂/λ₁, λ₃/λ₁, λ₄/λ₁)`.
pub fn ratio_signature(spec: &ConcurrenceSpectrum) -> Result<[f64; 3]> {
    let [l1, l2, l3, l4] = spec.lambdas;
    if !(l1 > 0.0) {
        return Err(Error::ZeroSpectrum);
    }
    Ok([l2 / l1, l3 / l1, l4 / l1])
}
