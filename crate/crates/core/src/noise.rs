//! Base-pair factories: photon loss mixed with depolarising noise,
//! amplitude damping in a rotated basis, and Bell-diagonal states.

use std::f64::consts::FRAC_PI_4;

use crate::bell::BellLabel;
use crate::error::{Error, Result};
use crate::linalg::{c, ket2, kron2, kron_ket, pauli, Mat2, I, ONE, ZERO};
use crate::qstate::DensityMatrix;

fn check_unit(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidParameter(format!("{name} = {x} outside [0, 1]")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonLossParams {
    pub epsilon: f64,
    pub g: f64,
}

impl PhotonLossParams {
    pub fn new(epsilon: f64, g: f64) -> Result<Self> {
        check_unit("epsilon", epsilon)?;
        check_unit("G", g)?;
        Ok(PhotonLossParams { epsilon, g })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeDampingParams {
    pub gamma: f64,
    pub theta: f64,
}

impl AmplitudeDampingParams {
    /// `γ ∈ [0, 1]`, `θ ∈ [0, π/4]`.
    pub fn new(gamma: f64, theta: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_4 + 1e-15).contains(&theta) {
            return Err(Error::InvalidParameter(format!("theta = {theta} outside [0, π/4]")));
        }
        Self::new_unrestricted(gamma, theta)
    }

    /// Any finite `θ`.
    pub fn new_unrestricted(gamma: f64, theta: f64) -> Result<Self> {
        check_unit("gamma", gamma)?;
        if !theta.is_finite() {
            return Err(Error::InvalidParameter(format!("theta = {theta}")));
        }
        Ok(AmplitudeDampingParams { gamma, theta })
    }
}

/// `(1−ε)|Ψ⁺⟩⟨Ψ⁺| + ε/(1+2G) |11⟩⟨11| + Gε/(1+2G) (|00⟩⟨00| + |Ψ⁻⟩⟨Ψ⁻|)`.
pub fn photon_loss_state(p: &PhotonLossParams) -> DensityMatrix {
    let PhotonLossParams { epsilon: e, g } = *p;
    let zero = ket2(ONE, ZERO);
    let one = ket2(ZERO, ONE);
    let proj = |k: crate::linalg::Ket4| k * k.adjoint();
    let m = proj(BellLabel::PsiPlus.ket()) * c(1.0 - e)
        + proj(kron_ket(&one, &one)) * c(e / (1.0 + 2.0 * g))
        + (proj(kron_ket(&zero, &zero)) + proj(BellLabel::PsiMinus.ket())) * c(g * e / (1.0 + 2.0 * g));
    DensityMatrix::from_operator(m).expect("convex mixture of states")
}

/// `U^θ = cos θ 1 + i sin θ Y`.
pub fn damping_basis(theta: f64) -> Mat2 {
    Mat2::identity() * c(theta.cos()) + pauli(2) * I * c(theta.sin())
}

/// Kraus operators `K¹ = U^θ (|0⟩⟨0| + √(1−γ)|1⟩⟨1|) U^{−θ}` and
/// `K² = U^θ √γ |0⟩⟨1| U^{−θ}`.
pub fn damping_kraus(p: &AmplitudeDampingParams) -> [Mat2; 2] {
    let u = damping_basis(p.theta);
    let ui = damping_basis(-p.theta);
    let k1 = Mat2::new(ONE, ZERO, ZERO, c((1.0 - p.gamma).sqrt()));
    let k2 = Mat2::new(ZERO, c(p.gamma.sqrt()), ZERO, ZERO);
    [u * k1 * ui, u * k2 * ui]
}

/// `Σ_ij (K_A^i ⊗ K_B^j) |Ψ⁺⟩⟨Ψ⁺| (K_A^i ⊗ K_B^j)†`.
pub fn amplitude_damped_state(p: &AmplitudeDampingParams) -> DensityMatrix {
    let k = damping_kraus(p);
    let psi = BellLabel::PsiPlus.ket();
    let base = psi * psi.adjoint();
    let mut m = crate::linalg::Mat4::zeros();
    for ka in &k {
        for kb in &k {
            let op = kron2(ka, kb);
            m += op * base * op.adjoint();
        }
    }
    DensityMatrix::from_operator(m).expect("Kraus channel output")
}

/// Bell weights ordered (Φ⁺, Ψ⁻, Ψ⁺, Φ⁻).
pub fn bell_diagonal_state(weights: [f64; 4]) -> Result<DensityMatrix> {
    DensityMatrix::bell_diagonal(weights)
}

/// A base pair drawn from one of the noise families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BasePair {
    PhotonLoss(PhotonLossParams),
    AmplitudeDamping(AmplitudeDampingParams),
    BellDiagonal([f64; 4]),
}

impl BasePair {
    pub fn state(&self) -> Result<DensityMatrix> {
        match self {
            BasePair::PhotonLoss(p) => Ok(photon_loss_state(p)),
            BasePair::AmplitudeDamping(p) => Ok(amplitude_damped_state(p)),
            BasePair::BellDiagonal(w) => bell_diagonal_state(*w),
        }
    }
}
