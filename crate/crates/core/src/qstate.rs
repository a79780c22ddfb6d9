//! Two-qubit density matrices, their Hilbert–Schmidt (R-matrix) form, local
//! unitaries and fidelity measures.

use nalgebra::{Matrix3, Matrix4, SymmetricEigen, Vector3, Vector4};

use crate::bell::BellLabel;
use crate::error::{Error, Result};
use crate::linalg::{
    bloch_rotation, c, hermitian_eigen4, hermitian_part, hermiticity_defect, kron2, pauli, unitarity_defect, Ket4,
    Mat2, Mat4, I,
};

/// Eigenvalues in `[-PSD_TOL, 0)` are clamped to zero; below is an error.
pub const PSD_TOL: f64 = 1e-10;
/// Elementwise tolerance for Hermiticity and unit trace of caller-supplied matrices.
pub const STRICT_TOL: f64 = 1e-12;

/// A valid two-qubit state in the computational basis |00⟩, |01⟩, |10⟩, |11⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(Mat4);

impl DensityMatrix {
    /// Validate a caller-supplied matrix: Hermitian and unit trace within
    /// [`STRICT_TOL`], positive semidefinite up to [`PSD_TOL`].
    pub fn new(m: Mat4) -> Result<Self> {
        let herm = hermiticity_defect(&m);
        if herm > STRICT_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > STRICT_TOL || tr.im.abs() > STRICT_TOL {
            return Err(Error::BadTrace(tr.re));
        }
        Self::from_operator(m)
    }

    /// Build a state from an unnormalised positive operator, e.g. the output
    /// of a filter or post-selection. Symmetrises, normalises and applies the
    /// PSD clamp.
    pub fn from_operator(m: Mat4) -> Result<Self> {
        let h = hermitian_part(&m);
        let tr = h.trace().re;
        if !(tr > 0.0) || !tr.is_finite() {
            return Err(Error::BadTrace(tr));
        }
        let h = h / c(tr);
        let (vals, vecs) = hermitian_eigen4(&h);
        if vals[0] < -PSD_TOL {
            return Err(Error::NotPositive(vals[0]));
        }
        if vals[0] >= 0.0 {
            return Ok(DensityMatrix(h));
        }
        let clamped: Vec<f64> = vals.iter().map(|&v| v.max(0.0)).collect();
        let total: f64 = clamped.iter().sum();
        let d = Mat4::from_diagonal(&Vector4::from_fn(|i, _| c(clamped[i] / total)));
        Ok(DensityMatrix(hermitian_part(&(vecs * d * vecs.adjoint()))))
    }

    pub fn from_ket(k: &Ket4) -> Self {
        let n = k.norm_squared();
        DensityMatrix(k * k.adjoint() / c(n))
    }

    pub fn bell(label: BellLabel) -> Self {
        Self::from_ket(&label.ket())
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix(Mat4::identity() * c(0.25))
    }

    /// `Σ w_i |bell_i⟩⟨bell_i|` with weights ordered (Φ⁺, Ψ⁻, Ψ⁺, Φ⁻).
    pub fn bell_diagonal(w: [f64; 4]) -> Result<Self> {
        let sum: f64 = w.iter().sum();
        if w.iter().any(|&x| x < 0.0 || !x.is_finite()) || (sum - 1.0).abs() > STRICT_TOL {
            return Err(Error::BadWeights(w));
        }
        let mut m = Mat4::zeros();
        for (label, &wi) in BellLabel::ALL.iter().zip(w.iter()) {
            let k = label.ket();
            m += k * k.adjoint() * c(wi);
        }
        Ok(DensityMatrix(hermitian_part(&m)))
    }

    /// Werner state `p |Φ⁺⟩⟨Φ⁺| + (1 − p) 1/4`.
    pub fn werner(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("Werner p = {p} outside [0, 1]")));
        }
        let q = (1.0 - p) / 4.0;
        Self::bell_diagonal([p + q, q, q, q])
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn into_matrix(self) -> Mat4 {
        self.0
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        hermitian_eigen4(&self.0).0
    }

    /// `R_ij = tr(ρ σ_i ⊗ σ_j)`.
    pub fn to_rmatrix(&self) -> RMatrix {
        let paulis: [Mat2; 4] = [pauli(0), pauli(1), pauli(2), pauli(3)];
        let coeffs = Matrix4::from_fn(|i, j| (self.0 * kron2(&paulis[i], &paulis[j])).trace().re);
        RMatrix { coeffs }
    }

    /// `(u_A ⊗ u_B) ρ (u_A ⊗ u_B)†`.
    pub fn apply_local_unitary(&self, u: &LocalUnitary) -> Self {
        let full = u.kron();
        DensityMatrix(hermitian_part(&(full * self.0 * full.adjoint())))
    }

    /// Largest overlap with any maximally entangled state: the top eigenvalue
    /// of the real part of ρ written in the magic basis.
    pub fn fully_entangled_fraction(&self) -> f64 {
        let q = magic_basis();
        let m = q.adjoint() * self.0 * q;
        let re = Matrix4::from_fn(|i, j| 0.5 * (m[(i, j)].re + m[(j, i)].re));
        SymmetricEigen::new(re).eigenvalues.max()
    }

    pub fn bell_fidelity(&self, which: BellLabel) -> f64 {
        let k = which.ket();
        (k.adjoint() * self.0 * k)[(0, 0)].re
    }

    /// Diagonal of ρ in the Bell basis, ordered (Φ⁺, Ψ⁻, Ψ⁺, Φ⁻).
    pub fn bell_weights(&self) -> [f64; 4] {
        BellLabel::ALL.map(|b| self.bell_fidelity(b))
    }

    /// Largest diagonal Bell weight and its label (first on ties).
    pub fn max_bell_weight(&self) -> (BellLabel, f64) {
        let w = self.bell_weights();
        let mut best = 0;
        for k in 1..4 {
            if w[k] > w[best] {
                best = k;
            }
        }
        (BellLabel::from_index(best), w[best])
    }

    /// Largest modulus among the off-diagonal Bell-basis entries.
    pub fn bell_offdiagonal(&self) -> f64 {
        let kets = BellLabel::ALL.map(|b| b.ket());
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    worst = worst.max((kets[i].adjoint() * self.0 * kets[j])[(0, 0)].norm());
                }
            }
        }
        worst
    }

    pub fn marginal_a(&self) -> Mat2 {
        let m = &self.0;
        Mat2::new(m[(0, 0)] + m[(1, 1)], m[(0, 2)] + m[(1, 3)], m[(2, 0)] + m[(3, 1)], m[(2, 2)] + m[(3, 3)])
    }

    pub fn marginal_b(&self) -> Mat2 {
        let m = &self.0;
        Mat2::new(m[(0, 0)] + m[(2, 2)], m[(0, 1)] + m[(2, 3)], m[(1, 0)] + m[(3, 2)], m[(1, 1)] + m[(3, 3)])
    }
}

/// Columns |Φ⁺⟩, i|Φ⁻⟩, i|Ψ⁺⟩, |Ψ⁻⟩.
pub fn magic_basis() -> Mat4 {
    let cols = [
        BellLabel::PhiPlus.ket(),
        BellLabel::PhiMinus.ket() * I,
        BellLabel::PsiPlus.ket() * I,
        BellLabel::PsiMinus.ket(),
    ];
    Mat4::from_fn(|i, j| cols[j][i])
}

/// Real Hilbert–Schmidt coefficients `R_ij`, `i, j ∈ {0, 1, 2, 3}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RMatrix {
    coeffs: Matrix4<f64>,
}

impl RMatrix {
    pub fn from_coeffs(coeffs: Matrix4<f64>) -> Self {
        RMatrix { coeffs }
    }

    pub fn coeffs(&self) -> &Matrix4<f64> {
        &self.coeffs
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.coeffs[(i, j)]
    }

    /// `(R_10, R_20, R_30)`.
    pub fn bloch_a(&self) -> Vector3<f64> {
        Vector3::new(self.coeffs[(1, 0)], self.coeffs[(2, 0)], self.coeffs[(3, 0)])
    }

    /// `(R_01, R_02, R_03)`.
    pub fn bloch_b(&self) -> Vector3<f64> {
        Vector3::new(self.coeffs[(0, 1)], self.coeffs[(0, 2)], self.coeffs[(0, 3)])
    }

    /// The 3x3 correlation block `R_ij`, `i, j ∈ {1, 2, 3}`.
    pub fn correlations(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.coeffs[(i + 1, j + 1)])
    }

    /// `ρ = ¼ Σ R_ij σ_i ⊗ σ_j`, validated.
    pub fn to_density(&self) -> Result<DensityMatrix> {
        if (self.coeffs[(0, 0)] - 1.0).abs() > STRICT_TOL {
            return Err(Error::BadTrace(self.coeffs[(0, 0)]));
        }
        let mut m = Mat4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                let r = self.coeffs[(i, j)];
                if r != 0.0 {
                    m += kron2(&pauli(i), &pauli(j)) * c(r / 4.0);
                }
            }
        }
        DensityMatrix::new(m)
    }

    /// `R → diag(1, O_A) R diag(1, O_B)ᵀ`.
    pub fn transformed(&self, u: &LocalUnitary) -> RMatrix {
        let (oa, ob) = u.bloch_rotations();
        let lift = |o: Matrix3<f64>| {
            let mut m = Matrix4::identity();
            m.fixed_view_mut::<3, 3>(1, 1).copy_from(&o);
            m
        };
        RMatrix { coeffs: lift(oa) * self.coeffs * lift(ob).transpose() }
    }

    /// Largest modulus among the entries a Zinf-shaped R-matrix must have zero:
    /// everything except the diagonal, `R_30` and `R_03`.
    pub fn zinf_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                let allowed = i == j || (i == 3 && j == 0) || (i == 0 && j == 3);
                if !allowed {
                    worst = worst.max(self.coeffs[(i, j)].abs());
                }
            }
        }
        worst
    }

    /// Largest modulus among entries a LoMM (diagonal) R-matrix must have zero.
    pub fn lomm_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    worst = worst.max(self.coeffs[(i, j)].abs());
                }
            }
        }
        worst
    }
}

/// A product of single-qubit unitaries `u_A ⊗ u_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalUnitary {
    pub ua: Mat2,
    pub ub: Mat2,
}

impl LocalUnitary {
    pub fn new(ua: Mat2, ub: Mat2) -> Result<Self> {
        let d = unitarity_defect(&ua).max(unitarity_defect(&ub));
        if d > STRICT_TOL {
            return Err(Error::NotUnitary(d));
        }
        Ok(LocalUnitary { ua, ub })
    }

    pub(crate) fn new_unchecked(ua: Mat2, ub: Mat2) -> Self {
        LocalUnitary { ua, ub }
    }

    pub fn identity() -> Self {
        LocalUnitary { ua: Mat2::identity(), ub: Mat2::identity() }
    }

    pub fn kron(&self) -> Mat4 {
        kron2(&self.ua, &self.ub)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &LocalUnitary) -> LocalUnitary {
        LocalUnitary { ua: self.ua * other.ua, ub: self.ub * other.ub }
    }

    pub fn adjoint(&self) -> LocalUnitary {
        LocalUnitary { ua: self.ua.adjoint(), ub: self.ub.adjoint() }
    }

    pub fn bloch_rotations(&self) -> (Matrix3<f64>, Matrix3<f64>) {
        (bloch_rotation(&self.ua), bloch_rotation(&self.ub))
    }
}

#[cfg(test)]
pub(crate) fn ket00() -> Ket4 {
    Ket4::new(crate::linalg::ONE, crate::linalg::ZERO, crate::linalg::ZERO, crate::linalg::ZERO)
}
