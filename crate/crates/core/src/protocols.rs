//! One round of the distillation protocols, each as an explicit
//! bilateral-CNOT-and-measure step and, where one exists, in closed form.

use crate::bell::{all_permutations, BellPermutation};
use crate::error::{Error, Result};
use crate::filtering::{
    diagonalizing_unitary, horodecki_filter, normal_form, search_zinf_filter, zinf_filter, CanonicalForm,
    FilterOutcome, LocalFilter, Objective,
};
use crate::linalg::{embed_two_qubit, kron2, kron4, outcome_block, pauli, projector, to_mat16, Mat16, Mat4};
use crate::qstate::DensityMatrix;

/// Post-selection on outcomes `00` and `11`.
pub const KEEP_EVEN: [(usize, usize); 2] = [(0, 0), (1, 1)];
/// Post-selection on outcome `11` only.
pub const KEEP_11: [(usize, usize); 1] = [(1, 1)];

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolOutcome {
    pub output_state: DensityMatrix,
    pub filter_prob: f64,
    pub distil_prob: f64,
    /// `filter_prob² · distil_prob`: both input pairs must pass the filter.
    pub overall_prob: f64,
    pub output_fidelity: f64,
}

impl ProtocolOutcome {
    fn new(output_state: DensityMatrix, filter_prob: f64, distil_prob: f64) -> Self {
        let output_fidelity = output_state.max_bell_weight().1;
        ProtocolOutcome {
            output_state,
            filter_prob,
            distil_prob,
            overall_prob: filter_prob * filter_prob * distil_prob,
            output_fidelity,
        }
    }
}

/// `CX_{A1}^{A2} ⊗ CX_{B1}^{B2}` on the register (A1, B1, A2, B2).
fn bilateral_cnot() -> Mat16 {
    let id = crate::linalg::Mat2::identity();
    // Indexed (target, control).
    let cx = kron2(&id, &projector(0)) + kron2(&pauli(1), &projector(1));
    to_mat16(&(embed_two_qubit(&cx, 0, 2, 4) * embed_two_qubit(&cx, 1, 3, 4)))
}

/// Apply the bilateral CNOT to `pair1 ⊗ pair2` (pair 1 on A1 B1), measure
/// A1 B1 in the computational basis and keep the listed outcomes. Returns
/// the normalised A2 B2 state and the total probability of the kept outcomes.
pub fn bilateral_cnot_and_measure(
    pair1: &DensityMatrix,
    pair2: &DensityMatrix,
    keep: &[(usize, usize)],
) -> Result<(DensityMatrix, f64)> {
    if keep.is_empty() || keep.iter().any(|&(a, b)| a > 1 || b > 1) {
        return Err(Error::InvalidParameter(format!("outcomes {keep:?}")));
    }
    let u = bilateral_cnot();
    let joint = u * kron4(pair1.matrix(), pair2.matrix()) * u.adjoint();
    let mut kept = Mat4::zeros();
    for &(a, b) in keep {
        kept += outcome_block(&joint, a, b);
    }
    let p = kept.trace().re;
    if !(p > 1e-15) {
        return Err(Error::ZeroProbability(p));
    }
    Ok((DensityMatrix::from_operator(kept)?, p))
}

/// `(λ₁² + λ₄²) / ((λ₁ + λ₄)² + (λ₂ + λ₃)²)` with Φ⁺ = λ₁, Ψ⁻ = λ₂, Ψ⁺ = λ₃, Φ⁻ = λ₄.
fn even_parity_fidelity(w: &[f64; 4]) -> f64 {
    let s = (w[0] + w[3]).powi(2) + (w[1] + w[2]).powi(2);
    (w[0] * w[0] + w[3] * w[3]) / s
}

/// The Bell relabelling that maximises the even-parity output fidelity:
/// the largest weight on Φ⁺ and the smallest on Φ⁻. The identity on ties.
pub fn best_bell_arrangement(w: &[f64; 4]) -> BellPermutation {
    // The fidelity is symmetric under Φ⁺ ↔ Φ⁻, so the larger of the pair
    // goes on Φ⁺.
    let mut best = (BellPermutation::IDENTITY, even_parity_fidelity(w), w[0]);
    for (p, _) in all_permutations() {
        let pw = p.apply(w);
        let f = even_parity_fidelity(&pw);
        if f > best.1 + 1e-15 || (f >= best.1 - 1e-15 && pw[0] > best.2 + 1e-15) {
            best = (p, f, pw[0]);
        }
    }
    best.0
}

/// Rotate the correlations to diagonal form, relabel the Bell basis, then
/// one bilateral CNOT round keeping outcomes 00 and 11.
pub fn dejmps_round(rho: &DensityMatrix) -> Result<ProtocolOutcome> {
    let u = diagonalizing_unitary(&rho.to_rmatrix().correlations());
    let rotated = rho.apply_local_unitary(&u);
    let p = best_bell_arrangement(&rotated.bell_weights());
    let prepared = rotated.apply_local_unitary(&p.unitary());
    let (out, pd) = bilateral_cnot_and_measure(&prepared, &prepared, &KEEP_EVEN)?;
    Ok(ProtocolOutcome::new(out, 1.0, pd))
}

/// Output Bell weights and success probability of a bilateral CNOT round on
/// two copies of a Bell-diagonal state with weights `w`.
pub fn lomm_closed_form(w: &[f64; 4]) -> ([f64; 4], f64) {
    let [l1, l2, l3, l4] = *w;
    let total: f64 = w.iter().sum();
    let s = (l1 + l4).powi(2) + (l2 + l3).powi(2);
    let out = [(l1 * l1 + l4 * l4) / s, 2.0 * l2 * l3 / s, (l2 * l2 + l3 * l3) / s, 2.0 * l1 * l4 / s];
    (out, s / (total * total))
}

/// The normal-form filter followed by the best Bell relabelling.
pub fn lomm_filter(rho: &DensityMatrix) -> Result<FilterOutcome> {
    let nf = normal_form(rho)?;
    if nf.form != CanonicalForm::LoMM {
        return Err(Error::NotLoMMReducible);
    }
    let p = best_bell_arrangement(&nf.filtered_state.bell_weights());
    let u = p.unitary();
    Ok(FilterOutcome {
        filter: nf.filter.then(&u),
        state: nf.filtered_state.apply_local_unitary(&u),
        prob: nf.filter_prob,
    })
}

pub fn lomm_round(rho: &DensityMatrix) -> Result<ProtocolOutcome> {
    let f = lomm_filter(rho)?;
    let (w, pd) = lomm_closed_form(&f.state.bell_weights());
    let total: f64 = w.iter().sum();
    let out = DensityMatrix::bell_diagonal(w.map(|x| x / total))?;
    Ok(ProtocolOutcome::new(out, f.prob, pd))
}

/// Bell weights of the output and success probability of one round keeping
/// outcome 11, for a Zinf-shaped state. With `p` the Bell weights (Φ⁺, Φ⁻,
/// Ψ⁺, Ψ⁻), `r = (R₃₀ + R₀₃)/4` and `s = (R₃₀ − R₀₃)/4`, the unnormalised
/// weights are `(p₁² + p₂²)/2 − r²`, `p₁p₂ − r²`, `(p₃² + p₄²)/2 − s²`,
/// `p₃p₄ − s²`.
pub fn zinf_closed_form(rho: &DensityMatrix) -> ([f64; 4], f64) {
    let w = rho.bell_weights();
    let (p1, p2, p3, p4) = (w[0], w[3], w[2], w[1]);
    let r = rho.to_rmatrix();
    let rr = (r.get(3, 0) + r.get(0, 3)) / 4.0;
    let ss = (r.get(3, 0) - r.get(0, 3)) / 4.0;
    let phi_p = 0.5 * (p1 * p1 + p2 * p2) - rr * rr;
    let phi_m = p1 * p2 - rr * rr;
    let psi_p = 0.5 * (p3 * p3 + p4 * p4) - ss * ss;
    let psi_m = p3 * p4 - ss * ss;
    let pd = phi_p + phi_m + psi_p + psi_m;
    // Ordered (Φ⁺, Ψ⁻, Ψ⁺, Φ⁻).
    ([phi_p / pd, psi_m / pd, psi_p / pd, phi_m / pd], pd)
}

pub fn zinf_round(rho: &DensityMatrix, objective: Objective) -> Result<ProtocolOutcome> {
    let choice = search_zinf_filter(rho, objective)?;
    let f = zinf_filter(rho, &choice.params)?;
    let (w, pd) = zinf_closed_form(&f.state);
    if !(pd > 1e-15) {
        return Err(Error::ZeroProbability(pd));
    }
    let w = w.map(|x| x.max(0.0));
    let total: f64 = w.iter().sum();
    let out = DensityMatrix::bell_diagonal(w.map(|x| x / total))?;
    Ok(ProtocolOutcome::new(out, f.prob, pd))
}

/// The one-sided Horodecki filter followed by a DEJMPS round.
pub fn horodecki_round(rho: &DensityMatrix) -> Result<ProtocolOutcome> {
    let f = horodecki_filter(rho)?;
    let d = dejmps_round(&f.state)?;
    Ok(ProtocolOutcome::new(d.output_state, f.prob, d.distil_prob))
}

/// Apply `filter` to both copies and run the explicit bilateral round.
pub fn filtered_round_explicit(
    rho: &DensityMatrix,
    filter: &LocalFilter,
    keep: &[(usize, usize)],
) -> Result<(DensityMatrix, f64, f64)> {
    let (s, pf) = crate::filtering::apply_filter(rho, filter)?;
    let (out, pd) = bilateral_cnot_and_measure(&s, &s, keep)?;
    Ok((out, pf, pd))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::BellLabel;
    use crate::random::{random_bell_weights, random_density_matrix, seeded};
    use approx::assert_relative_eq;

    #[test]
    fn bilateral_cnot_on_perfect_pairs() {
        let phi = DensityMatrix::bell(BellLabel::PhiPlus);
        let (out, p) = bilateral_cnot_and_measure(&phi, &phi, &KEEP_EVEN).unwrap();
        assert_relative_eq!(p, 1.0, epsilon = 1e-14);
        assert_relative_eq!(out.bell_fidelity(BellLabel::PhiPlus), 1.0, epsilon = 1e-14);
        let (_, p11) = bilateral_cnot_and_measure(&phi, &phi, &KEEP_11).unwrap();
        assert_relative_eq!(p11, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn bad_outcomes_are_rejected() {
        let phi = DensityMatrix::bell(BellLabel::PhiPlus);
        assert!(bilateral_cnot_and_measure(&phi, &phi, &[(2, 0)]).is_err());
        assert!(bilateral_cnot_and_measure(&phi, &phi, &[]).is_err());
    }

    #[test]
    fn odd_outcomes_of_phi_plus_never_occur() {
        let phi = DensityMatrix::bell(BellLabel::PhiPlus);
        assert!(matches!(bilateral_cnot_and_measure(&phi, &phi, &[(0, 1)]), Err(Error::ZeroProbability(_))));
    }

    #[test]
    fn dejmps_reference_values() {
        let rho = DensityMatrix::bell_diagonal([0.7, 0.1, 0.1, 0.1]).unwrap();
        let out = dejmps_round(&rho).unwrap();
        assert_relative_eq!(out.output_fidelity, 0.5 / 0.68, epsilon = 1e-12);
        assert_relative_eq!(out.distil_prob, 0.68, epsilon = 1e-12);
    }

    #[test]
    fn lomm_closed_form_matches_explicit_round() {
        let mut rng = seeded(21);
        for _ in 0..100 {
            let w = random_bell_weights(&mut rng);
            let rho = DensityMatrix::bell_diagonal(w).unwrap();
            let (cw, cp) = lomm_closed_form(&w);
            let (out, p) = bilateral_cnot_and_measure(&rho, &rho, &KEEP_EVEN).unwrap();
            assert_relative_eq!(p, cp, epsilon = 1e-12);
            let ow = out.bell_weights();
            for k in 0..4 {
                assert_relative_eq!(ow[k], cw[k], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn lomm_round_matches_filtered_explicit_round() {
        let mut rng = seeded(22);
        for _ in 0..50 {
            let rho = random_density_matrix(&mut rng);
            let r = lomm_round(&rho).unwrap();
            let f = lomm_filter(&rho).unwrap();
            let (out, pf, pd) = filtered_round_explicit(&rho, &f.filter, &KEEP_EVEN).unwrap();
            assert_relative_eq!(pf, r.filter_prob, epsilon = 1e-12);
            assert_relative_eq!(pd, r.distil_prob, epsilon = 1e-9);
            assert_mat_close!(*out.matrix(), *r.output_state.matrix(), 1e-9);
        }
    }

    #[test]
    fn zinf_closed_form_matches_explicit_round() {
        let mut rng = seeded(23);
        for _ in 0..50 {
            let rho = random_density_matrix(&mut rng);
            let r = zinf_round(&rho, Objective::MaxPall).unwrap();
            let params = crate::filtering::optimize_zinf_filter(&rho, Objective::MaxPall).unwrap();
            let f = zinf_filter(&rho, &params).unwrap();
            let (out, pf, pd) = filtered_round_explicit(&rho, &f.filter, &KEEP_11).unwrap();
            assert_relative_eq!(pf, r.filter_prob, epsilon = 1e-12);
            assert_relative_eq!(pd, r.distil_prob, epsilon = 1e-9);
            assert_mat_close!(*out.matrix(), *r.output_state.matrix(), 1e-9);
        }
    }

    #[test]
    fn zinf_distil_prob_is_at_most_half() {
        let mut rng = seeded(24);
        for _ in 0..50 {
            let rho = random_density_matrix(&mut rng);
            for obj in [Objective::MaxPall, Objective::MaxFidelity] {
                assert!(zinf_round(&rho, obj).unwrap().distil_prob <= 0.5 + 1e-12);
            }
        }
    }

    #[test]
    fn best_arrangement_puts_extremes_on_phi() {
        let p = best_bell_arrangement(&[0.1, 0.6, 0.05, 0.25]);
        let w = p.apply(&[0.1, 0.6, 0.05, 0.25]);
        assert_eq!(w[0], 0.6);
        assert_eq!(w[3], 0.05);
        assert_eq!(best_bell_arrangement(&[0.7, 0.1, 0.1, 0.1]), BellPermutation::IDENTITY);
    }
}
