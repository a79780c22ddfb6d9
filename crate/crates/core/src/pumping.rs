//! Pumped Zinf: the filter emulated by unitaries and two post-selections,
//! the resulting channel in closed form, its Jamiołkowski fidelity, and a
//! two-level pumping scheme.

use crate::bell::BellLabel;
use crate::error::{Error, Result};
use crate::filtering::{search_zinf_filter, zinf_filter, LocalFilter, Objective};
use crate::linalg::{
    c, det2, embed_two_qubit, ket2, kron2, kron4, outcome_block, pauli, projector, to_mat16, Ket2, Mat16, Mat2, Mat4,
    C64, ONE, ZERO,
};
use crate::qstate::DensityMatrix;

/// Rows of a filter side: `α₀⟨A₀| = ⟨1|g` and `α₁⟨A₁| = ⟨0|g`, so that
/// `g = α₀|1⟩⟨A₀| + α₁|0⟩⟨A₁|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideDecomposition {
    pub alpha: [C64; 2],
    pub kets: [Ket2; 2],
    /// Rows that vanished; their ket is an arbitrary `|0⟩`.
    pub zero_rows: [bool; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterDecomposition {
    pub a: SideDecomposition,
    pub b: SideDecomposition,
}

fn decompose_side(g: &Mat2) -> SideDecomposition {
    let mut alpha = [ZERO; 2];
    let mut kets = [ket2(ONE, ZERO); 2];
    let mut zero_rows = [false; 2];
    // Coefficient i reads row 1 − i.
    for i in 0..2 {
        let row = g.row(1 - i);
        let n = row.norm();
        if n <= 1e-15 {
            zero_rows[i] = true;
            continue;
        }
        alpha[i] = c(n);
        kets[i] = ket2(row[0].conj() / n, row[1].conj() / n);
    }
    SideDecomposition { alpha, kets, zero_rows }
}

pub fn decompose_filter(g: &LocalFilter) -> FilterDecomposition {
    FilterDecomposition { a: decompose_side(&g.fa), b: decompose_side(&g.fb) }
}

impl SideDecomposition {
    pub fn reconstruct(&self) -> Mat2 {
        let one = ket2(ZERO, ONE);
        let zero = ket2(ONE, ZERO);
        one * self.kets[0].adjoint() * self.alpha[0] + zero * self.kets[1].adjoint() * self.alpha[1]
    }
}

impl FilterDecomposition {
    pub fn reconstruct(&self) -> LocalFilter {
        LocalFilter { fa: self.a.reconstruct(), fb: self.b.reconstruct() }
    }
}

/// A unitary with `⟨1|W|1⟩ = c`.
pub fn w_gate(cv: C64) -> Result<Mat2> {
    let r = cv.norm();
    if r > 1.0 + 1e-12 {
        return Err(Error::NotUnitary(r - 1.0));
    }
    if r == 0.0 {
        return Ok(Mat2::new(ZERO, ONE, -ONE, ZERO));
    }
    let s = (1.0 - r * r).max(0.0).sqrt();
    let phase = cv / r;
    Ok(Mat2::new(c(r), c(s), -phase * s, cv))
}

/// The normalised ket orthogonal to `k`, phased so its first entry is real
/// and non-negative.
pub fn barred(k: &Ket2) -> Ket2 {
    let a1 = k[1].norm();
    if a1 == 0.0 {
        return ket2(ZERO, ONE);
    }
    ket2(c(a1), -k[0].conj() * (k[1] / a1))
}

/// Two-qubit unitaries on (A1, A2) and (B1, B2), each with the register-1
/// qubit as leading factor.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpUnitaries {
    pub ua: Mat4,
    pub ub: Mat4,
    pub va: Mat4,
    pub vb: Mat4,
}

fn side_unitaries(d: &SideDecomposition) -> Result<(Mat4, Mat4)> {
    let one = ket2(ZERO, ONE);
    let zero = ket2(ONE, ZERO);
    let mut u = Mat4::zeros();
    for i in 0..2 {
        let k = d.kets[i];
        let local = one * k.adjoint() + zero * barred(&k).adjoint();
        u += kron2(&local, &projector(i));
    }
    let flip10 = Mat2::new(ZERO, ZERO, ONE, ZERO);
    let flip01 = Mat2::new(ZERO, ONE, ZERO, ZERO);
    let v = kron2(&w_gate(d.alpha[0])?, &flip10) + kron2(&w_gate(d.alpha[1])?, &flip01);
    Ok((u, v))
}

pub fn build_pump_unitaries(d: &FilterDecomposition) -> Result<PumpUnitaries> {
    let (ua, va) = side_unitaries(&d.a)?;
    let (ub, vb) = side_unitaries(&d.b)?;
    Ok(PumpUnitaries { ua, ub, va, vb })
}

/// `⟨1|_{A1} V |1⟩⟨1|_{A1} U` as a map from (A1, A2) to A2.
pub fn emulated_side(u: &Mat4, v: &Mat4) -> nalgebra::SMatrix<C64, 2, 4> {
    let p1 = kron2(&projector(1), &Mat2::identity());
    let m = v * p1 * u;
    nalgebra::SMatrix::<C64, 2, 4>::from_fn(|i, j| m[(2 + i, j)])
}

/// `X_{A2} ⟨1|_{A1} CX_{A1}^{A2} g_{A1}` as a map from (A1, A2) to A2.
pub fn filtered_cnot_side(g: &Mat2) -> nalgebra::SMatrix<C64, 2, 4> {
    let id = Mat2::identity();
    let cx = kron2(&id, &projector(0)) + kron2(&pauli(1), &projector(1));
    let m = kron2(&id, &pauli(1)) * cx * kron2(g, &id);
    nalgebra::SMatrix::<C64, 2, 4>::from_fn(|i, j| m[(2 + i, j)])
}

/// `E(σ) = scale · [μ₊ P⁺ D₊(σ) P⁺ + μ₋ P⁻ D₋(σ) P⁻]` with
/// `D(σ) = (1 − q)σ + q Z_A σ Z_A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpChannel {
    pub mu_plus: f64,
    pub mu_minus: f64,
    pub q_plus: f64,
    pub q_minus: f64,
    /// `|det g_A det g_B|² / 4`: converts μ, defined from the concurrence
    /// eigenvalues of the base pair, into success probabilities.
    pub scale: f64,
}

fn sector(a: f64, b: f64) -> (f64, f64) {
    let mu = (a + b).powi(2);
    let q = if mu > 0.0 { 2.0 * a * b / mu } else { 0.0 };
    (mu, q)
}

impl PumpChannel {
    /// From concurrence eigenvalues of an already Zinf-shaped base pair:
    /// `even` sits in the even-parity sector.
    pub fn from_spectrum(even: [f64; 2], odd: [f64; 2]) -> Result<Self> {
        let (mu_plus, q_plus) = sector(even[0], even[1]);
        let (mu_minus, q_minus) = sector(odd[0], odd[1]);
        if mu_plus == 0.0 && mu_minus == 0.0 {
            return Err(Error::DegenerateChannel);
        }
        Ok(PumpChannel { mu_plus, mu_minus, q_plus, q_minus, scale: 0.25 })
    }
}

/// Oriented pump filter, its channel and the filtered base pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpSetup {
    pub filter: LocalFilter,
    pub channel: PumpChannel,
    pub filtered: DensityMatrix,
    pub filter_prob: f64,
}

/// Largest concurrence eigenvalue in each parity sector of a Zinf-shaped
/// state: `√(n₀₀n₁₁) + |ρ₀₀,₁₁|` and `√(n₀₁n₁₀) + |ρ₀₁,₁₀|`.
fn sector_tops(m: &Mat4) -> (f64, f64) {
    let even = (m[(0, 0)].re * m[(3, 3)].re).max(0.0).sqrt() + m[(0, 3)].norm();
    let odd = (m[(1, 1)].re * m[(2, 2)].re).max(0.0).sqrt() + m[(1, 2)].norm();
    (even, odd)
}

/// Zinf filter for `rho`, oriented so the sector holding `λ₁` is the even one.
pub fn pump_setup(rho: &DensityMatrix, objective: Objective) -> Result<PumpSetup> {
    let choice = search_zinf_filter(rho, objective)?;
    let f = zinf_filter(rho, &choice.params)?;
    let mut filter = f.filter;
    let mut m = *f.state.matrix();
    let (even, odd) = sector_tops(&m);
    if odd > even + 1e-15 {
        let x = kron2(&pauli(1), &Mat2::identity());
        filter.fa = pauli(1) * filter.fa;
        m = x * m * x;
    }
    let filtered = DensityMatrix::from_operator(m)?;
    let p = f.prob;
    let d = (det2(&filter.fa) * det2(&filter.fb)).norm_sqr();
    if !(d > 0.0) {
        return Err(Error::DegenerateChannel);
    }
    let (n00, n01, n10, n11) = (m[(0, 0)].re, m[(1, 1)].re, m[(2, 2)].re, m[(3, 3)].re);
    let x2 = m[(0, 3)].norm_sqr();
    let y2 = m[(1, 2)].norm_sqr();
    let mu_plus = 4.0 * n00 * n11 * p * p / d;
    let mu_minus = 4.0 * n01 * n10 * p * p / d;
    let q = |n: f64, z2: f64| if n > 0.0 { (0.5 * (1.0 - z2 / n)).max(0.0) } else { 0.0 };
    if mu_plus == 0.0 && mu_minus == 0.0 {
        return Err(Error::DegenerateChannel);
    }
    let channel =
        PumpChannel { mu_plus, mu_minus, q_plus: q(n00 * n11, x2), q_minus: q(n01 * n10, y2), scale: d / 4.0 };
    Ok(PumpSetup { filter, channel, filtered, filter_prob: p })
}

pub fn pump_channel_from_state(rho: &DensityMatrix, objective: Objective) -> Result<PumpChannel> {
    Ok(pump_setup(rho, objective)?.channel)
}

fn parity_projectors() -> (Mat4, Mat4) {
    let zz = kron2(&pauli(3), &pauli(3));
    let id = Mat4::identity();
    ((id + zz) * c(0.5), (id - zz) * c(0.5))
}

fn dephase(sigma: &Mat4, q: f64, n: usize) -> Mat4 {
    let za = kron2(&pauli(3), &Mat2::identity());
    let mut s = *sigma;
    for _ in 0..n {
        s = s * c(1.0 - q) + za * s * za * c(q);
    }
    s
}

/// Unnormalised `Eⁿ(σ)`.
pub fn pump_operator(sigma: &Mat4, ch: &PumpChannel, n: usize) -> Mat4 {
    let (pp, pm) = parity_projectors();
    let even = pp * dephase(sigma, ch.q_plus, n) * pp * c(ch.mu_plus.powi(n as i32));
    let odd = pm * dephase(sigma, ch.q_minus, n) * pm * c(ch.mu_minus.powi(n as i32));
    (even + odd) * c(ch.scale.powi(n as i32))
}

/// `Eⁿ(σ)` normalised, and the probability that all `2n` rounds succeed.
pub fn apply_pump(sigma: &DensityMatrix, ch: &PumpChannel, n: usize) -> Result<(DensityMatrix, f64)> {
    let (pp, pm) = parity_projectors();
    let s = sigma.matrix();
    let even = pp * dephase(s, ch.q_plus, n) * pp;
    let odd = pm * dephase(s, ch.q_minus, n) * pm;
    let top = ch.mu_plus.max(ch.mu_minus);
    if top == 0.0 {
        return Err(Error::DegenerateChannel);
    }
    // Weights relative to the dominant sector keep large n finite.
    let (wp, wm) = ((ch.mu_plus / top).powi(n as i32), (ch.mu_minus / top).powi(n as i32));
    let m = even * c(wp) + odd * c(wm);
    let rel = m.trace().re;
    if !(rel > 1e-15) {
        return Err(Error::ZeroProbability(rel));
    }
    let prob = rel * (top * ch.scale).powi(n as i32);
    Ok((DensityMatrix::from_operator(m)?, prob))
}

/// `μ₊ⁿ/(μ₊ⁿ + μ₋ⁿ) · Σ_{k even} C(n,k) (1 − q₊)^{n−k} q₊^k`.
pub fn jamiolkowski_fidelity(ch: &PumpChannel, n: usize) -> Result<f64> {
    if ch.mu_plus == 0.0 && ch.mu_minus == 0.0 {
        return Err(Error::DegenerateChannel);
    }
    let ratio = if ch.mu_plus == 0.0 { 0.0 } else { 1.0 / (1.0 + (ch.mu_minus / ch.mu_plus).powi(n as i32)) };
    let q = ch.q_plus;
    let mut term = (1.0 - q).powi(n as i32);
    let mut sum = term;
    for k in 0..n {
        term *= (n - k) as f64 / (k + 1) as f64 * q / (1.0 - q);
        if (k + 1) % 2 == 0 {
            sum += term;
        }
    }
    if q == 1.0 {
        sum = if n.is_multiple_of(2) { 1.0 } else { 0.0 };
    }
    Ok(ratio * sum)
}

/// One successful pumping round, computed on the full register:
/// `U`, post-select 11 on A1 B1, reset A1 B1 to |11⟩, `V`, post-select 11.
/// Unnormalised; `sigma` need not be a state.
pub struct ExplicitPump {
    rho: Mat4,
    u: Mat16,
    v: Mat16,
}

impl ExplicitPump {
    pub fn new(rho: &DensityMatrix, unitaries: &PumpUnitaries) -> Self {
        let u = to_mat16(&(embed_two_qubit(&unitaries.ua, 0, 2, 4) * embed_two_qubit(&unitaries.ub, 1, 3, 4)));
        let v = to_mat16(&(embed_two_qubit(&unitaries.va, 0, 2, 4) * embed_two_qubit(&unitaries.vb, 1, 3, 4)));
        ExplicitPump { rho: *rho.matrix(), u, v }
    }

    pub fn from_setup(rho: &DensityMatrix, setup: &PumpSetup) -> Result<Self> {
        Ok(Self::new(rho, &build_pump_unitaries(&decompose_filter(&setup.filter))?))
    }

    pub fn apply_m(&self, sigma: &Mat4) -> Mat4 {
        let first = outcome_block(&(self.u * kron4(&self.rho, sigma) * self.u.adjoint()), 1, 1);
        let mut reset = Mat4::zeros();
        reset[(3, 3)] = ONE;
        outcome_block(&(self.v * kron4(&reset, &first) * self.v.adjoint()), 1, 1)
    }

    pub fn apply_m_times(&self, sigma: &Mat4, times: usize) -> Mat4 {
        (0..times).fold(*sigma, |s, _| self.apply_m(&s))
    }

    /// Jamiołkowski fidelity of `Eⁿ` against the even-parity projection,
    /// from the Choi matrix built input by input.
    pub fn choi_fidelity(&self, n: usize) -> f64 {
        let mut choi = Mat16::zeros();
        for i in 0..4 {
            for j in 0..4 {
                let mut e = Mat4::zeros();
                e[(i, j)] = ONE;
                let out = self.apply_m_times(&e, 2 * n);
                let mut eref = Mat4::zeros();
                eref[(i, j)] = ONE;
                choi += kron4(&out, &eref);
            }
        }
        let mut target = nalgebra::SVector::<C64, 16>::zeros();
        // |00⟩_sys|00⟩_ref + |11⟩_sys|11⟩_ref.
        target[0] = c(std::f64::consts::FRAC_1_SQRT_2);
        target[15] = c(std::f64::consts::FRAC_1_SQRT_2);
        (target.adjoint() * choi * target)[(0, 0)].re / choi.trace().re
    }
}

/// `|++⟩⟨++|`.
pub fn plus_plus() -> DensityMatrix {
    let plus = ket2(c(std::f64::consts::FRAC_1_SQRT_2), c(std::f64::consts::FRAC_1_SQRT_2));
    DensityMatrix::from_ket(&crate::linalg::kron_ket(&plus, &plus))
}

/// Result of two pumping levels.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoLevelPump {
    pub level1: DensityMatrix,
    pub level1_prob: f64,
    pub state: DensityMatrix,
    /// Probability that one level-2 run succeeds given level-1 outputs to
    /// feed it, times the chance of producing each of the `2 n₂` inputs.
    pub compound_prob: f64,
}

/// Level 1 pumps `|++⟩` with `rho` for `n1` applications of `E`; its output
/// is the base pair for level 2, which pumps a fresh `|++⟩` `n2` times.
pub fn two_level_pump(rho: &DensityMatrix, n1: usize, n2: usize, objective: Objective) -> Result<TwoLevelPump> {
    let s1 = pump_setup(rho, objective)?;
    let (level1, p1) = apply_pump(&plus_plus(), &s1.channel, n1)?;
    let s2 = pump_setup(&level1, objective)?;
    let (state, p2) = apply_pump(&plus_plus(), &s2.channel, n2)?;
    Ok(TwoLevelPump { level1, level1_prob: p1, state, compound_prob: p2 * p1.powi(2 * n2 as i32) })
}

/// Fidelity of a pumped state with the Bell state it approaches.
pub fn pumped_fidelity(state: &DensityMatrix) -> f64 {
    state.bell_fidelity(BellLabel::PhiPlus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use crate::noise::{photon_loss_state, PhotonLossParams};
    use crate::random::{random_density_matrix, random_filter_side, seeded};
    use approx::assert_relative_eq;

    #[test]
    fn decomposition_reconstructs() {
        let mut rng = seeded(31);
        for _ in 0..100 {
            let g = LocalFilter::new(random_filter_side(&mut rng), random_filter_side(&mut rng)).unwrap();
            let d = decompose_filter(&g);
            let back = d.reconstruct();
            assert!(max_abs(&(back.fa - g.fa)) < 1e-14 && max_abs(&(back.fb - g.fb)) < 1e-14);
            for a in d.a.alpha.iter().chain(d.b.alpha.iter()) {
                assert!(a.norm() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn zero_row_is_flagged() {
        let g = LocalFilter { fa: projector(0), fb: Mat2::identity() };
        let d = decompose_filter(&g);
        assert_eq!(d.a.zero_rows, [true, false]);
        assert!(max_abs(&(d.reconstruct().fa - g.fa)) < 1e-15);
    }

    #[test]
    fn w_gate_properties() {
        for cv in [c(0.0), c(1.0), C64::new(0.3, -0.4), C64::new(0.0, 0.9)] {
            let w = w_gate(cv).unwrap();
            assert!(crate::linalg::unitarity_defect(&w) < 1e-14);
            assert_relative_eq!(w[(1, 1)].re, cv.re, epsilon = 1e-15);
            assert_relative_eq!(w[(1, 1)].im, cv.im, epsilon = 1e-15);
        }
        assert!(matches!(w_gate(c(1.5)), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn pump_unitaries_emulate_filter_and_cnot() {
        let mut rng = seeded(32);
        for _ in 0..100 {
            let g = LocalFilter::new(random_filter_side(&mut rng), random_filter_side(&mut rng)).unwrap();
            let u = build_pump_unitaries(&decompose_filter(&g)).unwrap();
            for m in [&u.ua, &u.ub, &u.va, &u.vb] {
                assert!(max_abs(&(m.adjoint() * *m - Mat4::identity())) < 1e-12);
            }
            let lhs = emulated_side(&u.ua, &u.va);
            let rhs = filtered_cnot_side(&g.fa);
            assert!(max_abs(&(lhs - rhs)) < 1e-12);
            let lhs = emulated_side(&u.ub, &u.vb);
            let rhs = filtered_cnot_side(&g.fb);
            assert!(max_abs(&(lhs - rhs)) < 1e-12);
        }
    }

    #[test]
    fn closed_form_matches_explicit_rounds() {
        let mut rng = seeded(33);
        for _ in 0..10 {
            let rho = random_density_matrix(&mut rng);
            let setup = pump_setup(&rho, Objective::MaxFidelity).unwrap();
            let ex = ExplicitPump::from_setup(&rho, &setup).unwrap();
            let sigma = random_density_matrix(&mut rng);
            for n in 1..=3 {
                let explicit = ex.apply_m_times(sigma.matrix(), 2 * n);
                let closed = pump_operator(sigma.matrix(), &setup.channel, n);
                let scale = max_abs(&closed).max(1e-300);
                assert!(max_abs(&(explicit - closed)) / scale < 1e-9, "n = {n}");
            }
        }
    }

    #[test]
    fn photon_loss_without_depolarising_pumps_to_unit_fidelity() {
        let rho = photon_loss_state(&PhotonLossParams::new(0.4, 0.0).unwrap());
        let setup = pump_setup(&rho, Objective::MaxPall).unwrap();
        assert_relative_eq!(setup.channel.mu_plus, 0.36, epsilon = 1e-12);
        assert_eq!(setup.channel.q_plus, 0.0);
        for n in 1..5 {
            assert_relative_eq!(jamiolkowski_fidelity(&setup.channel, n).unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn jamiolkowski_sum_matches_factorised_form() {
        let ch = PumpChannel { mu_plus: 0.5, mu_minus: 0.1, q_plus: 0.2, q_minus: 0.3, scale: 0.25 };
        for n in 0..20 {
            let f = jamiolkowski_fidelity(&ch, n).unwrap();
            let ratio = 0.5f64.powi(n as i32) / (0.5f64.powi(n as i32) + 0.1f64.powi(n as i32));
            assert_relative_eq!(f, ratio * (1.0 + 0.6f64.powi(n as i32)) / 2.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn degenerate_spectrum() {
        assert_eq!(PumpChannel::from_spectrum([0.0, 0.0], [0.0, 0.0]), Err(Error::DegenerateChannel));
    }

    #[test]
    fn barred_is_orthogonal() {
        let mut rng = seeded(34);
        for _ in 0..50 {
            let k = crate::random::random_qubit_ket(&mut rng);
            let b = barred(&k);
            assert!((k.adjoint() * b)[(0, 0)].norm() < 1e-15);
            assert_relative_eq!(b.norm(), 1.0, epsilon = 1e-15);
            assert!(b[0].im == 0.0 && b[0].re >= 0.0);
        }
    }
}
