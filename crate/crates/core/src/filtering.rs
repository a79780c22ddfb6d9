//! Local filters: the iterative LoMM normal form, the two-parameter Zinf
//! family with its optimiser, and the one-sided Horodecki filter.

use nalgebra::{Matrix3, SVD};

use crate::bell::{BellLabel, BellPermutation};
use crate::entanglement::concurrence_spectrum;
use crate::error::{Error, Result};
use crate::linalg::{
    c, det2, hermitian_eigen2, hermitian_eigen4, hermitian_map2, kron2, max_abs, singular_values2, su2_from_rotation,
    Mat2, Mat4, C64, ZERO,
};
use crate::protocols::zinf_closed_form;
use crate::qstate::{DensityMatrix, LocalUnitary};

/// Whitening iterations before a state is declared rank deficient.
pub const MAX_WHITENING_ITERS: usize = 100_000;
/// Over-relaxation exponent for the whitening steps; dropped to 1 if the
/// residual climbs well above its best value.
pub const WHITENING_OVERRELAX: f64 = 1.8;
/// Marginals within this of ½·1 (elementwise) count as maximally mixed.
pub const MARGINAL_TOL: f64 = 1e-11;
/// Filter outputs with a smaller trace are treated as annihilated.
pub const MIN_FILTER_PROB: f64 = 1e-15;
/// An R-matrix with every off-pattern entry below this is Zinf-shaped.
pub const ZINF_SHAPE_TOL: f64 = 1e-9;

const T_RANGE: f64 = 40.0;
const GRID: usize = 64;
const STEP_TOL: f64 = 1e-9;

/// `f_A ⊗ f_B` with each side of operator norm at most one.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFilter {
    pub fa: Mat2,
    pub fb: Mat2,
}

impl LocalFilter {
    pub fn new(fa: Mat2, fb: Mat2) -> Result<Self> {
        for m in [&fa, &fb] {
            let (s, _) = singular_values2(m);
            if !(s <= 1.0 + 1e-10) {
                return Err(Error::InvalidParameter(format!("filter has operator norm {s} > 1")));
            }
        }
        Ok(LocalFilter { fa, fb })
    }

    pub fn identity() -> Self {
        LocalFilter { fa: Mat2::identity(), fb: Mat2::identity() }
    }

    /// Rescale each side to unit largest singular value, which maximises
    /// the success probability without changing the output state.
    pub fn normalized(fa: Mat2, fb: Mat2) -> Result<Self> {
        let (sa, _) = singular_values2(&fa);
        let (sb, _) = singular_values2(&fb);
        if !(sa > 0.0 && sb > 0.0) || !sa.is_finite() || !sb.is_finite() {
            return Err(Error::FilterAnnihilates(0.0));
        }
        Ok(LocalFilter { fa: fa / c(sa), fb: fb / c(sb) })
    }

    pub fn kron(&self) -> Mat4 {
        kron2(&self.fa, &self.fb)
    }

    /// The filter followed by a local unitary.
    pub fn then(&self, u: &LocalUnitary) -> LocalFilter {
        LocalFilter { fa: u.ua * self.fa, fb: u.ub * self.fb }
    }

    pub fn determinants(&self) -> (C64, C64) {
        (det2(&self.fa), det2(&self.fb))
    }
}

/// A filter, the normalised state it produces and its success probability.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutcome {
    pub filter: LocalFilter,
    pub state: DensityMatrix,
    pub prob: f64,
}

/// `F ρ F† / tr(F ρ F†)` and the trace.
pub fn apply_filter(rho: &DensityMatrix, f: &LocalFilter) -> Result<(DensityMatrix, f64)> {
    let (m, p) = raw_filter(rho.matrix(), &f.fa, &f.fb);
    if !(p > MIN_FILTER_PROB) {
        return Err(Error::FilterAnnihilates(p));
    }
    Ok((DensityMatrix::from_operator(m)?, p))
}

fn raw_filter(rho: &Mat4, fa: &Mat2, fb: &Mat2) -> (Mat4, f64) {
    let k = kron2(fa, fb);
    let m = k * rho * k.adjoint();
    let p = m.trace().re;
    (m, p)
}

fn marginal_a(m: &Mat4) -> Mat2 {
    Mat2::new(m[(0, 0)] + m[(1, 1)], m[(0, 2)] + m[(1, 3)], m[(2, 0)] + m[(3, 1)], m[(2, 2)] + m[(3, 3)])
}

fn marginal_b(m: &Mat4) -> Mat2 {
    Mat2::new(m[(0, 0)] + m[(2, 2)], m[(0, 1)] + m[(2, 3)], m[(1, 0)] + m[(3, 2)], m[(1, 1)] + m[(3, 3)])
}

fn purity(m: &Mat2) -> f64 {
    (m * m).trace().re
}

fn z_filter(ca: f64, cbar: f64) -> Mat2 {
    Mat2::new(c(ca), ZERO, ZERO, c(cbar))
}

/// Local unitary whose Bloch rotations bring the correlation block `t` to
/// diagonal form. The identity when `t` is already diagonal.
pub(crate) fn diagonalizing_unitary(t: &Matrix3<f64>) -> LocalUnitary {
    let mut off = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                off = off.max(t[(i, j)].abs());
            }
        }
    }
    if off < 1e-14 {
        return LocalUnitary::identity();
    }
    let svd = SVD::new(*t, true, true);
    let mut u = svd.u.expect("requested U");
    let mut v = svd.v_t.expect("requested Vᵀ").transpose();
    if u.determinant() < 0.0 {
        u.column_mut(2).neg_mut();
    }
    if v.determinant() < 0.0 {
        v.column_mut(2).neg_mut();
    }
    LocalUnitary::new_unchecked(su2_from_rotation(&u.transpose()), su2_from_rotation(&v.transpose()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CanonicalForm {
    LoMM,
    RankDeficient,
}

/// Best-effort `(a, b, c)` read off the R-matrix of a rank-deficient state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalFormResult {
    pub form: CanonicalForm,
    pub filter: LocalFilter,
    pub filtered_state: DensityMatrix,
    pub filter_prob: f64,
    pub rd_params: Option<RdParams>,
    pub iterations: usize,
}

/// `m^{−ω/2}`.
fn whitening_step(m: &Mat2, omega: f64) -> Option<Mat2> {
    let (vals, _) = hermitian_eigen2(m);
    if !(vals[0] > 1e-14) {
        return None;
    }
    Some(hermitian_map2(m, |x| x.powf(-0.5 * omega)))
}

/// Alternately whiten the two marginals. `Err(iterations)` if the filter
/// degenerates or the iteration cap is hit.
fn whiten(rho: &Mat4) -> std::result::Result<(Mat2, Mat2, usize), usize> {
    let half = Mat2::identity() * c(0.5);
    let mut fa = Mat2::identity();
    let mut fb = Mat2::identity();
    let mut st = *rho;
    let mut omega = WHITENING_OVERRELAX;
    let mut best = f64::INFINITY;
    for it in 0..MAX_WHITENING_ITERS {
        let ma = marginal_a(&st);
        let mb = marginal_b(&st);
        let residual = max_abs(&(ma - half)).max(max_abs(&(mb - half)));
        if residual <= MARGINAL_TOL {
            return Ok((fa, fb, it));
        }
        if residual > 10.0 * best {
            omega = 1.0;
        }
        best = best.min(residual);
        let wa = whitening_step(&ma, omega).ok_or(it)?;
        fa = wa * fa;
        fa /= c(singular_values2(&fa).0);
        let (m, p) = raw_filter(rho, &fa, &fb);
        if !(p > 1e-14) {
            return Err(it);
        }
        st = m / c(p);
        let wb = whitening_step(&marginal_b(&st), omega).ok_or(it)?;
        fb = wb * fb;
        fb /= c(singular_values2(&fb).0);
        let (m, p) = raw_filter(rho, &fa, &fb);
        if !(p > 1e-14) {
            return Err(it);
        }
        st = m / c(p);
    }
    Err(MAX_WHITENING_ITERS)
}

/// Filter ρ to maximally mixed marginals and rotate the correlations to
/// diagonal form, giving a Bell-diagonal state. The Bell arrangement is left
/// as the rotation produces it.
pub fn normal_form(rho: &DensityMatrix) -> Result<NormalFormResult> {
    let spec = concurrence_spectrum(rho)?;
    if spec.lambdas[0] <= 1e-12 && purity(&rho.marginal_a()) > 1.0 - 1e-10 && purity(&rho.marginal_b()) > 1.0 - 1e-10 {
        return Err(Error::ProductState);
    }
    match whiten(rho.matrix()) {
        Ok((fa, fb, iterations)) => {
            let (m, _) = raw_filter(rho.matrix(), &fa, &fb);
            let white = DensityMatrix::from_operator(m)?;
            let u = diagonalizing_unitary(&white.to_rmatrix().correlations());
            let filter = LocalFilter::normalized(u.ua * fa, u.ub * fb)?;
            let (filtered_state, filter_prob) = apply_filter(rho, &filter)?;
            Ok(NormalFormResult {
                form: CanonicalForm::LoMM,
                filter,
                filtered_state,
                filter_prob,
                rd_params: None,
                iterations,
            })
        }
        Err(iterations) => {
            let r = rho.to_rmatrix();
            Ok(NormalFormResult {
                form: CanonicalForm::RankDeficient,
                filter: LocalFilter::identity(),
                filtered_state: rho.clone(),
                filter_prob: 1.0,
                rd_params: Some(RdParams {
                    a: 0.5 * (r.get(1, 1).abs() + r.get(2, 2).abs()),
                    b: r.get(3, 0),
                    c: r.get(0, 3),
                }),
                iterations,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Objective {
    /// Maximise the overall success probability `P_filter² · P_distil`.
    #[default]
    MaxPall,
    /// Maximise the output fidelity, then the success probability.
    MaxFidelity,
}

/// `z = diag(c, 1 − c)` on each side, applied after the normal-form filter
/// and the Bell arrangement selected by `pairing`.
///
/// A pairing splits the concurrence eigenvalues `λ₁ ≥ … ≥ λ₄` into the two
/// parity sectors and is named by the partner of `λ₁`: 0 pairs it with
/// `λ₄`, 1 with `λ₃`, 2 with `λ₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZinfFilterParams {
    pub ca: f64,
    pub cb: f64,
    pub pairing: usize,
}

impl ZinfFilterParams {
    pub fn identity() -> Self {
        ZinfFilterParams { ca: 0.5, cb: 0.5, pairing: 0 }
    }
}

/// Rank of `λ₁`'s partner for a pairing.
pub fn pairing_partner(pairing: usize) -> usize {
    3 - pairing
}

struct ZinfBase {
    filter: LocalFilter,
    prob: f64,
    /// Bell weights by rank, descending.
    lambdas: [f64; 4],
    /// Rank of the weight held by each Bell label.
    ranks: [usize; 4],
    /// Bell label holding each rank.
    order: [usize; 4],
}

#[allow(clippy::large_enum_variant)]
enum ZinfStart {
    Lomm(ZinfBase),
    /// Rank deficient but already Zinf-shaped: the identity is a valid start.
    Shaped,
}

fn zinf_start(rho: &DensityMatrix) -> Result<ZinfStart> {
    let nf = normal_form(rho)?;
    if nf.form == CanonicalForm::RankDeficient {
        if rho.to_rmatrix().zinf_defect() <= ZINF_SHAPE_TOL {
            return Ok(ZinfStart::Shaped);
        }
        return Err(Error::NotLoMMReducible);
    }
    let w = nf.filtered_state.bell_weights();
    let mut order = [0, 1, 2, 3];
    order.sort_by(|&a, &b| w[b].total_cmp(&w[a]));
    let mut ranks = [0; 4];
    for (r, &label) in order.iter().enumerate() {
        ranks[label] = r;
    }
    Ok(ZinfStart::Lomm(ZinfBase {
        filter: nf.filter,
        prob: nf.filter_prob,
        lambdas: order.map(|l| w[l]),
        ranks,
        order,
    }))
}

impl ZinfBase {
    /// Bell relabelling that puts the pairing's sectors into parity sectors.
    fn arrangement(&self, pairing: usize) -> LocalUnitary {
        let partner = pairing_partner(pairing);
        let top = BellLabel::from_index(self.order[0]);
        let mate = BellLabel::from_index(self.order[partner]);
        if top.is_phi() == mate.is_phi() {
            return LocalUnitary::identity();
        }
        let rest: Vec<usize> = (1..4).filter(|&r| r != partner).collect();
        let to = [0, rest[1], rest[0], partner];
        BellPermutation::between(&self.ranks, &to).unitary()
    }

    fn pre_filter(&self, pairing: usize) -> (Mat2, Mat2) {
        let u = self.arrangement(pairing);
        (u.ua * self.filter.fa, u.ub * self.filter.fb)
    }

    fn sectors(&self, pairing: usize) -> ([f64; 2], [f64; 2]) {
        let l = self.lambdas;
        let partner = pairing_partner(pairing);
        let rest: Vec<usize> = (1..4).filter(|&r| r != partner).collect();
        ([l[0], l[partner]], [l[rest[0]], l[rest[1]]])
    }

    /// `S = (λ_a + λ_b)² + (λ_c + λ_d)²` over `(Σλ)²`, and the output fidelity.
    fn pairing_scores(&self, pairing: usize) -> (f64, f64) {
        let ([a, b], [cc, d]) = self.sectors(pairing);
        let total: f64 = self.lambdas.iter().sum();
        let s = (a + b).powi(2) + (cc + d).powi(2);
        let fid = (a * a + b * b).max(cc * cc + d * d) / s;
        (s / (total * total), fid)
    }
}

fn logistic(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

/// `c (1 − c) / σ_max(z m)²` with `c = logistic(t)`. The overall success
/// probability factorises into one such term per side.
fn side_gain(t: f64, m: &Mat2) -> f64 {
    let (ca, cbar) = (logistic(t), logistic(-t));
    let (smax, _) = singular_values2(&(z_filter(ca, cbar) * m));
    ca * cbar / (smax * smax)
}

/// Grid search on `[-T_RANGE, T_RANGE]` followed by a compass search.
fn maximize_1d(f: impl Fn(f64) -> f64) -> (f64, f64) {
    let h = 2.0 * T_RANGE / (GRID - 1) as f64;
    let mut best_t = 0.0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..GRID {
        let t = -T_RANGE + h * i as f64;
        let v = f(t);
        if v > best {
            best = v;
            best_t = t;
        }
    }
    let mut step = h;
    while step > STEP_TOL * best_t.abs().max(1.0) {
        let mut moved = false;
        for cand in [best_t - step, best_t + step] {
            let cand = cand.clamp(-T_RANGE, T_RANGE);
            let v = f(cand);
            if v > best {
                best = v;
                best_t = cand;
                moved = true;
                break;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    (best_t, best)
}

/// Search result: the parameters and the success probability and output
/// fidelity they are predicted to give.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZinfChoice {
    pub params: ZinfFilterParams,
    pub pall: f64,
    pub fidelity: f64,
}

pub fn search_zinf_filter(rho: &DensityMatrix, objective: Objective) -> Result<ZinfChoice> {
    let base = match zinf_start(rho)? {
        ZinfStart::Lomm(b) => b,
        ZinfStart::Shaped => {
            let (w, pd) = zinf_closed_form(rho);
            let fidelity = w.iter().cloned().fold(0.0, f64::max);
            return Ok(ZinfChoice { params: ZinfFilterParams::identity(), pall: pd, fidelity });
        }
    };
    let mut best: Option<ZinfChoice> = None;
    for pairing in 0..3 {
        let (ma, mb) = base.pre_filter(pairing);
        let (ta, ga) = maximize_1d(|t| side_gain(t, &ma));
        let (tb, gb) = maximize_1d(|t| side_gain(t, &mb));
        let (s, fidelity) = base.pairing_scores(pairing);
        let pall = 0.5 * s * base.prob * base.prob * ga * ga * gb * gb;
        let cand =
            ZinfChoice { params: ZinfFilterParams { ca: logistic(ta), cb: logistic(tb), pairing }, pall, fidelity };
        let better = match (&best, objective) {
            (None, _) => true,
            (Some(b), Objective::MaxPall) => cand.pall > b.pall * (1.0 + 1e-12),
            (Some(b), Objective::MaxFidelity) => {
                cand.fidelity > b.fidelity + 1e-12
                    || ((cand.fidelity - b.fidelity).abs() <= 1e-12 && cand.pall > b.pall * (1.0 + 1e-12))
            }
        };
        if better {
            best = Some(cand);
        }
    }
    Ok(best.expect("three pairings searched"))
}

pub fn optimize_zinf_filter(rho: &DensityMatrix, objective: Objective) -> Result<ZinfFilterParams> {
    Ok(search_zinf_filter(rho, objective)?.params)
}

/// The composite filter `z · u · f`, rescaled, and its output. For
/// rank-deficient Zinf-shaped inputs only `z` is applied and `pairing` is
/// ignored.
pub fn zinf_filter(rho: &DensityMatrix, params: &ZinfFilterParams) -> Result<FilterOutcome> {
    let ZinfFilterParams { ca, cb, pairing } = *params;
    if !(0.0..=1.0).contains(&ca) || !(0.0..=1.0).contains(&cb) || pairing > 2 {
        return Err(Error::InvalidParameter(format!("Zinf parameters {params:?}")));
    }
    let (za, zb) = (z_filter(ca, 1.0 - ca), z_filter(cb, 1.0 - cb));
    let filter = match zinf_start(rho)? {
        ZinfStart::Lomm(base) => {
            let (ma, mb) = base.pre_filter(pairing);
            LocalFilter::normalized(za * ma, zb * mb)?
        }
        ZinfStart::Shaped => LocalFilter::normalized(za, zb)?,
    };
    let (state, prob) = apply_filter(rho, &filter)?;
    Ok(FilterOutcome { filter, state, prob })
}

/// `ρ^{T_B}`.
pub fn partial_transpose_b(m: &Mat4) -> Mat4 {
    Mat4::from_fn(|i, j| {
        let (a, b) = (i >> 1, i & 1);
        let (a2, b2) = (j >> 1, j & 1);
        m[((a << 1) | b2, (a2 << 1) | b)]
    })
}

fn basis_filter(v: &Mat2, t: f64) -> Mat2 {
    v * Mat2::new(c(t), ZERO, ZERO, c(1.0)) * v.adjoint()
}

fn direction_basis(theta: f64, phi: f64) -> Mat2 {
    let (s, co) = ((theta / 2.0).sin(), (theta / 2.0).cos());
    let e = C64::from_polar(1.0, phi);
    Mat2::new(c(co), -e.conj() * s, e * s, c(co))
}

/// One-sided filter `f_A = V diag(t, 1) V†` maximising the fully entangled
/// fraction. States already above ½ get the identity.
pub fn horodecki_filter(rho: &DensityMatrix) -> Result<FilterOutcome> {
    let conc = concurrence_spectrum(rho)?.concurrence;
    if conc <= 1e-12 {
        return Err(Error::NotEntangled(conc));
    }
    if rho.fully_entangled_fraction() > 0.5 + 1e-9 {
        return Ok(FilterOutcome { filter: LocalFilter::identity(), state: rho.clone(), prob: 1.0 });
    }
    let id = Mat2::identity();
    let score = |fa: Mat2| -> f64 {
        match apply_filter(rho, &LocalFilter { fa, fb: id }) {
            Ok((s, _)) => s.fully_entangled_fraction(),
            Err(_) => 0.0,
        }
    };

    // Candidate basis from the negative eigenvector of the partial transpose.
    let (_, vecs) = hermitian_eigen4(&partial_transpose_b(rho.matrix()));
    let w = vecs.column(0);
    let wm = Mat2::new(w[0], w[1], w[2], w[3]);
    let (_, va) = hermitian_eigen2(&(wm * wm.adjoint()));
    let swap = Mat2::new(ZERO, c(1.0), c(1.0), ZERO);
    let mut best = (f64::NEG_INFINITY, id);
    for v in [va, va * swap] {
        let h = 30.0 / 60.0;
        for i in 0..=60 {
            let t = (-(i as f64) * h).exp();
            let f = basis_filter(&v, t);
            let s = score(f);
            if s > best.0 {
                best = (s, f);
            }
        }
    }

    // Coarse global search over (θ, φ, log t), then compass refinement.
    let grid_theta = 9;
    let grid_phi = 16;
    let grid_t = 20;
    let mut gbest = (f64::NEG_INFINITY, [0.0; 3]);
    for i in 0..grid_theta {
        let theta = std::f64::consts::PI * i as f64 / (grid_theta - 1) as f64;
        for j in 0..grid_phi {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / grid_phi as f64;
            let v = direction_basis(theta, phi);
            for k in 1..=grid_t {
                let s = -20.0 * k as f64 / grid_t as f64;
                let val = score(basis_filter(&v, s.exp()));
                if val > gbest.0 {
                    gbest = (val, [theta, phi, s]);
                }
            }
        }
    }
    let eval = |x: &[f64; 3]| score(basis_filter(&direction_basis(x[0], x[1]), x[2].min(0.0).exp()));
    let mut x = gbest.1;
    let mut fx = gbest.0;
    let mut step = [std::f64::consts::PI / 8.0, std::f64::consts::PI / 8.0, 0.5];
    while step.iter().any(|&s| s > 1e-10) {
        let mut moved = false;
        for d in 0..3 {
            for sign in [-1.0, 1.0] {
                let mut y = x;
                y[d] += sign * step[d];
                let fy = eval(&y);
                if fy > fx {
                    x = y;
                    fx = fy;
                    moved = true;
                }
            }
        }
        if !moved {
            for s in &mut step {
                *s *= 0.5;
            }
        }
    }
    if fx > best.0 {
        best = (fx, basis_filter(&direction_basis(x[0], x[1]), x[2].min(0.0).exp()));
    }

    if best.0 <= 0.5 + 1e-9 {
        return Err(Error::FilterSearchFailed(best.0));
    }
    let filter = LocalFilter::normalized(best.1, id)?;
    let (state, prob) = apply_filter(rho, &filter)?;
    Ok(FilterOutcome { filter, state, prob })
}
