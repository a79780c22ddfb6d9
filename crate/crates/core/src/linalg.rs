//! Small dense complex linear algebra shared by every module.
//!
//! Everything here works on fixed-size nalgebra matrices: 2x2 for single
//! qubits, 4x4 for a pair, 16x16 for two pairs.

use nalgebra::{Matrix2, Matrix3, Matrix4, SMatrix, SymmetricEigen, Vector2, Vector4};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;
pub type Mat16 = SMatrix<C64, 16, 16>;
pub type Ket2 = Vector2<C64>;
pub type Ket4 = Vector4<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Pauli matrix `σ_i` for `i` in 0..4, ordered (1, X, Y, Z).
pub fn pauli(i: usize) -> Mat2 {
    match i {
        0 => Mat2::identity(),
        1 => Mat2::new(ZERO, ONE, ONE, ZERO),
        2 => Mat2::new(ZERO, -I, I, ZERO),
        3 => Mat2::new(ONE, ZERO, ZERO, -ONE),
        _ => panic!("pauli index {i} out of range"),
    }
}

pub fn hadamard() -> Mat2 {
    let h = c(std::f64::consts::FRAC_1_SQRT_2);
    Mat2::new(h, h, h, -h)
}

pub fn phase_s() -> Mat2 {
    Mat2::new(ONE, ZERO, ZERO, I)
}

pub fn projector(bit: usize) -> Mat2 {
    let mut p = Mat2::zeros();
    p[(bit, bit)] = ONE;
    p
}

pub fn kron2(a: &Mat2, b: &Mat2) -> Mat4 {
    Mat4::from_fn(|i, j| a[(i >> 1, j >> 1)] * b[(i & 1, j & 1)])
}

pub fn kron4(a: &Mat4, b: &Mat4) -> Mat16 {
    Mat16::from_fn(|i, j| a[(i >> 2, j >> 2)] * b[(i & 3, j & 3)])
}

pub fn ket2(a: C64, b: C64) -> Ket2 {
    Ket2::new(a, b)
}

pub fn kron_ket(a: &Ket2, b: &Ket2) -> Ket4 {
    Ket4::new(a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
}

/// Largest elementwise modulus of `m - m†`.
pub fn hermiticity_defect<const N: usize>(m: &SMatrix<C64, N, N>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..N {
        for j in i..N {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitian_part<const N: usize>(m: &SMatrix<C64, N, N>) -> SMatrix<C64, N, N> {
    (m + m.adjoint()) * c(0.5)
}

pub fn max_abs<const R: usize, const C: usize>(m: &SMatrix<C64, R, C>) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

pub fn unitarity_defect(u: &Mat2) -> f64 {
    max_abs(&(u.adjoint() * u - Mat2::identity()))
}

/// Eigen-decomposition of a Hermitian 4x4 matrix with ascending eigenvalues.
pub fn hermitian_eigen4(m: &Mat4) -> ([f64; 4], Mat4) {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.map(|k| eig.eigenvalues[k]);
    let vectors = Mat4::from_fn(|i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

pub fn hermitian_eigenvalues4(m: &Mat4) -> [f64; 4] {
    hermitian_eigen4(m).0
}

/// `V f(D) V†` for a Hermitian 4x4 matrix.
pub fn hermitian_map4(m: &Mat4, f: impl Fn(f64) -> f64) -> Mat4 {
    let (vals, vecs) = hermitian_eigen4(m);
    let d = Mat4::from_diagonal(&Vector4::from_fn(|i, _| c(f(vals[i]))));
    vecs * d * vecs.adjoint()
}

/// Eigen-decomposition of a Hermitian 2x2 matrix, ascending.
pub fn hermitian_eigen2(m: &Mat2) -> ([f64; 2], Mat2) {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let (a, b) = if eig.eigenvalues[0] <= eig.eigenvalues[1] { (0, 1) } else { (1, 0) };
    let vecs = Mat2::from_fn(|i, j| eig.eigenvectors[(i, if j == 0 { a } else { b })]);
    ([eig.eigenvalues[a], eig.eigenvalues[b]], vecs)
}

pub fn hermitian_map2(m: &Mat2, f: impl Fn(f64) -> f64) -> Mat2 {
    let (vals, vecs) = hermitian_eigen2(m);
    let d = Mat2::new(c(f(vals[0])), ZERO, ZERO, c(f(vals[1])));
    vecs * d * vecs.adjoint()
}

/// Singular values `(σ_max, σ_min)` of a 2x2 complex matrix.
pub fn singular_values2(m: &Mat2) -> (f64, f64) {
    // Largest eigenvalue of M†M from a sum of squares, so no cancellation
    // when the singular values nearly coincide.
    let h = m.adjoint() * m;
    let (p, r) = (h[(0, 0)].re, h[(1, 1)].re);
    let half = 0.5 * (p - r);
    let smax = (0.5 * (p + r) + (half * half + h[(0, 1)].norm_sqr()).sqrt()).sqrt();
    let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).norm();
    let smin = if smax > 0.0 { (det / smax).min(smax) } else { 0.0 };
    (smax, smin)
}

pub fn det2(m: &Mat2) -> C64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

/// Bloch-sphere rotation induced by a single-qubit unitary:
/// `O_ab = ½ tr(σ_a U σ_b U†)` for a, b in {X, Y, Z}.
pub fn bloch_rotation(u: &Mat2) -> Matrix3<f64> {
    let ud = u.adjoint();
    Matrix3::from_fn(|a, b| 0.5 * (pauli(a + 1) * u * pauli(b + 1) * ud).trace().re)
}

/// An SU(2) element whose Bloch rotation is `o` (which must be proper orthogonal).
pub fn su2_from_rotation(o: &Matrix3<f64>) -> Mat2 {
    // Shepperd's method: pick the largest quaternion component to divide by.
    let tr = o.trace();
    let (w, x, y, z);
    if tr > o[(0, 0)] && tr > o[(1, 1)] && tr > o[(2, 2)] {
        let s = (1.0 + tr).sqrt() * 2.0;
        w = 0.25 * s;
        x = (o[(2, 1)] - o[(1, 2)]) / s;
        y = (o[(0, 2)] - o[(2, 0)]) / s;
        z = (o[(1, 0)] - o[(0, 1)]) / s;
    } else if o[(0, 0)] > o[(1, 1)] && o[(0, 0)] > o[(2, 2)] {
        let s = (1.0 + o[(0, 0)] - o[(1, 1)] - o[(2, 2)]).sqrt() * 2.0;
        w = (o[(2, 1)] - o[(1, 2)]) / s;
        x = 0.25 * s;
        y = (o[(0, 1)] + o[(1, 0)]) / s;
        z = (o[(0, 2)] + o[(2, 0)]) / s;
    } else if o[(1, 1)] > o[(2, 2)] {
        let s = (1.0 + o[(1, 1)] - o[(0, 0)] - o[(2, 2)]).sqrt() * 2.0;
        w = (o[(0, 2)] - o[(2, 0)]) / s;
        x = (o[(0, 1)] + o[(1, 0)]) / s;
        y = 0.25 * s;
        z = (o[(1, 2)] + o[(2, 1)]) / s;
    } else {
        let s = (1.0 + o[(2, 2)] - o[(0, 0)] - o[(1, 1)]).sqrt() * 2.0;
        w = (o[(1, 0)] - o[(0, 1)]) / s;
        x = (o[(0, 2)] + o[(2, 0)]) / s;
        y = (o[(1, 2)] + o[(2, 1)]) / s;
        z = 0.25 * s;
    }
    let n = (w * w + x * x + y * y + z * z).sqrt();
    let (w, x, y, z) = (w / n, x / n, y / n, z / n);
    // U = w·1 − i(x X + y Y + z Z) rotates Bloch vectors by the quaternion (w, x, y, z).
    Mat2::identity() * c(w) - (pauli(1) * c(x) + pauli(2) * c(y) + pauli(3) * c(z)) * I
}

/// Embed a two-qubit operator acting on qubits `(p, q)` of an `n`-qubit
/// register (qubit 0 most significant). `op` is indexed with `p` as its
/// leading factor.
pub fn embed_two_qubit(op: &Mat4, p: usize, q: usize, n: usize) -> nalgebra::DMatrix<C64> {
    let dim = 1usize << n;
    let bit = |x: usize, k: usize| (x >> (n - 1 - k)) & 1;
    let mask = (1usize << (n - 1 - p)) | (1usize << (n - 1 - q));
    nalgebra::DMatrix::from_fn(dim, dim, |i, j| {
        if (i & !mask) != (j & !mask) {
            return ZERO;
        }
        let oi = (bit(i, p) << 1) | bit(i, q);
        let oj = (bit(j, p) << 1) | bit(j, q);
        op[(oi, oj)]
    })
}

/// The 4x4 block of a 16x16 operator on qubits (A1, B1, A2, B2) selected by
/// the computational-basis outcome `(a, b)` of the first two qubits.
pub fn outcome_block(m: &Mat16, a: usize, b: usize) -> Mat4 {
    let off = ((a << 1) | b) << 2;
    Mat4::from_fn(|i, j| m[(off + i, off + j)])
}

pub fn to_mat16(m: &nalgebra::DMatrix<C64>) -> Mat16 {
    Mat16::from_fn(|i, j| m[(i, j)])
}
