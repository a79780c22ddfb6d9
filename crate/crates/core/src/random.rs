//! Seeded random states, unitaries and filters for tests, benches and the
//! CLI's Monte Carlo demo.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::entanglement::concurrence_spectrum;
use crate::filtering::LocalFilter;
use crate::linalg::{c, kron_ket, pauli, singular_values2, Ket2, Mat2, Mat4, C64, I};
use crate::qstate::{DensityMatrix, LocalUnitary};

pub type Rng64 = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// `G G† / tr(G G†)` for a complex Ginibre `G`; full rank with probability one.
pub fn random_density_matrix<R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix {
    let g = Mat4::from_fn(|_, _| gaussian(rng));
    DensityMatrix::from_operator(g * g.adjoint()).expect("Ginibre product is positive")
}

/// A random state with concurrence at least `min_concurrence`.
pub fn random_entangled_state<R: Rng + ?Sized>(rng: &mut R, min_concurrence: f64) -> DensityMatrix {
    loop {
        let rho = random_density_matrix(rng);
        if let Ok(spec) = concurrence_spectrum(&rho) {
            if spec.concurrence >= min_concurrence {
                return rho;
            }
        }
    }
}

/// Haar-random SU(2) element from a uniform unit quaternion.
pub fn random_su2<R: Rng + ?Sized>(rng: &mut R) -> Mat2 {
    let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let [w, x, y, z] = q.map(|v| v / n);
    Mat2::identity() * c(w) - (pauli(1) * c(x) + pauli(2) * c(y) + pauli(3) * c(z)) * I
}

pub fn random_local_unitary<R: Rng + ?Sized>(rng: &mut R) -> LocalUnitary {
    LocalUnitary::new(random_su2(rng), random_su2(rng)).expect("SU(2) elements are unitary")
}

/// A random 2x2 complex matrix scaled to unit largest singular value.
pub fn random_filter_side<R: Rng + ?Sized>(rng: &mut R) -> Mat2 {
    let m = Mat2::from_fn(|_, _| gaussian(rng));
    let (smax, _) = singular_values2(&m);
    m / c(smax)
}

pub fn random_local_filter<R: Rng + ?Sized>(rng: &mut R) -> LocalFilter {
    LocalFilter::new(random_filter_side(rng), random_filter_side(rng)).expect("scaled to unit norm")
}

pub fn random_qubit_ket<R: Rng + ?Sized>(rng: &mut R) -> Ket2 {
    let k = Ket2::new(gaussian(rng), gaussian(rng));
    k / c(k.norm())
}

/// Mixture of `terms` random pure product states with random weights.
pub fn random_separable_state<R: Rng + ?Sized>(rng: &mut R, terms: usize) -> DensityMatrix {
    let mut m = Mat4::zeros();
    for _ in 0..terms {
        let k = kron_ket(&random_qubit_ket(rng), &random_qubit_ket(rng));
        let w: f64 = rng.random();
        m += k * k.adjoint() * c(w);
    }
    DensityMatrix::from_operator(m).expect("mixture of product states")
}

/// Random Bell weights, uniform on the simplex.
pub fn random_bell_weights<R: Rng + ?Sized>(rng: &mut R) -> [f64; 4] {
    let e: [f64; 4] = std::array::from_fn(|_| -(1.0 - rng.random::<f64>()).ln());
    let s: f64 = e.iter().sum();
    let mut w = e.map(|x| x / s);
    let drift = 1.0 - w.iter().sum::<f64>();
    w[0] += drift;
    w
}
