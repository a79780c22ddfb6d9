//! Bell basis conventions and the local unitaries that permute Bell states.
//!
//! Computational ordering is |00⟩, |01⟩, |10⟩, |11⟩ and
//! |Φ±⟩ = (|00⟩ ± |11⟩)/√2, |Ψ±⟩ = (|01⟩ ± |10⟩)/√2.
//! Weight vectors are always ordered (Φ⁺, Ψ⁻, Ψ⁺, Φ⁻).

use std::collections::VecDeque;
use std::sync::OnceLock;

use crate::linalg::{c, hadamard, pauli, phase_s, Ket4, Mat2, ZERO};
use crate::qstate::LocalUnitary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BellLabel {
    PhiPlus,
    PsiMinus,
    PsiPlus,
    PhiMinus,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] = [BellLabel::PhiPlus, BellLabel::PsiMinus, BellLabel::PsiPlus, BellLabel::PhiMinus];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> BellLabel {
        Self::ALL[i]
    }

    /// Even-parity (Φ) sector or odd-parity (Ψ) sector.
    pub fn is_phi(self) -> bool {
        matches!(self, BellLabel::PhiPlus | BellLabel::PhiMinus)
    }

    pub fn ket(self) -> Ket4 {
        let h = c(std::f64::consts::FRAC_1_SQRT_2);
        match self {
            BellLabel::PhiPlus => Ket4::new(h, ZERO, ZERO, h),
            BellLabel::PsiMinus => Ket4::new(ZERO, h, -h, ZERO),
            BellLabel::PsiPlus => Ket4::new(ZERO, h, h, ZERO),
            BellLabel::PhiMinus => Ket4::new(h, ZERO, ZERO, -h),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BellLabel::PhiPlus => "Phi+",
            BellLabel::PsiMinus => "Psi-",
            BellLabel::PsiPlus => "Psi+",
            BellLabel::PhiMinus => "Phi-",
        }
    }
}

/// A permutation of the four Bell labels: `0[i]` is where label `i` is sent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BellPermutation(pub [usize; 4]);

impl BellPermutation {
    pub const IDENTITY: BellPermutation = BellPermutation([0, 1, 2, 3]);

    /// Weights after relabelling: `out[perm[i]] = w[i]`.
    pub fn apply(&self, w: &[f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for i in 0..4 {
            out[self.0[i]] = w[i];
        }
        out
    }

    /// The local unitary realising this permutation (from a fixed Clifford table).
    pub fn unitary(&self) -> LocalUnitary {
        table()
            .iter()
            .find(|(p, _)| p == self)
            .map(|(_, u)| u.clone())
            .expect("every Bell permutation is realisable by local Cliffords")
    }

    /// Permutation taking arrangement `from` (label → slot contents) to `to`.
    /// Both are arrays of item ids per label; the result sends label `i`
    /// holding item `from[i]` to the label where `to` places that item.
    pub fn between(from: &[usize; 4], to: &[usize; 4]) -> BellPermutation {
        let mut p = [0usize; 4];
        for i in 0..4 {
            p[i] = to.iter().position(|&x| x == from[i]).expect("same item sets");
        }
        BellPermutation(p)
    }
}

/// Permutation induced on the Bell basis by `u`, if `u` maps every Bell
/// state to a Bell state up to a phase.
pub fn induced_permutation(u: &LocalUnitary) -> Option<BellPermutation> {
    let full = u.kron();
    let mut p = [0usize; 4];
    for (i, src) in BellLabel::ALL.iter().enumerate() {
        let v = full * src.ket();
        let hit = BellLabel::ALL.iter().position(|dst| (dst.ket().adjoint() * v)[(0, 0)].norm() > 1.0 - 1e-9)?;
        p[i] = hit;
    }
    Some(BellPermutation(p))
}

fn table() -> &'static Vec<(BellPermutation, LocalUnitary)> {
    static TABLE: OnceLock<Vec<(BellPermutation, LocalUnitary)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let id = Mat2::identity();
        let gens = [
            LocalUnitary::new_unchecked(phase_s(), phase_s()),
            LocalUnitary::new_unchecked(hadamard(), hadamard()),
            LocalUnitary::new_unchecked(pauli(1), id),
            LocalUnitary::new_unchecked(pauli(3), id),
        ];
        // Breadth-first search keeps the shortest word for each permutation,
        // and the identity maps to the identity unitary.
        let mut found: Vec<(BellPermutation, LocalUnitary)> =
            vec![(BellPermutation::IDENTITY, LocalUnitary::identity())];
        let mut queue = VecDeque::from([LocalUnitary::identity()]);
        while let Some(u) = queue.pop_front() {
            for g in &gens {
                let next = g.compose(&u);
                let p = induced_permutation(&next).expect("Cliffords permute Bell states");
                if found.iter().all(|(q, _)| *q != p) {
                    found.push((p, next.clone()));
                    queue.push_back(next);
                }
            }
        }
        assert_eq!(found.len(), 24);
        found
    })
}

/// All 24 Bell permutations with their realising local unitaries.
pub fn all_permutations() -> impl Iterator<Item = (BellPermutation, LocalUnitary)> {
    table().iter().cloned()
}
