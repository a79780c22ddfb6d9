//! Two-qubit entanglement distillation that exploits local information:
//! LoMM normal-form filtering, the Zinf filter family, pumped Zinf, and the
//! DEJMPS and Horodecki baselines, with noise models and yield accounting.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

#[cfg(test)]
macro_rules! assert_mat_close {
    ($a:expr, $b:expr, $tol:expr) => {{
        let d = crate::linalg::max_abs(&(($a) - ($b)));
        assert!(d <= $tol, "matrices differ by {d:e}");
    }};
}

pub mod bell;
pub mod entanglement;
pub mod error;
pub mod exec;
pub mod filtering;
pub mod linalg;
pub mod noise;
pub mod protocols;
pub mod pumping;
pub mod qstate;
pub mod random;
pub mod scheduling;

pub use bell::{BellLabel, BellPermutation};
pub use entanglement::{concurrence, concurrence_spectrum, ratio_signature, tilde, ConcurrenceSpectrum};
pub use error::{Error, Result};
pub use exec::Execution;
pub use filtering::{
    apply_filter, horodecki_filter, normal_form, optimize_zinf_filter, zinf_filter, CanonicalForm, FilterOutcome,
    LocalFilter, NormalFormResult, Objective, ZinfFilterParams,
};
pub use noise::{amplitude_damped_state, photon_loss_state, AmplitudeDampingParams, BasePair, PhotonLossParams};
pub use protocols::{
    bilateral_cnot_and_measure, dejmps_round, horodecki_round, lomm_round, zinf_round, ProtocolOutcome,
};
pub use pumping::{apply_pump, jamiolkowski_fidelity, pump_channel_from_state, two_level_pump, PumpChannel};
pub use qstate::{DensityMatrix, LocalUnitary, RMatrix};
pub use scheduling::{symmetric_yield, yield_sweep, Protocol, YieldReport};
