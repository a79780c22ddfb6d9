//! End-to-end behaviour on the noise families.

use std::f64::consts::FRAC_PI_4;

use distil::filtering::Objective;
use distil::pumping::{plus_plus, pumped_fidelity};
use distil::{
    amplitude_damped_state, apply_pump, dejmps_round, horodecki_round, lomm_round, photon_loss_state,
    pump_channel_from_state, symmetric_yield, two_level_pump, zinf_round, AmplitudeDampingParams, Error,
    PhotonLossParams, Protocol,
};

fn pl(eps: f64, g: f64) -> distil::DensityMatrix {
    photon_loss_state(&PhotonLossParams::new(eps, g).unwrap())
}

fn ad(gamma: f64, theta: f64) -> distil::DensityMatrix {
    amplitude_damped_state(&AmplitudeDampingParams::new(gamma, theta).unwrap())
}

#[test]
fn local_information_protocols_beat_dejmps_on_photon_loss() {
    for g in [0.001, 0.01, 0.1] {
        let rho = pl(0.4, g);
        let d = dejmps_round(&rho).unwrap().output_fidelity;
        assert!(lomm_round(&rho).unwrap().output_fidelity > d);
        assert!(zinf_round(&rho, Objective::MaxPall).unwrap().output_fidelity > d);
    }
}

#[test]
fn lomm_success_vanishes_as_depolarising_noise_vanishes() {
    let p: Vec<f64> = [1e-2, 1e-3, 1e-4].iter().map(|&g| lomm_round(&pl(0.4, g)).unwrap().overall_prob).collect();
    assert!(p[0] > 5.0 * p[1] && p[1] > 5.0 * p[2]);
    let z = zinf_round(&pl(0.4, 1e-4), Objective::MaxPall).unwrap();
    assert!(z.overall_prob > 0.1);
}

#[test]
fn amplitude_damping_in_the_computational_basis() {
    let rho = ad(0.5, 0.0);
    assert!((zinf_round(&rho, Objective::MaxPall).unwrap().output_fidelity - 1.0).abs() < 1e-10);
    assert!(dejmps_round(&rho).unwrap().output_fidelity <= 0.5 + 1e-12);
    assert!(matches!(lomm_round(&rho), Err(Error::NotLoMMReducible)));
    // The one-sided filter lifts the fully entangled fraction to 2/3.
    let h = horodecki_round(&rho).unwrap();
    assert!((h.filter_prob - 1.0 / 3.0).abs() < 1e-6);
    assert!((h.output_fidelity - 13.0 / 18.0).abs() < 1e-6);
}

#[test]
fn near_computational_damping_is_still_reducible() {
    let rho = ad(0.5, 0.01);
    let l = lomm_round(&rho).unwrap();
    assert!(l.output_fidelity > 0.999 && l.filter_prob < 1e-4);
}

#[test]
fn yields_converge_for_damping_at_a_quarter_turn() {
    let rho = ad(0.5, FRAC_PI_4);
    let ys: Vec<f64> = Protocol::ALL.iter().map(|&p| symmetric_yield(&rho, p, 0.99, 50).unwrap().yield_value).collect();
    let hi = ys.iter().cloned().fold(0.0, f64::max);
    let lo = ys.iter().cloned().fold(f64::MAX, f64::min);
    assert!(hi / lo < 4.0, "{ys:?}");
}

#[test]
fn zinf_has_the_best_yield_under_strong_local_information() {
    for eps in [0.3, 0.4, 0.5] {
        let rho = pl(eps, 0.01);
        let z = symmetric_yield(&rho, Protocol::Zinf(Objective::MaxPall), 0.99, 50).unwrap().yield_value;
        for p in [Protocol::Dejmps, Protocol::Horodecki, Protocol::Lomm] {
            if let Ok(r) = symmetric_yield(&rho, p, 0.99, 50) {
                assert!(z > 2.0 * r.yield_value, "eps {eps}, {p}");
            }
        }
    }
}

#[test]
fn pumping_without_depolarising_noise_is_perfect() {
    let ch = pump_channel_from_state(&pl(0.4, 0.0), Objective::MaxPall).unwrap();
    let (out, p) = apply_pump(&plus_plus(), &ch, 3).unwrap();
    assert!((pumped_fidelity(&out) - 1.0).abs() < 1e-12);
    assert!(p > 0.0 && p < 1.0);
}

#[test]
fn two_level_pumping_reports_compound_probability() {
    let t = two_level_pump(&pl(0.3, 0.05), 2, 2, Objective::MaxPall).unwrap();
    assert!(pumped_fidelity(&t.level1) > 0.5);
    assert!(t.compound_prob > 0.0 && t.compound_prob < t.level1_prob);
    assert!((t.state.matrix().trace().re - 1.0).abs() < 1e-12);
}
