//! Invariants over random inputs. Each case draws its state from a seed so
//! failures shrink to a single reproducible seed.

use distil::filtering::{apply_filter, normal_form, search_zinf_filter, zinf_filter, CanonicalForm, Objective};
use distil::linalg::{hermiticity_defect, max_abs};
use distil::protocols::{bilateral_cnot_and_measure, filtered_round_explicit, lomm_closed_form, KEEP_11};
use distil::pumping::{jamiolkowski_fidelity, pump_operator, pump_setup, ExplicitPump};
use distil::random::{
    random_bell_weights, random_density_matrix, random_entangled_state, random_local_filter, random_local_unitary,
    seeded,
};
use distil::{
    concurrence, concurrence_spectrum, dejmps_round, lomm_round, ratio_signature, symmetric_yield, zinf_round,
    DensityMatrix, Execution, Protocol,
};
use proptest::prelude::*;

fn state(seed: u64) -> DensityMatrix {
    random_density_matrix(&mut seeded(seed))
}

fn entangled(seed: u64) -> DensityMatrix {
    random_entangled_state(&mut seeded(seed), 1e-2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_states_are_states(seed in any::<u64>()) {
        let rho = state(seed);
        prop_assert!(hermiticity_defect(rho.matrix()) < 1e-14);
        prop_assert!((rho.matrix().trace().re - 1.0).abs() < 1e-13);
        prop_assert!(rho.eigenvalues().iter().all(|&x| x > -1e-13));
    }

    #[test]
    fn concurrence_is_local_unitary_invariant(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let rho = random_density_matrix(&mut rng);
        let u = random_local_unitary(&mut rng);
        let a = concurrence_spectrum(&rho).unwrap().lambdas;
        let b = concurrence_spectrum(&rho.apply_local_unitary(&u)).unwrap().lambdas;
        for k in 0..4 {
            prop_assert!((a[k] - b[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn concurrence_is_bounded(seed in any::<u64>()) {
        let c = concurrence(&state(seed)).unwrap();
        prop_assert!((0.0..=1.0).contains(&c));
    }

    #[test]
    fn filters_keep_concurrence_ratios(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let rho = random_density_matrix(&mut rng);
        let f = random_local_filter(&mut rng);
        let (out, p) = apply_filter(&rho, &f).unwrap();
        prop_assume!(p > 1e-3);
        let before = ratio_signature(&concurrence_spectrum(&rho).unwrap()).unwrap();
        let after = ratio_signature(&concurrence_spectrum(&out).unwrap()).unwrap();
        for k in 0..3 {
            prop_assert!((before[k] - after[k]).abs() < 1e-8);
        }
    }

    #[test]
    fn normal_form_is_bell_diagonal_with_white_marginals(seed in any::<u64>()) {
        let rho = state(seed);
        let nf = normal_form(&rho).unwrap();
        prop_assert_eq!(nf.form, CanonicalForm::LoMM);
        let r = nf.filtered_state.to_rmatrix();
        prop_assert!(r.lomm_defect() < 1e-9, "defect {}", r.lomm_defect());
        prop_assert!(nf.filter_prob > 0.0 && nf.filter_prob <= 1.0 + 1e-12);
    }

    #[test]
    fn all_outcomes_sum_to_one(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let a = random_density_matrix(&mut rng);
        let b = random_density_matrix(&mut rng);
        let (_, p) = bilateral_cnot_and_measure(&a, &b, &[(0, 0), (0, 1), (1, 0), (1, 1)]).unwrap();
        prop_assert!((p - 1.0).abs() < 1e-13);
    }

    #[test]
    fn lomm_closed_form_is_normalised(seed in any::<u64>()) {
        let w = random_bell_weights(&mut seeded(seed));
        let (out, pd) = lomm_closed_form(&w);
        prop_assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-13);
        prop_assert!((0.5 - 1e-15..=1.0 + 1e-15).contains(&pd));
    }

    #[test]
    fn protocol_probabilities_are_consistent(seed in any::<u64>()) {
        let rho = entangled(seed);
        for o in [dejmps_round(&rho).unwrap(), lomm_round(&rho).unwrap(), zinf_round(&rho, Objective::MaxPall).unwrap()] {
            prop_assert!(o.filter_prob > 0.0 && o.filter_prob <= 1.0 + 1e-12);
            prop_assert!(o.distil_prob > 0.0 && o.distil_prob <= 1.0 + 1e-12);
            prop_assert!((o.overall_prob - o.filter_prob * o.filter_prob * o.distil_prob).abs() < 1e-15);
            prop_assert!(o.output_fidelity <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn zinf_success_is_at_most_half(seed in any::<u64>()) {
        let rho = state(seed);
        for obj in [Objective::MaxPall, Objective::MaxFidelity] {
            let o = zinf_round(&rho, obj).unwrap();
            prop_assert!(o.distil_prob <= 0.5 + 1e-12);
        }
    }

    #[test]
    fn zinf_filtered_state_is_zinf_shaped(seed in any::<u64>()) {
        let rho = state(seed);
        let choice = search_zinf_filter(&rho, Objective::MaxPall).unwrap();
        let f = zinf_filter(&rho, &choice.params).unwrap();
        prop_assert!(f.state.to_rmatrix().zinf_defect() < 1e-9);
    }

    #[test]
    fn zinf_closed_form_matches_explicit_round(seed in any::<u64>()) {
        let rho = entangled(seed);
        let r = zinf_round(&rho, Objective::MaxFidelity).unwrap();
        let choice = search_zinf_filter(&rho, Objective::MaxFidelity).unwrap();
        let f = zinf_filter(&rho, &choice.params).unwrap();
        let (out, pf, pd) = filtered_round_explicit(&rho, &f.filter, &KEEP_11).unwrap();
        prop_assert!((pf - r.filter_prob).abs() < 1e-12);
        prop_assert!((pd - r.distil_prob).abs() < 1e-10);
        prop_assert!(max_abs(&(out.matrix() - r.output_state.matrix())) < 1e-10);
    }

    #[test]
    fn zinf_objectives_order_their_targets(seed in any::<u64>()) {
        let rho = entangled(seed);
        let p = zinf_round(&rho, Objective::MaxPall).unwrap();
        let f = zinf_round(&rho, Objective::MaxFidelity).unwrap();
        prop_assert!(p.overall_prob >= f.overall_prob - 1e-9);
        prop_assert!(f.output_fidelity >= p.output_fidelity - 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn pump_closed_form_matches_explicit_rounds(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let rho = random_entangled_state(&mut rng, 1e-2);
        let sigma = random_density_matrix(&mut rng);
        let setup = pump_setup(&rho, Objective::MaxPall).unwrap();
        let ex = ExplicitPump::from_setup(&rho, &setup).unwrap();
        for n in 1..=2 {
            let closed = pump_operator(sigma.matrix(), &setup.channel, n);
            let explicit = ex.apply_m_times(sigma.matrix(), 2 * n);
            prop_assert!(max_abs(&(closed - explicit)) <= 1e-10 * max_abs(&closed));
            let f = jamiolkowski_fidelity(&setup.channel, n).unwrap();
            prop_assert!((-1e-15..=1.0 + 1e-15).contains(&f));
        }
    }

    #[test]
    fn yield_cost_is_consistent(seed in any::<u64>()) {
        let rho = random_entangled_state(&mut seeded(seed), 0.3);
        for p in Protocol::ALL {
            let Ok(r) = symmetric_yield(&rho, p, 0.95, 50) else { continue };
            prop_assert!((r.cost_from_trace() - r.expected_base_pairs_per_output).abs()
                <= 1e-9 * r.expected_base_pairs_per_output);
            if let Some(first) = r.per_round_trace.first() {
                prop_assert!(r.yield_value <= first.filter_prob * first.distil_prob / 2.0 + 1e-15);
            }
        }
    }

    #[test]
    fn execution_strategies_agree(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let states: Vec<DensityMatrix> = (0..8).map(|_| random_density_matrix(&mut rng)).collect();
        let f = |rho: &DensityMatrix| lomm_round(rho).map(|o| o.output_fidelity.to_bits());
        prop_assert_eq!(Execution::Sequential.map(&states, f), Execution::Parallel.map(&states, f));
    }
}
