use std::f64::consts::PI;

use proptest::prelude::*;
use walshfilter::filter::control_trajectory;
use walshfilter::fidelity::fidelity_ladder;
use walshfilter::noise::{draw_realization, NoiseSpectrum, Quadrature};
use walshfilter::pulse::{make_named, make_wamf, Envelope, GateKind, GateSpec, PulseSequence};
use walshfilter::sim::{propagate, propagate_static};
use walshfilter::synth::{scan_landscape, SynthesisProblem};
use walshfilter::walsh::{PaleyIndex, WalshSpectrum};

fn kind() -> impl Strategy<Value = GateKind> {
    prop_oneof![
        Just(GateKind::Primitive),
        Just(GateKind::Sk1),
        Just(GateKind::Bb1),
        Just(GateKind::P2),
        Just(GateKind::B2),
        Just(GateKind::C1),
        Just(GateKind::C2),
    ]
}

fn any_angle_kind() -> impl Strategy<Value = GateKind> {
    kind().prop_filter("c2 is defined at pi only", |k| *k != GateKind::C2)
}

fn spectrum(max_log2: u32) -> impl Strategy<Value = WalshSpectrum> {
    (1..=max_log2).prop_flat_map(|n| {
        prop::collection::vec(-10.0f64..10.0, 1usize << n).prop_map(|v| {
            WalshSpectrum::from_pairs(v.into_iter().enumerate().map(|(k, x)| (k as u64, x)))
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn walsh_round_trip(s in spectrum(7)) {
        let values = s.synthesize();
        let back = WalshSpectrum::analyze(&values).unwrap();
        for k in 0..values.len() as u64 {
            prop_assert!((back.get(k) - s.get(k)).abs() < 1e-12 * (1.0 + s.get(k).abs()));
        }
    }

    #[test]
    fn paley_index_bits_round_trip(k in 0u64..1 << 20) {
        let p = PaleyIndex(k);
        let rebuilt: u64 = p.bits().iter().enumerate().map(|(j, b)| (*b as u64) << j).sum();
        prop_assert_eq!(rebuilt, k);
        prop_assert_eq!(p.hamming_weight(), k.count_ones());
    }

    #[test]
    fn library_gates_hit_their_target(k in any_angle_kind(), theta in 0.1f64..3.1, rabi in 0.5f64..5.0) {
        let seq = make_named(&GateSpec::new(k, theta, rabi)).unwrap();
        let ideal = seq.ideal_unitary();
        prop_assert!(ideal.unitarity_defect() < 1e-12);
        prop_assert!(ideal.phase_distance(&walshfilter::linalg::Mat2::rotation(theta, 0.0)) < 1e-9);
        prop_assert!(seq.max_rabi() <= rabi * (1.0 + 1e-12));
    }

    #[test]
    fn noisy_propagation_stays_unitary(k in kind(), seed in 0u64..1000, alpha in 0.0f64..0.5) {
        let seq = make_named(&GateSpec::new(k, PI, PI)).unwrap();
        let spec = NoiseSpectrum::white(Quadrature::Dephasing, alpha.max(1e-6), 2.0 * PI, 20);
        let n = draw_realization(&spec, seed, 0);
        let u = propagate(&seq, Some(&n), None, seq.min_segment_duration() / 200.0).unwrap();
        prop_assert!(u.unitarity_defect() < 1e-10);
    }

    #[test]
    fn walsh_modulation_preserves_rotation(x0 in 0.2f64..4.0, s in spectrum(3)) {
        let mut s = s;
        s.set(0, x0);
        let seq = make_wamf(&s, 1.0, Envelope::Square).unwrap();
        // the non-zero Paley functions integrate to zero
        prop_assert!((seq.signed_rotation(0.0) - x0).abs() < 1e-9);
    }

    #[test]
    fn detuning_sign_flip_equals_phase_mirror(beta in 1e-3f64..0.1, k in kind()) {
        // conjugation by sigma_x maps (beta_z, phi) to (-beta_z, -phi)
        let seq = make_named(&GateSpec::new(k, PI, PI)).unwrap();
        let mut mirror = seq.clone();
        mirror.segments.iter_mut().for_each(|s| s.phi = (-s.phi).rem_euclid(2.0 * PI));
        let a = seq.ideal_unitary().infidelity_to(&propagate_static(&seq, beta, 0.0));
        let b = mirror.ideal_unitary().infidelity_to(&propagate_static(&mirror, -beta, 0.0));
        prop_assert!((a - b).abs() <= 1e-9 * a + 1e-15, "{} {a} {b}", seq.label);
    }

    #[test]
    fn fidelity_ladder_is_ordered(a in 0.0f64..0.5) {
        let l = fidelity_ladder(a).unwrap();
        prop_assert!(l.f_first <= l.f_chi + 1e-15);
        prop_assert!(l.f_chi <= l.f_prime_first + 1e-15);
    }

    #[test]
    fn filter_functions_are_non_negative(k in kind(), w in 1e-3f64..1e2) {
        let seq = make_named(&GateSpec::new(k, PI, PI)).unwrap();
        let traj = control_trajectory(&seq, 8).unwrap();
        for q in [Quadrature::Dephasing, Quadrature::Amplitude] {
            prop_assert!(traj.filter_value(q, w) >= 0.0);
        }
    }
}

/// Differences between propagators at steps `h, h/2` and `h/2, h/4`.
fn step_differences(seq: &PulseSequence, seed: u64) -> (f64, f64) {
    let spec = NoiseSpectrum::white(Quadrature::Dephasing, 0.05, 2.0 * PI * 2.0, 30);
    let n = draw_realization(&spec, seed, 0);
    let h = seq.min_segment_duration() / 50.0;
    let u: Vec<_> = [h, h / 2.0, h / 4.0].iter().map(|dt| propagate(seq, Some(&n), None, *dt).unwrap()).collect();
    (u[0].phase_distance(&u[1]), u[1].phase_distance(&u[2]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn step_halving_converges_at_second_order(k in kind(), seed in 0u64..100) {
        let seq = make_named(&GateSpec::new(k, PI, PI)).unwrap();
        let (d1, d2) = step_differences(&seq, seed);
        prop_assert!(d1 < 1e-3, "{d1}");
        prop_assert!(d2 < d1 / 3.0 || d1 < 1e-12, "{d1} {d2}");
    }

    #[test]
    fn landscape_sign_reversal_symmetry(x0 in 0.3f64..3.2, x3 in 0.5f64..15.0) {
        let p = SynthesisProblem::wamf1(x0, [1e-6, 1e-1], Quadrature::Dephasing);
        let a = scan_landscape(&p, &[x0], &[x3]).unwrap().log10_cost[0][0];
        let b = scan_landscape(&p, &[-x0], &[-x3]).unwrap().log10_cost[0][0];
        prop_assert!((a - b).abs() < 1e-9);
    }
}
