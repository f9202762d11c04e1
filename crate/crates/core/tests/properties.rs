mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rgq_core::harness::fidelity;
use rgq_core::numeric::superop::{devec, vec};
use rgq_core::numeric::{superop_sandwich, trace_distance, DensityMatrix, C64};
use rgq_core::open_system::{rwa_generator, tcl2_generator};
use rgq_core::rg_linear::{oscillator_exact, oscillator_rg, OscillatorParams};
use rgq_core::spin_boson::{exact_map, AmplitudeFunction, SignVariant, SpinBosonParams};

fn qubit(seed: u64) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DensityMatrix::new(common::random_qubit(&mut rng)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fidelity_is_symmetric_and_bounded(a in any::<u64>(), b in any::<u64>()) {
        let (r, s) = (qubit(a), qubit(b));
        let f = fidelity(&r, &s).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f));
        prop_assert!((f - fidelity(&s, &r).unwrap()).abs() < 1e-9);
        prop_assert!((fidelity(&r, &r).unwrap() - 1.0).abs() < 1e-7);
    }

    #[test]
    fn fidelity_is_unitarily_invariant(a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let (r, s) = (qubit(a), qubit(b));
        let u = common::random_unitary(&mut ChaCha8Rng::seed_from_u64(c), 2);
        let f = fidelity(&r, &s).unwrap();
        let g = fidelity(&r.conjugate(&u).unwrap(), &s.conjugate(&u).unwrap()).unwrap();
        prop_assert!((f - g).abs() < 1e-8);
    }

    #[test]
    fn fidelity_and_trace_distance_bounds(a in any::<u64>(), b in any::<u64>()) {
        let (r, s) = (qubit(a), qubit(b));
        let f = fidelity(&r, &s).unwrap();
        let d = trace_distance(&r, &s).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&d));
        prop_assert!(1.0 - f <= d + 1e-9);
        prop_assert!(d <= (1.0 - f * f).max(0.0).sqrt() + 1e-9);
    }

    #[test]
    fn vec_roundtrip_and_sandwich(seed in any::<u64>(), n in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, l, r) = (
            common::random_matrix(&mut rng, n),
            common::random_matrix(&mut rng, n),
            common::random_matrix(&mut rng, n),
        );
        prop_assert_eq!(devec(&vec(&x), n, n).unwrap(), x.clone());
        let direct = vec(&(&(&l * &x) * &r));
        let via = superop_sandwich(&l, &r).unwrap().apply_vec(&vec(&x));
        let err = direct.iter().zip(&via).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-12);
    }

    #[test]
    fn amplitude_is_contractive(delta in 0.0..20.0f64, alpha in 0.05..20.0f64, t in 0.0..20.0f64) {
        let p = SpinBosonParams::new(delta, alpha, 1.0).unwrap();
        let a = AmplitudeFunction::new(p, SignVariant::Plus);
        prop_assert!((a.u(0.0) - C64::new(1.0, 0.0)).norm() < 1e-14);
        prop_assert!(a.u(t).norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn exact_map_is_a_channel(seed in any::<u64>(), delta in 0.0..20.0f64, alpha in 0.1..10.0f64) {
        let p = SpinBosonParams::new(delta, alpha, 1.0).unwrap();
        let a = AmplitudeFunction::new(p, SignVariant::Plus);
        let grid: Vec<f64> = (0..41).map(|k| 0.25 * k as f64).collect();
        let ts = exact_map(&a, &qubit(seed), &grid).unwrap();
        for s in &ts.states {
            prop_assert!((s.matrix().trace() - C64::new(1.0, 0.0)).norm() < 1e-12);
            prop_assert!(s.min_eigenvalue() > -1e-12);
        }
    }

    #[test]
    fn generators_annihilate_trace(seed in any::<u64>(), d in 2usize..4, t in 0.0..5.0f64) {
        let m = common::random_model(&mut ChaCha8Rng::seed_from_u64(seed), d, false);
        let rwa = rwa_generator(&m.sys, &m.bath).unwrap();
        prop_assert!(rwa.generator.trace_defect() < 1e-10);
        prop_assert!(tcl2_generator(&m.sys, &m.bath, t).unwrap().trace_defect() < 1e-10);
    }

    #[test]
    fn rg_oscillator_tracks_exact(eps in 0.01..0.2f64, frac in 0.0..1.0f64) {
        let p = OscillatorParams::new(eps, 1.0, std::f64::consts::FRAC_PI_2).unwrap();
        let t = frac / eps;
        let exact = oscillator_exact(&p, 1.0, std::f64::consts::FRAC_PI_2, 0.0, t);
        prop_assert!((oscillator_rg(&p, t) - exact).abs() < eps * eps);
    }
}
