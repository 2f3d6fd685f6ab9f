//! Property tests for the module invariants.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use phaselab_core::field::{FieldModel, FieldState, LatticeSpec};
use phaselab_core::fock::{ground_state, random_density_matrix, FockSpec, NormalPoly};
use phaselab_core::maps::{
    amplitudes_to_field, field_to_amplitudes, q_probability, ModeAmplitudes, ModeBasis,
};
use phaselab_core::mrf::{mp_exact, mrf_exact, MpModel, MrfModel, SliceInit};

fn field_values(len: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-3.0..3.0f64, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// q_probability >= 0 for every PSD rho and every state.
    #[test]
    fn q_is_nonnegative(seed in 0u64..1_000_000, phi in field_values(2), pi in field_values(2)) {
        let model = FieldModel::free(1.0, LatticeSpec::new(2, 1.0).unwrap()).unwrap();
        let basis = ModeBasis::new(&model, &[(0, 0)], 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density_matrix(basis.fock().dim(), &mut rng);
        let state = FieldState::new(vec![phi], vec![pi]).unwrap();
        let q = q_probability(&rho, &state, &basis).unwrap();
        prop_assert!(q >= 0.0);
        prop_assert!(q <= 1.0 + 1e-12);
    }

    /// Field -> amplitudes -> field is the identity on a full basis.
    #[test]
    fn transform_round_trip(phi in field_values(6), pi in field_values(6)) {
        let model = FieldModel::free(0.7, LatticeSpec::new(6, 0.5).unwrap()).unwrap();
        let basis = ModeBasis::full(&model, 4).unwrap();
        let state = FieldState::new(vec![phi], vec![pi]).unwrap();
        let back = amplitudes_to_field(&field_to_amplitudes(&state, &basis).unwrap(), &basis)
            .unwrap();
        for x in 0..6 {
            prop_assert!((back.phi[0][x] - state.phi[0][x]).abs() <= 1e-10);
            prop_assert!((back.pi[0][x] - state.pi[0][x]).abs() <= 1e-10);
        }
    }

    /// Amplitude reality is preserved: forward transforms of real fields
    /// satisfy theta(-p) = conj(theta(p)) on every conjugate pair.
    #[test]
    fn forward_transform_satisfies_reality(phi in field_values(8), pi in field_values(8)) {
        let model = FieldModel::free(1.0, LatticeSpec::new(8, 0.5).unwrap()).unwrap();
        let basis = ModeBasis::full(&model, 4).unwrap();
        let state = FieldState::new(vec![phi], vec![pi]).unwrap();
        let amps = field_to_amplitudes(&state, &basis).unwrap();
        for i in 0..basis.num_modes() {
            let c = basis.conjugate_index(i);
            prop_assert!((amps.theta[i] - amps.theta[c].conj()).norm() <= 1e-10);
            prop_assert!((amps.tau[i] - amps.tau[c].conj()).norm() <= 1e-10);
        }
    }

    /// Free coherent amplitudes always reconstruct to real, finite fields.
    #[test]
    fn alphas_always_give_real_fields(res in field_values(3), ims in field_values(3)) {
        let model = FieldModel::free(1.0, LatticeSpec::new(8, 0.5).unwrap()).unwrap();
        let basis = ModeBasis::low_momentum(&model, 3, 4).unwrap();
        let alphas: Vec<Complex64> = res
            .iter()
            .zip(ims.iter())
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        let amps = ModeAmplitudes::from_alphas(&basis, alphas).unwrap();
        let state = amplitudes_to_field(&amps, &basis).unwrap();
        prop_assert!(state.is_finite());
    }

    /// Exact MP joints normalize to 1 for arbitrary conditionals.
    #[test]
    fn mp_exact_normalizes(p_one in proptest::collection::vec(0.0..1.0f64, 8), p0 in 0.0..1.0f64) {
        let mut transition = Vec::with_capacity(32);
        for &p in &p_one {
            transition.push(1.0 - p);
            transition.push(p);
        }
        let model = MpModel::new(3, 3, 2, transition, SliceInit::PerSite(vec![p0, 1.0 - p0]))
            .unwrap();
        let joint = mp_exact(&model).unwrap();
        prop_assert!((joint.total() - 1.0).abs() <= 1e-12);
    }

    /// Exact MRF joints normalize to 1 for arbitrary positive potentials.
    #[test]
    fn mrf_exact_normalizes(psi in proptest::collection::vec(0.05..4.0f64, 4)) {
        let model = MrfModel::new(3, 3, 2, psi, None, None).unwrap();
        let (joint, partition) = mrf_exact(&model).unwrap();
        prop_assert!((joint.total() - 1.0).abs() <= 1e-12);
        prop_assert!(partition > 0.0);
    }

    /// Symmetric potentials give exactly reflection-invariant joints.
    #[test]
    fn symmetric_mrf_is_reflection_invariant(diag in 0.1..3.0f64, off in 0.1..3.0f64) {
        let psi = vec![diag, off, off, diag];
        let model = MrfModel::new(3, 3, 2, psi, None, None).unwrap();
        let (joint, _) = mrf_exact(&model).unwrap();
        prop_assert!(joint.tv_distance(&joint.time_reflected()).unwrap() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Variational monotonicity: the normal-ordered quartic ground energy
    /// never rises as the cutoff grows.
    #[test]
    fn ground_energy_monotone_in_cutoff(lambda in 0.01..0.3f64) {
        let mut previous = f64::INFINITY;
        for n_max in [10usize, 20, 30] {
            let fock = FockSpec::new(1, n_max).unwrap();
            let mut poly = NormalPoly::new(1);
            poly.add_number(0, 1.0);
            poly.add_normal_q_power(0, 4, lambda);
            let (e0, _) = ground_state(&poly.to_matrix(&fock).unwrap()).unwrap();
            prop_assert!(e0 <= previous + 1e-12);
            previous = e0;
        }
    }
}
