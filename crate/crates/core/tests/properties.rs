use proptest::prelude::*;
use qexpfam::cone;
use qexpfam::expfam::{exp1, ln0, mean_value_projection, project_to_family, SolverOptions};
use qexpfam::sample;
use qexpfam::state::{pinsker_gap, relative_entropy};
use qexpfam::Algebra;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn algebra(pick: u8) -> Algebra {
    match pick % 4 {
        0 => cone::qubit_plus_one(),
        1 => Algebra::new(vec![3]).unwrap(),
        2 => Algebra::abelian(3).unwrap(),
        _ => Algebra::new(vec![2, 2, 1]).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exp1_and_ln0_are_inverse(seed in any::<u64>(), pick in any::<u8>(), scale in 0.1f64..4.0) {
        let alg = algebra(pick);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = sample::random_traceless(&alg, &mut rng, scale);
        let rho = exp1(&a);
        prop_assert!((rho.element().trace() - 1.0).abs() < 1e-13);
        prop_assert!((&ln0(&rho).unwrap() - &a).norm() < 1e-10 * (1.0 + a.norm()));
    }

    #[test]
    fn relative_entropy_bounds(seed in any::<u64>(), pick in any::<u8>()) {
        let alg = algebra(pick);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = sample::random_state(&alg, &mut rng);
        let sigma = sample::random_invertible_state(&alg, &mut rng, 0.1);
        prop_assert!(relative_entropy(&rho, &sigma).unwrap() >= 0.0);
        prop_assert!(pinsker_gap(&rho, &sigma).unwrap() >= 0.0);
        prop_assert!(relative_entropy(&sigma, &sigma).unwrap().abs() < 1e-12);
    }

    #[test]
    fn projection_matches_mean_values(seed in any::<u64>(), swallow in any::<bool>()) {
        let fam = if swallow { cone::swallow_family() } else { cone::staffelberg_family() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = sample::random_invertible_state(fam.algebra(), &mut rng, 0.05);
        let r = project_to_family(&rho, &fam, &SolverOptions::default()).unwrap();
        prop_assert!(r.attained);
        let m_rho = mean_value_projection(rho.element(), &fam);
        let m_sigma = mean_value_projection(r.sigma_star.element(), &fam);
        for (x, y) in m_rho.iter().zip(&m_sigma) {
            prop_assert!((x - y).abs() < 1e-9);
        }
        prop_assert!(r.distance <= relative_entropy(&rho, &fam.state_at(&[0.0, 0.0])).unwrap() + 1e-12);
    }
}
