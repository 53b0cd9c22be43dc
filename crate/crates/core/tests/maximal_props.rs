use std::f64::consts::PI;

use num_complex::Complex64;
use polyharm::geometry::{TorusGrid, TorusPoint};
use polyharm::kernel::Params;
use polyharm::maximal::{
    level_set_measure_1d, m_gamma, m_q, partition_bound_check, random_measure, weak11_experiment, MaximalKind,
    MaximalOptions,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn lambdas() -> Vec<f64> {
    (0..7).map(|k| 10f64.powf(-0.5 + 0.5 * k as f64)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn homogeneous_and_monotone(
        seed in any::<u64>(), n in 1usize..=2,
        gamma in prop::collection::vec(0u32..4, 2),
        c in 0.01..100.0f64,
        centre in prop::collection::vec(-PI..PI, 2),
        extra in prop::collection::vec(-PI..PI, 2),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let opts = MaximalOptions::default();
        let mu = random_measure(&mut rng, n, 5);
        let g = &gamma[..n];
        let z = TorusPoint::new(centre[..n].to_vec());
        let base = m_gamma(&mu, g, &z, &opts).unwrap();
        prop_assume!(!base.capped);
        let scaled = m_gamma(&mu.scale(Complex64::new(c, 0.0)), g, &z, &opts).unwrap();
        prop_assert!((scaled.value - c * base.value).abs() <= 1e-12 * c * base.value.max(1e-300));
        let more = mu.with_atom(TorusPoint::new(extra[..n].to_vec()), Complex64::new(0.0, 0.5)).unwrap();
        let after = m_gamma(&more, g, &z, &opts).unwrap();
        prop_assert!(after.value >= base.value);
        let q0 = m_q(&mu, 0.5, &z, &opts).unwrap();
        let q1 = m_q(&more, 0.5, &z, &opts).unwrap();
        prop_assert!(q1.value >= q0.value);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn weak_type_bounds(seed in any::<u64>(), n in 1usize..=2, atoms in 1usize..=10, q in prop::sample::select(vec![0.25, 0.5])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mu = random_measure(&mut rng, n, atoms);
        let grid = TorusGrid::uniform(n, if n == 1 { 512 } else { 32 }).unwrap();
        let opts = MaximalOptions::default();
        let gamma: Vec<u32> = (0..n).map(|k| (seed >> k) as u32 % 3).collect();
        for kind in [MaximalKind::Gamma(gamma), MaximalKind::Q(q)] {
            let reps = weak11_experiment(&kind, std::slice::from_ref(&mu), &lambdas(), &grid, &opts);
            prop_assert!(reps.is_ok(), "{:?}", reps.err());
            let rep = &reps.unwrap()[0];
            prop_assert!(rep.measures.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn nontangential_levels_with_configured_constant(seed in any::<u64>(), atoms in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mu = random_measure(&mut rng, 1, atoms);
        let params = Params::real_symmetric(&[0.3]).unwrap();
        let kind = MaximalKind::NonTangential {
            constant: 3.0 * params.c_t() / (1.0 - params.q().sqrt()).powi(2),
            params,
            aperture: 2.0,
            restriction: 2.0,
            budget: 64,
        };
        let reps = weak11_experiment(&kind, &[mu], &lambdas(), &TorusGrid::uniform(1, 128).unwrap(), &MaximalOptions::default());
        prop_assert!(reps.is_ok(), "{:?}", reps.err());
    }

    #[test]
    fn partition_bound_on_enclosed_boxes(
        seed in any::<u64>(),
        bound in prop::sample::select(vec![1.0, 2.0, 4.0]),
        gap in 0.001..0.1f64,
        s in 0.0..1.0f64,
        vertex in prop::collection::vec(-PI..PI, 2),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mu = random_measure(&mut rng, 2, 10);
        let r = vec![1.0 - gap, 1.0 - gap * (1.0 + (bound - 1.0) * s)];
        let chk = partition_bound_check(&mu, &r, bound, &TorusPoint::new(vertex), &MaximalOptions::default()).unwrap();
        prop_assert!(chk.violations.is_empty(), "{chk:?}");
    }
}

#[test]
fn delta_level_sets_are_exact() {
    let mu = polyharm::poisson::AtomicMeasure::dirac(TorusPoint::new(vec![1.0]));
    for k in 0..=12 {
        let l = 10f64.powf(-1.0 + 0.25 * k as f64);
        let m = level_set_measure_1d(&mu, l).unwrap();
        assert!((m - (1.0f64 / l).min(1.0)).abs() < 1e-15, "{l}: {m}");
    }
}
