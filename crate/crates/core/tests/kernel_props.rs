use std::f64::consts::PI;

use num_complex::Complex64;
use polyharm::geometry::{PolyPoint, TorusPoint};
use polyharm::kernel::{kernel_mass, poisson_kernel, residual_order, u_t_polar, Params};
use proptest::prelude::*;

fn family() -> impl Strategy<Value = (Complex64, Complex64)> {
    prop_oneof![
        Just((Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))),
        Just((Complex64::new(0.3, 0.0), Complex64::new(0.3, 0.0))),
        Just((Complex64::new(0.5, 2.0), Complex64::new(0.5, -1.0))),
        (-0.45..2.0f64, -0.45..2.0f64, -2.0..2.0f64, -2.0..2.0f64)
            .prop_map(|(a, b, ai, bi)| (Complex64::new(a, ai), Complex64::new(b, bi))),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn kernel_is_a_product(
        (a1, b1) in family(), (a2, b2) in family(),
        r in prop::collection::vec(0.0..0.99f64, 2),
        th in prop::collection::vec(-PI..PI, 2),
        zeta in prop::collection::vec(-PI..PI, 2),
    ) {
        let p = Params::validate(&[a1, a2], &[b1, b2]).unwrap();
        let z = PolyPoint::new(r.clone(), th.clone()).unwrap();
        let whole = poisson_kernel(&p, &z, &TorusPoint::new(zeta.clone())).unwrap();
        let parts: Complex64 = (0..2)
            .map(|j| {
                let pj = Params::validate(&[[a1, a2][j]], &[[b1, b2][j]]).unwrap();
                let zj = PolyPoint::new(vec![r[j]], vec![th[j]]).unwrap();
                poisson_kernel(&pj, &zj, &TorusPoint::new(vec![zeta[j]])).unwrap()
            })
            .product();
        prop_assert!((whole - parts).norm() <= 1e-14 * whole.norm().max(1.0), "{whole} {parts}");
    }

    #[test]
    fn hermitian_swap(
        (a, b) in family(),
        r in prop::collection::vec(0.0..0.99f64, 2),
        zeta in prop::collection::vec(-PI..PI, 2),
        xi in prop::collection::vec(-PI..PI, 2),
    ) {
        let p = Params::uniform(2, a, b).unwrap();
        let (zt, xt) = (TorusPoint::new(zeta), TorusPoint::new(xi));
        let l = poisson_kernel(&p, &PolyPoint::dilate(&r, &zt).unwrap(), &xt).unwrap();
        let rr = poisson_kernel(&p.swapped(), &PolyPoint::dilate(&r, &xt).unwrap(), &zt).unwrap();
        prop_assert!((l - rr).norm() <= 1e-12 * l.norm().max(1.0), "{l} {rr}");
    }

    #[test]
    fn positive_majorant_is_even_and_decreasing(t in -0.9..4.0f64, r in 0.05..0.99f64) {
        let thetas: Vec<f64> = (1..200).map(|k| PI * k as f64 / 200.0).collect();
        let vals: Vec<f64> = thetas.iter().map(|&th| u_t_polar(t, r, th)).collect();
        for (th, v) in thetas.iter().zip(&vals) {
            let m = u_t_polar(t, r, -th);
            prop_assert!((m - v).abs() <= 1e-13 * v.abs().max(1.0));
        }
        prop_assert!(vals.windows(2).all(|w| w[1] < w[0]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn mass_below_bound(
        (a, b) in family(),
        n in 1usize..=2,
        r in prop::collection::vec(0.0..0.99f64, 2),
        th in prop::collection::vec(-PI..PI, 2),
    ) {
        let p = Params::uniform(n, a, b).unwrap();
        let z = PolyPoint::new(r[..n].to_vec(), th[..n].to_vec()).unwrap();
        let m = kernel_mass(&p, &z).unwrap();
        prop_assert!(m <= p.k_bound() * (1.0 + 1e-6), "{m} > {}", p.k_bound());
    }

    #[test]
    fn kernel_solves_the_equation(
        (a, b) in family(),
        r in 0.0..0.7f64, th in -PI..PI, zeta in -PI..PI,
    ) {
        let p = Params::uniform(1, a, b).unwrap();
        let xi = TorusPoint::new(vec![zeta]);
        let f = |w: Complex64| {
            PolyPoint::from_coords(&[w])
                .and_then(|z| poisson_kernel(&p, &z, &xi))
                .unwrap()
        };
        let ro = residual_order(a, b, f, Complex64::from_polar(r, th));
        prop_assert!(ro.order_in(1.7, 2.3), "{ro:?}");
        prop_assert!(ro.extrapolated < 1e-7, "{ro:?}");
    }
}
