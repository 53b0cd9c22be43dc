use num_complex::Complex64;
use polyharm::special::{gamma, hyp2f1, HypParams};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn hyp(a: Complex64, b: Complex64, cc: Complex64, x: f64) -> Complex64 {
    hyp2f1(&HypParams::new(a, b, cc).unwrap(), x).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn gamma_recurrence(re in -8.0..8.0f64, im in -10.0..10.0f64) {
        let z = c(re, im);
        let (a, b) = match (gamma(z + 1.0), gamma(z)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => return Err(TestCaseError::reject("pole")),
        };
        let rel = ((a - z * b) / a).norm();
        prop_assert!(rel < 1e-12, "z = {z}: {rel:e}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn contiguous_relation(
        ar in -3.0..3.0f64, ai in -2.0..2.0f64,
        br in -3.0..3.0f64, bi in -2.0..2.0f64,
        cr in 0.5..4.0f64, ci in -2.0..2.0f64,
        x in 0.0..0.9f64,
    ) {
        let (a, b, cc) = (c(ar, ai), c(br, bi), c(cr, ci));
        // (c-a) F(a-1) + (2a - c + (b-a) x) F(a) + a (x-1) F(a+1) = 0
        let t0 = (cc - a) * hyp(a - 1.0, b, cc, x);
        let t1 = (2.0 * a - cc + (b - a) * x) * hyp(a, b, cc, x);
        let t2 = a * (x - 1.0) * hyp(a + 1.0, b, cc, x);
        let scale = t0.norm() + t1.norm() + t2.norm();
        let res = (t0 + t1 + t2).norm() / scale.max(1.0);
        prop_assert!(res < 1e-10, "{a} {b} {cc} {x}: {res:e}");
    }

    #[test]
    fn value_at_zero_is_one(
        ar in -5.0..5.0f64, ai in -5.0..5.0f64,
        br in -5.0..5.0f64, cr in 0.1..6.0f64,
    ) {
        prop_assert_eq!(hyp(c(ar, ai), c(br, 0.0), c(cr, 0.3), 0.0), c(1.0, 0.0));
    }

    #[test]
    fn parameter_swap_is_bitwise(
        ar in -3.0..3.0f64, ai in -2.0..2.0f64,
        br in -3.0..3.0f64, bi in -2.0..2.0f64,
        cr in 0.5..4.0f64, x in 0.0..0.99f64,
    ) {
        let (a, b, cc) = (c(ar, ai), c(br, bi), c(cr, 0.0));
        let l = hyp(a, b, cc, x);
        let r = hyp(b, a, cc, x);
        prop_assert_eq!(l.re.to_bits(), r.re.to_bits());
        prop_assert_eq!(l.im.to_bits(), r.im.to_bits());
    }
}

#[test]
fn gauss_sum_at_one() {
    // F(a,b;c;1) = Γ(c)Γ(c-a-b) / (Γ(c-a)Γ(c-b)) for Re(c-a-b) > 0
    let (a, b, cc) = (c(0.3, 0.2), c(-0.4, 0.1), c(2.5, -0.3));
    let want = gamma(cc).unwrap() * gamma(cc - a - b).unwrap()
        / (gamma(cc - a).unwrap() * gamma(cc - b).unwrap());
    let got = hyp(a, b, cc, 1.0);
    assert!((got - want).norm() < 1e-10 * want.norm(), "{got} vs {want}");
}
