use std::sync::Arc;

use edcheck::clifford::{CliffordModel, Signature, Spinor};
use edcheck::conformal::check_conformal_laws;
use edcheck::equations::{check_divergence_identities, Setting};
use edcheck::fixtures::Registry;
use edcheck::geometry::ScalarFn;
use edcheck::jet::RJet;
use edcheck::spincalc::random_polynomial_field;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sig() -> impl Strategy<Value = Signature> {
    (2usize..=5)
        .prop_flat_map(|n| (Just(n), 0..=n.min(2)))
        .prop_map(|(n, r)| Signature::new(n, r).unwrap())
}

fn spinor(model: &CliffordModel, seed: u64) -> Spinor {
    Spinor::random(model.dim(), &mut ChaCha8Rng::seed_from_u64(seed))
}

fn eta(s: &Signature, x: &[f64], y: &[f64]) -> f64 {
    (0..s.n).map(|i| s.chi(i) * x[i] * y[i]).sum()
}

fn vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn clifford_square(s in sig(), seed in any::<u64>(), x in vector(5)) {
        let m = CliffordModel::build(s).unwrap();
        let x = &x[..s.n];
        let psi = spinor(&m, seed);
        let xx = m.clifford_mul(x, &m.clifford_mul(x, &psi).unwrap()).unwrap();
        let expect = psi.scale(C64::new(-eta(&s, x, x), 0.0));
        prop_assert!(xx.sub(&expect).max_abs() < 1e-12 * (1.0 + psi.max_abs() * 16.0));
    }

    #[test]
    fn clifford_adjoint(s in sig(), seed in any::<u64>(), x in vector(5)) {
        let m = CliffordModel::build(s).unwrap();
        let x = &x[..s.n];
        let (phi, psi) = (spinor(&m, seed), spinor(&m, seed ^ 0x9e37));
        let lhs = m.inner(&m.clifford_mul(x, &phi).unwrap(), &psi)
            + m.inner(&phi, &m.clifford_mul(x, &psi).unwrap()) * s.sign_r();
        prop_assert!(lhs.norm() < 1e-11);
    }

    #[test]
    fn clifford_inner_product(s in sig(), seed in any::<u64>(), x in vector(5), y in vector(5)) {
        let m = CliffordModel::build(s).unwrap();
        let (x, y) = (&x[..s.n], &y[..s.n]);
        let psi = spinor(&m, seed);
        let lhs = m.re_inner(&m.clifford_mul(x, &psi).unwrap(), &m.clifford_mul(y, &psi).unwrap());
        let rhs = s.sign_r() * eta(&s, x, y) * m.re_inner(&psi, &psi);
        prop_assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn clifford_real_part(s in sig(), seed in any::<u64>(), x in vector(5)) {
        let m = CliffordModel::build(s).unwrap();
        let x = &x[..s.n];
        let psi = spinor(&m, seed);
        let xp = m.clifford_mul(x, &psi).unwrap().scale(s.i_r());
        prop_assert!(m.re_inner(&xp, &psi).abs() < 1e-11);
    }
}

fn trig_factor(a: f64, b: f64, c: f64) -> ScalarFn {
    Arc::new(move |x: &[RJet]| (&x[0].sin().scale(a) + &x[1].cos().scale(b)).add_scalar(c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn conformal_laws_hold(a in -0.4f64..0.4, b in -0.4f64..0.4, c in -0.5f64..0.5, seed in any::<u64>()) {
        let reg = Registry::builtin();
        let fx = reg.build("T3_flat").unwrap();
        let model = CliffordModel::build(fx.chart.sig).unwrap();
        let pts = fx.chart.sample_points(4, seed);
        let psi = random_polynomial_field(model.dim(), &[3.0, 3.0, 3.0], seed, 0.5);
        let out = check_conformal_laws(&fx.chart, &model, &trig_factor(a, b, c), &psi, &pts, 3).unwrap();
        prop_assert!(!out.checks.is_empty());
        for ch in &out.checks {
            prop_assert!(ch.max_abs_residual < 1e-8, "{}", ch.line());
        }
    }

    #[test]
    fn divergence_identities_hold(name in prop::sample::select(vec!["T2_flat", "S2", "T21_flat", "H2"]), seed in any::<u64>()) {
        let reg = Registry::builtin();
        let fx = reg.build(name).unwrap();
        let model = CliffordModel::build(fx.chart.sig).unwrap();
        let pts = fx.chart.sample_points(4, seed);
        let center: Vec<f64> = fx.chart.domain.iter().map(|(a, b)| 0.5 * (a + b)).collect();
        let psi = random_polynomial_field(model.dim(), &center, seed, 0.5);
        let s = Setting::new(&fx.chart, &model, &pts, 3).unwrap();
        let out = check_divergence_identities(&s, &psi, 1.0).unwrap();
        prop_assert!(!out.checks.is_empty());
        for ch in &out.checks {
            prop_assert!(ch.max_abs_residual < 1e-8, "{}", ch.line());
        }
    }
}
