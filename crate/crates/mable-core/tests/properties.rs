//! Randomized invariants over the numeric core.

use mable_core::bernstein::{beta_basis, elevate, mixture_cdf_untilted, mixture_density};
use mable_core::tilt::weight_table;
use mable_core::{Degree, MixtureWeights, QuadratureRule, RegressorSpec, TiltCoefficients};
use proptest::prelude::*;

fn weights_strategy(len: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(1e-3..1.0f64, len).prop_map(|raw| {
        let s: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / s).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn basis_is_a_partition_of_unity_scaled(m in 0usize..80, x in 0.0..=1.0f64) {
        let deg = Degree::new(m).unwrap();
        let total: f64 = (0..=m).map(|j| beta_basis(deg, j, x).unwrap()).sum();
        // sum_j beta_mj(x) = m + 1 for every x
        prop_assert!((total - (m as f64 + 1.0)).abs() < 1e-9 * (m as f64 + 1.0));
    }

    #[test]
    fn mixture_density_integrates_to_one(m in 1usize..25, raw in weights_strategy(26)) {
        let deg = Degree::new(m).unwrap();
        let s: f64 = raw[..=m].iter().sum();
        let p = MixtureWeights::new(raw[..=m].iter().map(|v| v / s).collect()).unwrap();
        let rule = QuadratureRule::for_degree(m, 1);
        let integral = rule.integrate(|x| mixture_density(deg, &p, x).unwrap());
        prop_assert!((integral - 1.0).abs() < 1e-10);
    }

    #[test]
    fn elevation_preserves_the_polynomial(m in 0usize..20, raw in weights_strategy(21), x in 0.0..=1.0f64) {
        let deg = Degree::new(m).unwrap();
        let s: f64 = raw[..=m].iter().sum();
        let p = MixtureWeights::new(raw[..=m].iter().map(|v| v / s).collect()).unwrap();
        let up = elevate(deg, &p).unwrap();
        let before = mixture_density(deg, &p, x).unwrap();
        let after = mixture_density(Degree::new(m + 1).unwrap(), &up, x).unwrap();
        prop_assert!((before - after).abs() <= 1e-10 * before.max(1.0));
    }

    #[test]
    fn untilted_cdf_is_monotone_and_proper(m in 1usize..15, raw in weights_strategy(16), x in 0.0..=1.0f64) {
        let deg = Degree::new(m).unwrap();
        let s: f64 = raw[..=m].iter().sum();
        let p = MixtureWeights::new(raw[..=m].iter().map(|v| v / s).collect()).unwrap();
        let cdf = |t: f64| mixture_cdf_untilted(deg, &p, t).unwrap();
        prop_assert!(cdf(1.0) > 1.0 - 1e-12 && cdf(1.0) < 1.0 + 1e-12);
        prop_assert!(cdf(0.0).abs() < 1e-15);
        let v = cdf(x);
        prop_assert!((-1e-15..=1.0 + 1e-12).contains(&v));
        if x < 0.99 {
            prop_assert!(cdf(x + 0.01) >= v - 1e-12);
        }
    }

    #[test]
    fn zero_tilt_weights_are_one(m in 0usize..40, d in 1usize..3) {
        let deg = Degree::new(m).unwrap();
        let spec = RegressorSpec::polynomial(d, -2.0, 3.0).unwrap();
        let rule = QuadratureRule::for_degree(m, d);
        let t = weight_table(deg, &spec, &TiltCoefficients::zeros(d), &rule).unwrap();
        for w in &t.w {
            prop_assert!((w - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn tilted_weights_are_positive_and_bounded(
        m in 0usize..20,
        a0 in -1.0..1.0f64,
        a1 in -1.0..1.0f64,
    ) {
        let deg = Degree::new(m).unwrap();
        let spec = RegressorSpec::polynomial(1, 0.0, 1.0).unwrap();
        let rule = QuadratureRule::for_degree(m, 1);
        let alpha = TiltCoefficients::new(vec![a0, a1]).unwrap();
        let t = weight_table(deg, &spec, &alpha, &rule).unwrap();
        // e^{a0 + a1 x} is bounded by its endpoint values on [0,1]
        let lo = (a0 + a1.min(0.0)).exp();
        let hi = (a0 + a1.max(0.0)).exp();
        for w in &t.w {
            prop_assert!(*w >= lo - 1e-12 && *w <= hi + 1e-12, "w = {w}, [{lo}, {hi}]");
        }
    }
}
