use energylab::conjecture;
use energylab::orlicz::{self, DistributionFunction};
use energylab::parse;
use energylab::radial::{self, RadialMeasure, RadialProfile};
use energylab::verify;
use energylab::weights::{self, Weight};
use energylab::QuadratureSpec;
use proptest::prelude::*;

fn weight() -> impl Strategy<Value = Weight> {
    prop_oneof![
        (1.0f64..4.0).prop_map(|p| Weight::Poly { p }),
        Just(Weight::Exp),
        Just(Weight::Iterexp { k: 2 }),
    ]
}

fn distribution() -> impl Strategy<Value = DistributionFunction> {
    prop_oneof![
        (0.01f64..10.0, 0.1f64..10.0).prop_map(|(mass, value)| DistributionFunction::Atom { mass, value }),
        (0.1f64..5.0, 0.5f64..5.0).prop_map(|(scale, rate)| DistributionFunction::Exponential { scale, rate }),
        (0.1f64..5.0, 1.0f64..8.0).prop_map(|(m, n)| {
            let g = RadialProfile::Trunc { m, inner: Box::new(RadialProfile::Log) };
            radial::ma_distribution(&g, n as u32)
        }),
    ]
}

fn profile() -> impl Strategy<Value = RadialProfile> {
    let leaf = prop_oneof![
        (0.1f64..8.0).prop_map(|m| RadialProfile::Trunc { m, inner: Box::new(RadialProfile::Log) }),
        (1u32..3).prop_map(|k| RadialProfile::Iterlog { k }),
        (0.5f64..4.0).prop_map(|rate| RadialProfile::Exp { rate }),
        (0.1f64..0.9).prop_map(|alpha| RadialProfile::Power { alpha }),
    ];
    leaf.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            (0.1f64..5.0, inner.clone()).prop_map(|(alpha, g)| RadialProfile::Scale { alpha, inner: Box::new(g) }),
            (0.5f64..6.0, inner.clone()).prop_map(|(m, g)| RadialProfile::Trunc { m, inner: Box::new(g) }),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn norm_is_a_root_of_the_layer_cake(f in distribution(), w in weight()) {
        let spec = QuadratureSpec::default();
        let lambda = orlicz::luxembourg_norm(&f, &w, &spec).unwrap();
        prop_assert!(lambda > 0.0);
        prop_assume!(lambda.is_finite());
        let at = orlicz::layercake_integral(&f, &w, lambda, &spec).unwrap();
        prop_assert!((at - 1.0).abs() <= 1e-8, "integral {at} at λ = {lambda}");
    }

    #[test]
    fn layer_cake_decreases_in_scale(f in distribution(), w in weight(), l in 0.2f64..5.0) {
        let spec = QuadratureSpec::default();
        let a = orlicz::layercake_integral(&f, &w, l, &spec).unwrap();
        let b = orlicz::layercake_integral(&f, &w, 2.0 * l, &spec).unwrap();
        prop_assert!(b <= a * (1.0 + 1e-12));
    }

    #[test]
    fn norms_are_homogeneous(f in distribution(), w in weight(), alpha in 0.1f64..10.0) {
        let spec = QuadratureSpec::default();
        let base = orlicz::luxembourg_norm(&f, &w, &spec).unwrap();
        let dilated = orlicz::luxembourg_norm(&f.dilated(alpha), &w, &spec).unwrap();
        if base.is_finite() {
            prop_assert!((dilated - alpha * base).abs() <= 1e-9 * alpha * base);
        } else {
            prop_assert_eq!(dilated, f64::INFINITY);
        }
    }

    #[test]
    fn norms_are_monotone(f in distribution(), w in weight(), c in 1.0f64..4.0) {
        let spec = QuadratureSpec::default();
        let small = orlicz::luxembourg_norm(&f, &w, &spec).unwrap();
        let large = orlicz::luxembourg_norm(&f.scaled(c), &w, &spec).unwrap();
        prop_assert!(small <= large + 1e-10);
    }

    #[test]
    fn kappa_ratio_is_scale_invariant(m in 0.2f64..6.0, gamma_up in any::<bool>(), w in weight()) {
        let spec = QuadratureSpec::default();
        let measure = RadialMeasure::Density { scale: 2.0, rate: 2.0 };
        let g = RadialProfile::Trunc { m, inner: Box::new(RadialProfile::Log) };
        let gamma = if gamma_up { 4.0 } else { 0.25 };
        let a = conjecture::kappa_ratio(&measure, &g, &w, &spec).unwrap();
        let b = conjecture::kappa_ratio(&measure, &g.scaled(gamma), &w, &spec).unwrap();
        prop_assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        prop_assert!(a > 0.0 && a <= 1.0);
    }

    #[test]
    fn scaling_bound_holds_for_truncations(m in 0.2f64..6.0, alpha in 0.1f64..6.0, n in 1u32..4, w in weight()) {
        let spec = QuadratureSpec::default();
        let g = RadialProfile::Trunc { m, inner: Box::new(RadialProfile::Log) };
        let r = verify::check_scaling(&g, &w, n, alpha, &spec).unwrap();
        prop_assert!(r.pass, "{r:?}");
    }

    #[test]
    fn mini_language_round_trips(g in profile(), w in weight()) {
        let text = parse::format_spec(&serde_json::to_value(&g).unwrap());
        let back: RadialProfile = parse::decode(&text).unwrap();
        prop_assert_eq!(back, g);
        let text = parse::format_spec(&serde_json::to_value(&w).unwrap());
        let back: Weight = parse::decode(&text).unwrap();
        prop_assert_eq!(back, w);
    }

    #[test]
    fn json_keeps_seventeen_digits(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let w = Weight::Poly { p: x };
        let text = serde_json::to_string(&w).unwrap();
        let back: Weight = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, w);
        let d = DistributionFunction::Atom { mass: 1.0, value: x.abs() };
        let back: DistributionFunction = serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
        prop_assert_eq!(back, d);
    }

    #[test]
    fn energy_dominates_its_subextension(m in 0.3f64..6.0, log_r in 0.1f64..3.0, w in weight()) {
        let spec = QuadratureSpec::default();
        let g = RadialProfile::Trunc { m, inner: Box::new(RadialProfile::Log) };
        let s = radial::subextension(&g, log_r).unwrap();
        let before = radial::energy(&g, &w, 1, &spec).unwrap();
        let after = radial::energy(&s, &w, 1, &spec).unwrap();
        prop_assert!(after <= before * (1.0 + 1e-9));
    }
}

#[test]
fn late_blow_up_is_detected() {
    // e^{e^u} eventually beats e^{-t/2} for every scale.
    let spec = QuadratureSpec::default();
    let f = DistributionFunction::Exponential { scale: 0.1, rate: 0.5 };
    let w = Weight::Iterexp { k: 2 };
    assert_eq!(orlicz::luxembourg_norm(&f, &w, &spec).unwrap(), f64::INFINITY);
    assert_eq!(orlicz::layercake_integral(&f, &w, 1e3, &spec).unwrap(), f64::INFINITY);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn support_line_has_no_violations(lo in 0.1f64..1.0, span in 1.5f64..20.0, samples in 3usize..12) {
        let spec = QuadratureSpec::default();
        let measure = RadialMeasure::Density { scale: 2.0, rate: 2.0 };
        let family = conjecture::SearchFamily::Trunc { lo, hi: lo * span };
        let w = weights::exponential();
        let fit = conjecture::coercivity_fit(&measure, &w, 1, &family, samples, &spec).unwrap();
        prop_assert_eq!(fit.violations(), 0);
        prop_assert!(fit.residual >= -1e-12);
    }
}
