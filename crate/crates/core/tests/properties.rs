use proptest::prelude::*;

use robust_drm::drm_bounds::Options;
use robust_drm::{bound, rho, validate_shape, var_bound, BoundSide, DistortionFunction, MomentSpec, ShapeClass, VarKind};

const CLASSES: [ShapeClass; 4] = [
    ShapeClass::General,
    ShapeClass::Symmetric,
    ShapeClass::Unimodal,
    ShapeClass::UnimodalSymmetric,
];

fn distortion() -> impl Strategy<Value = DistortionFunction> {
    prop_oneof![
        (0.01..0.99f64).prop_map(|a| DistortionFunction::var(a).unwrap()),
        (0.01..0.99f64).prop_map(|a| DistortionFunction::var_plus(a).unwrap()),
        (0.01..0.99f64).prop_map(|a| DistortionFunction::tvar(a).unwrap()),
        (0.01..0.98f64, 0.05..1.0f64).prop_map(|(a, f)| {
            let b = a + f * (0.99 - a);
            DistortionFunction::rvar(a, b.max(a + 1e-3)).unwrap()
        }),
        (0.05..0.95f64, 0.55..0.95f64).prop_map(|(a, r)| DistortionFunction::ph(a, r).unwrap()),
    ]
}

fn class() -> impl Strategy<Value = ShapeClass> {
    prop::sample::select(CLASSES.to_vec())
}

fn side() -> impl Strategy<Value = BoundSide> {
    prop::sample::select(vec![BoundSide::Sup, BoundSide::Inf])
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / (1.0 + a.abs().max(b.abs()))
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, ..ProptestConfig::default() })]

    #[test]
    fn location_scale_equivariance(h in distortion(), c in class(), s in side(), mu in -5.0..5.0f64, sigma in 0.1..10.0f64) {
        let o = Options::default();
        let z = bound(&h, c, s, &MomentSpec::standard(), &o).unwrap();
        let x = bound(&h, c, s, &MomentSpec::new(mu, sigma).unwrap(), &o).unwrap();
        if z.value.is_finite() {
            prop_assert!(rel(x.value, mu + sigma * z.value) < 1e-9, "{} vs {}", x.value, mu + sigma * z.value);
        } else {
            prop_assert_eq!(x.value, z.value);
        }
        prop_assert_eq!(x.attainable, z.attainable);
    }

    #[test]
    fn sup_at_least_mean_at_least_inf(h in distortion(), c in class()) {
        let o = Options::default();
        let m = MomentSpec::standard();
        let sup = bound(&h, c, BoundSide::Sup, &m, &o).unwrap().value;
        let inf = bound(&h, c, BoundSide::Inf, &m, &o).unwrap().value;
        prop_assert!(inf <= 1e-12 && sup >= -1e-12, "{inf} {sup}");
    }

    #[test]
    fn smaller_classes_give_tighter_bounds(h in distortion(), s in side()) {
        let o = Options::default();
        let m = MomentSpec::standard();
        let v = |c| bound(&h, c, s, &m, &o).unwrap();
        let sign = if s == BoundSide::Sup { 1.0 } else { -1.0 };
        let g = sign * v(ShapeClass::General).value;
        let sym = sign * v(ShapeClass::Symmetric).value;
        let uni = v(ShapeClass::Unimodal);
        let us = v(ShapeClass::UnimodalSymmetric);
        let tol = 1e-9;
        prop_assert!(sym <= g + tol);
        prop_assert!(sign * uni.value <= g + tol);
        prop_assert!(sign * us.value <= sym + tol);
        // the unimodal-symmetric value may be a bracket end; its constructive end is feasible
        let us_feasible = us.bracket.as_ref().map_or(sign * us.value, |b| sign * if s == BoundSide::Sup { b.lower } else { b.upper });
        prop_assert!(us_feasible <= sign * uni.value + tol, "{us_feasible} vs {}", uni.value);
    }

    #[test]
    fn extremal_laws_are_feasible_and_attain(h in distortion(), c in class(), s in side(), mu in -2.0..2.0f64, sigma in 0.5..3.0f64) {
        let m = MomentSpec::new(mu, sigma).unwrap();
        let r = bound(&h, c, s, &m, &Options::default()).unwrap();
        if let Some(q) = &r.extremal {
            prop_assert!(validate_shape(q, c, &m, 1e-7), "{h} {c} {s}");
            prop_assert!(r.attainable);
            let got = rho(&h, q).unwrap();
            prop_assert!(rel(got, r.value) < 1e-6, "{got} vs {}", r.value);
        }
        if let Some(b) = &r.bracket {
            prop_assert!(b.lower <= b.upper + 1e-12);
            if let Some(w) = &b.witness {
                prop_assert!(validate_shape(w, c, &m, 1e-7));
                let end = if s == BoundSide::Sup { b.lower } else { b.upper };
                prop_assert!(rel(rho(&h, w).unwrap(), end) < 1e-6);
            }
        }
    }

    #[test]
    fn var_bounds_increase_with_level(c in class(), a in 0.01..0.98f64, d in 0.001..0.02f64) {
        let m = MomentSpec::standard();
        for kind in [VarKind::Minus, VarKind::Plus] {
            for s in [BoundSide::Sup, BoundSide::Inf] {
                let lo = var_bound(c, s, kind, a, &m).unwrap().value;
                let hi = var_bound(c, s, kind, a + d, &m).unwrap().value;
                prop_assert!(lo <= hi + 1e-12, "{c} {s} {kind:?}: {lo} > {hi}");
            }
        }
    }
}
