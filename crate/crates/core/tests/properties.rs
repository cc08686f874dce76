use std::cmp::Ordering;

use contfrac::{
    approximants, bernoulli_cf, collapse_zeros, convergent_at, determinant_residual, equivalence_transform, euler_cf,
    even_part, extend, lange_find_params, lange_sandwich, odd_part, realize, tail, worpitzky_check, CoefficientSource,
    Convergents, Descriptor, ExtensionScheme, Mode, Scalar, Sequence,
};
use proptest::prelude::*;

fn rational(nonzero: bool) -> impl Strategy<Value = Scalar> {
    (1i64..=3)
        .prop_flat_map(|q| (-5 * q..=5 * q, Just(q)))
        .prop_filter("nonzero", move |(p, _)| !nonzero || *p != 0)
        .prop_map(|(p, q)| Scalar::from_ratio(p, q, Mode::Rational))
}

fn terms(len: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<(Scalar, Scalar)>> {
    prop::collection::vec((rational(true), rational(true)), len)
}

fn source(len: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = CoefficientSource> {
    (rational(false), terms(len)).prop_map(|(b0, t)| CoefficientSource::from_terms(b0, t))
}

fn complex_source(len: usize, digits: u32) -> impl Strategy<Value = CoefficientSource> {
    let c = move || (-3.0f64..3.0, -3.0f64..3.0).prop_map(move |(re, im)| Scalar::from_f64_parts(re, im, digits));
    (c(), prop::collection::vec((c(), c()), len)).prop_map(|(b0, t)| CoefficientSource::from_terms(b0, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rationals_are_reduced(a in rational(false), b in rational(true)) {
        for v in [&a + &b, &a * &b, a.checked_div(&b).unwrap(), &a - &b] {
            let r = v.as_rational().unwrap();
            prop_assert!(r.denom() > &0.into());
            prop_assert_eq!(&r.reduced(), r);
        }
    }

    #[test]
    fn mixed_precision_takes_the_minimum(x in -5.0f64..5.0, y in -5.0f64..5.0) {
        let a = Scalar::from_f64_parts(x, 1.0, 40);
        let b = Scalar::from_f64_parts(y, -1.0, 60);
        let s = &a + &b;
        prop_assert_eq!(s.mode(), Mode::Complex { digits: 40 });
        prop_assert!(s.precision_mixed());
        prop_assert!(!(&a + &a).precision_mixed());
    }

    #[test]
    fn terms_are_replayable_and_bounded(src in source(1..=12)) {
        let len = src.len().unwrap();
        for n in 1..=len {
            prop_assert_eq!(src.term(n).unwrap(), src.term(n).unwrap());
        }
        prop_assert!(src.term(len + 1).is_err());
    }

    #[test]
    fn descriptors_round_trip(src in source(1..=8)) {
        let json = src.descriptor().to_json();
        let back = Descriptor::from_json(&json).unwrap();
        let rebuilt = realize(&back, Mode::Rational).unwrap();
        prop_assert_eq!(rebuilt.first_difference(&src, src.len().unwrap()).unwrap(), None);
        let even = even_part(&src);
        let rebuilt_even = realize(&Descriptor::from_json(&even.descriptor().to_json()).unwrap(), Mode::Rational).unwrap();
        prop_assert_eq!(rebuilt_even.descriptor().to_json(), even.descriptor().to_json());
    }

    #[test]
    fn determinant_identity_is_exact(src in source(1..=20)) {
        for n in 1..=src.len().unwrap() {
            let (r1, r2) = determinant_residual(&src, n).unwrap();
            prop_assert!(r1.is_zero() && r2.is_zero());
        }
    }

    #[test]
    fn equivalence_preserves_approximants(src in source(1..=12), r in prop::collection::vec(rational(true), 12)) {
        let mut scale = vec![Scalar::one(Mode::Rational)];
        scale.extend(r);
        let eq = equivalence_transform(&src, &Sequence::from_vec(scale));
        let n = src.len().unwrap();
        prop_assert_eq!(approximants(&eq, n).unwrap(), approximants(&src, n).unwrap());
    }

    #[test]
    fn tails_compose(src in source(30..=30), m in 1usize..8, k in 1usize..8) {
        let twice = tail(&tail(&src, m).unwrap(), k).unwrap();
        let once = tail(&src, m + k - 1).unwrap();
        prop_assert_eq!(twice.len(), once.len());
        prop_assert_eq!(twice.first_difference(&once, once.len().unwrap()).unwrap(), None);
    }

    #[test]
    fn contractions_pick_subsequences(src in source(20..=20)) {
        let full = approximants(&src, 19).unwrap();
        let even = approximants(&even_part(&src), 9).unwrap();
        let odd = approximants(&odd_part(&src).unwrap(), 9).unwrap();
        for k in 0..=9 {
            prop_assert_eq!(&even[k], &full[2 * k]);
            prop_assert_eq!(&odd[k], &full[2 * k + 1]);
        }
    }

    #[test]
    fn extensions_round_trip(t in source(1..=12), ones in prop::collection::vec(rational(true), 1..=12), c1 in rational(true)) {
        let n = t.len().unwrap();
        for scheme in [ExtensionScheme::Cor1, ExtensionScheme::Cor2] {
            let back = even_part(&extend(&t, &scheme).unwrap());
            prop_assert_eq!(back.first_difference(&t, n).unwrap(), None);
        }
        let one = Scalar::one(Mode::Rational);
        let unit = CoefficientSource::from_terms(c1, ones.into_iter().map(|a| (a, one.clone())).collect());
        let back = odd_part(&extend(&unit, &ExtensionScheme::Cor7).unwrap()).unwrap();
        prop_assert_eq!(back.first_difference(&unit, unit.len().unwrap()).unwrap(), None);
    }

    #[test]
    fn bernoulli_and_euler_agree(a in prop::collection::vec(rational(true), 2..=12)) {
        let mut sums = Vec::new();
        let mut acc = Scalar::zero(Mode::Rational);
        for x in &a {
            acc = &acc + x;
            sums.push(acc.clone());
        }
        let n = a.len() - 1;
        prop_assert_eq!(
            approximants(&bernoulli_cf(&sums).unwrap(), n).unwrap(),
            approximants(&euler_cf(&a).unwrap(), n).unwrap()
        );
    }

    #[test]
    fn collapse_keeps_the_final_approximant(b0 in rational(false), bs in prop::collection::vec(rational(false), 2..=12)) {
        // zeros only at interior, non-adjacent positions
        let mut bs = bs;
        let last = bs.len() - 1;
        for i in 1..bs.len() {
            if bs[i].is_zero() && (i == last || bs[i - 1].is_zero()) {
                bs[i] = Scalar::one(Mode::Rational);
            }
        }
        let one = Scalar::one(Mode::Rational);
        let src = CoefficientSource::from_terms(b0, bs.iter().map(|b| (one.clone(), b.clone())).collect());
        let n = src.len().unwrap();
        let before = convergent_at(&src, n).unwrap().value();
        let collapsed = collapse_zeros(&src).unwrap();
        let after = convergent_at(&collapsed, collapsed.len().unwrap()).unwrap().value();
        prop_assert!(before.same_point(&after));
    }

    #[test]
    fn renormalization_keeps_the_projective_class(src in complex_source(60, 30)) {
        let scaled: Vec<_> = Convergents::new(&src, 60).collect::<Result<_, _>>().unwrap();
        let raw: Vec<_> = Convergents::new(&src, 60).without_renormalization().collect::<Result<_, _>>().unwrap();
        for (s, r) in scaled.iter().zip(&raw) {
            // A_s B_r = A_r B_s up to rounding
            let lhs = &s.a * &r.b;
            let rhs = &r.a * &s.b;
            let size = |a: &Scalar, b: &Scalar| &a.abs() + &b.abs();
            let diff = (&lhs - &rhs).abs();
            let bound = &(&size(&s.a, &s.b) * &size(&r.a, &r.b)) * &Scalar::from_f64_parts(1e-25, 0.0, 30);
            prop_assert!(diff.cmp_real(&bound) != Ordering::Greater, "N = {}", s.n);
        }
    }

    #[test]
    fn worpitzky_certificates_bound_the_approximants(a in prop::collection::vec((-1i64..=1, 1i64..=4), 30)) {
        let one = Scalar::one(Mode::Rational);
        let terms = a.iter().map(|&(p, q)| (Scalar::from_ratio(p, 4 * q, Mode::Rational), one.clone())).collect();
        let src = CoefficientSource::from_terms(Scalar::zero(Mode::Rational), terms);
        let cert = worpitzky_check(&src, 30).unwrap();
        prop_assert!(cert.is_ok());
        let half = Scalar::from_ratio(1, 2, Mode::Rational);
        for f in approximants(&src, 30).unwrap().into_iter().flatten() {
            prop_assert!(f.cmp_abs(&half) == Ordering::Less);
        }
    }

    #[test]
    fn lange_parameters_sit_on_the_boundary(re in -4.0f64..4.0, im in -4.0f64..4.0) {
        prop_assume!(im.abs() > 1e-3 || re > 1e-3);
        let a = Scalar::from_f64_parts(re, im, 40);
        let lp = lange_find_params(&a, 40).unwrap();
        prop_assert!(lange_sandwich(&lp.alpha, &lp.rho));
        let i = Scalar::i(40);
        let ia = &i * &lp.alpha;
        for v in [&lp.c + &ia, &lp.c - &ia] {
            prop_assert!(v.abs().rel_close(&lp.rho, -25.0));
        }
    }
}

#[test]
fn lange_parameters_for_positive_rationals_are_exact() {
    for (a, alpha, rho_sq) in [("1", "1/2", "5/4"), ("2", "1/4", "9/16"), ("1/3", "3/2", "21/4")] {
        let lp = lange_find_params(&Scalar::parse(a, 40).unwrap(), 40).unwrap();
        assert_eq!(lp.alpha, Scalar::parse(alpha, 40).unwrap());
        assert_eq!(lp.rho_sq, Scalar::parse(rho_sq, 40).unwrap());
    }
}
