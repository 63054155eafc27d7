use proptest::prelude::*;
use rug::{Complex, Float, Rational};
use shiftlab::operators::{build_operator, orbit, OperatorKind, VectorState};
use shiftlab::precision::ulps_between;
use shiftlab::recurrence::{polar_lambda, solve_recurrence, JacobiWeights};
use shiftlab::spaces::{gauss_jacobi, gauss_laguerre};
use shiftlab::weights::{Radical, Weight};
use shiftlab::{make_weights, Precision, SpaceSpec};

fn space(kind: u8, p: u32) -> SpaceSpec {
    match kind % 4 {
        0 => SpaceSpec::classic(p),
        1 => SpaceSpec::generalized("3/2", p).unwrap(),
        2 => SpaceSpec::theta("pi", "1/3", p).unwrap(),
        _ => SpaceSpec::disk("5/4", p).unwrap(),
    }
}

fn prec() -> Precision {
    Precision::from_digits(40).unwrap()
}

fn cvec(v: &[(i8, i8)], bits: u32) -> Vec<Complex> {
    v.iter()
        .map(|&(a, b)| Complex::with_val(bits, (a, b)))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn composition_rule(kind in 0u8..4, p in 0u32..4, n in 0u64..400) {
        let s = make_weights(&space(kind, p), prec()).unwrap();
        let bits = prec().bits();
        match (s.eval_bits(n, bits).unwrap(), s.compose(n, bits).unwrap()) {
            (Weight::ZeroAction, Weight::ZeroAction) => prop_assert!(n < p as u64),
            (Weight::Value(a), Weight::Value(b)) => prop_assert!(ulps_between(&a, &b, bits) <= 1.0),
            _ => prop_assert!(false, "zero action mismatch"),
        }
    }

    #[test]
    fn weights_positive_and_increasing(kind in 0u8..4, p in 0u32..4, n in 0u64..2000) {
        let s = make_weights(&space(kind, p), prec()).unwrap();
        let n = n + p as u64;
        let a = s.value(n).unwrap();
        let b = s.value(n + 1).unwrap();
        prop_assert!(a > 0 && b > a);
    }

    #[test]
    fn radical_products_match_floats(a in 1u32..500, b in 1u32..500, c in 1i32..40, d in 1u32..40) {
        let x = Radical::new(Rational::from((c, d)), a);
        let y = Radical::sqrt_of(b);
        let bits = 200;
        let prod = (&x * &y).to_float(bits);
        let direct = x.to_float(bits) * y.to_float(bits);
        prop_assert!(ulps_between(&prod, &direct, bits - 4) <= 2.0);
        prop_assert_eq!(&x * &x.recip().unwrap(), Radical::rational(1));
    }

    #[test]
    fn recurrence_parity_and_conjugation(kind in 0u8..4, p in 1u32..3, r in 0.1f64..3.0, turn in 0i32..64) {
        let jw = JacobiWeights::from_sequence(&make_weights(&space(kind, p), prec()).unwrap());
        let bits = prec().bits();
        let lam = polar_lambda(&Float::with_val(bits, r), &Rational::from((turn, 64)), bits);
        let n = 30;
        let u = solve_recurrence(&jw, &lam, n).unwrap();
        let neg = solve_recurrence(&jw, &Complex::with_val(bits, -&lam), n).unwrap();
        let conj = solve_recurrence(&jw, &Complex::with_val(bits, lam.conj_ref()), n).unwrap();
        for k in 1..=n {
            let scale = Float::with_val(bits, u.get(k).abs_ref()) + 1u32;
            let tol = scale >> (bits as i32 - 8);
            let sign = if k % 2 == 1 { 1 } else { -1 };
            let d1 = Complex::with_val(bits, neg.get(k) - Complex::with_val(bits, u.get(k) * sign));
            let d2 = Complex::with_val(bits, conj.get(k) - Complex::with_val(bits, u.get(k).conj_ref()));
            prop_assert!(Float::with_val(bits, d1.abs_ref()) <= tol);
            prop_assert!(Float::with_val(bits, d2.abs_ref()) <= tol);
        }
    }

    #[test]
    fn transpose_duality(kind in 0u8..4, p in 0u32..3,
                         u in prop::collection::vec((-9i8..9, -9i8..9), 8),
                         v in prop::collection::vec((-9i8..9, -9i8..9), 8)) {
        let jw = JacobiWeights::from_sequence(&make_weights(&space(kind, p), prec()).unwrap());
        let h = build_operator(OperatorKind::BackwardShift, &jw, 8).unwrap();
        let ht = h.transpose();
        let bits = 2 * prec().bits();
        let (u, v) = (cvec(&u, bits), cvec(&v, bits));
        let dot = |a: &[Complex], b: &[Complex]| {
            a.iter().zip(b).fold(Complex::with_val(bits, 0), |acc, (x, y)| {
                acc + Complex::with_val(bits, x * Complex::with_val(bits, y.conj_ref()))
            })
        };
        let lhs = dot(&h.apply_bits(&u, bits).unwrap(), &v);
        let rhs = dot(&u, &ht.apply_bits(&v, bits).unwrap());
        let d = Float::with_val(bits, Complex::with_val(bits, &lhs - &rhs).abs_ref());
        let scale = Float::with_val(bits, lhs.abs_ref()) + 1u32;
        prop_assert!(d <= scale >> (prec().bits() as i32));
        for r in 0..8 {
            for c in 0..8 {
                prop_assert_eq!(h.entry(r, c), ht.entry(c, r));
            }
        }
    }

    #[test]
    fn backward_shift_nilpotent(kind in 0u8..4, p in 0u32..3, k in 0i64..10) {
        let jw = JacobiWeights::from_sequence(&make_weights(&space(kind, p), prec()).unwrap());
        let dim = 12;
        let h = build_operator(OperatorKind::BackwardShift, &jw, dim).unwrap();
        let k = k + p as i64;
        let v = VectorState::basis(h.offset, dim, k, 128).unwrap();
        let o = orbit(&h, &v, (k - p as i64 + 1) as usize, None).unwrap();
        let last = o.steps.last().unwrap();
        prop_assert!(last.vector.iter().all(|z| z.is_zero()));
        let before = &o.steps[o.steps.len() - 2];
        prop_assert!(!before.vector.iter().all(|z| z.is_zero()));
    }

    #[test]
    fn gauss_rules_well_formed(n in 1usize..40, a in -0.9f64..4.0, b in -0.9f64..4.0) {
        let r = gauss_jacobi(n, a, b).unwrap();
        prop_assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(r.nodes.iter().all(|x| x.abs() < 1.0));
        prop_assert!(r.weights.iter().all(|w| *w > 0.0));
        let l = gauss_laguerre(n, a).unwrap();
        prop_assert!(l.nodes.iter().all(|x| *x > 0.0));
        // zeroth moment Γ(a+1)
        let g = Float::with_val(64, a + 1.0).gamma().to_f64();
        prop_assert!((l.weights.iter().sum::<f64>() / g - 1.0).abs() < 1e-12);
    }
}
