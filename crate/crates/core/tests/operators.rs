use rug::{Complex, Float};
use shiftlab::operators::{build_operator, eigenvector_sum, orbit, s_operator_decay, OperatorKind};
use shiftlab::recurrence::{certify_l2, GammaChoice, GammaSeq, JacobiWeights};
use shiftlab::{make_weights, Precision, SpaceSpec};

fn classic(p: u32) -> JacobiWeights {
    JacobiWeights::from_sequence(
        &make_weights(&SpaceSpec::classic(p), Precision::default()).unwrap(),
    )
}

#[test]
fn half_eigenvalue_orbit_decays_geometrically() {
    // each step can amplify rounding by up to ‖J‖ ≈ 2 w_N, so work with wide floats
    let jw = classic(1).with_precision(Precision::from_bits(640).unwrap());
    let lam = Complex::with_val(64, (0.5, 0.0));
    let e = eigenvector_sum(&jw, &lam, 120).unwrap();
    let op = build_operator(OperatorKind::JacobiSum, &jw, 120).unwrap();
    let o = orbit(&op, &e.state, 20, Some(&lam)).unwrap();
    for s in &o.steps {
        assert_eq!(s.window.trusted, 120 - s.step);
        let head: f64 = e.state.coeffs[..s.window.trusted]
            .iter()
            .map(|z| Float::with_val(64, z.norm_ref()).to_f64())
            .sum();
        let expect = head.sqrt() * 0.5f64.powi(s.step as i32);
        assert!(
            (s.norm.to_f64() / expect - 1.0).abs() < 1e-6,
            "step {}",
            s.step
        );
        assert!(
            s.residual.as_ref().unwrap().to_f64() < 1e-30,
            "{} {:?}",
            s.step,
            s.residual
        );
    }
    let mut buf = Vec::new();
    o.write_csv(&mut buf).unwrap();
    assert!(String::from_utf8(buf)
        .unwrap()
        .starts_with("step,norm,residual,trusted_window\n0,"));
}

#[test]
fn last_residual_within_certified_bound() {
    let jw = classic(1);
    // the damping threshold for |λ| = 1 is 127, so N must exceed it
    let e = eigenvector_sum(&jw, &Complex::with_val(64, 1), 300).unwrap();
    let rep = certify_l2(&e.solution, &jw, &GammaChoice::SqrtNLogN).unwrap();
    assert!(rep.certified);
    let gs = GammaSeq::resolve(&GammaChoice::SqrtNLogN, &jw).unwrap();
    let w = jw.w(300, 128).unwrap();
    let bound = w * &rep.m_global / gs.eval(301, 128).unwrap();
    let r = Float::with_val(128, e.last_residual.abs_ref());
    assert!(r <= bound, "{r} > {bound}");
    let d = Complex::with_val(128, &e.last_residual - &e.predicted_last);
    assert!(Float::with_val(128, d.abs_ref()) <= r * 1e-30f64);
}

#[test]
fn s_operator_right_inverse_on_all_spaces() {
    let specs = [
        SpaceSpec::classic(1),
        SpaceSpec::generalized("1", 0).unwrap(),
        SpaceSpec::theta("2*pi", "0", 0).unwrap(),
        SpaceSpec::disk("1", 2).unwrap(),
    ];
    for spec in specs {
        let s = make_weights(&spec, Precision::default()).unwrap();
        let d = s_operator_decay(&s, spec.p as u64, 30).unwrap();
        assert!(d.right_inverse, "{spec}");
        assert!(d.below(1e-6).is_some(), "{spec}");
    }
}
