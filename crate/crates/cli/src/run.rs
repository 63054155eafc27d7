//! Task execution. Each task returns named checks, certificates, CSV traces
//! and a JSON summary; [`write_outcome`] lays them out in the output directory.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use rug::{Complex, Float};
use serde::Serialize;
use serde_json::{json, Value};
use shiftlab::operators::{
    approximate_by_periodic, block_identity, build_operator, eigenvector_hp, eigenvector_sum,
    orbit, periodic_point_hp, periodic_point_sum, OperatorKind, VectorState,
};
use shiftlab::precision::{fmt_float, ulps_between};
use shiftlab::recurrence::certificate::{ARTIFACT_VERSION, SCHEMA_VERSION};
use shiftlab::recurrence::{
    certify_l2, check_alt311, check_hyp1, check_hyp2, check_hyp3, solve_recurrence,
    theta_threshold, Certificate, GammaChoice, GammaSeq, Hypothesis, JacobiWeights, Verdict,
};
use shiftlab::spaces::{
    adjoint_check_disk, basis_eval_theta, coherent_norm_check, disk_shift_weight, grid,
    inner_product, kernel_eval, monomial_norm_disk, raw_inner_product_disk, reproduce_basis,
    theta_multiplication_check, write_samples, BasisFunction, Polynomial, QuadratureRule,
};
use shiftlab::weights::{asymptotic_check, moment_asymptotics, Weight};
use shiftlab::{make_weights, Error, Precision, Result, SpaceKind, SpaceSpec, WeightSequence};

use crate::scenario::{ComplexParam, Scenario, StartVector, Task};

/// A named check with its verdict.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub verdict: Verdict,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            verdict: if pass { Verdict::Pass } else { Verdict::Fail },
            detail: detail.into(),
        }
    }

    fn with(name: impl Into<String>, verdict: Verdict, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            verdict,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub certificates: Vec<(String, Certificate)>,
    /// `(file name, contents)` of CSV traces.
    pub traces: Vec<(String, Vec<u8>)>,
    pub summary: BTreeMap<String, Value>,
}

impl Outcome {
    pub fn verdict(&self) -> Verdict {
        let certs = self.certificates.iter().map(|c| c.1.verdict);
        Verdict::worst(self.checks.iter().map(|c| c.verdict).chain(certs)).unwrap_or(Verdict::Pass)
    }

    fn put(&mut self, key: &str, v: impl Serialize) {
        self.summary
            .insert(key.into(), serde_json::to_value(v).expect("serializable"));
    }

    fn trace(&mut self, name: &str, write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        write(&mut buf)?;
        self.traces.push((name.to_string(), buf));
        Ok(())
    }
}

fn f20(x: &Float) -> String {
    fmt_float(x, 20)
}

fn tag(x: &impl std::fmt::Display) -> String {
    x.to_string()
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub fn execute(sc: &Scenario) -> Result<Outcome> {
    let prec = sc.precision()?;
    let seq = make_weights(&sc.space, prec)?;
    let jw = JacobiWeights::from_sequence(&seq);
    let mut out = Outcome::default();
    match &sc.task {
        Task::Weights { n_min, n_max } => {
            weights(&seq, n_min.unwrap_or(seq.p() as u64), *n_max, &mut out)?
        }
        Task::Certify {
            hypotheses,
            gamma,
            lambda_abs,
            hyp1_n_max,
            hyp2_range,
            hyp3_range,
            theta_extra,
        } => {
            let bits = prec.bits();
            let lams: Vec<Float> = lambda_abs.iter().map(|l| l.to_float(bits)).collect();
            for h in hypotheses {
                match h {
                    Hypothesis::Hyp1 => {
                        let c = check_hyp1(&jw, hyp1_n_max.unwrap_or(10_000), None)?;
                        out.certificates.push(("hyp1".into(), c));
                    }
                    Hypothesis::Hyp2 => {
                        let [lo, hi] = hyp2_range.unwrap_or([2, 10_000]);
                        out.certificates
                            .push(("hyp2".into(), check_hyp2(&jw, lo, hi)?));
                    }
                    Hypothesis::Hyp3 | Hypothesis::Alt311 => {
                        let [lo, hi] = hyp3_range.unwrap_or([3, 100_000]);
                        for (l, raw) in lams.iter().zip(lambda_abs) {
                            let mut c = if *h == Hypothesis::Hyp3 {
                                check_hyp3(&jw, gamma, l, lo, hi)?
                            } else {
                                check_alt311(&jw, gamma, l, lo, hi)?
                            };
                            if let GammaChoice::ThetaGeometric { beta_prime } = gamma {
                                theta_closed_form(
                                    &jw,
                                    l,
                                    beta_prime,
                                    theta_extra.unwrap_or(1000),
                                    &mut c,
                                )?;
                            }
                            let name = if *h == Hypothesis::Hyp3 {
                                "hyp3"
                            } else {
                                "alt311"
                            };
                            out.certificates
                                .push((format!("{name}_lambda_{}", tag(raw)), c));
                        }
                    }
                }
            }
        }
        Task::Recurrence { lambda, n, gamma } => {
            let lam = lambda.to_complex(prec.bits());
            let sol = solve_recurrence(&jw, &lam, *n)?;
            let res = sol.residuals();
            out.checks.push(Check::new(
                "interior residual <= 10 ulp",
                res.interior_ulps <= 10.0,
                format!("{:.3} ulp at n = {}", res.interior_ulps, res.worst_index),
            ));
            out.put("lambda", lambda.to_string());
            out.put("internal_bits", sol.internal_bits);
            out.put("confirmed_bits", sol.confirmed_bits);
            out.put(
                "u_next",
                fmt_float(sol.u_next.real(), 20) + " + i" + &fmt_float(sol.u_next.imag(), 20),
            );
            out.put("partial_sum", f20(sol.partial_sums.last().unwrap()));
            if let Some(g) = gamma {
                let rep = certify_l2(&sol, &jw, g)?;
                out.checks.push(Check::with(
                    "l2 tail certified",
                    if rep.certified {
                        Verdict::Pass
                    } else {
                        Verdict::Inconclusive
                    },
                    rep.notes.join("; "),
                ));
                out.put("l2", rep.to_json());
            }
            out.trace("recurrence.csv", |b| sol.write_csv(b))?;
        }
        Task::Eigensum { grid, n, gamma } => {
            eigensum(&jw, grid.points(), *n, gamma, prec, &mut out)?
        }
        Task::Orbit {
            operator,
            start,
            dim,
            steps,
        } => orbit_task(&seq, &jw, *operator, start, *dim, *steps, prec, &mut out)?,
        Task::PeriodicSum {
            roots,
            amplitudes,
            n,
            gamma,
        } => {
            let bits = prec.bits();
            let amps: Vec<Complex> = if amplitudes.is_empty() {
                vec![Complex::with_val(bits, 1); roots.len()]
            } else {
                amplitudes.iter().map(|a| a.to_complex(bits)).collect()
            };
            let r = periodic_point_sum(&jw, roots, &amps, *n, gamma.as_ref())?;
            out.checks.push(Check::new(
                format!("(H+H*)^{} phi = phi on the trusted window", r.period),
                r.passed,
                format!(
                    "residual {} <= tolerance {}",
                    f20(&r.residual),
                    f20(&r.tolerance)
                ),
            ));
            out.put("period", r.period);
            out.put("lcm", r.lcm);
            out.put("window", r.window);
            out.put("residual", f20(&r.residual));
            out.put("full_residual", f20(&r.full_residual));
            out.put("tail_norm_bound", r.tail_norm_bound.as_ref().map(f20));
            out.put("tolerance", f20(&r.tolerance));
            out.put("working_bits", r.working_bits);
            out.put(
                "l2_certificates",
                r.certificates
                    .iter()
                    .map(|c| c.to_json())
                    .collect::<Vec<_>>(),
            );
            out.trace("periodic_sum.csv", |b| coeff_csv(&r.state, b))?;
        }
        Task::PeriodicHp {
            s,
            period,
            n_trunc,
            blocks,
        } => {
            let r = periodic_point_hp(&seq, *s, *period, *n_trunc)?;
            let scale = r
                .state
                .coeffs
                .iter()
                .map(|c| Float::with_val(64, c.abs_ref()))
                .fold(Float::with_val(64, 0), |a, b| a.max(&b));
            let float_ok = r.residual <= scale * 1e-25f64;
            match r.exact_periodic {
                Some(e) => out.checks.push(Check::new(
                    "H_p^N phi = phi exactly on the window",
                    e,
                    format!("window {:?}", r.window),
                )),
                None => out.checks.push(Check::new(
                    "H_p^N phi = phi to 1e-25 on the window",
                    float_ok,
                    format!("max residual {}", f20(&r.residual)),
                )),
            }
            let k = blocks.unwrap_or(3);
            for s_block in [seq.p() as u64, *s] {
                let b = block_identity(&seq, s_block, *period, k)?;
                out.checks.push(Check::new(
                    format!("block identity s = {s_block}, N = {period}, k <= {k}"),
                    b.holds,
                    if b.exact {
                        "exact".to_string()
                    } else {
                        format!("max relative error {:.2e}", b.max_rel_error)
                    },
                ));
                if *s == seq.p() as u64 {
                    break;
                }
            }
            out.put("window", r.window);
            out.put("residual", f20(&r.residual));
            out.put("tail_bound", r.state.tail_bound.as_ref().map(f20));
            out.trace("periodic_hp.csv", |b| coeff_csv(&r.state, b))?;
        }
        Task::Approximate {
            coefficients,
            epsilons,
            n_max,
        } => {
            let bits = prec.bits();
            let phi = VectorState::finite(
                seq.p() as i64,
                coefficients.iter().map(|c| c.to_complex(bits)).collect(),
            );
            let mut rows = Vec::new();
            for &eps in epsilons {
                let r = approximate_by_periodic(&seq, &phi, eps, n_max.unwrap_or(1000))?;
                out.checks.push(Check::new(
                    format!("||phi - psi|| <= {eps:e}"),
                    r.error_bound <= eps,
                    format!("N = {}, bound {}", r.n_used, f20(&r.error_bound)),
                ));
                rows.push(json!({"epsilon": eps, "n_used": r.n_used, "error_bound": f20(&r.error_bound), "trace": r.trace, "smallness": r.smallness}));
            }
            out.put("approximations", rows);
        }
        Task::Quadrature {
            n_max,
            order,
            cutoff,
            sample_index,
        } => {
            quadrature(&sc.space, *n_max, *order, *cutoff, prec, &mut out)?;
            if let Some(k) = sample_index {
                let f = BasisFunction::new(&sc.space, *k);
                let pts = grid([-1.0, 1.0], [-1.0, 1.0], 21, 21);
                out.trace("samples.csv", |b| write_samples(&f, &pts, b))?;
            }
        }
        Task::Asymptotics { probes } => {
            let rep = asymptotic_check(&seq, probes)?;
            out.checks.push(Check::with(
                "ratio to growth model settles",
                if rep.flags.is_empty() {
                    Verdict::Pass
                } else {
                    Verdict::Inconclusive
                },
                rep.flags.join("; "),
            ));
            out.put("weights", &rep);
            if let SpaceKind::GeneralizedBargmann { beta } = &sc.space.kind {
                let m = moment_asymptotics(beta, probes, prec.bits())?;
                let last = m.probes.last().map(|p| p.deviation).unwrap_or(f64::NAN);
                out.checks.push(Check::new(
                    "moment deviation decreasing and <= 1e-3 at the last probe",
                    m.decreasing && last <= 1e-3,
                    format!("deviation {last:.3e}, observed C = {:.4}", m.observed_c),
                ));
                out.put("moments", &m);
            }
        }
    }
    Ok(out)
}

fn theta_closed_form(
    jw: &JacobiWeights,
    lam: &Float,
    beta_prime: &shiftlab::RealParam,
    extra: u64,
    cert: &mut Certificate,
) -> Result<()> {
    let t = theta_threshold(jw, lam, beta_prime, extra)?;
    cert.detail(
        "theta_closed_form",
        json!({
            "inequality": "m_beta * exp(-(2p+1) mu n) + C_beta < 1",
            "m_beta": f20(&t.m_beta),
            "c_beta": f20(&t.c_beta),
            "rate": f20(&t.rate),
            "n0": f20(&t.n0),
            "first_index": t.first_index,
            "checked_through": t.checked_through,
            "holds": t.holds,
            "max_lhs": f20(&t.max_lhs),
            "closed_form_gap": t.closed_form_gap,
        }),
    );
    if !t.holds {
        cert.verdict = Verdict::Fail;
        cert.notes.push(format!(
            "closed-form theta inequality fails between {} and {}",
            t.first_index, t.checked_through
        ));
    }
    Ok(())
}

fn weights(seq: &WeightSequence, lo: u64, hi: u64, out: &mut Outcome) -> Result<()> {
    let bits = seq.precision().bits();
    let digits = seq.precision().print_digits();
    let table = seq.tabulate(lo, hi, bits)?;
    let mut worst: f64 = 0.0;
    let mut rows = Vec::with_capacity(table.len());
    for (i, w) in table.iter().enumerate() {
        let n = lo + i as u64;
        let Weight::Value(c) = seq.compose(n, bits)? else {
            unreachable!("n >= p")
        };
        let u = ulps_between(w, &c, bits);
        worst = worst.max(u);
        rows.push([
            n.to_string(),
            fmt_float(w, digits),
            fmt_float(&c, digits),
            format!("{u:.3}"),
        ]);
    }
    out.checks.push(Check::new(
        "composition rule within 1 ulp",
        worst <= 1.0,
        format!("max {worst:.3} ulp"),
    ));
    out.put("meta", seq.meta());
    out.put("label", seq.label());
    out.trace("weights.csv", |b| {
        let mut w = csv::Writer::from_writer(b);
        w.write_record(["n", "omega", "composed", "ulps"])?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    })
}

fn eigensum(
    jw: &JacobiWeights,
    points: Vec<ComplexParam>,
    n: usize,
    gamma: &GammaChoice,
    prec: Precision,
    out: &mut Outcome,
) -> Result<()> {
    let bits = prec.bits();
    let gs = GammaSeq::resolve(gamma, jw)?;
    let rho = gs
        .tail_sum(2 * n as u64, bits)
        .zip(gs.tail_sum(n as u64, bits))
        .map(|(a, b)| Float::with_val(bits, a / b).sqrt());
    let mut rows = Vec::new();
    let mut worst_ulps: f64 = 0.0;
    let mut bad = Vec::new();
    let mut undecided = false;
    for lam in &points {
        let l = lam.to_complex(bits);
        let a = eigenvector_sum(jw, &l, n)?;
        let b = eigenvector_sum(jw, &l, 2 * n)?;
        worst_ulps = worst_ulps.max(a.interior_ulps).max(b.interior_ulps);
        let (ra, rb) = (a.normalized_last(), b.normalized_last());
        let shrink = rho.as_ref().map(|r| rb <= Float::with_val(bits, &ra * r));
        undecided |= shrink.is_none();
        if shrink == Some(false) || a.interior_ulps > 10.0 || b.interior_ulps > 10.0 {
            bad.push(lam.to_string());
        }
        rows.push([
            fmt_float(l.real(), 20),
            fmt_float(l.imag(), 20),
            format!("{:.3}", a.interior_ulps),
            format!("{:.3}", b.interior_ulps),
            f20(&ra),
            f20(&rb),
        ]);
    }
    let verdict = if !bad.is_empty() {
        Verdict::Fail
    } else if undecided {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    out.checks.push(Check::with(
        format!("interior residual <= 10 ulp and |u_(N+1)| shrinks by the gamma-tail factor from N = {n} to {}", 2 * n),
        verdict,
        if bad.is_empty() { format!("worst interior {worst_ulps:.3} ulp") } else { format!("failing at {}", bad.join(", ")) },
    ));
    out.put("tail_factor", rho.as_ref().map(f20));
    out.put("gamma", gs.name());
    out.trace("eigensum.csv", |b| {
        let mut w = csv::Writer::from_writer(b);
        w.write_record([
            "lambda_re",
            "lambda_im",
            "interior_ulps_n",
            "interior_ulps_2n",
            "last_n",
            "last_2n",
        ])?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    })
}

#[allow(clippy::too_many_arguments)]
fn orbit_task(
    seq: &WeightSequence,
    jw: &JacobiWeights,
    kind: OperatorKind,
    start: &StartVector,
    dim: usize,
    steps: usize,
    prec: Precision,
    out: &mut Outcome,
) -> Result<()> {
    let op = build_operator(kind, jw, dim)?;
    let bits = prec.bits();
    let (v, lam) = match start {
        StartVector::Basis { k } => (VectorState::basis(op.offset, dim, *k, bits)?, None),
        StartVector::EigenSum { lambda } => {
            let l = lambda.to_complex(bits);
            (
                eigenvector_sum(jw, &l, dim)?.state,
                (kind == OperatorKind::JacobiSum).then_some(l),
            )
        }
        StartVector::EigenHp { lambda } => {
            let l = lambda.to_complex(bits);
            (
                eigenvector_hp(seq, &l, dim)?.state,
                (kind == OperatorKind::BackwardShift).then_some(l),
            )
        }
    };
    let o = match orbit(&op, &v, steps, lam.as_ref()) {
        Ok(o) => o,
        Err(e @ Error::Truncation { .. }) => {
            out.checks.push(Check::new(
                "trusted window stays nonempty",
                false,
                e.to_string(),
            ));
            return Ok(());
        }
        Err(e) => return Err(e),
    };
    out.checks.push(Check::new(
        "trusted window stays nonempty",
        true,
        format!("{steps} steps"),
    ));
    if let (OperatorKind::BackwardShift, StartVector::Basis { k }) = (kind, start) {
        let m = (*k - op.offset + 1) as usize;
        if steps >= m {
            let zero = o.steps[m].vector.iter().all(|z| z.is_zero());
            out.checks
                .push(Check::new(format!("H_p^{m} P_{k} = 0"), zero, ""));
        }
    }
    out.put("operator", op.to_json());
    out.put(
        "norms",
        o.steps.iter().map(|s| f20(&s.norm)).collect::<Vec<_>>(),
    );
    out.trace("orbit.csv", |b| o.write_csv(b))
}

fn coeff_csv(v: &VectorState, b: &mut Vec<u8>) -> Result<()> {
    let mut w = csv::Writer::from_writer(b);
    w.write_record(["n", "re", "im"])?;
    for (i, c) in v.coeffs.iter().enumerate() {
        if !c.is_zero() {
            w.write_record([
                (v.offset + i as i64).to_string(),
                fmt_float(c.real(), 25),
                fmt_float(c.imag(), 25),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

struct QRows(Vec<[String; 6]>);

impl QRows {
    fn push(&mut self, check: &str, n: u64, m: u64, value: f64, expected: f64) -> f64 {
        let err = (value - expected).abs();
        self.0.push([
            check.into(),
            n.to_string(),
            m.to_string(),
            format!("{value:e}"),
            format!("{expected:e}"),
            format!("{err:e}"),
        ]);
        err
    }
}

fn quadrature(
    space: &SpaceSpec,
    n_max: Option<u64>,
    order: Option<usize>,
    cutoff: Option<f64>,
    prec: Precision,
    out: &mut Outcome,
) -> Result<()> {
    let mut rows = QRows(Vec::new());
    out.put("arithmetic", "f64");
    match &space.kind {
        SpaceKind::PoincareDisk { nu } => {
            let nu = nu.to_f64();
            let n_max = n_max.unwrap_or(12);
            let rule = QuadratureRule::disk(nu, order.unwrap_or(2 * n_max as usize + 8))?;
            let mut worst: f64 = 0.0;
            for n in 0..=n_max {
                let z = Polynomial::monomial(n as usize, 1.0);
                let q = raw_inner_product_disk(nu, &z, &z, &rule)?.value.re;
                let c = monomial_norm_disk(n, nu)?;
                worst = worst.max(rows.push("monomial_norm", n, n, q, c) / c);
            }
            out.checks.push(Check::new(
                "monomial norms match the closed form to 1e-10",
                worst <= 1e-10,
                format!("{worst:.2e}"),
            ));
            let k = n_max.min(8);
            let mut adj: f64 = 0.0;
            for n in 0..=k {
                for m in 0..=k {
                    let a = adjoint_check_disk(n, m, nu, &rule)?;
                    adj = adj.max(rows.push("adjoint", n, m, a.lhs.re, a.rhs.re));
                }
            }
            out.checks.push(Check::new(
                "<A z^n, z^m> = <z^n, A* z^m> to 1e-10",
                adj <= 1e-10,
                format!("{adj:.2e}"),
            ));
            let base = make_weights(&space.with_p(0), prec)?;
            let mut ww: f64 = 0.0;
            for n in 0..=k {
                let q = disk_shift_weight(n, nu, &rule)?;
                ww = ww.max(rows.push("shift_weight", n, n + 1, q, base.value(n)?.to_f64()));
            }
            out.checks.push(Check::new(
                "<A* P_n, P_(n+1)> matches omega_n to 1e-9",
                ww <= 1e-9,
                format!("{ww:.2e}"),
            ));
        }
        SpaceKind::ClassicBargmann | SpaceKind::GeneralizedBargmann { .. } => {
            let beta = match &space.kind {
                SpaceKind::GeneralizedBargmann { beta } => beta.to_f64(),
                _ => 2.0,
            };
            let n_max = n_max.unwrap_or(8);
            let rule = QuadratureRule::plane(beta, order.unwrap_or(2 * n_max as usize + 8))?;
            let mut worst: f64 = 0.0;
            for n in 0..=n_max {
                for m in 0..=n_max {
                    let v = inner_product(
                        space,
                        &BasisFunction::new(space, n),
                        &BasisFunction::new(space, m),
                        &rule,
                    )?;
                    let e = if n == m { 1.0 } else { 0.0 };
                    rows.push("orthonormality", n, m, v.value.re, e);
                    worst = worst.max((v.value - e).norm());
                }
            }
            out.checks.push(Check::new(
                "basis orthonormal to 1e-10",
                worst <= 1e-10,
                format!("{worst:.2e}"),
            ));
            let z = Complex64::new(0.6, -0.3);
            let radius = cutoff.unwrap_or(30f64.powf(1.0 / beta));
            let cut = QuadratureRule::plane_cutoff(beta, radius, 60)?;
            let got = reproduce_basis(beta, 2, z, &cut, 60)?;
            let want = BasisFunction::new(space, 2).try_eval(z)?;
            let gap = rows.push("reproducing_e2", 2, 0, (got - want).norm(), 0.0);
            out.checks.push(Check::new(
                "kernel reproduces e_2 within 1e-6",
                gap <= 1e-6,
                format!("{gap:.2e}, cutoff mass {:.1e}", cut.truncation_bound(0)),
            ));
            if beta == 2.0 {
                let l = Complex64::new(-0.4, 1.9);
                let k = kernel_eval(2.0, z, l, 60, 1e-12)?;
                let kg = rows.push(
                    "kernel_closed_form",
                    0,
                    0,
                    (k.value - (z * l.conj()).exp()).norm(),
                    0.0,
                );
                out.checks.push(Check::new(
                    "kernel equals exp(z conj(l)) to 1e-12",
                    kg <= 1e-12,
                    format!("{kg:.2e}"),
                ));
                let c = coherent_norm_check(Complex64::new(1.0, 0.0), 60, prec)?;
                let g = rows.push("coherent_norm", 0, 0, c.computed, c.expected);
                out.checks.push(Check::new(
                    "||phi_l||^2 = e^(|l|^2) within 1e-8",
                    g <= 1e-8,
                    format!("{g:.2e}"),
                ));
            }
        }
        SpaceKind::ThetaFockBargmann { nu, alpha } => {
            let (nu, alpha) = (nu.to_f64(), alpha.to_f64());
            let v = basis_eval_theta(0, alpha, nu, Complex64::new(0.0, 0.0))?;
            let want = (2.0 * nu / std::f64::consts::PI).powf(0.25)
                * (-std::f64::consts::PI.powi(2) * alpha * alpha / nu).exp();
            let g = rows.push("theta_origin", 0, 0, v.re, want);
            out.checks.push(Check::new(
                "e_0(0) closed form",
                g <= 1e-14 * want,
                format!("{g:.2e}"),
            ));
            let zs: Vec<_> = (0..5)
                .map(|k| Complex64::new(0.13 * k as f64 - 0.2, 0.07 * k as f64 - 0.1))
                .collect();
            let mut worst: f64 = 0.0;
            for n in 0..=n_max.unwrap_or(5) {
                let c = theta_multiplication_check(n, alpha, nu, &zs)?;
                worst = worst.max(rows.push("multiplication", n, n + 1, c.max_rel_residual, 0.0));
            }
            out.checks.push(Check::new(
                "e^(2 pi i z) e_n = K_n e_(n+1) to 1e-10",
                worst <= 1e-10,
                format!("{worst:.2e}"),
            ));
            out.put(
                "note",
                "strip inner products are not implemented for theta spaces",
            );
        }
    }
    let QRows(rows) = rows;
    out.trace("quadrature.csv", |b| {
        let mut w = csv::Writer::from_writer(b);
        w.write_record(["check", "n", "m", "value", "expected", "error"])?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    })
}

/// The resolved scenario as embedded in every output directory.
pub fn resolved(sc: &Scenario) -> Result<Value> {
    let prec = sc.precision()?;
    Ok(json!({
        "schema_version": SCHEMA_VERSION,
        "artifact_version": ARTIFACT_VERSION,
        "precision": {"digits": prec.digits(), "bits": prec.bits()},
        "scenario": sc,
    }))
}

/// Write certificates, traces, `summary.json` and `scenario.json`; timing goes to `run_info.json`.
pub fn write_outcome(sc: &Scenario, out: &Outcome, dir: &Path, elapsed: f64) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let pretty = |v: &Value| serde_json::to_string_pretty(v).expect("json") + "\n";
    std::fs::write(dir.join("scenario.json"), pretty(&resolved(sc)?))?;
    for (name, c) in &out.certificates {
        std::fs::write(dir.join(format!("{name}.cert.json")), c.to_json() + "\n")?;
    }
    for (name, bytes) in &out.traces {
        std::fs::write(dir.join(name), bytes)?;
    }
    let summary = json!({
        "schema_version": SCHEMA_VERSION,
        "artifact_version": ARTIFACT_VERSION,
        "scenario": sc.label(),
        "task": sc.task.name(),
        "verdict": out.verdict(),
        "checks": out.checks,
        "certificates": out.certificates.iter().map(|(n, c)| json!({"file": format!("{n}.cert.json"), "hypothesis": c.hypothesis, "verdict": c.verdict})).collect::<Vec<_>>(),
        "results": out.summary,
    });
    std::fs::write(dir.join("summary.json"), pretty(&summary))?;
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    std::fs::write(
        dir.join("run_info.json"),
        pretty(&json!({"finished_unix": stamp, "elapsed_seconds": elapsed})),
    )?;
    Ok(())
}
