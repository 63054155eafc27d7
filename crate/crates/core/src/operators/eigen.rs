//! Eigenvectors of `H_p` and `H_p + H_p*`, and periodic points of the latter.

use rug::{Complex, Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use super::{build_operator, norm_sq, OperatorKind, VectorState};
use crate::error::{Error, Result};
use crate::precision::Precision;
use crate::recurrence::{
    certify_l2, polar_lambda, solve_recurrence, GammaChoice, JacobiWeights, L2Report,
    RecurrenceSolution,
};
use crate::weights::{AsymptoticClass, WeightSequence};

fn cabs(z: &Complex) -> Float {
    Float::with_val(z.prec().0.max(64), z.abs_ref())
}

/// `φ_λ = Σ_k a_k P_k` with `a_p = 1`, `a_{k+1} = a_k λ/ω_{k,p}`.
#[derive(Clone, Debug)]
pub struct EigenHp {
    pub state: VectorState,
    /// `max |(H_p φ - λ φ)_i|` over coordinates below the last, in ulps of `|λ a_i|`.
    pub interior_ulps: f64,
    /// `(H_p φ - λ φ)` at the last coordinate, `-λ a_last` (the dropped `ω a_{N}` term).
    pub last_residual: Complex,
}

/// Truncated eigenvector of `H_p` with a geometric tail bound.
pub fn eigenvector_hp(seq: &WeightSequence, lambda: &Complex, dim: usize) -> Result<EigenHp> {
    let p = seq.p() as u64;
    if dim < (p as usize + 2).max(2) {
        return Err(Error::Dimension(format!(
            "eigenvector needs N >= p + 2, got {dim}"
        )));
    }
    let growing = match seq.asymptotic_class() {
        AsymptoticClass::Power { exponent, .. } => exponent > 0.0,
        AsymptoticClass::Exponential { rate, .. } => rate > 0.0,
    };
    if !growing {
        return Err(Error::NotConvergent(
            "weights do not grow; the eigenvector product diverges".into(),
        ));
    }
    let prec = seq.precision();
    let g = prec.guarded();
    let w = seq.tabulate(p, p + dim as u64 - 1, g)?;
    let lam = Complex::with_val(g, lambda);
    let mut a = Vec::with_capacity(dim);
    a.push(Complex::with_val(g, 1));
    for i in 1..dim {
        let next = Complex::with_val(g, &a[i - 1] * &lam) / &w[i - 1];
        a.push(next);
    }
    // Ratios |λ|/ω are non-increasing past the truncation.
    let r = Float::with_val(g, cabs(&lam) / &w[dim - 1]);
    let tail_bound = (r < 1).then(|| {
        let r2 = Float::with_val(g, r.square_ref());
        let last = Float::with_val(g, a[dim - 1].norm_ref());
        last * &r2 / (Float::with_val(g, 1) - r2)
    });
    let state = VectorState {
        offset: p as i64,
        coeffs: a,
        tail_bound,
        finitely_supported: false,
    };

    let op = build_operator(
        OperatorKind::BackwardShift,
        &JacobiWeights::from_sequence(seq),
        dim,
    )?;
    let hv = op.apply_bits(&state.coeffs, g)?;
    let bits = prec.bits();
    let mut worst: f64 = 0.0;
    for i in 0..dim - 1 {
        let lv = Complex::with_val(g, &state.coeffs[i] * &lam);
        let d = Complex::with_val(bits, &hv[i] - &lv);
        let scale = cabs(&lv).max(&Float::with_val(64, f64::MIN_POSITIVE));
        let ulp = crate::precision::ulp_of(&scale, bits);
        worst = worst.max((cabs(&d) / ulp).to_f64());
    }
    let last = Complex::with_val(
        g,
        &hv[dim - 1] - Complex::with_val(g, &state.coeffs[dim - 1] * &lam),
    );
    Ok(EigenHp {
        state,
        interior_ulps: worst,
        last_residual: last,
    })
}

/// Truncated eigenvector of `H_p + H_p*` from the recurrence solution.
#[derive(Clone, Debug)]
pub struct EigenSum {
    pub state: VectorState,
    pub solution: RecurrenceSolution,
    /// Interior residual of `(J - λ)u` in ulps of `1 + |λ u_n|`.
    pub interior_ulps: f64,
    /// `(J u - λ u)` at the last coordinate as computed.
    pub last_residual: Complex,
    /// `-w_N u_{N+1}`, the predicted last-coordinate residual.
    pub predicted_last: Complex,
}

impl EigenSum {
    /// `|last_residual| / w_N = |u_{N+1}|`, the residual with the coupling weight removed.
    pub fn normalized_last(&self) -> Float {
        let w = self.solution.weights.last().unwrap();
        cabs(&self.last_residual) / w
    }
}

pub fn eigenvector_sum(weights: &JacobiWeights, lambda: &Complex, dim: usize) -> Result<EigenSum> {
    let sol = solve_recurrence(weights, lambda, dim)?;
    let op = build_operator(OperatorKind::JacobiSum, weights, dim)?;
    let bits = sol.internal_bits;
    // Operator entries at the solution's precision.
    let mut op = op;
    op.band = sol.weights[..dim - 1].to_vec();
    let wide = 2 * bits + 8;
    let jv = op.apply_bits(&sol.u, wide)?;
    let lam = &sol.lambda;
    let ulp = Float::with_val(64, 1) >> sol.precision.bits() as i32;
    let mut worst: f64 = 0.0;
    for i in 0..dim - 1 {
        let lu = Complex::with_val(wide, &sol.u[i] * lam);
        let r = Complex::with_val(wide, &jv[i] - &lu);
        let s = cabs(&lu) + 1u32;
        worst = worst.max((cabs(&r) / (s * &ulp)).to_f64());
    }
    let last = Complex::with_val(
        wide,
        &jv[dim - 1] - Complex::with_val(wide, &sol.u[dim - 1] * lam),
    );
    let predicted = -Complex::with_val(wide, &sol.u_next * &sol.weights[dim - 1]);
    let state = VectorState {
        offset: weights.index_offset() + 1,
        coeffs: sol.u.clone(),
        tail_bound: None,
        finitely_supported: false,
    };
    Ok(EigenSum {
        state,
        solution: sol,
        interior_ulps: worst,
        last_residual: last,
        predicted_last: predicted,
    })
}

/// `δ = e^{2πi n/k}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rotation {
    pub n: i64,
    pub k: u64,
}

impl Rotation {
    pub fn value(&self, bits: u32) -> Complex {
        polar_lambda(
            &Float::with_val(bits, 1),
            &Rational::from((self.n, self.k)),
            bits,
        )
    }
}

/// A periodic point `φ = Σ a_m φ_{δ_m}` of `H_p + H_p*` and its check.
#[derive(Clone, Debug)]
pub struct PeriodicSum {
    pub state: VectorState,
    /// `Π k_m`, the period used.
    pub period: u64,
    /// Least common multiple of the `k_m`.
    pub lcm: u64,
    /// Coordinates `0..window` are unaffected by the truncation after `period` steps.
    pub window: usize,
    /// `‖J^l φ - φ‖` over the trusted window.
    pub residual: Float,
    /// `‖J^l φ - φ‖` over all coordinates, dominated by the truncation edge.
    pub full_residual: Float,
    /// `Σ |a_m| sqrt(tail_m)`, a bound on the norm of the discarded coefficients.
    pub tail_norm_bound: Option<Float>,
    pub certificates: Vec<L2Report>,
    pub tolerance: Float,
    pub passed: bool,
    pub working_bits: u32,
}

/// Build `Σ a_m φ_{δ_m}` in dimension `dim` and verify `(H_p + H_p*)^l φ = φ`.
///
/// The tolerance is the certified tail-norm bound capped at `1e-8`; without
/// a certificate it is `1e-8`.
pub fn periodic_point_sum(
    weights: &JacobiWeights,
    roots: &[Rotation],
    amplitudes: &[Complex],
    dim: usize,
    gamma: Option<&GammaChoice>,
) -> Result<PeriodicSum> {
    if roots.is_empty() || roots.len() != amplitudes.len() {
        return Err(Error::InvalidParameter(
            "need one amplitude per root".into(),
        ));
    }
    if let Some(r) = roots.iter().find(|r| r.k == 0) {
        return Err(Error::InvalidParameter(format!(
            "root {}/{} has k = 0",
            r.n, r.k
        )));
    }
    let period: u64 = roots.iter().map(|r| r.k).product();
    let lcm = roots
        .iter()
        .fold(Integer::from(1), |acc, r| acc.lcm(&Integer::from(r.k)))
        .to_u64()
        .unwrap();
    if period as usize >= dim {
        return Err(Error::Dimension(format!(
            "period {period} leaves no trusted window in dimension {dim}"
        )));
    }
    // Applying J l times amplifies rounding by up to (2 max w)^l.
    let base_bits = weights.precision().bits();
    let wmax = weights
        .w(dim - 1, 64)?
        .to_f64()
        .max(weights.w(1, 64)?.to_f64());
    let boost = (period as f64 * (2.0 * wmax).log2().max(1.0)).ceil() as u32 + 64;
    let prec = Precision::from_bits(base_bits + boost)?;
    let wide = weights.with_precision(prec);
    let bits = prec.bits();

    let mut phi = vec![Complex::with_val(2 * bits, 0); dim];
    let mut certificates = Vec::new();
    let mut tail: Option<Float> = Some(Float::with_val(64, 0));
    for (r, a) in roots.iter().zip(amplitudes) {
        let delta = r.value(bits + 32);
        let sol = solve_recurrence(&wide, &delta, dim)?;
        for (x, u) in phi.iter_mut().zip(&sol.u) {
            *x += Complex::with_val(2 * bits, u * a);
        }
        let g = gamma.cloned().unwrap_or(GammaChoice::SqrtNLogN);
        let rep = certify_l2(&sol, weights, &g)?;
        tail = match (tail, rep.tail_norm()) {
            (Some(t), Some(tn)) => Some(t + Float::with_val(64, cabs(a) * tn)),
            _ => None,
        };
        certificates.push(rep);
    }
    let mut op = build_operator(OperatorKind::JacobiSum, &wide, dim)?;
    op.band = wide.tabulate(dim - 1, 2 * bits)?;
    let mut cur = phi.clone();
    for _ in 0..period {
        cur = op.apply_bits(&cur, 2 * bits)?;
    }
    let window = dim - period as usize;
    let diff: Vec<Complex> = cur
        .iter()
        .zip(&phi)
        .map(|(a, b)| Complex::with_val(2 * bits, a - b))
        .collect();
    let residual = norm_sq(&diff[..window]).sqrt();
    let full_residual = norm_sq(&diff).sqrt();
    let cap = Float::with_val(64, 1e-8);
    let tolerance = match &tail {
        Some(t) if *t < cap => t.clone(),
        _ => cap,
    };
    let passed = residual <= tolerance;
    let state = VectorState {
        offset: weights.index_offset() + 1,
        coeffs: phi,
        tail_bound: tail.as_ref().map(|t| Float::with_val(64, t.square_ref())),
        finitely_supported: false,
    };
    Ok(PeriodicSum {
        state,
        period,
        lcm,
        window,
        residual: Float::with_val(64, residual),
        full_residual: Float::with_val(64, full_residual),
        tail_norm_bound: tail,
        certificates,
        tolerance,
        passed,
        working_bits: bits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{make_weights, SpaceSpec};

    fn prec() -> Precision {
        Precision::default()
    }

    #[test]
    fn zero_eigenvalue_gives_first_basis_vector() {
        let s = make_weights(&SpaceSpec::classic(1), prec()).unwrap();
        let e = eigenvector_hp(&s, &Complex::with_val(64, 0), 6).unwrap();
        assert_eq!(e.state.offset, 1);
        assert_eq!(e.state.coeffs[0], 1);
        assert!(e.state.coeffs[1..].iter().all(|z| z.is_zero()));
    }

    #[test]
    fn disk_eigenvector_coefficients() {
        let s = make_weights(&SpaceSpec::disk("1", 0).unwrap(), prec()).unwrap();
        let e = eigenvector_hp(&s, &Complex::with_val(64, 1), 20).unwrap();
        assert!((e.state.coeffs[1].real().to_f64() - 0.5f64.sqrt()).abs() < 1e-16);
        // a_k = Π_{j<k} 1/sqrt((j+1)(j+2)) = 1/sqrt(k! (k+1)!)
        let k = 6u32;
        let f = |n: u32| (1..=n).map(|i| i as f64).product::<f64>();
        let expect = 1.0 / (f(k) * f(k + 1)).sqrt();
        assert!((e.state.coeffs[k as usize].real().to_f64() / expect - 1.0).abs() < 1e-14);
        assert!(e.interior_ulps <= 1.0);
        assert!(e.state.tail_bound.is_some());
    }

    #[test]
    fn constant_weights_eigen_sum_last_residual() {
        let ones = JacobiWeights::constant(Float::with_val(64, 1), prec()).unwrap();
        let e = eigenvector_sum(&ones, &Complex::with_val(64, 0), 5).unwrap();
        let u: Vec<i32> = e
            .state
            .coeffs
            .iter()
            .map(|z| z.real().to_f64() as i32)
            .collect();
        assert_eq!(u, vec![1, 0, -1, 0, 1]);
        // u_6 = 0
        assert!(e.last_residual.is_zero() && e.predicted_last.is_zero());
    }

    #[test]
    fn imaginary_eigenvalue_structure() {
        let w =
            JacobiWeights::from_sequence(&make_weights(&SpaceSpec::classic(1), prec()).unwrap());
        let e = eigenvector_sum(&w, &Complex::with_val(64, (0, 1)), 30).unwrap();
        for (i, u) in e.state.coeffs.iter().enumerate() {
            // u_n(i) = i^{n-1} × real
            let z = match i % 4 {
                0 => u.imag().clone(),
                1 => u.real().clone(),
                2 => u.imag().clone(),
                _ => u.real().clone(),
            };
            assert!(z.is_zero(), "n={}", i + 1);
        }
        assert!(e.interior_ulps <= 10.0);
        let d = Complex::with_val(64, &e.last_residual - &e.predicted_last);
        assert!(cabs(&d) <= cabs(&e.predicted_last) * 1e-40f64);
    }

    fn classic_jw(p: u32) -> JacobiWeights {
        JacobiWeights::from_sequence(&make_weights(&SpaceSpec::classic(p), prec()).unwrap())
    }

    #[test]
    fn period_two_point() {
        let w = classic_jw(1);
        let r = periodic_point_sum(
            &w,
            &[Rotation { n: 1, k: 2 }],
            &[Complex::with_val(64, 1)],
            200,
            None,
        )
        .unwrap();
        eprintln!(
            "{} {} {:?} {}",
            r.residual, r.full_residual, r.tail_norm_bound, r.tolerance
        );
        assert_eq!(r.period, 2);
        assert!(r.passed);
    }

    #[test]
    fn period_twelve_point() {
        let w = classic_jw(1);
        let roots = [Rotation { n: 1, k: 3 }, Rotation { n: 1, k: 4 }];
        let amps = [
            Complex::with_val(64, 1),
            Complex::with_val(64, (0.5, -0.25)),
        ];
        let r = periodic_point_sum(&w, &roots, &amps, 200, None).unwrap();
        eprintln!(
            "{} {} {:?} {}",
            r.residual, r.full_residual, r.tail_norm_bound, r.tolerance
        );
        assert_eq!((r.period, r.lcm), (12, 12));
        assert!(r.passed);
    }
}
