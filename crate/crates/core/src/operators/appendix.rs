//! Periodic points of `H_p`, the block telescoping identities, approximation
//! of finitely supported vectors by periodic points, and the right inverse `S`.

use std::collections::BTreeMap;

use rug::{Complex, Float};

use super::VectorState;
use crate::error::{Error, Result};
use crate::weights::{Radical, WeightSequence};

/// Sparse vector with exact coefficients, keyed by natural basis index.
pub type ExactVector = BTreeMap<u64, Radical>;

/// `H_p` on an exact vector: `P_n ↦ ω_{n-1,p} P_{n-1}` for `n > p`, `P_p ↦ 0`.
fn hp_exact(seq: &WeightSequence, v: &ExactVector) -> Result<ExactVector> {
    let p = seq.p() as u64;
    let mut out = ExactVector::new();
    for (&n, c) in v {
        if n <= p {
            continue;
        }
        let w = seq
            .exact_form(n - 1)
            .ok_or_else(|| Error::Precondition(format!("{} has no exact weights", seq.label())))?;
        let x = c * &w;
        if !x.is_zero() {
            out.insert(n - 1, x);
        }
    }
    Ok(out)
}

/// `∏_{j=lo}^{hi-1} 1/ω_{j,p}` exactly.
fn exact_block(seq: &WeightSequence, lo: u64, hi: u64) -> Result<Radical> {
    let mut prod = Radical::rational(1);
    for j in lo..hi {
        let w = seq
            .exact_form(j)
            .ok_or_else(|| Error::Precondition(format!("{} has no exact weights", seq.label())))?;
        prod = prod * w;
    }
    prod.recip()
        .ok_or_else(|| Error::Precondition("zero weight in block product".into()))
}

fn check_block_args(seq: &WeightSequence, s: u64, period: u64) -> Result<()> {
    let p = seq.p() as u64;
    if s < p {
        return Err(Error::InvalidParameter(format!("s = {s} is below p = {p}")));
    }
    // H_p^N P_s = 0 needs N > s - p.
    if period == 0 || period + p <= s {
        return Err(Error::InvalidParameter(format!(
            "period N = {period} must exceed s - p = {}",
            s - p
        )));
    }
    Ok(())
}

/// Coefficient of `P_{kN+s}` in `φ_{s,N}`: `∏_{j=s}^{kN+s-1} 1/ω_{j,p}`, exactly.
pub fn periodic_point_hp_exact(
    seq: &WeightSequence,
    s: u64,
    period: u64,
    n_trunc: u64,
) -> Result<ExactVector> {
    check_block_args(seq, s, period)?;
    let mut v = ExactVector::new();
    v.insert(s, Radical::rational(1));
    let mut k = 1;
    while k * period + s <= n_trunc {
        v.insert(k * period + s, exact_block(seq, s, k * period + s)?);
        k += 1;
    }
    Ok(v)
}

/// `φ_{s,N}` truncated at `n_trunc`, with its periodicity check.
#[derive(Clone, Debug)]
pub struct PeriodicHp {
    pub s: u64,
    pub period: u64,
    pub n_trunc: u64,
    /// Coefficients over `P_p..P_{n_trunc}`.
    pub state: VectorState,
    /// Natural indices `[p, n_trunc - N]` where `H_p^N φ` is unaffected by the truncation.
    pub window: [u64; 2],
    /// `max |(H_p^N φ - φ)_n|` over the window, in floating point.
    pub residual: Float,
    /// Exact periodicity on the window, for weights with exact forms.
    pub exact_periodic: Option<bool>,
}

/// Build `φ_{s,N} = P_s + Σ_k (∏_{j=s}^{kN+s-1} 1/ω_{j,p}) P_{kN+s}` and check `H_p^N φ = φ`.
pub fn periodic_point_hp(
    seq: &WeightSequence,
    s: u64,
    period: u64,
    n_trunc: u64,
) -> Result<PeriodicHp> {
    check_block_args(seq, s, period)?;
    if s + 3 * period > n_trunc {
        return Err(Error::Dimension(format!(
            "truncation {n_trunc} holds fewer than three blocks (need s + 3N = {})",
            s + 3 * period
        )));
    }
    let p = seq.p() as u64;
    let g = seq.precision().guarded();
    let w = seq.tabulate(p, n_trunc, g)?;
    let dim = (n_trunc - p + 1) as usize;
    let mut coeffs = vec![Complex::with_val(g, 0); dim];
    coeffs[(s - p) as usize] = Complex::with_val(g, 1);
    let mut c = Float::with_val(g, 1);
    let mut blocks = vec![c.clone()];
    for n in s..n_trunc {
        c /= &w[(n - p) as usize];
        if (n + 1 - s).is_multiple_of(period) {
            coeffs[(n + 1 - p) as usize] = Complex::with_val(g, &c);
            blocks.push(c.clone());
        }
    }
    // Later block ratios are smaller, so the last ratio bounds a geometric tail.
    let kk = blocks.len() - 1;
    let r = Float::with_val(g, &blocks[kk] / &blocks[kk - 1]);
    let r2 = Float::with_val(g, r.square_ref());
    let tail = (r2 < 1)
        .then(|| Float::with_val(g, blocks[kk].square_ref()) * &r2 / (Float::with_val(g, 1) - &r2));

    let mut cur = coeffs.clone();
    for _ in 0..period {
        let mut next = vec![Complex::with_val(g, 0); dim];
        for i in 0..dim - 1 {
            next[i] = Complex::with_val(g, &cur[i + 1] * &w[i]);
        }
        cur = next;
    }
    let hi = n_trunc - period;
    let mut residual = Float::with_val(g, 0);
    for i in 0..=(hi - p) as usize {
        let d = Float::with_val(g, Complex::with_val(g, &cur[i] - &coeffs[i]).abs_ref());
        if d > residual {
            residual = d;
        }
    }
    let exact_periodic = if seq.has_exact_form() {
        let v = periodic_point_hp_exact(seq, s, period, n_trunc)?;
        let mut img = v.clone();
        for _ in 0..period {
            img = hp_exact(seq, &img)?;
        }
        let on_window = |m: &ExactVector| -> ExactVector {
            m.range(p..=hi).map(|(k, c)| (*k, c.clone())).collect()
        };
        Some(on_window(&img) == on_window(&v))
    } else {
        None
    };
    let state = VectorState {
        offset: p as i64,
        coeffs,
        tail_bound: tail,
        finitely_supported: false,
    };
    Ok(PeriodicHp {
        s,
        period,
        n_trunc,
        state,
        window: [p, hi],
        residual,
        exact_periodic,
    })
}

/// `H_p^N (c_k P_{kN+s}) = c_{k-1} P_{(k-1)N+s}` for `k = 1..=k_max`.
#[derive(Clone, Debug)]
pub struct BlockIdentity {
    pub s: u64,
    pub period: u64,
    /// `(k, holds)` per block.
    pub checks: Vec<(u64, bool)>,
    /// Checked in exact radical arithmetic (otherwise to the working precision).
    pub exact: bool,
    /// Largest relative discrepancy in the floating-point path; zero when exact.
    pub max_rel_error: f64,
    pub holds: bool,
}

/// Verify the block telescoping identity. `s = p` gives the normalized form.
pub fn block_identity(
    seq: &WeightSequence,
    s: u64,
    period: u64,
    k_max: u64,
) -> Result<BlockIdentity> {
    check_block_args(seq, s, period)?;
    let mut checks = Vec::new();
    let mut max_rel = 0.0f64;
    let exact = seq.has_exact_form();
    if exact {
        let mut prev = Radical::rational(1);
        for k in 1..=k_max {
            let ck = exact_block(seq, s, k * period + s)?;
            let mut v = ExactVector::from([(k * period + s, ck.clone())]);
            for _ in 0..period {
                v = hp_exact(seq, &v)?;
            }
            let expect = ExactVector::from([((k - 1) * period + s, prev)]);
            checks.push((k, v == expect));
            prev = ck;
        }
    } else {
        let p = seq.p() as u64;
        let bits = seq.precision().bits();
        let g = seq.precision().guarded();
        let w = seq.tabulate(p, k_max * period + s, g)?;
        let block = |k: u64| -> Float {
            let mut c = Float::with_val(g, 1);
            for j in s..k * period + s {
                c /= &w[(j - p) as usize];
            }
            c
        };
        let tol = crate::precision::Precision::from_bits(bits)?.epsilon() * 16u32;
        for k in 1..=k_max {
            let mut x = block(k);
            for j in ((k - 1) * period + s..k * period + s).rev() {
                x *= &w[(j - p) as usize];
            }
            let e = block(k - 1);
            let rel = Float::with_val(g, (x - &e) / &e).abs();
            max_rel = max_rel.max(rel.to_f64());
            checks.push((k, rel <= tol));
        }
    }
    let holds = checks.iter().all(|c| c.1);
    Ok(BlockIdentity {
        s,
        period,
        checks,
        exact,
        max_rel_error: max_rel,
        holds,
    })
}

/// Result of approximating a finitely supported vector by a periodic point.
#[derive(Clone, Debug)]
pub struct ApproximationReport {
    /// `ψ = Σ_s a_s φ_{s,N}` over `P_p..` up to the last block kept.
    pub psi: VectorState,
    pub n_used: u64,
    /// Upper bound on `‖φ - ψ‖`.
    pub error_bound: Float,
    pub epsilon: f64,
    /// `(s, |a_s ∏_{j=p}^{s-1} ω_{j,p}|)`.
    pub smallness: Vec<(u64, f64)>,
    /// `(N, bound)` for each period tried.
    pub trace: Vec<(u64, f64)>,
}

/// Smallest admissible `N` with `‖φ - Σ_s a_s φ_{s,N}‖ <= ε`.
///
/// Admissible means `N >= M` and `N > M - p`, so that every `φ_{s,N}` is
/// periodic and the blocks of distinct `s` do not overlap. The smallness
/// condition is enforced as `|a_s ∏ ω| <= 1`.
pub fn approximate_by_periodic(
    seq: &WeightSequence,
    phi: &VectorState,
    epsilon: f64,
    n_max: u64,
) -> Result<ApproximationReport> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let p = seq.p() as u64;
    let g = seq.precision().guarded();
    let support: Vec<(u64, Complex)> = phi
        .coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| (phi.offset + i as i64, c.clone()))
        .map(|(n, c)| {
            if n < p as i64 {
                Err(Error::Precondition(format!(
                    "coefficient at index {n} below p = {p}"
                )))
            } else {
                Ok((n as u64, c))
            }
        })
        .collect::<Result<_>>()?;
    let Some(m) = support.last().map(|x| x.0) else {
        return Err(Error::Precondition("vector to approximate is zero".into()));
    };
    let mut wt = seq.tabulate(p, m.max(p), g)?;
    let mut smallness = Vec::new();
    let mut bad = Vec::new();
    for (s, a) in &support {
        let mut x = Float::with_val(g, a.abs_ref());
        for j in p..*s {
            x *= &wt[(j - p) as usize];
        }
        if x > 1 {
            bad.push(*s);
        }
        smallness.push((*s, x.to_f64()));
    }
    if !bad.is_empty() {
        return Err(Error::Precondition(format!(
            "smallness condition |a_s prod w| <= 1 fails at s = {bad:?}"
        )));
    }

    let n_min = m.max(m + 1 - p).max(1);
    let mut trace = Vec::new();
    let small = Float::with_val(g, epsilon * epsilon * 1e-6);
    for n in n_min..=n_max.max(n_min) {
        let mut err = Float::with_val(g, 0);
        let mut blocks: Vec<Vec<Float>> = Vec::new();
        for (s, a) in &support {
            let a2 = Float::with_val(g, a.norm_ref());
            let mut cs = Vec::new();
            let mut c = Float::with_val(g, 1);
            let mut prev = Float::with_val(g, 1);
            let mut sum = Float::with_val(g, 0);
            let mut j = *s;
            let tail = loop {
                let hi = j + n;
                if (wt.len() as u64) < hi - p + 1 {
                    let more = seq.tabulate(
                        p + wt.len() as u64,
                        (hi + 4 * n).max(2 * (p + wt.len() as u64)),
                        g,
                    )?;
                    wt.extend(more);
                }
                for i in j..hi {
                    c /= &wt[(i - p) as usize];
                }
                j = hi;
                sum += Float::with_val(g, c.square_ref());
                cs.push(c.clone());
                let r = Float::with_val(g, &c / &prev);
                prev = c.clone();
                let r2 = Float::with_val(g, r.square_ref());
                if r2 < 1 {
                    let t =
                        Float::with_val(g, c.square_ref()) * &r2 / (Float::with_val(g, 1) - &r2);
                    if Float::with_val(g, &t * &a2) <= small || cs.len() >= 64 {
                        break t;
                    }
                } else if cs.len() >= 64 {
                    break Float::with_val(g, f64::INFINITY);
                }
            };
            err += a2 * (sum + tail);
            blocks.push(cs);
        }
        let bound = err.sqrt();
        trace.push((n, bound.to_f64()));
        if bound.to_f64() <= epsilon {
            let kmax = blocks.iter().map(|b| b.len()).max().unwrap_or(0).min(3) as u64;
            let dim = (m + kmax * n - p + 1) as usize;
            let mut coeffs = vec![Complex::with_val(g, 0); dim];
            let mut tail = Float::with_val(g, 0);
            for ((s, a), cs) in support.iter().zip(&blocks) {
                coeffs[(s - p) as usize] = a.clone();
                for (k, c) in cs.iter().enumerate() {
                    let idx = s + (k as u64 + 1) * n - p;
                    let v = Complex::with_val(g, a * c);
                    if (idx as usize) < dim {
                        coeffs[idx as usize] = v;
                    } else {
                        tail += Float::with_val(g, v.norm_ref());
                    }
                }
            }
            let psi = VectorState {
                offset: p as i64,
                coeffs,
                tail_bound: Some(tail),
                finitely_supported: false,
            };
            return Ok(ApproximationReport {
                psi,
                n_used: n,
                error_bound: bound,
                epsilon,
                smallness,
                trace,
            });
        }
    }
    Err(Error::NotConvergent(format!(
        "no period up to {n_max} reaches epsilon = {epsilon}"
    )))
}

/// `‖S^n P_k‖` for `n = 0..=n_steps`, where `S P_j = P_{j+1}/ω_{j,p}`.
#[derive(Clone, Debug)]
pub struct SDecay {
    pub k: u64,
    pub norms: Vec<Float>,
    /// First step after which the trace decreases strictly.
    pub strictly_decreasing_from: Option<usize>,
    /// `H_p S P_j = P_j` for `j = k..=k+20`: exact for radical weights,
    /// otherwise within a few ulps.
    pub right_inverse: bool,
    pub right_inverse_exact: bool,
    /// First differences of `ln ‖S^n P_k‖`, i.e. `-ln ω_{k+n,p}`.
    pub log_steps: Vec<f64>,
    /// Second differences of `ln ‖S^n P_k‖`.
    pub log_curvature: Vec<f64>,
}

impl SDecay {
    /// First `n` with `‖S^n P_k‖ < threshold`.
    pub fn below(&self, threshold: f64) -> Option<usize> {
        self.norms.iter().position(|x| *x < threshold)
    }
}

pub fn s_operator_decay(seq: &WeightSequence, k: u64, n_steps: usize) -> Result<SDecay> {
    let p = seq.p() as u64;
    if k < p {
        return Err(Error::InvalidParameter(format!(
            "start index {k} below p = {p}"
        )));
    }
    let g = seq.precision().guarded();
    let hi = k + (n_steps as u64).max(21);
    let w = seq.tabulate(k, hi, g)?;
    let mut norms = vec![Float::with_val(g, 1)];
    for i in 0..n_steps {
        let next = Float::with_val(g, &norms[i] / &w[i]);
        norms.push(next);
    }
    let strictly_decreasing_from = (0..=n_steps)
        .rev()
        .take_while(|&i| i == 0 || norms[i] < norms[i - 1])
        .last()
        .map(|i| i.saturating_sub(1))
        .filter(|_| n_steps > 0);

    let right_inverse_exact = seq.has_exact_form();
    let right_inverse = if right_inverse_exact {
        (k..=k + 20).all(|j| {
            let w = seq.exact_form(j).unwrap();
            w.recip().is_some_and(|r| &w * &r == Radical::rational(1))
        })
    } else {
        let bits = seq.precision().bits();
        let eps = Float::with_val(64, 1) >> (bits as i32 - 3);
        (0..=20usize).all(|i| {
            let s = Float::with_val(bits, 1) / &w[i];
            let back = Float::with_val(bits, &s * &w[i]) - 1u32;
            back.abs() <= eps
        })
    };
    let logs: Vec<f64> = w[..n_steps]
        .iter()
        .map(|x| -Float::with_val(g, x.ln_ref()).to_f64())
        .collect();
    let log_curvature = logs.windows(2).map(|d| d[1] - d[0]).collect();
    Ok(SDecay {
        k,
        norms,
        strictly_decreasing_from,
        right_inverse,
        right_inverse_exact,
        log_steps: logs,
        log_curvature,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::Precision;
    use crate::weights::{make_weights, SpaceSpec};

    fn disk(nu: &str, p: u32) -> WeightSequence {
        make_weights(&SpaceSpec::disk(nu, p).unwrap(), Precision::default()).unwrap()
    }

    #[test]
    fn block_identities_exact_on_disk() {
        for nu in ["1", "3/2"] {
            for p in [0, 1] {
                let seq = disk(nu, p);
                for n in 1..=4u64 {
                    for s in p as u64..p as u64 + n {
                        let b = block_identity(&seq, s, n, 3).unwrap();
                        assert!(b.exact && b.holds, "nu={nu} p={p} s={s} N={n}");
                    }
                }
            }
        }
    }

    #[test]
    fn periodic_point_support_and_first_block() {
        let seq = disk("3/2", 0);
        let r = periodic_point_hp(&seq, 1, 3, 13).unwrap();
        assert_eq!(r.exact_periodic, Some(true));
        assert!(r.residual < 1e-40);
        for (i, c) in r.state.coeffs.iter().enumerate() {
            if !c.is_zero() {
                assert_eq!(i % 3, 1);
            }
        }
        // 1/(ω_1 ω_2 ω_3), ω_n = sqrt((n+1)(n+3))
        let expect = 1.0 / (8f64 * 15.0 * 24.0).sqrt();
        assert!((r.state.coeffs[4].real().to_f64() / expect - 1.0).abs() < 1e-15);
    }

    #[test]
    fn periodic_point_needs_three_blocks_and_admissible_period() {
        let seq = disk("1", 0);
        assert!(matches!(
            periodic_point_hp(&seq, 0, 3, 8),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            periodic_point_hp(&seq, 2, 2, 20),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn theta_periodicity_to_working_precision() {
        let seq = make_weights(
            &SpaceSpec::theta("2*pi", "0", 0).unwrap(),
            Precision::default(),
        )
        .unwrap();
        let r = periodic_point_hp(&seq, 0, 2, 12).unwrap();
        assert!(r.exact_periodic.is_none());
        let scale = r
            .state
            .coeffs
            .iter()
            .map(|c| Float::with_val(64, c.abs_ref()).to_f64())
            .fold(0.0, f64::max);
        assert!(r.residual.to_f64() <= 1e-25 * scale);
        let b = block_identity(&seq, 0, 2, 3).unwrap();
        assert!(!b.exact && b.holds);
    }

    #[test]
    fn approximation_of_first_basis_vectors() {
        let seq = disk("3/2", 0);
        let mut c = vec![Complex::with_val(64, 0); 4];
        c[0] = Complex::with_val(64, 1);
        c[1] = Complex::with_val(64, 0.1);
        let phi = VectorState::finite(0, c);
        for eps in [1e-2, 1e-4] {
            let r = approximate_by_periodic(&seq, &phi, eps, 200).unwrap();
            assert!(r.error_bound <= eps);
            assert!(r.n_used >= 2);
        }
    }

    #[test]
    fn approximation_rejects_large_coefficients() {
        let seq = disk("3/2", 0);
        let phi = VectorState::finite(0, vec![Complex::with_val(64, 0), Complex::with_val(64, 1)]);
        match approximate_by_periodic(&seq, &phi, 0.1, 50) {
            Err(Error::Precondition(m)) => assert!(m.contains("[1]")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn s_decay_classic_factorial() {
        let seq = make_weights(&SpaceSpec::classic(0), Precision::default()).unwrap();
        let d = s_operator_decay(&seq, 0, 10).unwrap();
        let x = d.norms[10].to_f64();
        assert!((x - 1.0 / 3628800f64.sqrt()).abs() < 1e-18);
        assert!(d.right_inverse && d.right_inverse_exact);
        // ω_0 = 1, so the first step is flat
        assert_eq!(d.strictly_decreasing_from, Some(1));
    }

    #[test]
    fn s_decay_theta_log_curvature() {
        let seq = make_weights(
            &SpaceSpec::theta("2*pi", "0", 0).unwrap(),
            Precision::default(),
        )
        .unwrap();
        let d = s_operator_decay(&seq, 0, 12).unwrap();
        assert!(d.right_inverse && !d.right_inverse_exact);
        for c in &d.log_curvature {
            assert!((c + 1.0).abs() < 1e-12, "{c}");
        }
    }
}
