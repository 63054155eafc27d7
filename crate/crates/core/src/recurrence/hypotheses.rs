//! Finite-range certification of the chaoticity hypotheses.
//!
//! * Hyp1: `Σ 1/w_n < ∞`, decided by the growth class.
//! * Hyp2: `w_{n-1} w_{n+1} <= w_n²`, decided exactly when weights are radicals.
//! * Hyp3: `w_n γ_n/γ_{n+1} >= n^{1+α}`, the damping bound
//!   `D_n = (|λ|/w_n)(γ_{n+1}/γ_n) + (w_{n-1}/w_n)(γ_{n+1}/γ_{n-1}) <= 1` from a
//!   threshold on, and `Σ 1/γ_n² < ∞`.
//! * Alt311: the strict damping bound together with `Σ 1/γ_n² < ∞`.

use rug::{Float, Rational};
use serde::{Deserialize, Serialize};

use super::certificate::{Certificate, Hypothesis, Scope, Verdict, Witness};
use super::{JacobiWeights, RecurrenceSolution};
use crate::error::{Error, Result};
use crate::param::RealParam;
use crate::precision::fmt_float;
use crate::weights::{AsymptoticClass, SpaceKind};

const DIGITS: usize = 20;

fn fmt(x: &Float) -> String {
    fmt_float(x, DIGITS)
}

fn base_certificate(h: Hypothesis, w: &JacobiWeights, range: [u64; 2]) -> Certificate {
    let mut c = Certificate::new(h, w.label(), range, w.precision().bits());
    c.spec = w.sequence().map(|s| s.spec().clone());
    c.index_offset = w.index_offset();
    c
}

/// Check `Σ 1/w_n < ∞` using partial sums up to `n_max` and the growth class.
///
/// A finite partial sum alone never passes; without a growth class the
/// verdict is inconclusive.
pub fn check_hyp1(
    weights: &JacobiWeights,
    n_max: u64,
    model: Option<AsymptoticClass>,
) -> Result<Certificate> {
    if n_max < 10 {
        return Err(Error::InvalidParameter(format!(
            "n_max must be >= 10, got {n_max}"
        )));
    }
    let bits = weights.precision().bits();
    let mut cert = base_certificate(Hypothesis::Hyp1, weights, [1, n_max]);
    let w = weights.tabulate(n_max as usize, bits)?;
    let mut sum = Float::with_val(bits, 0);
    let mut half = Float::with_val(bits, 0);
    for (i, wi) in w.iter().enumerate() {
        sum += Float::with_val(bits, wi.recip_ref());
        if i + 1 == (n_max / 2) as usize {
            half = sum.clone();
        }
    }
    cert.witnesses
        .push(Witness::new(n_max / 2, fmt(&half), "", "partial sum"));
    cert.witnesses
        .push(Witness::new(n_max, fmt(&sum), "", "partial sum"));
    cert.detail("partial_sum", fmt(&sum));
    let class = model.or_else(|| weights.growth());
    match class {
        None => {
            cert.verdict = Verdict::Inconclusive;
            cert.notes
                .push("no growth class available; a partial sum cannot decide".into());
        }
        Some(class) => {
            cert.detail("growth", class.describe());
            if class.reciprocal_summable() {
                cert.verdict = Verdict::Pass;
                cert.scope = Scope::AllIndices;
                if let AsymptoticClass::Power { exponent, constant } = class {
                    // Σ_{n>N} 1/(C n^e) ≈ N^{1-e} / (C (e-1))
                    let n = n_max as f64;
                    let tail = n.powf(1.0 - exponent) / (constant * (exponent - 1.0));
                    cert.detail("tail_estimate", tail);
                }
                if let AsymptoticClass::Exponential { rate, constant } = class {
                    let n = n_max as f64;
                    let tail = (-rate * (n + 1.0)).exp() / (constant * (1.0 - (-rate).exp()));
                    cert.detail("tail_estimate", tail);
                }
                cert.notes
                    .push(format!("{} implies summability", class.describe()));
            } else {
                cert.verdict = Verdict::Fail;
                cert.notes
                    .push(format!("{} is not summable", class.describe()));
            }
        }
    }
    Ok(cert)
}

/// Check `w_{n-1} w_{n+1} <= w_n²` for every `n` in `[lo, hi]`.
pub fn check_hyp2(weights: &JacobiWeights, lo: u64, hi: u64) -> Result<Certificate> {
    if lo < 2 || hi < lo {
        return Err(Error::InvalidParameter(format!(
            "Hyp2 range must satisfy 2 <= lo <= hi, got [{lo}, {hi}]"
        )));
    }
    let mut cert = base_certificate(Hypothesis::Hyp2, weights, [lo, hi]);
    let theta = matches!(
        weights.sequence().map(|s| &s.spec().kind),
        Some(SpaceKind::ThetaFockBargmann { .. })
    );
    if weights.is_exact() {
        cert.exact = true;
        let sq: Vec<Rational> = (lo - 1..=hi + 1)
            .map(|n| weights.exact(n as usize).map(|r| r.square()))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::Range("exact weights unavailable over range".into()))?;
        let mut min_slack: Option<(u64, f64)> = None;
        let mut failures = 0u64;
        for (i, n) in (lo..=hi).enumerate() {
            // (w_{n-1} w_{n+1})² vs (w_n²)²
            let a = Rational::from(&sq[i] * &sq[i + 2]);
            let b = Rational::from(sq[i + 1].square_ref());
            // relative slack 1 - sqrt(a/b) = (b - a) / (b (1 + sqrt(a/b)))
            let diff = Rational::from(&b - &a);
            let r = Rational::from(&a / &b).to_f64();
            let slack = Rational::from(&diff / &b).to_f64() / (1.0 + r.sqrt());
            if diff < 0 {
                failures += 1;
                if cert.witnesses.len() < 5 {
                    let lhs = Float::with_val(64, &a).sqrt();
                    cert.witnesses.push(Witness::new(
                        n,
                        fmt(&lhs),
                        fmt(&Float::with_val(64, &sq[i + 1])),
                        "w_{n-1} w_{n+1} > w_n^2",
                    ));
                }
            }
            if min_slack.is_none_or(|(_, s)| slack < s) {
                min_slack = Some((n, slack));
            }
        }
        let (at, slack) = min_slack.expect("nonempty range");
        cert.margin = Some(format!("{slack:e}"));
        cert.detail("margin_index", at);
        if failures == 0 {
            let a = Rational::from(&sq[(at - lo) as usize] * &sq[(at - lo + 2) as usize]);
            cert.witnesses.push(Witness::new(
                at,
                fmt(&Float::with_val(weights.precision().bits(), &a).sqrt()),
                fmt(&Float::with_val(
                    weights.precision().bits(),
                    &sq[(at - lo + 1) as usize],
                )),
                "tightest index",
            ));
            cert.verdict = Verdict::Pass;
        } else {
            cert.verdict = Verdict::Fail;
            cert.detail("violations", failures);
        }
        return Ok(cert);
    }

    let bits = weights.precision().bits();
    let g = bits + 64;
    let w = weights.tabulate_range(lo as usize - 1, hi as usize + 1, g)?;
    let tol = Float::with_val(64, 1) >> (bits as i32 - 8);
    let mut min_slack: Option<(u64, Float)> = None;
    let mut failures = 0;
    let mut unresolved = 0;
    for (i, n) in (lo..=hi).enumerate() {
        let lhs = Float::with_val(g, &w[i] * &w[i + 2]);
        let rhs = Float::with_val(g, w[i + 1].square_ref());
        let slack = Float::with_val(g, &rhs - &lhs) / &rhs;
        if slack < 0 && slack.clone().abs() > tol {
            failures += 1;
            if cert.witnesses.len() < 5 {
                cert.witnesses.push(Witness::new(
                    n,
                    fmt(&lhs),
                    fmt(&rhs),
                    "w_{n-1} w_{n+1} > w_n^2",
                ));
            }
        } else if slack.clone().abs() <= tol {
            unresolved += 1;
        }
        if min_slack.as_ref().is_none_or(|(_, s)| slack < *s) {
            min_slack = Some((n, slack));
        }
    }
    let (at, slack) = min_slack.expect("nonempty range");
    cert.detail("margin_index", at);
    if theta {
        // Geometric weights: equality holds identically.
        cert.exact = true;
        cert.scope = Scope::AllIndices;
        cert.margin = Some("0".into());
        cert.detail("numerical_margin", fmt(&slack));
        cert.notes
            .push("geometric weights: w_{n-1} w_{n+1} = w_n^2 at every n".into());
        cert.verdict = if failures == 0 {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
    } else {
        cert.margin = Some(fmt(&slack));
        cert.verdict = if failures > 0 {
            Verdict::Fail
        } else if unresolved > 0 {
            cert.notes
                .push(format!("{unresolved} indices are equal within rounding"));
            Verdict::Inconclusive
        } else {
            Verdict::Pass
        };
    }
    Ok(cert)
}

/// Named dominating sequences `γ_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum GammaChoice {
    /// `γ_n = √n · ln n`.
    SqrtNLogN,
    /// `γ_n = c^{2p+1} e^{(2p+1)μ n/β'}` on theta weights, `β' > 2`.
    ThetaGeometric { beta_prime: RealParam },
    /// `γ_1, γ_2, ...` given explicitly.
    Tabulated { values: Vec<RealParam> },
}

impl GammaChoice {
    pub fn from_name(name: &str, beta_prime: Option<RealParam>) -> Result<Self> {
        match name {
            "sqrt_n_log_n" => Ok(GammaChoice::SqrtNLogN),
            "theta_geometric" => Ok(GammaChoice::ThetaGeometric {
                beta_prime: beta_prime.ok_or_else(|| {
                    Error::Config("theta_geometric needs beta_prime".into())
                })?,
            }),
            other => Err(Error::Config(format!(
                "unknown gamma sequence {other:?}; expected sqrt_n_log_n, theta_geometric or tabulated"
            ))),
        }
    }

    pub fn name(&self) -> String {
        match self {
            GammaChoice::SqrtNLogN => "sqrt_n_log_n".into(),
            GammaChoice::ThetaGeometric { beta_prime } => {
                format!("theta_geometric(beta'={beta_prime})")
            }
            GammaChoice::Tabulated { values } => format!("tabulated({} values)", values.len()),
        }
    }
}

/// A resolved `γ` sequence.
#[derive(Clone, Debug)]
pub struct GammaSeq {
    choice: GammaChoice,
    /// `ln γ_n = ln_b + r n`
    geometric: Option<(Float, Float)>,
    table: Vec<Float>,
}

impl GammaSeq {
    pub fn resolve(choice: &GammaChoice, weights: &JacobiWeights) -> Result<Self> {
        let bits = weights.precision().guarded();
        match choice {
            GammaChoice::SqrtNLogN => Ok(GammaSeq {
                choice: choice.clone(),
                geometric: None,
                table: Vec::new(),
            }),
            GammaChoice::ThetaGeometric { beta_prime } => {
                let spec = weights.sequence().map(|s| s.spec().clone());
                let (mu, ln_c) = spec
                    .as_ref()
                    .and_then(|s| s.theta_params(bits))
                    .ok_or_else(|| Error::Config("theta_geometric needs theta weights".into()))?;
                let bp = beta_prime.to_float(bits);
                if bp <= 2 {
                    return Err(Error::Config(format!(
                        "theta_geometric needs beta' > 2, got {beta_prime}"
                    )));
                }
                let k = 2 * spec.unwrap().p + 1;
                let rate = mu * k / bp;
                Ok(GammaSeq {
                    choice: choice.clone(),
                    geometric: Some((ln_c * k, rate)),
                    table: Vec::new(),
                })
            }
            GammaChoice::Tabulated { values } => {
                let table: Vec<Float> = values.iter().map(|v| v.to_float(bits)).collect();
                if let Some(i) = table.iter().position(|v| *v <= 0) {
                    return Err(Error::Config(format!(
                        "tabulated gamma_{} is not positive",
                        i + 1
                    )));
                }
                Ok(GammaSeq {
                    choice: choice.clone(),
                    geometric: None,
                    table,
                })
            }
        }
    }

    pub fn choice(&self) -> &GammaChoice {
        &self.choice
    }

    pub fn name(&self) -> String {
        self.choice.name()
    }

    /// First index `n` where the damping bound is defined (`γ_{n-1} > 0`).
    pub fn min_index(&self) -> u64 {
        match self.choice {
            GammaChoice::SqrtNLogN => 3,
            _ => 2,
        }
    }

    /// Largest index available, `None` when unbounded.
    pub fn available(&self) -> Option<u64> {
        match self.choice {
            GammaChoice::Tabulated { .. } => Some(self.table.len() as u64),
            _ => None,
        }
    }

    pub fn eval(&self, n: u64, bits: u32) -> Result<Float> {
        if n == 0 {
            return Err(Error::Range("gamma starts at index 1".into()));
        }
        match &self.choice {
            GammaChoice::SqrtNLogN => {
                let x = Float::with_val(bits + 8, n);
                Ok(Float::with_val(bits, x.clone().sqrt() * x.ln()))
            }
            GammaChoice::ThetaGeometric { .. } => {
                let (lb, r) = self.geometric.as_ref().unwrap();
                let e = Float::with_val(bits + 32, r * n) + lb;
                Ok(Float::with_val(bits, e.exp()))
            }
            GammaChoice::Tabulated { .. } => self
                .table
                .get(n as usize - 1)
                .map(|v| Float::with_val(bits, v))
                .ok_or_else(|| Error::Range(format!("tabulated gamma has no entry {n}"))),
        }
    }

    /// Whether `Σ 1/γ_n²` is known to converge.
    pub fn summable(&self) -> Option<bool> {
        match &self.choice {
            // Σ 1/(n ln² n) < ∞
            GammaChoice::SqrtNLogN => Some(true),
            GammaChoice::ThetaGeometric { .. } => Some(true),
            GammaChoice::Tabulated { .. } => None,
        }
    }

    /// Upper bound on `Σ_{k>n} 1/γ_k²`.
    pub fn tail_sum(&self, n: u64, bits: u32) -> Option<Float> {
        match &self.choice {
            // Σ_{k>n} 1/(k ln²k) <= ∫_n^∞ dx/(x ln²x) = 1/ln n
            GammaChoice::SqrtNLogN if n >= 2 => Some(Float::with_val(
                bits,
                Float::with_val(bits, n).ln().recip_ref(),
            )),
            GammaChoice::ThetaGeometric { .. } => {
                let (lb, r) = self.geometric.as_ref().unwrap();
                let g = bits + 32;
                // e^{-2 ln_b} e^{-2r(n+1)} / (1 - e^{-2r})
                let num = (Float::with_val(g, r * (n + 1)) + lb) * -2i32;
                let den = Float::with_val(g, 1) - Float::with_val(g, r * -2i32).exp();
                Some(Float::with_val(bits, num.exp() / den))
            }
            _ => None,
        }
    }
}

/// The damping sequence `D_n` over a range and its lock-in behaviour.
#[derive(Clone, Debug)]
pub struct DampingAnalysis {
    pub range: [u64; 2],
    /// Values `D_lo..=D_hi`.
    pub values: Vec<Float>,
    /// First `n` from which `D <= 1` through the end of the range.
    pub threshold: Option<u64>,
    /// First `n` from which `D < 1` through the end of the range.
    pub strict_threshold: Option<u64>,
    /// `min (1 - D_n)` over `[threshold, hi]`.
    pub margin: Option<Float>,
    /// `D` is non-increasing on the upper half of the range.
    pub eventually_nonincreasing: bool,
    /// `n (1 - D_n)` is positive and non-decreasing on the upper half.
    pub scaled_margin_nondecreasing: bool,
    /// `(n, n (1 - D_n))` at powers of ten and the range end.
    pub margin_trace: Vec<(u64, f64)>,
}

impl DampingAnalysis {
    pub fn at(&self, n: u64) -> &Float {
        &self.values[(n - self.range[0]) as usize]
    }

    /// The finite check extends to all larger indices.
    pub fn extension_established(&self) -> bool {
        self.threshold.is_some()
            && (self.eventually_nonincreasing || self.scaled_margin_nondecreasing)
    }

    /// Worst index `D_n > 1` below the threshold.
    pub fn worst_violation(&self) -> Option<(u64, &Float)> {
        let lo = self.range[0];
        self.values
            .iter()
            .enumerate()
            .filter(|(_, d)| **d > 1)
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, d)| (lo + i as u64, d))
    }
}

/// Evaluate `D_n` for `n` in `[lo, hi]`.
pub fn damping_analysis(
    weights: &JacobiWeights,
    gamma: &GammaSeq,
    lambda_abs: &Float,
    lo: u64,
    hi: u64,
) -> Result<DampingAnalysis> {
    if lo < gamma.min_index() || hi < lo {
        return Err(Error::InvalidParameter(format!(
            "damping range [{lo}, {hi}] must start at >= {} and be nonempty",
            gamma.min_index()
        )));
    }
    if let Some(a) = gamma.available() {
        if hi + 1 > a {
            return Err(Error::Range(format!(
                "gamma tabulated up to {a}, need {}",
                hi + 1
            )));
        }
    }
    let bits = weights.precision().bits();
    let w = weights.tabulate_range(lo as usize - 1, hi as usize, bits)?;
    let g: Vec<Float> = (lo - 1..=hi + 1)
        .map(|n| gamma.eval(n, bits))
        .collect::<Result<_>>()?;
    let lam = Float::with_val(bits, lambda_abs);
    let mut values = Vec::with_capacity((hi - lo + 1) as usize);
    for i in 0..=(hi - lo) as usize {
        // i ↔ n = lo + i; w[i] = w_{n-1}, w[i+1] = w_n; g[i] = γ_{n-1}
        let a = Float::with_val(bits, &lam / &w[i + 1]) * &g[i + 2] / &g[i + 1];
        let b = Float::with_val(bits, &w[i] / &w[i + 1]) * &g[i + 2] / &g[i];
        values.push(a + b);
    }
    let mut threshold = None;
    let mut strict = None;
    let mut t_done = false;
    let mut s_done = false;
    for (i, d) in values.iter().enumerate().rev() {
        let n = lo + i as u64;
        if !t_done {
            if *d <= 1 {
                threshold = Some(n);
            } else {
                t_done = true;
            }
        }
        if !s_done {
            if *d < 1 {
                strict = Some(n);
            } else {
                s_done = true;
            }
        }
        if t_done && s_done {
            break;
        }
    }
    let margin = threshold.map(|t| {
        let mut m = Float::with_val(bits, 1) - &values[(t - lo) as usize];
        for d in &values[(t - lo) as usize..] {
            let s = Float::with_val(bits, 1) - d;
            if s < m {
                m = s;
            }
        }
        m
    });
    let mid = ((lo + hi) / 2).max(threshold.unwrap_or(hi));
    let upper = &values[(mid - lo) as usize..];
    let eventually_nonincreasing = upper.windows(2).all(|p| p[1] <= p[0]);
    let scaled = |n: u64, d: &Float| Float::with_val(bits, Float::with_val(bits, 1) - d) * n;
    let mut scaled_ok = true;
    let mut prev: Option<Float> = None;
    for (j, d) in upper.iter().enumerate() {
        let s = scaled(mid + j as u64, d);
        if s <= 0 || prev.as_ref().is_some_and(|p| s < *p) {
            scaled_ok = false;
            break;
        }
        prev = Some(s);
    }
    let mut margin_trace = Vec::new();
    let mut dec = 10u64;
    while dec <= hi {
        if dec >= lo {
            margin_trace.push((dec, scaled(dec, &values[(dec - lo) as usize]).to_f64()));
        }
        dec *= 10;
    }
    if margin_trace.last().map(|t| t.0) != Some(hi) {
        margin_trace.push((hi, scaled(hi, values.last().unwrap()).to_f64()));
    }
    Ok(DampingAnalysis {
        range: [lo, hi],
        values,
        threshold,
        strict_threshold: strict,
        margin,
        eventually_nonincreasing,
        scaled_margin_nondecreasing: scaled_ok,
        margin_trace,
    })
}

fn damping_witnesses(cert: &mut Certificate, d: &DampingAnalysis, strict: bool) {
    let [lo, hi] = d.range;
    let t = if strict {
        d.strict_threshold
    } else {
        d.threshold
    };
    let rel = if strict { "D_n < 1" } else { "D_n <= 1" };
    if let Some(t) = t {
        if t > lo {
            cert.witnesses
                .push(Witness::new(t - 1, fmt(d.at(t - 1)), "1", "last violation"));
        }
        cert.witnesses.push(Witness::new(t, fmt(d.at(t)), "1", rel));
        cert.witnesses
            .push(Witness::new(hi, fmt(d.at(hi)), "1", rel));
    } else {
        cert.witnesses.push(Witness::new(
            hi,
            fmt(d.at(hi)),
            "1",
            "violated at range end",
        ));
        if let Some((n, v)) = d.worst_violation() {
            if n != hi {
                cert.witnesses
                    .push(Witness::new(n, fmt(v), "1", "largest violation"));
            }
        }
    }
    cert.detail("margin_trace_n_times_one_minus_d", &d.margin_trace);
    cert.detail("d_eventually_nonincreasing", d.eventually_nonincreasing);
    cert.detail("n_one_minus_d_nondecreasing", d.scaled_margin_nondecreasing);
}

/// Check Hyp3 for a given `|λ|` and `γ` over `[lo, hi]`.
pub fn check_hyp3(
    weights: &JacobiWeights,
    gamma: &GammaChoice,
    lambda_abs: &Float,
    lo: u64,
    hi: u64,
) -> Result<Certificate> {
    let gs = GammaSeq::resolve(gamma, weights)?;
    if lo < 3 {
        return Err(Error::InvalidParameter(format!(
            "Hyp3 range must start at n >= 3, got {lo}"
        )));
    }
    let bits = weights.precision().bits();
    let d = damping_analysis(weights, &gs, lambda_abs, lo, hi)?;
    let mut cert = base_certificate(Hypothesis::Hyp3, weights, [lo, hi]);
    cert.detail("gamma", gs.name());
    cert.detail("lambda_abs", fmt(lambda_abs));

    // w_n γ_n / γ_{n+1} >= n^{1+α}: best α over the upper half.
    let mid = ((lo + hi) / 2).max(lo);
    let w = weights.tabulate_range(mid as usize, hi as usize, bits)?;
    let mut alpha: Option<(u64, f64)> = None;
    for (i, wn) in w.iter().enumerate() {
        let n = mid + i as u64;
        if n < 2 {
            continue;
        }
        let r = Float::with_val(bits, wn * gs.eval(n, bits)?) / gs.eval(n + 1, bits)?;
        let e = (r.ln() / Float::with_val(bits, n).ln()).to_f64() - 1.0;
        if alpha.is_none_or(|(_, a)| e < a) {
            alpha = Some((n, e));
        }
    }
    let (alpha_at, alpha_hat) = alpha.expect("nonempty");
    cert.detail("alpha_hat", alpha_hat);
    cert.detail("alpha_hat_index", alpha_at);
    let summable = gs.summable();
    cert.detail("gamma_inverse_square_summable", summable);

    cert.threshold_n0 = d.threshold;
    cert.margin = d.margin.as_ref().map(fmt);
    damping_witnesses(&mut cert, &d, false);

    if alpha_hat <= 0.0 {
        cert.verdict = Verdict::Fail;
        let r = Float::with_val(bits, w[(alpha_at - mid) as usize].clone())
            * gs.eval(alpha_at, bits)?
            / gs.eval(alpha_at + 1, bits)?;
        cert.witnesses.insert(
            0,
            Witness::new(
                alpha_at,
                fmt(&r),
                format!("{alpha_at}^(1+alpha), alpha > 0"),
                "w_n gamma_n / gamma_{n+1} >= n^{1+alpha} fails for every alpha > 0",
            ),
        );
        cert.notes
            .push(format!("best exponent alpha = {alpha_hat:.4} <= 0"));
    } else if d.threshold.is_none() {
        cert.verdict = Verdict::Fail;
        cert.notes
            .push("damping bound does not hold at the end of the range".into());
    } else if d.extension_established() && summable == Some(true) {
        cert.verdict = Verdict::Pass;
        cert.scope = Scope::AllIndices;
    } else {
        cert.verdict = Verdict::Inconclusive;
        cert.notes.push(
            "damping bound holds from the threshold through the range, but no monotone trend extends it"
                .into(),
        );
    }
    Ok(cert)
}

/// Check the strict damping bound `D_n < 1` eventually and `Σ 1/γ_n² < ∞`.
pub fn check_alt311(
    weights: &JacobiWeights,
    gamma: &GammaChoice,
    lambda_abs: &Float,
    lo: u64,
    hi: u64,
) -> Result<Certificate> {
    let gs = GammaSeq::resolve(gamma, weights)?;
    let d = damping_analysis(weights, &gs, lambda_abs, lo.max(gs.min_index()), hi)?;
    let mut cert = base_certificate(Hypothesis::Alt311, weights, d.range);
    cert.detail("gamma", gs.name());
    cert.detail("lambda_abs", fmt(lambda_abs));
    let summable = gs.summable();
    cert.detail("gamma_inverse_square_summable", summable);
    cert.threshold_n0 = d.strict_threshold;
    if let Some(t) = d.strict_threshold {
        let bits = weights.precision().bits();
        let mut m = Float::with_val(bits, 1) - d.at(t);
        for n in t..=hi {
            let s = Float::with_val(bits, 1) - d.at(n);
            if s < m {
                m = s;
            }
        }
        cert.margin = Some(fmt(&m));
    }
    damping_witnesses(&mut cert, &d, true);
    cert.verdict = match (d.strict_threshold, summable) {
        (None, _) => Verdict::Fail,
        (Some(_), Some(true)) if d.eventually_nonincreasing || d.scaled_margin_nondecreasing => {
            cert.scope = Scope::AllIndices;
            Verdict::Pass
        }
        _ => Verdict::Inconclusive,
    };
    Ok(cert)
}

/// Closed-form threshold for geometric weights `w_n = A e^{sn}` and
/// `γ_n ∝ e^{sn/β'}`: `D_n = m e^{-sn} + C` with `m = |λ| e^{s/β'}/A` and
/// `C = e^{-s(1 - 2/β')}`, so `D_n < 1` for `n > ln(m/(1-C))/s`.
#[derive(Clone, Debug)]
pub struct ThetaThreshold {
    pub rate: Float,
    pub m_beta: Float,
    pub c_beta: Float,
    /// `ln(m/(1-C))/s`, possibly negative.
    pub n0: Float,
    /// First integer index strictly beyond `n0`, at least 2.
    pub first_index: u64,
    pub checked_through: u64,
    /// `m e^{-sn} + C < 1` on every checked index.
    pub holds: bool,
    pub max_lhs: Float,
    /// Largest relative gap between the closed form and the direct damping values.
    pub closed_form_gap: f64,
    /// Closed form at `first_index - 1` when that index is >= 2.
    pub lhs_before: Option<Float>,
}

/// Evaluate and verify the theta threshold over `extra` indices past it.
pub fn theta_threshold(
    weights: &JacobiWeights,
    lambda_abs: &Float,
    beta_prime: &RealParam,
    extra: u64,
) -> Result<ThetaThreshold> {
    let choice = GammaChoice::ThetaGeometric {
        beta_prime: beta_prime.clone(),
    };
    let gs = GammaSeq::resolve(&choice, weights)?;
    let seq = weights.sequence().unwrap();
    let bits = weights.precision().bits();
    let g = bits + 32;
    let (mu, _) = seq.spec().theta_params(g).unwrap();
    let s = mu * (2 * seq.p() + 1);
    let bp = beta_prime.to_float(g);
    let a = weights.w(1, g)? / Float::with_val(g, s.exp_ref());
    let m = Float::with_val(g, lambda_abs) * Float::with_val(g, &s / &bp).exp() / &a;
    let c = (Float::with_val(g, 1) - Float::with_val(g, 2u32 / &bp)) * &s;
    let c = Float::with_val(g, -c).exp();
    let one_minus_c = Float::with_val(g, 1) - &c;
    let n0 = if m.is_zero() {
        Float::with_val(g, rug::float::Special::NegInfinity)
    } else {
        Float::with_val(g, &m / &one_minus_c).ln() / &s
    };
    let first = if n0 < 1 {
        2
    } else {
        (n0.to_f64().floor() as u64 + 1).max(2)
    };
    let last = first + extra;
    let lhs = |n: u64| -> Float {
        let e = Float::with_val(g, &s * n);
        Float::with_val(g, &m / e.exp()) + &c
    };
    let d = damping_analysis(weights, &gs, lambda_abs, first, last)?;
    let mut holds = true;
    let mut max_lhs = Float::with_val(g, 0);
    let mut gap: f64 = 0.0;
    for n in first..=last {
        let v = lhs(n);
        if v >= 1 {
            holds = false;
        }
        let direct = d.at(n);
        if *direct >= 1 {
            holds = false;
        }
        let r = (Float::with_val(g, &v - direct) / &v).abs().to_f64();
        gap = gap.max(r);
        if v > max_lhs {
            max_lhs = v;
        }
    }
    let lhs_before = (first > 2).then(|| lhs(first - 1));
    Ok(ThetaThreshold {
        rate: Float::with_val(bits, s),
        m_beta: Float::with_val(bits, m),
        c_beta: Float::with_val(bits, c),
        n0: Float::with_val(bits, n0),
        first_index: first,
        checked_through: last,
        holds,
        max_lhs: Float::with_val(bits, max_lhs),
        closed_form_gap: gap,
        lhs_before: lhs_before.map(|v| Float::with_val(bits, v)),
    })
}

/// ℓ² certification of a recurrence solution.
#[derive(Clone, Debug)]
pub struct L2Report {
    pub n: usize,
    pub gamma: String,
    /// `max_n |u_n| γ_n` over the computed range.
    pub m_global: Float,
    /// `max(|u_{N-1}| γ_{N-1}, |u_N| γ_N)`, the seed of the tail induction.
    pub m_tail: Float,
    pub threshold_n0: Option<u64>,
    /// The damping bound holds from `threshold_n0` through `N` and beyond as checked.
    pub locked: bool,
    pub extension_established: bool,
    pub certified: bool,
    pub partial_sum: Float,
    /// `m_tail² Σ_{n>N} 1/γ_n²`, when certified.
    pub tail_bound: Option<Float>,
    pub damping_range: [u64; 2],
    pub notes: Vec<String>,
}

impl L2Report {
    /// `sqrt(tail_bound)`, a bound on the ℓ² norm of the discarded coefficients.
    pub fn tail_norm(&self) -> Option<Float> {
        self.tail_bound
            .as_ref()
            .map(|t| Float::with_val(t.prec(), t.sqrt_ref()))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "gamma": self.gamma,
            "m_global": fmt(&self.m_global),
            "m_tail": fmt(&self.m_tail),
            "threshold_n0": self.threshold_n0,
            "locked": self.locked,
            "extension_established": self.extension_established,
            "certified": self.certified,
            "partial_sum": fmt(&self.partial_sum),
            "tail_bound": self.tail_bound.as_ref().map(fmt),
            "damping_range": self.damping_range,
            "notes": self.notes,
        })
    }
}

/// Bound `|u_n| <= M/γ_n` and certify the ℓ² tail.
///
/// The damping bound is examined on `[γ.min_index(), 10 N]` (limited by the
/// available weights); when it holds from some `n0 <= N` with a monotone
/// trend, the induction `|u_{n+1}| <= (|λ||u_n| + w_{n-1}|u_{n-1}|)/w_n <=
/// D_n M/γ_{n+1}` propagates the bound past `N`.
pub fn certify_l2(
    solution: &RecurrenceSolution,
    weights: &JacobiWeights,
    gamma: &GammaChoice,
) -> Result<L2Report> {
    let gs = GammaSeq::resolve(gamma, weights)?;
    let n = solution.len();
    let bits = solution.precision.bits();
    let lo = gs.min_index();
    if (n as u64) < lo + 1 {
        return Err(Error::Dimension(format!(
            "solution too short for certification: N = {n}"
        )));
    }
    let mut hi = 10 * n as u64;
    if let Some(a) = weights.available() {
        hi = hi.min(a as u64);
    }
    if let Some(a) = gs.available() {
        hi = hi.min(a.saturating_sub(1));
    }
    hi = hi.max(n as u64);
    let lam = Float::with_val(bits, solution.lambda.abs_ref());
    let d = damping_analysis(weights, &gs, &lam, lo, hi)?;

    let mut m_global = Float::with_val(bits, 0);
    let start = if matches!(gs.choice(), GammaChoice::SqrtNLogN) {
        2
    } else {
        1
    };
    let mut prod = Vec::with_capacity(n);
    for k in start..=n {
        let v = Float::with_val(bits, solution.get(k).abs_ref()) * gs.eval(k as u64, bits)?;
        if v > m_global {
            m_global = v.clone();
        }
        prod.push(v);
    }
    let m_tail = {
        let a = &prod[prod.len() - 2];
        let b = &prod[prod.len() - 1];
        if a > b {
            a.clone()
        } else {
            b.clone()
        }
    };
    let partial_sum = Float::with_val(bits, solution.partial_sums.last().unwrap());
    let mut notes = Vec::new();
    let locked = d.threshold.is_some_and(|t| t <= n as u64);
    if !locked {
        notes.push(match d.threshold {
            None => {
                "damping bound fails at the end of the examined range: certification impossible"
                    .into()
            }
            Some(t) => format!("damping bound locks only at n = {t} > N = {n}"),
        });
    }
    let extension = d.extension_established();
    let certified = locked && extension && gs.summable() == Some(true);
    if locked && !certified {
        notes.push("lock observed but not extended to all indices".into());
    }
    let tail_bound = if certified {
        gs.tail_sum(n as u64, bits)
            .map(|t| Float::with_val(bits, m_tail.square_ref()) * t)
    } else {
        None
    };
    Ok(L2Report {
        n,
        gamma: gs.name(),
        m_global,
        m_tail,
        threshold_n0: d.threshold,
        locked,
        extension_established: extension,
        certified,
        partial_sum,
        tail_bound,
        damping_range: d.range,
        notes,
    })
}
