//! Weight sequences `ω_n` and the composed shift weights `ω_{n,p} = ω_n ∏_{j=1..p} ω_{n-j}²`.

pub mod gamma;
pub mod radical;

use std::fmt;

use rug::float::Constant;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::param::RealParam;
use crate::precision::Precision;

use gamma::{moment_ratio, AParam};
pub use radical::Radical;

/// The four families of spaces and their parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceKind {
    ClassicBargmann,
    GeneralizedBargmann { beta: RealParam },
    ThetaFockBargmann { nu: RealParam, alpha: RealParam },
    PoincareDisk { nu: RealParam },
}

/// A space together with the shift order `p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct SpaceSpec {
    #[serde(flatten)]
    pub kind: SpaceKind,
    pub p: u32,
}

#[derive(Deserialize)]
struct RawSpec {
    #[serde(flatten)]
    kind: SpaceKind,
    #[serde(default)]
    p: u32,
}

impl TryFrom<RawSpec> for SpaceSpec {
    type Error = Error;

    fn try_from(r: RawSpec) -> Result<Self> {
        SpaceSpec::new(r.kind, r.p)
    }
}

impl SpaceSpec {
    pub fn new(kind: SpaceKind, p: u32) -> Result<Self> {
        match &kind {
            SpaceKind::ClassicBargmann => {}
            SpaceKind::GeneralizedBargmann { beta } => {
                if !beta.is_positive() {
                    return Err(Error::InvalidParameter(format!(
                        "beta must be > 0, got {beta}"
                    )));
                }
            }
            SpaceKind::ThetaFockBargmann { nu, .. } => {
                if !nu.is_positive() {
                    return Err(Error::InvalidParameter(format!("nu must be > 0, got {nu}")));
                }
            }
            SpaceKind::PoincareDisk { nu } => {
                // Weights and basis are defined for 2ν - 1 > 0.
                let half = Rational::from((1, 2));
                let ok = match nu.as_rational() {
                    Some(q) => *q > half,
                    None => nu.to_f64() > 0.5,
                };
                if !ok {
                    return Err(Error::InvalidParameter(format!(
                        "disk parameter nu must be > 1/2, got {nu}"
                    )));
                }
            }
        }
        if p > 64 {
            return Err(Error::InvalidParameter(format!(
                "shift order p must be <= 64, got {p}"
            )));
        }
        Ok(SpaceSpec { kind, p })
    }

    pub fn classic(p: u32) -> Self {
        SpaceSpec {
            kind: SpaceKind::ClassicBargmann,
            p,
        }
    }

    pub fn generalized(beta: &str, p: u32) -> Result<Self> {
        SpaceSpec::new(
            SpaceKind::GeneralizedBargmann {
                beta: beta.parse()?,
            },
            p,
        )
    }

    pub fn theta(nu: &str, alpha: &str, p: u32) -> Result<Self> {
        SpaceSpec::new(
            SpaceKind::ThetaFockBargmann {
                nu: nu.parse()?,
                alpha: alpha.parse()?,
            },
            p,
        )
    }

    pub fn disk(nu: &str, p: u32) -> Result<Self> {
        SpaceSpec::new(SpaceKind::PoincareDisk { nu: nu.parse()? }, p)
    }

    pub fn with_p(&self, p: u32) -> Self {
        SpaceSpec {
            kind: self.kind.clone(),
            p,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            SpaceKind::ClassicBargmann => "classic_bargmann",
            SpaceKind::GeneralizedBargmann { .. } => "generalized_bargmann",
            SpaceKind::ThetaFockBargmann { .. } => "theta_fock_bargmann",
            SpaceKind::PoincareDisk { .. } => "poincare_disk",
        }
    }

    /// `μ = 2π/ν` for theta spaces.
    pub fn theta_mu(&self, bits: u32) -> Option<Float> {
        match &self.kind {
            SpaceKind::ThetaFockBargmann { nu, .. } => Some(theta_mu(nu, bits)),
            _ => None,
        }
    }

    /// `(μ, ln c_α)` for theta spaces, with `c_α = e^{(μ + 4α)/2}`.
    pub fn theta_params(&self, bits: u32) -> Option<(Float, Float)> {
        match &self.kind {
            SpaceKind::ThetaFockBargmann { nu, alpha } => {
                Some((theta_mu(nu, bits), theta_ln_c(nu, alpha, bits)))
            }
            _ => None,
        }
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SpaceKind::ClassicBargmann => write!(f, "classic_bargmann(p={})", self.p),
            SpaceKind::GeneralizedBargmann { beta } => {
                write!(f, "generalized_bargmann(beta={beta}, p={})", self.p)
            }
            SpaceKind::ThetaFockBargmann { nu, alpha } => {
                write!(
                    f,
                    "theta_fock_bargmann(nu={nu}, alpha={alpha}, p={})",
                    self.p
                )
            }
            SpaceKind::PoincareDisk { nu } => write!(f, "poincare_disk(nu={nu}, p={})", self.p),
        }
    }
}

fn theta_mu(nu: &RealParam, bits: u32) -> Float {
    if nu.is_pi_multiple() {
        // 2π/(qπ) = 2/q
        Float::with_val(bits, Rational::from(2) / nu.coefficient())
    } else {
        let pi = Float::with_val(bits + 16, Constant::Pi);
        Float::with_val(bits, pi * 2u32 / nu.to_float(bits + 16))
    }
}

/// `ln c_α = (μ + 4α)/2`.
fn theta_ln_c(nu: &RealParam, alpha: &RealParam, bits: u32) -> Float {
    let mu = theta_mu(nu, bits + 16);
    Float::with_val(bits, (mu + alpha.to_float(bits + 16) * 4u32) / 2u32)
}

/// Growth class of `ω_{n,p}`: `constant · n^exponent` or `constant · e^{rate n}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AsymptoticClass {
    Power { exponent: f64, constant: f64 },
    Exponential { rate: f64, constant: f64 },
}

impl AsymptoticClass {
    /// Whether `Σ 1/ω_{n,p}` converges for this growth.
    pub fn reciprocal_summable(&self) -> bool {
        match *self {
            AsymptoticClass::Power { exponent, .. } => exponent > 1.0,
            AsymptoticClass::Exponential { rate, .. } => rate > 0.0,
        }
    }

    /// Model value at `n`.
    pub fn model(&self, n: f64) -> f64 {
        match *self {
            AsymptoticClass::Power { exponent, constant } => constant * n.powf(exponent),
            AsymptoticClass::Exponential { rate, constant } => constant * (rate * n).exp(),
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            AsymptoticClass::Power { exponent, constant } => {
                format!("power: {constant} * n^{exponent}")
            }
            AsymptoticClass::Exponential { rate, constant } => {
                format!("exponential: {constant} * exp({rate} n)")
            }
        }
    }
}

/// Result of a weight query.
#[derive(Clone, Debug, PartialEq)]
pub enum Weight {
    /// `n < p`: the backward shift annihilates this basis vector.
    ZeroAction,
    Value(Float),
}

impl Weight {
    pub fn value(self) -> Option<Float> {
        match self {
            Weight::ZeroAction => None,
            Weight::Value(v) => Some(v),
        }
    }
}

/// Lazily evaluated `ω_{n,p}` for one space.
#[derive(Clone, Debug)]
pub struct WeightSequence {
    spec: SpaceSpec,
    precision: Precision,
    a: Option<AParam>,
}

/// Build the weight sequence of a space at the given working precision.
pub fn make_weights(spec: &SpaceSpec, precision: Precision) -> Result<WeightSequence> {
    let spec = SpaceSpec::new(spec.kind.clone(), spec.p)?;
    let a = match &spec.kind {
        SpaceKind::GeneralizedBargmann { beta } => Some(a_param(beta, precision.guarded() + 64)),
        _ => None,
    };
    Ok(WeightSequence { spec, precision, a })
}

/// `a = 2/β`, exact when possible.
pub fn a_param(beta: &RealParam, bits: u32) -> AParam {
    match beta.as_rational() {
        Some(b) => {
            let q = Rational::from(2) / b;
            if *q.denom() == 1 && *q.numer() > 0 && *q.numer() <= 64 {
                AParam::Integer(q.numer().to_u32().unwrap())
            } else {
                AParam::Rational(q)
            }
        }
        None => AParam::Real(Float::with_val(bits, 2u32 / beta.to_float(bits + 16))),
    }
}

impl WeightSequence {
    pub fn spec(&self) -> &SpaceSpec {
        &self.spec
    }

    pub fn p(&self) -> u32 {
        self.spec.p
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    /// The same space with another shift order.
    pub fn with_p(&self, p: u32) -> WeightSequence {
        WeightSequence {
            spec: self.spec.with_p(p),
            precision: self.precision,
            a: self.a.clone(),
        }
    }

    /// Square of the base weight `ω_n²` as an exact rational, when available.
    fn base_sq_exact(&self, n: u64) -> Option<Rational> {
        match &self.spec.kind {
            SpaceKind::ClassicBargmann => Some(Rational::from(n + 1)),
            SpaceKind::GeneralizedBargmann { .. } => match self.a {
                Some(AParam::Integer(k)) => {
                    let lo = Integer::from(k) * (n + 1);
                    let mut prod = Integer::from(1);
                    for i in 0..k {
                        prod *= Integer::from(&lo + i);
                    }
                    Some(Rational::from(prod))
                }
                _ => None,
            },
            SpaceKind::PoincareDisk { nu } => nu.as_rational().map(|q| {
                let two_nu = Rational::from(q * 2u32);
                Rational::from(n + 1) * (two_nu + n)
            }),
            SpaceKind::ThetaFockBargmann { .. } => None,
        }
    }

    /// Whether weights have an exact `r·√s` form.
    pub fn has_exact_form(&self) -> bool {
        self.base_sq_exact(0).is_some()
    }

    /// `ω_{n,p} = r·√s` exactly, when the space admits it and `n >= p`.
    pub fn exact_form(&self, n: u64) -> Option<Radical> {
        let p = self.spec.p as u64;
        if n < p {
            return None;
        }
        let mut coeff = Rational::from(1);
        for j in 1..=p {
            coeff *= self.base_sq_exact(n - j)?;
        }
        Some(Radical::new(coeff, self.base_sq_exact(n)?))
    }

    /// Base weight `ω_n` (order zero) at `bits` of precision.
    pub fn base(&self, n: u64, bits: u32) -> Result<Float> {
        let g = bits + 32;
        let v = match &self.spec.kind {
            SpaceKind::ThetaFockBargmann { nu, alpha } => {
                let e = theta_ln_c(nu, alpha, g) + theta_mu(nu, g) * Float::with_val(g, n);
                e.exp()
            }
            SpaceKind::GeneralizedBargmann { .. } => {
                let a = self
                    .a
                    .as_ref()
                    .expect("generalized weights carry a = 2/beta");
                moment_ratio(n + 1, a, g)?.sqrt()
            }
            SpaceKind::PoincareDisk { nu } if !nu.is_pi_multiple() => {
                Float::with_val(g, self.base_sq_exact(n).unwrap()).sqrt()
            }
            SpaceKind::PoincareDisk { nu } => {
                let t = (nu.to_float(g + 16) * 2u32 + n) * Float::with_val(g + 16, n + 1);
                Float::with_val(g, t).sqrt()
            }
            SpaceKind::ClassicBargmann => Float::with_val(g, n + 1).sqrt(),
        };
        Ok(Float::with_val(bits, v))
    }

    /// `ω_{n,p}` at the working precision.
    pub fn eval(&self, n: u64) -> Result<Weight> {
        self.eval_bits(n, self.precision.bits())
    }

    /// `ω_{n,p}` at the working precision, as a number; errors for `n < p`.
    pub fn value(&self, n: u64) -> Result<Float> {
        self.value_bits(n, self.precision.bits())
    }

    pub fn value_bits(&self, n: u64, bits: u32) -> Result<Float> {
        self.eval_bits(n, bits)?.value().ok_or_else(|| {
            Error::Range(format!(
                "weight index {n} is below the shift order p = {}",
                self.spec.p
            ))
        })
    }

    /// `ω_{n,p}` at `bits`, correctly rounded up to a tiny guard error.
    pub fn eval_bits(&self, n: u64, bits: u32) -> Result<Weight> {
        let p = self.spec.p as u64;
        if n < p {
            return Ok(Weight::ZeroAction);
        }
        let g = bits + 32;
        let v = match &self.spec.kind {
            SpaceKind::ThetaFockBargmann { nu, alpha } => {
                // (2p+1) ln c + μ((2p+1)n - p(p+1))
                let k = 2 * p + 1;
                let mag = 64 - ((k * (n + 1)) | 1).leading_zeros();
                let gg = g + mag + 8;
                let lc = theta_ln_c(nu, alpha, gg) * k;
                let lin = Integer::from(k) * n - Integer::from(p * (p + 1));
                let e = lc + theta_mu(nu, gg) * Float::with_val(gg, lin);
                Float::with_val(g, e.exp())
            }
            _ if self.has_exact_form() => {
                let mut coeff = Rational::from(1);
                for j in 1..=p {
                    coeff *= self.base_sq_exact(n - j).unwrap();
                }
                let s = Float::with_val(g, self.base_sq_exact(n).unwrap()).sqrt();
                s * Float::with_val(g, &coeff)
            }
            _ => {
                let a = self.a.as_ref();
                let m = |k: u64| -> Result<Float> {
                    match (&self.spec.kind, a) {
                        (SpaceKind::GeneralizedBargmann { .. }, Some(a)) => moment_ratio(k, a, g),
                        _ => {
                            let b = self.base(k - 1, g)?;
                            Ok(Float::with_val(g, b.square_ref()))
                        }
                    }
                };
                // ω_n² = m_{n+1} for generalized spaces, and (ω_n²) otherwise.
                let mut v = m(n + 1)?.sqrt();
                for j in 1..=p {
                    v *= m(n - j + 1)?;
                }
                v
            }
        };
        Ok(Weight::Value(Float::with_val(bits, v)))
    }

    /// `ω_n ∏_{j=1..p} ω_{n-j}²` assembled from independently evaluated base weights.
    pub fn compose(&self, n: u64, bits: u32) -> Result<Weight> {
        let p = self.spec.p as u64;
        if n < p {
            return Ok(Weight::ZeroAction);
        }
        let g = bits + 64;
        let mut v = self.base(n, g)?;
        for j in 1..=p {
            let b = self.base(n - j, g)?;
            v *= b.square();
        }
        Ok(Weight::Value(Float::with_val(bits, v)))
    }

    /// `ω_{n,p}` for `n in lo..=hi` at `bits`.
    pub fn tabulate(&self, lo: u64, hi: u64, bits: u32) -> Result<Vec<Float>> {
        let p = self.spec.p as u64;
        if lo < p {
            return Err(Error::Range(format!("tabulation starts at {lo} < p = {p}")));
        }
        if lo > hi {
            return Ok(Vec::new());
        }
        match (&self.spec.kind, &self.a) {
            (SpaceKind::GeneralizedBargmann { .. }, Some(a))
                if !matches!(a, AParam::Integer(_)) =>
            {
                // Share the moment ratios between neighbouring weights.
                let g = bits + 32;
                let first = lo + 1 - p;
                let ms: Vec<Float> = (first..=hi + 1)
                    .map(|k| moment_ratio(k, a, g))
                    .collect::<Result<_>>()?;
                let at = |k: u64| &ms[(k - first) as usize];
                (lo..=hi)
                    .map(|n| {
                        let mut v = Float::with_val(g, at(n + 1).sqrt_ref());
                        for j in 1..=p {
                            v *= at(n - j + 1);
                        }
                        Ok(Float::with_val(bits, v))
                    })
                    .collect()
            }
            _ => (lo..=hi).map(|n| self.value_bits(n, bits)).collect(),
        }
    }

    /// Leading growth of `ω_{n,p}`.
    pub fn asymptotic_class(&self) -> AsymptoticClass {
        let p = self.spec.p as f64;
        match &self.spec.kind {
            SpaceKind::ClassicBargmann => AsymptoticClass::Power {
                exponent: p + 0.5,
                constant: 1.0,
            },
            SpaceKind::GeneralizedBargmann { beta } => {
                let b = beta.to_f64();
                let e = (2.0 * p + 1.0) / b;
                AsymptoticClass::Power {
                    exponent: e,
                    constant: (2.0 / b).powf(e),
                }
            }
            SpaceKind::ThetaFockBargmann { nu, alpha } => {
                let mu = theta_mu(nu, 64).to_f64();
                let lc = theta_ln_c(nu, alpha, 64).to_f64();
                let k = 2.0 * p + 1.0;
                AsymptoticClass::Exponential {
                    rate: k * mu,
                    constant: (k * lc - mu * p * (p + 1.0)).exp(),
                }
            }
            SpaceKind::PoincareDisk { .. } => AsymptoticClass::Power {
                exponent: 2.0 * p + 1.0,
                constant: 1.0,
            },
        }
    }

    pub fn label(&self) -> String {
        self.spec.to_string()
    }
}

/// Metadata of a weight sequence for reports.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeightMeta {
    pub spec: SpaceSpec,
    pub asymptotic_class: AsymptoticClass,
    pub exact_forms: bool,
    pub index_offset: u32,
    pub precision_bits: u32,
}

impl WeightSequence {
    pub fn meta(&self) -> WeightMeta {
        WeightMeta {
            spec: self.spec.clone(),
            asymptotic_class: self.asymptotic_class(),
            exact_forms: self.has_exact_form(),
            index_offset: self.spec.p,
            precision_bits: self.precision.bits(),
        }
    }
}

/// One probe of an asymptotic comparison.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AsymptoticProbe {
    pub n: u64,
    pub ratio: f64,
}

/// Ratios `ω_{n,p} / model(n)` across probes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub model: AsymptoticClass,
    pub probes: Vec<AsymptoticProbe>,
    /// Ratios move monotonically with shrinking steps.
    pub monotone: bool,
    pub converging: bool,
    pub flags: Vec<String>,
}

/// Compare weights with their asymptotic model at the probe indices.
///
/// Probes must be increasing and at least `p + 1`. Irregular behaviour is
/// flagged in the report, never raised.
pub fn asymptotic_check(seq: &WeightSequence, probes: &[u64]) -> Result<AsymptoticReport> {
    let p = seq.p() as u64;
    if probes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "probes must be strictly increasing".into(),
        ));
    }
    if probes.iter().any(|&n| n < p + 1) {
        return Err(Error::InvalidParameter(format!(
            "probes must be >= p + 1 = {}",
            p + 1
        )));
    }
    let model = seq.asymptotic_class();
    let bits = 128;
    let mut out = Vec::with_capacity(probes.len());
    for &n in probes {
        let w = seq.value_bits(n, bits)?;
        let ratio = match model {
            AsymptoticClass::Power { exponent, constant } => {
                let m = Float::with_val(bits, n).ln() * exponent;
                (w.ln() - m).exp().to_f64() / constant
            }
            AsymptoticClass::Exponential { rate, constant } => {
                let r = w.ln() - Float::with_val(bits, rate) * n;
                r.exp().to_f64() / constant
            }
        };
        out.push(AsymptoticProbe { n, ratio });
    }
    let mut flags = Vec::new();
    let (monotone, converging) = trend(&out.iter().map(|p| p.ratio).collect::<Vec<_>>());
    if !monotone {
        flags.push("ratios are not monotone across probes".to_string());
    }
    if !converging {
        flags.push("ratio steps are not shrinking; limit not evident".to_string());
    }
    if out.iter().any(|p| !(p.ratio.is_finite() && p.ratio > 0.0)) {
        flags.push("non-finite or non-positive ratio".to_string());
    }
    Ok(AsymptoticReport {
        model,
        probes: out,
        monotone,
        converging,
        flags,
    })
}

fn trend(r: &[f64]) -> (bool, bool) {
    let d: Vec<f64> = r.windows(2).map(|w| w[1] - w[0]).collect();
    let monotone = d.iter().all(|&x| x >= 0.0) || d.iter().all(|&x| x <= 0.0);
    let converging = d.windows(2).all(|w| w[1].abs() <= w[0].abs());
    (monotone, converging)
}

/// Deviation of `m_n` from `(2/β)^{2/β} n^{2/β}` at one index.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MomentProbe {
    pub n: u64,
    pub deviation: f64,
    /// `n · deviation`
    pub scaled: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MomentReport {
    pub beta: RealParam,
    pub probes: Vec<MomentProbe>,
    pub decreasing: bool,
    /// Observed constant `C` with `deviation <= C/n` on the probes.
    pub observed_c: f64,
}

/// `m_n = Γ(a(n+1))/Γ(an)` with `a = 2/β`, `m_0 = 0`.
pub fn moment(n: u64, beta: &RealParam, bits: u32) -> Result<Float> {
    if !beta.is_positive() {
        return Err(Error::InvalidParameter(format!(
            "beta must be > 0, got {beta}"
        )));
    }
    moment_ratio(n, &a_param(beta, bits + 64), bits)
}

/// Check `|m_n / ((2/β)^{2/β} n^{2/β}) - 1|` on increasing probes.
pub fn moment_asymptotics(beta: &RealParam, probes: &[u64], bits: u32) -> Result<MomentReport> {
    let a = 2u32 / beta.to_float(bits + 16);
    let mut out = Vec::new();
    for &n in probes {
        if n == 0 {
            return Err(Error::InvalidParameter("probes must be >= 1".into()));
        }
        let m = moment(n, beta, bits)?;
        let ln_model = Float::with_val(bits, a.ln_ref()) * &a + Float::with_val(bits, n).ln() * &a;
        let ratio = Float::with_val(bits, m.ln() - ln_model).exp();
        let dev = Float::with_val(bits, ratio - 1u32).abs().to_f64();
        out.push(MomentProbe {
            n,
            deviation: dev,
            scaled: dev * n as f64,
        });
    }
    let decreasing = out.windows(2).all(|w| w[1].deviation <= w[0].deviation);
    let observed_c = out.iter().map(|p| p.scaled).fold(0.0, f64::max);
    Ok(MomentReport {
        beta: beta.clone(),
        probes: out,
        decreasing,
        observed_c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::ulps_between;

    fn prec() -> Precision {
        Precision::default()
    }

    fn f(x: &Float) -> f64 {
        x.to_f64()
    }

    #[test]
    fn documented_values() {
        let c0 = make_weights(&SpaceSpec::classic(0), prec()).unwrap();
        assert_eq!(c0.value(0).unwrap(), 1);
        let c1 = make_weights(&SpaceSpec::classic(1), prec()).unwrap();
        assert_eq!(c1.value(3).unwrap(), 6);
        let t = make_weights(&SpaceSpec::theta("2*pi", "0", 0).unwrap(), prec()).unwrap();
        assert!((f(&t.value(0).unwrap()) - 0.5f64.exp()).abs() < 1e-15);
        let d = make_weights(&SpaceSpec::disk("1", 0).unwrap(), prec()).unwrap();
        assert!((f(&d.value(0).unwrap()) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn zero_action_below_p() {
        let w = make_weights(&SpaceSpec::classic(2), prec()).unwrap();
        assert_eq!(w.eval(1).unwrap(), Weight::ZeroAction);
        assert!(w.value(1).is_err());
        assert!(matches!(w.eval(2).unwrap(), Weight::Value(_)));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(SpaceSpec::disk("1/2", 0).is_err());
        assert!(SpaceSpec::disk("0.3", 0).is_err());
        assert!(SpaceSpec::generalized("0", 0).is_err());
        assert!(SpaceSpec::theta("-1", "0", 0).is_err());
        let e = SpaceSpec::disk("1/4", 0).unwrap_err().to_string();
        assert!(e.contains("nu"), "{e}");
    }

    #[test]
    fn exact_form_agrees_with_eval() {
        for spec in [SpaceSpec::classic(2), SpaceSpec::disk("3/2", 1).unwrap()] {
            let w = make_weights(&spec, prec()).unwrap();
            for n in 2..40 {
                let r = w.exact_form(n).unwrap();
                let v = w.value(n).unwrap();
                assert!(ulps_between(&v, &r.to_float(prec().bits() + 64), prec().bits()) <= 1.0);
            }
        }
    }

    #[test]
    fn generalized_beta_one_uses_exact_products() {
        // a = 2: ω_n² = m_{n+1} = (2n+2)(2n+3)
        let w = make_weights(&SpaceSpec::generalized("1", 0).unwrap(), prec()).unwrap();
        let r = w.exact_form(4).unwrap();
        assert_eq!(r.square(), Rational::from(10 * 11));
    }

    #[test]
    fn theta_is_geometric() {
        let w = make_weights(&SpaceSpec::theta("2*pi", "1/4", 2).unwrap(), prec()).unwrap();
        let bits = prec().bits();
        for n in 2..30 {
            let a = w.value(n).unwrap().ln();
            let b = w.value(n + 1).unwrap().ln();
            let step = Float::with_val(bits, b - a);
            assert!((step.to_f64() - 5.0).abs() < 1e-40);
        }
    }

    #[test]
    fn moment_documented_values() {
        let bits = 200;
        assert_eq!(moment(5, &"2".parse().unwrap(), bits).unwrap(), 5);
        let m = moment(1, &"4".parse().unwrap(), bits).unwrap();
        let pi = Float::with_val(bits, Constant::Pi);
        let expect = Float::with_val(bits, pi.recip_sqrt());
        assert!(Float::with_val(bits, m - expect).abs() < 1e-55);
        let m = moment(10_000, &"1".parse().unwrap(), bits).unwrap();
        assert!((m.to_f64() / 4e8 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn asymptotic_examples() {
        let c = make_weights(&SpaceSpec::classic(0), prec()).unwrap();
        let rep = asymptotic_check(&c, &[100, 1000, 10_000]).unwrap();
        assert!((rep.probes[2].ratio - 1.0).abs() < 1e-2);
        assert!(rep.monotone && rep.converging && rep.flags.is_empty());

        let d = make_weights(&SpaceSpec::disk("1.5", 1).unwrap(), prec()).unwrap();
        let rep = asymptotic_check(&d, &[1000, 10_000]).unwrap();
        let (a, b) = (rep.probes[0].ratio, rep.probes[1].ratio);
        assert!(((a - b) / b).abs() < 1e-2);
    }

    #[test]
    fn serde_round_trip() {
        let s = SpaceSpec::theta("2*pi", "0", 1).unwrap();
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(
            j,
            r#"{"kind":"theta_fock_bargmann","nu":"2*pi","alpha":"0","p":1}"#
        );
        let back: SpaceSpec = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
        let bad = serde_json::from_str::<SpaceSpec>(r#"{"kind":"poincare_disk","nu":"0.25"}"#);
        assert!(bad.is_err());
    }
}
