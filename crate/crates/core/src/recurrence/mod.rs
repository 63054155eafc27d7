//! The three-term recurrence `w_{n-1}u_{n-1} + w_n u_{n+1} = λ u_n`, `u_1 = 1`,
//! `u_2 = λ/w_1`, whose solution is the formal eigenvector of the Jacobi
//! operator with off-diagonal `w_n` and zero diagonal.
//!
//! Indices here are Jacobi indices `n >= 1`. For weights taken from a space
//! with shift order `p`, `w_n = ω_{n+p-1,p}` and the Jacobi coordinate `n`
//! sits on the basis vector `P_{n+p-1}`; [`JacobiWeights::index_offset`]
//! records that shift.

pub mod certificate;
pub mod hypotheses;

use std::io::Write;

use rug::{Complex, Float, Rational};

use crate::error::{Error, Result};
use crate::precision::{fmt_float, Precision};
use crate::weights::{AsymptoticClass, Radical, WeightSequence};

pub use certificate::{Certificate, Hypothesis, Verdict, Witness};
pub use hypotheses::{
    certify_l2, check_alt311, check_hyp1, check_hyp2, check_hyp3, damping_analysis,
    theta_threshold, DampingAnalysis, GammaChoice, GammaSeq, L2Report, ThetaThreshold,
};

#[derive(Clone, Debug)]
enum Source {
    Sequence(WeightSequence),
    Raw(Vec<Float>),
    Constant(Float),
}

/// Off-diagonal weights `w_1, w_2, ...` of a Jacobi operator.
#[derive(Clone, Debug)]
pub struct JacobiWeights {
    source: Source,
    precision: Precision,
}

impl JacobiWeights {
    /// `w_n = ω_{n+p-1,p}`.
    pub fn from_sequence(seq: &WeightSequence) -> Self {
        JacobiWeights {
            source: Source::Sequence(seq.clone()),
            precision: seq.precision(),
        }
    }

    /// Explicit positive weights `w_1..w_len`.
    pub fn raw(values: Vec<Float>, precision: Precision) -> Result<Self> {
        if let Some(i) = values.iter().position(|w| !w.is_finite() || *w <= 0) {
            return Err(Error::InvalidParameter(format!(
                "weight w_{} = {} is not positive",
                i + 1,
                values[i]
            )));
        }
        Ok(JacobiWeights {
            source: Source::Raw(values),
            precision,
        })
    }

    /// `w_n = c` for all `n`.
    pub fn constant(c: Float, precision: Precision) -> Result<Self> {
        if !c.is_finite() || c <= 0 {
            return Err(Error::InvalidParameter(format!(
                "constant weight {c} is not positive"
            )));
        }
        Ok(JacobiWeights {
            source: Source::Constant(c),
            precision,
        })
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn with_precision(&self, precision: Precision) -> Self {
        let source = match &self.source {
            Source::Sequence(s) => {
                Source::Sequence(crate::weights::make_weights(s.spec(), precision).expect("valid"))
            }
            other => other.clone(),
        };
        JacobiWeights { source, precision }
    }

    pub fn sequence(&self) -> Option<&WeightSequence> {
        match &self.source {
            Source::Sequence(s) => Some(s),
            _ => None,
        }
    }

    /// Natural index of Jacobi coordinate `n` is `n + index_offset`.
    pub fn index_offset(&self) -> i64 {
        match &self.source {
            Source::Sequence(s) => s.p() as i64 - 1,
            _ => 0,
        }
    }

    /// Number of available weights, `None` when unbounded.
    pub fn available(&self) -> Option<usize> {
        match &self.source {
            Source::Raw(v) => Some(v.len()),
            _ => None,
        }
    }

    fn check_len(&self, count: usize) -> Result<()> {
        if let Some(a) = self.available() {
            if count > a {
                return Err(Error::Dimension(format!(
                    "{count} weights requested but only {a} were supplied"
                )));
            }
        }
        Ok(())
    }

    /// `w_n` at `bits`.
    pub fn w(&self, n: usize, bits: u32) -> Result<Float> {
        if n == 0 {
            return Err(Error::Range("Jacobi weights start at index 1".into()));
        }
        self.check_len(n)?;
        Ok(match &self.source {
            Source::Sequence(s) => s.value_bits(n as u64 + s.p() as u64 - 1, bits)?,
            Source::Raw(v) => Float::with_val(bits, &v[n - 1]),
            Source::Constant(c) => Float::with_val(bits, c),
        })
    }

    /// `w_1..w_count` at `bits`.
    pub fn tabulate(&self, count: usize, bits: u32) -> Result<Vec<Float>> {
        self.tabulate_range(1, count, bits)
    }

    /// `w_lo..=w_hi` at `bits`.
    pub fn tabulate_range(&self, lo: usize, hi: usize, bits: u32) -> Result<Vec<Float>> {
        if lo == 0 {
            return Err(Error::Range("Jacobi weights start at index 1".into()));
        }
        self.check_len(hi)?;
        if hi < lo {
            return Ok(Vec::new());
        }
        match &self.source {
            Source::Sequence(s) => {
                let p = s.p() as u64;
                s.tabulate(lo as u64 + p - 1, hi as u64 + p - 1, bits)
            }
            Source::Raw(v) => Ok(v[lo - 1..hi]
                .iter()
                .map(|w| Float::with_val(bits, w))
                .collect()),
            Source::Constant(c) => Ok(vec![Float::with_val(bits, c); hi - lo + 1]),
        }
    }

    /// Exact value of `w_n`, when representable as `r·√s`.
    pub fn exact(&self, n: usize) -> Option<Radical> {
        match &self.source {
            Source::Sequence(s) => s.exact_form(n as u64 + s.p() as u64 - 1),
            Source::Raw(v) => v
                .get(n.checked_sub(1)?)
                .and_then(|w| w.to_rational())
                .map(Radical::rational),
            Source::Constant(c) => c.to_rational().map(Radical::rational),
        }
    }

    /// Whether every weight is known exactly.
    pub fn is_exact(&self) -> bool {
        match &self.source {
            Source::Sequence(s) => s.has_exact_form(),
            _ => true,
        }
    }

    /// Growth class of `w_n`, when known.
    pub fn growth(&self) -> Option<AsymptoticClass> {
        match &self.source {
            Source::Sequence(s) => Some(s.asymptotic_class()),
            Source::Constant(c) => Some(AsymptoticClass::Power {
                exponent: 0.0,
                constant: c.to_f64(),
            }),
            Source::Raw(_) => None,
        }
    }

    pub fn label(&self) -> String {
        match &self.source {
            Source::Sequence(s) => s.label(),
            Source::Raw(v) => format!("raw({} weights)", v.len()),
            Source::Constant(c) => format!("constant({})", fmt_float(c, 17)),
        }
    }
}

/// `u_1..u_N` together with `u_{N+1}`.
#[derive(Clone, Debug)]
pub struct RecurrenceSolution {
    pub lambda: Complex,
    /// `u[i]` is `u_{i+1}`; values carry `internal_bits` of precision.
    pub u: Vec<Complex>,
    /// `u_{N+1}`, one step past the truncation.
    pub u_next: Complex,
    /// `w_1..w_N` at `internal_bits`.
    pub weights: Vec<Float>,
    /// `partial_sums[k-1] = Σ_{n<=k} |u_n|²`.
    pub partial_sums: Vec<Float>,
    pub precision: Precision,
    pub internal_bits: u32,
    /// Bits on which the two independent runs agree, relative to the term scale.
    pub confirmed_bits: f64,
    pub index_offset: i64,
    pub label: String,
    pub gamma_used: Option<String>,
}

fn cabs(z: &Complex) -> Float {
    Float::with_val(z.prec().0.max(64), z.abs_ref())
}

fn run(w: &[Float], lambda: &Complex, n: usize, bits: u32) -> Result<Vec<Complex>> {
    let lam = Complex::with_val(bits, lambda);
    let mut u = Vec::with_capacity(n + 1);
    u.push(Complex::with_val(bits, 1));
    u.push(Complex::with_val(bits, &lam / &w[0]));
    for k in 2..=n {
        // u_{k+1} = (λ u_k - w_{k-1} u_{k-1}) / w_k
        let mut t = Complex::with_val(bits, &lam * &u[k - 1]);
        t -= Complex::with_val(bits, &u[k - 2] * &w[k - 2]);
        t /= &w[k - 1];
        if !t.real().is_finite() || !t.imag().is_finite() {
            return Err(Error::Precision(format!(
                "recurrence overflowed at index {} at {bits} bits",
                k + 1
            )));
        }
        u.push(t);
    }
    Ok(u)
}

/// `max_n log2((|w_{n-1}u_{n-1}| + |w_n u_{n+1}|) / (1 + |λ u_n|))` clamped at 0.
fn headroom(w: &[Float], lambda: &Complex, u: &[Complex]) -> f64 {
    let lam = cabs(lambda);
    let mut h: f64 = 0.0;
    for k in 2..u.len() {
        let a = Float::with_val(64, cabs(&u[k - 2]) * &w[k - 2]);
        let b = Float::with_val(64, cabs(&u[k]) * &w[k - 1]);
        let s = Float::with_val(64, cabs(&u[k - 1]) * &lam) + 1u32;
        let r = ((a + b) / s).to_f64();
        if r.is_finite() && r > 1.0 {
            h = h.max(r.log2());
        }
    }
    h
}

/// Solve the recurrence for `u_1..u_N` (and `u_{N+1}`).
///
/// The run uses at least twice the working precision, more when the terms of
/// the relation dwarf `1 + |λ u_n|`, and is confirmed by a second run at
/// double that precision.
pub fn solve_recurrence(
    weights: &JacobiWeights,
    lambda: &Complex,
    n: usize,
) -> Result<RecurrenceSolution> {
    if n < 2 {
        return Err(Error::Dimension(format!(
            "recurrence needs N >= 2, got {n}"
        )));
    }
    let prec = weights.precision();
    let bits = prec.bits();
    let mut b1 = 2 * bits;
    let w1 = weights.tabulate(n, b1)?;
    let mut u1 = run(&w1, lambda, n, b1)?;
    let h = headroom(&w1, lambda, &u1).ceil() as u32;
    let (w1, u1) = if bits + h + 32 > b1 {
        b1 = bits + h + 32;
        let w = weights.tabulate(n, b1)?;
        u1 = run(&w, lambda, n, b1)?;
        (w, u1)
    } else {
        (w1, u1)
    };
    let b2 = 2 * b1;
    let w2 = weights.tabulate(n, b2)?;
    let u2 = run(&w2, lambda, n, b2)?;

    let lam_abs = cabs(lambda);
    let mut worst = f64::INFINITY;
    for k in 0..=n {
        let d = Float::with_val(64, cabs(&Complex::with_val(b2, &u1[k] - &u2[k])));
        // natural scale of u_{k+1}
        let mut scale = cabs(&u2[k]);
        if k >= 1 {
            let mut s = Float::with_val(64, cabs(&u2[k - 1]) * &lam_abs);
            if k >= 2 {
                s += Float::with_val(64, cabs(&u2[k - 2]) * &w2[k - 2]);
            }
            s /= &w2[k - 1];
            if s > scale {
                scale = s;
            }
        }
        if d.is_zero() {
            continue;
        }
        let agree = (Float::with_val(64, scale / &d)).log2().to_f64();
        if agree < bits as f64 {
            return Err(Error::Precision(format!(
                "recurrence is unstable at index {}: runs at {b1} and {b2} bits agree to {:.1} bits only",
                k + 1,
                agree
            )));
        }
        worst = worst.min(agree);
    }

    let mut u = u1;
    let u_next = u.pop().expect("N+1 values");
    let mut partial_sums = Vec::with_capacity(n);
    let mut acc = Float::with_val(b1, 0);
    for z in &u {
        acc += Float::with_val(b1, z.norm_ref());
        partial_sums.push(acc.clone());
    }
    Ok(RecurrenceSolution {
        lambda: Complex::with_val(b1, lambda),
        u,
        u_next,
        weights: w1,
        partial_sums,
        precision: prec,
        internal_bits: b1,
        confirmed_bits: worst,
        index_offset: weights.index_offset(),
        label: weights.label(),
        gamma_used: None,
    })
}

/// Residuals of the defining relations.
#[derive(Clone, Debug)]
pub struct ResidualReport {
    /// `max_n |w_{n-1}u_{n-1} + w_n u_{n+1} - λu_n| / ((1 + |λu_n|) 2^-bits)` for `2 <= n <= N-1`.
    pub interior_ulps: f64,
    pub worst_index: usize,
    /// `|w_1 u_2 - λ|` in ulps of `1 + |λ|`.
    pub start_ulps: f64,
}

impl RecurrenceSolution {
    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// `u_n` for `1 <= n <= N+1`.
    pub fn get(&self, n: usize) -> &Complex {
        if n == self.u.len() + 1 {
            &self.u_next
        } else {
            &self.u[n - 1]
        }
    }

    /// `u_n` rounded to the working precision.
    pub fn u_working(&self, n: usize) -> Complex {
        Complex::with_val(self.precision.bits(), self.get(n))
    }

    fn relation(&self, n: usize) -> Complex {
        let b = 2 * self.internal_bits + 8;
        let mut r = Complex::with_val(b, self.get(n - 1) * &self.weights[n - 2]);
        r += Complex::with_val(b, self.get(n + 1) * &self.weights[n - 1]);
        r -= Complex::with_val(b, self.get(n) * &self.lambda);
        r
    }

    /// Residual of `w_{n-1}u_{n-1} + w_n u_{n+1} - λ u_n` at `2 <= n <= N`.
    pub fn residual_at(&self, n: usize) -> Complex {
        self.relation(n)
    }

    pub fn residuals(&self) -> ResidualReport {
        let bits = self.precision.bits();
        let ulp = Float::with_val(64, 1) >> bits as i32;
        let mut worst = 0.0;
        let mut at = 0;
        let n = self.u.len();
        for k in 2..n {
            let r = cabs(&self.relation(k));
            let s = Float::with_val(64, cabs(self.get(k)) * cabs(&self.lambda)) + 1u32;
            let v = (r / (s * &ulp)).to_f64();
            if v > worst {
                worst = v;
                at = k;
            }
        }
        let b = 2 * self.internal_bits;
        let d = Complex::with_val(b, &self.u[1] * &self.weights[0]) - &self.lambda;
        let s = cabs(&self.lambda) + 1u32;
        let start = (cabs(&Complex::with_val(b, d)) / (s * &ulp)).to_f64();
        ResidualReport {
            interior_ulps: worst,
            worst_index: at,
            start_ulps: start,
        }
    }

    /// `|u_n|` as a 64-bit float.
    pub fn abs_f64(&self, n: usize) -> f64 {
        cabs(self.get(n)).to_f64()
    }

    /// Write the trace `n,u_re,u_im,|u|²,partial_sum`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let digits = self.precision.print_digits();
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "u_re", "u_im", "|u|²", "partial_sum"])?;
        for (i, z) in self.u.iter().enumerate() {
            let zw = Complex::with_val(self.precision.bits(), z);
            let nrm = Float::with_val(self.precision.bits(), z.norm_ref());
            w.write_record([
                (i + 1).to_string(),
                fmt_float(zw.real(), digits),
                fmt_float(zw.imag(), digits),
                fmt_float(&nrm, digits),
                fmt_float(
                    &Float::with_val(self.precision.bits(), &self.partial_sums[i]),
                    digits,
                ),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `λ = r·e^{2πi·t}` with `t` rational, at `bits`.
pub fn polar_lambda(r: &Float, turn: &Rational, bits: u32) -> Complex {
    use rug::float::Constant;
    let g = bits + 32;
    let angle = Float::with_val(g, Constant::Pi) * 2u32 * Float::with_val(g, turn);
    let (s, c) = angle.sin_cos(Float::new(g));
    let rr = Float::with_val(g, r);
    Complex::with_val(bits, (c * &rr, s * rr))
}
