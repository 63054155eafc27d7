//! Log-gamma and gamma ratios with explicit error bounds.
//!
//! `ln Γ` is evaluated by the Stirling series with exact Bernoulli numbers
//! after shifting the argument upward; the truncation error is bounded by the
//! first omitted term, which is valid for real positive arguments.

use std::sync::OnceLock;

use rug::float::{Constant, Round};
use rug::ops::PowAssign;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};

/// Number of Stirling correction terms available.
const TERMS: usize = 60;

/// `B_{2k}` for `k = 0..=TERMS + 1`.
fn bernoulli_even() -> &'static [Rational] {
    static TABLE: OnceLock<Vec<Rational>> = OnceLock::new();
    TABLE.get_or_init(|| {
        // Akiyama-Tanigawa.
        let n = 2 * (TERMS + 1);
        let mut a: Vec<Rational> = Vec::with_capacity(n + 1);
        let mut out = Vec::with_capacity(TERMS + 2);
        for m in 0..=n {
            a.push(Rational::from((1, m as u64 + 1)));
            for j in (1..=m).rev() {
                let d = Rational::from(&a[j - 1] - &a[j]);
                a[j - 1] = d * j as u64;
            }
            if m % 2 == 0 {
                out.push(a[0].clone());
            }
        }
        out
    })
}

/// Exact Bernoulli number `B_{2k}` for small `k`.
pub fn bernoulli_2k(k: usize) -> Option<&'static Rational> {
    bernoulli_even().get(k)
}

/// A value with an absolute error bound.
#[derive(Clone, Debug)]
pub struct Bounded {
    pub value: Float,
    pub abs_err: Float,
}

impl Bounded {
    /// Relative error bound, `abs_err / |value|` (infinite for zero values).
    pub fn rel_err(&self) -> Float {
        let v = Float::with_val(64, self.value.abs_ref());
        Float::with_val(64, &self.abs_err / v)
    }
}

fn ln_abs_f64(q: &Rational) -> f64 {
    let f = Float::with_val(64, q).abs();
    f.ln().to_f64()
}

/// Shift threshold: for `y >= x0` the omitted Stirling term is below `2^-bits`.
fn shift_threshold(bits: u32) -> f64 {
    let k = TERMS + 1;
    let b = ln_abs_f64(&bernoulli_even()[k]);
    let denom = ((2 * k) as f64 * (2 * k - 1) as f64).ln();
    let need = (bits as f64 + 8.0) * std::f64::consts::LN_2;
    ((b + need - denom) / (2 * k - 1) as f64)
        .exp()
        .ceil()
        .max(8.0)
}

fn exp_bits(x: &Float) -> i32 {
    if x.is_zero() {
        0
    } else {
        x.get_exp().unwrap_or(0)
    }
}

/// `ln Γ(x)` for finite `x > 0`, with absolute error at most about `2^-bits`.
pub fn ln_gamma(x: &Float, bits: u32) -> Result<Bounded> {
    if !x.is_finite() || *x <= 0 {
        return Err(Error::InvalidParameter(format!(
            "ln_gamma needs a finite positive argument, got {x}"
        )));
    }
    let x0 = shift_threshold(bits);
    let xf = x.to_f64();
    let shift: u64 = if xf < x0 { (x0 - xf).ceil() as u64 } else { 0 };

    let mag = exp_bits(&Float::with_val(64, xf + shift as f64 + 2.0)).max(1) as u32;
    let wp = bits + 32 + 2 * mag + 64 - (shift.max(1)).leading_zeros();
    let yp = wp.max(x.prec() + 70);
    let y = Float::with_val(yp, x + shift);

    let eps = Float::with_val(64, 1) >> (wp as i32 - 1);

    // (y - 1/2) ln y - y + ln(2 pi)/2
    let ln_y = Float::with_val(wp, y.ln_ref());
    let half = Float::with_val(wp, 0.5);
    let mut main = Float::with_val(wp, &y - &half) * &ln_y;
    main -= &y;
    let ln2pi = Float::with_val(wp, Constant::Pi) * 2u32;
    main += ln2pi.ln() / 2u32;
    let scale = Float::with_val(64, y.to_f64() * (ln_y.to_f64().abs() + 1.0) + 4.0);
    let mut err = Float::with_val(64, &eps * &scale) * 8u32;

    // Σ B_2k / (2k(2k-1) y^(2k-1))
    let bern = bernoulli_even();
    let inv = Float::with_val(wp, y.recip_ref());
    let inv2 = Float::with_val(wp, inv.square_ref());
    let mut pow = inv.clone();
    let mut series = Float::with_val(wp, 0);
    let target = Float::with_val(64, 1) >> (bits as i32 + 8);
    let mut remainder: Option<Float> = None;
    for k in 1..=TERMS {
        let c = Rational::from(&bern[k] / Integer::from((2 * k) * (2 * k - 1)));
        let term = Float::with_val(wp, &c * &pow);
        series += &term;
        pow *= &inv2;
        let next = Rational::from(&bern[k + 1] / Integer::from((2 * k + 2) * (2 * k + 1)));
        let bound = Float::with_val(64, &next * &pow).abs();
        if bound <= target {
            remainder = Some(bound);
            break;
        }
    }
    let remainder = remainder.ok_or_else(|| {
        Error::Precision(format!(
            "Stirling series did not reach 2^-{bits} at argument {x}"
        ))
    })?;
    err += remainder;
    err += Float::with_val(64, &eps * (TERMS as u32 * 4));

    let mut value = main + series;
    if shift > 0 {
        let mut prod = Float::with_val(wp, x);
        for i in 1..shift {
            prod *= Float::with_val(yp, x + i);
        }
        let lp = prod.ln();
        let rel = Float::with_val(64, &eps * (2 * shift as u32 + 4));
        err += Float::with_val(64, &rel * Float::with_val(64, lp.abs_ref()));
        err += rel;
        value -= lp;
    }
    err *= 2u32;
    Ok(Bounded {
        value,
        abs_err: err,
    })
}

/// `Γ(a) / Γ(b)` for positive `a`, `b`, with relative error at most `rel_tol`.
///
/// Working precision is doubled up to `max_bits`; a precision error is returned
/// when the tolerance is still not met.
pub fn gamma_ratio(a: &Float, b: &Float, rel_tol: &Float, max_bits: u32) -> Result<Bounded> {
    if *rel_tol <= 0 {
        return Err(Error::InvalidParameter(
            "relative tolerance must be positive".into(),
        ));
    }
    let need = (-rel_tol.clone().log2()).to_f64().ceil().max(1.0) as u32;
    let mut bits = need + 16;
    if bits > max_bits {
        return Err(Error::Precision(format!(
            "relative tolerance {} needs about {bits} bits, limit is {max_bits}",
            rel_tol.to_f64()
        )));
    }
    loop {
        let la = ln_gamma(a, bits)?;
        let lb = ln_gamma(b, bits)?;
        let wp = la.value.prec().max(lb.value.prec());
        let diff = Float::with_val(wp, &la.value - &lb.value);
        let dl = Float::with_val(64, diff.abs_ref());
        let value = diff.exp();
        let d = Float::with_val(64, &la.abs_err + &lb.abs_err);
        let eps = Float::with_val(64, 1) >> (wp as i32 - 3);
        // |exp(d) - 1| <= 2d for d < 1
        let rel = (d + Float::with_val(64, &eps * (dl + 2u32))) * 2u32;
        let abs_err = Float::with_val(64, &rel * Float::with_val(64, value.abs_ref()));
        if rel <= *rel_tol {
            return Ok(Bounded { value, abs_err });
        }
        if bits >= max_bits {
            return Err(Error::Precision(format!(
                "Γ({})/Γ({}) reached relative error {} > {} at {} bits",
                a.to_f64(),
                b.to_f64(),
                rel.to_f64(),
                rel_tol.to_f64(),
                bits
            )));
        }
        bits = (bits * 2).min(max_bits);
    }
}

/// The moment-type ratio `Γ(a(n+1)) / Γ(an)` with `m_0 = 0`.
///
/// When `a` is a positive integer `k` the ratio is the exact product
/// `kn (kn+1) ... (kn+k-1)`.
pub fn moment_ratio(n: u64, a: &AParam, bits: u32) -> Result<Float> {
    if n == 0 {
        return Ok(Float::with_val(bits, 0));
    }
    match a {
        AParam::Integer(k) => {
            let lo = Integer::from(*k) * n;
            let mut prod = Integer::from(1);
            for i in 0..*k {
                prod *= Integer::from(&lo + i);
            }
            Ok(Float::with_val(bits, prod))
        }
        AParam::Rational(q) => {
            let hi = Float::with_val(bits + 64, Rational::from(q * (n + 1)));
            let lo = Float::with_val(bits + 64, Rational::from(q * n));
            ratio_at(&hi, &lo, bits)
        }
        AParam::Real(f) => {
            let p = bits + 64 + 64 - n.leading_zeros();
            let hi = Float::with_val(p, f * (n + 1));
            let lo = Float::with_val(p, f * n);
            ratio_at(&hi, &lo, bits)
        }
    }
}

fn ratio_at(hi: &Float, lo: &Float, bits: u32) -> Result<Float> {
    let tol = Float::with_val(64, 1) >> (bits as i32 + 8);
    let r = gamma_ratio(hi, lo, &tol, 4 * bits + 256)?;
    Ok(Float::with_val_round(bits, &r.value, Round::Nearest).0)
}

/// The exponent `a = 2/β` in its most exact available form.
#[derive(Clone, Debug, PartialEq)]
pub enum AParam {
    Integer(u32),
    Rational(Rational),
    Real(Float),
}

impl AParam {
    pub fn to_float(&self, bits: u32) -> Float {
        match self {
            AParam::Integer(k) => Float::with_val(bits, *k),
            AParam::Rational(q) => Float::with_val(bits, q),
            AParam::Real(f) => Float::with_val(bits, f),
        }
    }
}

/// `Γ(x)` for a positive rational, exact path used by small closed forms.
pub fn gamma_float(x: &Float, bits: u32) -> Result<Float> {
    let l = ln_gamma(x, bits + 16)?;
    let mut v = l.value;
    v.exp_mut();
    Ok(Float::with_val(bits, v))
}

/// `x^k` for a Float and integer `k`.
pub fn powi(x: &Float, k: i32) -> Float {
    let mut y = x.clone();
    y.pow_assign(k);
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_small_values() {
        let b = bernoulli_even();
        assert_eq!(b[0], Rational::from(1));
        assert_eq!(b[1], Rational::from((1, 6)));
        assert_eq!(b[2], Rational::from((-1, 30)));
        assert_eq!(b[3], Rational::from((1, 42)));
        assert_eq!(b[6], Rational::from((-691, 2730)));
    }

    #[test]
    fn ln_gamma_matches_mpfr() {
        let bits = 200;
        for x in [
            "0.5",
            "1",
            "1.5",
            "3.25",
            "17",
            "123.456",
            "98765.4321",
            "1e-3",
        ] {
            let xf = Float::with_val(bits, Float::parse(x).unwrap());
            let ours = ln_gamma(&xf, bits).unwrap();
            let reference = Float::with_val(bits + 64, xf.ln_gamma_ref());
            let d = Float::with_val(bits + 64, &ours.value - &reference).abs();
            assert!(
                d <= ours.abs_err,
                "x={x}: diff {d} > bound {}",
                ours.abs_err
            );
            assert!(
                ours.abs_err < Float::with_val(64, 1) >> (bits as i32 - 4),
                "x={x}"
            );
        }
    }

    #[test]
    fn ln_gamma_of_integers_is_log_factorial() {
        let bits = 160;
        let ten_fact = Float::with_val(bits + 64, Integer::from(Integer::factorial(10))).ln();
        let ours = ln_gamma(&Float::with_val(bits, 11), bits).unwrap();
        let d = Float::with_val(bits + 64, &ours.value - &ten_fact).abs();
        assert!(d <= ours.abs_err);
    }

    #[test]
    fn gamma_ratio_half_integers() {
        // Γ(5/2)/Γ(1/2) = 3/4
        let tol = Float::with_val(64, 1e-40);
        let r = gamma_ratio(
            &Float::with_val(200, 2.5),
            &Float::with_val(200, 0.5),
            &tol,
            1024,
        )
        .unwrap();
        let d = Float::with_val(200, &r.value - 0.75f64).abs();
        assert!(d <= r.abs_err && d < 1e-40);
    }

    #[test]
    fn gamma_ratio_reports_unreachable_target() {
        let tol = Float::with_val(64, 1e-300);
        let e = gamma_ratio(
            &Float::with_val(64, 2.5),
            &Float::with_val(64, 0.5),
            &tol,
            200,
        );
        assert!(matches!(e, Err(Error::Precision(_))));
    }

    #[test]
    fn integer_moment_ratio_is_exact() {
        // a = 1: m_n = n, a = 2: m_n = 2n(2n+1)
        for n in 1..20u64 {
            assert_eq!(moment_ratio(n, &AParam::Integer(1), 100).unwrap(), n);
            assert_eq!(
                moment_ratio(n, &AParam::Integer(2), 100).unwrap(),
                2 * n * (2 * n + 1)
            );
        }
    }
}
