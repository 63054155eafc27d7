//! Exact real parameters: a rational, optionally times pi.

use std::fmt;
use std::str::FromStr;

use rug::float::Constant;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A real number `q` or `q*pi` with `q` rational.
///
/// Accepted spellings: `"3/2"`, `"1.5"`, `"-2.5e-1"`, `"pi"`, `"2*pi"`, `"pi/3"`, `"3/4*pi"`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RealParam {
    q: Rational,
    times_pi: bool,
}

impl RealParam {
    pub fn rational(q: impl Into<Rational>) -> Self {
        RealParam {
            q: q.into(),
            times_pi: false,
        }
    }

    pub fn pi_multiple(q: impl Into<Rational>) -> Self {
        let q = q.into();
        let times_pi = q != 0;
        RealParam { q, times_pi }
    }

    /// Exact decimal expansion of an `f64`.
    pub fn from_f64(x: f64) -> Result<Self> {
        Rational::from_f64(x)
            .map(Self::rational)
            .ok_or_else(|| Error::InvalidParameter(format!("{x} is not finite")))
    }

    pub fn coefficient(&self) -> &Rational {
        &self.q
    }

    pub fn is_pi_multiple(&self) -> bool {
        self.times_pi
    }

    /// The rational value, if the parameter has no pi factor.
    pub fn as_rational(&self) -> Option<&Rational> {
        (!self.times_pi).then_some(&self.q)
    }

    pub fn to_float(&self, bits: u32) -> Float {
        let q = Float::with_val(bits + 16, &self.q);
        if self.times_pi {
            Float::with_val(bits, q * Float::with_val(bits + 16, Constant::Pi))
        } else {
            Float::with_val(bits, q)
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.to_float(64).to_f64()
    }

    pub fn is_positive(&self) -> bool {
        self.q > 0
    }

    pub fn cmp_zero(&self) -> std::cmp::Ordering {
        self.q.cmp0()
    }
}

fn parse_decimal(s: &str) -> Option<Rational> {
    if s.contains('/') {
        let (a, b) = s.split_once('/')?;
        let a = parse_decimal(a.trim())?;
        let b = parse_decimal(b.trim())?;
        if b == 0 {
            return None;
        }
        return Some(a / b);
    }
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let n = Integer::from_str(if digits.is_empty() { "0" } else { &digits }).ok()?;
    let mut r = Rational::from(n);
    let shift = exp - frac.len() as i32;
    let scale = Integer::from(Integer::u_pow_u(10, shift.unsigned_abs()));
    if shift >= 0 {
        r *= scale;
    } else {
        r /= scale;
    }
    if neg {
        r = -r;
    }
    Some(r)
}

impl FromStr for RealParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("cannot parse {s:?} as a real parameter"));
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return Err(bad());
        }
        if let Some(pos) = t.find("pi") {
            let before = &t[..pos];
            let after = &t[pos + 2..];
            let mut q = match before {
                "" => Rational::from(1),
                "-" => Rational::from(-1),
                b => parse_decimal(b.strip_suffix('*').unwrap_or(b)).ok_or_else(bad)?,
            };
            if !after.is_empty() {
                if let Some(den) = after.strip_prefix('/') {
                    let d = parse_decimal(den).ok_or_else(bad)?;
                    if d == 0 {
                        return Err(bad());
                    }
                    q /= d;
                } else if let Some(f) = after.strip_prefix('*') {
                    q *= parse_decimal(f).ok_or_else(bad)?;
                } else {
                    return Err(bad());
                }
            }
            return Ok(RealParam::pi_multiple(q));
        }
        parse_decimal(&t).map(RealParam::rational).ok_or_else(bad)
    }
}

impl fmt::Display for RealParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.times_pi {
            return write!(f, "{}", self.q);
        }
        if self.q == 1 {
            write!(f, "pi")
        } else {
            write!(f, "{}*pi", self.q)
        }
    }
}

impl Serialize for RealParam {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for RealParam {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Str(String),
            Int(i64),
            Num(f64),
        }
        match Raw::deserialize(d)? {
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::Int(i) => Ok(RealParam::rational(i)),
            Raw::Num(x) => RealParam::from_f64(x).map_err(serde::de::Error::custom),
        }
    }
}
