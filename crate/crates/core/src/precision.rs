//! Working precision and ulp arithmetic.

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variable overriding the default number of decimal digits.
pub const DIGITS_ENV: &str = "SHIFTLAB_DIGITS";

const LOG2_10: f64 = std::f64::consts::LOG2_10;

/// Binary working precision, constructed from decimal digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Precision {
    bits: u32,
}

impl Precision {
    pub const DEFAULT_DIGITS: u32 = 50;
    /// Extra bits carried by intermediate computations.
    pub const GUARD_BITS: u32 = 64;

    pub fn from_digits(digits: u32) -> Result<Self> {
        if !(8..=20_000).contains(&digits) {
            return Err(Error::InvalidParameter(format!(
                "precision must be between 8 and 20000 decimal digits, got {digits}"
            )));
        }
        Ok(Precision {
            bits: (digits as f64 * LOG2_10).ceil() as u32,
        })
    }

    pub fn from_bits(bits: u32) -> Result<Self> {
        if !(24..=70_000).contains(&bits) {
            return Err(Error::InvalidParameter(format!(
                "precision must be between 24 and 70000 bits, got {bits}"
            )));
        }
        Ok(Precision { bits })
    }

    /// Default precision, honouring `SHIFTLAB_DIGITS` when set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(DIGITS_ENV) {
            Ok(s) => {
                let d: u32 = s.trim().parse().map_err(|_| {
                    Error::Config(format!("{DIGITS_ENV}={s:?} is not a digit count"))
                })?;
                Self::from_digits(d)
            }
            Err(_) => Ok(Self::default()),
        }
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    /// Decimal digits represented (rounded down).
    pub fn digits(self) -> u32 {
        (self.bits as f64 / LOG2_10).floor() as u32
    }

    /// Precision used for intermediate values that are rounded back to `bits`.
    pub fn guarded(self) -> u32 {
        self.bits + Self::GUARD_BITS
    }

    /// Relative size of one unit in the last place, `2^(1-bits)`.
    pub fn epsilon(self) -> Float {
        Float::with_val(64, 1) >> (self.bits as i32 - 1)
    }

    /// Decimal digits printed when serialising values at this precision.
    pub fn print_digits(self) -> usize {
        self.digits().max(17) as usize
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision {
            bits: (Self::DEFAULT_DIGITS as f64 * LOG2_10).ceil() as u32,
        }
    }
}

/// Size of one ulp of `x` at `bits` of precision. Zero has the ulp of 1.
pub fn ulp_of(x: &Float, bits: u32) -> Float {
    let e = if x.is_zero() || !x.is_finite() {
        1
    } else {
        x.get_exp().unwrap_or(1)
    };
    Float::with_val(64, 1) << (e - bits as i32)
}

/// Distance between `a` and `b` measured in ulps of `b` at `bits`.
pub fn ulps_between(a: &Float, b: &Float, bits: u32) -> f64 {
    let p = a.prec().max(b.prec()) + 8;
    let d = Float::with_val(p, a - b).abs();
    (d / ulp_of(b, bits)).to_f64()
}

/// Decimal rendering with the given number of significant digits.
pub fn fmt_float(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    x.to_string_radix(10, Some(digits))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fifty_digits_is_167_bits() {
        assert_eq!(Precision::default().bits(), 167);
        assert_eq!(Precision::default().digits(), 50);
    }

    #[test]
    fn ulp_matches_spacing() {
        let bits = 53;
        let one = Float::with_val(bits, 1);
        let mut next = one.clone();
        next.next_up();
        let u = ulp_of(&Float::with_val(bits, 1.5), bits);
        assert_eq!(Float::with_val(bits, &next - &one), u);
        assert_eq!(ulps_between(&next, &one, bits), 1.0);
    }

    #[test]
    fn rejects_absurd_precision() {
        assert!(Precision::from_digits(2).is_err());
    }
}
