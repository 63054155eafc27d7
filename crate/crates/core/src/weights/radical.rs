//! Exact numbers of the form `r * sqrt(s)` with rational `r` and `s >= 0`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Mul;

use rug::{Float, Integer, Rational};

/// `coeff * sqrt(radicand)`, kept with an integer radicand free of small square factors.
#[derive(Clone, Debug)]
pub struct Radical {
    coeff: Rational,
    radicand: Integer,
}

const SMALL_PRIMES: [u32; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];

impl Radical {
    pub fn new(coeff: impl Into<Rational>, radicand: impl Into<Rational>) -> Self {
        let coeff = coeff.into();
        let s: Rational = radicand.into();
        assert!(s >= 0, "negative radicand");
        // sqrt(a/b) = sqrt(ab)/b
        let (num, den) = s.into_numer_denom();
        let mut r = Radical {
            coeff: coeff / Rational::from(den.clone()),
            radicand: num * den,
        };
        r.normalize();
        r
    }

    pub fn rational(q: impl Into<Rational>) -> Self {
        Radical {
            coeff: q.into(),
            radicand: Integer::from(1),
        }
    }

    pub fn sqrt_of(s: impl Into<Rational>) -> Self {
        Radical::new(1, s)
    }

    fn normalize(&mut self) {
        if self.coeff == 0 || self.radicand == 0 {
            self.coeff = Rational::new();
            self.radicand = Integer::from(1);
            return;
        }
        if self.radicand.is_perfect_square() {
            let root = self.radicand.clone().sqrt();
            self.coeff *= root;
            self.radicand = Integer::from(1);
            return;
        }
        for &p in &SMALL_PRIMES {
            let sq = p * p;
            while self.radicand.is_divisible_u(sq) {
                self.radicand /= sq;
                self.coeff *= p;
            }
        }
    }

    pub fn coeff(&self) -> &Rational {
        &self.coeff
    }

    pub fn radicand(&self) -> &Integer {
        &self.radicand
    }

    pub fn is_zero(&self) -> bool {
        self.coeff == 0
    }

    /// The square, which is always rational.
    pub fn square(&self) -> Rational {
        Rational::from(self.coeff.square_ref()) * &self.radicand
    }

    /// `1 / self`, or `None` for zero.
    pub fn recip(&self) -> Option<Radical> {
        if self.is_zero() {
            return None;
        }
        // 1/(r sqrt s) = sqrt(s) / (r s)
        let c = Rational::from(&self.coeff * &self.radicand).recip();
        Some(Radical {
            coeff: c,
            radicand: self.radicand.clone(),
        })
    }

    pub fn to_float(&self, bits: u32) -> Float {
        let s = Float::with_val(bits + 16, &self.radicand).sqrt();
        Float::with_val(bits, s * Float::with_val(bits + 16, &self.coeff))
    }

    /// Rational value when the radicand is a perfect square.
    pub fn as_rational(&self) -> Option<Rational> {
        (self.radicand == 1).then(|| self.coeff.clone())
    }
}

impl PartialEq for Radical {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Radical {}

impl PartialOrd for Radical {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Radical {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.coeff.cmp0(), other.coeff.cmp0());
        if sa != sb {
            return sa.cmp(&sb);
        }
        let mag = self.square().cmp(&other.square());
        match sa {
            Ordering::Less => mag.reverse(),
            _ => mag,
        }
    }
}

impl Mul for &Radical {
    type Output = Radical;

    fn mul(self, rhs: &Radical) -> Radical {
        let mut r = Radical {
            coeff: Rational::from(&self.coeff * &rhs.coeff),
            radicand: Integer::from(&self.radicand * &rhs.radicand),
        };
        r.normalize();
        r
    }
}

impl Mul for Radical {
    type Output = Radical;

    fn mul(self, rhs: Radical) -> Radical {
        &self * &rhs
    }
}

impl Mul<&Rational> for &Radical {
    type Output = Radical;

    fn mul(self, rhs: &Rational) -> Radical {
        let mut r = self.clone();
        r.coeff *= rhs;
        r.normalize();
        r
    }
}

impl fmt::Display for Radical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.radicand == 1 {
            write!(f, "{}", self.coeff)
        } else if self.coeff == 1 {
            write!(f, "sqrt({})", self.radicand)
        } else {
            write!(f, "{}*sqrt({})", self.coeff, self.radicand)
        }
    }
}
