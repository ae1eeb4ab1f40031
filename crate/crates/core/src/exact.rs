//! Exact arithmetic used by the condition checks: rationals, and the real
//! quadratic fields `Q(sqrt d)` that contain Markov tent-map slopes such as
//! the golden ratio.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Parses `"p/q"`, an integer, or a finite decimal such as `"0.25"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::invalid(format!("cannot parse {s:?} as a rational number"));
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| bad())? };
    let den = num_traits::pow(BigInt::from(10), frac_part.len());
    let r = BigRational::new(num, den);
    Ok(if neg { -r } else { r })
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn rational(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// An element `a + b sqrt(d)` of a real quadratic field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quadratic {
    pub a: Rational,
    pub b: Rational,
    pub d: u64,
}

impl Quadratic {
    /// `d` must be a positive non-square.
    pub fn new(a: Rational, b: Rational, d: u64) -> Result<Self> {
        let r = (d as f64).sqrt().round() as u64;
        if d == 0 || r * r == d {
            return Err(Error::invalid(format!("{d} is not a positive non-square")));
        }
        Ok(Quadratic { a, b, d })
    }

    pub fn from_rational(a: Rational, d: u64) -> Self {
        Quadratic { a, b: Rational::zero(), d }
    }

    /// The golden ratio `(1 + sqrt 5) / 2`.
    pub fn golden() -> Self {
        Quadratic {
            a: rational(1, 2),
            b: rational(1, 2),
            d: 5,
        }
    }

    pub fn signum(&self) -> Ordering {
        let sa = self.a.signum();
        let sb = self.b.signum();
        let zero = Rational::zero();
        if sa >= zero && sb >= zero {
            return if self.a.is_zero() && self.b.is_zero() { Ordering::Equal } else { Ordering::Greater };
        }
        if sa <= zero && sb <= zero {
            return Ordering::Less;
        }
        // Opposite signs: compare a^2 with b^2 d.
        let a2 = &self.a * &self.a;
        let b2d = &self.b * &self.b * Rational::from_integer(BigInt::from(self.d));
        let cmp = a2.cmp(&b2d);
        if sa > zero {
            cmp
        } else {
            cmp.reverse()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.a) + to_f64(&self.b) * (self.d as f64).sqrt()
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.d, other.d, "mixing elements of different quadratic fields");
    }
}

impl PartialOrd for Quadratic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.d != other.d {
            return None;
        }
        Some((self - other).signum())
    }
}

impl fmt::Display for Quadratic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}*sqrt({})", self.a, self.b, self.d)
    }
}

impl<'a> Add<&'a Quadratic> for &'a Quadratic {
    type Output = Quadratic;

    fn add(self, o: &Quadratic) -> Quadratic {
        self.check(o);
        Quadratic {
            a: &self.a + &o.a,
            b: &self.b + &o.b,
            d: self.d,
        }
    }
}

impl<'a> Sub<&'a Quadratic> for &'a Quadratic {
    type Output = Quadratic;

    fn sub(self, o: &Quadratic) -> Quadratic {
        self.check(o);
        Quadratic {
            a: &self.a - &o.a,
            b: &self.b - &o.b,
            d: self.d,
        }
    }
}

impl<'a> Mul<&'a Quadratic> for &'a Quadratic {
    type Output = Quadratic;

    fn mul(self, o: &Quadratic) -> Quadratic {
        self.check(o);
        let d = Rational::from_integer(BigInt::from(self.d));
        Quadratic {
            a: &self.a * &o.a + &self.b * &o.b * d,
            b: &self.a * &o.b + &self.b * &o.a,
            d: self.d,
        }
    }
}

impl Neg for &Quadratic {
    type Output = Quadratic;

    fn neg(self) -> Quadratic {
        Quadratic {
            a: -&self.a,
            b: -&self.b,
            d: self.d,
        }
    }
}

pub fn one() -> Rational {
    Rational::one()
}
