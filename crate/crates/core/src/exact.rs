//! Exactly-represented real inputs of the form `±√q` with `q` rational.
//!
//! Parameters enter the model only through their squares, so keeping the
//! square as an exact rational lets the regime boundary `|a₃| = |a₁² − a₂²|`
//! be decided without rounding (e.g. `a₁ = sqrt(2), a₂ = 1, a₃ = 1`).

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Surd {
    negative: bool,
    square: BigRational,
}

impl Surd {
    pub fn from_rational(value: BigRational) -> Self {
        Surd {
            negative: value.is_negative(),
            square: &value * &value,
        }
    }

    pub fn from_integer(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// `√q` (non-negative root). `q` must be non-negative.
    pub fn sqrt_of(q: BigRational) -> Option<Self> {
        if q.is_negative() {
            return None;
        }
        Some(Surd {
            negative: false,
            square: q,
        })
    }

    pub fn negate(mut self) -> Self {
        if !self.square.is_zero() {
            self.negative = !self.negative;
        }
        self
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn is_zero(&self) -> bool {
        self.square.is_zero()
    }

    /// Exact square of the value.
    pub fn square(&self) -> &BigRational {
        &self.square
    }

    pub fn to_f64(&self) -> f64 {
        let sq = ratio_to_f64(&self.square);
        let root = sq.sqrt();
        // Perfect squares convert without passing through sqrt.
        let root = exact_rational_sqrt(&self.square)
            .map(|r| ratio_to_f64(&r))
            .unwrap_or(root);
        if self.negative {
            -root
        } else {
            root
        }
    }
}

fn ratio_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        let n = q.numer().to_f64().unwrap_or(f64::NAN);
        let d = q.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

fn exact_integer_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

fn exact_rational_sqrt(q: &BigRational) -> Option<BigRational> {
    let n = exact_integer_sqrt(q.numer())?;
    let d = exact_integer_sqrt(q.denom())?;
    Some(BigRational::new(n, d))
}

fn parse_err(input: &str, reason: impl Into<String>) -> Error {
    Error::Parse {
        input: input.to_string(),
        reason: reason.into(),
    }
}

/// Decimal literal (optionally with exponent) to an exact rational.
fn parse_decimal(s: &str, whole: &str) -> Result<BigRational, Error> {
    let s = s.trim();
    if s.is_empty() {
        return Err(parse_err(whole, "empty number"));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = s[pos + 1..]
                .parse()
                .map_err(|_| parse_err(whole, "bad exponent"))?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(parse_err(whole, "no digits"));
    }
    if !int_part.chars().chain(frac_part.chars()).all(|ch| ch.is_ascii_digit()) {
        return Err(parse_err(whole, "unexpected character"));
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits
        .parse()
        .map_err(|_| parse_err(whole, "bad digits"))?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = BigRational::from_integer(numer);
    if scale >= 0 {
        value *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -value } else { value })
}

/// `N`, `N/M` with decimal operands.
fn parse_ratio(s: &str, whole: &str) -> Result<BigRational, Error> {
    match s.split_once('/') {
        Some((n, d)) => {
            let n = parse_decimal(n, whole)?;
            let d = parse_decimal(d, whole)?;
            if d.is_zero() {
                return Err(parse_err(whole, "division by zero"));
            }
            Ok(n / d)
        }
        None => parse_decimal(s, whole),
    }
}

impl FromStr for Surd {
    type Err = Error;

    /// Accepts `N`, `N/M`, `sqrt(N)`, `sqrt(N/M)`, each optionally
    /// preceded by a sign; `N` and `M` are decimal literals.
    fn from_str(input: &str) -> Result<Self, Error> {
        let s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(&s)),
        };
        let value = if let Some(inner) = body.strip_prefix("sqrt(") {
            let inner = inner
                .strip_suffix(')')
                .ok_or_else(|| parse_err(input, "unterminated sqrt("))?;
            let q = parse_ratio(inner, input)?;
            Surd::sqrt_of(q).ok_or_else(|| parse_err(input, "square root of a negative number"))?
        } else {
            if body.starts_with('-') || body.starts_with('+') {
                return Err(parse_err(input, "repeated sign"));
            }
            Surd::from_rational(parse_ratio(body, input)?)
        };
        Ok(if negative { value.negate() } else { value })
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.negative { "-" } else { "" };
        match exact_rational_sqrt(&self.square) {
            Some(r) if r.denom().is_one() => write!(f, "{sign}{}", r.numer()),
            Some(r) => write!(f, "{sign}{}/{}", r.numer(), r.denom()),
            None if self.square.denom().is_one() => {
                write!(f, "{sign}sqrt({})", self.square.numer())
            }
            None => write!(
                f,
                "{sign}sqrt({}/{})",
                self.square.numer(),
                self.square.denom()
            ),
        }
    }
}
