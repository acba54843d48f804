//! Number literals: `p/q`, exact decimals, `bonacci:k` and
//! `algebraic:c0,c1,...,cn:lo:hi`.

use super::algebraic::algebraic_from_poly;
use super::field::Field;
use super::NumError;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

const MAX_DIGITS: usize = 4096;
const MAX_DEGREE: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Literal {
    Rational(BigRational),
    Bonacci(usize),
    Algebraic { coeffs: Vec<BigInt>, lo: BigRational, hi: BigRational },
}

fn parse_int(s: &str) -> Result<BigInt, NumError> {
    let body = s.strip_prefix(['-', '+']).unwrap_or(s);
    if body.is_empty() || body.len() > MAX_DIGITS || !body.bytes().all(|b| b.is_ascii_digit()) {
        return Err(NumError::Syntax(format!("bad integer `{s}`")));
    }
    BigInt::from_str(s).map_err(|_| NumError::Syntax(format!("bad integer `{s}`")))
}

/// Parses `n`, `p/q`, or a decimal such as `-1.999`, exactly.
pub fn parse_rational(s: &str) -> Result<BigRational, NumError> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p = parse_int(p.trim())?;
        let q = parse_int(q.trim())?;
        if q.is_zero() {
            return Err(NumError::DivisionByZero);
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        let neg = ip.starts_with('-');
        let ip_body = ip.strip_prefix(['-', '+']).unwrap_or(ip);
        if fp.is_empty() && ip_body.is_empty() {
            return Err(NumError::Syntax(format!("bad decimal `{s}`")));
        }
        if !fp.bytes().all(|b| b.is_ascii_digit()) || fp.len() > MAX_DIGITS {
            return Err(NumError::Syntax(format!("bad decimal `{s}`")));
        }
        let whole = if ip_body.is_empty() { BigInt::zero() } else { parse_int(ip_body)? };
        let frac = if fp.is_empty() { BigInt::zero() } else { parse_int(fp)? };
        let scale = num_traits::pow(BigInt::from(10), fp.len());
        let mag = BigRational::new(whole * &scale + frac, scale);
        return Ok(if neg { -mag } else { mag });
    }
    Ok(BigRational::from_integer(parse_int(s)?))
}

pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_literal(s: &str) -> Result<Literal, NumError> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("bonacci:") {
        let k: usize = rest.trim().parse().map_err(|_| NumError::Syntax(format!("bad bonacci index `{rest}`")))?;
        if !(2..=MAX_DEGREE).contains(&k) {
            return Err(NumError::Syntax(format!("bonacci index {k} outside 2..={MAX_DEGREE}")));
        }
        return Ok(Literal::Bonacci(k));
    }
    if let Some(rest) = s.strip_prefix("algebraic:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(NumError::Syntax("expected algebraic:c0,...,cn:lo:hi".into()));
        }
        let coeffs = parts[0].split(',').map(|c| parse_int(c.trim())).collect::<Result<Vec<_>, _>>()?;
        if coeffs.len() > MAX_DEGREE + 1 {
            return Err(NumError::Syntax("polynomial degree too large".into()));
        }
        let lo = parse_rational(parts[1])?;
        let hi = parse_rational(parts[2])?;
        return Ok(Literal::Algebraic { coeffs, lo, hi });
    }
    Ok(Literal::Rational(parse_rational(s)?))
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Rational(r) => f.write_str(&format_rational(r)),
            Literal::Bonacci(k) => write!(f, "bonacci:{k}"),
            Literal::Algebraic { coeffs, lo, hi } => {
                let c: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
                write!(f, "algebraic:{}:{}:{}", c.join(","), format_rational(lo), format_rational(hi))
            }
        }
    }
}

impl Literal {
    /// The field ℚ(x) generated by the literal's value.
    pub fn to_field(&self) -> Result<Arc<Field>, NumError> {
        match self {
            Literal::Rational(r) => Field::rational(r.clone()),
            Literal::Bonacci(k) => Field::bonacci(*k),
            Literal::Algebraic { coeffs, lo, hi } => {
                let a = algebraic_from_poly(coeffs, lo, hi)?;
                match a.as_rational() {
                    Some(r) => Field::rational(r.clone()),
                    None => Field::from_algebraic(a, self.to_string()),
                }
            }
        }
    }
}

/// Parses a literal and builds its field.
pub fn field_from_literal(s: &str) -> Result<Arc<Field>, NumError> {
    parse_literal(s)?.to_field()
}

/// Decimal rendering of an enclosure, rounded outward to `digits` places.
pub fn decimal_bounds(lo: &BigRational, hi: &BigRational, digits: usize) -> (String, String) {
    let scale = num_traits::pow(BigInt::from(10), digits);
    let l = (lo * BigRational::from_integer(scale.clone())).floor().to_integer();
    let h = (hi * BigRational::from_integer(scale)).ceil().to_integer();
    (fixed_point(&l, digits), fixed_point(&h, digits))
}

fn fixed_point(n: &BigInt, digits: usize) -> String {
    let neg = n.is_negative();
    let s = n.abs().to_string();
    let body = if digits == 0 {
        s
    } else if s.len() <= digits {
        format!("0.{}{}", "0".repeat(digits - s.len()), s)
    } else {
        let (a, b) = s.split_at(s.len() - digits);
        format!("{a}.{b}")
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse_rational("1.999").unwrap(), q(1999, 1000));
        assert_eq!(parse_rational("-0.5").unwrap(), q(-1, 2));
        assert_eq!(parse_rational(".25").unwrap(), q(1, 4));
        assert_eq!(parse_rational("5/3").unwrap(), q(5, 3));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("1.2.3").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational("-").is_err());
    }

    #[test]
    fn literal_round_trip() {
        for s in ["5/3", "bonacci:9", "algebraic:-1,-1,1:1:2", "2"] {
            let l = parse_literal(s).unwrap();
            assert_eq!(l.to_string(), s);
            assert_eq!(parse_literal(&l.to_string()).unwrap(), l);
        }
    }

    #[test]
    fn outward_rounding() {
        let (a, b) = decimal_bounds(&q(2, 3), &q(2, 3), 4);
        assert_eq!((a.as_str(), b.as_str()), ("0.6666", "0.6667"));
        let (a, b) = decimal_bounds(&q(-1, 8), &q(-1, 8), 2);
        assert_eq!((a.as_str(), b.as_str()), ("-0.13", "-0.12"));
    }
}
