//! Text form of field elements: a polynomial in `q` such as `-q^2 + 3/2*q - 1`.

use super::field::{Field, FieldElement};
use super::literal::{format_rational, parse_rational};
use super::NumError;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::sync::Arc;

const MAX_EXPONENT: i64 = 4096;

pub fn format_element(x: &FieldElement) -> String {
    let c = x.coeffs();
    let mut out = String::new();
    for (i, ci) in c.iter().enumerate().rev() {
        if ci.is_zero() {
            continue;
        }
        let neg = ci.is_negative();
        let mag = ci.abs();
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let var = match i {
            0 => String::new(),
            1 => "q".to_string(),
            _ => format!("q^{i}"),
        };
        if i == 0 {
            out.push_str(&format_rational(&mag));
        } else if mag.is_one() {
            out.push_str(&var);
        } else {
            out.push_str(&format_rational(&mag));
            out.push('*');
            out.push_str(&var);
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// Parses a sum of terms `c`, `c*q^e`, `q^e` with rational `c` and integer `e`
/// (negative exponents allowed).
pub fn parse_element(field: &Arc<Field>, s: &str) -> Result<FieldElement, NumError> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(NumError::Syntax("empty expression".into()));
    }
    let bytes = s.as_bytes();
    let mut terms: Vec<(bool, &str)> = Vec::new();
    let mut start = 0;
    let mut neg = false;
    let mut i = 0;
    if bytes[0] == b'-' || bytes[0] == b'+' {
        neg = bytes[0] == b'-';
        start = 1;
        i = 1;
    }
    while i < bytes.len() {
        let b = bytes[i];
        // a sign after `^` belongs to the exponent
        if (b == b'+' || b == b'-') && i > start && bytes[i - 1] != b'^' {
            terms.push((neg, &s[start..i]));
            neg = b == b'-';
            start = i + 1;
        }
        i += 1;
    }
    terms.push((neg, &s[start..]));
    let mut acc = FieldElement::zero(field);
    for (neg, t) in terms {
        let mut v = parse_term(field, t)?;
        if neg {
            v = -v;
        }
        acc = &acc + &v;
    }
    Ok(acc)
}

fn parse_term(field: &Arc<Field>, t: &str) -> Result<FieldElement, NumError> {
    if t.is_empty() {
        return Err(NumError::Syntax("empty term".into()));
    }
    let (coef, var) = match t.find('q') {
        None => (t, None),
        Some(p) => {
            let c = t[..p].strip_suffix('*').unwrap_or(&t[..p]);
            (c, Some(&t[p + 1..]))
        }
    };
    let c = if coef.is_empty() { BigRational::one() } else { parse_rational(coef)? };
    let mut v = FieldElement::from_rational(field, c);
    if let Some(rest) = var {
        let e: i64 = if rest.is_empty() {
            1
        } else {
            let body = rest.strip_prefix('^').ok_or_else(|| NumError::Syntax(format!("bad term `{t}`")))?;
            body.parse().map_err(|_| NumError::Syntax(format!("bad exponent in `{t}`")))?
        };
        if e.abs() > MAX_EXPONENT {
            return Err(NumError::Syntax(format!("exponent {e} too large")));
        }
        v = &v * &FieldElement::q(field).pow(e)?;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::field_from_literal;

    #[test]
    fn round_trip_in_cubic_field() {
        let f = field_from_literal("bonacci:3").unwrap();
        let x = parse_element(&f, "3/2*q^2 - q + 1/3").unwrap();
        assert_eq!(format_element(&x), "3/2*q^2 - q + 1/3");
        assert_eq!(parse_element(&f, &format_element(&x)).unwrap(), x);
    }

    #[test]
    fn negative_powers_reduce() {
        let f = field_from_literal("bonacci:3").unwrap();
        let x = parse_element(&f, "q^-1").unwrap();
        let one = &x * &FieldElement::q(&f);
        assert_eq!(format_element(&one), "1");
        assert_eq!(format_element(&x), "q^2 - q - 1");
    }

    #[test]
    fn rational_field_prints_rationals() {
        let f = field_from_literal("5/3").unwrap();
        let x = parse_element(&f, "q^2 - 1").unwrap();
        assert_eq!(format_element(&x), "16/9");
    }

    #[test]
    fn malformed_input_is_rejected() {
        let f = field_from_literal("bonacci:3").unwrap();
        for s in ["", "q^", "1//2", "qq", "+-", "2*", "q^99999"] {
            assert!(parse_element(&f, s).is_err(), "{s}");
        }
    }
}
