//! Exact arithmetic in ℚ(q): algebraic reals, field elements with decidable
//! signs, and the number-literal grammar.

mod algebraic;
mod expr;
mod field;
mod literal;
pub mod poly;

pub use algebraic::{algebraic_from_poly, AlgebraicKind, AlgebraicReal};
pub use expr::{format_element, parse_element};
pub use field::{Field, FieldElement};
pub use literal::{decimal_bounds, field_from_literal, format_rational, parse_literal, parse_rational, Literal};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use std::cmp::Ordering;
use std::sync::Arc;

/// Komornik-Loreti constant, as a boundary value only.
pub const Q_KL: f64 = 1.787_231_650;
/// Root of x^6 = x^4 + x^3 + 2x^2 + x + 1 in (1, 2).
pub const Q_ALEPH0: f64 = 1.645_411_573_663_848;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum NumError {
    #[error("no root in the given interval")]
    NoRoot,
    #[error("more than one root in the given interval")]
    MultipleRoots,
    #[error("polynomial is not square-free")]
    NonSquareFree,
    #[error("empty interval")]
    EmptyInterval,
    #[error("operands belong to different fields")]
    MixedField,
    #[error("division by zero")]
    DivisionByZero,
    #[error("base must be positive")]
    NonPositiveBase,
    #[error("syntax error: {0}")]
    Syntax(String),
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Coefficients of q^k - q^(k-1) - ... - q - 1, lowest degree first.
pub fn bonacci_poly(k: usize) -> Vec<BigInt> {
    let mut c = vec![BigInt::from(-1); k];
    c.push(BigInt::from(1));
    c
}

pub(crate) fn bonacci_real(k: usize) -> Result<AlgebraicReal, NumError> {
    if k < 2 {
        return Err(NumError::NoRoot);
    }
    algebraic_from_poly(&bonacci_poly(k), &rat(1, 1), &rat(2, 1))
}

/// Exact comparison of two field elements.
pub fn compare(a: &FieldElement, b: &FieldElement) -> Result<Ordering, NumError> {
    a.compare(b)
}

/// Enclosure of `a` of width at most `eps`.
pub fn refine(a: &AlgebraicReal, eps: &BigRational) -> (BigRational, BigRational) {
    a.refine(eps)
}

/// Position of a base relative to the k-Bonacci number q_k, decided exactly
/// through the sign of q^k - q^(k-1) - ... - 1 on (1, 2).
pub fn cmp_with_bonacci(field: &Arc<Field>, k: usize) -> Ordering {
    let q = FieldElement::q(field);
    let mut p = FieldElement::from_int(field, -1);
    let mut pw = FieldElement::one(field);
    for _ in 1..k {
        pw = &pw * &q;
        p = &p - &pw;
    }
    pw = &pw * &q;
    p = &p + &pw;
    p.sign()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bonacci_identity_exact() {
        for k in 2..=12 {
            let f = Field::bonacci(k).unwrap();
            let q = FieldElement::q(&f);
            let lhs = FieldElement::from_int(&f, 2) - q.clone();
            let rhs = q.pow(-(k as i64)).unwrap();
            assert_eq!(compare(&lhs, &rhs).unwrap(), Ordering::Equal, "k={k}");
            assert_eq!(cmp_with_bonacci(&f, k), Ordering::Equal);
            assert_eq!(cmp_with_bonacci(&f, k + 1), Ordering::Less);
            assert_eq!(cmp_with_bonacci(&f, k - 1), Ordering::Greater);
        }
    }

    #[test]
    fn spec_examples() {
        let f3 = Field::bonacci(3).unwrap();
        let q = FieldElement::q(&f3);
        let lhs = q.pow(3).unwrap();
        let rhs = &(&q * &q) + &q.add_int(1);
        assert_eq!(compare(&lhs, &rhs).unwrap(), Ordering::Equal);

        let f = field_from_literal("3/2").unwrap();
        let q = FieldElement::q(&f);
        let a = q.inv().unwrap();
        let b = (&q * &q.add_int(-1)).inv().unwrap();
        assert_eq!(compare(&a, &b).unwrap(), Ordering::Less);

        let q9 = bonacci_real(9).unwrap();
        let (lo, hi) = refine(&q9, &rat(1, 100_000));
        assert!(lo > rat(199_802, 100_000) && hi < rat(199_804, 100_000));
    }

    #[test]
    fn mixed_fields_error() {
        let a = FieldElement::one(&field_from_literal("3/2").unwrap());
        let b = FieldElement::one(&field_from_literal("bonacci:3").unwrap());
        assert_eq!(compare(&a, &b), Err(NumError::MixedField));
    }

    #[test]
    fn reducible_modulus_still_decides_zero() {
        // (x - 1)(x^2 - 2): the element q^2 - 2 is zero at sqrt 2.
        let f = field_from_literal("algebraic:2,-2,-1,1:1:2").unwrap();
        let x = parse_element(&f, "q^2 - 2").unwrap();
        assert_eq!(x.sign(), Ordering::Equal);
        let y = parse_element(&f, "q - 1").unwrap();
        let z = y.inv().unwrap();
        assert!(((&y * &z).to_f64() - 1.0).abs() < 1e-12);
    }
}
