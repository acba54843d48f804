use super::poly::{self, Poly};
use super::NumError;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::cmp::Ordering;
use std::sync::Mutex;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AlgebraicKind {
    Rational(BigRational),
    /// Square-free integer polynomial (lowest degree first) with a single
    /// root strictly inside `(lo, hi)`, and a strict sign change across it.
    Algebraic {
        min_poly: Vec<BigInt>,
        lo: BigRational,
        hi: BigRational,
    },
}

/// An exactly represented real number.
///
/// The refinement cache only ever narrows; concurrent refiners race on a
/// mutex and keep whichever interval is tighter.
#[derive(Debug)]
pub struct AlgebraicReal {
    kind: AlgebraicKind,
    cache: Mutex<(BigRational, BigRational)>,
}

impl Clone for AlgebraicReal {
    fn clone(&self) -> Self {
        let c = self.cache.lock().unwrap().clone();
        AlgebraicReal { kind: self.kind.clone(), cache: Mutex::new(c) }
    }
}

fn two() -> BigRational {
    BigRational::from_integer(BigInt::from(2))
}

impl AlgebraicReal {
    pub fn rational(r: BigRational) -> Self {
        AlgebraicReal { cache: Mutex::new((r.clone(), r.clone())), kind: AlgebraicKind::Rational(r) }
    }

    pub fn from_integer(n: i64) -> Self {
        Self::rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn kind(&self) -> &AlgebraicKind {
        &self.kind
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match &self.kind {
            AlgebraicKind::Rational(r) => Some(r),
            _ => None,
        }
    }

    /// Polynomial over the rationals vanishing at this number.
    pub fn defining_poly(&self) -> Poly {
        match &self.kind {
            AlgebraicKind::Rational(r) => vec![-r.clone(), BigRational::one()],
            AlgebraicKind::Algebraic { min_poly, .. } => poly::from_ints(min_poly),
        }
    }

    /// Current cached enclosure.
    pub fn enclosure(&self) -> (BigRational, BigRational) {
        self.cache.lock().unwrap().clone()
    }

    /// Interval containing the number with width at most `eps`.
    pub fn refine(&self, eps: &BigRational) -> (BigRational, BigRational) {
        let AlgebraicKind::Algebraic { min_poly, .. } = &self.kind else {
            return self.enclosure();
        };
        let (mut lo, mut hi) = self.enclosure();
        if &hi - &lo <= *eps {
            return (lo, hi);
        }
        let p = poly::from_ints(min_poly);
        let s_lo = poly::sign_at(&p, &lo);
        while &hi - &lo > *eps {
            let mid = (&lo + &hi) / two();
            let s = poly::sign_at(&p, &mid);
            if s == Ordering::Equal {
                lo = mid.clone();
                hi = mid;
                break;
            }
            if s == s_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut guard = self.cache.lock().unwrap();
        if &hi - &lo < &guard.1 - &guard.0 {
            *guard = (lo.clone(), hi.clone());
        }
        guard.clone()
    }

    /// Enclosure of width at most `2^-bits`.
    pub fn refine_bits(&self, bits: u32) -> (BigRational, BigRational) {
        let eps = BigRational::new(BigInt::one(), BigInt::one() << bits);
        self.refine(&eps)
    }

    pub fn to_f64(&self) -> f64 {
        let (lo, hi) = self.refine_bits(60);
        let mid = (lo + hi) / two();
        super::rational_to_f64(&mid)
    }

    /// Exact trichotomy.
    pub fn compare(&self, other: &AlgebraicReal) -> Ordering {
        match (&self.kind, &other.kind) {
            (AlgebraicKind::Rational(a), AlgebraicKind::Rational(b)) => a.cmp(b),
            (AlgebraicKind::Rational(_), _) => other.compare(self).reverse(),
            (AlgebraicKind::Algebraic { min_poly, .. }, AlgebraicKind::Rational(r)) => {
                let p = poly::from_ints(min_poly);
                let (lo, hi) = self.enclosure();
                if r < &lo {
                    return Ordering::Greater;
                }
                if r > &hi {
                    return Ordering::Less;
                }
                if poly::sign_at(&p, r) == Ordering::Equal {
                    // `r` is a root inside the isolating interval, hence the root.
                    return Ordering::Equal;
                }
                let mut bits = 8;
                loop {
                    let (lo, hi) = self.refine_bits(bits);
                    if r < &lo {
                        return Ordering::Greater;
                    }
                    if r > &hi {
                        return Ordering::Less;
                    }
                    if lo == hi {
                        return lo.cmp(r);
                    }
                    bits *= 2;
                }
            }
            (AlgebraicKind::Algebraic { min_poly: pa, .. }, AlgebraicKind::Algebraic { min_poly: pb, .. }) => {
                let g = poly::gcd(&poly::from_ints(pa), &poly::from_ints(pb));
                let mut bits = 8;
                loop {
                    let (alo, ahi) = self.refine_bits(bits);
                    let (blo, bhi) = other.refine_bits(bits);
                    if ahi < blo {
                        return Ordering::Less;
                    }
                    if bhi < alo {
                        return Ordering::Greater;
                    }
                    if poly::degree(&g).unwrap_or(0) >= 1 {
                        let lo = if alo > blo { alo.clone() } else { blo.clone() };
                        let hi = if ahi < bhi { ahi.clone() } else { bhi.clone() };
                        if lo == hi {
                            if poly::sign_at(&g, &lo) == Ordering::Equal {
                                return Ordering::Equal;
                            }
                        } else if poly::count_roots(&g, &lo, &hi) > 0 || poly::sign_at(&g, &lo) == Ordering::Equal {
                            // A common root inside both isolating intervals is both numbers.
                            let ga =
                                poly::count_roots(&g, &alo, &ahi) > 0 || poly::sign_at(&g, &alo) == Ordering::Equal;
                            let gb =
                                poly::count_roots(&g, &blo, &bhi) > 0 || poly::sign_at(&g, &blo) == Ordering::Equal;
                            if ga && gb {
                                return Ordering::Equal;
                            }
                        }
                    }
                    bits *= 2;
                }
            }
        }
    }
}

fn content_free(coeffs: &[BigInt]) -> Vec<BigInt> {
    let mut c: Vec<BigInt> = coeffs.to_vec();
    while c.last().is_some_and(|x| x.is_zero()) {
        c.pop();
    }
    let g = c.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() || g.is_one() {
        return c;
    }
    c.into_iter().map(|x| x / &g).collect()
}

/// Builds the unique root of `coeffs` (lowest degree first) in `(lo, hi)`.
pub fn algebraic_from_poly(coeffs: &[BigInt], lo: &BigRational, hi: &BigRational) -> Result<AlgebraicReal, NumError> {
    if lo >= hi {
        return Err(NumError::EmptyInterval);
    }
    let c = content_free(coeffs);
    let p = poly::from_ints(&c);
    match poly::degree(&p) {
        None | Some(0) => return Err(NumError::NoRoot),
        _ => {}
    }
    if !poly::is_square_free(&p) {
        return Err(NumError::NonSquareFree);
    }
    let hi_root = poly::sign_at(&p, hi) == Ordering::Equal;
    let open_count = poly::count_roots(&p, lo, hi) - usize::from(hi_root);
    match open_count {
        0 => return Err(NumError::NoRoot),
        1 => {}
        _ => return Err(NumError::MultipleRoots),
    }
    if poly::degree(&p) == Some(1) {
        return Ok(AlgebraicReal::rational(-&p[0] / &p[1]));
    }
    // Pull endpoints inward until neither is a root of `p`.
    let mut a = lo.clone();
    let mut b = hi.clone();
    if poly::sign_at(&p, &a) == Ordering::Equal {
        let mut step = (&b - &a) / two();
        loop {
            let t = &a + &step;
            if poly::sign_at(&p, &t) != Ordering::Equal
                && poly::count_roots(&p, &t, &b) - usize::from(poly::sign_at(&p, &b) == Ordering::Equal) == 1
            {
                a = t;
                break;
            }
            step /= two();
        }
    }
    if poly::sign_at(&p, &b) == Ordering::Equal {
        let mut step = (&b - &a) / two();
        loop {
            let t = &b - &step;
            if poly::sign_at(&p, &t) != Ordering::Equal && poly::count_roots(&p, &a, &t) == 1 {
                b = t;
                break;
            }
            step /= two();
        }
    }
    Ok(AlgebraicReal {
        cache: Mutex::new((a.clone(), b.clone())),
        kind: AlgebraicKind::Algebraic { min_poly: c, lo: a, hi: b },
    })
}

/// `true` when the polynomial `g` has a root at this number. `g` must divide
/// a polynomial that the number's isolating interval isolates.
pub(crate) fn is_root_of(x: &AlgebraicReal, g: &Poly) -> bool {
    match x.kind() {
        AlgebraicKind::Rational(r) => poly::sign_at(g, r) == Ordering::Equal,
        AlgebraicKind::Algebraic { lo, hi, .. } => {
            poly::degree(g).unwrap_or(0) >= 1 && poly::count_roots(g, lo, hi) > 0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn ints(c: &[i64]) -> Vec<BigInt> {
        c.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn golden_ratio_isolates() {
        let g = algebraic_from_poly(&ints(&[-1, -1, 1]), &q(1, 1), &q(2, 1)).unwrap();
        let (lo, hi) = g.refine(&q(1, 1000));
        assert!(lo > q(1617, 1000) && hi < q(1619, 1000));
    }

    #[test]
    fn tribonacci_value() {
        let t = algebraic_from_poly(&ints(&[-1, -1, -1, 1]), &q(1, 1), &q(2, 1)).unwrap();
        assert!((t.to_f64() - 1.839_286_755).abs() < 1e-8);
    }

    #[test]
    fn linear_is_rational() {
        let x = algebraic_from_poly(&ints(&[-5, 1]), &q(4, 1), &q(6, 1)).unwrap();
        assert_eq!(x.as_rational(), Some(&q(5, 1)));
        assert_eq!(x.refine(&q(1, 10)), (q(5, 1), q(5, 1)));
    }

    #[test]
    fn errors_are_reported() {
        assert_eq!(algebraic_from_poly(&ints(&[-1, -1, 1]), &q(2, 1), &q(3, 1)).unwrap_err(), NumError::NoRoot);
        assert_eq!(algebraic_from_poly(&ints(&[-1, -1, 1]), &q(-2, 1), &q(3, 1)).unwrap_err(), NumError::MultipleRoots);
        assert_eq!(algebraic_from_poly(&ints(&[1, -2, 1]), &q(0, 1), &q(3, 1)).unwrap_err(), NumError::NonSquareFree);
    }

    #[test]
    fn endpoint_root_is_pulled_inward() {
        // (x-1)(x^2-2) has roots 1 and sqrt 2; the interval (1, 2) isolates sqrt 2.
        let x = algebraic_from_poly(&ints(&[2, -2, -1, 1]), &q(1, 1), &q(2, 1)).unwrap();
        assert!((x.to_f64() - std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn compare_detects_equal_roots() {
        let a = algebraic_from_poly(&ints(&[-2, 0, 1]), &q(1, 1), &q(2, 1)).unwrap();
        let b = algebraic_from_poly(&ints(&[2, -2, -1, 1]), &q(1, 1), &q(2, 1)).unwrap();
        assert_eq!(a.compare(&b), Ordering::Equal);
        let c = AlgebraicReal::rational(q(7, 5));
        assert_eq!(a.compare(&c), Ordering::Greater);
        assert_eq!(c.compare(&a), Ordering::Less);
    }
}
