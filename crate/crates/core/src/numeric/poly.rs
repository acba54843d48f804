//! Dense univariate polynomials over the rationals, lowest degree first.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;

pub type Poly = Vec<BigRational>;

pub fn trim(p: &mut Poly) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

pub fn trimmed(mut p: Poly) -> Poly {
    trim(&mut p);
    p
}

/// Degree of a trimmed polynomial; `None` for the zero polynomial.
pub fn degree(p: &Poly) -> Option<usize> {
    let mut d = p.len();
    while d > 0 && p[d - 1].is_zero() {
        d -= 1;
    }
    d.checked_sub(1)
}

pub fn from_ints(c: &[BigInt]) -> Poly {
    trimmed(c.iter().map(|x| BigRational::from_integer(x.clone())).collect())
}

pub fn add(a: &Poly, b: &Poly) -> Poly {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.get(i).cloned().unwrap_or_else(BigRational::zero);
        let y = b.get(i).cloned().unwrap_or_else(BigRational::zero);
        out.push(x + y);
    }
    trimmed(out)
}

pub fn sub(a: &Poly, b: &Poly) -> Poly {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.get(i).cloned().unwrap_or_else(BigRational::zero);
        let y = b.get(i).cloned().unwrap_or_else(BigRational::zero);
        out.push(x - y);
    }
    trimmed(out)
}

pub fn mul(a: &Poly, b: &Poly) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    trimmed(out)
}

pub fn scale(a: &Poly, s: &BigRational) -> Poly {
    trimmed(a.iter().map(|c| c * s).collect())
}

/// Quotient and remainder; panics on a zero divisor.
pub fn divrem(a: &Poly, b: &Poly) -> (Poly, Poly) {
    let db = degree(b).expect("division by the zero polynomial");
    let lead = b[db].clone();
    let mut r = trimmed(a.clone());
    let Some(da) = degree(&r) else {
        return (Vec::new(), Vec::new());
    };
    if da < db {
        return (Vec::new(), r);
    }
    let mut q = vec![BigRational::zero(); da - db + 1];
    while let Some(dr) = degree(&r) {
        if dr < db {
            break;
        }
        let c = &r[dr] / &lead;
        let shift = dr - db;
        for (i, bc) in b.iter().enumerate().take(db + 1) {
            let t = &c * bc;
            r[i + shift] -= t;
        }
        q[shift] = c;
        trim(&mut r);
    }
    (trimmed(q), r)
}

pub fn rem(a: &Poly, b: &Poly) -> Poly {
    divrem(a, b).1
}

pub fn monic(a: &Poly) -> Poly {
    match degree(a) {
        None => Vec::new(),
        Some(d) => {
            let l = a[d].clone();
            a.iter().map(|c| c / &l).collect()
        }
    }
}

pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    let mut x = trimmed(a.clone());
    let mut y = trimmed(b.clone());
    while !y.is_empty() {
        let r = rem(&x, &y);
        x = y;
        y = r;
    }
    monic(&x)
}

/// Returns `(g, s)` with `s*a ≡ g (mod m)` and `g = gcd(a, m)` monic.
pub fn ext_gcd_mod(a: &Poly, m: &Poly) -> (Poly, Poly) {
    let mut r0 = trimmed(m.clone());
    let mut r1 = rem(a, m);
    let mut s0: Poly = Vec::new();
    let mut s1: Poly = vec![BigRational::one()];
    while !r1.is_empty() {
        let (q, r2) = divrem(&r0, &r1);
        let s2 = sub(&s0, &mul(&q, &s1));
        r0 = r1;
        r1 = r2;
        s0 = s1;
        s1 = s2;
    }
    match degree(&r0) {
        None => (Vec::new(), Vec::new()),
        Some(d) => {
            let l = r0[d].clone();
            (monic(&r0), scale(&s0, &(BigRational::one() / l)))
        }
    }
}

pub fn derivative(a: &Poly) -> Poly {
    trimmed(a.iter().enumerate().skip(1).map(|(i, c)| c * BigRational::from_integer(BigInt::from(i))).collect())
}

pub fn eval(a: &Poly, x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in a.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

pub fn sign_at(a: &Poly, x: &BigRational) -> Ordering {
    let v = eval(a, x);
    if v.is_positive() {
        Ordering::Greater
    } else if v.is_negative() {
        Ordering::Less
    } else {
        Ordering::Equal
    }
}

fn sturm_chain(p: &Poly) -> Vec<Poly> {
    let mut chain = vec![trimmed(p.clone()), derivative(p)];
    loop {
        let n = chain.len();
        if chain[n - 1].is_empty() {
            chain.pop();
            break;
        }
        let r = rem(&chain[n - 2], &chain[n - 1]);
        if r.is_empty() {
            break;
        }
        chain.push(r.into_iter().map(|c| -c).collect());
    }
    chain
}

fn sign_variations(chain: &[Poly], x: &BigRational) -> usize {
    let mut last = Ordering::Equal;
    let mut count = 0;
    for p in chain {
        let s = sign_at(p, x);
        if s == Ordering::Equal {
            continue;
        }
        if last != Ordering::Equal && s != last {
            count += 1;
        }
        last = s;
    }
    count
}

/// Number of distinct real roots in the half-open interval `(a, b]`.
pub fn count_roots(p: &Poly, a: &BigRational, b: &BigRational) -> usize {
    let chain = sturm_chain(p);
    sign_variations(&chain, a).saturating_sub(sign_variations(&chain, b))
}

pub fn is_square_free(p: &Poly) -> bool {
    degree(&gcd(p, &derivative(p))).unwrap_or(0) == 0
}
