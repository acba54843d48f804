use super::algebraic::{is_root_of, AlgebraicReal};
use super::poly::{self, Poly};
use super::NumError;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex};

/// (bits, lo^i, hi^i) for the q-enclosure of width 2^-bits.
type PowerCache = (u32, Vec<BigRational>, Vec<BigRational>);

/// The number field ℚ(q) for a fixed real base `q`.
pub struct Field {
    q: AlgebraicReal,
    modulus: Poly,
    n: usize,
    irreducible: bool,
    label: String,
    qinv: Vec<BigRational>,
    powers: Mutex<Vec<PowerCache>>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field({})", self.label)
    }
}

fn r(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl Field {
    fn build(q: AlgebraicReal, label: String, irreducible: bool) -> Result<Arc<Field>, NumError> {
        let modulus = poly::monic(&q.defining_poly());
        let n = poly::degree(&modulus).unwrap_or(0);
        if n == 0 {
            return Err(NumError::NoRoot);
        }
        let mut bits = 4;
        loop {
            let (lo, hi) = q.refine_bits(bits);
            if lo.is_positive() {
                break;
            }
            if !hi.is_positive() {
                return Err(NumError::NonPositiveBase);
            }
            bits *= 2;
        }
        let mut field = Field {
            q,
            modulus,
            n,
            irreducible: irreducible || n == 1,
            label,
            qinv: Vec::new(),
            powers: Mutex::new(Vec::new()),
        };
        let x = if n == 1 {
            vec![field.q.as_rational().unwrap().clone()]
        } else {
            let mut x = vec![BigRational::zero(); n];
            x[1] = BigRational::one();
            x
        };
        field.qinv = field.inverse_coeffs(&x)?;
        Ok(Arc::new(field))
    }

    pub fn rational(q: BigRational) -> Result<Arc<Field>, NumError> {
        let label = super::literal::format_rational(&q);
        Self::build(AlgebraicReal::rational(q), label, true)
    }

    /// Field generated by an algebraic real. `label` is the literal that
    /// reproduces it.
    pub fn from_algebraic(q: AlgebraicReal, label: String) -> Result<Arc<Field>, NumError> {
        Self::build(q, label, false)
    }

    /// ℚ(q_k) for the k-Bonacci number q_k.
    pub fn bonacci(k: usize) -> Result<Arc<Field>, NumError> {
        let q = super::bonacci_real(k)?;
        // k-Bonacci polynomials are irreducible over the rationals.
        Self::build(q, format!("bonacci:{k}"), true)
    }

    pub fn base(&self) -> &AlgebraicReal {
        &self.q
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_rational(&self) -> bool {
        self.n == 1
    }

    pub fn same(a: &Arc<Field>, b: &Arc<Field>) -> bool {
        Arc::ptr_eq(a, b) || (a.modulus == b.modulus && a.q.compare(&b.q) == Ordering::Equal)
    }

    fn reduce(&self, mut p: Vec<BigRational>) -> Vec<BigRational> {
        let n = self.n;
        if p.len() > n {
            for i in (n..p.len()).rev() {
                if p[i].is_zero() {
                    continue;
                }
                let c = std::mem::replace(&mut p[i], BigRational::zero());
                for j in 0..n {
                    if !self.modulus[j].is_zero() {
                        let t = &c * &self.modulus[j];
                        p[i - n + j] -= t;
                    }
                }
            }
            p.truncate(n);
        }
        p.resize(n, BigRational::zero());
        p
    }

    fn mul_coeffs(&self, a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
        if self.n == 1 {
            return vec![&a[0] * &b[0]];
        }
        let mut out = vec![BigRational::zero(); 2 * self.n - 1];
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
        self.reduce(out)
    }

    fn inverse_coeffs(&self, a: &[BigRational]) -> Result<Vec<BigRational>, NumError> {
        let p = poly::trimmed(a.to_vec());
        if p.is_empty() {
            return Err(NumError::DivisionByZero);
        }
        if self.n == 1 {
            return Ok(vec![BigRational::one() / &p[0]]);
        }
        let (g, s) = poly::ext_gcd_mod(&p, &self.modulus);
        if poly::degree(&g) == Some(0) {
            return Ok(self.reduce(s));
        }
        if is_root_of(&self.q, &g) {
            return Err(NumError::DivisionByZero);
        }
        // The modulus is reducible and `q` is a root of the cofactor: invert
        // there. The result evaluates correctly at `q`.
        let h = poly::divrem(&self.modulus, &g).0;
        let (g2, s2) = poly::ext_gcd_mod(&p, &h);
        if poly::degree(&g2) != Some(0) {
            return Err(NumError::DivisionByZero);
        }
        Ok(self.reduce(s2))
    }

    fn power_table(&self, bits: u32) -> (Vec<BigRational>, Vec<BigRational>) {
        {
            let cache = self.powers.lock().unwrap();
            if let Some((_, lo, hi)) = cache.iter().find(|(b, _, _)| *b == bits) {
                return (lo.clone(), hi.clone());
            }
        }
        let (lo, hi) = self.q.refine_bits(bits);
        let mut lp = vec![BigRational::one()];
        let mut hp = vec![BigRational::one()];
        for i in 1..self.n {
            lp.push(&lp[i - 1] * &lo);
            hp.push(&hp[i - 1] * &hi);
        }
        let mut cache = self.powers.lock().unwrap();
        if cache.len() > 16 {
            cache.remove(0);
        }
        cache.push((bits, lp.clone(), hp.clone()));
        (lp, hp)
    }

    fn enclose(&self, c: &[BigRational], bits: u32) -> (BigRational, BigRational) {
        let (lp, hp) = self.power_table(bits);
        let mut lo = BigRational::zero();
        let mut hi = BigRational::zero();
        for (i, ci) in c.iter().enumerate() {
            if ci.is_zero() {
                continue;
            }
            let a = ci * &lp[i];
            let b = ci * &hp[i];
            if ci.is_positive() {
                lo += a;
                hi += b;
            } else {
                lo += b;
                hi += a;
            }
        }
        (lo, hi)
    }

    fn sign_coeffs(&self, c: &[BigRational]) -> Ordering {
        if c.iter().all(|x| x.is_zero()) {
            return Ordering::Equal;
        }
        if self.n == 1 {
            return c[0].cmp(&BigRational::zero());
        }
        let mut bits = 64;
        let mut checked_zero = self.irreducible;
        loop {
            let (lo, hi) = self.enclose(c, bits);
            if lo.is_positive() {
                return Ordering::Greater;
            }
            if hi.is_negative() {
                return Ordering::Less;
            }
            if lo.is_zero() && hi.is_zero() {
                return Ordering::Equal;
            }
            if !checked_zero && bits >= 128 {
                checked_zero = true;
                let g = poly::gcd(&poly::trimmed(c.to_vec()), &self.modulus);
                if is_root_of(&self.q, &g) {
                    return Ordering::Equal;
                }
            }
            bits *= 2;
        }
    }
}

/// An element of ℚ(q) stored as a polynomial in `q` of degree below `[ℚ(q):ℚ]`.
#[derive(Clone)]
pub struct FieldElement {
    field: Arc<Field>,
    c: Vec<BigRational>,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ~ {:.12}", self, self.to_f64())
    }
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.assert_same(other);
        if self.c == other.c {
            return true;
        }
        !self.field.irreducible && self.cmp_exact(other) == Ordering::Equal
    }
}

impl Eq for FieldElement {}

impl Hash for FieldElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        // Coefficients are canonical only over an irreducible modulus.
        if self.field.irreducible {
            self.c.hash(state);
        }
    }
}

impl FieldElement {
    pub fn from_rational(field: &Arc<Field>, v: BigRational) -> Self {
        let mut c = vec![BigRational::zero(); field.n];
        c[0] = v;
        FieldElement { field: field.clone(), c }
    }

    pub fn from_int(field: &Arc<Field>, v: i64) -> Self {
        Self::from_rational(field, r(v))
    }

    pub fn zero(field: &Arc<Field>) -> Self {
        Self::from_int(field, 0)
    }

    pub fn one(field: &Arc<Field>) -> Self {
        Self::from_int(field, 1)
    }

    /// The generator `q`.
    pub fn q(field: &Arc<Field>) -> Self {
        if field.n == 1 {
            return Self::from_rational(field, field.q.as_rational().unwrap().clone());
        }
        let mut c = vec![BigRational::zero(); field.n];
        c[1] = BigRational::one();
        FieldElement { field: field.clone(), c }
    }

    pub fn q_inv(field: &Arc<Field>) -> Self {
        FieldElement { field: field.clone(), c: field.qinv.clone() }
    }

    /// Builds an element from polynomial coefficients in `q` of any degree.
    pub fn from_poly(field: &Arc<Field>, coeffs: Vec<BigRational>) -> Self {
        let c =
            if field.n == 1 { vec![poly::eval(&coeffs, field.q.as_rational().unwrap())] } else { field.reduce(coeffs) };
        FieldElement { field: field.clone(), c }
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    /// Coefficients in the power basis `1, q, …, q^(n-1)`.
    pub fn coeffs(&self) -> &[BigRational] {
        &self.c
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        if self.field.n == 1 || self.c[1..].iter().all(|x| x.is_zero()) {
            Some(&self.c[0])
        } else {
            None
        }
    }

    fn assert_same(&self, other: &Self) {
        assert!(Field::same(&self.field, &other.field), "mixed fields: {} and {}", self.field.label, other.field.label);
    }

    pub fn is_zero(&self) -> bool {
        self.sign() == Ordering::Equal
    }

    pub fn sign(&self) -> Ordering {
        self.field.sign_coeffs(&self.c)
    }

    fn cmp_exact(&self, other: &Self) -> Ordering {
        if self.field.n == 1 {
            return self.c[0].cmp(&other.c[0]);
        }
        let d: Vec<BigRational> = self.c.iter().zip(&other.c).map(|(a, b)| a - b).collect();
        self.field.sign_coeffs(&d)
    }

    /// Exact comparison; fails when the operands live in different fields.
    pub fn compare(&self, other: &Self) -> Result<Ordering, NumError> {
        if !Field::same(&self.field, &other.field) {
            return Err(NumError::MixedField);
        }
        Ok(self.cmp_exact(other))
    }

    pub fn inv(&self) -> Result<Self, NumError> {
        Ok(FieldElement { field: self.field.clone(), c: self.field.inverse_coeffs(&self.c)? })
    }

    pub fn div(&self, other: &Self) -> Result<Self, NumError> {
        Ok(self * &other.inv()?)
    }

    pub fn pow(&self, e: i64) -> Result<Self, NumError> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = Self::one(&self.field);
        let mut b = base;
        let mut k = e.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &b;
            }
            b = &b * &b;
            k >>= 1;
        }
        Ok(acc)
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        FieldElement { field: self.field.clone(), c: self.c.iter().map(|x| x * s).collect() }
    }

    pub fn add_int(&self, k: i64) -> Self {
        let mut c = self.c.clone();
        c[0] += r(k);
        FieldElement { field: self.field.clone(), c }
    }

    /// Rational enclosure of width roughly `2^-bits` (exact for rational fields).
    pub fn enclosure(&self, bits: u32) -> (BigRational, BigRational) {
        if self.field.n == 1 {
            return (self.c[0].clone(), self.c[0].clone());
        }
        let mut b = bits.max(32) + 16;
        loop {
            let (lo, hi) = self.field.enclose(&self.c, b);
            let eps = BigRational::new(BigInt::one(), BigInt::one() << bits);
            if &hi - &lo <= eps {
                return (lo, hi);
            }
            b *= 2;
        }
    }

    pub fn to_f64(&self) -> f64 {
        let (lo, hi) = self.enclosure(64);
        super::rational_to_f64(&((lo + hi) / r(2)))
    }

    pub fn min(a: &Self, b: &Self) -> Self {
        if a <= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    pub fn max(a: &Self, b: &Self) -> Self {
        if a >= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    pub fn abs(&self) -> Self {
        if self.sign() == Ordering::Less {
            -self
        } else {
            self.clone()
        }
    }
}

impl PartialOrd for FieldElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FieldElement {
    fn cmp(&self, other: &Self) -> Ordering {
        self.assert_same(other);
        self.cmp_exact(other)
    }
}

impl Add for &FieldElement {
    type Output = FieldElement;
    fn add(self, o: &FieldElement) -> FieldElement {
        self.assert_same(o);
        FieldElement { field: self.field.clone(), c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &FieldElement {
    type Output = FieldElement;
    fn sub(self, o: &FieldElement) -> FieldElement {
        self.assert_same(o);
        FieldElement { field: self.field.clone(), c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect() }
    }
}

impl Mul for &FieldElement {
    type Output = FieldElement;
    fn mul(self, o: &FieldElement) -> FieldElement {
        self.assert_same(o);
        FieldElement { field: self.field.clone(), c: self.field.mul_coeffs(&self.c, &o.c) }
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement { field: self.field.clone(), c: self.c.iter().map(|a| -a).collect() }
    }
}

impl Add for FieldElement {
    type Output = FieldElement;
    fn add(self, o: FieldElement) -> FieldElement {
        &self + &o
    }
}

impl Sub for FieldElement {
    type Output = FieldElement;
    fn sub(self, o: FieldElement) -> FieldElement {
        &self - &o
    }
}

impl Mul for FieldElement {
    type Output = FieldElement;
    fn mul(self, o: FieldElement) -> FieldElement {
        &self * &o
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        -&self
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::expr::format_element(self))
    }
}
