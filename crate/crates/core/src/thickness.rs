//! Cantor sets in the switch-region analysis: the fixed expansion of 1, the
//! A_q family, gaps and bridges, thickness, interleaving and intersection
//! certificates.
//!
//! Three sets are handled: π_q(A_q), π_q(S^k) and (2 − q)·π_q(S^k) + 1. Each
//! is exposed as a binary piece tree ([`CantorSet`]): a node is a prefix, its
//! hull is the convex hull of the projected sequences extending it, and a
//! split produces the two children on either side of the next gap.
//!
//! Endpoints of A_q pieces are infinite sums that need not lie in ℚ(q); they
//! are carried as enclosures ([`Encl`]) with a truncation horizon. S^k hulls
//! are eventually periodic and exact.

use crate::certificate::{Certificate, Rel};
use crate::dynamics::{check_base, finite_sum, project_q, unique_orbit_check, DynSystem, SystemKind, UniqueStatus};
use crate::numeric::{cmp_with_bonacci, decimal_bounds, Field, FieldElement};
use crate::slice::{compute_slice, CardinalityClaim, SliceError, SliceResult};
use crate::words::{Alphabet, Tail, Word};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Extra digits of the fixed expansion summed beyond any position whose
/// tail sum is requested.
pub const HORIZON: usize = 64;
/// Explicit gap listings stop at the deepest level that keeps the count
/// below this. S^k listings only serve as a cross-check of the classes.
pub const EXPLICIT_LIMIT: u128 = 1 << 17;
pub const EXPLICIT_LIMIT_SK: u128 = 1 << 12;
pub const REFINEMENT_BUDGET: usize = 1000;
/// Cover order, also the tie-break order of the fixed expansion.
pub const W2: [[i8; 2]; 5] = [[-1, 0], [0, -1], [0, 0], [0, 1], [1, 0]];

#[derive(Debug, thiserror::Error)]
pub enum ThickError {
    #[error("the A_q construction needs q in (q_9, 2)")]
    BaseTooSmall,
    #[error("S^{0} is only order-preserving for q in (q_{0}, 2)")]
    BelowBonacci(usize),
    #[error("base must lie in (1, 2)")]
    BaseOutOfRange,
    #[error("W2 images fail to cover H_q: {0}")]
    CoverFailure(String),
    #[error("word is not an A_q prefix")]
    NotMember,
    #[error("{0} prefixes requested, limit is {1}")]
    TooMany(u128, u128),
    #[error("thickness hypotheses fail at level {0}")]
    ThicknessTooSmall(usize),
    #[error("interleaving could not be certified")]
    NotInterleaved,
    #[error("refinement budget of {0} steps exceeded")]
    RefinementBudgetExceeded(usize),
    #[error("witness check failed: {0}")]
    WitnessFailed(String),
    #[error(transparent)]
    Slice(#[from] SliceError),
}

// ---------------------------------------------------------------------------
// enclosures

/// Closed real interval with endpoints in ℚ(q).
#[derive(Clone, Debug, PartialEq)]
pub struct Encl {
    pub lo: FieldElement,
    pub hi: FieldElement,
}

impl Encl {
    pub fn exact(x: FieldElement) -> Self {
        Encl { lo: x.clone(), hi: x }
    }

    pub fn new(lo: FieldElement, hi: FieldElement) -> Self {
        debug_assert!(lo <= hi);
        Encl { lo, hi }
    }

    pub fn add(&self, o: &Encl) -> Encl {
        Encl { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi }
    }

    pub fn sub(&self, o: &Encl) -> Encl {
        Encl { lo: &self.lo - &o.hi, hi: &self.hi - &o.lo }
    }

    pub fn shift(&self, b: &FieldElement) -> Encl {
        Encl { lo: &self.lo + b, hi: &self.hi + b }
    }

    /// Multiplication by a positive constant.
    pub fn scale(&self, a: &FieldElement) -> Encl {
        Encl { lo: &self.lo * a, hi: &self.hi * a }
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    /// Certainly below `o`.
    pub fn lt(&self, o: &Encl) -> bool {
        self.hi < o.lo
    }

    pub fn mid(&self) -> FieldElement {
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        (&self.lo + &self.hi).scale(&half)
    }

    pub fn strings(&self, digits: usize) -> [String; 2] {
        let bits = (digits as f64 * 3.33).ceil() as u32 + 8;
        let lo = self.lo.enclosure(bits).0;
        let hi = self.hi.enclosure(bits).1;
        let (a, b) = decimal_bounds(&lo, &hi, digits);
        [a, b]
    }

    pub fn to_f64(&self) -> f64 {
        self.mid().to_f64()
    }
}

/// A dyadic rational ≤ x, for compact certificate entries.
pub fn round_down(x: &FieldElement, bits: u32) -> FieldElement {
    let (lo, _) = x.enclosure(bits);
    let den = BigInt::one() << bits;
    let n = (lo * BigRational::from_integer(den.clone())).floor().to_integer();
    FieldElement::from_rational(x.field(), BigRational::new(n, den))
}

/// A dyadic rational ≥ x.
pub fn round_up(x: &FieldElement, bits: u32) -> FieldElement {
    let (_, hi) = x.enclosure(bits);
    let den = BigInt::one() << bits;
    let n = (hi * BigRational::from_integer(den.clone())).ceil().to_integer();
    FieldElement::from_rational(x.field(), BigRational::new(n, den))
}

fn qpow(field: &Arc<Field>, e: i64) -> FieldElement {
    FieldElement::q(field).pow(e).expect("q is nonzero")
}

// ---------------------------------------------------------------------------
// H_q and the W2 cover

/// H_q = [−q/(q²−1), q/(q²−1)].
pub fn h_q_interval(field: &Arc<Field>) -> (FieldElement, FieldElement) {
    let q = FieldElement::q(field);
    let h = &q * &(&q * &q).add_int(-1).inv().expect("q > 1");
    (-&h, h)
}

/// S_{i1} ∘ S_{i2} applied to x, with S_i(x) = (x + i)/q.
fn s_pair(field: &Arc<Field>, w: [i8; 2], x: &FieldElement) -> FieldElement {
    let qi = FieldElement::q_inv(field);
    let inner = &x.add_int(w[1] as i64) * &qi;
    &inner.add_int(w[0] as i64) * &qi
}

#[derive(Clone, Debug)]
pub struct W2Cover {
    /// S_w(H_q) for w in cover order.
    pub images: Vec<([i8; 2], FieldElement, FieldElement)>,
    /// Consecutive images overlap.
    pub overlaps: Vec<bool>,
    pub left_preserved: bool,
    pub right_preserved: bool,
}

/// Checks that the five images S_w(H_q) chain across H_q.
pub fn w2_cover_check(field: &Arc<Field>) -> Result<W2Cover, ThickError> {
    check_base(field).map_err(|_| ThickError::BaseOutOfRange)?;
    let (lo, hi) = h_q_interval(field);
    let images: Vec<_> = W2.iter().map(|&w| (w, s_pair(field, w, &lo), s_pair(field, w, &hi))).collect();
    let overlaps: Vec<bool> = images.windows(2).map(|p| p[1].1 <= p[0].2).collect();
    let left_preserved = images[0].1 == lo;
    let right_preserved = images[4].2 == hi;
    let inside = images.iter().all(|(_, a, b)| &lo <= a && b <= &hi);
    if !(overlaps.iter().all(|&o| o) && left_preserved && right_preserved && inside) {
        return Err(ThickError::CoverFailure(format!(
            "overlaps {overlaps:?}, ends {left_preserved}/{right_preserved}, inside {inside}"
        )));
    }
    Ok(W2Cover { images, overlaps, left_preserved, right_preserved })
}

// ---------------------------------------------------------------------------
// fixed expansion of 1

/// M = 0 for q ≤ G, otherwise the k with q ∈ (q_k, q_{k+1}].
pub fn leading_ones(field: &Arc<Field>) -> usize {
    if cmp_with_bonacci(field, 2) != Ordering::Greater {
        return 0;
    }
    let mut k = 2;
    while k < 4096 && cmp_with_bonacci(field, k + 1) == Ordering::Greater {
        k += 1;
    }
    k
}

/// c = 1^M w_1 w_2 ... with w_i ∈ W2 and π_q(c) = 1.
#[derive(Clone, Debug)]
pub struct FixedExpansionOfOne {
    field: Arc<Field>,
    m: usize,
    digits: Vec<i8>,
    // 1 = π_q(digits) + q^-len · point
    point: FieldElement,
    h: FieldElement,
}

impl FixedExpansionOfOne {
    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn digits(&self) -> &[i8] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn word(&self) -> Word {
        Word::new(Alphabet::Signed, self.digits.clone()).expect("signed digits")
    }

    pub fn blocks(&self) -> Vec<[i8; 2]> {
        self.digits[self.m..].chunks(2).filter(|c| c.len() == 2).map(|c| [c[0], c[1]]).collect()
    }

    /// 1 − π_q(emitted prefix).
    pub fn residual(&self) -> FieldElement {
        &self.point * &qpow(&self.field, -(self.digits.len() as i64))
    }

    /// Emits W2 blocks until at least `len` digits exist.
    pub fn extend_to(&mut self, len: usize) -> Result<(), ThickError> {
        let q = FieldElement::q(&self.field);
        let q2 = &q * &q;
        while self.digits.len() < len {
            let mut chosen = None;
            for w in W2 {
                let next =
                    (&(&q2 * &self.point) - &q.scale(&BigRational::from_integer(w[0].into()))).add_int(-(w[1] as i64));
                if next.abs() <= self.h {
                    chosen = Some((w, next));
                    break;
                }
            }
            let (w, next) =
                chosen.ok_or_else(|| ThickError::CoverFailure(format!("point {} outside every image", self.point)))?;
            self.digits.extend_from_slice(&w);
            self.point = next;
        }
        Ok(())
    }
}

pub fn fixed_expansion_of_one(field: &Arc<Field>, length: usize) -> Result<FixedExpansionOfOne, ThickError> {
    check_base(field).map_err(|_| ThickError::BaseOutOfRange)?;
    let m = leading_ones(field);
    let q = FieldElement::q(field);
    let mut p = FieldElement::one(field);
    for _ in 0..m {
        p = (&q * &p).add_int(-1);
    }
    let h = h_q_interval(field).1;
    if p.abs() > h {
        return Err(ThickError::CoverFailure(format!("(f*_1)^{m}(1) outside H_q")));
    }
    let mut e = FixedExpansionOfOne { field: field.clone(), m, digits: vec![1; m], point: p, h };
    e.extend_to(length.max(m))?;
    Ok(e)
}

// ---------------------------------------------------------------------------
// A_q

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum IndexClass {
    /// c_j = ±1 forces a_j.
    FixedByC(i8),
    FixedOne,
    FixedZero,
    Free,
}

#[derive(Clone, Debug)]
pub struct AqFamily {
    field: Arc<Field>,
    expansion: FixedExpansionOfOne,
    classes: Vec<IndexClass>,
    amin: Vec<i8>,
    amax: Vec<i8>,
    free: Vec<usize>,
    max_pos: usize,
    tmin: Vec<Encl>,
    tmax: Vec<Encl>,
}

fn require_above_q9(field: &Arc<Field>) -> Result<(), ThickError> {
    check_base(field).map_err(|_| ThickError::BaseOutOfRange)?;
    if cmp_with_bonacci(field, 9) != Ordering::Greater {
        return Err(ThickError::BaseTooSmall);
    }
    Ok(())
}

impl AqFamily {
    /// Classifies positions up to `max_pos + HORIZON` and encloses the
    /// extreme tail sums after every position ≤ `max_pos`.
    pub fn new(field: &Arc<Field>, max_pos: usize) -> Result<Self, ThickError> {
        require_above_q9(field)?;
        let n = max_pos + HORIZON;
        let expansion = fixed_expansion_of_one(field, n)?;
        let c = &expansion.digits()[..n];
        let mut classes = Vec::with_capacity(n);
        let mut zeros = 0usize;
        for &cj in c {
            let cl = if cj != 0 {
                IndexClass::FixedByC(cj)
            } else {
                let m = zeros;
                zeros += 1;
                match m % 4 {
                    1 => IndexClass::FixedOne,
                    3 => IndexClass::FixedZero,
                    _ => IndexClass::Free,
                }
            };
            classes.push(cl);
        }
        let (amin, amax): (Vec<i8>, Vec<i8>) = classes
            .iter()
            .map(|cl| match cl {
                IndexClass::FixedByC(1) | IndexClass::FixedOne => (1, 1),
                IndexClass::FixedByC(_) | IndexClass::FixedZero => (0, 0),
                IndexClass::Free => (0, 1),
            })
            .unzip();
        let free = (1..=n).filter(|&j| classes[j - 1] == IndexClass::Free).collect();
        // backward Horner: T(p) = (d_{p+1} + T(p+1)) / q, truncated at n
        let qi = FieldElement::q_inv(field);
        let q1inv = FieldElement::q(field).add_int(-1).inv().expect("q > 1");
        let mut lo_min = vec![FieldElement::zero(field); n + 1];
        let mut lo_max = vec![FieldElement::zero(field); n + 1];
        for p in (0..n).rev() {
            lo_min[p] = &lo_min[p + 1].add_int(amin[p] as i64) * &qi;
            lo_max[p] = &lo_max[p + 1].add_int(amax[p] as i64) * &qi;
        }
        let mut rem = &qpow(field, -((n - max_pos) as i64)) * &q1inv;
        let mut tmin = vec![Encl::exact(FieldElement::zero(field)); max_pos + 1];
        let mut tmax = tmin.clone();
        for p in (0..=max_pos).rev() {
            tmin[p] = Encl::new(lo_min[p].clone(), &lo_min[p] + &rem);
            tmax[p] = Encl::new(lo_max[p].clone(), &lo_max[p] + &rem);
            rem = &rem * &qi;
        }
        Ok(AqFamily { field: field.clone(), expansion, classes, amin, amax, free, max_pos, tmin, tmax })
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn expansion(&self) -> &FixedExpansionOfOne {
        &self.expansion
    }

    pub fn max_pos(&self) -> usize {
        self.max_pos
    }

    /// Class of the 1-based position j.
    pub fn class(&self, j: usize) -> IndexClass {
        self.classes[j - 1]
    }

    pub fn c(&self, j: usize) -> i8 {
        self.expansion.digits()[j - 1]
    }

    /// Free zeros (1-based) among the classified positions.
    pub fn free_zeros(&self) -> &[usize] {
        &self.free
    }

    /// (J, J_free, J_fixed,0, J_fixed,1) among the classified positions.
    pub fn index_sets(&self) -> (Vec<usize>, Vec<usize>, Vec<usize>, Vec<usize>) {
        let pick = |f: &dyn Fn(IndexClass) -> bool| -> Vec<usize> {
            (1..=self.classes.len()).filter(|&j| f(self.classes[j - 1])).collect()
        };
        (
            pick(&|c| !matches!(c, IndexClass::FixedByC(_))),
            pick(&|c| c == IndexClass::Free),
            pick(&|c| c == IndexClass::FixedZero),
            pick(&|c| c == IndexClass::FixedOne),
        )
    }

    /// Σ_{j>p} a_j q^{p−j} for the smallest member.
    pub fn tail_min(&self, p: usize) -> &Encl {
        &self.tmin[p]
    }

    pub fn tail_max(&self, p: usize) -> &Encl {
        &self.tmax[p]
    }

    pub fn hull(&self) -> (Encl, Encl) {
        (self.tmin[0].clone(), self.tmax[0].clone())
    }

    pub fn admits_prefix(&self, a: &Word) -> bool {
        a.len() <= self.classes.len()
            && a.symbols().iter().enumerate().all(|(i, &s)| (self.amin[i]..=self.amax[i]).contains(&s))
    }
}

/// All length-k prefixes of A_q, in lexicographic order.
pub fn build_aq_prefixes(field: &Arc<Field>, k: usize) -> Result<Vec<Word>, ThickError> {
    let fam = AqFamily::new(field, k)?;
    aq_prefixes(&fam, k)
}

pub fn aq_prefixes(fam: &AqFamily, k: usize) -> Result<Vec<Word>, ThickError> {
    let free: Vec<usize> = fam.free.iter().copied().filter(|&j| j <= k).collect();
    let count = 1u128.checked_shl(free.len() as u32).unwrap_or(u128::MAX);
    if count > EXPLICIT_LIMIT {
        return Err(ThickError::TooMany(count, EXPLICIT_LIMIT));
    }
    let base: Vec<i8> = fam.amin[..k].to_vec();
    Ok((0..count as usize)
        .map(|mask| {
            let mut d = base.clone();
            for (i, &j) in free.iter().enumerate() {
                let bit = (mask >> (free.len() - 1 - i)) & 1;
                d[j - 1] = bit as i8;
            }
            Word::new(Alphabet::Binary01, d).expect("binary")
        })
        .collect())
}

/// b_j = a_j − c_j.
pub fn shifted_partner(fam: &AqFamily, a: &Word) -> Result<Word, ThickError> {
    if a.alphabet() != Alphabet::Binary01 || !fam.admits_prefix(a) {
        return Err(ThickError::NotMember);
    }
    let b = a.symbols().iter().enumerate().map(|(i, &s)| s - fam.c(i + 1)).collect();
    Word::new(Alphabet::Binary01, b).map_err(|_| ThickError::NotMember)
}

// ---------------------------------------------------------------------------
// S^k

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Run {
    last: i8,
    // 0 for a run that starts the word (unconstrained)
    len: usize,
}

fn push_run(st: Option<Run>, s: i8) -> Run {
    match st {
        None => Run { last: s, len: 0 },
        Some(r) if r.last == s => Run { last: s, len: if r.len == 0 { 0 } else { r.len + 1 } },
        Some(_) => Run { last: s, len: 1 },
    }
}

fn run_of(digits: &[i8]) -> Option<Run> {
    digits.iter().fold(None, |st, &s| Some(push_run(st, s)))
}

/// π_q(S^k) for q ∈ (q_k, 2), with the extreme continuations precomputed.
#[derive(Clone, Debug)]
pub struct SkSet {
    field: Arc<Field>,
    k: usize,
    top: FieldElement,
    // π((0^{k-1}1)^∞), π((1^{k-1}0)^∞)
    min_after1: FieldElement,
    max_after0: FieldElement,
    // index r: π(0^{k-1-r}(10^{k-1})^∞) and π(1^{k-1-r}(01^{k-1})^∞)
    min0: Vec<FieldElement>,
    max1: Vec<FieldElement>,
}

fn periodic_value(field: &Arc<Field>, pre: Vec<i8>, per: Vec<i8>) -> FieldElement {
    let t = Tail::new(
        Word::new(Alphabet::Binary01, pre).expect("binary"),
        Word::new(Alphabet::Binary01, per).expect("binary"),
    )
    .expect("nonempty period");
    project_q(field, &t)
}

impl SkSet {
    pub fn new(field: &Arc<Field>, k: usize) -> Result<Self, ThickError> {
        check_base(field).map_err(|_| ThickError::BaseOutOfRange)?;
        if k < 2 || cmp_with_bonacci(field, k) != Ordering::Greater {
            return Err(ThickError::BelowBonacci(k));
        }
        let block = |a: i8, b: i8| -> Vec<i8> {
            let mut v = vec![a; k - 1];
            v.push(b);
            v
        };
        let lead = |a: i8, b: i8| -> Vec<i8> {
            let mut v = vec![a];
            v.extend(vec![b; k - 1]);
            v
        };
        let min0 = (0..k).map(|r| periodic_value(field, vec![0; (k - 1).saturating_sub(r)], lead(1, 0))).collect();
        let max1 = (0..k).map(|r| periodic_value(field, vec![1; (k - 1).saturating_sub(r)], lead(0, 1))).collect();
        Ok(SkSet {
            field: field.clone(),
            k,
            top: FieldElement::q(field).add_int(-1).inv().expect("q > 1"),
            min_after1: periodic_value(field, vec![], block(0, 1)),
            max_after0: periodic_value(field, vec![], block(1, 0)),
            min0,
            max1,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    fn admissible(&self, r: Run) -> bool {
        r.len < self.k
    }

    fn min_cont(&self, st: Option<Run>) -> FieldElement {
        match st {
            None | Some(Run { last: 0, len: 0 }) => FieldElement::zero(&self.field),
            Some(Run { last: 0, len }) => self.min0[len].clone(),
            Some(_) => self.min_after1.clone(),
        }
    }

    fn max_cont(&self, st: Option<Run>) -> FieldElement {
        match st {
            None | Some(Run { last: 1, len: 0 }) => self.top.clone(),
            Some(Run { last: 1, len }) => self.max1[len].clone(),
            Some(_) => self.max_after0.clone(),
        }
    }

    pub fn admits_word(&self, w: &[i8]) -> bool {
        let mut st = None;
        for &s in w {
            let r = push_run(st, s);
            if !self.admissible(r) {
                return false;
            }
            st = Some(r);
        }
        true
    }

    /// Normalised gap length 1 + π((0^{k−1}1)^∞) − π((1^{k−1}0)^∞).
    pub fn unit_gap(&self) -> FieldElement {
        (&self.min_after1 - &self.max_after0).add_int(1)
    }
}

// ---------------------------------------------------------------------------
// piece trees

#[derive(Clone, Debug)]
pub struct PieceNode {
    pub digits: Vec<i8>,
    value: FieldElement,
    scale: FieldElement,
}

impl PieceNode {
    fn root(field: &Arc<Field>) -> Self {
        PieceNode { digits: Vec::new(), value: FieldElement::zero(field), scale: FieldElement::one(field) }
    }

    fn push(&mut self, s: i8) {
        self.scale = &self.scale * &FieldElement::q_inv(self.scale.field());
        if s != 0 {
            self.value = &self.value + &(&self.scale * &FieldElement::from_int(self.scale.field(), s as i64));
        }
        self.digits.push(s);
    }

    fn with(&self, s: i8) -> Self {
        let mut n = self.clone();
        n.push(s);
        n
    }

    pub fn value(&self) -> &FieldElement {
        &self.value
    }
}

#[derive(Clone, Debug)]
pub enum CantorSet {
    Aq(AqFamily),
    Sk(SkSet),
    /// a·X + b with a > 0.
    Affine(Box<CantorSet>, FieldElement, FieldElement),
}

impl CantorSet {
    pub fn field(&self) -> &Arc<Field> {
        match self {
            CantorSet::Aq(f) => &f.field,
            CantorSet::Sk(s) => &s.field,
            CantorSet::Affine(inner, _, _) => inner.field(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            CantorSet::Aq(_) => "aq".into(),
            CantorSet::Sk(s) => format!("sk:{}", s.k),
            CantorSet::Affine(inner, _, _) => format!("scaled-{}", inner.name()),
        }
    }

    /// (2 − q)·π_q(S^k) + 1.
    pub fn scaled_sk(field: &Arc<Field>, k: usize) -> Result<Self, ThickError> {
        let s = SkSet::new(field, k)?;
        let a = (-FieldElement::q(field)).add_int(2);
        Ok(CantorSet::Affine(Box::new(CantorSet::Sk(s)), a, FieldElement::one(field)))
    }

    pub fn root(&self) -> PieceNode {
        PieceNode::root(self.field())
    }

    pub fn hull(&self, n: &PieceNode) -> (Encl, Encl) {
        match self {
            CantorSet::Aq(f) => {
                let p = n.digits.len();
                (f.tmin[p].scale(&n.scale).shift(&n.value), f.tmax[p].scale(&n.scale).shift(&n.value))
            }
            CantorSet::Sk(s) => {
                let st = run_of(&n.digits);
                let lo = &n.value + &(&n.scale * &s.min_cont(st));
                let hi = &n.value + &(&n.scale * &s.max_cont(st));
                (Encl::exact(lo), Encl::exact(hi))
            }
            CantorSet::Affine(inner, a, b) => {
                let (l, r) = inner.hull(n);
                (l.scale(a).shift(b), r.scale(a).shift(b))
            }
        }
    }

    pub fn set_hull(&self) -> (Encl, Encl) {
        self.hull(&self.root())
    }

    /// Children on either side of the next gap below `n`, and that gap's
    /// level. `None` past the classified horizon.
    pub fn split(&self, n: &PieceNode) -> Option<(PieceNode, PieceNode, usize)> {
        match self {
            CantorSet::Aq(f) => {
                let p = n.digits.len();
                let j = *f.free.iter().find(|&&j| j > p)?;
                if j > f.max_pos {
                    return None;
                }
                let mut base = n.clone();
                for i in p..j - 1 {
                    base.push(f.amin[i]);
                }
                Some((base.with(0), base.with(1), j + 1))
            }
            CantorSet::Sk(s) => {
                let mut base = n.clone();
                let mut st = run_of(&base.digits);
                loop {
                    let r0 = push_run(st, 0);
                    let r1 = push_run(st, 1);
                    match (s.admissible(r0), s.admissible(r1)) {
                        (true, true) => {
                            let lvl = base.digits.len() + 1;
                            return Some((base.with(0), base.with(1), lvl));
                        }
                        (true, false) => {
                            base.push(0);
                            st = Some(r0);
                        }
                        (false, true) => {
                            base.push(1);
                            st = Some(r1);
                        }
                        (false, false) => unreachable!("every S^k word extends"),
                    }
                }
            }
            CantorSet::Affine(inner, _, _) => inner.split(n),
        }
    }
}

// ---------------------------------------------------------------------------
// gaps

#[derive(Clone, Debug)]
pub struct Gap {
    pub lo: Encl,
    pub hi: Encl,
    pub level: usize,
    /// Common prefix of the two sides.
    pub prefix: Vec<i8>,
    pub left: Encl,
    pub right: Encl,
}

impl Gap {
    pub fn length(&self) -> Encl {
        self.hi.sub(&self.lo)
    }
}

/// All gaps of one level that share length and bridge lengths.
#[derive(Clone, Debug)]
pub struct GapClass {
    pub level: usize,
    pub count: u128,
    pub gap: Encl,
    pub left: Encl,
    pub right: Encl,
}

impl GapClass {
    pub fn ratio_lower(&self) -> FieldElement {
        let b = FieldElement::min(&self.left.lo, &self.right.lo);
        b.div(&self.gap.hi).expect("gaps have positive length")
    }
}

#[derive(Clone, Debug)]
pub struct GapStructure {
    pub family: String,
    pub hull: (Encl, Encl),
    pub level: usize,
    /// Sorted explicit gaps of level ≤ `explicit_level`.
    pub gaps: Vec<Gap>,
    pub explicit_level: usize,
    /// Every level ≤ `level`, with multiplicities.
    pub classes: Vec<GapClass>,
    /// Upper bound for the length of any gap of level > `level`.
    pub deeper_gap_bound: FieldElement,
    /// The class ratios repeat at every deeper level, so the thickness
    /// bound holds for the whole set.
    pub exact_all_levels: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilySpec {
    Aq,
    Sk(usize),
    ScaledSk(usize),
}

impl FamilySpec {
    pub fn parse(s: &str) -> Option<Self> {
        if s == "aq" {
            return Some(FamilySpec::Aq);
        }
        if let Some(k) = s.strip_prefix("scaled-sk:") {
            return k.parse().ok().map(FamilySpec::ScaledSk);
        }
        s.strip_prefix("sk:").and_then(|k| k.parse().ok()).map(FamilySpec::Sk)
    }

    pub fn build(self, field: &Arc<Field>, max_pos: usize) -> Result<CantorSet, ThickError> {
        Ok(match self {
            FamilySpec::Aq => CantorSet::Aq(AqFamily::new(field, max_pos)?),
            FamilySpec::Sk(k) => CantorSet::Sk(SkSet::new(field, k)?),
            FamilySpec::ScaledSk(k) => CantorSet::scaled_sk(field, k)?,
        })
    }
}

pub fn enumerate_gaps(field: &Arc<Field>, family: FamilySpec, level: usize) -> Result<GapStructure, ThickError> {
    let set = family.build(field, level)?;
    Ok(gap_structure(&set, level))
}

/// Gap classes of every level ≤ `level`.
fn gap_classes(set: &CantorSet, level: usize) -> (Vec<GapClass>, FieldElement, bool) {
    let field = set.field().clone();
    match set {
        CantorSet::Aq(f) => {
            let mut out = Vec::new();
            for (i, &j) in f.free.iter().enumerate() {
                if j + 1 > level || j > f.max_pos {
                    break;
                }
                let s = qpow(&field, -(j as i64));
                let spread = f.tmax[j].sub(&f.tmin[j]);
                let gap =
                    Encl::new((&f.tmin[j].lo - &f.tmax[j].hi).add_int(1), (&f.tmin[j].hi - &f.tmax[j].lo).add_int(1))
                        .scale(&s);
                let bridge = spread.scale(&s);
                out.push(GapClass {
                    level: j + 1,
                    count: 1u128 << i.min(127),
                    gap,
                    left: bridge.clone(),
                    right: bridge,
                });
            }
            // a level-k gap is shorter than q^{-k+1}
            (out, qpow(&field, -(level as i64)), false)
        }
        CantorSet::Sk(s) => sk_classes(s, level),
        CantorSet::Affine(inner, a, _) => {
            let (cl, bound, exact) = gap_classes(inner, level);
            let cl = cl
                .into_iter()
                .map(|c| GapClass {
                    level: c.level,
                    count: c.count,
                    gap: c.gap.scale(a),
                    left: c.left.scale(a),
                    right: c.right.scale(a),
                })
                .collect();
            (cl, &bound * a, exact)
        }
    }
}

/// Dynamic programme over trailing-run states of S^k words.
fn sk_classes(s: &SkSet, level: usize) -> (Vec<GapClass>, FieldElement, bool) {
    let field = &s.field;
    let unit = s.unit_gap();
    let mut states: BTreeMap<Option<Run>, u128> = BTreeMap::new();
    states.insert(None, 1);
    let mut out = Vec::new();
    let mut prev_keys = None;
    let mut stable = false;
    for n in 1..=level {
        // words of length n - 1 branch into the level-n gaps
        let sc = qpow(field, -(n as i64));
        let mut by_bridge: BTreeMap<(Option<Run>, Option<Run>), u128> = BTreeMap::new();
        let mut next: BTreeMap<Option<Run>, u128> = BTreeMap::new();
        for (&st, &cnt) in &states {
            let r0 = push_run(st, 0);
            let r1 = push_run(st, 1);
            let ok0 = s.admissible(r0);
            let ok1 = s.admissible(r1);
            if ok0 && ok1 {
                *by_bridge.entry((Some(r0), Some(r1))).or_default() += cnt;
            }
            for (ok, r) in [(ok0, r0), (ok1, r1)] {
                if ok {
                    let e = next.entry(Some(r)).or_default();
                    *e = e.saturating_add(cnt);
                }
            }
        }
        for ((a, b), cnt) in by_bridge {
            let left = &s.max_after0 - &s.min_cont(a);
            let right = &s.max_cont(b) - &s.min_after1;
            out.push(GapClass {
                level: n,
                count: cnt,
                gap: Encl::exact(&unit * &sc),
                left: Encl::exact(&left * &sc),
                right: Encl::exact(&right * &sc),
            });
        }
        let keys: Vec<Option<Run>> = states.keys().copied().collect();
        if prev_keys.as_ref() == Some(&keys) {
            stable = true;
        }
        prev_keys = Some(keys);
        states = next;
    }
    let bound = &unit * &qpow(field, -(level as i64 + 1));
    (out, bound, stable)
}

fn collect_gaps(set: &CantorSet, node: &PieceNode, max_level: usize) -> Vec<Gap> {
    let Some((a, b, lvl)) = set.split(node) else {
        return Vec::new();
    };
    if lvl > max_level {
        return Vec::new();
    }
    let lo = set.hull(&a).1;
    let hi = set.hull(&b).0;
    let prefix = a.digits[..a.digits.len() - 1].to_vec();
    let gap = Gap {
        lo,
        hi,
        level: lvl,
        prefix,
        left: Encl::exact(FieldElement::zero(set.field())),
        right: Encl::exact(FieldElement::zero(set.field())),
    };
    let (mut l, r) = if a.digits.len() < 12 {
        rayon::join(|| collect_gaps(set, &a, max_level), || collect_gaps(set, &b, max_level))
    } else {
        (collect_gaps(set, &a, max_level), collect_gaps(set, &b, max_level))
    };
    l.push(gap);
    l.extend(r);
    l
}

/// Bridges against the nearest gap of level ≤ own level on each side, or
/// the hull end. Gap lengths strictly decrease with level and agree within
/// a level, so this is the nearest at-least-as-long gap.
fn assign_bridges(hull: &(Encl, Encl), gaps: &mut [Gap]) {
    let mut stack: Vec<usize> = Vec::new();
    for i in 0..gaps.len() {
        while let Some(&t) = stack.last() {
            if gaps[t].level > gaps[i].level {
                stack.pop();
            } else {
                break;
            }
        }
        let from = stack.last().map_or(&hull.0, |&t| &gaps[t].hi);
        gaps[i].left = gaps[i].lo.sub(from);
        stack.push(i);
    }
    stack.clear();
    for i in (0..gaps.len()).rev() {
        while let Some(&t) = stack.last() {
            if gaps[t].level > gaps[i].level {
                stack.pop();
            } else {
                break;
            }
        }
        let to = stack.last().map_or(&hull.1, |&t| &gaps[t].lo);
        gaps[i].right = to.sub(&gaps[i].hi);
        stack.push(i);
    }
}

pub fn gap_structure(set: &CantorSet, level: usize) -> GapStructure {
    let (classes, deeper_gap_bound, exact_all_levels) = gap_classes(set, level);
    let limit = if matches!(set, CantorSet::Aq(_)) { EXPLICIT_LIMIT } else { EXPLICIT_LIMIT_SK };
    let mut explicit_level = 0;
    let mut total = 0u128;
    for l in 1..=level {
        total = total.saturating_add(classes.iter().filter(|c| c.level == l).map(|c| c.count).sum::<u128>());
        if total > limit {
            break;
        }
        explicit_level = l;
    }
    let hull = set.set_hull();
    let mut gaps = collect_gaps(set, &set.root(), explicit_level);
    assign_bridges(&hull, &mut gaps);
    GapStructure { family: set.name(), hull, level, gaps, explicit_level, classes, deeper_gap_bound, exact_all_levels }
}

impl GapStructure {
    /// Builds a structure from explicit gaps `(lo, hi, level)`; bridges are
    /// assigned from the levels.
    pub fn from_gaps(hull: (FieldElement, FieldElement), gaps: Vec<(FieldElement, FieldElement, usize)>) -> Self {
        let field = hull.0.field().clone();
        let hull = (Encl::exact(hull.0), Encl::exact(hull.1));
        let mut gaps: Vec<Gap> = gaps
            .into_iter()
            .map(|(lo, hi, level)| Gap {
                lo: Encl::exact(lo),
                hi: Encl::exact(hi),
                level,
                prefix: Vec::new(),
                left: Encl::exact(FieldElement::zero(&field)),
                right: Encl::exact(FieldElement::zero(&field)),
            })
            .collect();
        gaps.sort_by(|a, b| a.lo.lo.cmp(&b.lo.lo));
        assign_bridges(&hull, &mut gaps);
        let level = gaps.iter().map(|g| g.level).max().unwrap_or(0);
        let classes = gaps
            .iter()
            .map(|g| GapClass {
                level: g.level,
                count: 1,
                gap: g.length(),
                left: g.left.clone(),
                right: g.right.clone(),
            })
            .collect();
        GapStructure {
            family: "explicit".into(),
            hull,
            level,
            gaps,
            explicit_level: level,
            classes,
            deeper_gap_bound: FieldElement::zero(&field),
            exact_all_levels: true,
        }
    }

    pub fn gap_count(&self) -> u128 {
        self.classes.iter().map(|c| c.count).fold(0u128, |a, b| a.saturating_add(b))
    }

    /// Upper bound for the longest gap at any level.
    pub fn largest_gap(&self) -> FieldElement {
        self.classes
            .iter()
            .map(|c| c.gap.hi.clone())
            .fold(self.deeper_gap_bound.clone(), |a, b| FieldElement::max(&a, &b))
    }

    pub fn hull_width(&self) -> Encl {
        self.hull.1.sub(&self.hull.0)
    }

    pub fn to_json(&self, digits: usize) -> serde_json::Value {
        let field = self.hull.0.lo.field();
        let tau =
            (!self.classes.is_empty()).then(|| Encl::exact(thickness_lower_bound(self)).strings(digits)[0].clone());
        serde_json::json!({
            "q": field.label(),
            "set": self.family,
            "level": self.level,
            "hull": [self.hull.0.strings(digits)[0], self.hull.1.strings(digits)[1]],
            "gap_count": self.gap_count().to_string(),
            "explicit_level": self.explicit_level,
            "largest_gap": Encl::exact(self.largest_gap()).strings(digits)[1],
            "thickness_lower_bound": tau,
            "exact_all_levels": self.exact_all_levels,
        })
    }
}

/// min over the listed gaps of min(|L|, |R|)/|G|, rounded down. For A_q the
/// value only covers levels ≤ `gs.level`; deeper levels rest on the
/// analytic floor q^-5.
pub fn thickness_lower_bound(gs: &GapStructure) -> FieldElement {
    gs.classes.iter().map(GapClass::ratio_lower).min().expect("thickness of a structure without gaps")
}

// ---------------------------------------------------------------------------
// interleaving

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum HullRelation {
    /// The hull contains an endpoint of the other set.
    ContainsEndpoint,
    /// The hull lies inside the other hull and is longer than every gap.
    WiderThanEveryGap,
    /// Lies inside the other hull; no listed gap contains it and unlisted
    /// gaps are too short.
    AvoidsListedGaps {
        checked: usize,
    },
    InGap {
        level: usize,
    },
    Outside,
    Undecided,
}

impl HullRelation {
    pub fn meets(&self) -> bool {
        matches!(
            self,
            HullRelation::ContainsEndpoint | HullRelation::WiderThanEveryGap | HullRelation::AvoidsListedGaps { .. }
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Interleaving {
    pub interleaved: bool,
    /// How hull(A) meets B.
    pub a_hull_in_b: HullRelation,
    pub b_hull_in_a: HullRelation,
}

fn contains_point(x: &(Encl, Encl), p: &Encl) -> bool {
    x.0.hi <= p.lo && p.hi <= x.1.lo
}

fn hull_relation(x: &(Encl, Encl), gs: &GapStructure) -> HullRelation {
    let (lo, hi) = &gs.hull;
    if x.1.lt(lo) || hi.lt(&x.0) {
        return HullRelation::Outside;
    }
    if contains_point(x, lo) || contains_point(x, hi) {
        return HullRelation::ContainsEndpoint;
    }
    if !(lo.lt(&x.0) && x.1.lt(hi)) {
        return HullRelation::Undecided;
    }
    let width = &x.1.lo - &x.0.hi;
    if width > gs.largest_gap() {
        return HullRelation::WiderThanEveryGap;
    }
    let mut open = false;
    for g in &gs.gaps {
        if g.lo.hi <= x.0.lo && x.1.hi <= g.hi.lo {
            return HullRelation::InGap { level: g.level };
        }
        let excluded = x.0.hi <= g.lo.lo || g.hi.hi <= x.1.lo;
        if !excluded {
            open = true;
        }
    }
    let unlisted_short = gs.classes.iter().filter(|c| c.level > gs.explicit_level).all(|c| c.gap.hi < width)
        && gs.deeper_gap_bound < width;
    if !open && unlisted_short {
        HullRelation::AvoidsListedGaps { checked: gs.gaps.len() }
    } else {
        HullRelation::Undecided
    }
}

/// Neither set lies in a gap or unbounded component of the other.
pub fn interleaving_check(a: &GapStructure, b: &GapStructure) -> Interleaving {
    let ab = hull_relation(&a.hull, b);
    let ba = hull_relation(&b.hull, a);
    Interleaving { interleaved: ab.meets() && ba.meets(), a_hull_in_b: ab, b_hull_in_a: ba }
}

/// Decides whether the interval `x` meets the part of `set` below `node`.
fn meets(set: &CantorSet, node: &PieceNode, x: &(Encl, Encl), max_steps: usize) -> Option<bool> {
    let mut node = node.clone();
    for _ in 0..max_steps {
        let (l, r) = set.hull(&node);
        if x.1.lt(&l) || r.lt(&x.0) {
            return Some(false);
        }
        if contains_point(x, &l) || contains_point(x, &r) {
            return Some(true);
        }
        if !(l.lt(&x.0) && x.1.lt(&r)) {
            return None;
        }
        let (a, b, _) = set.split(&node)?;
        let ra = set.hull(&a).1;
        let lb = set.hull(&b).0;
        if ra.lt(&x.0) && x.1.lt(&lb) {
            return Some(false);
        }
        if contains_point(x, &ra) || contains_point(x, &lb) {
            return Some(true);
        }
        if x.1.lt(&lb) {
            node = a;
        } else if ra.lt(&x.0) {
            node = b;
        } else {
            return None;
        }
    }
    None
}

fn pieces_interleaved(a: &CantorSet, na: &PieceNode, b: &CantorSet, nb: &PieceNode) -> bool {
    const STEPS: usize = 400;
    meets(a, na, &b.hull(nb), STEPS) == Some(true) && meets(b, nb, &a.hull(na), STEPS) == Some(true)
}

fn hull_width(set: &CantorSet, n: &PieceNode) -> FieldElement {
    let (l, r) = set.hull(n);
    &r.hi - &l.lo
}

/// Pair of interleaved pieces after refinement.
#[derive(Clone, Debug)]
pub struct Localized {
    pub a: PieceNode,
    pub b: PieceNode,
    pub steps: usize,
    pub interval: Encl,
}

/// Repeatedly replaces a piece by an interleaved child until both hulls are
/// narrower than `width`. Both sets must have thickness product above 1 for
/// every certified pair to meet, which the caller establishes.
pub fn localize(a: &CantorSet, b: &CantorSet, width: &FieldElement, budget: usize) -> Result<Localized, ThickError> {
    let mut na = a.root();
    let mut nb = b.root();
    if !pieces_interleaved(a, &na, b, &nb) {
        return Err(ThickError::NotInterleaved);
    }
    let mut steps = 0;
    loop {
        let wa = hull_width(a, &na);
        let wb = hull_width(b, &nb);
        if &wa < width && &wb < width {
            break;
        }
        if steps >= budget {
            return Err(ThickError::RefinementBudgetExceeded(budget));
        }
        steps += 1;
        let a_first = wa >= wb;
        let mut moved = false;
        for side_a in [a_first, !a_first] {
            let cur = if side_a { &na } else { &nb };
            let set = if side_a { a } else { b };
            if (if side_a { &wa } else { &wb }) < width {
                continue;
            }
            let Some((c0, c1, _)) = set.split(cur) else {
                continue;
            };
            let pick = [c0, c1].into_iter().find(|c| {
                if side_a {
                    pieces_interleaved(a, c, b, &nb)
                } else {
                    pieces_interleaved(a, &na, b, c)
                }
            });
            if let Some(c) = pick {
                if side_a {
                    na = c;
                } else {
                    nb = c;
                }
                moved = true;
                break;
            }
        }
        if !moved {
            return Err(ThickError::WitnessFailed(format!("no interleaved child pair after {steps} steps")));
        }
    }
    let (la, ra) = a.hull(&na);
    let (lb, rb) = b.hull(&nb);
    let interval = Encl::new(FieldElement::max(&la.lo, &lb.lo), FieldElement::min(&ra.hi, &rb.hi));
    Ok(Localized { a: na, b: nb, steps, interval })
}

// ---------------------------------------------------------------------------
// Newhouse certificate and the three-point slice

#[derive(Clone, Debug)]
pub struct NewhouseReport {
    pub certificate: Certificate,
    pub aq: GapStructure,
    pub sk: GapStructure,
    pub interleaving: Interleaving,
    pub tau_aq: FieldElement,
    pub tau_sk: FieldElement,
    pub witness: Localized,
}

const CERT_BITS: u32 = 96;

fn pipeline(
    field: &Arc<Field>,
    level: usize,
    max_pos: usize,
) -> Result<(CantorSet, CantorSet, NewhouseReport), ThickError> {
    require_above_q9(field)?;
    let q = FieldElement::q(field);
    let one = FieldElement::one(field);
    let a = CantorSet::Aq(AqFamily::new(field, max_pos.max(level))?);
    let b = CantorSet::scaled_sk(field, 9)?;
    let aq = gap_structure(&a, level);
    let sk = gap_structure(&b, level);
    let tau_aq = thickness_lower_bound(&aq);
    let tau_sk = thickness_lower_bound(&sk);
    let floor_a = qpow(field, -5);
    let floor_b = qpow(field, 6);
    if tau_aq <= floor_a || tau_sk <= floor_b || !sk.exact_all_levels {
        return Err(ThickError::ThicknessTooSmall(level));
    }
    let inter = interleaving_check(&aq, &sk);
    if !inter.interleaved {
        return Err(ThickError::NotInterleaved);
    }
    let witness = localize(&a, &b, &qpow(field, -(level as i64)), REFINEMENT_BUDGET)?;

    let mut cert = Certificate::new("intersection of pi_q(A_q) and (2-q)pi_q(S^9)+1 is nonempty", field);
    let mut bonacci9 = FieldElement::from_int(field, -1);
    for i in 1..=8 {
        bonacci9 = &bonacci9 - &q.pow(i).expect("power");
    }
    bonacci9 = &bonacci9 + &q.pow(9).expect("power");
    let zero = FieldElement::zero(field);
    cert.push("q above q_9: q^9 - q^8 - ... - 1 > 0", &bonacci9, Rel::Gt, &zero);
    cert.push("q below 2", &q, Rel::Lt, &FieldElement::from_int(field, 2));
    cert.push("A_q thickness at listed levels exceeds q^-5", &round_down(&tau_aq, CERT_BITS), Rel::Gt, &floor_a);
    cert.push("S^9 thickness exceeds q^6", &round_down(&tau_sk, CERT_BITS), Rel::Gt, &floor_b);
    cert.push("product of thickness floors q^-5 * q^6 exceeds 1", &(&floor_a * &floor_b), Rel::Gt, &one);
    cert.push("hull of pi_q(A_q) starts at or after 1", &round_down(&aq.hull.0.lo, CERT_BITS), Rel::Ge, &one);
    let top = q.add_int(-1).inv().expect("q > 1");
    cert.push("hull of pi_q(A_q) ends at or before 1/(q-1)", &round_up(&aq.hull.1.hi, CERT_BITS), Rel::Le, &top);
    let width = &aq.hull.1.lo - &aq.hull.0.hi;
    cert.push(
        "largest gap of (2-q)pi_q(S^9)+1 is shorter than the hull of pi_q(A_q)",
        &round_up(&sk.largest_gap(), CERT_BITS),
        Rel::Lt,
        &round_down(&width, CERT_BITS),
    );
    cert.set_witness(&witness.interval.lo, &witness.interval.hi);
    cert.level = Some(level);
    let report = NewhouseReport { certificate: cert, aq, sk, interleaving: inter, tau_aq, tau_sk, witness };
    Ok((a, b, report))
}

/// Thickness, interleaving and a localized intersection interval for
/// π_q(A_q) and (2 − q)π_q(S^9) + 1, gaps listed to `level`.
pub fn newhouse_certify(field: &Arc<Field>, level: usize) -> Result<NewhouseReport, ThickError> {
    pipeline(field, level, level + 16).map(|(_, _, r)| r)
}

#[derive(Clone, Debug)]
pub struct Slice3Witness {
    /// Point of J_q with three orbits.
    pub y: FieldElement,
    /// Interval known to contain q·y* for an exact intersection point y*.
    pub interval: Encl,
    /// Slice height y(q − 1).
    pub height: FieldElement,
    pub slice: SliceResult,
    pub images: [UniqueStatus; 3],
    pub refinements: usize,
    pub certificate: Certificate,
}

/// Localizes a point qy of the intersection finely enough that y has
/// exactly three orbits to `depth`.
pub fn find_slice3_witness(field: &Arc<Field>, depth: usize) -> Result<Slice3Witness, ThickError> {
    let level = 40;
    let target = depth + 30;
    let (a, b, report) = pipeline(field, level, target + 32)?;
    let loc = localize(&a, &b, &qpow(field, -(target as i64)), REFINEMENT_BUDGET)?;
    let q = FieldElement::q(field);
    let z = loc.interval.mid();
    let y = z.div(&q).expect("q > 0");
    let height = &y * &q.add_int(-1);
    let slice = compute_slice(field, &height, depth)?;
    let sys = DynSystem::new(SystemKind::Eq, field).map_err(SliceError::from)?;
    let children = sys.applicable(&y);
    if children.len() != 3 {
        return Err(ThickError::WitnessFailed(format!("{} maps apply at y", children.len())));
    }
    let st: Vec<UniqueStatus> = children.iter().map(|(_, x)| unique_orbit_check(&sys, x, depth)).collect();
    if st.iter().any(|s| matches!(s, UniqueStatus::BranchFoundAt(_))) {
        return Err(ThickError::WitnessFailed("an image branches within the depth".into()));
    }
    if !matches!(slice.claim, CardinalityClaim::ExactlyN { n: 3, .. }) {
        return Err(ThickError::WitnessFailed(format!("slice claim {:?}", slice.claim)));
    }
    let mut cert = report.certificate.clone();
    cert.claim = "slice with exactly three points near the witness height".into();
    cert.set_witness(&loc.interval.lo, &loc.interval.hi);
    cert.depth = Some(depth);
    let (lo, hi) = crate::dynamics::switch_region(field);
    cert.push("y at or above 1/q", &y, Rel::Ge, &lo);
    cert.push("y at or below 1/(q(q-1))", &y, Rel::Le, &hi);
    Ok(Slice3Witness {
        y,
        interval: loc.interval,
        height,
        slice,
        images: [st[0].clone(), st[1].clone(), st[2].clone()],
        refinements: loc.steps,
        certificate: cert,
    })
}

/// Sequence value of a finite binary prefix.
pub fn prefix_value(field: &Arc<Field>, digits: &[i8]) -> FieldElement {
    finite_sum(field, digits)
}
