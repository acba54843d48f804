//! The expansion dynamics on I_q: the three-map system E_q with half-open
//! domains, the base-q system Ê_q, and the signed-digit system E*_q on I*_q.
//! Also the projections π₃ and π_q and bounded-depth orbit enumeration.

use crate::numeric::{cmp_with_bonacci, decimal_bounds, Field, FieldElement};
use crate::words::{member, Alphabet, SubshiftKind, SubshiftSpec, Tail, Word};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::Arc;

/// Default depth for orbit certification.
pub const DEFAULT_DEPTH: usize = 48;
/// Node budget for a single orbit tree.
pub const DEFAULT_NODE_BUDGET: usize = 1 << 18;
/// Largest k tried when looking for a subshift S^k that certifies uniqueness.
const MAX_SUBSHIFT_K: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DynError {
    #[error("base must lie strictly between 1 and 2")]
    BaseOutOfRange,
    #[error("point lies outside the system's interval")]
    OutsideInterval,
    #[error("no map with index {0}")]
    NoSuchMap(usize),
    #[error("point outside the domain of map {map} ({side:?} endpoint{})", if *.open { ", open" } else { "" })]
    OutOfDomain { map: usize, side: Side, open: bool },
    #[error("image under map {0} leaves the system's interval")]
    ImageOutside(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum SystemKind {
    Eq,
    EqHat,
    EqStar,
}

#[derive(Clone, Debug)]
pub struct Endpoint {
    pub value: FieldElement,
    pub closed: bool,
}

/// `x ↦ a·x + b` on a domain interval.
#[derive(Clone, Debug)]
pub struct AffineMap {
    pub label: i8,
    pub a: FieldElement,
    pub b: FieldElement,
    pub lo: Endpoint,
    pub hi: Endpoint,
}

impl AffineMap {
    pub fn eval(&self, x: &FieldElement) -> FieldElement {
        &(&self.a * x) + &self.b
    }

    /// Exact domain test, honoring open endpoints.
    pub fn domain_check(&self, x: &FieldElement) -> Result<(), (Side, bool)> {
        match x.cmp(&self.lo.value) {
            Ordering::Less => return Err((Side::Left, false)),
            Ordering::Equal if !self.lo.closed => return Err((Side::Left, true)),
            _ => {}
        }
        match x.cmp(&self.hi.value) {
            Ordering::Greater => Err((Side::Right, false)),
            Ordering::Equal if !self.hi.closed => Err((Side::Right, true)),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct DynSystem {
    kind: SystemKind,
    field: Arc<Field>,
    maps: Vec<AffineMap>,
    lo: FieldElement,
    hi: FieldElement,
}

fn closed(v: FieldElement) -> Endpoint {
    Endpoint { value: v, closed: true }
}

fn open(v: FieldElement) -> Endpoint {
    Endpoint { value: v, closed: false }
}

/// Checks 1 < q < 2 exactly.
pub fn check_base(field: &Arc<Field>) -> Result<(), DynError> {
    let q = FieldElement::q(field);
    if q <= FieldElement::one(field) || q >= FieldElement::from_int(field, 2) {
        return Err(DynError::BaseOutOfRange);
    }
    Ok(())
}

impl DynSystem {
    pub fn new(kind: SystemKind, field: &Arc<Field>) -> Result<Self, DynError> {
        check_base(field)?;
        let f = field;
        let q = FieldElement::q(f);
        let one = FieldElement::one(f);
        let zero = FieldElement::zero(f);
        let qm1 = q.add_int(-1);
        let inv_qm1 = qm1.inv().expect("q > 1");
        let inv_q = q.inv().expect("q > 0");
        let top_switch = (&q * &qm1).inv().expect("q > 1");
        let two_minus_q = FieldElement::from_int(f, 2) - q.clone();
        let (maps, lo, hi) = match kind {
            SystemKind::Eq => {
                let inv_2mq = two_minus_q.inv().expect("q < 2");
                let maps = vec![
                    AffineMap {
                        label: 0,
                        a: q.clone(),
                        b: zero.clone(),
                        lo: closed(zero.clone()),
                        hi: open(top_switch.clone()),
                    },
                    AffineMap {
                        label: 1,
                        a: -(&q * &inv_2mq),
                        b: &inv_qm1 + &inv_2mq,
                        lo: open(inv_q.clone()),
                        hi: closed(top_switch.clone()),
                    },
                    AffineMap {
                        label: 2,
                        a: q.clone(),
                        b: -one.clone(),
                        lo: closed(inv_q.clone()),
                        hi: closed(inv_qm1.clone()),
                    },
                ];
                (maps, zero.clone(), inv_qm1.clone())
            }
            SystemKind::EqHat => {
                let maps = vec![
                    AffineMap {
                        label: 0,
                        a: q.clone(),
                        b: zero.clone(),
                        lo: closed(zero.clone()),
                        hi: closed(top_switch.clone()),
                    },
                    AffineMap {
                        label: 1,
                        a: q.clone(),
                        b: -one.clone(),
                        lo: closed(inv_q.clone()),
                        hi: closed(inv_qm1.clone()),
                    },
                ];
                (maps, zero.clone(), inv_qm1.clone())
            }
            SystemKind::EqStar => {
                // (2-q)/(q(q-1))
                let inner = &two_minus_q * &top_switch;
                let maps = vec![
                    AffineMap {
                        label: -1,
                        a: q.clone(),
                        b: one.clone(),
                        lo: closed(-inv_qm1.clone()),
                        hi: closed(inner.clone()),
                    },
                    AffineMap {
                        label: 0,
                        a: q.clone(),
                        b: zero.clone(),
                        lo: closed(-top_switch.clone()),
                        hi: closed(top_switch.clone()),
                    },
                    AffineMap {
                        label: 1,
                        a: q.clone(),
                        b: -one.clone(),
                        lo: closed(-inner),
                        hi: closed(inv_qm1.clone()),
                    },
                ];
                (maps, -inv_qm1.clone(), inv_qm1.clone())
            }
        };
        Ok(DynSystem { kind, field: field.clone(), maps, lo, hi })
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn maps(&self) -> &[AffineMap] {
        &self.maps
    }

    /// The ambient interval, I_q or I*_q.
    pub fn interval(&self) -> (&FieldElement, &FieldElement) {
        (&self.lo, &self.hi)
    }

    pub fn contains(&self, x: &FieldElement) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn alphabet(&self) -> Alphabet {
        match self.kind {
            SystemKind::Eq => Alphabet::Ternary012,
            SystemKind::EqHat => Alphabet::Binary01,
            SystemKind::EqStar => Alphabet::Signed,
        }
    }

    /// Map index of a digit label.
    pub fn index_of(&self, label: i8) -> Option<usize> {
        self.maps.iter().position(|m| m.label == label)
    }

    /// J_q = [1/q, 1/(q(q-1))].
    pub fn switch_region(&self) -> (FieldElement, FieldElement) {
        switch_region(&self.field)
    }

    pub fn apply(&self, i: usize, x: &FieldElement) -> Result<FieldElement, DynError> {
        apply_map(self, i, x)
    }

    /// Indices of the maps applicable at `x`, in label order.
    pub fn applicable(&self, x: &FieldElement) -> Vec<(usize, FieldElement)> {
        (0..self.maps.len()).filter_map(|i| apply_map(self, i, x).ok().map(|y| (i, y))).collect()
    }
}

pub fn switch_region(field: &Arc<Field>) -> (FieldElement, FieldElement) {
    let q = FieldElement::q(field);
    let lo = q.inv().expect("q > 0");
    let hi = (&q * &q.add_int(-1)).inv().expect("q > 1");
    (lo, hi)
}

pub fn in_switch_region(field: &Arc<Field>, x: &FieldElement) -> bool {
    let (lo, hi) = switch_region(field);
    &lo <= x && x <= &hi
}

pub fn apply_map(sys: &DynSystem, i: usize, x: &FieldElement) -> Result<FieldElement, DynError> {
    let m = sys.maps.get(i).ok_or(DynError::NoSuchMap(i))?;
    if !sys.contains(x) {
        return Err(DynError::OutsideInterval);
    }
    m.domain_check(x).map_err(|(side, open)| DynError::OutOfDomain { map: i, side, open })?;
    let y = m.eval(x);
    if !sys.contains(&y) {
        return Err(DynError::ImageOutside(i));
    }
    Ok(y)
}

/// Runs the maps named by `labels` from `x`; reports the failing step.
pub fn drive(sys: &DynSystem, x: &FieldElement, labels: &[i8]) -> Result<FieldElement, (usize, DynError)> {
    let mut p = x.clone();
    for (step, &l) in labels.iter().enumerate() {
        let i = sys.index_of(l).ok_or((step, DynError::NoSuchMap(l as usize)))?;
        p = apply_map(sys, i, &p).map_err(|e| (step, e))?;
    }
    Ok(p)
}

// ---------------------------------------------------------------------------
// projections

/// Σ s_j q^-j over a finite digit string, by Horner's rule.
pub fn finite_sum(field: &Arc<Field>, digits: &[i8]) -> FieldElement {
    let qinv = FieldElement::q_inv(field);
    let mut v = FieldElement::zero(field);
    for &d in digits.iter().rev() {
        v = &v.add_int(d as i64) * &qinv;
    }
    v
}

/// Exact π_q of an eventually periodic sequence over {0,1} or {-1,0,1}.
pub fn project_q(field: &Arc<Field>, t: &Tail) -> FieldElement {
    let pre = t.preperiod().symbols();
    let per = t.period().symbols();
    let qinv = FieldElement::q_inv(field);
    let head = finite_sum(field, pre);
    let block = finite_sum(field, per);
    let ql = qinv.pow(per.len() as i64).expect("nonzero");
    let geo = (FieldElement::one(field) - ql).inv().expect("q > 1");
    let scale = qinv.pow(pre.len() as i64).expect("nonzero");
    &head + &(&scale * &(&block * &geo))
}

/// Exact π₃ of an eventually periodic ternary sequence.
pub fn project_ternary(t: &Tail) -> BigRational {
    let three = BigRational::from_integer(BigInt::from(3));
    let horner = |d: &[i8]| {
        let mut v = BigRational::zero();
        for &s in d.iter().rev() {
            v = (v + BigRational::from_integer(BigInt::from(s))) / &three;
        }
        v
    };
    let pre = t.preperiod().symbols();
    let per = t.period().symbols();
    let l = num_traits::pow(three.clone(), per.len());
    let geo = &l / (&l - BigRational::one());
    let scale = BigRational::one() / num_traits::pow(three.clone(), pre.len());
    horner(pre) + scale * horner(per) * geo
}

/// π_q[w] = [π_q(w0^∞), π_q(w0^∞) + q^-|w|/(q-1)].
pub fn cylinder_interval(field: &Arc<Field>, w: &Word) -> (FieldElement, FieldElement) {
    let lo = finite_sum(field, w.symbols());
    let q = FieldElement::q(field);
    let len = FieldElement::q_inv(field).pow(w.len() as i64).expect("nonzero");
    let width = &len * &q.add_int(-1).inv().expect("q > 1");
    let hi = &lo + &width;
    (lo, hi)
}

/// Doubling map {0,1}^ℕ → {0,1,2}^ℕ sending an Ê_q orbit to an E_q orbit.
///
/// A tail `u 0 1^∞` becomes `2u 1 0^∞`: the half-open domain of f₀ refuses
/// the point 1/(q(q-1)), and f₁ takes it to 0 instead.
pub fn d_map(t: &Tail) -> Tail {
    assert_eq!(t.alphabet(), Alphabet::Binary01, "d_map expects a binary tail");
    let per = t.period().symbols();
    let pre = t.preperiod().symbols();
    let doubled = |s: &[i8]| s.iter().map(|&x| 2 * x).collect::<Vec<i8>>();
    if per == [1] && pre.last() == Some(&0) {
        let mut p = doubled(&pre[..pre.len() - 1]);
        p.push(1);
        return Tail::new(Word::new(Alphabet::Ternary012, p).expect("ternary"), Word::ter("0")).expect("valid");
    }
    Tail::new(
        Word::new(Alphabet::Ternary012, doubled(pre)).expect("ternary"),
        Word::new(Alphabet::Ternary012, doubled(per)).expect("ternary"),
    )
    .expect("valid")
}

// ---------------------------------------------------------------------------
// orbit trees

#[derive(Clone, Debug)]
pub struct OrbitNode {
    pub label: Option<i8>,
    pub point: FieldElement,
    pub level: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NodeStatus {
    Alive,
    DeadEnd,
}

/// All map sequences of length ≤ depth surviving from a root point.
#[derive(Clone, Debug)]
pub struct OrbitTree {
    pub kind: SystemKind,
    pub depth: usize,
    /// Arena, level by level; index 0 is the root.
    pub nodes: Vec<OrbitNode>,
    /// Set when the node budget stopped enumeration before `depth`.
    pub truncated: bool,
    /// Deepest fully enumerated level.
    pub reached: usize,
}

impl OrbitTree {
    pub fn root(&self) -> &OrbitNode {
        &self.nodes[0]
    }

    pub fn status(&self, i: usize) -> NodeStatus {
        let n = &self.nodes[i];
        if n.children.is_empty() && n.level < self.reached {
            NodeStatus::DeadEnd
        } else {
            NodeStatus::Alive
        }
    }

    pub fn level_nodes(&self, level: usize) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().enumerate().filter(move |(_, n)| n.level == level).map(|(i, _)| i)
    }

    /// |Ω^d(x)| for d = the deepest enumerated level.
    pub fn leaf_count(&self) -> usize {
        self.level_nodes(self.reached).count()
    }

    pub fn path_labels(&self, mut i: usize) -> Vec<i8> {
        let mut out = Vec::new();
        while let Some(p) = self.nodes[i].parent {
            out.push(self.nodes[i].label.expect("non-root"));
            i = p;
        }
        out.reverse();
        out
    }

    pub fn path_word(&self, i: usize, alphabet: Alphabet) -> Word {
        Word::new(alphabet, self.path_labels(i)).expect("labels match the system alphabet")
    }

    pub fn leaf_words(&self, alphabet: Alphabet) -> Vec<Word> {
        self.level_nodes(self.reached).map(|i| self.path_word(i, alphabet)).collect()
    }

    /// JSON: node = {label, point_interval, children}.
    pub fn to_json(&self, digits: usize) -> serde_json::Value {
        self.node_json(0, digits)
    }

    fn node_json(&self, i: usize, digits: usize) -> serde_json::Value {
        let n = &self.nodes[i];
        let bits = (digits as f64 * 3.33).ceil() as u32 + 8;
        let (lo, hi) = n.point.enclosure(bits);
        let (lo, hi) = decimal_bounds(&lo, &hi, digits);
        let children: Vec<serde_json::Value> = n.children.iter().map(|&c| self.node_json(c, digits)).collect();
        serde_json::json!({
            "label": n.label,
            "point_interval": [lo, hi],
            "children": children,
        })
    }
}

pub fn enumerate_orbits(sys: &DynSystem, x: &FieldElement, depth: usize) -> OrbitTree {
    enumerate_orbits_bounded(sys, x, depth, DEFAULT_NODE_BUDGET)
}

/// Level-by-level enumeration; stops (and flags `truncated`) before a level
/// that would exceed `max_nodes` in total.
pub fn enumerate_orbits_bounded(sys: &DynSystem, x: &FieldElement, depth: usize, max_nodes: usize) -> OrbitTree {
    let mut nodes = vec![OrbitNode { label: None, point: x.clone(), level: 0, parent: None, children: Vec::new() }];
    let mut frontier: Vec<usize> = if sys.contains(x) { vec![0] } else { Vec::new() };
    let mut reached = 0;
    let mut truncated = false;
    for level in 1..=depth {
        let expanded: Vec<Vec<(i8, FieldElement)>> = frontier
            .par_iter()
            .map(|&i| sys.applicable(&nodes[i].point).into_iter().map(|(m, y)| (sys.maps[m].label, y)).collect())
            .collect();
        let count: usize = expanded.iter().map(Vec::len).sum();
        if nodes.len() + count > max_nodes {
            truncated = true;
            break;
        }
        let mut next = Vec::with_capacity(count);
        for (&parent, kids) in frontier.iter().zip(expanded) {
            for (label, point) in kids {
                let id = nodes.len();
                nodes.push(OrbitNode { label: Some(label), point, level, parent: Some(parent), children: Vec::new() });
                nodes[parent].children.push(id);
                next.push(id);
            }
        }
        frontier = next;
        reached = level;
    }
    OrbitTree { kind: sys.kind, depth, nodes, truncated, reached }
}

// ---------------------------------------------------------------------------
// uniqueness certificates

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum UniqueMethod {
    /// The trajectory repeated a point after `preperiod` steps, with the
    /// given period, without visiting J_q.
    Periodic { preperiod: usize, period: usize },
    /// The trajectory's digits form `expansion`, which projects exactly to
    /// the point and lies in S^k with q > q_k (or Ŝ^k with q = q_k).
    Subshift { k: usize, hat: bool, expansion: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum UniqueStatus {
    UniqueCertified(UniqueMethod),
    BranchFoundAt(usize),
    UnknownAtDepth(usize),
}

impl UniqueStatus {
    pub fn is_certified(&self) -> bool {
        matches!(self, UniqueStatus::UniqueCertified(_))
    }
}

/// Decides whether `x ∈ I_q` has a single E_q orbit, following its only
/// trajectory for up to `depth` steps. A branch is any point where two maps
/// apply; for q ≥ G that is exactly J_q.
// FieldElement hashes its coefficients only; the field's cache is not part of the key
#[allow(clippy::mutable_key_type)]
pub fn unique_orbit_check(sys: &DynSystem, x: &FieldElement, depth: usize) -> UniqueStatus {
    assert_eq!(sys.kind(), SystemKind::Eq, "uniqueness is decided for E_q");
    let mut seen: HashMap<FieldElement, usize> = HashMap::new();
    let mut p = x.clone();
    for step in 0..=depth {
        let next = sys.applicable(&p);
        if next.len() >= 2 {
            return UniqueStatus::BranchFoundAt(step);
        }
        if let Some(&first) = seen.get(&p) {
            return UniqueStatus::UniqueCertified(UniqueMethod::Periodic { preperiod: first, period: step - first });
        }
        if step == depth {
            break;
        }
        seen.insert(p.clone(), step);
        match next.into_iter().next() {
            Some((_, y)) => p = y,
            None => break,
        }
    }
    UniqueStatus::UnknownAtDepth(depth)
}

/// Largest k with q_k ≤ q, and whether q = q_k.
pub fn largest_bonacci_below(field: &Arc<Field>) -> Option<(usize, bool)> {
    // q_k increases to 2; find the largest k with q_k ≤ q
    let mut best = None;
    for k in 2..=MAX_SUBSHIFT_K {
        match cmp_with_bonacci(field, k) {
            Ordering::Greater => best = Some((k, false)),
            Ordering::Equal => return Some((k, true)),
            Ordering::Less => break,
        }
    }
    best
}

/// Certifies `x ∈ U_q` from a known expansion: `t` must project exactly to
/// `x` and lie in S^k for some q_k < q, or in Ŝ^k when q = q_k.
pub fn certify_expansion(field: &Arc<Field>, x: &FieldElement, t: &Tail) -> Option<UniqueMethod> {
    if t.alphabet() != Alphabet::Binary01 || project_q(field, t) != *x {
        return None;
    }
    let (kmax, equal) = largest_bonacci_below(field)?;
    // S^k grows with k, so the largest usable k is the best chance
    let (k, hat) = if equal { (kmax, true) } else { (kmax, false) };
    let kind = if hat { SubshiftKind::SHatK } else { SubshiftKind::Sk };
    if member(&SubshiftSpec::new(kind, k), t).ok()? {
        return Some(UniqueMethod::Subshift { k, hat, expansion: t.to_string() });
    }
    if equal && k > 2 && member(&SubshiftSpec::new(SubshiftKind::Sk, k - 1), t).ok()? {
        return Some(UniqueMethod::Subshift { k: k - 1, hat: false, expansion: t.to_string() });
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{field_from_literal, rat};
    use crate::words::{lex_consecutive, parse_tail, Alphabet};
    use proptest::prelude::*;

    fn fe(f: &Arc<Field>, n: i64, d: i64) -> FieldElement {
        FieldElement::from_rational(f, rat(n, d))
    }

    fn bt(s: &str) -> Tail {
        parse_tail(s, Alphabet::Binary01).unwrap()
    }

    #[test]
    fn ternary_projection_examples() {
        let t = |s| parse_tail(s, Alphabet::Ternary012).unwrap();
        assert_eq!(project_ternary(&t("10*")), rat(1, 3));
        assert_eq!(project_ternary(&t("2*")), rat(1, 1));
        // geometric-series oracle: 3^-2 / (1 - 3^-2)
        assert_eq!(project_ternary(&t("(01)*")), rat(1, 9) / (rat(1, 1) - rat(1, 9)));
    }

    #[test]
    fn q_projection_examples() {
        let f = field_from_literal("bonacci:3").unwrap();
        let q = FieldElement::q(&f);
        assert_eq!(project_q(&f, &bt("10*")), q.inv().unwrap());
        assert_eq!(project_q(&f, &bt("1*")), q.add_int(-1).inv().unwrap());
        for alpha in ["0*", "1*", "(01)*", "1(001)*"] {
            let a = bt(alpha);
            let l = project_q(&f, &a.prepend(&Word::bin("1000")).unwrap());
            let r = project_q(&f, &a.prepend(&Word::bin("0111")).unwrap());
            assert_eq!(l, r, "{alpha}");
        }
    }

    #[test]
    fn projection_matches_partial_sums() {
        let f = field_from_literal("7/4").unwrap();
        let t = bt("101(0011)*");
        let exact = project_q(&f, &t);
        let approx = finite_sum(&f, t.prefix(200).symbols());
        let err = (&exact - &approx).abs();
        assert!(err.to_f64() < 1e-40);
    }

    #[test]
    fn cylinder_examples() {
        let f = field_from_literal("3/2").unwrap();
        let (lo, hi) = cylinder_interval(&f, &Word::empty(Alphabet::Binary01));
        assert_eq!((lo, hi), (fe(&f, 0, 1), fe(&f, 2, 1)));
        let (lo, hi) = cylinder_interval(&f, &Word::bin("1"));
        assert_eq!((lo, hi), (fe(&f, 2, 3), fe(&f, 2, 1)));
    }

    #[test]
    fn map_examples() {
        let f = field_from_literal("5/3").unwrap();
        let sys = DynSystem::new(SystemKind::Eq, &f).unwrap();
        let (_, top) = sys.switch_region();
        assert_eq!(apply_map(&sys, 0, &top), Err(DynError::OutOfDomain { map: 0, side: Side::Right, open: true }));
        let end = sys.interval().1.clone();
        assert_eq!(apply_map(&sys, 2, &end).unwrap(), end);

        for k in 2..=9 {
            let fk = Field::bonacci(k).unwrap();
            let star = DynSystem::new(SystemKind::EqStar, &fk).unwrap();
            let mut p = FieldElement::one(&fk);
            for _ in 0..k {
                p = apply_map(&star, 2, &p).unwrap();
            }
            assert!(p.is_zero(), "k={k}");
        }
    }

    #[test]
    fn base_range_is_enforced() {
        for s in ["2", "1", "3/4", "5/2"] {
            let f = field_from_literal(s).unwrap();
            assert_eq!(DynSystem::new(SystemKind::Eq, &f).err(), Some(DynError::BaseOutOfRange));
        }
    }

    #[test]
    fn maps_stay_in_interval() {
        for s in ["3/2", "5/3", "1.999", "bonacci:3", "6/5"] {
            let f = field_from_literal(s).unwrap();
            for kind in [SystemKind::Eq, SystemKind::EqHat, SystemKind::EqStar] {
                let sys = DynSystem::new(kind, &f).unwrap();
                for m in sys.maps() {
                    let (lo, hi) = sys.interval();
                    if &m.lo.value > hi || &m.hi.value < lo {
                        continue;
                    }
                    let a = FieldElement::max(&m.lo.value, lo);
                    let b = FieldElement::min(&m.hi.value, hi);
                    let (ya, yb) = (m.eval(&a), m.eval(&b));
                    // where the domain fits inside the interval, its image does too
                    if &m.hi.value <= hi {
                        assert!(sys.contains(&ya) && sys.contains(&yb), "{s} {kind:?} {}", m.label);
                    }
                }
            }
        }
    }

    #[test]
    fn orbit_tree_examples() {
        let f = field_from_literal("5/3").unwrap();
        let sys = DynSystem::new(SystemKind::Eq, &f).unwrap();
        let t = enumerate_orbits(&sys, &FieldElement::zero(&f), 10);
        assert_eq!(t.leaf_words(Alphabet::Ternary012), vec![Word::ter("0000000000")]);
        let t = enumerate_orbits(&sys, sys.interval().1, 10);
        assert_eq!(t.leaf_words(Alphabet::Ternary012), vec![Word::ter("2222222222")]);

        let f3 = Field::bonacci(3).unwrap();
        let sys = DynSystem::new(SystemKind::Eq, &f3).unwrap();
        let t = enumerate_orbits(&sys, &FieldElement::q_inv(&f3), 1);
        let labels: Vec<_> = t.root().children.iter().map(|&c| t.nodes[c].label.unwrap()).collect();
        assert_eq!(labels, vec![0, 2]);
        let json = t.to_json(6);
        assert_eq!(json["children"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn every_leaf_extends_a_shorter_leaf() {
        let f = field_from_literal("13/8").unwrap();
        let sys = DynSystem::new(SystemKind::Eq, &f).unwrap();
        let x = fe(&f, 7, 9);
        let deep = enumerate_orbits(&sys, &x, 9).leaf_words(Alphabet::Ternary012);
        let shallow = enumerate_orbits(&sys, &x, 8).leaf_words(Alphabet::Ternary012);
        for w in &deep {
            assert!(shallow.contains(&w.prefix(8)));
        }
        for w in &shallow {
            assert!(deep.iter().any(|d| w.is_prefix_of(d)), "no dead ends");
        }
    }

    #[test]
    fn uniqueness_examples() {
        let eq = |f: &Arc<Field>| DynSystem::new(SystemKind::Eq, f).unwrap();
        let f = field_from_literal("1.999").unwrap();
        let x = project_q(&f, &bt("(011111111)*"));
        assert!(unique_orbit_check(&eq(&f), &x, 48).is_certified());
        let x = project_q(&f, &bt("001(01)*"));
        assert!(unique_orbit_check(&eq(&f), &x, 48).is_certified());
        assert_eq!(unique_orbit_check(&eq(&f), &FieldElement::q_inv(&f), 48), UniqueStatus::BranchFoundAt(0));

        let f3 = Field::bonacci(3).unwrap();
        let x = project_q(&f3, &bt("(01)*"));
        assert!(unique_orbit_check(&eq(&f3), &x, 48).is_certified());

        // below G the top of I_q sits inside J_q yet has one orbit
        let f = field_from_literal("3/2").unwrap();
        assert!(unique_orbit_check(&eq(&f), &fe(&f, 2, 1), 4).is_certified());

        let f = field_from_literal("5/3").unwrap();
        let x = fe(&f, 9, 16);
        assert!(unique_orbit_check(&eq(&f), &x, 48).is_certified());
        match certify_expansion(&f, &x, &bt("(01)*")) {
            Some(UniqueMethod::Subshift { k: 2, hat: false, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert_eq!(certify_expansion(&f, &x, &bt("(10)*")), None);
        // 1 = π(1^3 0^∞) at q₃, but that expansion contains 10^3
        let f3 = Field::bonacci(3).unwrap();
        let one = FieldElement::one(&f3);
        assert_eq!(certify_expansion(&f3, &one, &bt("1110*")), None);
    }

    #[test]
    fn d_map_examples() {
        let t = |s| parse_tail(s, Alphabet::Ternary012).unwrap();
        assert_eq!(d_map(&bt("01*")), t("10*"));
        assert_eq!(d_map(&bt("010*")), t("020*"));
        assert_eq!(d_map(&bt("1*")), t("2*"));
        assert_eq!(d_map(&bt("1101*")), t("2210*"));
    }

    /// F̃_q written out independently, in the y-coordinate of the unit square.
    fn u_tilde_inv(f: &Arc<Field>, i: usize, y: &FieldElement) -> FieldElement {
        let q = FieldElement::q(f);
        match i {
            0 => &q * y,
            1 => (FieldElement::one(f) - &q * y).div(&(FieldElement::from_int(f, 2) - q)).unwrap(),
            _ => (&q * y).add_int(1) - q,
        }
    }

    #[test]
    fn conjugacy_with_unit_square_maps() {
        for s in ["3/2", "5/3", "9/5", "bonacci:3"] {
            let f = field_from_literal(s).unwrap();
            let sys = DynSystem::new(SystemKind::Eq, &f).unwrap();
            let c = FieldElement::q(&f).add_int(-1).inv().unwrap();
            for n in 0..=24 {
                let y = fe(&f, n, 24);
                let x = &y * &c;
                for i in 0..3 {
                    if let Ok(img) = apply_map(&sys, i, &x) {
                        assert_eq!(img, &c * &u_tilde_inv(&f, i, &y));
                    }
                }
            }
        }
    }

    /// Ê_q driven by t stays in I_q iff π_q(t) = x.
    #[test]
    fn base_q_correctness_exhaustive() {
        let f = field_from_literal("8/5").unwrap();
        let sys = DynSystem::new(SystemKind::EqHat, &f).unwrap();
        let mut tails = Vec::new();
        for len in 1..=6usize {
            for bits in 0..(1u32 << len) {
                let s: Vec<i8> = (0..len).map(|i| ((bits >> i) & 1) as i8).collect();
                tails.push(Tail::periodic(Word::new(Alphabet::Binary01, s).unwrap()).unwrap());
            }
        }
        let points: Vec<FieldElement> = tails.iter().step_by(9).map(|t| project_q(&f, t)).collect();
        for t in &tails {
            let labels = t.prefix(120).symbols().to_vec();
            for x in &points {
                let stays = drive(&sys, x, &labels).is_ok();
                assert_eq!(stays, project_q(&f, t) == *x, "{t}");
            }
        }
    }

    #[test]
    fn d_map_embeds_orbits() {
        let f = field_from_literal("8/5").unwrap();
        let hat = DynSystem::new(SystemKind::EqHat, &f).unwrap();
        let eq = DynSystem::new(SystemKind::Eq, &f).unwrap();
        for len in 1..=5usize {
            for bits in 0..(1u32 << (2 * len)) {
                let s: Vec<i8> = (0..2 * len).map(|i| ((bits >> i) & 1) as i8).collect();
                let t = Tail::new(
                    Word::new(Alphabet::Binary01, s[..len].to_vec()).unwrap(),
                    Word::new(Alphabet::Binary01, s[len..].to_vec()).unwrap(),
                )
                .unwrap();
                let x = project_q(&f, &t);
                assert!(drive(&hat, &x, t.prefix(60).symbols()).is_ok());
                let d = d_map(&t);
                assert!(drive(&eq, &x, d.prefix(60).symbols()).is_ok(), "{t} -> {d}");
            }
        }
    }

    #[test]
    fn bonacci_orderings() {
        for k in [3usize, 4] {
            let fk = Field::bonacci(k).unwrap();
            let (lo, _) = fk.base().refine(&rat(1, 1_000_000));
            let q = (lo + rat(1, 1000)).min(rat(1999, 1000));
            let f = Field::rational(q).unwrap();
            let p = |s: &str| project_q(&f, &bt(s));
            let a = p(&format!("01{}0*", "1".repeat(k - 1)));
            let b = p("10*");
            let c = p("01*");
            let d = p(&format!("10{}1*", "0".repeat(k - 1)));
            assert!(a < b && b < c && c < d, "k={k}");
        }
    }

    #[test]
    fn cylinders_meet_iff_consecutive() {
        let f = field_from_literal("1.85").unwrap();
        let spec = SubshiftSpec::new(SubshiftKind::Sk, 3);
        for len in 1..=7usize {
            let words: Vec<Word> = (0..(1u32 << len))
                .map(|b| Word::bin(&format!("{b:0len$b}")))
                .filter(|w| spec.admits_word(w).unwrap())
                .collect();
            for a in &words {
                for b in &words {
                    if a >= b {
                        continue;
                    }
                    let (alo, ahi) = cylinder_interval(&f, a);
                    let (blo, bhi) = cylinder_interval(&f, b);
                    let meet = alo <= bhi && blo <= ahi;
                    assert_eq!(meet, lex_consecutive(a, b).unwrap(), "{a} {b}");
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn nested_cylinders(n in 1u32..40, bits in prop::collection::vec(0i8..=1, 0..12), ext in prop::collection::vec(0i8..=1, 0..6)) {
            let q = rat(40 + n as i64, 40);
            let f = Field::rational(q).unwrap();
            let w = Word::new(Alphabet::Binary01, bits.clone()).unwrap();
            let mut long = bits;
            long.extend(ext);
            let w2 = Word::new(Alphabet::Binary01, long).unwrap();
            let (lo, hi) = cylinder_interval(&f, &w);
            let (lo2, hi2) = cylinder_interval(&f, &w2);
            prop_assert!(lo <= lo2 && hi2 <= hi);
        }
    }
}
