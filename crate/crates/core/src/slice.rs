//! Horizontal slices of the Okamoto attractor K_q.
//!
//! A point (x, y) lies on K_q iff the E_q orbits of y/(q-1) correspond to
//! the restricted ternary expansions of x. `compute_slice` works through
//! that correspondence; `geometric_slice_oracle` uses only the IFS boxes.

use crate::dynamics::{
    enumerate_orbits_bounded, unique_orbit_check, DynError, DynSystem, OrbitTree, SystemKind, UniqueStatus,
};
use crate::numeric::{decimal_bounds, Field, FieldElement};
use crate::words::{Alphabet, Word};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

/// Node budget for slice trees; below G the tree doubles at every level.
pub const DEFAULT_SLICE_BUDGET: usize = 1 << 16;
/// Depth used when cross-checking against the geometric oracle.
pub const ORACLE_DEPTH: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SliceError {
    #[error(transparent)]
    Dynamics(#[from] DynError),
    #[error("height must lie in [0, 1]")]
    HeightOutOfRange,
    #[error("depth must be at least 1")]
    ZeroDepth,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "type")]
pub enum CardinalityClaim {
    /// `certified` is false when the count only held at bounded depth
    /// (no branching in the second half of the tree).
    ExactlyN {
        n: usize,
        certified: bool,
    },
    AtLeastN {
        n: usize,
    },
    /// Two sibling subtrees both branch again: evidence of a full binary
    /// subtree, not a proof.
    UncountablePattern,
    Unknown,
}

#[derive(Clone, Debug)]
pub struct SliceResult {
    pub field: Arc<Field>,
    pub y: FieldElement,
    pub depth: usize,
    /// Depth actually enumerated (smaller than `depth` if the budget ran out).
    pub reached: usize,
    pub cylinders: Vec<Word>,
    /// `disjoint[i]`: the closed ternary interval of cylinder i meets no other.
    pub disjoint: Vec<bool>,
    /// Per cylinder: how its pending orbit was settled.
    pub leaf_status: Vec<UniqueStatus>,
    pub claim: CardinalityClaim,
}

impl SliceResult {
    /// x-coordinates of the cylinders' left ends.
    pub fn x_left_ends(&self) -> Vec<BigRational> {
        self.cylinders.iter().map(ternary_value).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let claim = match &self.claim {
            CardinalityClaim::ExactlyN { n, certified } => {
                serde_json::json!({"type": "ExactlyN", "n": n, "certified": certified})
            }
            CardinalityClaim::AtLeastN { n } => serde_json::json!({"type": "AtLeastN", "n": n, "certified": false}),
            CardinalityClaim::UncountablePattern => {
                serde_json::json!({"type": "UncountablePattern", "n": null, "certified": false})
            }
            CardinalityClaim::Unknown => serde_json::json!({"type": "Unknown", "n": null, "certified": false}),
        };
        serde_json::json!({
            "q": self.field.label(),
            "y": self.y.to_string(),
            "depth": self.depth,
            "reached": self.reached,
            "cylinders": self.cylinders.iter().map(plain).collect::<Vec<_>>(),
            "claim": claim,
        })
    }
}

/// Digits of a word without run-length compression.
pub fn plain(w: &Word) -> String {
    w.symbols().iter().map(|s| s.to_string()).collect()
}

/// Σ w_j 3^-j.
pub fn ternary_value(w: &Word) -> BigRational {
    let three = BigRational::from_integer(BigInt::from(3));
    let mut v = BigRational::zero();
    for &s in w.symbols().iter().rev() {
        v = (v + BigRational::from_integer(BigInt::from(s))) / &three;
    }
    v
}

fn check_height(field: &Arc<Field>, y: &FieldElement) -> Result<(), SliceError> {
    if y.sign() == std::cmp::Ordering::Less || *y > FieldElement::one(field) {
        return Err(SliceError::HeightOutOfRange);
    }
    Ok(())
}

pub fn compute_slice(field: &Arc<Field>, y: &FieldElement, depth: usize) -> Result<SliceResult, SliceError> {
    compute_slice_bounded(field, y, depth, DEFAULT_SLICE_BUDGET)
}

pub fn compute_slice_bounded(
    field: &Arc<Field>,
    y: &FieldElement,
    depth: usize,
    max_nodes: usize,
) -> Result<SliceResult, SliceError> {
    if depth == 0 {
        return Err(SliceError::ZeroDepth);
    }
    let sys = DynSystem::new(SystemKind::Eq, field)?;
    check_height(field, y)?;
    let x = y * &FieldElement::q(field).add_int(-1).inv().expect("q > 1");
    let tree = enumerate_orbits_bounded(&sys, &x, depth, max_nodes);
    let leaves: Vec<usize> = tree.level_nodes(tree.reached).collect();
    let cylinders: Vec<Word> = leaves.iter().map(|&i| tree.path_word(i, Alphabet::Ternary012)).collect();
    let disjoint = disjointness(&cylinders);
    let branch = branch_flags(&tree, &sys);
    // a truncated tree cannot be certified, so its leaves are not followed
    let leaf_status: Vec<UniqueStatus> = if tree.truncated {
        vec![UniqueStatus::UnknownAtDepth(tree.reached); leaves.len()]
    } else {
        // once one leaf fails the claim cannot be certified; the rest are left open
        let mut out = Vec::with_capacity(leaves.len());
        let mut ok = true;
        for &i in &leaves {
            let st = if ok {
                settle_leaf(&sys, &tree, &branch, i, depth)
            } else {
                UniqueStatus::UnknownAtDepth(tree.reached)
            };
            ok = st.is_certified();
            out.push(st);
        }
        out
    };
    let claim = classify(&tree, &branch, &leaves, &leaf_status, &disjoint);
    Ok(SliceResult {
        field: field.clone(),
        y: y.clone(),
        depth,
        reached: tree.reached,
        cylinders,
        disjoint,
        leaf_status,
        claim,
    })
}

/// Cardinality claim only.
pub fn classify_cardinality(
    field: &Arc<Field>,
    y: &FieldElement,
    depth: usize,
) -> Result<CardinalityClaim, SliceError> {
    Ok(compute_slice(field, y, depth)?.claim)
}

fn branch_flags(tree: &OrbitTree, sys: &DynSystem) -> Vec<bool> {
    tree.nodes
        .par_iter()
        .map(|n| if n.level < tree.reached { n.children.len() >= 2 } else { sys.applicable(&n.point).len() >= 2 })
        .collect()
}

/// Settles the single-branch tail of a leaf: from the child of the deepest
/// branching ancestor, the trajectory must be certified unique.
fn settle_leaf(sys: &DynSystem, tree: &OrbitTree, branch: &[bool], leaf: usize, budget: usize) -> UniqueStatus {
    if branch[leaf] {
        return UniqueStatus::BranchFoundAt(tree.nodes[leaf].level);
    }
    let mut start = leaf;
    let mut cur = leaf;
    while let Some(p) = tree.nodes[cur].parent {
        if branch[p] {
            break;
        }
        start = p;
        cur = p;
    }
    let n = &tree.nodes[start];
    match unique_orbit_check(sys, &n.point, budget) {
        UniqueStatus::BranchFoundAt(k) => UniqueStatus::BranchFoundAt(k + n.level),
        s => s,
    }
}

/// Flags cylinders whose closed ternary interval meets no other cylinder.
fn disjointness(words: &[Word]) -> Vec<bool> {
    // closed ends scaled by 3^L, as integers
    let l = words.iter().map(Word::len).max().unwrap_or(0);
    let ends: Vec<(BigInt, BigInt)> = words
        .par_iter()
        .map(|w| {
            let mut lo = BigInt::zero();
            for &s in w.symbols() {
                lo = lo * 3u32 + BigInt::from(s);
            }
            let scale = num_traits::pow(BigInt::from(3), l - w.len());
            let hi = (&lo + 1u32) * &scale;
            (lo * scale, hi)
        })
        .collect();
    let mut idx: Vec<usize> = (0..words.len()).collect();
    idx.sort_by(|&a, &b| ends[a].0.cmp(&ends[b].0).then(ends[a].1.cmp(&ends[b].1)));
    let mut flags = vec![true; words.len()];
    for pair in idx.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if ends[a].1 >= ends[b].0 {
            flags[a] = false;
            flags[b] = false;
        }
    }
    flags
}

fn classify(
    tree: &OrbitTree,
    branch: &[bool],
    leaves: &[usize],
    status: &[UniqueStatus],
    disjoint: &[bool],
) -> CardinalityClaim {
    let n = leaves.len();
    if tree.reached == 0 || n == 0 {
        return CardinalityClaim::Unknown;
    }
    if !tree.truncated && status.iter().all(UniqueStatus::is_certified) && disjoint.iter().all(|&d| d) {
        return CardinalityClaim::ExactlyN { n, certified: true };
    }
    if has_uncountable_pattern(tree, branch) {
        return CardinalityClaim::UncountablePattern;
    }
    let last_branch = tree.nodes.iter().enumerate().filter(|&(i, _)| branch[i]).map(|(_, nd)| nd.level).max();
    let quiet = last_branch.is_none_or(|l| 2 * l < tree.reached);
    if !tree.truncated && quiet {
        return CardinalityClaim::ExactlyN { n, certified: false };
    }
    CardinalityClaim::AtLeastN { n }
}

/// Some branch node has two children whose subtrees both branch again.
fn has_uncountable_pattern(tree: &OrbitTree, branch: &[bool]) -> bool {
    let mut below = vec![false; tree.nodes.len()];
    // arena is level-ordered, so children come after parents
    for i in (0..tree.nodes.len()).rev() {
        let own = branch[i];
        below[i] = own || tree.nodes[i].children.iter().any(|&c| below[c]);
    }
    tree.nodes.iter().any(|n| n.children.len() >= 2 && n.children.iter().filter(|&&c| below[c]).count() >= 2)
}

// ---------------------------------------------------------------------------
// geometric side

/// y-parts of the Okamoto IFS: ψ_i(t) = a_i t + b_i.
/// The vertical maps ψ₀, ψ₁, ψ₂ of the IFS as (a, b) for t ↦ a·t + b.
pub fn psi(field: &Arc<Field>) -> [(FieldElement, FieldElement); 3] {
    let qi = FieldElement::q_inv(field);
    let one = FieldElement::one(field);
    let mid = &(&qi + &qi) - &one;
    [(qi.clone(), FieldElement::zero(field)), (-mid, qi.clone()), (qi.clone(), &one - &qi)]
}

/// Index words of depth-`depth` boxes whose closed y-extent contains `y`,
/// before the restricted-expansion filter.
pub fn geometric_slice_boxes(field: &Arc<Field>, y: &FieldElement, depth: usize) -> Vec<Word> {
    geometric_walk(field, y, depth, false)
}

/// Restricted-expansion filtered box words; empty when y ∉ [0, 1].
pub fn geometric_slice_oracle(field: &Arc<Field>, y: &FieldElement, depth: usize) -> Vec<Word> {
    geometric_walk(field, y, depth, true)
}

fn geometric_walk(field: &Arc<Field>, y: &FieldElement, depth: usize, rte: bool) -> Vec<Word> {
    let maps = psi(field);
    let mut out = Vec::new();
    let mut stack: Vec<(Vec<i8>, FieldElement, FieldElement)> =
        vec![(Vec::new(), FieldElement::one(field), FieldElement::zero(field))];
    while let Some((w, a, b)) = stack.pop() {
        let e0 = b.clone();
        let e1 = &a + &b;
        let (lo, hi) = if e0 <= e1 { (e0, e1) } else { (e1, e0) };
        if *y < lo || *y > hi {
            continue;
        }
        if w.len() == depth {
            out.push(Word::new(Alphabet::Ternary012, w).expect("ternary"));
            continue;
        }
        for i in (0..3).rev() {
            let (ai, bi) = &maps[i];
            let na = &a * ai;
            let nb = &(&a * bi) + &b;
            // the top of a 0- or 1-box continues as ...2^∞, a duplicate of the
            // expansion ending (i+1)0^∞
            if rte && i < 2 && &na + &nb == *y {
                continue;
            }
            let mut nw = w.clone();
            nw.push(i as i8);
            stack.push((nw, na, nb));
        }
    }
    out.sort();
    out
}

/// Interval for F_q(x): the y-extent of the depth-`depth` box along the
/// restricted ternary expansion of x.
pub fn eval_okamoto(field: &Arc<Field>, x: &BigRational, depth: usize) -> (FieldElement, FieldElement) {
    assert!(!x.is_negative() && *x <= BigRational::one(), "x must lie in [0, 1]");
    let maps = psi(field);
    let mut a = FieldElement::one(field);
    let mut b = FieldElement::zero(field);
    let mut r = x.clone();
    let three = BigRational::from_integer(BigInt::from(3));
    for _ in 0..depth {
        let d = if r == BigRational::one() {
            2
        } else {
            let t = &r * &three;
            let d = t.floor().to_integer().to_usize().expect("digit");
            r = t - BigRational::from_integer(BigInt::from(d));
            d
        };
        let (ai, bi) = &maps[d];
        b = &(&a * bi) + &b;
        a = &a * ai;
    }
    let e0 = b.clone();
    let e1 = &a + &b;
    if e0 <= e1 {
        (e0, e1)
    } else {
        (e1, e0)
    }
}

/// Decimal interval strings for a field element.
pub fn interval_strings(x: &FieldElement, digits: usize) -> [String; 2] {
    let bits = (digits as f64 * 3.33).ceil() as u32 + 8;
    let (lo, hi) = x.enclosure(bits);
    let (a, b) = decimal_bounds(&lo, &hi, digits);
    [a, b]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{enumerate_orbits, project_q};
    use crate::numeric::{field_from_literal, rat};
    use crate::words::parse_tail;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fe(f: &Arc<Field>, n: i64, d: i64) -> FieldElement {
        FieldElement::from_rational(f, rat(n, d))
    }

    #[test]
    fn figure_one_slice_is_unique() {
        let f = field_from_literal("5/3").unwrap();
        let s = compute_slice(&f, &fe(&f, 3, 8), 48).unwrap();
        assert_eq!(s.claim, CardinalityClaim::ExactlyN { n: 1, certified: true });
    }

    #[test]
    fn bottom_and_top() {
        for lit in ["5/3", "3/2", "1.999"] {
            let f = field_from_literal(lit).unwrap();
            let s = compute_slice(&f, &fe(&f, 0, 1), 20).unwrap();
            assert_eq!(s.claim, CardinalityClaim::ExactlyN { n: 1, certified: true });
            assert_eq!(s.cylinders, vec![Word::ter(&"0".repeat(20))]);
            let s = compute_slice(&f, &fe(&f, 1, 1), 20).unwrap();
            assert_eq!(s.claim, CardinalityClaim::ExactlyN { n: 1, certified: true });
            assert_eq!(s.cylinders, vec![Word::ter(&"2".repeat(20))]);
        }
    }

    #[test]
    fn three_point_slice_at_tribonacci() {
        let f = Field::bonacci(3).unwrap();
        let x = project_q(&f, &parse_tail("1000(01)*", Alphabet::Binary01).unwrap());
        let y = &x * &FieldElement::q(&f).add_int(-1);
        let s = compute_slice(&f, &y, 48).unwrap();
        assert_eq!(s.claim, CardinalityClaim::ExactlyN { n: 3, certified: true });
    }

    #[test]
    fn below_golden_ratio_is_uncountable() {
        let f = field_from_literal("1.5").unwrap();
        let c = classify_cardinality(&f, &fe(&f, 1, 2), 48).unwrap();
        assert_eq!(c, CardinalityClaim::UncountablePattern);
    }

    #[test]
    fn null_infinite_point_grows() {
        let f = Field::bonacci(3).unwrap();
        let q = FieldElement::q(&f);
        let y = &q.add_int(-1) * &q.inv().unwrap();
        let mut last = 0;
        for d in [6, 12, 18, 24] {
            match classify_cardinality(&f, &y, d).unwrap() {
                CardinalityClaim::AtLeastN { n } => {
                    assert!(n > last, "depth {d}");
                    last = n;
                }
                other => panic!("{other:?} at depth {d}"),
            }
        }
    }

    #[test]
    fn okamoto_breakpoints() {
        let f = field_from_literal("5/3").unwrap();
        let (lo, hi) = eval_okamoto(&f, &rat(1, 3), 30);
        assert!(lo <= fe(&f, 3, 5) && fe(&f, 3, 5) <= hi);
        let (lo, hi) = eval_okamoto(&f, &rat(2, 3), 30);
        assert!(lo <= fe(&f, 2, 5) && fe(&f, 2, 5) <= hi);
        let (lo, hi) = eval_okamoto(&f, &rat(0, 1), 5);
        assert_eq!(lo, fe(&f, 0, 1));
        assert!(hi.to_f64() < 0.1);
        let (lo, hi) = eval_okamoto(&f, &rat(1, 1), 5);
        assert_eq!(hi, fe(&f, 1, 1));
        assert!(lo.to_f64() > 0.9);
        // width bound (max(1/q, |2/q - 1|))^depth
        let (lo, hi) = eval_okamoto(&f, &rat(5, 7), 20);
        assert!((hi - lo).to_f64() <= 0.6f64.powi(20) * (1.0 + 1e-9));
    }

    #[test]
    fn oracle_examples() {
        let f = field_from_literal("5/3").unwrap();
        assert!(geometric_slice_oracle(&f, &fe(&f, 3, 2), 5).is_empty());
        assert!(geometric_slice_oracle(&f, &fe(&f, -1, 9), 5).is_empty());
        assert_eq!(geometric_slice_oracle(&f, &fe(&f, 0, 1), 6), vec![Word::ter("000000")]);
        let y = fe(&f, 3, 8);
        assert_eq!(geometric_slice_oracle(&f, &y, 12), compute_slice(&f, &y, 12).unwrap().cylinders);
        // the breakpoint height 3/5 touches the corner shared by boxes 0 and 1
        let y = fe(&f, 3, 5);
        let raw = geometric_slice_boxes(&f, &y, 1);
        assert_eq!(raw, vec![Word::ter("0"), Word::ter("1"), Word::ter("2")]);
        assert_eq!(geometric_slice_oracle(&f, &y, 1), vec![Word::ter("1"), Word::ter("2")]);
    }

    fn random_case(rng: &mut ChaCha8Rng) -> (Arc<Field>, FieldElement) {
        let den = rng.gen_range(2..60);
        let num = rng.gen_range(den + 1..2 * den);
        let f = Field::rational(rat(num, den)).unwrap();
        let yd = rng.gen_range(1..40);
        let yn = rng.gen_range(0..=yd);
        let y = fe(&f, yn, yd);
        (f, y)
    }

    #[test]
    fn oracle_agrees_with_dynamics() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..25 {
            let (f, y) = random_case(&mut rng);
            let dynamic = compute_slice_bounded(&f, &y, 9, 1 << 20).unwrap();
            assert_eq!(geometric_slice_oracle(&f, &y, 9), dynamic.cylinders, "q={} y={}", f.label(), y);
        }
    }

    #[test]
    fn refinement_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..15 {
            let (f, y) = random_case(&mut rng);
            let deep = compute_slice_bounded(&f, &y, 8, 1 << 20).unwrap().cylinders;
            let shallow = compute_slice_bounded(&f, &y, 7, 1 << 20).unwrap().cylinders;
            let mut cut: Vec<Word> = deep.iter().map(|w| w.prefix(7)).collect();
            cut.dedup();
            assert_eq!(cut, shallow);
        }
    }

    #[test]
    fn leaf_count_matches_orbit_count() {
        let f = field_from_literal("7/4").unwrap();
        let sys = DynSystem::new(SystemKind::Eq, &f).unwrap();
        for n in 0..=12 {
            let y = fe(&f, n, 12);
            let s = compute_slice(&f, &y, 8).unwrap();
            let x = &y * &FieldElement::q(&f).add_int(-1).inv().unwrap();
            assert_eq!(s.cylinders.len(), enumerate_orbits(&sys, &x, 8).leaf_count());
        }
    }

    /// (x, y) ↦ (1-x, 1-y) preserves K_q; away from box edges the cylinder
    /// sets reflect digitwise.
    #[test]
    fn reflection_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut checked = 0;
        for _ in 0..40 {
            let (f, y) = random_case(&mut rng);
            let y2 = FieldElement::one(&f) - y.clone();
            let a = geometric_slice_boxes(&f, &y, 7);
            let b = geometric_slice_boxes(&f, &y2, 7);
            let mut ra: Vec<Word> = a
                .iter()
                .map(|w| Word::new(Alphabet::Ternary012, w.symbols().iter().map(|s| 2 - s).collect()).unwrap())
                .collect();
            ra.sort();
            assert_eq!(ra, b);
            let ca = compute_slice_bounded(&f, &y, 7, 1 << 20).unwrap().cylinders;
            if ca == a {
                let cb = compute_slice_bounded(&f, &y2, 7, 1 << 20).unwrap().cylinders;
                assert_eq!(cb, b);
                checked += 1;
            }
        }
        assert!(checked > 10);
    }
}
