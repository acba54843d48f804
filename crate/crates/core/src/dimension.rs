//! Lower bounds for the Hausdorff dimension of slices by the mass
//! distribution principle, and box-counting estimates to compare against.
//!
//! A branching pair for x ∈ J_q is two map sequences, neither a prefix of
//! the other, that send x into the interior of J_q. Iterating pairs from x
//! gives the words b^ε for binary ε; the cylinders [b^ε] at level k carry
//! mass 2^-k, and if every pair has length ≤ M the slice has dimension at
//! least log 2 / (M log 3).
//!
//! "Doubly infinite" cannot be decided at finite depth. A pair is accepted
//! only when both of its images admit a further pair within the same
//! length budget, and results built on this are depth-bounded.

use crate::dynamics::{drive, enumerate_orbits_bounded, project_ternary, DynError, DynSystem, SystemKind};
use crate::numeric::{Field, FieldElement};
use crate::words::{Alphabet, Tail, Word};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde_json::json;
use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

/// Node budget for one branching-pair search.
pub const SEARCH_NODE_BUDGET: usize = 1 << 15;
/// Default number of cells covering J_q in [`estimate_m`].
pub const DEFAULT_GRID: usize = 256;
/// How many times a failing cell may be halved before the cover gives up.
const MAX_BISECTIONS: usize = 6;
/// Pairs tried per cell before bisecting.
const PAIRS_PER_CELL: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DimError {
    #[error("point is not in the switch region J_q")]
    NotInSwitchRegion,
    #[error("no branching pair with words of length <= {0}")]
    NotFound(usize),
    #[error("construction stalled at level {0}")]
    ConstructionStalled(usize),
    #[error("need cylinder counts at three or more depths")]
    TooFewDepths,
    #[error("M must be at least 1")]
    ZeroM,
    #[error(transparent)]
    Dynamics(#[from] DynError),
}

fn interior_of_j(sys: &DynSystem, p: &FieldElement) -> bool {
    let (lo, hi) = sys.switch_region();
    &lo < p && p < &hi
}

fn incomparable(a: &Word, b: &Word) -> bool {
    !a.is_prefix_of(b) && !b.is_prefix_of(a)
}

/// Nonempty words from `x` landing in int(J_q), ordered by length then
/// lexicographically, with their images.
fn interior_words(sys: &DynSystem, x: &FieldElement, max_len: usize) -> Vec<(Word, FieldElement)> {
    let tree = enumerate_orbits_bounded(sys, x, max_len, SEARCH_NODE_BUDGET);
    let mut out: Vec<(Word, FieldElement)> = tree
        .nodes
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, n)| interior_of_j(sys, &n.point))
        .map(|(i, n)| (tree.path_word(i, Alphabet::Ternary012), n.point.clone()))
        .collect();
    out.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
    out
}

/// Pairs of incomparable interior words, shortest longer word first.
fn candidate_pairs(words: &[(Word, FieldElement)]) -> impl Iterator<Item = (usize, usize)> + '_ {
    (0..words.len())
        .flat_map(move |j| (0..j).map(move |i| (i, j)))
        .filter(move |&(i, j)| incomparable(&words[i].0, &words[j].0))
}

/// First incomparable pair from `x`, searching lengths 1, 2, … in turn.
fn has_plain_pair(sys: &DynSystem, x: &FieldElement, max_len: usize) -> Option<(Word, Word)> {
    (1..=max_len).find_map(|len| {
        let words = interior_words(sys, x, len);
        let (i, j) = candidate_pairs(&words).next()?;
        Some((words[i].0.clone(), words[j].0.clone()))
    })
}

#[derive(Clone, Debug)]
pub struct BranchingPair {
    pub x: FieldElement,
    pub b0: Word,
    pub b1: Word,
    pub images: [FieldElement; 2],
    /// A further pair at each image: the bounded-depth stand-in for
    /// "doubly infinite".
    pub further: [(Word, Word); 2],
}

impl BranchingPair {
    pub fn max_len(&self) -> usize {
        self.b0.len().max(self.b1.len())
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "b0": self.b0.to_string(),
            "b1": self.b1.to_string(),
            "further": [
                [self.further[0].0.to_string(), self.further[0].1.to_string()],
                [self.further[1].0.to_string(), self.further[1].1.to_string()],
            ],
            "depth_bounded": true,
        })
    }
}

/// Enumerates branching pairs for `x` in deterministic order (shorter
/// longer word first, then lexicographic), keeping only those whose images
/// admit a further pair.
fn branching_pairs(sys: &DynSystem, x: &FieldElement, max_len: usize, limit: usize) -> Vec<BranchingPair> {
    let mut out = Vec::new();
    // iterative deepening: pairs whose longer word has length `len` appear
    // in the same order as in a single search to `max_len`
    for len in 1..=max_len {
        let words = interior_words(sys, x, len);
        let mut further: HashMap<usize, Option<(Word, Word)>> = HashMap::new();
        for (i, j) in candidate_pairs(&words).filter(|&(_, j)| words[j].0.len() == len) {
            let mut get =
                |k: usize| further.entry(k).or_insert_with(|| has_plain_pair(sys, &words[k].1, max_len)).clone();
            let (Some(fi), Some(fj)) = (get(i), get(j)) else {
                continue;
            };
            out.push(BranchingPair {
                x: x.clone(),
                b0: words[i].0.clone(),
                b1: words[j].0.clone(),
                images: [words[i].1.clone(), words[j].1.clone()],
                further: [fi, fj],
            });
            if out.len() >= limit {
                return out;
            }
        }
    }
    out
}

pub fn branching_pair_search(field: &Arc<Field>, x: &FieldElement, max_len: usize) -> Result<BranchingPair, DimError> {
    let sys = DynSystem::new(SystemKind::Eq, field)?;
    let (lo, hi) = sys.switch_region();
    if x < &lo || x > &hi {
        return Err(DimError::NotInSwitchRegion);
    }
    branching_pairs(&sys, x, max_len, 1).into_iter().next().ok_or(DimError::NotFound(max_len))
}

/// True iff every point of [a, b] follows `w` inside the domains and ends in
/// int(J_q). The maps are affine and their domains are intervals, so the
/// endpoints decide it.
fn word_works_on_cell(sys: &DynSystem, a: &FieldElement, b: &FieldElement, w: &Word) -> bool {
    let ends = [a, b].map(|p| drive(sys, p, w.symbols()).ok());
    match ends {
        [Some(u), Some(v)] => interior_of_j(sys, &u) && interior_of_j(sys, &v),
        _ => false,
    }
}

#[derive(Clone, Debug)]
pub struct CellCover {
    pub lo: FieldElement,
    pub hi: FieldElement,
    pub b0: Word,
    pub b1: Word,
}

#[derive(Clone, Debug)]
pub enum MEstimate {
    Finite {
        m: usize,
        cells: Vec<CellCover>,
    },
    /// A cell of J_q (given by its endpoints) where no pair within the
    /// budget worked on the whole cell.
    Unknown {
        cell: (FieldElement, FieldElement),
        max_len: usize,
    },
}

impl MEstimate {
    pub fn m(&self) -> Option<usize> {
        match self {
            MEstimate::Finite { m, .. } => Some(*m),
            MEstimate::Unknown { .. } => None,
        }
    }
}

fn cover_cell(
    sys: &DynSystem,
    a: &FieldElement,
    b: &FieldElement,
    max_len: usize,
    splits: usize,
) -> Result<Vec<CellCover>, (FieldElement, FieldElement)> {
    let half = BigRational::new(1.into(), 2.into());
    let mid = (a + b).scale(&half);
    for p in branching_pairs(sys, &mid, max_len, PAIRS_PER_CELL) {
        if word_works_on_cell(sys, a, b, &p.b0) && word_works_on_cell(sys, a, b, &p.b1) {
            return Ok(vec![CellCover { lo: a.clone(), hi: b.clone(), b0: p.b0, b1: p.b1 }]);
        }
    }
    if splits == 0 {
        return Err((a.clone(), b.clone()));
    }
    let mut left = cover_cell(sys, a, &mid, max_len, splits - 1)?;
    left.extend(cover_cell(sys, &mid, b, max_len, splits - 1)?);
    Ok(left)
}

/// Covers J_q by `grid` closed cells, each with a pair that works on the
/// whole cell; M is the longest word used. A failed cell gives `Unknown`,
/// which does not show that no finite M exists.
pub fn estimate_m(field: &Arc<Field>, grid: usize, max_len: usize) -> Result<MEstimate, DimError> {
    let sys = DynSystem::new(SystemKind::Eq, field)?;
    let (lo, hi) = sys.switch_region();
    let grid = grid.max(1);
    let width = (&hi - &lo).scale(&BigRational::new(1.into(), (grid as i64).into()));
    let cells: Vec<(FieldElement, FieldElement)> = (0..grid)
        .map(|i| {
            let a = &lo + &width.scale(&BigRational::from_integer((i as i64).into()));
            let b = if i + 1 == grid { hi.clone() } else { &a + &width };
            (a, b)
        })
        .collect();
    let results: Vec<_> = cells.par_iter().map(|(a, b)| cover_cell(&sys, a, b, max_len, MAX_BISECTIONS)).collect();
    let mut covers = Vec::new();
    for r in results {
        match r {
            Ok(c) => covers.extend(c),
            Err(cell) => return Ok(MEstimate::Unknown { cell, max_len }),
        }
    }
    let m = covers.iter().map(|c| c.b0.len().max(c.b1.len())).max().unwrap_or(0);
    Ok(MEstimate::Finite { m, cells: covers })
}

/// s = log 2 / (M log 3).
pub fn dimension_lower_bound(m: usize) -> Result<f64, DimError> {
    if m == 0 {
        return Err(DimError::ZeroM);
    }
    Ok(std::f64::consts::LN_2 / (m as f64 * 3f64.ln()))
}

/// 1 + log₃(4/q - 1).
pub fn affinity_dimension(q: f64) -> f64 {
    1.0 + (4.0 / q - 1.0).ln() / 3f64.ln()
}

/// π₃[w] as a closed rational interval.
fn ternary_cylinder(w: &Word) -> (BigRational, BigRational) {
    let lo = project_ternary(&Tail::constant(Alphabet::Ternary012, 0).prepend(w).expect("ternary"));
    let width = BigRational::one() / num_traits::pow(BigRational::from_integer(3.into()), w.len());
    let hi = &lo + width;
    (lo, hi)
}

#[derive(Clone, Debug, Default)]
pub struct RTreeChecks {
    pub alive: bool,
    pub prefix_iff: bool,
    pub meet_in_point: bool,
    pub length_bound: bool,
    pub mass_conserved: bool,
    pub measure_bound: bool,
}

impl RTreeChecks {
    pub fn all(&self) -> bool {
        self.alive
            && self.prefix_iff
            && self.meet_in_point
            && self.length_bound
            && self.mass_conserved
            && self.measure_bound
    }
}

/// The words b^ε for |ε| ≤ levels, with μ(π₃[b^ε]) = 2^-|ε|.
#[derive(Clone, Debug)]
pub struct RTree {
    pub field: Arc<Field>,
    pub x: FieldElement,
    /// `words[k][e]` is b^ε where ε is the k-bit binary expansion of `e`.
    pub words: Vec<Vec<Word>>,
    pub points: Vec<Vec<FieldElement>>,
    /// Longest pair word used in the construction.
    pub m: usize,
    pub checks: RTreeChecks,
}

impl RTree {
    pub fn levels(&self) -> usize {
        self.words.len() - 1
    }

    pub fn to_json(&self) -> serde_json::Value {
        let levels: Vec<Vec<String>> = self.words.iter().map(|l| l.iter().map(|w| w.to_string()).collect()).collect();
        let c = &self.checks;
        json!({
            "M": self.m,
            "levels": levels,
            "checks": {
                "alive": c.alive,
                "prefix_iff": c.prefix_iff,
                "meet_in_point": c.meet_in_point,
                "length_bound": c.length_bound,
                "mass_conserved": c.mass_conserved,
                "measure_bound": c.measure_bound,
            },
        })
    }
}

/// Builds b^ε level by level from x, taking at each point the first
/// branching pair in search order, then checks the structural properties.
pub fn build_r_tree(field: &Arc<Field>, x: &FieldElement, levels: usize, max_len: usize) -> Result<RTree, DimError> {
    let sys = DynSystem::new(SystemKind::Eq, field)?;
    let (lo, hi) = sys.switch_region();
    if x < &lo || x > &hi {
        return Err(DimError::NotInSwitchRegion);
    }
    let mut words = vec![vec![Word::empty(Alphabet::Ternary012)]];
    let mut points = vec![vec![x.clone()]];
    let mut m = 0;
    for level in 0..levels {
        let pairs: Vec<Option<BranchingPair>> =
            points[level].par_iter().map(|p| branching_pairs(&sys, p, max_len, 1).into_iter().next()).collect();
        let mut next_w = Vec::with_capacity(2 * pairs.len());
        let mut next_p = Vec::with_capacity(2 * pairs.len());
        for (e, pair) in pairs.into_iter().enumerate() {
            let pair = pair.ok_or(DimError::ConstructionStalled(level))?;
            m = m.max(pair.max_len());
            let base = &words[level][e];
            for (g, img) in [(&pair.b0, &pair.images[0]), (&pair.b1, &pair.images[1])] {
                next_w.push(base.concat(g).expect("ternary"));
                next_p.push(img.clone());
            }
        }
        words.push(next_w);
        points.push(next_p);
    }
    let mut tree = RTree { field: field.clone(), x: x.clone(), words, points, m, checks: RTreeChecks::default() };
    tree.checks = verify_r_tree(&sys, &tree);
    Ok(tree)
}

fn verify_r_tree(sys: &DynSystem, t: &RTree) -> RTreeChecks {
    let levels = t.levels();
    let all: Vec<(usize, usize, &Word)> =
        t.words.iter().enumerate().flat_map(|(k, l)| l.iter().enumerate().map(move |(e, w)| (k, e, w))).collect();

    let alive =
        all.par_iter().all(|(k, e, w)| drive(sys, &t.x, w.symbols()).map(|p| p == t.points[*k][*e]).unwrap_or(false));

    // ε prefix of ε' iff k ≤ k' and e' >> (k' - k) == e
    let eps_prefix = |k: usize, e: usize, k2: usize, e2: usize| k <= k2 && (e2 >> (k2 - k)) == e;
    let prefix_iff =
        all.par_iter().all(|&(k, e, w)| all.iter().all(|&(k2, e2, w2)| w.is_prefix_of(w2) == eps_prefix(k, e, k2, e2)));

    let meet_in_point = (1..=levels).all(|k| {
        let mut iv: Vec<(BigRational, BigRational)> = t.words[k].iter().map(ternary_cylinder).collect();
        iv.sort();
        iv.windows(2).all(|p| p[0].1 <= p[1].0)
    });

    let length_bound = t.words.iter().enumerate().all(|(k, l)| l.iter().all(|w| w.len() <= k * t.m));

    let mass_conserved = t.words.iter().enumerate().all(|(k, l)| {
        let each = BigRational::new(1.into(), num_traits::pow(num_bigint::BigInt::from(2), k));
        let total: BigRational = l.iter().map(|_| each.clone()).fold(BigRational::zero(), |a, b| a + b);
        l.len() == 1 << k && total.is_one()
    });

    // μ(π₃[i₁…i_l]) ≤ 2·2^(-l/M) for every l up to the shortest deepest word,
    // where the deepest level determines μ of the cylinder exactly
    let deepest = &t.words[levels];
    let lmax = deepest.iter().map(Word::len).min().unwrap_or(0);
    let measure_bound = t.m > 0
        && (1..=lmax).all(|l| {
            let mut counts: HashMap<Word, usize> = HashMap::new();
            for w in deepest {
                *counts.entry(w.prefix(l)).or_default() += 1;
            }
            let bound = 2.0 * 2f64.powf(-(l as f64) / t.m as f64);
            counts.values().all(|&c| (c as f64) / 2f64.powi(levels as i32) <= bound * (1.0 + 1e-12))
        });

    RTreeChecks { alive, prefix_iff, meet_in_point, length_bound, mass_conserved, measure_bound }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoxEstimate {
    pub slope: f64,
    /// Root mean square of the fit residuals in log(count).
    pub residual: f64,
    pub counts: Vec<(usize, usize)>,
}

/// Least-squares slope of log N(d) against d·log 3, where N(d) is the
/// number of distinct depth-d ternary cylinders.
pub fn box_dimension_estimate(sets: &[(usize, Vec<Word>)]) -> Result<BoxEstimate, DimError> {
    let counts: Vec<(usize, usize)> = sets
        .iter()
        .map(|(d, ws)| (*d, ws.iter().map(|w| w.prefix(*d)).collect::<BTreeSet<_>>().len()))
        .filter(|&(_, n)| n > 0)
        .collect();
    let depths: BTreeSet<usize> = counts.iter().map(|c| c.0).collect();
    if depths.len() < 3 {
        return Err(DimError::TooFewDepths);
    }
    let pts: Vec<(f64, f64)> = counts.iter().map(|&(d, n)| (d as f64 * 3f64.ln(), (n as f64).ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let residual = (pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum::<f64>() / n).sqrt();
    Ok(BoxEstimate { slope, residual, counts })
}

/// Cylinders of the slice at height y for each depth in `depths`, from one
/// orbit enumeration to the largest depth. Depths beyond what the node
/// budget reached are dropped.
pub fn slice_cylinder_sets(
    field: &Arc<Field>,
    y: &FieldElement,
    depths: &[usize],
    max_nodes: usize,
) -> Result<Vec<(usize, Vec<Word>)>, DimError> {
    let sys = DynSystem::new(SystemKind::Eq, field)?;
    let x = y * &FieldElement::q(field).add_int(-1).inv().expect("q > 1");
    let top = depths.iter().copied().max().unwrap_or(0);
    let tree = enumerate_orbits_bounded(&sys, &x, top, max_nodes);
    Ok(depths
        .iter()
        .filter(|&&d| d <= tree.reached)
        .map(|&d| (d, tree.level_nodes(d).map(|i| tree.path_word(i, Alphabet::Ternary012)).collect()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{field_from_literal, rat};

    fn mid_j(f: &Arc<Field>) -> FieldElement {
        let (lo, hi) = crate::dynamics::switch_region(f);
        (&lo + &hi).scale(&rat(1, 2))
    }

    #[test]
    fn pair_search_examples() {
        for (lit, bound) in [("bonacci:3", 8), ("3/2", 4)] {
            let f = field_from_literal(lit).unwrap();
            let p = branching_pair_search(&f, &mid_j(&f), 10).unwrap();
            assert!(p.max_len() <= bound, "{lit}: {:?}", p);
            assert!(incomparable(&p.b0, &p.b1));
            let sys = DynSystem::new(SystemKind::Eq, &f).unwrap();
            for (w, img) in [(&p.b0, &p.images[0]), (&p.b1, &p.images[1])] {
                assert_eq!(&drive(&sys, &p.x, w.symbols()).unwrap(), img);
                assert!(interior_of_j(&sys, img));
            }
        }
        let f = field_from_literal("3/2").unwrap();
        let outside = FieldElement::from_rational(&f, rat(1, 10));
        assert_eq!(branching_pair_search(&f, &outside, 6).unwrap_err(), DimError::NotInSwitchRegion);
    }

    #[test]
    fn m_estimates() {
        for lit in ["3/2", "13/10"] {
            let f = field_from_literal(lit).unwrap();
            let est = estimate_m(&f, 64, 8).unwrap();
            let MEstimate::Finite { m, cells } = est else { panic!("{lit}: no cover") };
            assert!((1..=8).contains(&m));
            // cells cover J_q without holes
            let (lo, hi) = crate::dynamics::switch_region(&f);
            assert_eq!(cells.first().unwrap().lo, lo);
            assert_eq!(cells.last().unwrap().hi, hi);
            assert!(cells.windows(2).all(|c| c[0].hi == c[1].lo));
        }
    }

    #[test]
    fn lower_bound_formula() {
        assert!((dimension_lower_bound(1).unwrap() - 0.630_93).abs() < 1e-4);
        assert!((dimension_lower_bound(4).unwrap() - 0.157_73).abs() < 1e-4);
        let s: Vec<f64> = (1..50).map(|m| dimension_lower_bound(m).unwrap()).collect();
        assert!(s.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(dimension_lower_bound(0), Err(DimError::ZeroM));
    }

    #[test]
    fn affinity_examples() {
        assert!((affinity_dimension(1.0 + 1e-12) - 2.0).abs() < 1e-9);
        assert!((affinity_dimension(2.0 - 1e-12) - 1.0).abs() < 1e-9);
        // 1 + log₃(7/5)
        assert!((affinity_dimension(5.0 / 3.0) - 1.306_27).abs() < 1e-4);
    }

    #[test]
    fn r_tree_at_three_halves() {
        let f = field_from_literal("3/2").unwrap();
        let t = build_r_tree(&f, &mid_j(&f), 5, 8).unwrap();
        assert!(t.checks.all(), "{:?}", t.checks);
        assert_eq!(t.words[0], vec![Word::empty(Alphabet::Ternary012)]);
        for k in 0..=5 {
            assert_eq!(t.words[k].len(), 1 << k);
        }
    }

    #[test]
    fn box_examples() {
        let full: Vec<(usize, Vec<Word>)> = (2..=5)
            .map(|d| {
                let ws = (0..3usize.pow(d as u32))
                    .map(|mut n| {
                        let mut s = vec![0i8; d];
                        for c in s.iter_mut().rev() {
                            *c = (n % 3) as i8;
                            n /= 3;
                        }
                        Word::new(Alphabet::Ternary012, s).unwrap()
                    })
                    .collect();
                (d, ws)
            })
            .collect();
        let e = box_dimension_estimate(&full).unwrap();
        assert!((e.slope - 1.0).abs() < 0.01 && e.residual < 1e-9);
        let path: Vec<(usize, Vec<Word>)> = (2..=5).map(|d| (d, vec![Word::ter(&"1".repeat(d))])).collect();
        assert!(box_dimension_estimate(&path).unwrap().slope.abs() < 1e-12);
        assert_eq!(box_dimension_estimate(&full[..2]).unwrap_err(), DimError::TooFewDepths);
    }

    #[test]
    fn slice_box_estimate_is_positive() {
        let f = field_from_literal("3/2").unwrap();
        let y = FieldElement::from_rational(&f, rat(1, 2));
        let sets = slice_cylinder_sets(&f, &y, &[8, 10, 12], 1 << 18).unwrap();
        let e = box_dimension_estimate(&sets).unwrap();
        assert!(e.slope > 0.0, "{e:?}");
    }
}
