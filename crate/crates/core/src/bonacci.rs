//! k-Bonacci bases: the points x_m = π(1(0^k)^m δ) with 2m+1 orbits, the
//! null infinite point 1/q_k, and probes for bases where 1/q has exactly two
//! orbits.
//!
//! Orbit counts are certified by carrying an explicit binary expansion along
//! every path of the orbit tree. At q_k the identity π(10^kα) = π(01^kα)
//! lets each of f₀, f₁, f₂ act on the expansion symbolically; a leaf is
//! certified once its expansion lies in Ŝ^k and projects exactly to the
//! leaf's point.

use crate::certificate::{Certificate, Rel};
use crate::dynamics::{
    certify_expansion, enumerate_orbits, enumerate_orbits_bounded, project_q, unique_orbit_check, DynError, DynSystem,
    SystemKind, UniqueMethod, UniqueStatus,
};
use crate::numeric::{AlgebraicReal, Field, FieldElement, NumError};
use crate::words::{member, Alphabet, Reflect, SubshiftKind, SubshiftSpec, Tail, Word, WordError};
use serde_json::json;
use std::sync::Arc;

/// Node budget for the two-expansion search in [`c2_probe`].
const EXPANSION_SEARCH_NODES: usize = 1 << 14;
/// Depth of the two-expansion search in [`c2_probe`].
const EXPANSION_SEARCH_DEPTH: usize = 24;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum BonacciError {
    #[error("k must be at least {min}, got {k}")]
    KTooSmall { k: usize, min: usize },
    #[error("m must be at least 1")]
    MTooSmall,
    #[error("delta is not in the subshift S~^k")]
    DeltaNotInSTilde,
    #[error("certification failed at depth {0}")]
    CertificationFailed(usize),
    #[error(transparent)]
    Numeric(#[from] NumError),
    #[error(transparent)]
    Dynamics(#[from] DynError),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// q_k together with its field ℚ(q_k).
#[derive(Clone, Debug)]
pub struct BonacciBase {
    pub k: usize,
    pub field: Arc<Field>,
}

impl BonacciBase {
    pub fn root(&self) -> &AlgebraicReal {
        self.field.base()
    }

    pub fn q(&self) -> FieldElement {
        FieldElement::q(&self.field)
    }

    /// Exact checks of q^k = q^(k-1) + ... + 1 and 2 - q = q^-k.
    pub fn identities_hold(&self) -> bool {
        let q = self.q();
        let f = &self.field;
        let mut rhs = FieldElement::zero(f);
        let mut pw = FieldElement::one(f);
        for _ in 0..self.k {
            rhs = &rhs + &pw;
            pw = &pw * &q;
        }
        let two_minus = FieldElement::from_int(f, 2) - q.clone();
        pw == rhs && q.pow(-(self.k as i64)).map(|p| p == two_minus).unwrap_or(false)
    }
}

pub fn bonacci_root(k: usize) -> Result<BonacciBase, BonacciError> {
    if k < 2 {
        return Err(BonacciError::KTooSmall { k, min: 2 });
    }
    Ok(BonacciBase { k, field: Field::bonacci(k)? })
}

fn x_word(k: usize, m: usize) -> Word {
    let mut s = String::from("1");
    s.push_str(&"0".repeat(k * m));
    Word::bin(&s)
}

/// The expansion 1(0^k)^m δ, after checking δ ∈ S̃^k.
pub fn x_m_expansion(k: usize, m: usize, delta: &Tail) -> Result<Tail, BonacciError> {
    if k < 3 {
        return Err(BonacciError::KTooSmall { k, min: 3 });
    }
    if m < 1 {
        return Err(BonacciError::MTooSmall);
    }
    if delta.alphabet() != Alphabet::Binary01 || !member(&SubshiftSpec::new(SubshiftKind::STildeK, k), delta)? {
        return Err(BonacciError::DeltaNotInSTilde);
    }
    Ok(delta.prepend(&x_word(k, m))?)
}

/// x_m = π_{q_k}(1 (0^k)^m δ), exactly.
pub fn x_m_witness(base: &BonacciBase, m: usize, delta: &Tail) -> Result<FieldElement, BonacciError> {
    let t = x_m_expansion(base.k, m, delta)?;
    Ok(project_q(&base.field, &t))
}

fn starts_with(t: &Tail, w: &str) -> bool {
    t.prefix(w.len()) == Word::bin(w)
}

/// How f_label acts on an expansion at q_k, if the expansion has a shape the
/// identity π(10^kα) = π(01^kα) can bring into the map's branch.
fn act_on_expansion(k: usize, label: i8, t: &Tail) -> Option<Tail> {
    let up = format!("1{}", "0".repeat(k));
    let down = format!("0{}", "1".repeat(k));
    let swap = |t: &Tail, from: &str, to: &str| t.shift(from.len()).prepend(&Word::bin(to)).ok();
    match label {
        0 => {
            if starts_with(t, "0") {
                Some(t.shift(1))
            } else if starts_with(t, &up) {
                swap(t, &up, &down).map(|s| s.shift(1))
            } else {
                None
            }
        }
        2 => {
            if starts_with(t, "1") {
                Some(t.shift(1))
            } else if starts_with(t, &down) {
                swap(t, &down, &up).map(|s| s.shift(1))
            } else {
                None
            }
        }
        // f₁(x) = 1/(q-1) - q^k f₂(x), and q^k π(0^kβ) = π(β)
        1 => {
            let t = if starts_with(t, &down) { swap(t, &down, &up)? } else { t.clone() };
            if starts_with(&t, &up) {
                t.shift(k + 1).reflect().ok()
            } else {
                None
            }
        }
        _ => None,
    }
}

#[derive(Clone, Debug)]
pub struct LeafCertificate {
    /// Map labels from the root.
    pub path: Word,
    pub point: FieldElement,
    pub expansion: Option<Tail>,
    pub method: UniqueMethod,
}

#[derive(Clone, Debug)]
pub struct OddCardinality {
    pub k: usize,
    pub m: usize,
    pub delta: Tail,
    pub depth: usize,
    pub alive_paths: usize,
    pub leaves: Vec<LeafCertificate>,
    pub certificate: Certificate,
}

impl OddCardinality {
    pub fn to_json(&self) -> serde_json::Value {
        let leaves: Vec<_> = self
            .leaves
            .iter()
            .map(|l| {
                json!({
                    "path": l.path.to_string(),
                    "expansion": l.expansion.as_ref().map(|t| t.to_string()),
                    "method": l.method,
                })
            })
            .collect();
        json!({
            "k": self.k,
            "m": self.m,
            "delta": self.delta.to_string(),
            "depth": self.depth,
            "orbits": self.alive_paths,
            "leaves": leaves,
            "certificate": self.certificate.to_json(),
        })
    }
}

/// Certifies |Ω(x_m)| = 2m+1: the orbit tree to `depth` has exactly 2m+1
/// leaves, and each leaf point has a unique orbit from there on.
pub fn verify_odd_cardinality(k: usize, m: usize, delta: &Tail, depth: usize) -> Result<OddCardinality, BonacciError> {
    let root_tail = x_m_expansion(k, m, delta)?;
    let base = bonacci_root(k)?;
    let f = &base.field;
    let sys = DynSystem::new(SystemKind::Eq, f)?;
    let x = project_q(f, &root_tail);
    let tree = enumerate_orbits(&sys, &x, depth);
    if tree.truncated || tree.reached < depth {
        return Err(BonacciError::CertificationFailed(tree.reached));
    }

    // carry expansions down the tree
    let mut tails: Vec<Option<Tail>> = vec![None; tree.nodes.len()];
    tails[0] = Some(root_tail.clone());
    for i in 1..tree.nodes.len() {
        let n = &tree.nodes[i];
        let parent = n.parent.expect("non-root");
        tails[i] = tails[parent].as_ref().and_then(|t| act_on_expansion(k, n.label.expect("non-root"), t));
    }

    let mut leaves = Vec::new();
    for i in tree.level_nodes(tree.reached) {
        let point = tree.nodes[i].point.clone();
        let path = tree.path_word(i, Alphabet::Ternary012);
        let expansion = tails[i].clone();
        let method = match expansion.as_ref().and_then(|t| certify_expansion(f, &point, t)) {
            Some(m) => m,
            None => match unique_orbit_check(&sys, &point, depth) {
                UniqueStatus::UniqueCertified(m) => m,
                _ => return Err(BonacciError::CertificationFailed(depth)),
            },
        };
        leaves.push(LeafCertificate { path, point, expansion, method });
    }
    let alive_paths = leaves.len();
    if alive_paths != 2 * m + 1 {
        return Err(BonacciError::CertificationFailed(depth));
    }

    let mut cert = Certificate::new(
        &format!("|Omega(x_{m})| = {} = 2 + |Omega(x_{})|, k = {k}, delta = {delta}", 2 * m + 1, m - 1),
        f,
    );
    cert.depth = Some(depth);
    let (jlo, jhi) = sys.switch_region();
    let f0 = sys.index_of(0).expect("f0");
    let f2 = sys.index_of(2).expect("f2");
    for j in (1..=m).rev() {
        let xj = project_q(f, &delta.prepend(&x_word(k, j))?);
        cert.push(&format!("x_{j} > 1/q"), &xj, Rel::Gt, &jlo);
        cert.push(&format!("x_{j} < 1/(q(q-1))"), &xj, Rel::Lt, &jhi);
        if j > 1 {
            // f₀ then k-1 funnel steps of f₂ land on x_{j-1}
            let mut p = sys.apply(f0, &xj)?;
            for _ in 1..k {
                p = sys.apply(f2, &p)?;
            }
            let prev = project_q(f, &delta.prepend(&x_word(k, j - 1))?);
            cert.push(&format!("f2^{}(f0(x_{j})) = x_{}", k - 1, j - 1), &p, Rel::Eq, &prev);
        }
    }
    for (n, l) in leaves.iter().enumerate() {
        if let Some(t) = &l.expansion {
            cert.push(&format!("leaf {n} = pi({t})"), &l.point, Rel::Eq, &project_q(f, t));
        }
    }
    Ok(OddCardinality { k, m, delta: delta.clone(), depth, alive_paths, leaves, certificate: cert })
}

/// x_n = π(1^n 0 α) lies in (1/(q(q-1)), 1/(q-1)], only f₂ applies there,
/// and f₂(x_n) = x_{n-1}. The containment needs n ≥ 2 and q ∈ (G, 2), so
/// anything else returns false.
pub fn funnel_check(field: &Arc<Field>, n: usize, alpha: &Tail) -> bool {
    if n < 2 || alpha.alphabet() != Alphabet::Binary01 {
        return false;
    }
    let Ok(sys) = DynSystem::new(SystemKind::Eq, field) else {
        return false;
    };
    if crate::numeric::cmp_with_bonacci(field, 2) != std::cmp::Ordering::Greater {
        return false;
    }
    let x = |n: usize| {
        let mut w = "1".repeat(n);
        w.push('0');
        alpha.prepend(&Word::bin(&w)).map(|t| project_q(field, &t))
    };
    let (Ok(xn), Ok(prev)) = (x(n), x(n - 1)) else {
        return false;
    };
    let (_, jhi) = sys.switch_region();
    let top = sys.interval().1;
    if !(jhi < xn && &xn <= top) {
        return false;
    }
    let apps = sys.applicable(&xn);
    apps.len() == 1 && sys.maps()[apps[0].0].label == 2 && apps[0].1 == prev
}

#[derive(Clone, Debug)]
pub struct NullInfinite {
    pub k: usize,
    pub depth: usize,
    pub branch_points: usize,
    pub leaves: usize,
    pub certificate: Certificate,
}

impl NullInfinite {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "k": self.k,
            "depth": self.depth,
            "branch_points": self.branch_points,
            "leaves": self.leaves,
            "certificate": self.certificate.to_json(),
        })
    }
}

/// Checks the null infinite structure of 1/q_k to `depth`: every branch
/// point has two children, the f₂ child is 0 (a fixed point of f₀), and the
/// f₀ child returns to 1/q_k after k-1 steps of f₂ and branches again.
pub fn null_infinite_probe(k: usize, depth: usize) -> Result<NullInfinite, BonacciError> {
    if k < 3 {
        return Err(BonacciError::KTooSmall { k, min: 3 });
    }
    let base = bonacci_root(k)?;
    let f = &base.field;
    let sys = DynSystem::new(SystemKind::Eq, f)?;
    let x = FieldElement::q_inv(f);
    let tree = enumerate_orbits(&sys, &x, depth);
    if tree.truncated {
        return Err(BonacciError::CertificationFailed(tree.reached));
    }
    let zero = FieldElement::zero(f);
    let mut branch_points = 0;
    for n in &tree.nodes {
        if n.children.len() < 2 {
            continue;
        }
        branch_points += 1;
        let labels: Vec<i8> = n.children.iter().map(|&c| tree.nodes[c].label.expect("child")).collect();
        if labels != [0, 2] || n.point != x {
            return Err(BonacciError::CertificationFailed(n.level));
        }
        let dead = n.children[1];
        if tree.nodes[dead].point != zero || !unique_orbit_check(&sys, &zero, 1).is_certified() {
            return Err(BonacciError::CertificationFailed(n.level));
        }
        // the f₀ side: a single path that is back at x after k steps
        let mut c = n.children[0];
        for _ in 1..k {
            match tree.nodes[c].children.as_slice() {
                [next] if tree.nodes[*next].label == Some(2) => c = *next,
                [] => break,
                _ => return Err(BonacciError::CertificationFailed(tree.nodes[c].level)),
            }
        }
        if tree.nodes[c].level == n.level + k && tree.nodes[c].point != x {
            return Err(BonacciError::CertificationFailed(tree.nodes[c].level));
        }
    }
    // branch points sit at levels 0, k, 2k, ...
    if branch_points != depth.div_ceil(k).max(1) {
        return Err(BonacciError::CertificationFailed(depth));
    }

    let mut cert = Certificate::new(&format!("x = 1/q is null infinite at q = q_{k} to depth {depth}"), f);
    cert.depth = Some(depth);
    let f0 = sys.index_of(0).expect("f0");
    let f2 = sys.index_of(2).expect("f2");
    let up = sys.apply(f0, &x)?;
    let expected = project_q(f, &Tail::constant(Alphabet::Binary01, 0).prepend(&Word::bin(&"1".repeat(k)))?);
    cert.push("f0(x) = pi(1^k 0^inf)", &up, Rel::Eq, &expected);
    cert.push("f2(x) = 0", &sys.apply(f2, &x)?, Rel::Eq, &zero);
    cert.push("x = 1/q, outside the open domain of f1", &x, Rel::Eq, &sys.switch_region().0);
    let mut p = up;
    for _ in 1..k {
        p = sys.apply(f2, &p)?;
    }
    cert.push(&format!("f2^{}(f0(x)) = x", k - 1), &p, Rel::Eq, &x);
    Ok(NullInfinite { k, depth, branch_points, leaves: tree.leaf_count(), certificate: cert })
}

#[derive(Clone, Debug)]
pub enum C2Outcome {
    TwoOrbitsCertified {
        method: UniqueMethod,
    },
    /// `words` are two alive map sequences from 1/q that split below the
    /// f₀ child; `expansions` are two base-q expansions of 1 when the search
    /// finds terminating ones.
    NotTwo {
        branch_step: usize,
        words: [Word; 2],
        expansions: Option<[Tail; 2]>,
    },
    Unknown {
        depth: usize,
    },
}

impl C2Outcome {
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            C2Outcome::TwoOrbitsCertified { method } => json!({"result": "TwoOrbitsCertified", "method": method}),
            C2Outcome::NotTwo { branch_step, words, expansions } => json!({
                "result": "NotTwo",
                "branch_step": branch_step,
                "words": [words[0].to_string(), words[1].to_string()],
                "expansions_of_one": expansions.as_ref().map(|e| [e[0].to_string(), e[1].to_string()]),
            }),
            C2Outcome::Unknown { depth } => json!({"result": "Unknown", "depth": depth}),
        }
    }
}

/// Counts the orbits of 1/q. Its children are f₀(1/q) = 1 and f₂(1/q) = 0,
/// and 0 has one orbit, so there are exactly two orbits iff 1 has one.
pub fn c2_probe(field: &Arc<Field>, depth: usize) -> Result<C2Outcome, BonacciError> {
    let sys = DynSystem::new(SystemKind::Eq, field)?;
    let one = FieldElement::one(field);
    let x = FieldElement::q_inv(field);
    let labels: Vec<i8> = sys.applicable(&x).iter().map(|(i, _)| sys.maps()[*i].label).collect();
    debug_assert_eq!(labels, [0, 2]);

    match unique_orbit_check(&sys, &one, depth) {
        UniqueStatus::UniqueCertified(method) => {
            // prefer the subshift criterion on the digits of the trajectory
            let method = match (&method, trajectory_tail(&sys, &one, &method)) {
                (_, Some(t)) => certify_expansion(field, &one, &t).unwrap_or(method),
                _ => method,
            };
            Ok(C2Outcome::TwoOrbitsCertified { method })
        }
        UniqueStatus::BranchFoundAt(step) => {
            let tree = enumerate_orbits(&sys, &one, step + 1);
            let leaves = tree.leaf_words(Alphabet::Ternary012);
            let lift = |w: &Word| Word::ter("0").concat(w).expect("ternary");
            let words = [lift(&leaves[0]), lift(&leaves[1])];
            Ok(C2Outcome::NotTwo { branch_step: step + 1, words, expansions: two_expansions_of_one(&sys) })
        }
        UniqueStatus::UnknownAtDepth(d) => Ok(C2Outcome::Unknown { depth: d }),
    }
}

/// Digits of a periodic trajectory of `x` as a binary tail, when only f₀
/// and f₂ occur along it.
fn trajectory_tail(sys: &DynSystem, x: &FieldElement, method: &UniqueMethod) -> Option<Tail> {
    let UniqueMethod::Periodic { preperiod, period } = *method else {
        return None;
    };
    let mut digits = Vec::with_capacity(preperiod + period);
    let mut p = x.clone();
    for _ in 0..preperiod + period {
        let (i, y) = sys.applicable(&p).into_iter().next()?;
        match sys.maps()[i].label {
            0 => digits.push(0),
            2 => digits.push(1),
            _ => return None,
        }
        p = y;
    }
    let pre = Word::new(Alphabet::Binary01, digits[..preperiod].to_vec()).ok()?;
    let per = Word::new(Alphabet::Binary01, digits[preperiod..].to_vec()).ok()?;
    Tail::new(pre, per).ok()
}

/// Two finite expansions of 1, read off {f₀, f₂}-paths from 1 that reach 0.
fn two_expansions_of_one(sys: &DynSystem) -> Option<[Tail; 2]> {
    let f = sys.field();
    let one = FieldElement::one(f);
    let tree = enumerate_orbits_bounded(sys, &one, EXPANSION_SEARCH_DEPTH, EXPANSION_SEARCH_NODES);
    let zero_tail = Tail::constant(Alphabet::Binary01, 0);
    let mut found: Vec<Tail> = Vec::new();
    for (i, n) in tree.nodes.iter().enumerate() {
        if i == 0 || !n.point.is_zero() || tree.nodes[n.parent?].point.is_zero() {
            continue;
        }
        let labels = tree.path_labels(i);
        if labels.contains(&1) {
            continue;
        }
        let digits: Vec<i8> = labels.iter().map(|&l| l / 2).collect();
        let t = zero_tail.prepend(&Word::new(Alphabet::Binary01, digits).ok()?).ok()?;
        if project_q(f, &t) == one && !found.contains(&t) {
            found.push(t);
        }
        if found.len() == 2 {
            return Some([found[0].clone(), found[1].clone()]);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificate::check;
    use crate::dynamics::finite_sum;
    use crate::numeric::field_from_literal;
    use crate::words::parse_tail;
    use proptest::prelude::*;

    fn bt(s: &str) -> Tail {
        parse_tail(s, Alphabet::Binary01).unwrap()
    }

    #[test]
    fn roots_and_identities() {
        let approx = [(2, 1.618_034), (3, 1.839_287), (9, 1.998_029)];
        for (k, v) in approx {
            let b = bonacci_root(k).unwrap();
            assert!((b.q().to_f64() - v).abs() < 1e-5, "k={k}");
        }
        let mut prev = 1.0;
        for k in 2..=12 {
            let b = bonacci_root(k).unwrap();
            assert!(b.identities_hold(), "k={k}");
            let v = b.q().to_f64();
            assert!(v > prev && v < 2.0);
            prev = v;
        }
        assert!(matches!(bonacci_root(1), Err(BonacciError::KTooSmall { .. })));
    }

    #[test]
    fn x_m_against_float_summation() {
        let b = bonacci_root(3).unwrap();
        let x = x_m_witness(&b, 1, &bt("(01)*")).unwrap();
        let q = b.q().to_f64();
        let digits = format!("1000{}", "01".repeat(60));
        let s: f64 =
            digits.chars().enumerate().map(|(j, c)| if c == '1' { q.powi(-(j as i32 + 1)) } else { 0.0 }).sum();
        assert!((x.to_f64() - s).abs() < 1e-12);
        // the identity π(10^kα) = π(01^kα)
        let alt = project_q(&b.field, &bt("0111(01)*"));
        assert_eq!(x, alt);
        assert_eq!(x_m_witness(&b, 1, &bt("(001)*")).unwrap_err(), BonacciError::DeltaNotInSTilde);
        assert_eq!(x_m_witness(&b, 1, &bt("(011)*")).unwrap_err(), BonacciError::DeltaNotInSTilde);
        assert_eq!(x_m_witness(&b, 0, &bt("(01)*")).unwrap_err(), BonacciError::MTooSmall);
    }

    #[test]
    fn f1_image_is_reflected_tail() {
        for k in 3..=5 {
            let b = bonacci_root(k).unwrap();
            let sys = DynSystem::new(SystemKind::Eq, &b.field).unwrap();
            let delta = bt("(01)*");
            for m in 1..=3 {
                let x = x_m_witness(&b, m, &delta).unwrap();
                let img = sys.apply(sys.index_of(1).unwrap(), &x).unwrap();
                let ones = Word::bin(&"1".repeat(k * (m - 1)));
                let expected = project_q(&b.field, &delta.reflect().unwrap().prepend(&ones).unwrap());
                assert_eq!(img, expected, "k={k} m={m}");
            }
        }
    }

    #[test]
    fn odd_cardinality_examples() {
        for (k, m, want) in [(3, 1, 3), (3, 2, 5), (3, 4, 9), (4, 2, 5)] {
            let r = verify_odd_cardinality(k, m, &bt("(01)*"), 30).unwrap();
            assert_eq!(r.alive_paths, want);
            assert_eq!(check(&r.certificate), Ok(()));
            assert!(r.leaves.iter().all(|l| matches!(l.method, UniqueMethod::Subshift { .. })));
        }
        // too shallow to see the last branch point
        assert!(verify_odd_cardinality(3, 4, &bt("(01)*"), 6).is_err());
    }

    #[test]
    fn recursion_adds_two() {
        for k in 3..=5 {
            let mut prev = None;
            for m in 1..=3 {
                let n = verify_odd_cardinality(k, m, &bt("(001011)*"), 24).unwrap().alive_paths;
                if let Some(p) = prev {
                    assert_eq!(n, p + 2, "k={k} m={m}");
                }
                prev = Some(n);
            }
        }
    }

    #[test]
    fn funnel_examples() {
        let f = field_from_literal("bonacci:3").unwrap();
        assert!(funnel_check(&f, 3, &bt("0*")));
        assert!(funnel_check(&f, 2, &bt("(01)*")));
        assert!(!funnel_check(&f, 1, &bt("0*")));
        let g = field_from_literal("3/2").unwrap();
        assert!(!funnel_check(&g, 3, &bt("0*")));
    }

    #[test]
    fn null_infinite_at_q3() {
        let r = null_infinite_probe(3, 40).unwrap();
        assert_eq!(r.branch_points, 14);
        assert_eq!(r.leaves, 15);
        assert_eq!(check(&r.certificate), Ok(()));
        for k in 4..=6 {
            let r = null_infinite_probe(k, 20).unwrap();
            assert_eq!(r.branch_points, 20usize.div_ceil(k));
        }
    }

    #[test]
    fn c2_examples() {
        let f = field_from_literal("bonacci:3").unwrap();
        match c2_probe(&f, 48).unwrap() {
            C2Outcome::NotTwo { expansions: Some([a, b]), .. } => {
                assert_ne!(a, b);
                for t in [a, b] {
                    assert_eq!(project_q(&f, &t), FieldElement::one(&f));
                }
            }
            other => panic!("{other:?}"),
        }
        let f = field_from_literal("6/5").unwrap();
        assert!(matches!(c2_probe(&f, 48).unwrap(), C2Outcome::NotTwo { branch_step: 1, .. }));

        // 1 = π(111(01)^∞) for the root of q^4 - q^3 - 2q^2 + 1 near 1.905
        let f = field_from_literal("algebraic:1,0,-2,-1,1:19/10:191/100").unwrap();
        assert_eq!(project_q(&f, &bt("111(01)*")), FieldElement::one(&f));
        match c2_probe(&f, 48).unwrap() {
            C2Outcome::TwoOrbitsCertified { method: UniqueMethod::Subshift { k: 3, .. } } => {}
            other => panic!("{other:?}"),
        }
    }

    fn s_tilde3() -> impl Strategy<Value = Tail> {
        prop::collection::vec(0i8..2, 1..=6).prop_filter_map("in S~^3", |v| {
            let t = Tail::periodic(Word::new(Alphabet::Binary01, v).ok()?).ok()?;
            member(&SubshiftSpec::new(SubshiftKind::STildeK, 3), &t).ok()?.then_some(t)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]
        #[test]
        fn cardinality_is_independent_of_delta(delta in s_tilde3(), m in 1usize..=3) {
            let r = verify_odd_cardinality(3, m, &delta, 24).unwrap();
            prop_assert_eq!(r.alive_paths, 2 * m + 1);
        }

        #[test]
        fn expansion_tracking_matches_points(delta in s_tilde3(), m in 1usize..=3) {
            let b = bonacci_root(3).unwrap();
            let sys = DynSystem::new(SystemKind::Eq, &b.field).unwrap();
            let t = x_m_expansion(3, m, &delta).unwrap();
            let x = project_q(&b.field, &t);
            for (i, y) in sys.applicable(&x) {
                let img = act_on_expansion(3, sys.maps()[i].label, &t).unwrap();
                prop_assert_eq!(project_q(&b.field, &img), y);
            }
            let head = finite_sum(&b.field, t.prefix(4).symbols());
            prop_assert!(head <= x);
        }
    }
}
