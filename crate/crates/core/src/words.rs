//! Finite words, eventually periodic sequences and the forbidden-word
//! subshifts used throughout the crate.
//!
//! Text syntax: `1(0^3)^2(01)*`. Parentheses group, `^n` repeats, and a
//! trailing `(...)*` (or a single symbol followed by `*`) is the periodic
//! tail. The digit minus one is written `-1`. Whitespace is ignored.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Longest word the parser will expand, to keep hostile inputs bounded.
pub const MAX_EXPANDED_LEN: usize = 1 << 20;
const MAX_NESTING: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum WordError {
    #[error("alphabet mismatch")]
    AlphabetMismatch,
    #[error("length mismatch")]
    LengthMismatch,
    #[error("symbol {0} outside the alphabet")]
    SymbolOutOfRange(i8),
    #[error("empty period")]
    EmptyPeriod,
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Alphabet {
    Binary01,
    Ternary012,
    Signed,
}

impl Alphabet {
    pub fn contains(self, s: i8) -> bool {
        match self {
            Alphabet::Binary01 => s == 0 || s == 1,
            Alphabet::Ternary012 => (0..=2).contains(&s),
            Alphabet::Signed => (-1..=1).contains(&s),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    alphabet: Alphabet,
    symbols: Vec<i8>,
}

impl Word {
    pub fn new(alphabet: Alphabet, symbols: Vec<i8>) -> Result<Self, WordError> {
        if let Some(&s) = symbols.iter().find(|&&s| !alphabet.contains(s)) {
            return Err(WordError::SymbolOutOfRange(s));
        }
        Ok(Word { alphabet, symbols })
    }

    pub fn empty(alphabet: Alphabet) -> Self {
        Word { alphabet, symbols: Vec::new() }
    }

    /// Binary word from a `0`/`1` string; panics on other characters.
    pub fn bin(s: &str) -> Self {
        let symbols = s
            .bytes()
            .map(|b| match b {
                b'0' => 0,
                b'1' => 1,
                _ => panic!("not a binary digit: {}", b as char),
            })
            .collect();
        Word { alphabet: Alphabet::Binary01, symbols }
    }

    /// Ternary word from a `0`/`1`/`2` string; panics on other characters.
    pub fn ter(s: &str) -> Self {
        let symbols = s
            .bytes()
            .map(|b| match b {
                b'0'..=b'2' => (b - b'0') as i8,
                _ => panic!("not a ternary digit: {}", b as char),
            })
            .collect();
        Word { alphabet: Alphabet::Ternary012, symbols }
    }

    pub fn repeat_symbol(alphabet: Alphabet, s: i8, n: usize) -> Self {
        assert!(alphabet.contains(s));
        Word { alphabet, symbols: vec![s; n] }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn symbols(&self) -> &[i8] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn push(&mut self, s: i8) {
        assert!(self.alphabet.contains(s), "symbol {s} outside {:?}", self.alphabet);
        self.symbols.push(s);
    }

    pub fn concat(&self, other: &Word) -> Result<Word, WordError> {
        if self.alphabet != other.alphabet {
            return Err(WordError::AlphabetMismatch);
        }
        let mut symbols = self.symbols.clone();
        symbols.extend_from_slice(&other.symbols);
        Ok(Word { alphabet: self.alphabet, symbols })
    }

    pub fn repeat(&self, n: usize) -> Word {
        Word { alphabet: self.alphabet, symbols: self.symbols.repeat(n) }
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word { alphabet: self.alphabet, symbols: self.symbols[..n.min(self.len())].to_vec() }
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        self.alphabet == other.alphabet && other.symbols.starts_with(&self.symbols)
    }

    /// Same symbols over a larger alphabet (binary words read as ternary or signed).
    pub fn with_alphabet(&self, alphabet: Alphabet) -> Result<Word, WordError> {
        Word::new(alphabet, self.symbols.clone())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({})", self)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_runs(&self.symbols))
    }
}

/// An eventually periodic sequence `preperiod · period^∞`, always stored in
/// canonical form: primitive period and the shortest possible preperiod.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tail {
    preperiod: Word,
    period: Word,
}

impl Tail {
    pub fn new(preperiod: Word, period: Word) -> Result<Self, WordError> {
        if preperiod.alphabet != period.alphabet {
            return Err(WordError::AlphabetMismatch);
        }
        if period.is_empty() {
            return Err(WordError::EmptyPeriod);
        }
        let alphabet = period.alphabet;
        let mut per = primitive_root(&period.symbols).to_vec();
        let mut pre = preperiod.symbols;
        while let (Some(&a), Some(&b)) = (pre.last(), per.last()) {
            if a != b {
                break;
            }
            pre.pop();
            per.rotate_right(1);
        }
        Ok(Tail { preperiod: Word { alphabet, symbols: pre }, period: Word { alphabet, symbols: per } })
    }

    /// `s^∞`.
    pub fn constant(alphabet: Alphabet, s: i8) -> Self {
        Tail::new(Word::empty(alphabet), Word::repeat_symbol(alphabet, s, 1)).expect("valid symbol")
    }

    pub fn periodic(period: Word) -> Result<Self, WordError> {
        Tail::new(Word::empty(period.alphabet), period)
    }

    pub fn preperiod(&self) -> &Word {
        &self.preperiod
    }

    pub fn period(&self) -> &Word {
        &self.period
    }

    pub fn alphabet(&self) -> Alphabet {
        self.period.alphabet
    }

    /// Symbol at 0-based position `j`.
    pub fn at(&self, j: usize) -> i8 {
        let p = self.preperiod.len();
        if j < p {
            self.preperiod.symbols[j]
        } else {
            self.period.symbols[(j - p) % self.period.len()]
        }
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word { alphabet: self.alphabet(), symbols: (0..n).map(|j| self.at(j)).collect() }
    }

    /// `w · self`.
    pub fn prepend(&self, w: &Word) -> Result<Tail, WordError> {
        Tail::new(w.concat(&self.preperiod)?, self.period.clone())
    }

    /// The sequence with its first `n` symbols removed.
    pub fn shift(&self, n: usize) -> Tail {
        let p = self.preperiod.len();
        if n <= p {
            let pre = Word { alphabet: self.alphabet(), symbols: self.preperiod.symbols[n..].to_vec() };
            return Tail::new(pre, self.period.clone()).expect("same alphabet");
        }
        let mut per = self.period.symbols.clone();
        let r = (n - p) % per.len();
        per.rotate_left(r);
        Tail::new(Word::empty(self.alphabet()), Word { alphabet: self.alphabet(), symbols: per })
            .expect("same alphabet")
    }

    /// True iff the sequence is eventually equal to `other` (some shifts agree).
    pub fn ends_with(&self, other: &Tail) -> bool {
        self.alphabet() == other.alphabet()
            && self.period.len() == other.period.len()
            && is_rotation(&self.period.symbols, &other.period.symbols)
    }

    /// A finite word long enough that every factor of length `n` of the
    /// sequence occurs in it.
    pub fn covering_word(&self, n: usize) -> Word {
        let len = self.preperiod.len() + self.period.len() + n;
        self.prefix(len)
    }

    pub fn with_alphabet(&self, alphabet: Alphabet) -> Result<Tail, WordError> {
        Tail::new(self.preperiod.with_alphabet(alphabet)?, self.period.with_alphabet(alphabet)?)
    }

    /// Symbolwise image under `f`, re-canonicalized.
    pub fn map_symbols(&self, alphabet: Alphabet, f: impl Fn(i8) -> i8) -> Result<Tail, WordError> {
        let pre = Word::new(alphabet, self.preperiod.symbols.iter().map(|&s| f(s)).collect())?;
        let per = Word::new(alphabet, self.period.symbols.iter().map(|&s| f(s)).collect())?;
        Tail::new(pre, per)
    }
}

impl fmt::Debug for Tail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tail({})", self)
    }
}

impl fmt::Display for Tail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_runs(&self.preperiod.symbols))?;
        write!(f, "({})*", print_runs(&self.period.symbols))
    }
}

fn primitive_root(s: &[i8]) -> &[i8] {
    let n = s.len();
    for d in 1..=n {
        if n.is_multiple_of(d) && (d..n).all(|i| s[i] == s[i - d]) {
            return &s[..d];
        }
    }
    s
}

fn is_rotation(a: &[i8], b: &[i8]) -> bool {
    a.len() == b.len() && (0..a.len().max(1)).any(|r| (0..a.len()).all(|i| a[(i + r) % a.len()] == b[i]))
}

fn symbol_str(s: i8) -> String {
    s.to_string()
}

fn last_was_count(out: &str) -> bool {
    let body = out.trim_end_matches(|c: char| c.is_ascii_digit());
    body.ends_with('^')
}

fn print_runs(symbols: &[i8]) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < symbols.len() {
        let s = symbols[i];
        let mut j = i;
        while j < symbols.len() && symbols[j] == s {
            j += 1;
        }
        if last_was_count(&out) {
            // keep `0^2 1` from reading as `0^21`
            out.push(' ');
        }
        out.push_str(&symbol_str(s));
        if j - i >= 2 {
            out.push('^');
            out.push_str(&(j - i).to_string());
        }
        i = j;
    }
    out
}

// ---------------------------------------------------------------------------
// parsing

/// A parsed sequence: finite, or eventually periodic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sequence {
    Finite(Word),
    Periodic(Tail),
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    alphabet: Alphabet,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, WordError> {
        Err(WordError::Syntax { pos: self.pos, msg: msg.into() })
    }

    fn peek(&mut self) -> Option<u8> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.src.get(self.pos).copied()
    }

    fn number(&mut self) -> Result<usize, WordError> {
        self.peek();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a repetition count");
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        match text.parse::<usize>() {
            Ok(n) if n <= MAX_EXPANDED_LEN => Ok(n),
            _ => self.err("repetition count too large"),
        }
    }

    /// Parses items until `)` or end of input. Returns the symbols and,
    /// at top level, the starred tail if one closes the input.
    fn seq(&mut self, depth: usize, top: bool) -> Result<(Vec<i8>, Option<Vec<i8>>), WordError> {
        if depth > MAX_NESTING {
            return self.err("nesting too deep");
        }
        let mut out: Vec<i8> = Vec::new();
        loop {
            let atom = match self.peek() {
                None => break,
                Some(b')') => break,
                Some(b'(') => {
                    self.pos += 1;
                    let (inner, _) = self.seq(depth + 1, false)?;
                    if self.peek() != Some(b')') {
                        return self.err("unclosed parenthesis");
                    }
                    self.pos += 1;
                    inner
                }
                Some(b'-') => {
                    self.pos += 1;
                    if self.peek() != Some(b'1') {
                        return self.err("expected 1 after -");
                    }
                    self.pos += 1;
                    vec![-1]
                }
                Some(c @ b'0'..=b'2') => {
                    self.pos += 1;
                    vec![(c - b'0') as i8]
                }
                Some(c) => return self.err(format!("unexpected `{}`", c as char)),
            };
            for &s in &atom {
                if !self.alphabet.contains(s) {
                    return self.err(format!("symbol {s} outside {:?}", self.alphabet));
                }
            }
            match self.peek() {
                Some(b'^') => {
                    self.pos += 1;
                    let n = self.number()?;
                    if atom.len().saturating_mul(n) + out.len() > MAX_EXPANDED_LEN {
                        return self.err("expanded word too long");
                    }
                    for _ in 0..n {
                        out.extend_from_slice(&atom);
                    }
                }
                Some(b'*') => {
                    self.pos += 1;
                    if !top {
                        return self.err("periodic tail inside a group");
                    }
                    if self.peek().is_some() {
                        return self.err("periodic tail must come last");
                    }
                    if atom.is_empty() {
                        return self.err("empty period");
                    }
                    return Ok((out, Some(atom)));
                }
                _ => {
                    if atom.len() + out.len() > MAX_EXPANDED_LEN {
                        return self.err("expanded word too long");
                    }
                    out.extend_from_slice(&atom);
                }
            }
        }
        Ok((out, None))
    }
}

pub fn parse_sequence(s: &str, alphabet: Alphabet) -> Result<Sequence, WordError> {
    let mut p = Parser { src: s.as_bytes(), pos: 0, alphabet };
    let (pre, tail) = p.seq(0, true)?;
    if p.peek().is_some() {
        return p.err("unbalanced `)`");
    }
    let pre = Word { alphabet, symbols: pre };
    Ok(match tail {
        None => Sequence::Finite(pre),
        Some(per) => Sequence::Periodic(Tail::new(pre, Word { alphabet, symbols: per })?),
    })
}

pub fn parse_word(s: &str, alphabet: Alphabet) -> Result<Word, WordError> {
    match parse_sequence(s, alphabet)? {
        Sequence::Finite(w) => Ok(w),
        Sequence::Periodic(_) => Err(WordError::Syntax { pos: s.len(), msg: "expected a finite word".into() }),
    }
}

pub fn parse_tail(s: &str, alphabet: Alphabet) -> Result<Tail, WordError> {
    match parse_sequence(s, alphabet)? {
        Sequence::Periodic(t) => Ok(t),
        Sequence::Finite(_) => Err(WordError::Syntax { pos: s.len(), msg: "expected a periodic tail `(...)*`".into() }),
    }
}

// ---------------------------------------------------------------------------
// factor avoidance and subshifts

/// True iff `factor` occurs at no position of `w`.
pub fn avoids(w: &Word, factor: &Word) -> Result<bool, WordError> {
    if w.alphabet != factor.alphabet {
        return Err(WordError::AlphabetMismatch);
    }
    if factor.is_empty() {
        return Ok(false);
    }
    Ok(!w.symbols.windows(factor.len()).any(|x| x == factor.symbols.as_slice()))
}

/// Factor avoidance for an infinite eventually periodic sequence.
pub fn tail_avoids(t: &Tail, factor: &Word) -> Result<bool, WordError> {
    avoids(&t.covering_word(factor.len()), factor)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SubshiftKind {
    /// avoids `01^k` and `10^k`
    Sk,
    /// as `Sk`, and not ending in `(01^(k-1))^∞` or `(10^(k-1))^∞`
    SHatK,
    /// avoids `0^k` and `1^k`, same tail condition as `SHatK`
    STildeK,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubshiftSpec {
    pub kind: SubshiftKind,
    pub k: usize,
}

impl SubshiftSpec {
    pub fn new(kind: SubshiftKind, k: usize) -> Self {
        assert!(k >= 1, "subshift index must be positive");
        SubshiftSpec { kind, k }
    }

    pub fn forbidden_factors(&self) -> [Word; 2] {
        let k = self.k;
        match self.kind {
            SubshiftKind::Sk | SubshiftKind::SHatK => {
                [Word::bin(&format!("0{}", "1".repeat(k))), Word::bin(&format!("1{}", "0".repeat(k)))]
            }
            SubshiftKind::STildeK => [Word::bin(&"0".repeat(k)), Word::bin(&"1".repeat(k))],
        }
    }

    pub fn forbidden_tails(&self) -> Vec<Tail> {
        match self.kind {
            SubshiftKind::Sk => Vec::new(),
            _ => {
                let a = Word::bin(&format!("0{}", "1".repeat(self.k - 1)));
                let b = Word::bin(&format!("1{}", "0".repeat(self.k - 1)));
                vec![Tail::periodic(a).expect("nonempty"), Tail::periodic(b).expect("nonempty")]
            }
        }
    }

    /// True iff the finite word contains no forbidden factor (it may still
    /// fail to extend to a member when tails are restricted; for these
    /// subshifts every admissible word does extend).
    pub fn admits_word(&self, w: &Word) -> Result<bool, WordError> {
        for f in self.forbidden_factors() {
            if !avoids(w, &f)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

pub fn member(spec: &SubshiftSpec, t: &Tail) -> Result<bool, WordError> {
    if t.alphabet() != Alphabet::Binary01 {
        return Err(WordError::AlphabetMismatch);
    }
    for f in spec.forbidden_factors() {
        if !tail_avoids(t, &f)? {
            return Ok(false);
        }
    }
    Ok(!spec.forbidden_tails().iter().any(|ft| t.ends_with(ft)))
}

/// True iff the two binary words, read as binary integers, differ by one.
pub fn lex_consecutive(a: &Word, b: &Word) -> Result<bool, WordError> {
    if a.alphabet != Alphabet::Binary01 || b.alphabet != Alphabet::Binary01 {
        return Err(WordError::AlphabetMismatch);
    }
    if a.len() != b.len() {
        return Err(WordError::LengthMismatch);
    }
    let (lo, hi) = if a.symbols <= b.symbols { (a, b) } else { (b, a) };
    // hi = lo + 1 iff lo = u 0 1^r and hi = u 1 0^r
    let n = lo.len();
    let r = lo.symbols.iter().rev().take_while(|&&s| s == 1).count();
    if r == n {
        return Ok(false);
    }
    let p = n - r - 1;
    Ok(lo.symbols[..p] == hi.symbols[..p] && hi.symbols[p] == 1 && hi.symbols[p + 1..].iter().all(|&s| s == 0))
}

pub trait Reflect: Sized {
    fn reflect(&self) -> Result<Self, WordError>;
}

impl Reflect for Word {
    fn reflect(&self) -> Result<Word, WordError> {
        if self.alphabet != Alphabet::Binary01 {
            return Err(WordError::AlphabetMismatch);
        }
        Ok(Word { alphabet: self.alphabet, symbols: self.symbols.iter().map(|&s| 1 - s).collect() })
    }
}

impl Reflect for Tail {
    fn reflect(&self) -> Result<Tail, WordError> {
        Tail::new(self.preperiod.reflect()?, self.period.reflect()?)
    }
}

pub fn reflect<T: Reflect>(x: &T) -> Result<T, WordError> {
    x.reflect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tail(s: &str) -> Tail {
        parse_tail(s, Alphabet::Binary01).unwrap()
    }

    #[test]
    fn avoids_examples() {
        let f = Word::bin("0111111111");
        assert!(!avoids(&f.clone(), &f).unwrap());
        assert!(avoids(&Word::bin("101010"), &Word::bin("000000000")).unwrap());
        assert!(!avoids(&Word::bin("10000000001"), &Word::bin("1000000000")).unwrap());
        assert_eq!(avoids(&Word::ter("01"), &Word::bin("0")), Err(WordError::AlphabetMismatch));
    }

    #[test]
    fn member_examples() {
        assert!(member(&SubshiftSpec::new(SubshiftKind::STildeK, 3), &tail("(01)*")).unwrap());
        assert!(!member(&SubshiftSpec::new(SubshiftKind::SHatK, 3), &tail("(011)*")).unwrap());
        assert!(!member(&SubshiftSpec::new(SubshiftKind::SHatK, 3), &tail("10(110)*")).unwrap());
        assert!(member(&SubshiftSpec::new(SubshiftKind::Sk, 9), &tail("1*")).unwrap());
        assert!(!member(&SubshiftSpec::new(SubshiftKind::Sk, 9), &tail("01*")).unwrap());
    }

    #[test]
    fn lex_consecutive_examples() {
        assert!(lex_consecutive(&Word::bin("011"), &Word::bin("100")).unwrap());
        assert!(lex_consecutive(&Word::bin("010"), &Word::bin("011")).unwrap());
        assert!(!lex_consecutive(&Word::bin("001"), &Word::bin("100")).unwrap());
        assert!(!lex_consecutive(&Word::bin("01"), &Word::bin("01")).unwrap());
        assert_eq!(lex_consecutive(&Word::bin("01"), &Word::bin("011")), Err(WordError::LengthMismatch));
    }

    #[test]
    fn lex_consecutive_matches_integers() {
        for n in 1..=6usize {
            for a in 0..(1u32 << n) {
                for b in 0..(1u32 << n) {
                    let wa = Word::bin(&format!("{a:0n$b}"));
                    let wb = Word::bin(&format!("{b:0n$b}"));
                    assert_eq!(lex_consecutive(&wa, &wb).unwrap(), a.abs_diff(b) == 1);
                }
            }
        }
    }

    #[test]
    fn reflect_examples() {
        assert_eq!(reflect(&Word::bin("0110")).unwrap(), Word::bin("1001"));
        assert_eq!(reflect(&tail("0*")).unwrap(), tail("1*"));
        assert_eq!(reflect(&Word::empty(Alphabet::Binary01)).unwrap(), Word::empty(Alphabet::Binary01));
    }

    #[test]
    fn syntax_examples() {
        let t = tail("1(0^3)^2(01)*");
        assert_eq!(t.prefix(9), Word::bin("100000001"));
        assert_eq!(t.to_string(), "10^6(01)*");
        assert_eq!(Word::bin("0011").to_string(), "0^2 1^2");
        assert_eq!(parse_word("0 -1 1", Alphabet::Signed).unwrap().symbols(), &[0, -1, 1]);
        assert_eq!(parse_tail("2*", Alphabet::Ternary012).unwrap().to_string(), "(2)*");
        for bad in ["(", ")", "0^", "(01)*0", "((0)*)", "2", "-0", "0^99999999999", "()*"] {
            assert!(parse_sequence(bad, Alphabet::Binary01).is_err(), "{bad}");
        }
    }

    #[test]
    fn canonical_rollback() {
        assert_eq!(tail("0101(01)*"), tail("(10)^3(10)*").shift(1));
        assert_eq!(tail("(0101)*").period().len(), 2);
        assert_eq!(tail("1(01)*"), tail("(10)*"));
    }

    /// All (preperiod, period) pairs with total length ≤ 8 that denote the
    /// same sequence canonicalize identically, and distinct sequences differ.
    #[test]
    fn canonical_forms_exhaustive() {
        let mut all = Vec::new();
        for total in 1..=8usize {
            for pl in 1..=total {
                let ql = total - pl;
                for bits in 0..(1u32 << total) {
                    let s: Vec<i8> = (0..total).map(|i| ((bits >> i) & 1) as i8).collect();
                    let pre = Word::new(Alphabet::Binary01, s[..ql].to_vec()).unwrap();
                    let per = Word::new(Alphabet::Binary01, s[ql..].to_vec()).unwrap();
                    all.push(Tail::new(pre, per).unwrap());
                }
            }
        }
        // Two eventually periodic sequences with preperiod ≤ 8 and period ≤ 8
        // agree iff they agree on the first 8 + lcm bound symbols.
        let horizon = 8 + 8 * 7;
        for a in all.iter().step_by(7) {
            for b in all.iter().step_by(5) {
                assert_eq!(a == b, a.prefix(horizon) == b.prefix(horizon), "{a} {b}");
            }
        }
    }

    #[test]
    fn subshift_nesting_and_reflection() {
        for k in 1..=4 {
            for total in 1..=7usize {
                for pl in 1..=total {
                    for bits in 0..(1u32 << total) {
                        let s: Vec<i8> = (0..total).map(|i| ((bits >> i) & 1) as i8).collect();
                        let t = Tail::new(
                            Word::new(Alphabet::Binary01, s[..total - pl].to_vec()).unwrap(),
                            Word::new(Alphabet::Binary01, s[total - pl..].to_vec()).unwrap(),
                        )
                        .unwrap();
                        let sk = member(&SubshiftSpec::new(SubshiftKind::Sk, k), &t).unwrap();
                        let sh = member(&SubshiftSpec::new(SubshiftKind::SHatK, k), &t).unwrap();
                        let st = member(&SubshiftSpec::new(SubshiftKind::STildeK, k), &t).unwrap();
                        assert!(!st || sh, "{t} k={k}");
                        assert!(!sh || sk, "{t} k={k}");
                        let r = t.reflect().unwrap();
                        for kind in [SubshiftKind::Sk, SubshiftKind::SHatK, SubshiftKind::STildeK] {
                            let spec = SubshiftSpec::new(kind, k);
                            assert_eq!(member(&spec, &t).unwrap(), member(&spec, &r).unwrap());
                        }
                    }
                }
            }
        }
    }

    fn arb_symbols(alphabet: Alphabet, max: usize) -> impl Strategy<Value = Vec<i8>> {
        let range = match alphabet {
            Alphabet::Binary01 => 0i8..=1,
            Alphabet::Ternary012 => 0i8..=2,
            Alphabet::Signed => -1i8..=1,
        };
        prop::collection::vec(range, 0..max)
    }

    fn arb_alphabet() -> impl Strategy<Value = Alphabet> {
        prop_oneof![Just(Alphabet::Binary01), Just(Alphabet::Ternary012), Just(Alphabet::Signed)]
    }

    proptest! {
        #[test]
        fn word_round_trip((a, s) in arb_alphabet().prop_flat_map(|a| (Just(a), arb_symbols(a, 40)))) {
            let w = Word::new(a, s).unwrap();
            prop_assert_eq!(parse_word(&w.to_string(), a).unwrap(), w);
        }

        #[test]
        fn tail_round_trip((a, pre, per) in arb_alphabet().prop_flat_map(|a| (Just(a), arb_symbols(a, 12), arb_symbols(a, 8)))) {
            prop_assume!(!per.is_empty());
            let t = Tail::new(Word::new(a, pre).unwrap(), Word::new(a, per).unwrap()).unwrap();
            prop_assert_eq!(parse_tail(&t.to_string(), a).unwrap(), t);
        }

        #[test]
        fn canonicalization_preserves_sequence(pre in arb_symbols(Alphabet::Binary01, 10), per in arb_symbols(Alphabet::Binary01, 6)) {
            prop_assume!(!per.is_empty());
            let raw: Vec<i8> = (0..60).map(|j| if j < pre.len() { pre[j] } else { per[(j - pre.len()) % per.len()] }).collect();
            let t = Tail::new(Word::new(Alphabet::Binary01, pre).unwrap(), Word::new(Alphabet::Binary01, per).unwrap()).unwrap();
            let head = t.prefix(60);
            let shifted = t.shift(7).prefix(20);
            prop_assert_eq!(head.symbols(), raw.as_slice());
            prop_assert_eq!(shifted.symbols(), &raw[7..27]);
        }
    }
}
