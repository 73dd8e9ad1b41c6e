//! Words over the alphabet `{0, 1, …, d}` indexing iterated integrals and
//! derivation compositions.
//!
//! The weight `‖I‖ = |I| + #{zero letters}` reflects Brownian scaling: the
//! integral indexed by `I` scales like `t^{‖I‖/2}` in law, so truncation
//! sets are weight balls `A(m) = {I : ‖I‖ <= m}`.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

/// A nonempty word over `{0, …, d}`. Letter 0 is the time coordinate.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    letters: Vec<u8>,
}

impl MultiIndex {
    pub fn new(letters: impl Into<Vec<u8>>) -> Self {
        let letters = letters.into();
        assert!(!letters.is_empty(), "multi-index words are nonempty");
        Self { letters }
    }

    pub fn letters(&self) -> &[u8] {
        &self.letters
    }

    /// Word length `|I|`.
    pub fn degree(&self) -> usize {
        self.letters.len()
    }

    /// `‖I‖ = |I| + #{j : letter_j = 0}`.
    pub fn weight(&self) -> usize {
        self.degree() + self.zeros()
    }

    pub fn zeros(&self) -> usize {
        self.letters.iter().filter(|&&a| a == 0).count()
    }

    pub fn max_letter(&self) -> u8 {
        *self.letters.iter().max().unwrap()
    }

    /// Word with the first letter removed, if any remains.
    pub fn tail(&self) -> Option<MultiIndex> {
        if self.letters.len() <= 1 {
            None
        } else {
            Some(MultiIndex::new(&self.letters[1..]))
        }
    }

    /// Word with the last letter removed, if any remains.
    pub fn prefix(&self) -> Option<MultiIndex> {
        if self.letters.len() <= 1 {
            None
        } else {
            Some(MultiIndex::new(&self.letters[..self.letters.len() - 1]))
        }
    }

    pub fn last(&self) -> u8 {
        *self.letters.last().unwrap()
    }

    pub fn concat(&self, other: &MultiIndex) -> MultiIndex {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        MultiIndex::new(letters)
    }
}

impl From<&[u8]> for MultiIndex {
    fn from(letters: &[u8]) -> Self {
        MultiIndex::new(letters)
    }
}

impl<const N: usize> From<[u8; N]> for MultiIndex {
    fn from(letters: [u8; N]) -> Self {
        MultiIndex::new(letters.to_vec())
    }
}

/// Canonical ordering: by weight, then degree, then lexicographic. This is
/// the deterministic order used everywhere words are enumerated or dumped.
impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight()
            .cmp(&other.weight())
            .then(self.degree().cmp(&other.degree()))
            .then_with(|| self.letters.cmp(&other.letters))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Text form: letters joined by dots, e.g. `1.1.0`.
impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl FromStr for MultiIndex {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let letters: Result<Vec<u8>, _> = s.split('.').map(|p| p.trim().parse::<u8>()).collect();
        match letters {
            Ok(l) if !l.is_empty() => Ok(MultiIndex::new(l)),
            _ => Err(alloc::format!("invalid word `{s}`")),
        }
    }
}

fn push_words_of_degree(out: &mut Vec<MultiIndex>, d: u8, degree: usize) {
    let mut letters = alloc::vec![0u8; degree];
    loop {
        out.push(MultiIndex::new(letters.clone()));
        let mut k = degree;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            if letters[k] < d {
                letters[k] += 1;
                break;
            }
            letters[k] = 0;
        }
    }
}

/// All words of degree `1..=max_degree` over `{0,…,d}` in canonical order.
pub fn words_up_to_degree(max_degree: usize, d: u8) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for k in 1..=max_degree {
        push_words_of_degree(&mut out, d, k);
    }
    out.sort();
    out
}

/// The truncation set `A(m)`: all nonempty words with weight `<= m`, in
/// canonical (weight, degree, lex) order.
pub fn enumerate_a(m: usize, d: u8) -> Vec<MultiIndex> {
    // weight <= m forces degree <= m
    let mut out = words_up_to_degree(m, d);
    out.retain(|w| w.weight() <= m);
    out
}

/// The remainder boundary: words outside `A(m)` whose tail (first letter
/// dropped) lies inside `A(m)`; single letters qualify when they are outside
/// `A(m)` (their empty tail is vacuously inside). Every member has weight
/// `m+1` or `m+2`. Enumeration scans degrees up to `max_degree_guard`.
pub fn boundary_set(m: usize, d: u8, max_degree_guard: usize) -> Vec<MultiIndex> {
    let mut out = words_up_to_degree(max_degree_guard, d);
    out.retain(|w| {
        if w.weight() <= m {
            return false;
        }
        match w.tail() {
            None => true,
            Some(tail) => tail.weight() <= m,
        }
    });
    out
}

/// All shuffles of two words, with multiplicity: every interleaving that
/// preserves the relative order of each factor's letters. The product of two
/// iterated integrals equals the sum of integrals over this list (Chen's
/// shuffle identity), which the test suites use as an independent check.
pub fn shuffles(a: &MultiIndex, b: &MultiIndex) -> Vec<MultiIndex> {
    fn rec(a: &[u8], b: &[u8], current: &mut Vec<u8>, out: &mut Vec<MultiIndex>) {
        if a.is_empty() && b.is_empty() {
            out.push(MultiIndex::new(current.clone()));
            return;
        }
        if let Some((&x, rest)) = a.split_first() {
            current.push(x);
            rec(rest, b, current, out);
            current.pop();
        }
        if let Some((&y, rest)) = b.split_first() {
            current.push(y);
            rec(a, rest, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    rec(a.letters(), b.letters(), &mut Vec::new(), &mut out);
    out
}
