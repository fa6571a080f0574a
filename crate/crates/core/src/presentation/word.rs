//! Words over a finite generating set and their inverses.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// A generator or the inverse of a generator.
///
/// The derived ordering is the one used for shortlex comparisons:
/// `a < a^-1 < b < b^-1 < ...`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub generator: u16,
    pub inverse: bool,
}

impl Letter {
    pub const fn new(generator: u16, inverse: bool) -> Self {
        Letter { generator, inverse }
    }

    pub const fn pos(generator: u16) -> Self {
        Letter::new(generator, false)
    }

    pub const fn neg(generator: u16) -> Self {
        Letter::new(generator, true)
    }

    pub const fn inv(self) -> Self {
        Letter::new(self.generator, !self.inverse)
    }

    pub fn cancels(self, other: Letter) -> bool {
        self.generator == other.generator && self.inverse != other.inverse
    }

    /// +1 or -1.
    pub fn sign(self) -> i8 {
        if self.inverse {
            -1
        } else {
            1
        }
    }
}

/// A finite sequence of letters. Not necessarily reduced.
///
/// Words compare in shortlex order: shorter words first, then
/// lexicographically by [`Letter`] order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letter(l: Letter) -> Self {
        Word(vec![l])
    }

    /// `g^n` for a generator index `g` and any integer exponent.
    pub fn power(generator: u16, exponent: i64) -> Self {
        let l = Letter::new(generator, exponent < 0);
        Word(vec![l; exponent.unsigned_abs() as usize])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    /// Largest generator index used, if any.
    pub fn max_generator(&self) -> Option<u16> {
        self.0.iter().map(|l| l.generator).max()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    /// Plain concatenation, no cancellation.
    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Freely reduced product.
    pub fn mul(&self, other: &Word) -> Word {
        let mut out = self.free_reduce();
        for &l in other.letters() {
            push_reduced(&mut out.0, l);
        }
        out
    }

    pub fn push(&mut self, l: Letter) {
        self.0.push(l);
    }

    pub fn free_reduce(&self) -> Word {
        let mut out = Vec::with_capacity(self.len());
        for &l in &self.0 {
            push_reduced(&mut out, l);
        }
        Word(out)
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|p| !p[0].cancels(p[1]))
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.is_reduced()
            && match (self.first(), self.last()) {
                (Some(f), Some(l)) => self.len() == 1 || !f.cancels(l),
                _ => true,
            }
    }

    /// Cyclic rotation starting at `offset`.
    pub fn rotate(&self, offset: usize) -> Word {
        if self.is_empty() {
            return Word::empty();
        }
        let k = offset % self.len();
        let mut v = Vec::with_capacity(self.len());
        v.extend_from_slice(&self.0[k..]);
        v.extend_from_slice(&self.0[..k]);
        Word(v)
    }

    pub fn slice(&self, start: usize, end: usize) -> Word {
        Word(self.0[start..end].to_vec())
    }

    /// Renders the word with the given generator names, e.g. `a b^-1`.
    /// The empty word renders as the empty string.
    pub fn format(&self, names: &[String]) -> String {
        let mut out = String::new();
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            match names.get(l.generator as usize) {
                Some(n) => out.push_str(n),
                None => out.push_str(&format!("x{}", l.generator)),
            }
            if l.inverse {
                out.push_str("^-1");
            }
        }
        out
    }

    /// Parses space-separated tokens `g`, `g^-1` or `g^k` over `names`.
    /// An empty string, `1` or `e` denotes the empty word.
    pub fn parse(s: &str, names: &[String]) -> Result<Word> {
        let mut letters = Vec::new();
        for tok in s.split_whitespace() {
            if tok == "1" || tok == "e" && !names.iter().any(|n| n == "e") {
                continue;
            }
            let (name, exp) = match tok.split_once('^') {
                Some((n, e)) => {
                    let e: i64 = e
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad exponent in `{tok}`")))?;
                    (n, e)
                }
                None => (tok, 1),
            };
            let g = names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::Parse(format!("unknown generator `{name}`")))?;
            letters.extend(Word::power(g as u16, exp).0);
        }
        Ok(Word(letters))
    }
}

fn push_reduced(out: &mut Vec<Letter>, l: Letter) {
    match out.last() {
        Some(&top) if top.cancels(l) => {
            out.pop();
        }
        _ => out.push(l),
    }
}

impl From<Vec<Letter>> for Word {
    fn from(v: Vec<Letter>) -> Self {
        Word(v)
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    /// Default rendering with generators `x0, x1, ...`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("ε");
        }
        f.write_str(&self.format(&[]))
    }
}

/// The unique freely reduced word freely equal to `w`.
pub fn free_reduce(w: &Word) -> Word {
    w.free_reduce()
}

/// A cyclically reduced word up to rotation, stored as its shortlex-least
/// rotation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CyclicWord(Word);

impl CyclicWord {
    pub fn word(&self) -> &Word {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> CyclicWord {
        CyclicWord(least_rotation(&self.0.inverse()))
    }

    pub fn rotation(&self, offset: usize) -> Word {
        self.0.rotate(offset)
    }

    /// Letter at a cyclic position.
    pub fn at(&self, i: usize) -> Letter {
        self.0 .0[i % self.len()]
    }
}

/// Freely and cyclically reduces `w`, returning its canonical rotation.
pub fn cyclic_reduce(w: &Word) -> Result<CyclicWord> {
    let r = w.free_reduce();
    let letters = r.letters();
    let (mut lo, mut hi) = (0, letters.len());
    while hi - lo >= 2 && letters[lo].cancels(letters[hi - 1]) {
        lo += 1;
        hi -= 1;
    }
    if lo == hi {
        return Err(Error::EmptyAfterReduction);
    }
    Ok(CyclicWord(least_rotation(&Word(letters[lo..hi].to_vec()))))
}

fn least_rotation(w: &Word) -> Word {
    let n = w.len();
    let letters = w.letters();
    let mut best = 0;
    for k in 1..n {
        let cand = letters[k..].iter().chain(&letters[..k]);
        let cur = letters[best..].iter().chain(&letters[..best]);
        if cand.cmp(cur) == Ordering::Less {
            best = k;
        }
    }
    w.rotate(best)
}
