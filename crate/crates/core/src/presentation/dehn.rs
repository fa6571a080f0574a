//! Dehn's algorithm.
//!
//! A reduction step looks for a subword that is strictly more than half of
//! some circular relator and replaces it by the inverse of the complementary
//! part. Matches are searched by end position, rightmost first; at a given end
//! position longer relators are tried first (ties in presentation order) and
//! the longest match for the first relator that qualifies is taken.

use serde::Serialize;

use super::word::{CyclicWord, Letter, Word};
use super::{check_dehn_condition, circular_relators, format_ratio, Presentation, Rational};
use crate::error::{Error, Result};

/// Emitted when a presentation passes the half-overlap check but not the
/// classical one-sixth condition, so negative answers are not guaranteed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SoundnessWarning {
    pub code: &'static str,
    pub max_overlap_ratio: String,
    pub required_below: String,
}

/// One rewrite in a Dehn trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DehnStep {
    /// Subword `removed` at `start` replaced by `inserted`.
    Replace {
        start: usize,
        removed: Word,
        inserted: Word,
        result: Word,
    },
    /// Adjacent inverse pair at `position` deleted.
    Cancel { position: usize, result: Word },
}

impl DehnStep {
    pub fn result(&self) -> &Word {
        match self {
            DehnStep::Replace { result, .. } | DehnStep::Cancel { result, .. } => result,
        }
    }
}

/// Precomputed relator data for repeated word-problem queries.
#[derive(Clone, Debug)]
pub struct DehnSolver {
    /// Circular relators, longest first, ties in presentation order.
    relators: Vec<CyclicWord>,
    warning: Option<SoundnessWarning>,
    max_overlap_ratio: Rational,
}

impl DehnSolver {
    /// Fails with `NotDehnPresentation` unless every overlap is below one half.
    pub fn new(p: &Presentation) -> Result<Self> {
        let half = check_dehn_condition(p, Rational::new(1, 2))?;
        if !half.passes {
            return Err(Error::NotDehnPresentation {
                ratio: format_ratio(&half.max_overlap_ratio),
                lambda: "1/2".into(),
            });
        }
        let sixth = Rational::new(1, 6);
        let warning = (half.max_overlap_ratio >= sixth).then(|| SoundnessWarning {
            code: "C'(1/6) not satisfied",
            max_overlap_ratio: format_ratio(&half.max_overlap_ratio),
            required_below: format_ratio(&sixth),
        });
        Ok(Self::from_parts(p, warning, half.max_overlap_ratio))
    }

    /// Skips the overlap check. Callers take responsibility for soundness.
    pub fn unchecked(p: &Presentation) -> Self {
        Self::from_parts(p, None, Rational::from_integer(0))
    }

    fn from_parts(p: &Presentation, warning: Option<SoundnessWarning>, ratio: Rational) -> Self {
        let mut relators = circular_relators(p).words().to_vec();
        // stable: presentation order survives among equal lengths
        relators.sort_by_key(|r| std::cmp::Reverse(r.len()));
        DehnSolver {
            relators,
            warning,
            max_overlap_ratio: ratio,
        }
    }

    pub fn warning(&self) -> Option<&SoundnessWarning> {
        self.warning.as_ref()
    }

    pub fn max_overlap_ratio(&self) -> Rational {
        self.max_overlap_ratio
    }

    /// One step: a free cancellation if `w` is not reduced, otherwise a
    /// relator replacement followed by free reduction.
    pub fn reduce_once(&self, w: &Word) -> Option<Word> {
        if !w.is_reduced() {
            return Some(w.free_reduce());
        }
        self.replacement(w).map(|(_, _, _, out)| out.free_reduce())
    }

    /// Runs to a fixed point; true iff the word collapses to the empty word.
    pub fn solve(&self, w: &Word) -> bool {
        let mut cur = w.free_reduce();
        while let Some(next) = self.reduce_once(&cur) {
            debug_assert!(next.len() < cur.len());
            cur = next;
        }
        cur.is_empty()
    }

    /// Every rewrite, one cancellation or replacement at a time.
    pub fn trace(&self, w: &Word) -> Vec<DehnStep> {
        let mut steps = Vec::new();
        let mut cur = w.clone();
        loop {
            let letters = cur.letters();
            if let Some(pos) = letters.windows(2).position(|p| p[0].cancels(p[1])) {
                let mut v = letters.to_vec();
                v.drain(pos..pos + 2);
                cur = Word::new(v);
                steps.push(DehnStep::Cancel {
                    position: pos,
                    result: cur.clone(),
                });
                continue;
            }
            match self.replacement(&cur) {
                Some((start, removed, inserted, result)) => {
                    cur = result.clone();
                    steps.push(DehnStep::Replace {
                        start,
                        removed,
                        inserted,
                        result,
                    });
                }
                None => return steps,
            }
        }
    }

    /// Finds the replacement and returns `(start, removed, inserted, result)`
    /// with `result` not yet freely reduced.
    fn replacement(&self, w: &Word) -> Option<(usize, Word, Word, Word)> {
        let letters = w.letters();
        for end in (1..=letters.len()).rev() {
            for rel in &self.relators {
                let n = rel.len();
                let mut best: Option<(usize, usize)> = None; // (length, last index in relator)
                for q in 0..n {
                    let m = backward_match(letters, end, rel, q);
                    if 2 * m > n && best.is_none_or(|(bm, _)| m > bm) {
                        best = Some((m, q));
                    }
                }
                if let Some((m, q)) = best {
                    let start = end - m;
                    let offset = (q + n + 1 - m) % n;
                    let rot = rel.rotation(offset);
                    let removed = rot.slice(0, m);
                    let inserted = rot.slice(m, n).inverse();
                    let mut out: Vec<Letter> = letters[..start].to_vec();
                    out.extend_from_slice(inserted.letters());
                    out.extend_from_slice(&letters[end..]);
                    return Some((start, removed, inserted, Word::new(out)));
                }
            }
        }
        None
    }
}

/// Length of the longest subword of `w` ending just before `end` that reads
/// backwards around `rel` from position `q`, capped at the relator length.
fn backward_match(w: &[Letter], end: usize, rel: &CyclicWord, q: usize) -> usize {
    let n = rel.len();
    let mut m = 0;
    while m < n && m < end && w[end - 1 - m] == rel.at(q + n - m) {
        m += 1;
    }
    m
}

/// One Dehn step against the given circular relators; see [`DehnSolver::reduce_once`].
pub fn dehn_reduce_once(w: &Word, p: &Presentation) -> Option<Word> {
    DehnSolver::unchecked(p).reduce_once(w)
}

/// Dehn's algorithm. Errors with `NotDehnPresentation` if the presentation
/// fails the half-overlap check.
pub fn dehn_solve(w: &Word, p: &Presentation) -> Result<bool> {
    Ok(DehnSolver::new(p)?.solve(w))
}
