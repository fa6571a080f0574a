//! Finite presentations, circular relators and the overlap condition that
//! makes Dehn's algorithm applicable.

mod dehn;
mod random;
mod word;

pub use dehn::{dehn_reduce_once, dehn_solve, DehnSolver, DehnStep, SoundnessWarning};
pub use random::random_presentation;
pub use word::{cyclic_reduce, free_reduce, CyclicWord, Letter, Word};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact non-negative rationals used for overlap ratios and thresholds.
pub type Rational = Ratio<u64>;

/// Formats a rational as `p/q`, always with an explicit denominator.
pub fn format_ratio(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `p/q` or a bare integer.
pub fn parse_ratio(s: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("bad rational `{s}`"));
    let (p, q) = match s.trim().split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s.trim(), "1"),
    };
    let p: u64 = p.parse().map_err(|_| bad())?;
    let q: u64 = q.parse().map_err(|_| bad())?;
    if q == 0 {
        return Err(bad());
    }
    Ok(Rational::new(p, q))
}

/// `<x_1, ..., x_n | r_1, ..., r_m>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    names: Vec<String>,
    relators: Vec<CyclicWord>,
}

#[derive(Serialize, Deserialize)]
struct PresentationFile {
    generators: Vec<String>,
    #[serde(default)]
    relators: Vec<String>,
}

impl Presentation {
    pub fn new(names: Vec<String>, relators: Vec<Word>) -> Result<Self> {
        if names.is_empty() || names.len() > u16::MAX as usize {
            return Err(Error::InvalidParameters("need 1..65535 generators".into()));
        }
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() || n.contains(char::is_whitespace) || n.contains('^') {
                return Err(Error::InvalidParameters(format!("bad generator name `{n}`")));
            }
            if names[..i].contains(n) {
                return Err(Error::InvalidParameters(format!("duplicate generator `{n}`")));
            }
        }
        let rank = names.len() as u16;
        let relators = relators
            .iter()
            .map(|r| {
                if r.max_generator().is_some_and(|g| g >= rank) {
                    return Err(Error::InvalidParameters("relator uses unknown generator".into()));
                }
                cyclic_reduce(r)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Presentation { names, relators })
    }

    /// The free group on the given generator names.
    pub fn free<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        Presentation::new(names.into_iter().map(Into::into).collect(), Vec::new())
    }

    /// Builds a presentation from generator names and relator strings.
    pub fn parse(names: &[&str], relators: &[&str]) -> Result<Self> {
        let names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        let rels = relators
            .iter()
            .map(|r| Word::parse(r, &names))
            .collect::<Result<Vec<_>>>()?;
        Presentation::new(names, rels)
    }

    /// The closed genus-2 surface group `<a,b,c,d | [a,b][c,d]>`.
    pub fn surface_genus2() -> Self {
        Presentation::parse(&["a", "b", "c", "d"], &["a b a^-1 b^-1 c d c^-1 d^-1"])
            .expect("static presentation")
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn generator_names(&self) -> &[String] {
        &self.names
    }

    pub fn relators(&self) -> &[CyclicWord] {
        &self.relators
    }

    pub fn is_free(&self) -> bool {
        self.relators.is_empty()
    }

    pub fn parse_word(&self, s: &str) -> Result<Word> {
        Word::parse(s, &self.names)
    }

    pub fn format_word(&self, w: &Word) -> String {
        w.format(&self.names)
    }

    /// The same generators with `w` appended as an extra relator.
    pub fn with_relator(&self, w: &Word) -> Result<Self> {
        let mut relators = self.relators.clone();
        relators.push(cyclic_reduce(w)?);
        Ok(Presentation {
            names: self.names.clone(),
            relators,
        })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: PresentationFile = serde_json::from_str(s)?;
        let rels = file
            .relators
            .iter()
            .map(|r| Word::parse(r, &file.generators))
            .collect::<Result<Vec<_>>>()?;
        Presentation::new(file.generators, rels)
    }

    pub fn to_json(&self) -> String {
        let file = PresentationFile {
            generators: self.names.clone(),
            relators: self.relators.iter().map(|r| self.format_word(r.word())).collect(),
        };
        serde_json::to_string_pretty(&file).expect("serializable")
    }
}

/// The symmetrized relator set: every relator and its inverse as cyclic
/// words, deduplicated, in presentation order.
#[derive(Clone, Debug)]
pub struct CircularRelators {
    words: Vec<CyclicWord>,
}

impl CircularRelators {
    pub fn words(&self) -> &[CyclicWord] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Every rotation of every circular relator, as `(relator index, offset, word)`.
    pub fn rotations(&self) -> impl Iterator<Item = (usize, usize, Word)> + '_ {
        self.words
            .iter()
            .enumerate()
            .flat_map(|(i, c)| (0..c.len()).map(move |k| (i, k, c.rotation(k))))
    }
}

pub fn circular_relators(p: &Presentation) -> CircularRelators {
    let mut words: Vec<CyclicWord> = Vec::new();
    for r in p.relators() {
        for c in [r.clone(), r.inverse()] {
            if !words.contains(&c) {
                words.push(c);
            }
        }
    }
    CircularRelators { words }
}

/// A common subword of two circular relators at the cited offsets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OverlapWitness {
    pub relator_a: usize,
    pub relator_b: usize,
    pub offset_a: usize,
    pub offset_b: usize,
    pub length: usize,
}

#[derive(Clone, Debug)]
pub struct DehnReport {
    pub passes: bool,
    pub lambda: Rational,
    pub max_overlap_ratio: Rational,
    /// Circular relators the witness indices refer to.
    pub circular: Vec<CyclicWord>,
    /// One witness per relator pair attaining `max_overlap_ratio`.
    pub witnesses: Vec<OverlapWitness>,
}

impl DehnReport {
    /// Re-extracts both subwords of a witness.
    pub fn witness_subwords(&self, w: &OverlapWitness) -> (Word, Word) {
        let a = &self.circular[w.relator_a];
        let b = &self.circular[w.relator_b];
        (
            a.rotation(w.offset_a).slice(0, w.length),
            b.rotation(w.offset_b).slice(0, w.length),
        )
    }

    pub fn to_json(&self, p: &Presentation) -> serde_json::Value {
        serde_json::json!({
            "passes": self.passes,
            "lambda": format_ratio(&self.lambda),
            "max_overlap_ratio": format_ratio(&self.max_overlap_ratio),
            "circular_relators": self
                .circular
                .iter()
                .map(|c| p.format_word(c.word()))
                .collect::<Vec<_>>(),
            "witnesses": self.witnesses,
        })
    }
}

/// Longest common subwords between circular relators, relative to the
/// shorter relator involved. Self-overlaps at distinct offsets count, and a
/// subword may not be the whole relator it is compared against itself with.
pub fn check_dehn_condition(p: &Presentation, lambda: Rational) -> Result<DehnReport> {
    if lambda == Rational::from_integer(0) || lambda > Rational::from_integer(1) {
        return Err(Error::InvalidParameters("lambda must lie in (0, 1]".into()));
    }
    let circ = circular_relators(p);
    let words = circ.words();
    let mut max_ratio = Rational::from_integer(0);
    let mut witnesses: Vec<(Rational, OverlapWitness)> = Vec::new();
    for i in 0..words.len() {
        for j in i..words.len() {
            if let Some((ratio, wit)) = best_overlap(words, i, j) {
                if ratio > max_ratio {
                    max_ratio = ratio;
                }
                witnesses.push((ratio, wit));
            }
        }
    }
    let witnesses = witnesses
        .into_iter()
        .filter(|(r, _)| *r == max_ratio)
        .map(|(_, w)| w)
        .collect();
    Ok(DehnReport {
        passes: max_ratio < lambda,
        lambda,
        max_overlap_ratio: max_ratio,
        circular: words.to_vec(),
        witnesses,
    })
}

fn best_overlap(words: &[CyclicWord], i: usize, j: usize) -> Option<(Rational, OverlapWitness)> {
    let (a, b) = (&words[i], &words[j]);
    let (la, lb) = (a.len(), b.len());
    let cap = if i == j { la - 1 } else { la.min(lb) };
    let mut best: Option<OverlapWitness> = None;
    for oa in 0..la {
        let ob_start = if i == j { oa + 1 } else { 0 };
        for ob in ob_start..lb {
            let mut len = 0;
            while len < cap && a.at(oa + len) == b.at(ob + len) {
                len += 1;
            }
            if len > 0 && best.as_ref().is_none_or(|w| len > w.length) {
                best = Some(OverlapWitness {
                    relator_a: i,
                    relator_b: j,
                    offset_a: oa,
                    offset_b: ob,
                    length: len,
                });
            }
        }
    }
    best.map(|w| (Rational::new(w.length as u64, la.min(lb) as u64), w))
}
