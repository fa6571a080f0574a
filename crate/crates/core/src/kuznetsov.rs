//! Kuznetsov's procedure: in a finitely presented simple group, `w = 1`
//! exactly when adding `w` as a relator leaves the group nontrivial. Two
//! consequence enumerations run side by side, one looking for `w` among the
//! consequences of the relators, the other for every generator among the
//! consequences of the relators plus `w`.
//!
//! Simplicity of the presentation is assumed, not checked.

use std::collections::{HashMap, HashSet};
use std::sync::mpsc::{sync_channel, Receiver};
use std::thread;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::presentation::{Letter, Presentation, Word};

/// Default number of words each enumeration may emit.
pub const DEFAULT_BUDGET: usize = 2_000;

/// `conjugator * relator^exponent * conjugator^-1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factor {
    pub conjugator: Word,
    pub relator: usize,
    pub exponent: i8,
}

impl Factor {
    pub fn word(&self, relators: &[Word]) -> Word {
        let r = &relators[self.relator];
        let r = if self.exponent < 0 { r.inverse() } else { r.clone() };
        self.conjugator.mul(&r).mul(&self.conjugator.inverse())
    }
}

/// Free reduction of the product of the factors, left to right.
pub fn replay(factors: &[Factor], relators: &[Word]) -> Word {
    factors
        .iter()
        .fold(Word::empty(), |acc, f| acc.mul(&f.word(relators)))
}

/// Conjugates of relators and their inverses by reduced words, ordered by
/// conjugator length, then conjugator (shortlex), relator, sign; repeated
/// values dropped.
struct Conjugates {
    relators: Vec<Word>,
    rank: u16,
    values: Vec<(Word, Factor)>,
    seen: HashSet<Word>,
    /// `upto[l]` = number of values with conjugator length at most `l`.
    upto: Vec<usize>,
    frontier: Vec<Word>,
}

impl Conjugates {
    fn new(relators: Vec<Word>, rank: usize) -> Self {
        Conjugates {
            relators,
            rank: rank as u16,
            values: Vec::new(),
            seen: HashSet::new(),
            upto: Vec::new(),
            frontier: vec![Word::empty()],
        }
    }

    fn upto(&mut self, l: usize) -> usize {
        while self.upto.len() <= l {
            if !self.upto.is_empty() {
                let mut next = Vec::new();
                for u in &self.frontier {
                    for g in 0..self.rank {
                        for inv in [false, true] {
                            let x = Letter::new(g, inv);
                            if u.last().is_some_and(|y| y.cancels(x)) {
                                continue;
                            }
                            let mut v = u.clone();
                            v.push(x);
                            next.push(v);
                        }
                    }
                }
                self.frontier = next;
            }
            for u in &self.frontier {
                for relator in 0..self.relators.len() {
                    for exponent in [1, -1] {
                        let f = Factor {
                            conjugator: u.clone(),
                            relator,
                            exponent,
                        };
                        let v = f.word(&self.relators);
                        if self.seen.insert(v.clone()) {
                            self.values.push((v, f));
                        }
                    }
                }
            }
            self.upto.push(self.values.len());
        }
        self.upto[l]
    }
}

struct Node {
    word: Word,
    parent: u32,
    factor: u32,
}

/// Distinct nonempty products of conjugates of relators.
///
/// `S(l, k)` is the set of products of `k` conjugates with conjugators of
/// length at most `l`, built as `S(l, k-1)` times single conjugates. Cells
/// are visited along anti-diagonals `l + k = s`, `l` ascending; each word
/// is emitted the first time it is produced.
pub struct ConsequenceStream {
    conj: Conjugates,
    nodes: Vec<Node>,
    index: HashMap<Word, u32>,
    prev: Vec<Vec<u32>>,
    cur: Vec<Vec<u32>>,
    cell: Vec<u32>,
    cell_seen: HashSet<u32>,
    s: usize,
    l: usize,
    i: usize,
    j: usize,
    emitted: usize,
    budget: usize,
}

const ROOT: u32 = 0;

impl ConsequenceStream {
    pub fn new(p: &Presentation, budget: usize) -> Self {
        let relators = p.relators().iter().map(|r| r.word().clone()).collect();
        Self::from_relators(relators, p.rank(), budget)
    }

    fn from_relators(relators: Vec<Word>, rank: usize, budget: usize) -> Self {
        ConsequenceStream {
            conj: Conjugates::new(relators, rank),
            nodes: vec![Node {
                word: Word::empty(),
                parent: ROOT,
                factor: 0,
            }],
            index: HashMap::from([(Word::empty(), ROOT)]),
            prev: Vec::new(),
            cur: Vec::new(),
            cell: Vec::new(),
            cell_seen: HashSet::new(),
            s: 1,
            l: 0,
            i: 0,
            j: 0,
            emitted: 0,
            budget,
        }
    }

    pub fn relators(&self) -> &[Word] {
        &self.conj.relators
    }

    pub fn emitted(&self) -> usize {
        self.emitted
    }

    pub fn word(&self, id: u32) -> &Word {
        &self.nodes[id as usize].word
    }

    /// Factors whose product freely reduces to the word `id`.
    pub fn certificate(&self, id: u32) -> Vec<Factor> {
        let mut out = Vec::new();
        let mut at = id;
        while at != ROOT {
            let n = &self.nodes[at as usize];
            out.push(self.conj.values[n.factor as usize].1.clone());
            at = n.parent;
        }
        out.reverse();
        out
    }

    /// Id of the next new word, or `None` once the budget is spent.
    pub fn next_id(&mut self) -> Option<u32> {
        if self.conj.relators.is_empty() {
            return None;
        }
        while self.emitted < self.budget {
            let k = self.s - self.l;
            let n_conj = self.conj.upto(self.l);
            let src_len = if k == 1 { 1 } else { self.prev[self.l].len() };
            if self.i == src_len {
                self.cur.push(std::mem::take(&mut self.cell));
                self.cell_seen.clear();
                self.i = 0;
                self.j = 0;
                self.l += 1;
                if self.l == self.s {
                    self.prev = std::mem::take(&mut self.cur);
                    self.s += 1;
                    self.l = 0;
                }
                continue;
            }
            let base = if k == 1 { ROOT } else { self.prev[self.l][self.i] };
            let factor = self.j as u32;
            self.j += 1;
            if self.j == n_conj {
                self.j = 0;
                self.i += 1;
            }
            let w = self.nodes[base as usize]
                .word
                .mul(&self.conj.values[factor as usize].0);
            match self.index.get(&w) {
                Some(&id) => {
                    if self.cell_seen.insert(id) {
                        self.cell.push(id);
                    }
                }
                None => {
                    let id = self.nodes.len() as u32;
                    self.index.insert(w.clone(), id);
                    self.nodes.push(Node {
                        word: w,
                        parent: base,
                        factor,
                    });
                    self.cell_seen.insert(id);
                    self.cell.push(id);
                    self.emitted += 1;
                    return Some(id);
                }
            }
        }
        None
    }
}

impl Iterator for ConsequenceStream {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        self.next_id().map(|id| self.word(id).clone())
    }
}

/// The first `budget` words of [`ConsequenceStream`].
pub fn enumerate_consequences(p: &Presentation, budget: usize) -> Vec<Word> {
    ConsequenceStream::new(p, budget).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Identity,
    NotIdentity,
    BudgetExceeded,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Identity => "Identity",
            Outcome::NotIdentity => "NotIdentity",
            Outcome::BudgetExceeded => "BudgetExceeded",
        }
    }
}

/// One generator of `H`, found as itself or its inverse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorDerivation {
    pub found: Letter,
    pub factors: Vec<Factor>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certificate {
    None,
    /// Over the relators of `G`.
    Identity(Vec<Factor>),
    /// Over the relators of `G` followed by `w`.
    NotIdentity(Vec<GeneratorDerivation>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub outcome: Outcome,
    /// Words emitted by both enumerations together.
    pub steps: usize,
    pub certificate: Certificate,
    /// Relators the certificate indexes into.
    pub relators: Vec<Word>,
}

impl Verdict {
    pub fn to_json(&self, p: &Presentation) -> Value {
        let factor = |f: &Factor| {
            json!({
                "conjugator": p.format_word(&f.conjugator),
                "relator": p.format_word(&self.relators[f.relator]),
                "exponent": f.exponent,
            })
        };
        let certificate = match &self.certificate {
            Certificate::None => Value::Null,
            Certificate::Identity(fs) => fs.iter().map(factor).collect(),
            Certificate::NotIdentity(ds) => ds
                .iter()
                .map(|d| {
                    json!({
                        "generator": p.generator_names()[d.found.generator as usize],
                        "word": p.format_word(&Word::letter(d.found)),
                        "product": d.factors.iter().map(factor).collect::<Vec<_>>(),
                    })
                })
                .collect(),
        };
        json!({
            "verdict": self.outcome.as_str(),
            "steps": self.steps,
            "certificate": certificate,
            "assumption": "presentation defines a simple group",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Single thread, strict alternation.
    Interleaved,
    /// One thread per enumeration, merged in the same alternation.
    TwoWorkers,
}

enum Event {
    Miss,
    Found(Certificate),
}

/// Looks for `target` among the consequences.
struct Search {
    stream: ConsequenceStream,
    target: Word,
}

impl Iterator for Search {
    type Item = Event;

    fn next(&mut self) -> Option<Event> {
        let id = self.stream.next_id()?;
        Some(if *self.stream.word(id) == self.target {
            Event::Found(Certificate::Identity(self.stream.certificate(id)))
        } else {
            Event::Miss
        })
    }
}

/// Looks for every generator, or its inverse, among the consequences.
struct Collapse {
    stream: ConsequenceStream,
    found: Vec<Option<GeneratorDerivation>>,
}

impl Iterator for Collapse {
    type Item = Event;

    fn next(&mut self) -> Option<Event> {
        let id = self.stream.next_id()?;
        let w = self.stream.word(id);
        if let [x] = w.letters() {
            let slot = &mut self.found[x.generator as usize];
            if slot.is_none() {
                *slot = Some(GeneratorDerivation {
                    found: *x,
                    factors: self.stream.certificate(id),
                });
                if self.found.iter().all(Option::is_some) {
                    let all = self.found.iter().flatten().cloned().collect();
                    return Some(Event::Found(Certificate::NotIdentity(all)));
                }
            }
        }
        Some(Event::Miss)
    }
}

/// Budgeted semidecision of `w = 1` in the group presented by `p`, which is
/// assumed simple. Each enumeration may emit `budget` words.
pub fn kuznetsov_decide(p: &Presentation, w: &Word, budget: usize) -> Result<Verdict> {
    kuznetsov_decide_with(p, w, budget, Mode::Interleaved)
}

pub fn kuznetsov_decide_with(p: &Presentation, w: &Word, budget: usize, mode: Mode) -> Result<Verdict> {
    if budget == 0 {
        return Err(Error::InvalidParameters("budget must be at least 1".into()));
    }
    let target = w.free_reduce();
    let g_relators: Vec<Word> = p.relators().iter().map(|r| r.word().clone()).collect();
    if target.is_empty() {
        return Ok(Verdict {
            outcome: Outcome::Identity,
            steps: 0,
            certificate: Certificate::Identity(Vec::new()),
            relators: g_relators,
        });
    }
    let h = p.with_relator(&target)?;
    let h_relators: Vec<Word> = h.relators().iter().map(|r| r.word().clone()).collect();
    let search = Search {
        stream: ConsequenceStream::new(p, budget),
        target,
    };
    let collapse = Collapse {
        stream: ConsequenceStream::new(&h, budget),
        found: vec![None; p.rank()],
    };
    let (outcome, steps, certificate) = match mode {
        Mode::Interleaved => alternate(search, collapse),
        Mode::TwoWorkers => thread::scope(|scope| {
            let (g_rx, h_rx) = (spawn_worker(scope, search), spawn_worker(scope, collapse));
            alternate(g_rx.into_iter(), h_rx.into_iter())
        }),
    };
    let relators = if outcome == Outcome::NotIdentity {
        h_relators
    } else {
        g_relators
    };
    Ok(Verdict {
        outcome,
        steps,
        certificate,
        relators,
    })
}

fn spawn_worker<'s, I>(scope: &'s thread::Scope<'s, '_>, events: I) -> Receiver<Event>
where
    I: Iterator<Item = Event> + Send + 's,
{
    let (tx, rx) = sync_channel(256);
    scope.spawn(move || {
        for e in events {
            if tx.send(e).is_err() {
                break;
            }
        }
    });
    rx
}

/// One event from each side in turn, `G` first; an exhausted side is skipped.
fn alternate(mut g: impl Iterator<Item = Event>, mut h: impl Iterator<Item = Event>) -> (Outcome, usize, Certificate) {
    let mut steps = 0;
    let (mut g_live, mut h_live) = (true, true);
    while g_live || h_live {
        if g_live {
            match g.next() {
                Some(e) => {
                    steps += 1;
                    if let Event::Found(c) = e {
                        return (Outcome::Identity, steps, c);
                    }
                }
                None => g_live = false,
            }
        }
        if h_live {
            match h.next() {
                Some(e) => {
                    steps += 1;
                    if let Event::Found(c) = e {
                        return (Outcome::NotIdentity, steps, c);
                    }
                }
                None => h_live = false,
            }
        }
    }
    (Outcome::BudgetExceeded, steps, Certificate::None)
}
