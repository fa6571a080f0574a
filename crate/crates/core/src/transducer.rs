//! Asynchronous finite-state transducers over a `d`-letter alphabet, read as
//! maps of Cantor space.
//!
//! Composition is left to right: `compose(f, g)` applies `f` first.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reachable product states allowed in [`compose`].
pub const COMPOSE_CAP: usize = 10_000;
/// Default number of machines [`nucleus`] may collect.
pub const NUCLEUS_BUDGET: usize = 64;

/// `delta[state][letter] = (output, next state)`.
type Delta = Vec<Vec<(Vec<u8>, usize)>>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transducer {
    d: usize,
    names: Vec<String>,
    initial: usize,
    delta: Delta,
}

/// A state of a transducer, standing for the local action it induces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LocalActionId {
    pub state: usize,
}

/// States visited by infinitely many prefixes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CoreSet {
    pub states: BTreeSet<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoundaryEquality {
    Equal,
    /// Outputs on `witness` disagree.
    NotEqual { witness: Vec<u8> },
    UnknownAtDepth { depth: usize },
}

#[derive(Clone, Debug)]
pub enum NucleusResult {
    /// Minimized machines, sorted by canonical form.
    Nucleus(Vec<Transducer>),
    BudgetExceeded { collected: usize },
}

impl Transducer {
    /// Validates the table and drops states unreachable from `initial`.
    pub fn new(d: usize, names: Vec<String>, initial: usize, delta: Delta) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidTransducer(format!("alphabet size {d} < 2")));
        }
        let n = delta.len();
        if names.len() != n || n == 0 {
            return Err(Error::InvalidTransducer("state list does not match transition table".into()));
        }
        if initial >= n {
            return Err(Error::InvalidTransducer("initial state out of range".into()));
        }
        for (s, row) in delta.iter().enumerate() {
            if row.len() != d {
                return Err(Error::InvalidTransducer(format!(
                    "state `{}` has {} transitions, expected {d}",
                    names[s],
                    row.len()
                )));
            }
            for (out, next) in row {
                if *next >= n || out.iter().any(|&x| x as usize >= d) {
                    return Err(Error::InvalidTransducer(format!("bad transition out of `{}`", names[s])));
                }
            }
        }
        Ok(Transducer { d, names, initial, delta }.pruned())
    }

    pub fn identity(d: usize) -> Self {
        let row = (0..d as u8).map(|x| (vec![x], 0)).collect();
        Transducer {
            d,
            names: vec!["e".into()],
            initial: 0,
            delta: vec![row],
        }
    }

    fn pruned(self) -> Self {
        let mut order = vec![usize::MAX; self.delta.len()];
        let mut seen = vec![false; self.delta.len()];
        seen[self.initial] = true;
        let mut stack = vec![self.initial];
        while let Some(s) = stack.pop() {
            for (_, t) in &self.delta[s] {
                if !seen[*t] {
                    seen[*t] = true;
                    stack.push(*t);
                }
            }
        }
        let mut k = 0;
        for s in 0..seen.len() {
            if seen[s] {
                order[s] = k;
                k += 1;
            }
        }
        if k == self.delta.len() {
            return self;
        }
        let mut names = Vec::with_capacity(k);
        let mut delta = Vec::with_capacity(k);
        for s in 0..seen.len() {
            if seen[s] {
                names.push(self.names[s].clone());
                delta.push(
                    self.delta[s]
                        .iter()
                        .map(|(o, t)| (o.clone(), order[*t]))
                        .collect(),
                );
            }
        }
        Transducer {
            d: self.d,
            names,
            initial: order[self.initial],
            delta,
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn state_count(&self) -> usize {
        self.delta.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn transition(&self, state: usize, letter: u8) -> (&[u8], usize) {
        let (o, t) = &self.delta[state][letter as usize];
        (o, *t)
    }

    pub fn max_output_len(&self) -> usize {
        self.delta.iter().flatten().map(|(o, _)| o.len()).max().unwrap_or(0)
    }

    pub fn run(&self, input: &[u8]) -> Vec<u8> {
        self.run_from(self.initial, input).0
    }

    /// Output and final state when reading `input` from `state`.
    pub fn run_from(&self, state: usize, input: &[u8]) -> (Vec<u8>, usize) {
        let mut out = Vec::with_capacity(input.len());
        let mut s = state;
        for &x in input {
            let (o, t) = &self.delta[s][x as usize];
            out.extend_from_slice(o);
            s = *t;
        }
        (out, s)
    }

    pub fn local_action(&self, prefix: &[u8]) -> LocalActionId {
        LocalActionId {
            state: self.run_from(self.initial, prefix).1,
        }
    }

    /// The same table started elsewhere, pruned to what that state reaches.
    pub fn with_initial(&self, state: usize) -> Transducer {
        Transducer {
            initial: state,
            ..self.clone()
        }
        .pruned()
    }

    pub fn is_synchronous(&self) -> bool {
        self.delta.iter().flatten().all(|(o, _)| o.len() == 1)
    }

    /// Bisimulation quotient with states numbered in BFS order from the
    /// initial state. Names are taken from the lowest-numbered original state
    /// of each class.
    pub fn minimize(&self) -> Result<Transducer> {
        if !self.is_synchronous() {
            return Err(Error::NotSynchronous);
        }
        let n = self.state_count();
        let mut class: Vec<usize> = {
            let mut ids: HashMap<Vec<u8>, usize> = HashMap::new();
            (0..n)
                .map(|s| {
                    let sig: Vec<u8> = self.delta[s].iter().map(|(o, _)| o[0]).collect();
                    let k = ids.len();
                    *ids.entry(sig).or_insert(k)
                })
                .collect()
        };
        let mut count = class.iter().max().map_or(0, |m| m + 1);
        loop {
            let mut ids: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
            let next: Vec<usize> = (0..n)
                .map(|s| {
                    let sig = self.delta[s].iter().map(|(_, t)| class[*t]).collect();
                    let k = ids.len();
                    *ids.entry((class[s], sig)).or_insert(k)
                })
                .collect();
            let c = ids.len();
            class = next;
            if c == count {
                break;
            }
            count = c;
        }
        let mut rep = vec![usize::MAX; count];
        for s in 0..n {
            if rep[class[s]] == usize::MAX {
                rep[class[s]] = s;
            }
        }
        // BFS numbering from the initial class
        let mut number = vec![usize::MAX; count];
        let mut queue = VecDeque::from([class[self.initial]]);
        number[class[self.initial]] = 0;
        let mut order = vec![class[self.initial]];
        while let Some(c) = queue.pop_front() {
            for (_, t) in &self.delta[rep[c]] {
                let tc = class[*t];
                if number[tc] == usize::MAX {
                    number[tc] = order.len();
                    order.push(tc);
                    queue.push_back(tc);
                }
            }
        }
        let names = order.iter().map(|&c| self.names[rep[c]].clone()).collect();
        let delta = order
            .iter()
            .map(|&c| {
                self.delta[rep[c]]
                    .iter()
                    .map(|(o, t)| (o.clone(), number[class[*t]]))
                    .collect()
            })
            .collect();
        Ok(Transducer {
            d: self.d,
            names,
            initial: 0,
            delta,
        })
    }

    /// Transition table without names, for comparing minimized machines.
    pub fn canonical_key(&self) -> (usize, Delta) {
        (self.initial, self.delta.clone())
    }

    /// Inverse of a synchronous machine whose states permute letters.
    pub fn inverse(&self) -> Result<Transducer> {
        if !self.is_synchronous() {
            return Err(Error::NotSynchronous);
        }
        let mut delta = Vec::with_capacity(self.state_count());
        for (s, row) in self.delta.iter().enumerate() {
            let mut inv = vec![None; self.d];
            for (x, (o, t)) in row.iter().enumerate() {
                let slot = &mut inv[o[0] as usize];
                if slot.is_some() {
                    return Err(Error::NotInvertible(self.names[s].clone()));
                }
                *slot = Some((vec![x as u8], *t));
            }
            delta.push(inv.into_iter().map(Option::unwrap).collect());
        }
        Ok(Transducer {
            d: self.d,
            names: self.names.iter().map(|n| invert_name(n)).collect(),
            initial: self.initial,
            delta,
        })
    }

    /// States on a directed cycle, and everything they reach.
    pub fn core(&self) -> CoreSet {
        let n = self.state_count();
        let mut on_cycle = vec![false; n];
        for s in 0..n {
            let mut seen = vec![false; n];
            let mut stack: Vec<usize> = self.delta[s].iter().map(|(_, t)| *t).collect();
            while let Some(u) = stack.pop() {
                if u == s {
                    on_cycle[s] = true;
                    break;
                }
                if !seen[u] {
                    seen[u] = true;
                    stack.extend(self.delta[u].iter().map(|(_, t)| *t));
                }
            }
        }
        let mut states = BTreeSet::new();
        let mut stack: Vec<usize> = (0..n).filter(|&s| on_cycle[s]).collect();
        while let Some(u) = stack.pop() {
            if states.insert(u) {
                stack.extend(self.delta[u].iter().map(|(_, t)| *t));
            }
        }
        CoreSet { states }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let delta: BTreeMap<&str, BTreeMap<String, (String, &str)>> = self
            .delta
            .iter()
            .enumerate()
            .map(|(s, row)| {
                let row = row
                    .iter()
                    .enumerate()
                    .map(|(x, (o, t))| (encode_word(&[x as u8]), (encode_word(o), self.names[*t].as_str())))
                    .collect();
                (self.names[s].as_str(), row)
            })
            .collect();
        serde_json::json!({
            "d": self.d,
            "states": self.names,
            "initial": self.names[self.initial],
            "delta": delta,
        })
    }

    pub fn from_json(s: &str) -> Result<Transducer> {
        let raw: RawTransducer = serde_json::from_str(s)?;
        raw.build(None)
    }

    pub fn from_value(v: &serde_json::Value) -> Result<Transducer> {
        let raw: RawTransducer = serde_json::from_value(v.clone())?;
        raw.build(None)
    }

    /// One machine per listed state, each started at that state.
    pub fn all_states_from_json(s: &str) -> Result<Vec<Transducer>> {
        let raw: RawTransducer = serde_json::from_str(s)?;
        (0..raw.states.len()).map(|i| raw.build(Some(i))).collect()
    }
}

fn invert_name(n: &str) -> String {
    match n.strip_suffix("^-1") {
        Some(base) => base.to_string(),
        None => format!("{n}^-1"),
    }
}

#[derive(Deserialize, Serialize)]
struct RawTransducer {
    d: usize,
    states: Vec<String>,
    initial: String,
    delta: BTreeMap<String, BTreeMap<String, (String, String)>>,
}

impl RawTransducer {
    fn build(&self, initial: Option<usize>) -> Result<Transducer> {
        let index = |name: &str| {
            self.states
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| Error::InvalidTransducer(format!("unknown state `{name}`")))
        };
        let mut delta = Vec::with_capacity(self.states.len());
        for name in &self.states {
            let row = self
                .delta
                .get(name)
                .ok_or_else(|| Error::InvalidTransducer(format!("no transitions for `{name}`")))?;
            let mut out = Vec::with_capacity(self.d);
            for x in 0..self.d {
                let key = encode_word(&[x as u8]);
                let (o, t) = row.get(&key).ok_or_else(|| {
                    Error::InvalidTransducer(format!("`{name}` has no transition on {key}"))
                })?;
                out.push((parse_word(o, self.d)?, index(t)?));
            }
            if row.len() != self.d {
                return Err(Error::InvalidTransducer(format!("`{name}` has extra transitions")));
            }
            delta.push(out);
        }
        let initial = match initial {
            Some(i) => i,
            None => index(&self.initial)?,
        };
        Transducer::new(self.d, self.states.clone(), initial, delta)
    }
}

const DIGITS: &[u8] = b"0123456789abcdefghijklmnopqrstuvwxyz";

/// Letters as base-36 digits; `d` is limited to 36 in text form.
pub fn encode_word(w: &[u8]) -> String {
    w.iter().map(|&x| DIGITS[x as usize] as char).collect()
}

pub fn parse_word(s: &str, d: usize) -> Result<Vec<u8>> {
    if s == "ε" {
        return Ok(Vec::new());
    }
    s.chars()
        .map(|c| {
            c.to_digit(36)
                .filter(|&v| (v as usize) < d)
                .map(|v| v as u8)
                .ok_or_else(|| Error::Parse(format!("letter `{c}` outside alphabet of size {d}")))
        })
        .collect()
}

/// Apply `f`, then `g`. Product states pair a state of `f` with the state of
/// `g` reached after consuming `f`'s output so far.
pub fn compose(f: &Transducer, g: &Transducer) -> Result<Transducer> {
    compose_with_cap(f, g, COMPOSE_CAP)
}

pub fn compose_with_cap(f: &Transducer, g: &Transducer, cap: usize) -> Result<Transducer> {
    if f.d != g.d {
        return Err(Error::AlphabetMismatch(f.d, g.d));
    }
    let start = (f.initial, g.initial);
    let mut index: HashMap<(usize, usize), usize> = HashMap::from([(start, 0)]);
    let mut pairs = vec![start];
    let mut delta: Delta = Vec::new();
    let mut i = 0;
    while i < pairs.len() {
        let (p, q) = pairs[i];
        let mut row = Vec::with_capacity(f.d);
        for x in 0..f.d {
            let (u, p2) = &f.delta[p][x];
            let (v, q2) = g.run_from(q, u);
            let next = *index.entry((*p2, q2)).or_insert_with(|| {
                pairs.push((*p2, q2));
                pairs.len() - 1
            });
            row.push((v, next));
        }
        if pairs.len() > cap {
            return Err(Error::StateExplosion(cap));
        }
        delta.push(row);
        i += 1;
    }
    let names = pairs
        .iter()
        .map(|&(p, q)| format!("{}|{}", f.names[p], g.names[q]))
        .collect();
    Ok(Transducer {
        d: f.d,
        names,
        initial: 0,
        delta,
    })
}

/// Equality of the induced maps. Exact when both machines are synchronous;
/// otherwise compares outputs on every word of length `depth` and only a
/// prefix conflict or structural identity is conclusive.
pub fn boundary_equal(f: &Transducer, g: &Transducer, depth: usize) -> Result<BoundaryEquality> {
    if f.d != g.d {
        return Err(Error::AlphabetMismatch(f.d, g.d));
    }
    if f.is_synchronous() && g.is_synchronous() {
        return Ok(synchronous_difference(f, g).map_or(BoundaryEquality::Equal, |witness| {
            BoundaryEquality::NotEqual { witness }
        }));
    }
    for w in all_words(f.d, depth) {
        let (u, v) = (f.run(&w), g.run(&w));
        let k = u.len().min(v.len());
        if u[..k] != v[..k] {
            return Ok(BoundaryEquality::NotEqual { witness: w });
        }
    }
    if f.canonical_key() == g.canonical_key() {
        return Ok(BoundaryEquality::Equal);
    }
    Ok(BoundaryEquality::UnknownAtDepth { depth })
}

/// Shortest input on which two synchronous machines differ, if any.
fn synchronous_difference(f: &Transducer, g: &Transducer) -> Option<Vec<u8>> {
    let start = (f.initial, g.initial);
    let mut came_from: HashMap<(usize, usize), Option<((usize, usize), u8)>> = HashMap::from([(start, None)]);
    let mut queue = VecDeque::from([start]);
    let path = |came_from: &HashMap<_, Option<((usize, usize), u8)>>, mut at: (usize, usize)| {
        let mut w = Vec::new();
        while let Some(Some((prev, x))) = came_from.get(&at) {
            w.push(*x);
            at = *prev;
        }
        w.reverse();
        w
    };
    while let Some((p, q)) = queue.pop_front() {
        for x in 0..f.d {
            let (u, p2) = &f.delta[p][x];
            let (v, q2) = &g.delta[q][x];
            if u != v {
                let mut w = path(&came_from, (p, q));
                w.push(x as u8);
                return Some(w);
            }
            if !came_from.contains_key(&(*p2, *q2)) {
                came_from.insert((*p2, *q2), Some(((p, q), x as u8)));
                queue.push_back((*p2, *q2));
            }
        }
    }
    None
}

/// All words of length `n`, in lexicographic order.
pub fn all_words(d: usize, n: usize) -> impl Iterator<Item = Vec<u8>> {
    let total = (d as u64).checked_pow(n as u32).expect("word count overflow");
    (0..total).map(move |mut k| {
        let mut w = vec![0u8; n];
        for slot in w.iter_mut().rev() {
            *slot = (k % d as u64) as u8;
            k /= d as u64;
        }
        w
    })
}

/// Closure of the cores of the generators and their inverses under products
/// `element * generator`, stopping once more than `budget` machines are held.
pub fn nucleus(generators: &[Transducer], budget: usize) -> Result<NucleusResult> {
    let mut gens = Vec::with_capacity(2 * generators.len());
    for g in generators {
        gens.push(g.minimize()?);
    }
    for g in generators {
        gens.push(g.inverse()?.minimize()?);
    }
    let mut elements: Vec<Transducer> = Vec::new();
    let mut seen: HashMap<(usize, Delta), usize> = HashMap::new();
    let mut add_core = |m: &Transducer, elements: &mut Vec<Transducer>| -> Result<()> {
        for s in m.core().states {
            let e = m.with_initial(s).minimize()?;
            if let std::collections::hash_map::Entry::Vacant(v) = seen.entry(e.canonical_key()) {
                v.insert(elements.len());
                elements.push(e);
            }
        }
        Ok(())
    };
    for g in &gens {
        add_core(g, &mut elements)?;
    }
    let mut i = 0;
    while i < elements.len() {
        if elements.len() > budget {
            return Ok(NucleusResult::BudgetExceeded {
                collected: elements.len(),
            });
        }
        for g in &gens {
            let product = compose(&elements[i], g)?.minimize()?;
            add_core(&product, &mut elements)?;
        }
        i += 1;
    }
    if elements.len() > budget {
        return Ok(NucleusResult::BudgetExceeded {
            collected: elements.len(),
        });
    }
    elements.sort_by_key(|e| (e.state_count(), e.canonical_key()));
    Ok(NucleusResult::Nucleus(elements))
}

/// A synchronous machine with `1..=max_states` states, each permuting the
/// alphabet. Unreachable states are pruned.
pub fn random_synchronous<R: Rng>(d: usize, max_states: usize, rng: &mut R) -> Transducer {
    let n = rng.gen_range(1..=max_states);
    let delta = (0..n)
        .map(|_| {
            let mut perm: Vec<u8> = (0..d as u8).collect();
            perm.shuffle(rng);
            perm.into_iter()
                .map(|o| (vec![o], rng.gen_range(0..n)))
                .collect()
        })
        .collect();
    let names = (0..n).map(|i| format!("s{i}")).collect();
    Transducer::new(d, names, 0, delta).expect("valid by construction")
}
