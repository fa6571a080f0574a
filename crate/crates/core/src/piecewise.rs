//! Prefix-exchange maps (elements of Thompson's group `V_d`) and piecewise
//! maps whose pieces are given by transducers.

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transducer::{all_words, compose, encode_word, parse_word, Transducer};

/// Default exhaustive injectivity depth for piecewise elements.
pub const VERIFY_DEPTH: usize = 12;

/// A homeomorphism sending the cone of each domain prefix onto the cone of
/// the paired range prefix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PrefixMap {
    d: usize,
    pairs: Vec<(Vec<u8>, Vec<u8>)>,
}

/// Checks that `prefixes` is duplicate-free, prefix-free and covers every
/// infinite word.
fn check_complete_antichain(d: usize, prefixes: &[&[u8]], side: &str) -> Result<()> {
    let bad = |why: &str| Err(Error::InvalidPrefixMap(format!("{side} prefixes {why}")));
    let mut sorted: Vec<&[u8]> = prefixes.to_vec();
    sorted.sort();
    for w in sorted.windows(2) {
        if w[1].starts_with(w[0]) {
            return bad("are not an antichain");
        }
    }
    if sorted.iter().flat_map(|p| p.iter()).any(|&x| x as usize >= d) {
        return bad("use letters outside the alphabet");
    }
    // sorted antichain: complete iff the leaves tile the tree left to right
    fn cover(sorted: &[&[u8]], at: &mut usize, node: &mut Vec<u8>, d: usize) -> bool {
        match sorted.get(*at) {
            Some(p) if *p == node.as_slice() => {
                *at += 1;
                true
            }
            Some(p) if p.starts_with(node) => (0..d as u8).all(|x| {
                node.push(x);
                let ok = cover(sorted, at, node, d);
                node.pop();
                ok
            }),
            _ => false,
        }
    }
    let mut at = 0;
    if !cover(&sorted, &mut at, &mut Vec::new(), d) || at != sorted.len() {
        return bad("do not cover Cantor space");
    }
    Ok(())
}

impl PrefixMap {
    pub fn new(d: usize, pairs: Vec<(Vec<u8>, Vec<u8>)>) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidPrefixMap(format!("alphabet size {d} < 2")));
        }
        let dom: Vec<&[u8]> = pairs.iter().map(|(a, _)| a.as_slice()).collect();
        let ran: Vec<&[u8]> = pairs.iter().map(|(_, b)| b.as_slice()).collect();
        check_complete_antichain(d, &dom, "domain")?;
        check_complete_antichain(d, &ran, "range")?;
        Ok(PrefixMap { d, pairs })
    }

    pub fn identity(d: usize) -> Self {
        PrefixMap {
            d,
            pairs: vec![(vec![], vec![])],
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn pairs(&self) -> &[(Vec<u8>, Vec<u8>)] {
        &self.pairs
    }

    /// Image of a finite word, or `None` if it is too short to pick a cone.
    pub fn apply(&self, w: &[u8]) -> Option<Vec<u8>> {
        self.pairs.iter().find(|(a, _)| w.starts_with(a)).map(|(a, b)| {
            let mut out = b.clone();
            out.extend_from_slice(&w[a.len()..]);
            out
        })
    }

    /// Fully merged: no `d` pairs `(αi -> βi)` remain; pairs sorted by domain.
    pub fn canonical(&self) -> PrefixMap {
        let mut pairs = self.pairs.clone();
        loop {
            let mut merged = false;
            let by_dom: BTreeMap<&[u8], &[u8]> = pairs.iter().map(|(a, b)| (a.as_slice(), b.as_slice())).collect();
            for (a, b) in &pairs {
                let (Some(&x), Some(&y)) = (a.last(), b.last()) else { continue };
                if x != 0 || y != 0 {
                    continue;
                }
                let (pa, pb) = (&a[..a.len() - 1], &b[..b.len() - 1]);
                let all = (0..self.d as u8).all(|i| {
                    let mut ai = pa.to_vec();
                    ai.push(i);
                    by_dom.get(ai.as_slice()).is_some_and(|bi| {
                        bi.len() == b.len() && bi.starts_with(pb) && bi[pb.len()] == i
                    })
                });
                if all {
                    let (pa, pb) = (pa.to_vec(), pb.to_vec());
                    pairs.retain(|(a2, _)| !(a2.len() == pa.len() + 1 && a2.starts_with(&pa)));
                    pairs.push((pa, pb));
                    merged = true;
                    break;
                }
            }
            if !merged {
                break;
            }
        }
        pairs.sort();
        PrefixMap { d: self.d, pairs }
    }

    pub fn inverse(&self) -> PrefixMap {
        PrefixMap {
            d: self.d,
            pairs: self.pairs.iter().map(|(a, b)| (b.clone(), a.clone())).collect(),
        }
    }

    /// Same map with every domain prefix extended to length `depth` (which
    /// must be at least the longest domain prefix). Two maps are equal iff
    /// these expansions coincide.
    ///
    /// Entry `i` is the image of the `i`-th word of length `depth` in
    /// lexicographic order.
    pub fn expand(&self, depth: usize) -> Vec<Vec<u8>> {
        let mut out = vec![Vec::new(); self.d.pow(depth as u32)];
        for (a, b) in &self.pairs {
            assert!(a.len() <= depth, "depth covers every domain prefix");
            let base = a.iter().fold(0, |acc, &x| acc * self.d + x as usize);
            for (k, tail) in all_words(self.d, depth - a.len()).enumerate() {
                let mut img = b.clone();
                img.extend_from_slice(&tail);
                out[base * self.d.pow((depth - a.len()) as u32) + k] = img;
            }
        }
        out
    }

    pub fn max_domain_len(&self) -> usize {
        self.pairs.iter().map(|(a, _)| a.len()).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let pairs: Vec<(String, String)> = self
            .pairs
            .iter()
            .map(|(a, b)| (encode_word(a), encode_word(b)))
            .collect();
        serde_json::json!({ "d": self.d, "pairs": pairs })
    }

    pub fn from_json(s: &str) -> Result<PrefixMap> {
        #[derive(Deserialize)]
        struct Raw {
            d: usize,
            pairs: Vec<(String, String)>,
        }
        let raw: Raw = serde_json::from_str(s)?;
        let pairs = raw
            .pairs
            .iter()
            .map(|(a, b)| Ok((parse_word(a, raw.d)?, parse_word(b, raw.d)?)))
            .collect::<Result<_>>()?;
        PrefixMap::new(raw.d, pairs)
    }
}

/// Apply `f`, then `g`, in canonical form.
pub fn compose_prefix_maps(f: &PrefixMap, g: &PrefixMap) -> Result<PrefixMap> {
    if f.d != g.d {
        return Err(Error::AlphabetMismatch(f.d, g.d));
    }
    let mut pairs = Vec::new();
    for (a, b) in &f.pairs {
        for (c, e) in &g.pairs {
            if let Some(rest) = c.strip_prefix(b.as_slice()) {
                let mut dom = a.clone();
                dom.extend_from_slice(rest);
                pairs.push((dom, e.clone()));
            } else if let Some(rest) = b.strip_prefix(c.as_slice()) {
                let mut ran = e.clone();
                ran.extend_from_slice(rest);
                pairs.push((a.clone(), ran));
            }
        }
    }
    Ok(PrefixMap { d: f.d, pairs }.canonical())
}

pub fn invert_prefix_map(f: &PrefixMap) -> PrefixMap {
    f.inverse()
}

/// One state per proper prefix of a domain prefix, plus an identity state
/// entered once a domain prefix has been read.
pub fn prefix_map_to_transducer(f: &PrefixMap) -> Transducer {
    let canon = f.canonical();
    if canon.pairs == [(vec![], vec![])] {
        return Transducer::identity(f.d);
    }
    let mut internal: Vec<Vec<u8>> = vec![vec![]];
    let mut seen: HashSet<Vec<u8>> = HashSet::from([vec![]]);
    for (a, _) in &f.pairs {
        for k in 1..a.len() {
            if seen.insert(a[..k].to_vec()) {
                internal.push(a[..k].to_vec());
            }
        }
    }
    internal.sort_by(|x, y| x.len().cmp(&y.len()).then(x.cmp(y)));
    let index: BTreeMap<&[u8], usize> = internal.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect();
    let id = internal.len();
    let image: BTreeMap<&[u8], &[u8]> = f.pairs.iter().map(|(a, b)| (a.as_slice(), b.as_slice())).collect();
    let mut delta = Vec::with_capacity(id + 1);
    for node in &internal {
        let row = (0..f.d as u8)
            .map(|x| {
                let mut child = node.clone();
                child.push(x);
                match image.get(child.as_slice()) {
                    Some(b) => (b.to_vec(), id),
                    None => (vec![], index[child.as_slice()]),
                }
            })
            .collect();
        delta.push(row);
    }
    delta.push((0..f.d as u8).map(|x| (vec![x], id)).collect());
    let mut names: Vec<String> = internal
        .iter()
        .map(|p| if p.is_empty() { "root".to_string() } else { format!("p{}", encode_word(p)) })
        .collect();
    names.push("id".into());
    Transducer::new(f.d, names, 0, delta).expect("valid by construction")
}

/// A random map with `1..=max_pairs` pairs: two random trees with the same
/// leaf count, leaves matched by a random bijection.
pub fn random_prefix_map<R: Rng>(d: usize, max_pairs: usize, rng: &mut R) -> PrefixMap {
    let carets = rng.gen_range(0..=(max_pairs.max(1) - 1) / (d - 1));
    let tree = |rng: &mut R| {
        let mut leaves: Vec<Vec<u8>> = vec![vec![]];
        for _ in 0..carets {
            let i = rng.gen_range(0..leaves.len());
            let p = leaves.swap_remove(i);
            for x in 0..d as u8 {
                let mut c = p.clone();
                c.push(x);
                leaves.push(c);
            }
        }
        leaves.sort();
        leaves
    };
    let dom = tree(rng);
    let mut ran = tree(rng);
    ran.shuffle(rng);
    PrefixMap {
        d,
        pairs: dom.into_iter().zip(ran).collect(),
    }
}

/// Agrees with the transducer of the piece whose cone contains the input.
#[derive(Clone, Debug)]
pub struct PiecewiseElement {
    d: usize,
    pieces: Vec<(Vec<u8>, Transducer)>,
}

impl PiecewiseElement {
    /// Checks the cones and exhaustive injectivity at `depth`.
    pub fn new(d: usize, pieces: Vec<(Vec<u8>, Transducer)>, depth: usize) -> Result<Self> {
        let cones: Vec<&[u8]> = pieces.iter().map(|(c, _)| c.as_slice()).collect();
        check_complete_antichain(d, &cones, "piece")?;
        if let Some((_, t)) = pieces.iter().find(|(_, t)| t.d() != d) {
            return Err(Error::AlphabetMismatch(d, t.d()));
        }
        let e = PiecewiseElement { d, pieces };
        let longest = e.pieces.iter().map(|(c, _)| c.len()).max().unwrap_or(0);
        if depth < longest {
            return Err(Error::DepthInsufficient(depth));
        }
        e.check_injective(depth)?;
        Ok(e)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn pieces(&self) -> &[(Vec<u8>, Transducer)] {
        &self.pieces
    }

    /// `None` if `w` is shorter than its cone prefix.
    pub fn apply(&self, w: &[u8]) -> Option<Vec<u8>> {
        self.piece_for(w).map(|t| t.run(w))
    }

    fn piece_for(&self, w: &[u8]) -> Option<&Transducer> {
        self.pieces.iter().find(|(c, _)| w.starts_with(c)).map(|(_, t)| t)
    }

    fn check_injective(&self, depth: usize) -> Result<()> {
        let mut images = HashSet::new();
        for w in all_words(self.d, depth) {
            let out = self.apply(&w).expect("depth covers every cone");
            if !images.insert(out) {
                return Err(Error::NotInjective(depth));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let pieces: Vec<serde_json::Value> = self
            .pieces
            .iter()
            .map(|(c, t)| serde_json::json!({ "cone": encode_word(c), "transducer": t.to_json() }))
            .collect();
        serde_json::json!({ "d": self.d, "pieces": pieces })
    }

    pub fn from_json(s: &str, depth: usize) -> Result<PiecewiseElement> {
        #[derive(Deserialize, Serialize)]
        struct Piece {
            cone: String,
            transducer: serde_json::Value,
        }
        #[derive(Deserialize)]
        struct Raw {
            d: usize,
            pieces: Vec<Piece>,
        }
        let raw: Raw = serde_json::from_str(s)?;
        let pieces = raw
            .pieces
            .iter()
            .map(|p| Ok((parse_word(&p.cone, raw.d)?, Transducer::from_value(&p.transducer)?)))
            .collect::<Result<_>>()?;
        PiecewiseElement::new(raw.d, pieces, depth)
    }
}

/// Apply `f`, then `g`. Each cone of `f` is split until the output its
/// transducer has committed to picks a single piece of `g`; splitting past
/// `depth` fails with `DepthInsufficient`.
pub fn compose_piecewise(f: &PiecewiseElement, g: &PiecewiseElement, depth: usize) -> Result<PiecewiseElement> {
    if f.d != g.d {
        return Err(Error::AlphabetMismatch(f.d, g.d));
    }
    let mut pieces = Vec::new();
    let mut stack: Vec<(Vec<u8>, &Transducer)> = f.pieces.iter().rev().map(|(c, t)| (c.clone(), t)).collect();
    while let Some((cone, t)) = stack.pop() {
        let out = t.run(&cone);
        if let Some((_, s)) = g.pieces.iter().find(|(c, _)| out.starts_with(c)) {
            pieces.push((cone, compose(t, s)?));
            continue;
        }
        if cone.len() >= depth {
            return Err(Error::DepthInsufficient(depth));
        }
        for x in (0..f.d as u8).rev() {
            let mut c = cone.clone();
            c.push(x);
            stack.push((c, t));
        }
    }
    PiecewiseElement::new(f.d, pieces, depth)
}
