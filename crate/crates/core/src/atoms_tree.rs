//! The tree of atoms: level-`n` atoms that look infinite, linked to the
//! level-`(n-1)` atom whose field they restrict to.
//!
//! Boundary points are only represented as depth-`N` rays.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;

use crate::cayley::{partition_by_field, Atom, CayleyBall, VectorField};
use crate::error::{Error, Result};
use crate::presentation::{DehnSolver, Presentation, Word};

#[derive(Clone, Debug)]
pub struct AtomTree {
    depth: usize,
    horizon: usize,
    ball: CayleyBall,
    levels: Vec<Vec<Atom>>,
    /// `parents[n][i]` indexes `levels[n - 1]`; `None` only for the root.
    parents: Vec<Vec<Option<usize>>>,
    types: Option<Vec<Vec<usize>>>,
}

impl AtomTree {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn ball(&self) -> &CayleyBall {
        &self.ball
    }

    pub fn levels(&self) -> &[Vec<Atom>] {
        &self.levels
    }

    pub fn parent(&self, level: usize, index: usize) -> Option<usize> {
        self.parents[level][index]
    }

    pub fn types(&self) -> Option<&[Vec<usize>]> {
        self.types.as_deref()
    }

    pub fn node_count(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub fn member_words<'a>(&'a self, atom: &'a Atom) -> impl Iterator<Item = &'a Word> + 'a {
        atom.members
            .iter()
            .map(|&m| &self.ball.vertices()[m as usize])
    }

    /// Root-to-leaf chains of node indices, one per depth-`N` node.
    pub fn rays(&self) -> Vec<Vec<usize>> {
        let last = self.depth;
        (0..self.levels[last].len())
            .map(|leaf| {
                let mut chain = vec![leaf];
                let mut cur = leaf;
                for n in (1..=last).rev() {
                    cur = self.parents[n][cur].expect("non-root nodes have parents");
                    chain.push(cur);
                }
                chain.reverse();
                chain
            })
            .collect()
    }

    /// Parent of every node in level order, as indices into the same order.
    pub fn flat_parents(&self) -> Vec<Option<usize>> {
        let mut out = Vec::with_capacity(self.node_count());
        let mut base = 0;
        let mut prev_base = 0;
        for (n, level) in self.levels.iter().enumerate() {
            for i in 0..level.len() {
                out.push(self.parents[n][i].map(|p| prev_base + p));
            }
            prev_base = base;
            base += level.len();
        }
        out
    }
}

/// Builds levels `0..=depth` of the tree of atoms from the ball of radius
/// `horizon`, keeping at levels `>= 1` only atoms that reach the horizon
/// sphere.
pub fn build_tree(p: &Presentation, depth: usize, horizon: usize) -> Result<AtomTree> {
    if horizon < depth || (depth > 0 && horizon == depth) {
        return Err(Error::HorizonTooSmall { depth, horizon });
    }
    let (ball, groups) = partition_by_field(p, depth, horizon)?;
    let mut levels: Vec<Vec<Atom>> = Vec::with_capacity(depth + 1);
    let mut parents: Vec<Vec<Option<usize>>> = Vec::with_capacity(depth + 1);
    for n in 0..=depth {
        let edges = ball.edge_count_within(n);
        let mut merged: BTreeMap<VectorField, Vec<u32>> = BTreeMap::new();
        for (field, members) in &groups {
            merged
                .entry(field.restrict(edges))
                .or_default()
                .extend_from_slice(members);
        }
        let mut level = Vec::new();
        let mut links = Vec::new();
        for (field, mut members) in merged {
            members.sort_unstable();
            let atom = Atom::new(n, field, members, &ball);
            let parent = if n == 0 {
                None
            } else {
                if !atom.infinite_candidate {
                    continue;
                }
                let up = ball.edge_count_within(n - 1);
                let key = atom.field.restrict(up);
                match levels[n - 1].iter().position(|a: &Atom| a.field == key) {
                    Some(i) => Some(i),
                    None => continue,
                }
            };
            level.push(atom);
            links.push(parent);
        }
        levels.push(level);
        parents.push(links);
    }
    Ok(AtomTree {
        depth,
        horizon,
        ball,
        levels,
        parents,
        types: None,
    })
}

/// Translation signature of an atom: its members seen from its
/// shortlex-least member `m`, i.e. normal forms of `m^-1 v` for members `v`
/// with `d(m, v) <= window`.
type Signature = BTreeSet<Word>;

/// Labels nodes by translation class.
///
/// Two atoms get the same label when the translation carrying the least
/// member of one onto the least member of the other matches their members
/// within `window` of that point. `window` defaults to the largest radius
/// whose windows lie inside the horizon ball for every node.
///
/// Labels are ranked by (shallowest level where the class occurs, signature),
/// so they do not depend on the order atoms were enumerated in.
pub fn assign_types(t: &AtomTree, p: &Presentation, window: Option<usize>) -> Result<AtomTree> {
    let ball = &t.ball;
    let window = match window {
        Some(w) => w,
        None => t
            .levels
            .iter()
            .flatten()
            .map(|a| t.horizon - ball.depth(a.members[0] as usize))
            .min()
            .unwrap_or(0),
    };
    let solver = if p.is_free() {
        None
    } else {
        Some(DehnSolver::new(p)?)
    };
    // normal forms of the window ball, for identifying m^-1 v
    let win_len = ball.shell_offsets()[window.min(ball.radius()) + 1];
    let normal_form = |w: &Word| -> Option<Word> {
        match &solver {
            None => (w.len() <= window).then(|| w.clone()),
            Some(s) => ball.vertices()[..win_len]
                .iter()
                .find(|v| v.len() <= w.len() && s.solve(&w.mul(&v.inverse())))
                .cloned(),
        }
    };
    let mut sigs: Vec<(usize, Signature)> = Vec::new();
    for (n, level) in t.levels.iter().enumerate() {
        for atom in level {
            let root_inv = ball.vertices()[atom.members[0] as usize].inverse();
            let sig = atom
                .members
                .iter()
                .filter_map(|&v| normal_form(&root_inv.mul(&ball.vertices()[v as usize])))
                .collect();
            sigs.push((n, sig));
        }
    }
    let labels = canonical_labels(&sigs);
    let mut it = labels.into_iter();
    let types = t
        .levels
        .iter()
        .map(|l| l.iter().map(|_| it.next().unwrap()).collect())
        .collect();
    Ok(AtomTree {
        types: Some(types),
        ..t.clone()
    })
}

fn canonical_labels(sigs: &[(usize, Signature)]) -> Vec<usize> {
    let mut first_level: BTreeMap<&Signature, usize> = BTreeMap::new();
    for (n, s) in sigs {
        let e = first_level.entry(s).or_insert(*n);
        *e = (*e).min(*n);
    }
    let mut order: Vec<(usize, &Signature)> = first_level.iter().map(|(s, n)| (*n, *s)).collect();
    order.sort();
    let rank: BTreeMap<&Signature, usize> = order.iter().enumerate().map(|(i, (_, s))| (*s, i)).collect();
    sigs.iter().map(|(_, s)| rank[s]).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Dot,
    Json,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dot" => Ok(ExportFormat::Dot),
            "json" => Ok(ExportFormat::Json),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

const PALETTE: [&str; 8] = [
    "#8dd3c7", "#fb8072", "#80b1d3", "#fdb462", "#b3de69", "#fccde5", "#bebada", "#ffffb3",
];

fn node_id(level: usize, index: usize) -> String {
    format!("L{level}A{index}")
}

pub fn export_tree(t: &AtomTree, p: &Presentation, format: ExportFormat) -> String {
    match format {
        ExportFormat::Dot => export_dot(t),
        ExportFormat::Json => {
            serde_json::to_string_pretty(&tree_json(t, p)).expect("serializable") + "\n"
        }
    }
}

fn export_dot(t: &AtomTree) -> String {
    let mut out = String::from("digraph atoms {\n  rankdir=TB;\n  node [shape=circle, style=filled];\n");
    for (n, level) in t.levels.iter().enumerate() {
        let ids: Vec<String> = (0..level.len()).map(|i| node_id(n, i)).collect();
        let _ = writeln!(out, "  {{ rank=same; {}; }}", ids.join("; "));
        for (i, atom) in level.iter().enumerate() {
            let ty = t.types.as_ref().map(|ts| ts[n][i]);
            let color = PALETTE[ty.unwrap_or(0) % PALETTE.len()];
            let label = match ty {
                Some(ty) => format!("{}\\ntype {}\\n{} members", ids[i], ty, atom.members.len()),
                None => format!("{}\\n{} members", ids[i], atom.members.len()),
            };
            let _ = writeln!(out, "  {} [label=\"{}\", fillcolor=\"{}\"];", ids[i], label, color);
        }
    }
    for n in 1..t.levels.len() {
        for (i, parent) in t.parents[n].iter().enumerate() {
            if let Some(pi) = parent {
                let _ = writeln!(out, "  {} -> {};", node_id(n - 1, *pi), node_id(n, i));
            }
        }
    }
    out.push_str("}\n");
    out
}

fn tree_json(t: &AtomTree, p: &Presentation) -> serde_json::Value {
    let names = p.generator_names();
    let mut nodes = Vec::new();
    for (n, level) in t.levels.iter().enumerate() {
        for (i, atom) in level.iter().enumerate() {
            nodes.push(serde_json::json!({
                "id": node_id(n, i),
                "level": n,
                "field": atom.field.encode(),
                "members": atom.members.len(),
                "nearest": t.member_words(atom).next().map(|w| w.format(names)),
                "stable_since_horizon": atom.stable_since_horizon,
                "type": t.types.as_ref().map(|ts| ts[n][i]),
            }));
        }
    }
    serde_json::json!({
        "depth": t.depth,
        "horizon": t.horizon,
        "nodes": nodes,
        "parents": t.flat_parents(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> Presentation {
        Presentation::free(["a"]).unwrap()
    }

    fn f2() -> Presentation {
        Presentation::free(["a", "b"]).unwrap()
    }

    fn shape(t: &AtomTree) -> Vec<usize> {
        t.levels().iter().map(Vec::len).collect()
    }

    #[test]
    fn z_tree_is_two_rays() {
        let t = build_tree(&z(), 3, 10).unwrap();
        assert_eq!(shape(&t), vec![1, 2, 2, 2]);
        assert_eq!(t.rays().len(), 2);
    }

    #[test]
    fn f2_tree_branches() {
        let t = build_tree(&f2(), 2, 8).unwrap();
        assert_eq!(shape(&t), vec![1, 4, 12]);
        for i in 0..4 {
            let kids = (0..12).filter(|&j| t.parent(2, j) == Some(i)).count();
            assert_eq!(kids, 3);
        }
    }

    #[test]
    fn depth_zero_is_single_node() {
        let t = build_tree(&z(), 0, 3).unwrap();
        assert_eq!(shape(&t), vec![1]);
        let typed = assign_types(&t, &z(), None).unwrap();
        assert_eq!(typed.types().unwrap(), &[vec![0]]);
    }

    #[test]
    fn horizon_must_exceed_depth() {
        assert!(matches!(build_tree(&z(), 3, 3), Err(Error::HorizonTooSmall { .. })));
        assert!(matches!(build_tree(&z(), 3, 2), Err(Error::HorizonTooSmall { .. })));
    }

    #[test]
    fn parents_contain_children() {
        let t = build_tree(&f2(), 3, 7).unwrap();
        for n in 1..=3 {
            for (i, child) in t.levels()[n].iter().enumerate() {
                let parent = &t.levels()[n - 1][t.parent(n, i).unwrap()];
                let set: BTreeSet<u32> = parent.members.iter().copied().collect();
                assert!(child.members.iter().all(|m| set.contains(m)));
            }
        }
    }

    #[test]
    fn z_types() {
        let t = assign_types(&build_tree(&z(), 3, 10).unwrap(), &z(), None).unwrap();
        let types = t.types().unwrap();
        assert_eq!(types[0], vec![0]);
        let deeper: BTreeSet<usize> = types[1..].iter().flatten().copied().collect();
        assert_eq!(deeper.len(), 2);
        // every level repeats the same pair of classes
        for l in &types[1..] {
            assert_eq!(l, &types[1]);
        }
    }

    #[test]
    fn f2_types_follow_the_first_letter() {
        // translations only identify branches leaving along the same letter
        let t = assign_types(&build_tree(&f2(), 2, 8).unwrap(), &f2(), None).unwrap();
        let types = t.types().unwrap();
        let deeper: BTreeSet<usize> = types[1..].iter().flatten().copied().collect();
        assert_eq!(deeper.len(), 4);
        for (j, atom) in t.levels()[2].iter().enumerate() {
            let nearest = t.member_words(atom).next().unwrap();
            let last = *nearest.letters().last().unwrap();
            let same = t.levels()[1]
                .iter()
                .position(|a| t.member_words(a).next().unwrap().letters() == [last])
                .unwrap();
            assert_eq!(types[2][j], types[1][same]);
        }
    }

    #[test]
    fn labels_ignore_enumeration_order() {
        let t = build_tree(&f2(), 2, 6).unwrap();
        let typed = assign_types(&t, &f2(), None).unwrap();
        let types = typed.types().unwrap();
        // reverse the order of every level and relabel
        let mut sigs = Vec::new();
        let mut expect = Vec::new();
        for (n, level) in t.levels().iter().enumerate().rev() {
            for (i, atom) in level.iter().enumerate().rev() {
                let root_inv = t.ball().vertices()[atom.members[0] as usize].inverse();
                let sig: Signature = t
                    .member_words(atom)
                    .map(|v| root_inv.mul(v))
                    .filter(|w| w.len() <= 4)
                    .collect();
                sigs.push((n, sig));
                expect.push(types[n][i]);
            }
        }
        assert_eq!(canonical_labels(&sigs), expect);
    }

    #[test]
    fn export_formats() {
        let one = build_tree(&z(), 0, 2).unwrap();
        let dot = export_tree(&one, &z(), ExportFormat::Dot);
        assert!(dot.starts_with("digraph"));
        assert!(dot.contains("L0A0 ["));
        assert!(!dot.contains("->"));

        let t = build_tree(&z(), 2, 6).unwrap();
        let json: serde_json::Value =
            serde_json::from_str(&export_tree(&t, &z(), ExportFormat::Json)).unwrap();
        assert_eq!(json["parents"], serde_json::json!([null, 0, 0, 1, 2]));

        let f = build_tree(&f2(), 1, 4).unwrap();
        let dot = export_tree(&f, &f2(), ExportFormat::Dot);
        assert_eq!(dot.matches(" [label=").count(), 5);
        assert_eq!(dot.matches("->").count(), 4);
        assert_eq!(dot, export_tree(&f, &f2(), ExportFormat::Dot));

        assert!(matches!("svg".parse::<ExportFormat>(), Err(Error::UnknownFormat(_))));
    }

    #[test]
    fn genus2_small_tree() {
        let p = Presentation::surface_genus2();
        let t = build_tree(&p, 1, 2).unwrap();
        assert_eq!(t.levels()[0].len(), 1);
        assert!(!t.levels()[1].is_empty());
        let typed = assign_types(&t, &p, Some(1)).unwrap();
        assert_eq!(typed.types().unwrap()[0], vec![0]);
    }
}
