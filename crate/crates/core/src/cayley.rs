//! Balls in Cayley graphs, vector fields pointing at a vertex, and the
//! partition of vertices into atoms.
//!
//! Vertices are stored as shortlex-least words in breadth-first order, so the
//! ball of radius `r` is always a prefix of the ball of any larger radius.
//! Edges are sorted by their larger endpoint, which makes the edge list of
//! `B_r` a prefix of the edge list of `B_{r+1}` as well. Restricting a vector
//! field to a smaller ball is therefore a prefix operation.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::presentation::{DehnSolver, Letter, Presentation, Word};

const NONE: u32 = u32::MAX;

/// Undirected Cayley-graph edge `from -- to` with `to = from * generator`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub generator: u16,
}

#[derive(Clone, Debug)]
pub struct CayleyBall {
    radius: usize,
    rank: usize,
    vertices: Vec<Word>,
    edges: Vec<Edge>,
    /// `shells[k]` is the index of the first vertex at distance `k`;
    /// the last entry is the vertex count.
    shells: Vec<usize>,
    /// Flattened `[vertex][letter code]` neighbour table.
    neighbours: Vec<u32>,
}

fn code(l: Letter) -> usize {
    2 * l.generator as usize + l.inverse as usize
}

/// Word-problem backend used while enumerating vertices.
enum Identifier {
    Free,
    Dehn {
        solver: DehnSolver,
        /// Exponent sums are a group invariant when every relator has zero
        /// exponent sum in every generator.
        abelian_buckets: bool,
    },
}

impl Identifier {
    fn new(p: &Presentation) -> Result<Self> {
        if p.is_free() {
            return Ok(Identifier::Free);
        }
        let solver = DehnSolver::new(p)?;
        let abelian_buckets = p
            .relators()
            .iter()
            .all(|r| exponent_sums(r.word(), p.rank()).iter().all(|&s| s == 0));
        Ok(Identifier::Dehn {
            solver,
            abelian_buckets,
        })
    }
}

fn exponent_sums(w: &Word, rank: usize) -> Vec<i32> {
    let mut s = vec![0; rank];
    for l in w.letters() {
        s[l.generator as usize] += l.sign() as i32;
    }
    s
}

impl CayleyBall {
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn vertices(&self) -> &[Word] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Start index of every distance shell, followed by the vertex count.
    pub fn shell_offsets(&self) -> &[usize] {
        &self.shells
    }

    /// Vertices at exactly distance `k`.
    pub fn shell(&self, k: usize) -> std::ops::Range<usize> {
        self.shells[k]..self.shells[k + 1]
    }

    /// Distance of vertex `i` from the identity.
    pub fn depth(&self, i: usize) -> usize {
        self.shells.partition_point(|&s| s <= i) - 1
    }

    /// Neighbour of vertex `i` along `l`, if it lies in the ball.
    pub fn neighbour(&self, i: usize, l: Letter) -> Option<usize> {
        let n = self.neighbours[i * 2 * self.rank + code(l)];
        (n != NONE).then_some(n as usize)
    }

    /// Number of edges with both endpoints in the ball of radius `r <= radius`.
    pub fn edge_count_within(&self, r: usize) -> usize {
        let nv = self.shells[r + 1];
        self.edges.partition_point(|e| e.from.max(e.to) < nv)
    }

    /// The ball of a smaller radius.
    pub fn truncate(&self, r: usize) -> CayleyBall {
        assert!(r <= self.radius);
        let nv = self.shells[r + 1];
        let ne = self.edge_count_within(r);
        let width = 2 * self.rank;
        let neighbours = self.neighbours[..nv * width]
            .iter()
            .map(|&n| if n != NONE && (n as usize) < nv { n } else { NONE })
            .collect();
        CayleyBall {
            radius: r,
            rank: self.rank,
            vertices: self.vertices[..nv].to_vec(),
            edges: self.edges[..ne].to_vec(),
            shells: self.shells[..r + 2].to_vec(),
            neighbours,
        }
    }

    /// Breadth-first distances from vertex `src` inside the ball.
    pub fn bfs(&self, src: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.len()];
        dist[src] = 0;
        let mut queue = VecDeque::from([src]);
        let width = 2 * self.rank;
        while let Some(u) = queue.pop_front() {
            for &n in &self.neighbours[u * width..(u + 1) * width] {
                if n != NONE && dist[n as usize] == u32::MAX {
                    dist[n as usize] = dist[u] + 1;
                    queue.push_back(n as usize);
                }
            }
        }
        dist
    }

    pub fn to_json(&self, p: &Presentation) -> serde_json::Value {
        let names = p.generator_names();
        serde_json::json!({
            "radius": self.radius,
            "vertices": self.vertices.iter().map(|w| w.format(names)).collect::<Vec<_>>(),
            "edges": self
                .edges
                .iter()
                .map(|e| serde_json::json!([e.from, e.to, names[e.generator as usize]]))
                .collect::<Vec<_>>(),
            "shells": self.shells,
        })
    }
}

/// Locates `w` among the ball's vertices. Exact lookup first, then a scan in
/// breadth-first order, so the first hit is the nearest representative.
struct Locator {
    index: HashMap<Word, u32>,
    /// Vertices grouped by exponent sums, when those are group invariants.
    buckets: Option<HashMap<Vec<i32>, Vec<u32>>>,
}

impl Locator {
    fn new(id: &Identifier) -> Self {
        let buckets = match id {
            Identifier::Dehn {
                abelian_buckets: true,
                ..
            } => Some(HashMap::new()),
            _ => None,
        };
        Locator {
            index: HashMap::new(),
            buckets,
        }
    }

    fn add_vertex(&mut self, w: &Word, i: usize, rank: usize) {
        self.index.insert(w.clone(), i as u32);
        if let Some(b) = &mut self.buckets {
            b.entry(exponent_sums(w, rank)).or_default().push(i as u32);
        }
    }

    fn find(
        &self,
        w: &Word,
        id: &Identifier,
        vertices: &[Word],
        range: std::ops::Range<usize>,
        rank: usize,
    ) -> Option<usize> {
        if let Some(&i) = self.index.get(w) {
            return Some(i as usize);
        }
        let Identifier::Dehn { solver, .. } = id else {
            return None;
        };
        let same = |j: usize| solver.solve(&w.mul(&vertices[j].inverse()));
        match &self.buckets {
            Some(b) => b
                .get(&exponent_sums(w, rank))?
                .iter()
                .map(|&j| j as usize)
                .filter(|j| range.contains(j))
                .find(|&j| same(j)),
            None => range.into_iter().find(|&j| same(j)),
        }
    }
}

/// Exact ball of radius `n` around the identity.
///
/// Needs a solvable word problem: the presentation must be free or pass the
/// half-overlap Dehn check.
pub fn build_ball(p: &Presentation, n: usize) -> Result<CayleyBall> {
    let id = Identifier::new(p)?;
    Ok(build_ball_with(p, n, &id))
}

fn build_ball_with(p: &Presentation, n: usize, id: &Identifier) -> CayleyBall {
    let rank = p.rank();
    let width = 2 * rank;
    let mut vertices = vec![Word::empty()];
    let mut shells = vec![0, 1];
    let mut neighbours: Vec<u32> = vec![NONE; width];
    let mut loc = Locator::new(id);
    loc.add_vertex(&Word::empty(), 0, rank);
    let letters: Vec<Letter> = (0..width)
        .map(|c| Letter::new((c / 2) as u16, c % 2 == 1))
        .collect();
    for k in 0..=n {
        let shell = shells[k]..shells[k + 1];
        let lo = if k == 0 { 0 } else { shells[k - 1] };
        for u in shell {
            for &l in &letters {
                let c = code(l);
                if neighbours[u * width + c] != NONE {
                    continue;
                }
                let cand = vertices[u].mul(&Word::letter(l));
                let found = loc.find(&cand, id, &vertices, lo..vertices.len(), rank);
                let v = match found {
                    Some(v) => v,
                    None if k < n => {
                        loc.add_vertex(&cand, vertices.len(), rank);
                        vertices.push(cand.clone());
                        neighbours.extend(std::iter::repeat_n(NONE, width));
                        vertices.len() - 1
                    }
                    None => continue,
                };
                loc.index.entry(cand).or_insert(v as u32);
                neighbours[u * width + c] = v as u32;
                neighbours[v * width + code(l.inv())] = u as u32;
            }
        }
        if k < n {
            shells.push(vertices.len());
        }
    }
    let mut edges = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for u in 0..vertices.len() {
        for g in 0..rank {
            let v = neighbours[u * width + 2 * g];
            if v == NONE {
                continue;
            }
            let v = v as usize;
            if seen.insert((u.min(v), u.max(v), g)) {
                edges.push(Edge {
                    from: u,
                    to: v,
                    generator: g as u16,
                });
            }
        }
    }
    edges.sort_by_key(|e| (e.from.max(e.to), e.from.min(e.to), e.generator, e.from));
    CayleyBall {
        radius: n,
        rank,
        vertices,
        edges,
        shells,
        neighbours,
    }
}

/// Exact Cayley-graph distance `d(u, v) = |u^-1 v|`.
///
/// Dehn reduction of `u^-1 v` gives an upper bound `m`; balls of radius
/// `0, 1, ..., m` are searched in turn and the first one containing the
/// element gives its word length.
pub fn distance(p: &Presentation, u: &Word, v: &Word) -> Result<usize> {
    let id = Identifier::new(p)?;
    let target = u.inverse().mul(v);
    let Identifier::Dehn { solver, .. } = &id else {
        return Ok(target.len());
    };
    let mut bound = target;
    while let Some(next) = solver.reduce_once(&bound) {
        bound = next;
    }
    for r in 0..bound.len() {
        let ball = build_ball_with(p, r, &id);
        let loc = locator_for(&ball, &id);
        if let Some(i) = loc.find(&bound, &id, &ball.vertices, ball.shell(r), p.rank()) {
            return Ok(ball.depth(i));
        }
    }
    Ok(bound.len())
}

fn locator_for(ball: &CayleyBall, id: &Identifier) -> Locator {
    let mut loc = Locator::new(id);
    for (i, w) in ball.vertices.iter().enumerate() {
        loc.add_vertex(w, i, ball.rank);
    }
    loc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Orientation {
    /// Points from `edge.from` to `edge.to`.
    Forward,
    Backward,
    Unoriented,
}

impl Orientation {
    pub fn symbol(self) -> char {
        match self {
            Orientation::Forward => '+',
            Orientation::Backward => '-',
            Orientation::Unoriented => '0',
        }
    }

    fn from_distances(d_from: u32, d_to: u32) -> Self {
        match d_to.cmp(&d_from) {
            std::cmp::Ordering::Less => Orientation::Forward,
            std::cmp::Ordering::Greater => Orientation::Backward,
            std::cmp::Ordering::Equal => Orientation::Unoriented,
        }
    }
}

/// One orientation per edge of a ball, in the ball's edge order. Each edge
/// points at the endpoint closer to the target vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VectorField(Vec<Orientation>);

impl VectorField {
    pub fn orientations(&self) -> &[Orientation] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// String over `+ - 0`, one symbol per edge.
    pub fn encode(&self) -> String {
        self.0.iter().map(|o| o.symbol()).collect()
    }

    /// The field on the first `edges` edges, i.e. on a smaller ball.
    pub fn restrict(&self, edges: usize) -> VectorField {
        VectorField(self.0[..edges].to_vec())
    }
}

/// Distances from every vertex of a small ball to arbitrary targets.
enum Distances {
    /// `d(x, v) = |x| + |v| - 2 * lcp(x, v)` on reduced words.
    Free,
    /// BFS rows from every vertex of the small ball inside a larger ball.
    Graph { rows: Vec<Vec<u32>> },
}

impl Distances {
    fn field(&self, ball: &CayleyBall, big: &CayleyBall, target: usize) -> VectorField {
        let d = |x: usize| -> u32 {
            match self {
                Distances::Free => {
                    let (a, b) = (big.vertices[x].letters(), big.vertices[target].letters());
                    let lcp = a.iter().zip(b).take_while(|(p, q)| p == q).count();
                    (a.len() + b.len() - 2 * lcp) as u32
                }
                Distances::Graph { rows } => rows[x][target],
            }
        };
        VectorField(
            ball.edges
                .iter()
                .map(|e| Orientation::from_distances(d(e.from), d(e.to)))
                .collect(),
        )
    }
}

/// The vector field on `ball` induced by the vertex `v`.
pub fn vector_field(ball: &CayleyBall, p: &Presentation, v: &Word) -> Result<VectorField> {
    let id = Identifier::new(p)?;
    let v = v.free_reduce();
    if let Identifier::Free = id {
        let dist: Vec<u32> = ball
            .vertices
            .iter()
            .map(|x| x.inverse().mul(&v).len() as u32)
            .collect();
        return Ok(VectorField(
            ball.edges
                .iter()
                .map(|e| Orientation::from_distances(dist[e.from], dist[e.to]))
                .collect(),
        ));
    }
    // geodesics from B_n to v stay inside B_{n + |v|}
    let big = build_ball_with(p, ball.radius + v.len(), &id);
    let loc = locator_for(&big, &id);
    let target = loc
        .find(&v, &id, &big.vertices, 0..big.len(), p.rank())
        .expect("v lies in the ball of radius |v|");
    let dist = big.bfs(target);
    Ok(VectorField(
        ball.edges
            .iter()
            .map(|e| Orientation::from_distances(dist[e.from], dist[e.to]))
            .collect(),
    ))
}

/// Vertices of `B_M` inducing one vector field on `B_n`.
#[derive(Clone, Debug)]
pub struct Atom {
    pub level: usize,
    pub field: VectorField,
    /// Indices into the horizon ball, ascending.
    pub members: Vec<u32>,
    /// Contains a vertex on the boundary sphere of the horizon ball.
    pub infinite_candidate: bool,
    /// For a candidate: the least `h` such that the atom meets every sphere of
    /// radius `h..=M`. Otherwise the largest member distance, after which the
    /// member set no longer changes.
    pub stable_since_horizon: usize,
}

impl Atom {
    pub(crate) fn new(level: usize, field: VectorField, members: Vec<u32>, ball: &CayleyBall) -> Atom {
        let horizon = ball.radius;
        let mut hit = vec![false; horizon + 1];
        for &m in &members {
            hit[ball.depth(m as usize)] = true;
        }
        let infinite_candidate = hit[horizon];
        let stable_since_horizon = if infinite_candidate {
            let mut h = horizon;
            while h > 0 && hit[h - 1] {
                h -= 1;
            }
            h
        } else {
            hit.iter().rposition(|&b| b).unwrap_or(0)
        };
        Atom {
            level,
            field,
            members,
            infinite_candidate,
            stable_since_horizon,
        }
    }
}

/// Atoms of one level together with the horizon ball their members index.
#[derive(Clone, Debug)]
pub struct Atoms {
    pub ball: CayleyBall,
    pub atoms: Vec<Atom>,
}

impl Atoms {
    pub fn member_words<'a>(&'a self, atom: &'a Atom) -> impl Iterator<Item = &'a Word> + 'a {
        atom.members.iter().map(|&m| &self.ball.vertices[m as usize])
    }

    pub fn to_json(&self, p: &Presentation) -> serde_json::Value {
        let names = p.generator_names();
        serde_json::Value::Array(
            self.atoms
                .iter()
                .map(|a| {
                    serde_json::json!({
                        "level": a.level,
                        "field": a.field.encode(),
                        "members": self.member_words(a).map(|w| w.format(names)).collect::<Vec<_>>(),
                        "infinite_candidate": a.infinite_candidate,
                        "stable_since_horizon": a.stable_since_horizon,
                    })
                })
                .collect(),
        )
    }
}

/// Groups the vertices of `B_horizon` by the field they induce on `B_level`.
/// Returns the horizon ball, the edge count of `B_level`, and the groups in
/// ascending field order.
pub(crate) fn partition_by_field(
    p: &Presentation,
    level: usize,
    horizon: usize,
) -> Result<(CayleyBall, Vec<(VectorField, Vec<u32>)>)> {
    if horizon < level {
        return Err(Error::InvalidParameters("horizon must be at least the level".into()));
    }
    let id = Identifier::new(p)?;
    let (big, distances) = match id {
        Identifier::Free => (build_ball_with(p, horizon, &id), Distances::Free),
        Identifier::Dehn { .. } => {
            // geodesics between B_level and B_horizon stay inside B_{level + horizon}
            let big = build_ball_with(p, level + horizon, &id);
            let small = big.shells[level + 1];
            let rows = (0..small).map(|x| big.bfs(x)).collect();
            (big, Distances::Graph { rows })
        }
    };
    let ball = big.truncate(level);
    let horizon_len = big.shells[horizon + 1];
    let mut groups: BTreeMap<VectorField, Vec<u32>> = BTreeMap::new();
    for v in 0..horizon_len {
        groups
            .entry(distances.field(&ball, &big, v))
            .or_default()
            .push(v as u32);
    }
    let horizon_ball = if big.radius == horizon {
        big
    } else {
        big.truncate(horizon)
    };
    Ok((horizon_ball, groups.into_iter().collect()))
}

/// Partitions `B_horizon` into level-`n` atoms, ordered by field encoding.
pub fn enumerate_atoms(p: &Presentation, n: usize, horizon: usize) -> Result<Atoms> {
    let (ball, groups) = partition_by_field(p, n, horizon)?;
    let atoms = groups
        .into_iter()
        .map(|(f, m)| Atom::new(n, f, m, &ball))
        .collect();
    Ok(Atoms { ball, atoms })
}
