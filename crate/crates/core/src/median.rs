//! Finite median graphs: validation, wall extraction, medians, intervals,
//! hulls, Gromov products and horofunctions.
//!
//! Vertices are dense indices `0..n`. Every complex is validated on
//! construction and immutable afterwards, so it can be shared freely between
//! worker threads.

use std::collections::VecDeque;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bits::{self, BitRows};

pub type Vertex = usize;

/// Largest vertex count for which every triple is checked for a median.
pub const EXHAUSTIVE_MEDIAN_LIMIT: usize = 4000;
/// Number of random triples checked above [`EXHAUSTIVE_MEDIAN_LIMIT`].
pub const SAMPLED_MEDIAN_TRIPLES: u64 = 100_000;
const SAMPLING_SEED: u64 = 0x6d65_6469_616e;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComplexError {
    #[error("graph has no vertices")]
    Empty,
    #[error("vertex {0} is out of range")]
    VertexOutOfRange(Vertex),
    #[error("edge ({0}, {1}) is a loop or a duplicate")]
    InvalidEdge(Vertex, Vertex),
    #[error("graph is not connected: vertex {0} is unreachable from vertex 0")]
    NotConnected(Vertex),
    #[error("graph is not bipartite")]
    NotBipartite,
    #[error("triple {triple:?} has {medians} medians")]
    NotMedian {
        triple: (Vertex, Vertex, Vertex),
        medians: usize,
    },
    #[error("size budget exceeded: {0} vertices")]
    SizeBudgetExceeded(usize),
    #[error("vertex set is empty")]
    EmptySet,
    #[error("malformed complex file: {0}")]
    Format(String),
}

/// How the median property was established at build time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum MedianValidation {
    Exhaustive { triples: u64 },
    Sampled { triples: u64, seed: u64 },
}

/// A hyperplane of a finite complex, given as a bipartition of the vertices.
///
/// `side_zero` is the side containing vertex 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wall {
    pub id: usize,
    pub side_zero: Vec<Vertex>,
    pub side_one: Vec<Vertex>,
    pub dual_edges: Vec<(Vertex, Vertex)>,
}

/// One side of a wall. `side == false` is the side containing vertex 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Halfspace {
    pub wall: usize,
    pub side: bool,
}

impl Halfspace {
    pub fn new(wall: usize, side: bool) -> Self {
        Halfspace { wall, side }
    }

    pub fn complement(self) -> Self {
        Halfspace {
            wall: self.wall,
            side: !self.side,
        }
    }
}

/// Validated finite median graph with its walls and a cached distance table.
#[derive(Clone)]
pub struct FiniteMedianComplex {
    n: usize,
    adjacency: Vec<Vec<Vertex>>,
    edges: Vec<(Vertex, Vertex)>,
    edge_wall: Vec<usize>,
    dist: Vec<u16>,
    walls: Vec<Wall>,
    // vertex -> bit per wall, set when the vertex lies in side_one
    signs: BitRows,
    // wall -> bit per vertex, set for side_one
    sides: BitRows,
    lookup: FxHashMap<Vec<u64>, Vertex>,
    validation: MedianValidation,
}

impl fmt::Debug for FiniteMedianComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteMedianComplex")
            .field("vertices", &self.n)
            .field("edges", &self.edges.len())
            .field("walls", &self.walls.len())
            .field("validation", &self.validation)
            .finish()
    }
}

/// Interchange format: `{vertices, edges, walls?}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexFile {
    pub vertices: usize,
    pub edges: Vec<[Vertex; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub walls: Option<Vec<Vec<Vertex>>>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn bfs_distances(adjacency: &[Vec<Vertex>], source: Vertex, out: &mut [u16]) -> Option<Vertex> {
    const UNSEEN: u16 = u16::MAX;
    out.fill(UNSEEN);
    out[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        let dv = out[v];
        for &w in &adjacency[v] {
            if out[w] == UNSEEN {
                out[w] = dv + 1;
                queue.push_back(w);
            }
        }
    }
    out.iter().position(|&d| d == UNSEEN)
}

/// Validate `(vertices, edges)` as a median graph and extract its walls.
pub fn build_complex(vertices: usize, edges: &[(Vertex, Vertex)]) -> Result<FiniteMedianComplex, ComplexError> {
    FiniteMedianComplex::new(vertices, edges)
}

impl FiniteMedianComplex {
    pub fn new(n: usize, edge_list: &[(Vertex, Vertex)]) -> Result<Self, ComplexError> {
        if n == 0 {
            return Err(ComplexError::Empty);
        }
        if n >= u16::MAX as usize {
            return Err(ComplexError::SizeBudgetExceeded(n));
        }
        let mut adjacency = vec![Vec::new(); n];
        let mut edges = Vec::with_capacity(edge_list.len());
        for &(u, v) in edge_list {
            if u >= n {
                return Err(ComplexError::VertexOutOfRange(u));
            }
            if v >= n {
                return Err(ComplexError::VertexOutOfRange(v));
            }
            if u == v || adjacency[u].contains(&v) {
                return Err(ComplexError::InvalidEdge(u, v));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
            edges.push((u.min(v), u.max(v)));
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }

        let mut dist = vec![0u16; n * n];
        for s in 0..n {
            if let Some(missing) = bfs_distances(&adjacency, s, &mut dist[s * n..(s + 1) * n]) {
                return Err(ComplexError::NotConnected(missing));
            }
        }
        // bipartite iff no edge joins two vertices at equal distance from 0
        if edges.iter().any(|&(u, v)| dist[u] == dist[v]) {
            return Err(ComplexError::NotBipartite);
        }

        let d = |a: Vertex, b: Vertex| dist[a * n + b] as i64;

        // Djoković–Winkler relation, closed transitively.
        let m = edges.len();
        let mut uf = UnionFind::new(m);
        for i in 0..m {
            let (u, v) = edges[i];
            for j in (i + 1)..m {
                let (x, y) = edges[j];
                if d(u, x) + d(v, y) != d(u, y) + d(v, x) {
                    uf.union(i, j);
                }
            }
        }
        let mut class_of_root = FxHashMap::default();
        let mut edge_wall = vec![0usize; m];
        let mut class_edges: Vec<Vec<usize>> = Vec::new();
        for (i, slot) in edge_wall.iter_mut().enumerate() {
            let root = uf.find(i);
            let next = class_edges.len();
            let c = *class_of_root.entry(root).or_insert(next);
            if c == next {
                class_edges.push(Vec::new());
            }
            class_edges[c].push(i);
            *slot = c;
        }

        // Each class must be exactly the cut between the two sides of its
        // first edge; otherwise the graph is not a partial cube.
        let wall_count = class_edges.len();
        let mut sides = BitRows::new(wall_count, n);
        let mut walls = Vec::with_capacity(wall_count);
        for (id, members) in class_edges.iter().enumerate() {
            let (u, v) = edges[members[0]];
            let zero_is_u = d(0, u) < d(0, v);
            let mut side_zero = Vec::new();
            let mut side_one = Vec::new();
            for w in 0..n {
                let near_u = d(w, u) < d(w, v);
                if near_u == zero_is_u {
                    side_zero.push(w);
                } else {
                    side_one.push(w);
                    sides.set(id, w);
                }
            }
            let mut crossing = 0usize;
            for (e, &(x, y)) in edges.iter().enumerate() {
                if sides.get(id, x) != sides.get(id, y) {
                    crossing += 1;
                    if edge_wall[e] != id {
                        return Err(Self::not_median_witness(n, &dist));
                    }
                }
            }
            if crossing != members.len() {
                return Err(Self::not_median_witness(n, &dist));
            }
            walls.push(Wall {
                id,
                side_zero,
                side_one,
                dual_edges: members.iter().map(|&e| edges[e]).collect(),
            });
        }

        let mut signs = BitRows::new(n, wall_count);
        for w in 0..wall_count {
            for &v in &walls[w].side_one {
                signs.set(v, w);
            }
        }
        // Isometric embedding: graph distance equals the number of
        // separating walls. This also makes every side convex.
        for x in 0..n {
            for y in (x + 1)..n {
                if bits::xor_popcount(signs.row(x), signs.row(y)) as i64 != d(x, y) {
                    return Err(Self::not_median_witness(n, &dist));
                }
            }
        }

        let mut lookup = FxHashMap::default();
        lookup.reserve(n);
        for v in 0..n {
            lookup.insert(signs.row(v).to_vec(), v);
        }

        let mut complex = FiniteMedianComplex {
            n,
            adjacency,
            edges,
            edge_wall,
            dist,
            walls,
            signs,
            sides,
            lookup,
            validation: MedianValidation::Exhaustive { triples: 0 },
        };
        complex.validation = complex.check_median_property()?;
        Ok(complex)
    }

    /// In a partial cube the median of a triple, if any, is the vertex whose
    /// sign vector is the coordinatewise majority; it is then unique.
    fn check_median_property(&self) -> Result<MedianValidation, ComplexError> {
        let n = self.n;
        let mut buf = vec![0u64; self.signs.words()];
        let mut probe = |x: Vertex, y: Vertex, z: Vertex| -> Result<(), ComplexError> {
            majority_into(self.signs.row(x), self.signs.row(y), self.signs.row(z), &mut buf);
            if self.lookup.contains_key(buf.as_slice()) {
                Ok(())
            } else {
                Err(ComplexError::NotMedian {
                    triple: (x, y, z),
                    medians: 0,
                })
            }
        };
        if n <= EXHAUSTIVE_MEDIAN_LIMIT {
            let mut count = 0u64;
            for x in 0..n {
                for y in (x + 1)..n {
                    for z in (y + 1)..n {
                        probe(x, y, z)?;
                    }
                    count += (n - y - 1) as u64;
                }
            }
            Ok(MedianValidation::Exhaustive { triples: count })
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(SAMPLING_SEED);
            for _ in 0..SAMPLED_MEDIAN_TRIPLES {
                let (x, y, z) = (rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n));
                probe(x, y, z)?;
            }
            Ok(MedianValidation::Sampled {
                triples: SAMPLED_MEDIAN_TRIPLES,
                seed: SAMPLING_SEED,
            })
        }
    }

    fn not_median_witness(n: usize, dist: &[u16]) -> ComplexError {
        let d = |a: usize, b: usize| dist[a * n + b] as usize;
        for x in 0..n {
            for y in x..n {
                for z in y..n {
                    let count = (0..n)
                        .filter(|&w| {
                            d(x, w) + d(w, y) == d(x, y) && d(y, w) + d(w, z) == d(y, z) && d(x, w) + d(w, z) == d(x, z)
                        })
                        .count();
                    if count != 1 {
                        return ComplexError::NotMedian {
                            triple: (x, y, z),
                            medians: count,
                        };
                    }
                }
            }
        }
        unreachable!("a bipartite graph that is not a partial cube has a triple without a unique median")
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adjacency[v]
    }

    pub fn adjacency(&self) -> &[Vec<Vertex>] {
        &self.adjacency
    }

    pub fn walls(&self) -> &[Wall] {
        &self.walls
    }

    pub fn wall_count(&self) -> usize {
        self.walls.len()
    }

    /// Wall dual to the edge with index `e` in [`Self::edges`].
    pub fn edge_wall(&self, e: usize) -> usize {
        self.edge_wall[e]
    }

    /// Wall dual to the edge `{u, v}`, if that edge exists.
    pub fn wall_of_edge(&self, u: Vertex, v: Vertex) -> Option<usize> {
        let key = (u.min(v), u.max(v));
        self.edges.iter().position(|&e| e == key).map(|e| self.edge_wall[e])
    }

    pub fn validation(&self) -> MedianValidation {
        self.validation
    }

    fn check(&self, v: Vertex) -> Result<(), ComplexError> {
        if v < self.n {
            Ok(())
        } else {
            Err(ComplexError::VertexOutOfRange(v))
        }
    }

    #[inline]
    pub fn distance(&self, x: Vertex, y: Vertex) -> usize {
        self.dist[x * self.n + y] as usize
    }

    pub fn dist(&self, x: Vertex, y: Vertex) -> Result<usize, ComplexError> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.distance(x, y))
    }

    /// Whether `v` lies in side one of `wall`.
    #[inline]
    pub fn side_of(&self, v: Vertex, wall: usize) -> bool {
        self.signs.get(v, wall)
    }

    #[inline]
    pub fn contains(&self, h: Halfspace, v: Vertex) -> bool {
        self.side_of(v, h.wall) == h.side
    }

    /// Vertex bitset of side one of `wall`.
    pub(crate) fn side_bits(&self, wall: usize) -> &[u64] {
        self.sides.row(wall)
    }

    pub(crate) fn side_tail_mask(&self) -> u64 {
        self.sides.tail_mask()
    }

    pub(crate) fn sign_row(&self, v: Vertex) -> &[u64] {
        self.signs.row(v)
    }

    /// Walls separating `x` from `y`, in increasing id order.
    pub fn separating_walls(&self, x: Vertex, y: Vertex) -> Vec<usize> {
        let (a, b) = (self.signs.row(x), self.signs.row(y));
        let diff: Vec<u64> = a.iter().zip(b).map(|(p, q)| p ^ q).collect();
        bits::iter_ones(&diff).collect()
    }

    /// Walls dual to edges incident to `x`.
    pub fn adjacent_walls(&self, x: Vertex) -> Vec<usize> {
        let mut out: Vec<usize> = self.adjacency[x]
            .iter()
            .map(|&y| self.separating_walls(x, y)[0])
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Vertices incident to an edge dual to `wall`.
    pub fn carrier(&self, wall: usize) -> Vec<Vertex> {
        let mut out: Vec<Vertex> = self.walls[wall].dual_edges.iter().flat_map(|&(u, v)| [u, v]).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Median by half-space majority.
    pub fn median(&self, x: Vertex, y: Vertex, z: Vertex) -> Result<Vertex, ComplexError> {
        self.check(x)?;
        self.check(y)?;
        self.check(z)?;
        Ok(self.median_unchecked(x, y, z))
    }

    pub(crate) fn median_unchecked(&self, x: Vertex, y: Vertex, z: Vertex) -> Vertex {
        let words = self.signs.words();
        let mut small = [0u64; 8];
        let mut large = Vec::new();
        let buf: &mut [u64] = if words <= small.len() {
            &mut small[..words]
        } else {
            large.resize(words, 0);
            &mut large
        };
        majority_into(self.signs.row(x), self.signs.row(y), self.signs.row(z), buf);
        *self.lookup.get(&*buf).expect("validated complex has a median for every triple")
    }

    /// All vertices of `I(x,y) ∩ I(y,z) ∩ I(x,z)`; exactly one on a median graph.
    pub fn median_by_intervals(&self, x: Vertex, y: Vertex, z: Vertex) -> Result<Vec<Vertex>, ComplexError> {
        self.check(x)?;
        self.check(y)?;
        self.check(z)?;
        let d = |a, b| self.distance(a, b);
        Ok((0..self.n)
            .filter(|&w| d(x, w) + d(w, y) == d(x, y) && d(y, w) + d(w, z) == d(y, z) && d(x, w) + d(w, z) == d(x, z))
            .collect())
    }

    /// `{w : d(x,w) + d(w,y) = d(x,y)}`, sorted.
    pub fn interval(&self, x: Vertex, y: Vertex) -> Result<Vec<Vertex>, ComplexError> {
        self.check(x)?;
        self.check(y)?;
        let dxy = self.distance(x, y);
        let out: Vec<Vertex> = (0..self.n)
            .filter(|&w| self.distance(x, w) + self.distance(w, y) == dxy)
            .collect();
        debug_assert_eq!(out, self.interval_by_halfspaces(x, y));
        Ok(out)
    }

    /// Intersection of all half-spaces containing both `x` and `y`.
    pub fn interval_by_halfspaces(&self, x: Vertex, y: Vertex) -> Vec<Vertex> {
        let (sx, sy) = (self.signs.row(x), self.signs.row(y));
        let agree: Vec<u64> = sx.iter().zip(sy).map(|(a, b)| !(a ^ b)).collect();
        (0..self.n)
            .filter(|&w| {
                self.signs
                    .row(w)
                    .iter()
                    .zip(sx)
                    .zip(&agree)
                    .all(|((sw, sx), mask)| (sw ^ sx) & mask == 0)
            })
            .collect()
    }

    /// Smallest interval-closed superset of `set`, by iterated interval closure.
    pub fn convex_hull(&self, set: &[Vertex]) -> Result<Vec<Vertex>, ComplexError> {
        if set.is_empty() {
            return Err(ComplexError::EmptySet);
        }
        for &v in set {
            self.check(v)?;
        }
        let mut inside = vec![false; self.n];
        let mut members = Vec::new();
        let mut queue = VecDeque::new();
        for &v in set {
            if !inside[v] {
                inside[v] = true;
                queue.push_back(v);
            }
        }
        while let Some(v) = queue.pop_front() {
            for &u in &members {
                let duv = self.distance(u, v);
                for w in 0..self.n {
                    if !inside[w] && self.distance(u, w) + self.distance(w, v) == duv {
                        inside[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            members.push(v);
        }
        members.sort_unstable();
        Ok(members)
    }

    /// `(x|y)_o = d(o, m(x, y, o))`.
    pub fn gromov_product(&self, x: Vertex, y: Vertex, o: Vertex) -> Result<usize, ComplexError> {
        let m = self.median(x, y, o)?;
        Ok(self.distance(o, m))
    }

    /// `h_x(a) = d(o,a) - 2 (a|x)_o`.
    pub fn horofunction(&self, x: Vertex, o: Vertex, a: Vertex) -> Result<i64, ComplexError> {
        let g = self.gromov_product(a, x, o)?;
        Ok(self.distance(o, a) as i64 - 2 * g as i64)
    }

    pub fn to_file(&self, with_walls: bool) -> ComplexFile {
        ComplexFile {
            vertices: self.n,
            edges: self.edges.iter().map(|&(u, v)| [u, v]).collect(),
            walls: with_walls.then(|| self.walls.iter().map(|w| w.side_zero.clone()).collect()),
        }
    }

    pub fn from_file(file: &ComplexFile) -> Result<Self, ComplexError> {
        let edges: Vec<(Vertex, Vertex)> = file.edges.iter().map(|e| (e[0], e[1])).collect();
        let complex = Self::new(file.vertices, &edges)?;
        if let Some(walls) = &file.walls {
            let mut given: Vec<Vec<Vertex>> = walls.iter().map(|w| canonical_side(w, file.vertices)).collect();
            let mut ours: Vec<Vec<Vertex>> = complex.walls.iter().map(|w| w.side_zero.clone()).collect();
            given.sort();
            ours.sort();
            if given != ours {
                return Err(ComplexError::Format("listed walls disagree with the extracted walls".into()));
            }
        }
        Ok(complex)
    }

    pub fn to_json(&self, with_walls: bool) -> String {
        serde_json::to_string(&self.to_file(with_walls)).expect("complex serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ComplexError> {
        let file: ComplexFile = serde_json::from_str(text).map_err(|e| ComplexError::Format(e.to_string()))?;
        Self::from_file(&file)
    }

    /// SHA-256 of the edge-list interchange form.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.to_json(false).as_bytes());
        hex::encode(hasher.finalize())
    }
}

/// The side listed for a wall may be either side; normalise to the one holding vertex 0.
fn canonical_side(side: &[Vertex], n: usize) -> Vec<Vertex> {
    let mut s = side.to_vec();
    s.sort_unstable();
    if s.first() == Some(&0) {
        s
    } else {
        let mut mark = vec![false; n];
        for &v in &s {
            if v < n {
                mark[v] = true;
            }
        }
        (0..n).filter(|&v| !mark[v]).collect()
    }
}

#[inline]
fn majority_into(a: &[u64], b: &[u64], c: &[u64], out: &mut [u64]) {
    for i in 0..out.len() {
        out[i] = (a[i] & b[i]) | (b[i] & c[i]) | (a[i] & c[i]);
    }
}
