//! Wall-pair geometry of finite complexes: transversality, nesting, strong
//! separation, the contact graph, and exhaustive checks of the combinatorial
//! lemmas built on them.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::bits::{self, BitRows};
use crate::median::{FiniteMedianComplex, Halfspace, Vertex};
use crate::report::VerificationReport;

/// Separating-wall count up to which `max_ss_set` is cross-checked by brute force.
pub const CLIQUE_CROSSCHECK_LIMIT: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WallGeomError {
    #[error("wall {0} is out of range")]
    WallOutOfRange(usize),
    #[error("vertex {0} is out of range")]
    VertexOutOfRange(Vertex),
    #[error("contact graph is disconnected: {0}")]
    IntegrityFailure(String),
    #[error("chain is invalid: {0}")]
    ChainInvalid(String),
    #[error("no hierarchy path from {0} to {1}")]
    NotFound(Vertex, Vertex),
    #[error("graph is disconnected")]
    Disconnected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WallRelation {
    Equal,
    Transverse,
    TightlyNested,
    NestedLoose,
}

#[inline]
fn halfspace_word(c: &FiniteMedianComplex, h: Halfspace, i: usize, last: usize) -> u64 {
    let w = c.side_bits(h.wall)[i];
    if h.side {
        w
    } else if i == last {
        !w & c.side_tail_mask()
    } else {
        !w
    }
}

fn halfspaces_intersect(c: &FiniteMedianComplex, a: Halfspace, b: Halfspace) -> bool {
    let words = c.side_bits(a.wall).len();
    (0..words).any(|i| halfspace_word(c, a, i, words - 1) & halfspace_word(c, b, i, words - 1) != 0)
}

/// `a ⊆ b` as vertex sets.
pub fn halfspace_subset(c: &FiniteMedianComplex, a: Halfspace, b: Halfspace) -> bool {
    let words = c.side_bits(a.wall).len();
    (0..words).all(|i| halfspace_word(c, a, i, words - 1) & !halfspace_word(c, b, i, words - 1) == 0)
}

fn check_wall(c: &FiniteMedianComplex, w: usize) -> Result<(), WallGeomError> {
    if w < c.wall_count() {
        Ok(())
    } else {
        Err(WallGeomError::WallOutOfRange(w))
    }
}

fn check_vertex(c: &FiniteMedianComplex, v: Vertex) -> Result<(), WallGeomError> {
    if v < c.vertex_count() {
        Ok(())
    } else {
        Err(WallGeomError::VertexOutOfRange(v))
    }
}

/// All four quadrants of the two walls are nonempty.
pub fn transverse(c: &FiniteMedianComplex, w1: usize, w2: usize) -> bool {
    w1 != w2
        && [(false, false), (false, true), (true, false), (true, true)]
            .into_iter()
            .all(|(s, t)| halfspaces_intersect(c, Halfspace::new(w1, s), Halfspace::new(w2, t)))
}

/// For distinct parallel walls, the half-spaces `(h, k)` with `h ⊊ k`,
/// `h` bounded by `w1` and `k` by `w2`.
pub fn nesting(c: &FiniteMedianComplex, w1: usize, w2: usize) -> Option<(Halfspace, Halfspace)> {
    if w1 == w2 {
        return None;
    }
    for s in [false, true] {
        for t in [false, true] {
            let h = Halfspace::new(w1, s);
            let k = Halfspace::new(w2, t);
            if !halfspaces_intersect(c, h, k.complement()) {
                return Some((h, k));
            }
        }
    }
    None
}

/// Number of walls with a half-space properly between `h ⊊ k`.
fn walls_between(c: &FiniteMedianComplex, h: Halfspace, k: Halfspace) -> usize {
    (0..c.wall_count())
        .filter(|&l| l != h.wall && l != k.wall)
        .filter(|&l| {
            [false, true].into_iter().any(|s| {
                let m = Halfspace::new(l, s);
                halfspace_subset(c, h, m) && halfspace_subset(c, m, k)
            })
        })
        .count()
}

pub fn wall_relation(c: &FiniteMedianComplex, w1: usize, w2: usize) -> Result<WallRelation, WallGeomError> {
    check_wall(c, w1)?;
    check_wall(c, w2)?;
    Ok(relation_unchecked(c, w1, w2))
}

fn relation_unchecked(c: &FiniteMedianComplex, w1: usize, w2: usize) -> WallRelation {
    if w1 == w2 {
        return WallRelation::Equal;
    }
    match nesting(c, w1, w2) {
        None => WallRelation::Transverse,
        Some((h, k)) if walls_between(c, h, k) == 0 => WallRelation::TightlyNested,
        Some(_) => WallRelation::NestedLoose,
    }
}

/// Parallel, distinct, and no wall transverse to both; by exhaustive scan.
pub fn strongly_separated(c: &FiniteMedianComplex, w1: usize, w2: usize) -> Result<bool, WallGeomError> {
    check_wall(c, w1)?;
    check_wall(c, w2)?;
    if w1 == w2 || transverse(c, w1, w2) {
        return Ok(false);
    }
    Ok(!(0..c.wall_count()).any(|l| transverse(c, l, w1) && transverse(c, l, w2)))
}

/// Contact graph on the walls: adjacency is transverse or tightly nested.
#[derive(Debug, Clone)]
pub struct ContactGraph {
    adjacency: Vec<Vec<usize>>,
    dist: Vec<u32>,
}

impl ContactGraph {
    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    #[inline]
    pub fn distance(&self, a: usize, b: usize) -> usize {
        self.dist[a * self.adjacency.len() + b] as usize
    }

    fn check(&self, w: usize) -> Result<(), WallGeomError> {
        if w < self.node_count() {
            Ok(())
        } else {
            Err(WallGeomError::WallOutOfRange(w))
        }
    }

    pub fn diameter(&self) -> usize {
        self.dist.iter().copied().max().unwrap_or(0) as usize
    }
}

pub fn cx_distance(cg: &ContactGraph, w1: usize, w2: usize) -> Result<usize, WallGeomError> {
    cg.check(w1)?;
    cg.check(w2)?;
    Ok(cg.distance(w1, w2))
}

/// Twice the Gromov product `(w1|w2)_base` in the contact graph.
pub fn cx_gromov_doubled(cg: &ContactGraph, w1: usize, w2: usize, base: usize) -> Result<usize, WallGeomError> {
    cg.check(w1)?;
    cg.check(w2)?;
    cg.check(base)?;
    Ok(cg.distance(w1, base) + cg.distance(w2, base) - cg.distance(w1, w2))
}

/// Gromov product in the contact graph, rounded down.
pub fn cx_gromov(cg: &ContactGraph, w1: usize, w2: usize, base: usize) -> Result<usize, WallGeomError> {
    Ok(cx_gromov_doubled(cg, w1, w2, base)? / 2)
}

/// All pairwise wall data of a complex, computed once.
pub struct WallGeometry<'a> {
    complex: &'a FiniteMedianComplex,
    relation: Vec<WallRelation>,
    transverse: BitRows,
    ss: BitRows,
    contact: ContactGraph,
    carriers: BitRows,
}

impl<'a> WallGeometry<'a> {
    pub fn new(c: &'a FiniteMedianComplex) -> Result<Self, WallGeomError> {
        let w = c.wall_count();
        let mut relation = vec![WallRelation::Equal; w * w];
        let mut trans = BitRows::new(w, w);
        for a in 0..w {
            for b in (a + 1)..w {
                let r = relation_unchecked(c, a, b);
                relation[a * w + b] = r;
                relation[b * w + a] = r;
                if r == WallRelation::Transverse {
                    trans.set(a, b);
                    trans.set(b, a);
                }
            }
        }
        let mut ss = BitRows::new(w, w);
        for a in 0..w {
            for b in (a + 1)..w {
                let parallel = !trans.get(a, b);
                let shared = trans.row(a).iter().zip(trans.row(b)).any(|(x, y)| x & y != 0);
                if parallel && !shared {
                    ss.set(a, b);
                    ss.set(b, a);
                }
            }
        }
        let adjacency: Vec<Vec<usize>> = (0..w)
            .map(|a| {
                (0..w)
                    .filter(|&b| {
                        matches!(relation[a * w + b], WallRelation::Transverse | WallRelation::TightlyNested)
                    })
                    .collect()
            })
            .collect();
        let dist = all_pairs_bfs(&adjacency).ok_or_else(|| {
            WallGeomError::IntegrityFailure(format!("contact graph of a complex with {w} walls is disconnected"))
        })?;
        let contact = ContactGraph { adjacency, dist };
        let mut carriers = BitRows::new(w, c.vertex_count());
        for wall in 0..w {
            for v in c.carrier(wall) {
                carriers.set(wall, v);
            }
        }
        Ok(WallGeometry {
            complex: c,
            relation,
            transverse: trans,
            ss,
            contact,
            carriers,
        })
    }

    pub fn complex(&self) -> &FiniteMedianComplex {
        self.complex
    }

    pub fn wall_count(&self) -> usize {
        self.complex.wall_count()
    }

    pub fn relation(&self, a: usize, b: usize) -> WallRelation {
        self.relation[a * self.wall_count() + b]
    }

    pub fn is_transverse(&self, a: usize, b: usize) -> bool {
        self.transverse.get(a, b)
    }

    pub fn is_strongly_separated(&self, a: usize, b: usize) -> bool {
        self.ss.get(a, b)
    }

    pub fn contact_graph(&self) -> &ContactGraph {
        &self.contact
    }

    pub fn in_carrier(&self, wall: usize, v: Vertex) -> bool {
        self.carriers.get(wall, v)
    }

    /// Separating walls of `x, y`, as the half-spaces containing `y`,
    /// ordered from the `x` end (largest) towards `y`.
    fn oriented_separating(&self, x: Vertex, y: Vertex) -> Vec<Halfspace> {
        let c = self.complex;
        let mut hs: Vec<Halfspace> = c
            .separating_walls(x, y)
            .into_iter()
            .map(|w| Halfspace::new(w, c.side_of(y, w)))
            .collect();
        // d(x, h) orders nested members: the half-space closer to x is larger
        let dist_from_x = |h: &Halfspace| {
            (0..c.vertex_count())
                .filter(|&v| c.contains(*h, v))
                .map(|v| c.distance(x, v))
                .min()
                .unwrap_or(0)
        };
        hs.sort_by_key(|h| (dist_from_x(h), h.wall));
        hs
    }

    /// A longest chain of separating walls with consecutive members strongly
    /// separated; by transitivity the members are pairwise strongly separated.
    pub fn max_ss_chain(&self, x: Vertex, y: Vertex) -> Result<Vec<Halfspace>, WallGeomError> {
        check_vertex(self.complex, x)?;
        check_vertex(self.complex, y)?;
        let hs = self.oriented_separating(x, y);
        let k = hs.len();
        if k == 0 {
            return Ok(Vec::new());
        }
        let mut best = vec![1usize; k];
        let mut prev = vec![usize::MAX; k];
        for j in 0..k {
            for i in 0..j {
                if self.is_strongly_separated(hs[i].wall, hs[j].wall) && best[i] + 1 > best[j] {
                    best[j] = best[i] + 1;
                    prev[j] = i;
                }
            }
        }
        let mut j = (0..k).max_by_key(|&j| (best[j], std::cmp::Reverse(j))).unwrap();
        let mut chain = vec![hs[j]];
        while prev[j] != usize::MAX {
            j = prev[j];
            chain.push(hs[j]);
        }
        chain.reverse();
        Ok(chain)
    }

    /// Maximum size of a pairwise strongly separated set of walls separating
    /// `x` from `y`. Below [`CLIQUE_CROSSCHECK_LIMIT`] separating walls the
    /// chain value is compared with a brute-force clique search; on
    /// disagreement the clique value wins and the event is logged.
    pub fn max_ss_set(&self, x: Vertex, y: Vertex) -> Result<usize, WallGeomError> {
        let chain = self.max_ss_chain(x, y)?.len();
        let sep = self.complex.separating_walls(x, y);
        if sep.len() <= CLIQUE_CROSSCHECK_LIMIT {
            let clique = self.max_ss_clique(&sep);
            if clique != chain {
                log::warn!("max_ss_set chain value {chain} disagrees with clique value {clique} for ({x}, {y})");
                return Ok(clique);
            }
        }
        Ok(chain)
    }

    /// Brute-force maximum clique of the strong-separation graph on `walls`.
    pub fn max_ss_clique(&self, walls: &[usize]) -> usize {
        fn grow(g: &WallGeometry<'_>, walls: &[usize], chosen: &mut Vec<usize>, start: usize, best: &mut usize) {
            *best = (*best).max(chosen.len());
            if chosen.len() + (walls.len() - start) <= *best {
                return;
            }
            for i in start..walls.len() {
                if chosen.iter().all(|&c| g.is_strongly_separated(c, walls[i])) {
                    chosen.push(walls[i]);
                    grow(g, walls, chosen, i + 1, best);
                    chosen.pop();
                }
            }
        }
        let mut best = 0;
        grow(self, walls, &mut Vec::new(), 0, &mut best);
        best
    }

    /// Nested triples `a ⊃ b ⊃ d` whose consecutive pairs are strongly
    /// separated but whose ends are not.
    pub fn chain_transitivity_failures(&self) -> Vec<(usize, usize, usize)> {
        let c = self.complex;
        let w = self.wall_count();
        let mut out = Vec::new();
        for a in 0..w {
            for b in 0..w {
                if !self.is_strongly_separated(a, b) {
                    continue;
                }
                for d in 0..w {
                    if d == a || !self.is_strongly_separated(b, d) || self.is_strongly_separated(a, d) {
                        continue;
                    }
                    if let (Some((hb, _)), Some((_, hb2))) = (nesting(c, b, a), nesting(c, d, b)) {
                        if hb == hb2 {
                            out.push((a, b, d));
                        }
                    }
                }
            }
        }
        out
    }

    /// Pairs at contact distance at least 3 that fail strong separation.
    pub fn verify_remark_ss(&self) -> RemarkSsReport {
        let w = self.wall_count();
        let mut report = RemarkSsReport::default();
        for a in 0..w {
            for b in (a + 1)..w {
                report.pairs_checked += 1;
                let d = self.contact.distance(a, b);
                let ss = self.is_strongly_separated(a, b);
                if d >= 3 && !ss && report.counterexample.is_none() {
                    report.counterexample = Some((a, b));
                }
                // prefer the converse witness furthest apart in the contact graph
                if d <= 2 && ss && report.converse_witness.is_none_or(|(p, q)| self.contact.distance(p, q) < d) {
                    report.converse_witness = Some((a, b));
                }
            }
        }
        report
    }

    /// Walls adjacent to `x` form a clique of the contact graph.
    pub fn projection(&self, x: Vertex) -> Vec<usize> {
        self.complex.adjacent_walls(x)
    }

    pub fn clique_distance(&self, a: &[usize], b: &[usize]) -> usize {
        a.iter()
            .flat_map(|&p| b.iter().map(move |&q| (p, q)))
            .map(|(p, q)| self.contact.distance(p, q))
            .min()
            .unwrap_or(0)
    }

    pub fn verify_projection_lemma(&self, trials: usize, threshold: usize, seed: u64) -> VerificationReport {
        assert!(threshold >= 3, "projection lemma threshold must be at least 3");
        let c = self.complex;
        let n = c.vertex_count();
        let mut report = VerificationReport::new("projection_lemma", c);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..trials {
            let (x, y) = (rng.random_range(0..n), rng.random_range(0..n));
            let dcx = self.clique_distance(&self.projection(x), &self.projection(y));
            let d = c.distance(x, y);
            report.cases_checked += 1;
            if dcx > d {
                report.violation(json!({"clause": 1, "x": x, "y": y, "d_cx": dcx, "d": d}));
            }
            if dcx >= threshold {
                let s = self.max_ss_set(x, y).expect("vertices in range");
                if s < threshold / 3 {
                    report.violation(json!({"clause": 2, "x": x, "y": y, "d_cx": dcx, "ss": s}));
                }
            }
        }
        report
    }

    /// Search for a geodesic from `x` to `y` split into carrier segments
    /// whose walls form a contact-graph geodesic.
    pub fn hierarchy_path_search(&self, x: Vertex, y: Vertex) -> Result<HierarchyPath, WallGeomError> {
        let c = self.complex;
        check_vertex(c, x)?;
        check_vertex(c, y)?;
        if x == y {
            return Ok(HierarchyPath {
                geodesic: vec![x],
                segments: Vec::new(),
            });
        }
        let n = c.vertex_count();
        let w = self.wall_count();
        for h0 in self.projection(x) {
            // state index: vertex * w + wall
            let mut parent = vec![usize::MAX; n * w];
            let start = x * w + h0;
            parent[start] = start;
            let mut queue = VecDeque::from([start]);
            let mut goal = None;
            while let Some(s) = queue.pop_front() {
                let (p, h) = (s / w, s % w);
                if p == y {
                    goal = Some(s);
                    break;
                }
                let level = self.contact.distance(h0, h);
                let dpy = c.distance(p, y);
                for &q in c.neighbors(p) {
                    if c.distance(q, y) + 1 == dpy && self.in_carrier(h, q) && self.in_carrier(h, p) {
                        let t = q * w + h;
                        if parent[t] == usize::MAX {
                            parent[t] = s;
                            queue.push_back(t);
                        }
                    }
                }
                for &h2 in &self.contact.adjacency[h] {
                    if self.in_carrier(h2, p) && self.contact.distance(h0, h2) == level + 1 {
                        let t = p * w + h2;
                        if parent[t] == usize::MAX {
                            parent[t] = s;
                            queue.push_back(t);
                        }
                    }
                }
            }
            if let Some(mut s) = goal {
                let mut states = vec![s];
                while parent[s] != s {
                    s = parent[s];
                    states.push(s);
                }
                states.reverse();
                let mut geodesic = vec![x];
                let mut segments: Vec<HierarchySegment> = vec![HierarchySegment {
                    wall: h0,
                    vertices: vec![x],
                }];
                for pair in states.windows(2) {
                    let (p1, h1) = (pair[0] / w, pair[0] % w);
                    let (p2, h2) = (pair[1] / w, pair[1] % w);
                    if h1 != h2 {
                        segments.push(HierarchySegment {
                            wall: h2,
                            vertices: vec![p2],
                        });
                    } else if p1 != p2 {
                        geodesic.push(p2);
                        segments.last_mut().unwrap().vertices.push(p2);
                    }
                }
                return Ok(HierarchyPath { geodesic, segments });
            }
        }
        Err(WallGeomError::NotFound(x, y))
    }

    /// Checks a hierarchy path against its defining properties.
    pub fn hierarchy_path_is_valid(&self, path: &HierarchyPath, x: Vertex, y: Vertex) -> bool {
        let c = self.complex;
        let g = &path.geodesic;
        if g.first() != Some(&x) || g.last() != Some(&y) || g.len() != c.distance(x, y) + 1 {
            return false;
        }
        if g.windows(2).any(|e| c.distance(e[0], e[1]) != 1) {
            return false;
        }
        if x == y {
            return path.segments.is_empty();
        }
        let walls: Vec<usize> = path.segments.iter().map(|s| s.wall).collect();
        let k = walls.len() - 1;
        if self.contact.distance(walls[0], walls[k]) != k {
            return false;
        }
        if walls.windows(2).any(|p| !self.contact.adjacent(p[0], p[1])) {
            return false;
        }
        let mut joined: Vec<Vertex> = Vec::new();
        for (i, seg) in path.segments.iter().enumerate() {
            if seg.vertices.iter().any(|&v| !self.in_carrier(seg.wall, v)) {
                return false;
            }
            if i == 0 {
                joined.extend(&seg.vertices);
            } else {
                if joined.last() != seg.vertices.first() {
                    return false;
                }
                joined.extend(&seg.vertices[1..]);
            }
        }
        &joined == g
    }

    /// Contact-graph Gromov-product bounds along a decreasing chain of
    /// pairwise strongly separated half-spaces.
    pub fn verify_chain_gromov(&self, chain: &[Halfspace]) -> Result<VerificationReport, WallGeomError> {
        let c = self.complex;
        for h in chain {
            check_wall(c, h.wall)?;
        }
        for (i, pair) in chain.windows(2).enumerate() {
            if pair[0].wall == pair[1].wall || !halfspace_subset(c, pair[1], pair[0]) {
                return Err(WallGeomError::ChainInvalid(format!("members {i} and {} are not strictly nested", i + 1)));
            }
        }
        for i in 0..chain.len() {
            for j in (i + 1)..chain.len() {
                if !self.is_strongly_separated(chain[i].wall, chain[j].wall) {
                    return Err(WallGeomError::ChainInvalid(format!(
                        "members {i} and {j} are not strongly separated"
                    )));
                }
            }
        }
        let mut report = VerificationReport::new("chain_gromov", c);
        let cg = &self.contact;
        let walls: Vec<usize> = chain.iter().map(|h| h.wall).collect();
        let last = walls.len().saturating_sub(1);
        for n in 0..walls.len() {
            for m in 0..walls.len() {
                report.cases_checked += 1;
                let doubled = cx_gromov_doubled(cg, walls[n], walls[m], walls[0])? as i64;
                if doubled < 2 * (n.min(m) as i64 - 3) {
                    report.violation(json!({"bound": "lower", "n": n, "m": m, "doubled_product": doubled}));
                }
            }
        }
        for k in 1..last {
            report.cases_checked += 1;
            let doubled = cx_gromov_doubled(cg, walls[0], walls[last], walls[k])?;
            if doubled > 6 {
                report.violation(json!({"bound": "upper", "k": k, "doubled_product": doubled}));
            }
        }
        Ok(report)
    }

    /// Checks the box lemma for quadruples `(o, x, y, z)`.
    pub fn verify_box_lemma(&self, mode: BoxLemmaMode) -> VerificationReport {
        let c = self.complex;
        let n = c.vertex_count();
        let mut report = VerificationReport::new("box_lemma", c);
        let medians = MedianTable::new(c);
        let check = |o: Vertex, x: Vertex, y: Vertex, z: Vertex, report: &mut VerificationReport| {
            let m1 = medians.get(o, z, y);
            let m2 = medians.get(o, z, x);
            let m3 = medians.get(o, m1, m2);
            let m4 = medians.get(o, x, y);
            report.cases_checked += 1;
            if let Some((h1, h2)) = self.box_hypothesis(o, z, m2, m3) {
                report.hypothesis_cases += 1;
                if m1 != m3 || m1 != m4 {
                    report.violation(json!({
                        "o": o, "x": x, "y": y, "z": z,
                        "m1": m1, "m3": m3, "m4": m4,
                        "h1": h1, "h2": h2,
                    }));
                }
            }
        };
        match mode {
            BoxLemmaMode::Exhaustive => {
                for o in 0..n {
                    for z in 0..n {
                        for x in 0..n {
                            for y in 0..n {
                                check(o, x, y, z, &mut report);
                            }
                        }
                    }
                }
            }
            BoxLemmaMode::Sampled { quadruples, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for _ in 0..quadruples {
                    let q: [Vertex; 4] = std::array::from_fn(|_| rng.random_range(0..n));
                    check(q[0], q[1], q[2], q[3], &mut report);
                }
            }
        }
        report
    }

    /// A strongly separated pair `h1 ⊂ h2` with `z, m2 ∈ h1` and `o, m3 ∉ h2`.
    fn box_hypothesis(&self, o: Vertex, z: Vertex, m2: Vertex, m3: Vertex) -> Option<(Halfspace, Halfspace)> {
        let c = self.complex;
        let (so, sz, sm2, sm3) = (c.sign_row(o), c.sign_row(z), c.sign_row(m2), c.sign_row(m3));
        let words = so.len();
        let mut sep = vec![0u64; words];
        for i in 0..words {
            sep[i] = !(sz[i] ^ sm2[i]) & !(so[i] ^ sm3[i]) & (sz[i] ^ so[i]);
        }
        if bits::popcount(&sep) < 2 {
            return None;
        }
        for a in bits::iter_ones(&sep) {
            let hit = self.ss.row(a).iter().zip(&sep).position(|(s, t)| s & t != 0);
            if let Some(word) = hit {
                let b = word * 64 + (self.ss.row(a)[word] & sep[word]).trailing_zeros() as usize;
                let ha = Halfspace::new(a, c.side_of(z, a));
                let hb = Halfspace::new(b, c.side_of(z, b));
                return Some(if halfspace_subset(c, ha, hb) { (ha, hb) } else { (hb, ha) });
            }
        }
        None
    }
}

/// Precomputed medians for small complexes; falls back to lookups otherwise.
struct MedianTable<'a> {
    complex: &'a FiniteMedianComplex,
    table: Option<Vec<u16>>,
}

impl<'a> MedianTable<'a> {
    const LIMIT: usize = 128;

    fn new(c: &'a FiniteMedianComplex) -> Self {
        let n = c.vertex_count();
        let table = (n <= Self::LIMIT).then(|| {
            let mut t = vec![0u16; n * n * n];
            for a in 0..n {
                for b in 0..n {
                    for d in 0..n {
                        t[(a * n + b) * n + d] = c.median_unchecked(a, b, d) as u16;
                    }
                }
            }
            t
        });
        MedianTable { complex: c, table }
    }

    #[inline]
    fn get(&self, a: Vertex, b: Vertex, d: Vertex) -> Vertex {
        match &self.table {
            Some(t) => {
                let n = self.complex.vertex_count();
                t[(a * n + b) * n + d] as Vertex
            }
            None => self.complex.median_unchecked(a, b, d),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum BoxLemmaMode {
    Exhaustive,
    Sampled { quadruples: u64, seed: u64 },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemarkSsReport {
    pub pairs_checked: u64,
    /// A pair at contact distance ≥ 3 that is not strongly separated.
    pub counterexample: Option<(usize, usize)>,
    /// A strongly separated pair at contact distance ≤ 2 (the converse fails).
    pub converse_witness: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HierarchySegment {
    pub wall: usize,
    pub vertices: Vec<Vertex>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HierarchyPath {
    pub geodesic: Vec<Vertex>,
    pub segments: Vec<HierarchySegment>,
}

impl HierarchyPath {
    pub fn walls(&self) -> Vec<usize> {
        self.segments.iter().map(|s| s.wall).collect()
    }
}

pub fn contact_graph(c: &FiniteMedianComplex) -> Result<ContactGraph, WallGeomError> {
    Ok(WallGeometry::new(c)?.contact)
}

pub fn max_ss_set(c: &FiniteMedianComplex, x: Vertex, y: Vertex) -> Result<usize, WallGeomError> {
    WallGeometry::new(c)?.max_ss_set(x, y)
}

pub fn verify_remark_ss(c: &FiniteMedianComplex) -> Result<RemarkSsReport, WallGeomError> {
    Ok(WallGeometry::new(c)?.verify_remark_ss())
}

pub fn verify_box_lemma(c: &FiniteMedianComplex, mode: BoxLemmaMode) -> Result<VerificationReport, WallGeomError> {
    Ok(WallGeometry::new(c)?.verify_box_lemma(mode))
}

pub fn hierarchy_path_search(c: &FiniteMedianComplex, x: Vertex, y: Vertex) -> Result<HierarchyPath, WallGeomError> {
    WallGeometry::new(c)?.hierarchy_path_search(x, y)
}

fn all_pairs_bfs(adjacency: &[Vec<usize>]) -> Option<Vec<u32>> {
    let n = adjacency.len();
    let mut dist = vec![u32::MAX; n * n];
    for s in 0..n {
        let row = &mut dist[s * n..(s + 1) * n];
        row[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &w in &adjacency[v] {
                if row[w] == u32::MAX {
                    row[w] = row[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        if row.contains(&u32::MAX) {
            return None;
        }
    }
    Some(dist)
}

/// Four-point hyperbolicity constant, kept doubled to stay integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FourPointDelta {
    pub doubled: u64,
    /// True when every quadruple was examined.
    pub exact: bool,
}

impl FourPointDelta {
    pub fn value(&self) -> f64 {
        self.doubled as f64 / 2.0
    }
}

/// Largest four-point defect over all quadruples (when there are at most
/// `samples` of them) or over `samples` random quadruples.
pub fn hyperbolicity_delta(adjacency: &[Vec<usize>], samples: u64, seed: u64) -> Result<FourPointDelta, WallGeomError> {
    let n = adjacency.len();
    let dist = all_pairs_bfs(adjacency).ok_or(WallGeomError::Disconnected)?;
    let d = |a: usize, b: usize| dist[a * n + b] as u64;
    let defect = |x: usize, y: usize, z: usize, w: usize| {
        let mut s = [d(x, y) + d(z, w), d(x, z) + d(y, w), d(x, w) + d(y, z)];
        s.sort_unstable();
        s[2] - s[1]
    };
    let nn = n as u128;
    let total = if n < 4 { 0 } else { nn * (nn - 1) * (nn - 2) * (nn - 3) / 24 };
    let mut best = 0;
    if total <= samples as u128 {
        for x in 0..n {
            for y in (x + 1)..n {
                for z in (y + 1)..n {
                    for w in (z + 1)..n {
                        best = best.max(defect(x, y, z, w));
                    }
                }
            }
        }
        Ok(FourPointDelta { doubled: best, exact: true })
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let q: [usize; 4] = std::array::from_fn(|_| rng.random_range(0..n));
            best = best.max(defect(q[0], q[1], q[2], q[3]));
        }
        Ok(FourPointDelta { doubled: best, exact: false })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{generate_family, FamilySpec};

    fn path(n: usize) -> FiniteMedianComplex {
        generate_family(&FamilySpec::Path { vertices: n }).unwrap()
    }

    fn grid33() -> FiniteMedianComplex {
        generate_family(&FamilySpec::Grid { p: 3, q: 3 }).unwrap()
    }

    fn cube() -> FiniteMedianComplex {
        generate_family(&FamilySpec::Hypercube { dim: 3 }).unwrap()
    }

    fn p4_walls(c: &FiniteMedianComplex) -> [usize; 3] {
        [0, 1, 2].map(|i| c.wall_of_edge(i, i + 1).unwrap())
    }

    #[test]
    fn relations_on_small_complexes() {
        let q3 = cube();
        for a in 0..3 {
            for b in 0..3 {
                let expect = if a == b { WallRelation::Equal } else { WallRelation::Transverse };
                assert_eq!(wall_relation(&q3, a, b).unwrap(), expect);
            }
        }
        let p4 = path(4);
        let [e1, e2, e3] = p4_walls(&p4);
        assert_eq!(wall_relation(&p4, e1, e2).unwrap(), WallRelation::TightlyNested);
        assert_eq!(wall_relation(&p4, e1, e3).unwrap(), WallRelation::NestedLoose);
        assert_eq!(wall_relation(&p4, 0, 7), Err(WallGeomError::WallOutOfRange(7)));
    }

    #[test]
    fn strong_separation_examples() {
        let t = generate_family(&FamilySpec::Tree { seed: 3, size: 15 }).unwrap();
        for a in 0..t.wall_count() {
            for b in 0..t.wall_count() {
                assert_eq!(strongly_separated(&t, a, b).unwrap(), a != b);
            }
        }
        for c in [grid33(), cube()] {
            for a in 0..c.wall_count() {
                for b in 0..c.wall_count() {
                    assert!(!strongly_separated(&c, a, b).unwrap());
                }
            }
        }
    }

    #[test]
    fn contact_graphs() {
        let p4 = path(4);
        let [e1, e2, e3] = p4_walls(&p4);
        let cg = contact_graph(&p4).unwrap();
        assert!(cg.adjacent(e1, e2) && cg.adjacent(e2, e3) && !cg.adjacent(e1, e3));
        assert_eq!(cx_distance(&cg, e1, e3).unwrap(), 2);
        assert_eq!(cx_distance(&cg, e1, e1).unwrap(), 0);
        assert_eq!(cx_gromov(&cg, e1, e3, e2).unwrap(), 0);
        let k4 = contact_graph(&grid33()).unwrap();
        assert!((0..4).all(|a| k4.adjacency()[a].len() == 3));
        let k3 = contact_graph(&cube()).unwrap();
        assert!((0..3).all(|a| k3.adjacency()[a].len() == 2));
    }

    #[test]
    fn max_ss_examples() {
        let t = generate_family(&FamilySpec::Tree { seed: 9, size: 30 }).unwrap();
        for x in 0..30 {
            for y in 0..30 {
                assert_eq!(max_ss_set(&t, x, y).unwrap(), t.distance(x, y));
            }
        }
        let g = grid33();
        assert_eq!(max_ss_set(&g, 0, 8).unwrap(), 1);
        assert_eq!(max_ss_set(&cube(), 0, 7).unwrap(), 1);
        assert_eq!(max_ss_set(&cube(), 5, 5).unwrap(), 0);
    }

    #[test]
    fn chain_matches_clique_and_is_pairwise_ss() {
        for seed in 0..8 {
            let c = generate_family(&FamilySpec::MedianClosure { seed, dim: 7, points: 6 }).unwrap();
            let g = WallGeometry::new(&c).unwrap();
            assert!(g.chain_transitivity_failures().is_empty());
            for x in 0..c.vertex_count() {
                for y in 0..c.vertex_count() {
                    let chain = g.max_ss_chain(x, y).unwrap();
                    let walls: Vec<usize> = chain.iter().map(|h| h.wall).collect();
                    assert_eq!(g.max_ss_clique(&c.separating_walls(x, y)), chain.len());
                    for i in 0..walls.len() {
                        for j in (i + 1)..walls.len() {
                            assert!(g.is_strongly_separated(walls[i], walls[j]));
                        }
                    }
                    for h in &chain {
                        assert!(c.contains(*h, y) && !c.contains(*h, x));
                    }
                }
            }
        }
    }

    #[test]
    fn remark_ss_and_converse() {
        let p4 = path(4);
        let [e1, _, e3] = p4_walls(&p4);
        let r = verify_remark_ss(&p4).unwrap();
        assert_eq!(r.counterexample, None);
        let (a, b) = r.converse_witness.unwrap();
        assert_eq!((a.min(b), a.max(b)), (e1.min(e3), e1.max(e3)));
        assert_eq!(verify_remark_ss(&grid33()).unwrap().counterexample, None);
    }

    #[test]
    fn projection_lemma_holds() {
        let t = generate_family(&FamilySpec::BinaryTree { depth: 6 }).unwrap();
        let g = WallGeometry::new(&t).unwrap();
        let r = g.verify_projection_lemma(500, 3, 1);
        assert_eq!(r.violations, 0);
        let g33 = grid33();
        let r = WallGeometry::new(&g33).unwrap().verify_projection_lemma(200, 3, 1);
        assert_eq!(r.violations, 0);
    }

    #[test]
    fn hierarchy_paths() {
        let p4 = path(4);
        let g = WallGeometry::new(&p4).unwrap();
        let hp = g.hierarchy_path_search(0, 3).unwrap();
        assert_eq!(hp.walls(), p4_walls(&p4).to_vec());
        assert_eq!(hp.geodesic, vec![0, 1, 2, 3]);
        assert!(g.hierarchy_path_is_valid(&hp, 0, 3));
        let same = g.hierarchy_path_search(2, 2).unwrap();
        assert!(same.segments.is_empty());
        let grid = grid33();
        let g = WallGeometry::new(&grid).unwrap();
        for x in 0..9 {
            for y in 0..9 {
                let hp = g.hierarchy_path_search(x, y).unwrap();
                assert!(g.hierarchy_path_is_valid(&hp, x, y));
            }
        }
    }

    #[test]
    fn chain_gromov_on_tree_path() {
        let p = path(12);
        let g = WallGeometry::new(&p).unwrap();
        let chain = g.max_ss_chain(0, 11).unwrap();
        assert_eq!(chain.len(), 11);
        let r = g.verify_chain_gromov(&chain).unwrap();
        assert_eq!(r.violations, 0);
        let mut bad = chain.clone();
        bad.swap(0, 1);
        assert!(matches!(g.verify_chain_gromov(&bad), Err(WallGeomError::ChainInvalid(_))));
    }

    #[test]
    fn box_lemma_exhaustive_small() {
        for spec in [
            FamilySpec::Path { vertices: 6 },
            FamilySpec::Tree { seed: 2, size: 12 },
            FamilySpec::Grid { p: 3, q: 3 },
        ] {
            let c = generate_family(&spec).unwrap();
            let r = verify_box_lemma(&c, BoxLemmaMode::Exhaustive).unwrap();
            assert_eq!(r.violations, 0, "{}", spec.label());
            assert_eq!(r.cases_checked, (c.vertex_count() as u64).pow(4));
        }
        let g = grid33();
        assert_eq!(verify_box_lemma(&g, BoxLemmaMode::Exhaustive).unwrap().hypothesis_cases, 0);
    }

    #[test]
    fn four_point_delta() {
        let cycle: Vec<Vec<usize>> = (0..12).map(|i| vec![(i + 11) % 12, (i + 1) % 12]).collect();
        let d = hyperbolicity_delta(&cycle, 1_000_000, 0).unwrap();
        assert!(d.exact);
        assert_eq!(d.value(), 3.0);
        let t = generate_family(&FamilySpec::Tree { seed: 1, size: 20 }).unwrap();
        assert_eq!(hyperbolicity_delta(t.adjacency(), 1_000_000, 0).unwrap().doubled, 0);
        let split = vec![vec![], vec![]];
        assert_eq!(hyperbolicity_delta(&split, 10, 0), Err(WallGeomError::Disconnected));
    }
}
