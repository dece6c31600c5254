//! Pieces of heaps as walls of the Salvetti cover, and certified strong
//! separation between them.

use num_rational::Ratio;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use super::{push_reduced, reduce, DefiningGraph, Letter, NormalForm, RaagError};
use crate::bits::BitRows;

pub const DEFAULT_RADIUS: usize = 8;
/// How many earlier pieces the chain search compares by gate projection.
pub const DEFAULT_GATE_WINDOW: usize = 16;

/// One letter of a normal form, viewed as the wall it crosses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Piece {
    pub position: usize,
    pub letter: Letter,
    /// Product of the strict down-set of the position.
    pub prefix: NormalForm,
}

impl Piece {
    pub fn label(&self) -> u8 {
        self.letter.gen
    }

    /// Vertex `b` such that the piece's edge is `(b, b·label)`.
    pub fn base(&self) -> NormalForm {
        if self.letter.inv {
            self.prefix.mul_letters(&[self.letter])
        } else {
            self.prefix.clone()
        }
    }

    pub fn wall_key(&self) -> WallKey {
        wall_key(&self.base(), self.label())
    }
}

/// Canonical name of the wall dual to `(b, b·u)`: the label with the shortest
/// representative of `b⟨lk u⟩`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WallKey {
    pub label: u8,
    pub base: Vec<Letter>,
}

pub fn wall_key(base: &NormalForm, u: u8) -> WallKey {
    let dg = base.graph();
    let (rest, _) = strip_suffix_filter(dg, base.letters(), dg.link(u));
    WallKey {
        label: u,
        base: super::canonicalize(dg, &rest),
    }
}

/// Splits a reduced word into its largest prefix ideal with labels in `mask`
/// and the remainder.
pub(crate) fn strip_prefix_ideal(dg: &DefiningGraph, word: &[Letter], mask: u64) -> (Vec<Letter>, Vec<Letter>) {
    let mut blocked = 0u64;
    let (mut head, mut rest) = (Vec::new(), Vec::new());
    for &l in word {
        if mask >> l.gen & 1 == 1 && blocked >> l.gen & 1 == 0 {
            head.push(l);
        } else {
            blocked |= dg.dependent(l.gen);
            rest.push(l);
        }
    }
    (head, rest)
}

/// Splits a reduced word into the remainder and its largest suffix filter
/// with labels in `mask`.
pub(crate) fn strip_suffix_filter(dg: &DefiningGraph, word: &[Letter], mask: u64) -> (Vec<Letter>, Vec<Letter>) {
    let mut blocked = 0u64;
    let (mut rest, mut tail) = (Vec::new(), Vec::new());
    for &l in word.iter().rev() {
        if mask >> l.gen & 1 == 1 && blocked >> l.gen & 1 == 0 {
            tail.push(l);
        } else {
            blocked |= dg.dependent(l.gen);
            rest.push(l);
        }
    }
    rest.reverse();
    tail.reverse();
    (rest, tail)
}

/// Factorization `c = x·y` with `x ∈ ⟨a⟩`, `y ∈ ⟨b⟩`, if one exists.
pub(crate) fn split_product(dg: &DefiningGraph, c: &[Letter], a: u64, b: u64) -> Option<(Vec<Letter>, Vec<Letter>)> {
    let (x, y) = strip_prefix_ideal(dg, c, a);
    y.iter().all(|l| b >> l.gen & 1 == 1).then_some((x, y))
}

fn inverse_word(w: &[Letter]) -> Vec<Letter> {
    w.iter().rev().map(|l| l.inverse()).collect()
}

/// Strict down-sets of every position of a word's heap.
pub(crate) fn down_sets(dg: &DefiningGraph, word: &[Letter]) -> BitRows {
    let n = word.len();
    let mut down = BitRows::new(n, n);
    let mut last: Vec<Option<usize>> = vec![None; dg.generator_count()];
    for (j, l) in word.iter().enumerate() {
        let dep = dg.dependent(l.gen);
        for (g, p) in last.iter().enumerate() {
            if let Some(p) = *p {
                if dep >> g & 1 == 1 {
                    for w in 0..down.words() {
                        let v = down.row(p)[w];
                        down.row_mut(j)[w] |= v;
                    }
                    down.set(j, p);
                }
            }
        }
        last[l.gen as usize] = Some(j);
    }
    down
}

pub fn pieces(g: &NormalForm) -> Vec<Piece> {
    let dg = g.graph();
    let w = g.letters();
    let down = down_sets(dg, w);
    (0..w.len())
        .map(|j| {
            let prefix: Vec<Letter> = (0..j).filter(|&i| down.get(j, i)).map(|i| w[i]).collect();
            Piece {
                position: j,
                letter: w[j],
                prefix: NormalForm::from_reduced(dg, prefix),
            }
        })
        .collect()
}

/// Walls of two pieces of one normal form cross iff the pieces are incomparable.
pub fn transverse_pieces(g: &NormalForm, p: usize, q: usize) -> Result<bool, RaagError> {
    let n = g.len();
    for x in [p, q] {
        if x >= n {
            return Err(RaagError::PieceMismatch(x));
        }
    }
    if p == q {
        return Ok(false);
    }
    let down = down_sets(g.graph(), g.letters());
    Ok(!down.get(p.max(q), p.min(q)))
}

/// A wall crossing both walls of a pair: the wall dual to
/// `(p_corner, p_corner·label)`, which also passes through `q_corner`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SsWitness {
    pub label: u8,
    /// Corner of a square spanned by the first wall and the witness.
    pub p_corner: NormalForm,
    /// Corner of a square spanned by the second wall and the witness.
    pub q_corner: NormalForm,
}

impl SsWitness {
    pub fn wall_key(&self) -> WallKey {
        wall_key(&self.p_corner, self.label)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CertReason {
    /// The labels have disjoint links, so no wall can cross both.
    EmptyCommonLink,
    /// The projection of one carrier onto the other is the single vertex `gate`.
    GateProjection { gate: NormalForm },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SsCertificate {
    YesCertified(CertReason),
    NoCertified(SsWitness),
    Unknown { radius: usize },
}

impl SsCertificate {
    pub fn is_yes(&self) -> bool {
        matches!(self, SsCertificate::YesCertified(_))
    }

    pub fn is_no(&self) -> bool {
        matches!(self, SsCertificate::NoCertified(_))
    }
}

/// Result of the gate test in coordinates where the first wall is `W(1, p)`.
enum GateVerdict {
    Separated { gate: Vec<Letter> },
    Crossed { label: u8, p_corner: Vec<Letter>, q_corner: Vec<Letter> },
}

/// Decides whether the parallel walls `W(1, p)` and `W(c, q)` are strongly
/// separated: some wall crosses both iff one is dual to an edge at the gate
/// of `c` in the carrier of `W(1, p)`.
fn gate_test(dg: &DefiningGraph, p: u8, c: &[Letter], q: u8) -> GateVerdict {
    let (head, _) = strip_prefix_ideal(dg, c, dg.star(p));
    let mut gate: Vec<Letter> = head.iter().copied().filter(|l| l.gen != p).collect();
    let power: i64 = head.iter().filter(|l| l.gen == p).map(|l| if l.inv { -1 } else { 1 }).sum();
    if power > 0 {
        gate.push(Letter::new(p, false));
    }
    let common = dg.link(p) & dg.link(q);
    let c_inv = inverse_word(c);
    for t in dg.letters() {
        let u = t.gen;
        if common >> u & 1 == 0 {
            continue;
        }
        let mut b = gate.clone();
        if t.inv {
            b.push(t);
        }
        let b = reduce(dg, b);
        let Some((x1, _)) = split_product(dg, &b, dg.link(p), dg.link(u)) else {
            continue;
        };
        let rel_q = reduce(dg, c_inv.iter().chain(&b).copied());
        let Some((x2, _)) = split_product(dg, &rel_q, dg.link(q), dg.link(u)) else {
            continue;
        };
        let q_corner = reduce(dg, c.iter().chain(&x2).copied());
        return GateVerdict::Crossed {
            label: u,
            p_corner: x1,
            q_corner,
        };
    }
    GateVerdict::Separated { gate }
}

/// Bounded search for `x ∈ ⟨lk p⟩`, `y ∈ ⟨lk q⟩` with `|x|, |y| ≤ radius`
/// and `x⁻¹ c y ∈ ⟨lk u⟩` for a common link label `u`.
fn bounded_search(dg: &DefiningGraph, p: u8, c: &[Letter], q: u8, radius: usize) -> Option<(u8, Vec<Letter>, Vec<Letter>)> {
    let common = dg.link(p) & dg.link(q);
    let gens: Vec<Letter> = dg.letters().into_iter().filter(|l| dg.link(p) >> l.gen & 1 == 1).collect();
    let mut layer: Vec<Vec<Letter>> = vec![Vec::new()];
    let mut seen: rustc_hash::FxHashSet<Vec<Letter>> = layer.iter().cloned().collect();
    for depth in 0..=radius {
        for x in &layer {
            let rel = reduce(dg, inverse_word(x).into_iter().chain(c.iter().copied()));
            for u in 0..dg.generator_count() as u8 {
                if common >> u & 1 == 0 {
                    continue;
                }
                if let Some((_, r)) = split_product(dg, &rel, dg.link(u), dg.link(q)) {
                    if r.len() <= radius {
                        let y = inverse_word(&r);
                        let q_corner = reduce(dg, c.iter().chain(&y).copied());
                        return Some((u, x.clone(), q_corner));
                    }
                }
            }
        }
        if depth == radius {
            break;
        }
        let mut next = Vec::new();
        for x in &layer {
            for &t in &gens {
                let mut y = x.clone();
                push_reduced(dg, &mut y, t);
                if y.len() == x.len() + 1 {
                    let y = super::canonicalize(dg, &y);
                    if seen.insert(y.clone()) {
                        next.push(y);
                    }
                }
            }
        }
        layer = next;
    }
    None
}

/// How `ss_pieces_with` settles pairs whose labels share a link vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertMode {
    /// Witness search up to the radius; `Unknown` when nothing is found.
    Bounded,
    /// Exact decision by gate projection between carriers.
    Gate,
}

/// Certificate for the walls `W(base_p, p)` and `W(base_q, q)`, assumed parallel.
pub(crate) fn certify_walls(
    base_p: &NormalForm,
    p: u8,
    base_q: &NormalForm,
    q: u8,
    radius: usize,
    mode: CertMode,
) -> SsCertificate {
    let dg = base_p.graph();
    if dg.link(p) & dg.link(q) == 0 {
        return SsCertificate::YesCertified(CertReason::EmptyCommonLink);
    }
    let c = base_p.inv().mul_unchecked(base_q);
    let lift = |w: &[Letter]| base_p.mul_letters(w);
    match mode {
        CertMode::Bounded => match bounded_search(dg, p, c.letters(), q, radius) {
            Some((label, x, y)) => SsCertificate::NoCertified(SsWitness {
                label,
                p_corner: lift(&x),
                q_corner: lift(&y),
            }),
            None => SsCertificate::Unknown { radius },
        },
        CertMode::Gate => match gate_test(dg, p, c.letters(), q) {
            GateVerdict::Separated { gate } => SsCertificate::YesCertified(CertReason::GateProjection { gate: lift(&gate) }),
            GateVerdict::Crossed {
                label,
                p_corner,
                q_corner,
            } => SsCertificate::NoCertified(SsWitness {
                label,
                p_corner: lift(&p_corner),
                q_corner: lift(&q_corner),
            }),
        },
    }
}

/// Strong-separation certificate for pieces `p` below `q` of `g`: disjoint
/// links, else a witness search within `radius`, else `Unknown`.
pub fn ss_pieces(g: &NormalForm, p: usize, q: usize, radius: usize) -> Result<SsCertificate, RaagError> {
    ss_pieces_with(g, p, q, radius, CertMode::Bounded)
}

pub fn ss_pieces_with(g: &NormalForm, p: usize, q: usize, radius: usize, mode: CertMode) -> Result<SsCertificate, RaagError> {
    if radius == 0 {
        return Err(RaagError::RadiusZero);
    }
    for x in [p, q] {
        if x >= g.len() {
            return Err(RaagError::PieceMismatch(x));
        }
    }
    let down = down_sets(g.graph(), g.letters());
    if p >= q || !down.get(q, p) {
        return Err(RaagError::NotNested(p, q));
    }
    let ps = pieces(g);
    let (a, b) = (&ps[p], &ps[q]);
    Ok(certify_walls(&a.base(), a.label(), &b.base(), b.label(), radius, mode))
}

/// Letters of `D(j) \ D(i)` in word order, `D` the strict down-set, for
/// positions `i < j` with `i` below `j`.
fn gap_word(dg: &DefiningGraph, w: &[Letter], i: usize, j: usize) -> Vec<Letter> {
    let mut out = Vec::new();
    let mut reach = dg.dependent(w[j].gen);
    let mut below_i = dg.dependent(w[i].gen);
    for m in (0..j).rev() {
        let g = w[m].gen;
        if m > i {
            if reach >> g & 1 == 1 {
                out.push(w[m]);
                reach |= dg.dependent(g);
            }
        } else if m == i {
            out.push(w[m]);
            reach |= dg.dependent(g);
        } else {
            if reach & !below_i == 0 {
                break;
            }
            if below_i >> g & 1 == 1 {
                below_i |= dg.dependent(g);
            } else if reach >> g & 1 == 1 {
                out.push(w[m]);
                reach |= dg.dependent(g);
            }
        }
    }
    out.reverse();
    out
}

/// `base_i⁻¹ base_j` for pieces `i` below `j`.
fn relative_base(dg: &DefiningGraph, w: &[Letter], i: usize, j: usize) -> Vec<Letter> {
    let mut word = Vec::new();
    if w[i].inv {
        word.push(w[i].inverse());
    }
    word.extend(gap_word(dg, w, i, j));
    if w[j].inv {
        word.push(w[j]);
    }
    reduce(dg, word)
}

/// Length of the longest chain of nested pieces of `g` whose consecutive
/// members are certified strongly separated: by disjoint links anywhere in the
/// heap, or by gate projection within `window` positions. A lower bound for
/// the largest pairwise strongly separated set of walls crossed by `[1, g]`.
pub fn max_certified_ss_chain(g: &NormalForm, window: usize) -> usize {
    chain_in_word(g.graph(), g.letters(), window)
}

pub(crate) fn chain_in_word(dg: &DefiningGraph, w: &[Letter], window: usize) -> usize {
    let k = dg.generator_count();
    let n = w.len();
    let mut best = vec![0usize; n];
    // per label: down-max vector of its last occurrence
    let mut last_vec: Vec<Option<Vec<usize>>> = vec![None; k];
    let mut overall = 0;
    for j in 0..n {
        let lj = w[j].gen;
        let dep = dg.dependent(lj);
        let mut down = vec![0usize; k];
        for g in 0..k {
            if dep >> g & 1 == 1 {
                if let Some(v) = &last_vec[g] {
                    for (d, x) in down.iter_mut().zip(v) {
                        *d = (*d).max(*x);
                    }
                }
            }
        }
        let mut b = (0..k)
            .filter(|&g| dg.link(g as u8) & dg.link(lj) == 0)
            .map(|g| down[g])
            .max()
            .unwrap_or(0);
        if window > 0 && j > 0 {
            // positions of the window below j
            let lo = j.saturating_sub(window);
            let mut reach = dep;
            for i in (lo..j).rev() {
                let gi = w[i].gen;
                if reach >> gi & 1 == 0 {
                    continue;
                }
                reach |= dg.dependent(gi);
                if best[i] <= b || dg.link(gi) & dg.link(lj) == 0 {
                    continue;
                }
                let c = relative_base(dg, w, i, j);
                if let GateVerdict::Separated { .. } = gate_test(dg, gi, &c, lj) {
                    b = best[i];
                }
            }
        }
        best[j] = b + 1;
        overall = overall.max(best[j]);
        down[lj as usize] = down[lj as usize].max(best[j]);
        last_vec[lj as usize] = Some(down);
    }
    overall
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rank1Witness {
    /// Piece of `g^m` whose wall `h` satisfies `gⁿh ⊊ h`.
    pub piece: Piece,
    pub m: u32,
    pub power: u32,
    /// Positions in `g^m` from the piece to its translate; consecutive
    /// members are nested with disjoint links.
    pub chain: Vec<usize>,
}

/// Shortest chain from `i` to `j` through nested pieces with pairwise
/// disjoint consecutive links.
fn link_chain(dg: &DefiningGraph, w: &[Letter], down: &BitRows, i: usize, j: usize) -> Option<Vec<usize>> {
    let mut prev = vec![usize::MAX; j + 1];
    let mut reached = vec![false; j + 1];
    reached[i] = true;
    for m in (i + 1)..=j {
        if !down.get(m, i) {
            continue;
        }
        for l in i..m {
            if reached[l] && down.get(m, l) && dg.link(w[l].gen) & dg.link(w[m].gen) == 0 {
                reached[m] = true;
                prev[m] = l;
                break;
            }
        }
    }
    if !reached[j] {
        return None;
    }
    let mut chain = vec![j];
    while *chain.last().unwrap() != i {
        chain.push(prev[*chain.last().unwrap()]);
    }
    chain.reverse();
    Some(chain)
}

/// Searches pieces of `g^m` for a wall whose `gⁿ`-translate is a later piece,
/// oriented so that `gⁿh ⊊ h`, joined to it by a certified chain (so the pair
/// is strongly separated). `None` is inconclusive.
pub fn find_rank1_witness(g: &NormalForm, max_power: u32) -> Option<Rank1Witness> {
    if g.is_identity() || max_power == 0 {
        return None;
    }
    let dg = g.graph();
    let m = max_power + 1;
    let gm = g.pow(m);
    let ps = pieces(&gm);
    let down = down_sets(dg, gm.letters());
    let index: FxHashMap<WallKey, usize> = ps.iter().map(|p| (p.wall_key(), p.position)).collect();
    let bases: Vec<NormalForm> = ps.iter().map(Piece::base).collect();
    for n in 1..=max_power {
        let gn = g.pow(n);
        let far: rustc_hash::FxHashSet<WallKey> = pieces(&g.pow(m + n)).iter().map(Piece::wall_key).collect();
        for (i, p) in ps.iter().enumerate() {
            let key = wall_key(&gn.mul_unchecked(&bases[i]), p.label());
            let Some(&j) = index.get(&key) else { continue };
            if j <= i || !down.get(j, i) || !far.contains(&key) {
                continue;
            }
            if let Some(chain) = link_chain(dg, gm.letters(), &down, i, j) {
                return Some(Rank1Witness {
                    piece: p.clone(),
                    m,
                    power: n,
                    chain,
                });
            }
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TranslationMode {
    /// `|g^N| / N`, with the increment `|g^N| - |g^(N-1)|`.
    Limit(u32),
    /// Length after iterated cyclic reduction.
    Cyclic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TranslationLength {
    pub value: Ratio<u64>,
    /// Eventual per-power increment (limit mode only).
    pub increment: Option<u64>,
}

pub fn translation_length(g: &NormalForm, mode: TranslationMode) -> TranslationLength {
    match mode {
        TranslationMode::Cyclic => {
            let mut w = g.clone();
            loop {
                let maxs = w.maximal_letters();
                let Some(l) = w.minimal_letters().into_iter().find(|l| maxs.contains(&l.inverse())) else {
                    break;
                };
                let conj = NormalForm::generator(w.graph(), l.inverse()).mul_unchecked(&w).mul_letters(&[l]);
                debug_assert_eq!(conj.len() + 2, w.len());
                w = conj;
            }
            TranslationLength {
                value: Ratio::from_integer(w.len() as u64),
                increment: None,
            }
        }
        TranslationMode::Limit(n) => {
            let n = n.max(1);
            let hi = g.pow(n).len() as u64;
            let lo = g.pow(n - 1).len() as u64;
            TranslationLength {
                value: Ratio::new(hi, n as u64),
                increment: Some(hi - lo),
            }
        }
    }
}

/// A partition of the generators into two mutually commuting sets, when the
/// defining graph is a join.
pub fn is_join(dg: &DefiningGraph) -> Option<(Vec<u8>, Vec<u8>)> {
    let k = dg.generator_count();
    if k < 2 {
        return None;
    }
    let mut comp = 1u64;
    let mut frontier = 1u64;
    while frontier != 0 {
        let mut next = 0;
        for v in crate::bits::iter_ones(&[frontier]) {
            next |= dg.dependent(v as u8) & !comp;
        }
        comp |= next;
        frontier = next;
    }
    if comp == dg.all_mask() {
        return None;
    }
    let (a, b): (Vec<u8>, Vec<u8>) = (0..k as u8).partition(|&g| comp >> g & 1 == 1);
    Some((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn arc(dg: DefiningGraph) -> Arc<DefiningGraph> {
        Arc::new(dg)
    }

    fn parse(dg: &Arc<DefiningGraph>, s: &str) -> NormalForm {
        NormalForm::parse(dg, s).unwrap()
    }

    #[test]
    fn pieces_and_transversality() {
        let f2 = arc(DefiningGraph::f2());
        let ab = parse(&f2, "a b");
        let ps = pieces(&ab);
        assert_eq!(ps.len(), 2);
        assert!(ps[0].prefix.is_identity());
        assert_eq!(ps[1].prefix, parse(&f2, "a"));
        assert!(!transverse_pieces(&ab, 0, 1).unwrap());
        let z2 = arc(DefiningGraph::z2());
        assert!(transverse_pieces(&parse(&z2, "a b"), 0, 1).unwrap());
        let c5 = arc(DefiningGraph::c5());
        assert!(transverse_pieces(&parse(&c5, "v1 v2"), 0, 1).unwrap());
        assert_eq!(transverse_pieces(&ab, 0, 2), Err(RaagError::PieceMismatch(2)));
    }

    #[test]
    fn wall_keys_identify_parallel_edges() {
        let z2 = arc(DefiningGraph::z2());
        // the a-edges at 1 and at b lie on one wall
        assert_eq!(wall_key(&parse(&z2, "1"), 0), wall_key(&parse(&z2, "b"), 0));
        assert_ne!(wall_key(&parse(&z2, "1"), 0), wall_key(&parse(&z2, "a"), 0));
        let f2 = arc(DefiningGraph::f2());
        let p = pieces(&parse(&f2, "A"));
        assert_eq!(p[0].base(), parse(&f2, "A"));
    }

    #[test]
    fn certificate_examples() {
        let f2 = arc(DefiningGraph::f2());
        let g = parse(&f2, "a b A b");
        assert_eq!(ss_pieces(&g, 0, 3, 8).unwrap(), SsCertificate::YesCertified(CertReason::EmptyCommonLink));
        let z2 = arc(DefiningGraph::z2());
        let aa = parse(&z2, "a a");
        for mode in [CertMode::Bounded, CertMode::Gate] {
            let SsCertificate::NoCertified(w) = ss_pieces_with(&aa, 0, 1, 8, mode).unwrap() else {
                panic!("expected a witness")
            };
            assert_eq!(w.wall_key(), wall_key(&parse(&z2, "1"), 1));
        }
        let c5 = arc(DefiningGraph::c5());
        let g = parse(&c5, "v1 v3");
        for mode in [CertMode::Bounded, CertMode::Gate] {
            let SsCertificate::NoCertified(w) = ss_pieces_with(&g, 0, 1, 8, mode).unwrap() else {
                panic!("expected a witness")
            };
            assert_eq!(w.wall_key(), wall_key(&parse(&c5, "1"), 1));
        }
        assert_eq!(ss_pieces(&g, 0, 1, 0), Err(RaagError::RadiusZero));
        assert_eq!(ss_pieces(&g, 1, 0, 3), Err(RaagError::NotNested(1, 0)));
    }

    #[test]
    fn gate_agrees_with_bounded_search() {
        use rand::{Rng, SeedableRng};
        let c5 = arc(DefiningGraph::c5());
        let letters = c5.letters();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut separated = 0;
        for _ in 0..300 {
            let word: Vec<Letter> = (0..10).map(|_| letters[rng.random_range(0..letters.len())]).collect();
            let g = NormalForm::from_letters(&c5, &word).unwrap();
            let down = down_sets(&c5, g.letters());
            for j in 0..g.len() {
                for i in 0..j {
                    if !down.get(j, i) {
                        continue;
                    }
                    let gate = ss_pieces(&g, i, j, 4).unwrap();
                    let search = ss_pieces_with(&g, i, j, 4, CertMode::Bounded).unwrap();
                    if gate.is_yes() {
                        separated += 1;
                        assert!(!search.is_no(), "{g} {i} {j}");
                    }
                    if search.is_no() {
                        assert!(gate.is_no());
                    }
                }
            }
        }
        assert!(separated > 0);
    }

    #[test]
    fn chain_examples() {
        let f2 = arc(DefiningGraph::f2());
        assert_eq!(max_certified_ss_chain(&parse(&f2, "a b a b"), 0), 4);
        let z2 = arc(DefiningGraph::z2());
        assert_eq!(max_certified_ss_chain(&parse(&z2, "a a b A"), DEFAULT_GATE_WINDOW), 1);
        assert_eq!(max_certified_ss_chain(&parse(&z2, "a a a b b"), DEFAULT_GATE_WINDOW), 1);
        assert_eq!(max_certified_ss_chain(&parse(&z2, "1"), DEFAULT_GATE_WINDOW), 0);
        let c5 = arc(DefiningGraph::c5());
        let g = parse(&c5, "v1 v3 v5 v1 v3 v5 v1 v3 v5");
        let links_only = max_certified_ss_chain(&g, 0);
        assert!(links_only >= 2);
        assert!(max_certified_ss_chain(&g, DEFAULT_GATE_WINDOW) >= links_only);
        // same-label pairs never have disjoint links in the pentagon
        assert_eq!(max_certified_ss_chain(&parse(&c5, "v1 v1 v1 v1"), 0), 1);
    }

    #[test]
    fn gap_word_matches_prefix_quotient() {
        use rand::{Rng, SeedableRng};
        let c5 = arc(DefiningGraph::c5());
        let letters = c5.letters();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let word: Vec<Letter> = (0..14).map(|_| letters[rng.random_range(0..letters.len())]).collect();
            let g = NormalForm::from_letters(&c5, &word).unwrap();
            let ps = pieces(&g);
            let down = down_sets(&c5, g.letters());
            for j in 0..g.len() {
                for i in 0..j {
                    if down.get(j, i) {
                        let expect = ps[i].base().inv().mul_unchecked(&ps[j].base());
                        let got = NormalForm::from_reduced(&c5, relative_base(&c5, g.letters(), i, j));
                        assert_eq!(got, expect);
                    }
                }
            }
        }
    }

    #[test]
    fn rank1_examples() {
        let f2 = arc(DefiningGraph::f2());
        let w = find_rank1_witness(&parse(&f2, "a"), 20).unwrap();
        assert_eq!(w.power, 1);
        let c5 = arc(DefiningGraph::c5());
        assert!(find_rank1_witness(&parse(&c5, "v1 v3 v5"), 20).is_some());
        assert!(find_rank1_witness(&parse(&c5, "v1 v3"), 20).is_none());
        let z2 = arc(DefiningGraph::z2());
        for s in ["a", "a b", "a B", "a a b"] {
            assert!(find_rank1_witness(&parse(&z2, s), 20).is_none());
        }
    }

    #[test]
    fn translation_lengths() {
        let f2 = arc(DefiningGraph::f2());
        let g = parse(&f2, "a b A");
        assert_eq!(translation_length(&g, TranslationMode::Cyclic).value, Ratio::from_integer(1));
        assert_eq!(translation_length(&g, TranslationMode::Limit(64)).increment, Some(1));
        let z2 = arc(DefiningGraph::z2());
        assert_eq!(translation_length(&parse(&z2, "a b"), TranslationMode::Cyclic).value, Ratio::from_integer(2));
    }

    #[test]
    fn joins() {
        assert_eq!(is_join(&DefiningGraph::z2()), Some((vec![0], vec![1])));
        assert_eq!(is_join(&DefiningGraph::f2()), None);
        assert_eq!(is_join(&DefiningGraph::c5()), None);
        assert!(is_join(&DefiningGraph::abelian(3)).is_some());
    }
}
