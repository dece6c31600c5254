//! Right-angled Artin groups: reduced heap normal forms, medians, walls,
//! strong-separation certificates and finite hull materialization.

mod hull;
mod walls;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use hull::{hull_materialize, verify_witness_in_hull, Hull};
pub(crate) use walls::chain_in_word;

pub use walls::{
    find_rank1_witness, is_join, CertMode, max_certified_ss_chain, pieces, ss_pieces, ss_pieces_with, transverse_pieces,
    translation_length, wall_key, CertReason, Piece, Rank1Witness, SsCertificate, SsWitness, TranslationLength,
    TranslationMode, WallKey, DEFAULT_GATE_WINDOW, DEFAULT_RADIUS,
};

/// Defining graphs are limited to this many generators (bitmask links).
pub const MAX_GENERATORS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RaagError {
    #[error("unknown generator {0:?}")]
    UnknownGenerator(String),
    #[error("invalid generator name {0:?}: names are lowercase and start with a letter")]
    InvalidName(String),
    #[error("duplicate generator {0:?}")]
    DuplicateGenerator(String),
    #[error("invalid commutation edge {0:?}")]
    InvalidEdge(String),
    #[error("too many generators ({0}, max {MAX_GENERATORS})")]
    TooManyGenerators(usize),
    #[error("elements belong to different defining graphs")]
    DefiningGraphMismatch,
    #[error("piece {0} does not belong to the element")]
    PieceMismatch(usize),
    #[error("pieces {0} and {1} are not nested")]
    NotNested(usize, usize),
    #[error("search radius must be positive")]
    RadiusZero,
    #[error("hull budget exceeded at {0} vertices")]
    BudgetExceeded(usize),
    #[error("defining graph must have at least one generator")]
    EmptyGraph,
    #[error("parse error: {0}")]
    Parse(String),
}

/// Commutation graph of a right-angled Artin group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefiningGraph {
    names: Vec<String>,
    link: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefiningGraphFile {
    pub generators: Vec<String>,
    pub edges: Vec<[String; 2]>,
}

fn valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

impl DefiningGraph {
    pub fn new(names: Vec<String>, edges: &[(usize, usize)]) -> Result<Self, RaagError> {
        if names.is_empty() {
            return Err(RaagError::EmptyGraph);
        }
        if names.len() > MAX_GENERATORS {
            return Err(RaagError::TooManyGenerators(names.len()));
        }
        for (i, n) in names.iter().enumerate() {
            if !valid_name(n) {
                return Err(RaagError::InvalidName(n.clone()));
            }
            if names[..i].contains(n) {
                return Err(RaagError::DuplicateGenerator(n.clone()));
            }
        }
        let mut link = vec![0u64; names.len()];
        for &(a, b) in edges {
            if a == b || a >= names.len() || b >= names.len() {
                return Err(RaagError::InvalidEdge(format!("({a}, {b})")));
            }
            link[a] |= 1 << b;
            link[b] |= 1 << a;
        }
        Ok(DefiningGraph { names, link })
    }

    fn named(prefix: &str, k: usize, edges: &[(usize, usize)]) -> Self {
        let names = (1..=k).map(|i| format!("{prefix}{i}")).collect();
        DefiningGraph::new(names, edges).expect("preset graphs are valid")
    }

    /// Free group on `a, b`.
    pub fn f2() -> Self {
        DefiningGraph::new(vec!["a".into(), "b".into()], &[]).unwrap()
    }

    /// `Z^2` on commuting `a, b`.
    pub fn z2() -> Self {
        DefiningGraph::new(vec!["a".into(), "b".into()], &[(0, 1)]).unwrap()
    }

    /// Pentagon `v1 - v2 - v3 - v4 - v5 - v1`.
    pub fn c5() -> Self {
        Self::cycle(5)
    }

    pub fn free(k: usize) -> Self {
        Self::named("x", k, &[])
    }

    pub fn abelian(k: usize) -> Self {
        let edges: Vec<_> = (0..k).flat_map(|a| ((a + 1)..k).map(move |b| (a, b))).collect();
        Self::named("x", k, &edges)
    }

    pub fn cycle(k: usize) -> Self {
        assert!(k >= 3, "cycle needs at least 3 vertices");
        let edges: Vec<_> = (0..k).map(|i| (i, (i + 1) % k)).collect();
        Self::named("v", k, &edges)
    }

    /// Preset by name: `f2`, `z2`, `c5`, `free<k>`, `abelian<k>`, `cycle<k>`.
    pub fn preset(name: &str) -> Option<Self> {
        let num = |p: &str| name.strip_prefix(p).and_then(|s| s.parse::<usize>().ok());
        match name {
            "f2" => Some(Self::f2()),
            "z2" => Some(Self::z2()),
            "c5" => Some(Self::c5()),
            _ => {
                if let Some(k) = num("free").filter(|k| (1..=MAX_GENERATORS).contains(k)) {
                    Some(Self::free(k))
                } else if let Some(k) = num("abelian").filter(|k| (1..=MAX_GENERATORS).contains(k)) {
                    Some(Self::abelian(k))
                } else {
                    num("cycle").filter(|k| (3..=MAX_GENERATORS).contains(k)).map(Self::cycle)
                }
            }
        }
    }

    pub fn generator_count(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, g: u8) -> &str {
        &self.names[g as usize]
    }

    pub fn index(&self, name: &str) -> Option<u8> {
        self.names.iter().position(|n| n == name).map(|i| i as u8)
    }

    #[inline]
    pub fn commute(&self, a: u8, b: u8) -> bool {
        self.link[a as usize] >> b & 1 == 1
    }

    /// Link of `a` as a bitmask over generators.
    #[inline]
    pub fn link(&self, a: u8) -> u64 {
        self.link[a as usize]
    }

    #[inline]
    pub fn star(&self, a: u8) -> u64 {
        self.link[a as usize] | 1 << a
    }

    /// Labels that do not commute with `a`, including `a` itself.
    #[inline]
    pub fn dependent(&self, a: u8) -> u64 {
        !self.link[a as usize] & self.all_mask()
    }

    pub fn all_mask(&self) -> u64 {
        if self.names.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.names.len()) - 1
        }
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let k = self.names.len();
        (0..k)
            .flat_map(|a| ((a + 1)..k).map(move |b| (a, b)))
            .filter(|&(a, b)| self.commute(a as u8, b as u8))
            .collect()
    }

    /// All letters `x` and `x⁻¹`, positive first within each generator.
    pub fn letters(&self) -> Vec<Letter> {
        (0..self.names.len() as u8)
            .flat_map(|g| [Letter::new(g, false), Letter::new(g, true)])
            .collect()
    }

    pub fn to_file(&self) -> DefiningGraphFile {
        DefiningGraphFile {
            generators: self.names.clone(),
            edges: self
                .edges()
                .into_iter()
                .map(|(a, b)| [self.names[a].clone(), self.names[b].clone()])
                .collect(),
        }
    }

    pub fn from_file(file: &DefiningGraphFile) -> Result<Self, RaagError> {
        let idx = |n: &String| {
            file.generators
                .iter()
                .position(|g| g == n)
                .ok_or_else(|| RaagError::UnknownGenerator(n.clone()))
        };
        let edges = file
            .edges
            .iter()
            .map(|[a, b]| Ok((idx(a)?, idx(b)?)))
            .collect::<Result<Vec<_>, RaagError>>()?;
        DefiningGraph::new(file.generators.clone(), &edges)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, RaagError> {
        let file: DefiningGraphFile = serde_json::from_str(text).map_err(|e| RaagError::Parse(e.to_string()))?;
        Self::from_file(&file)
    }
}

/// A generator or its inverse. Ordered by generator index, positive first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub gen: u8,
    pub inv: bool,
}

impl Letter {
    pub const fn new(gen: u8, inv: bool) -> Self {
        Letter { gen, inv }
    }

    pub fn inverse(self) -> Self {
        Letter::new(self.gen, !self.inv)
    }
}

/// Push `x` onto a reduced word, cancelling against the last letter with the
/// same label when everything after it commutes with `x`.
#[inline]
pub(crate) fn push_reduced(dg: &DefiningGraph, word: &mut Vec<Letter>, x: Letter) {
    for i in (0..word.len()).rev() {
        let l = word[i];
        if l.gen == x.gen {
            if l.inv != x.inv {
                word.remove(i);
                return;
            }
            break;
        }
        if !dg.commute(l.gen, x.gen) {
            break;
        }
    }
    word.push(x);
}

pub(crate) fn reduce(dg: &DefiningGraph, letters: impl IntoIterator<Item = Letter>) -> Vec<Letter> {
    let mut w = Vec::new();
    for x in letters {
        push_reduced(dg, &mut w, x);
    }
    w
}

/// Positions of each label in a reduced word.
#[derive(Debug, Clone)]
pub(crate) struct HeapIndex {
    positions: Vec<Vec<usize>>,
}

impl HeapIndex {
    pub(crate) fn new(dg: &DefiningGraph, w: &[Letter]) -> Self {
        let mut positions = vec![Vec::new(); dg.generator_count()];
        for (i, l) in w.iter().enumerate() {
            positions[l.gen as usize].push(i);
        }
        HeapIndex { positions }
    }

    /// Position of the next unmatched `g`-piece if it is minimal among the
    /// unmatched pieces.
    #[inline]
    fn ready(&self, dg: &DefiningGraph, c: &[usize], g: usize) -> Option<usize> {
        let p = &self.positions;
        let at = *p[g].get(c[g])?;
        let dep = dg.dependent(g as u8) & !(1u64 << g);
        crate::bits::iter_ones(&[dep])
            .all(|h| p[h].get(c[h]).is_none_or(|&q| q > at))
            .then_some(at)
    }

    /// Letters of `w` outside the prefix given by per-label counts, in order.
    pub(crate) fn remainder(&self, w: &[Letter], counts: &[usize]) -> Vec<Letter> {
        let total: usize = counts.iter().sum();
        let mut skip = vec![false; w.len()];
        for (g, &c) in counts.iter().enumerate() {
            for &i in &self.positions[g][..c] {
                skip[i] = true;
            }
        }
        let mut out = Vec::with_capacity(w.len() - total);
        out.extend(w.iter().zip(&skip).filter(|(_, &s)| !s).map(|(l, _)| *l));
        out
    }
}

/// Largest common prefix of two reduced words as per-label piece counts.
pub(crate) fn match_prefix(dg: &DefiningGraph, u: &[Letter], iu: &HeapIndex, v: &[Letter], iv: &HeapIndex) -> Vec<usize> {
    let k = dg.generator_count();
    let (mut cu, mut cv) = (vec![0usize; k], vec![0usize; k]);
    let mut progress = true;
    while progress {
        progress = false;
        for g in 0..k {
            while let (Some(i), Some(j)) = (iu.ready(dg, &cu, g), iv.ready(dg, &cv, g)) {
                if u[i] != v[j] {
                    break;
                }
                cu[g] += 1;
                cv[g] += 1;
                progress = true;
            }
        }
    }
    cu
}

/// Largest common prefix of two reduced words, as a reduced word.
pub(crate) fn common_prefix(dg: &DefiningGraph, u: &[Letter], v: &[Letter]) -> Vec<Letter> {
    let iu = HeapIndex::new(dg, u);
    let counts = match_prefix(dg, u, &iu, v, &HeapIndex::new(dg, v));
    let mut keep = vec![false; u.len()];
    for (g, &c) in counts.iter().enumerate() {
        for &i in &iu.positions[g][..c] {
            keep[i] = true;
        }
    }
    u.iter().zip(&keep).filter(|(_, &k)| k).map(|(l, _)| *l).collect()
}

/// `(u|v)_e`, the size of the largest common prefix.
pub(crate) fn prefix_overlap_indexed(dg: &DefiningGraph, u: &[Letter], iu: &HeapIndex, v: &[Letter], iv: &HeapIndex) -> usize {
    match_prefix(dg, u, iu, v, iv).iter().sum()
}

/// Lexicographically least linearization of a reduced word's heap.
pub(crate) fn canonicalize(dg: &DefiningGraph, word: &[Letter]) -> Vec<Letter> {
    let k = dg.generator_count();
    let mut queues: Vec<std::collections::VecDeque<usize>> = vec![Default::default(); k];
    for (i, l) in word.iter().enumerate() {
        queues[l.gen as usize].push_back(i);
    }
    let mut out = Vec::with_capacity(word.len());
    while out.len() < word.len() {
        let mut best: Option<Letter> = None;
        for g in 0..k {
            let Some(&pos) = queues[g].front() else { continue };
            let blocked = (0..k).any(|h| h != g && !dg.commute(g as u8, h as u8) && queues[h].front().is_some_and(|&q| q < pos));
            if !blocked {
                let l = word[pos];
                if best.is_none_or(|b| l < b) {
                    best = Some(l);
                }
            }
        }
        let l = best.expect("a nonempty heap has a minimal letter");
        queues[l.gen as usize].pop_front();
        out.push(l);
    }
    out
}

/// Reduced element of a right-angled Artin group in canonical heap form.
#[derive(Clone)]
pub struct NormalForm {
    graph: Arc<DefiningGraph>,
    letters: Vec<Letter>,
}

impl PartialEq for NormalForm {
    fn eq(&self, other: &Self) -> bool {
        self.letters == other.letters && same_graph(&self.graph, &other.graph)
    }
}

impl Eq for NormalForm {}

impl std::hash::Hash for NormalForm {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.letters.hash(state);
    }
}

fn same_graph(a: &Arc<DefiningGraph>, b: &Arc<DefiningGraph>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

impl fmt::Debug for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NormalForm({:?})", self.to_string())
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_word(&self.graph, &self.letters))
    }
}

/// Space-separated letters with inverses upper-cased; the identity is `1`.
pub fn format_word(dg: &DefiningGraph, letters: &[Letter]) -> String {
    if letters.is_empty() {
        return "1".to_string();
    }
    letters
        .iter()
        .map(|l| {
            let n = dg.name(l.gen);
            if l.inv {
                n.to_ascii_uppercase()
            } else {
                n.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Parses `a B c`, also accepting `b^-1` and `b⁻¹` for inverses.
pub fn parse_word(dg: &DefiningGraph, text: &str) -> Result<Vec<Letter>, RaagError> {
    let mut out = Vec::new();
    for tok in text.split_whitespace() {
        if tok == "1" {
            continue;
        }
        let (base, inv) = if let Some(b) = tok.strip_suffix("^-1").or_else(|| tok.strip_suffix("⁻¹")) {
            (b.to_string(), true)
        } else if tok.chars().any(|c| c.is_ascii_uppercase()) {
            if tok.chars().any(|c| c.is_ascii_lowercase()) {
                return Err(RaagError::Parse(format!("mixed-case token {tok:?}")));
            }
            (tok.to_ascii_lowercase(), true)
        } else {
            (tok.to_string(), false)
        };
        let g = dg.index(&base).ok_or(RaagError::UnknownGenerator(base))?;
        out.push(Letter::new(g, inv));
    }
    Ok(out)
}

impl NormalForm {
    pub fn identity(graph: &Arc<DefiningGraph>) -> Self {
        NormalForm {
            graph: graph.clone(),
            letters: Vec::new(),
        }
    }

    pub fn from_letters(graph: &Arc<DefiningGraph>, word: &[Letter]) -> Result<Self, RaagError> {
        if let Some(l) = word.iter().find(|l| l.gen as usize >= graph.generator_count()) {
            return Err(RaagError::UnknownGenerator(format!("#{}", l.gen)));
        }
        Ok(Self::from_reduced(graph, reduce(graph, word.iter().copied())))
    }

    /// Canonicalizes a word already known to be reduced.
    pub(crate) fn from_reduced(graph: &Arc<DefiningGraph>, reduced: Vec<Letter>) -> Self {
        NormalForm {
            letters: canonicalize(graph, &reduced),
            graph: graph.clone(),
        }
    }

    pub fn parse(graph: &Arc<DefiningGraph>, text: &str) -> Result<Self, RaagError> {
        Self::from_letters(graph, &parse_word(graph, text)?)
    }

    pub fn generator(graph: &Arc<DefiningGraph>, l: Letter) -> Self {
        NormalForm {
            graph: graph.clone(),
            letters: vec![l],
        }
    }

    pub fn graph(&self) -> &Arc<DefiningGraph> {
        &self.graph
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    fn check(&self, other: &NormalForm) -> Result<(), RaagError> {
        if same_graph(&self.graph, &other.graph) {
            Ok(())
        } else {
            Err(RaagError::DefiningGraphMismatch)
        }
    }

    pub fn mul(&self, other: &NormalForm) -> Result<NormalForm, RaagError> {
        self.check(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &NormalForm) -> NormalForm {
        self.mul_letters(&other.letters)
    }

    pub(crate) fn mul_letters(&self, letters: &[Letter]) -> NormalForm {
        let mut w = self.letters.clone();
        for &x in letters {
            push_reduced(&self.graph, &mut w, x);
        }
        NormalForm::from_reduced(&self.graph, w)
    }

    pub fn inv(&self) -> NormalForm {
        let w: Vec<Letter> = self.letters.iter().rev().map(|l| l.inverse()).collect();
        NormalForm::from_reduced(&self.graph, w)
    }

    pub fn pow(&self, n: u32) -> NormalForm {
        let mut w = Vec::new();
        for _ in 0..n {
            for &x in &self.letters {
                push_reduced(&self.graph, &mut w, x);
            }
        }
        NormalForm::from_reduced(&self.graph, w)
    }

    /// `|self⁻¹ other|` without building the canonical form.
    pub(crate) fn dist_unchecked(&self, other: &NormalForm) -> usize {
        let mut w = Vec::with_capacity(self.len() + other.len());
        for l in self.letters.iter().rev() {
            push_reduced(&self.graph, &mut w, l.inverse());
        }
        for &l in &other.letters {
            push_reduced(&self.graph, &mut w, l);
        }
        w.len()
    }

    pub fn dist(&self, other: &NormalForm) -> Result<usize, RaagError> {
        self.check(other)?;
        Ok(self.dist_unchecked(other))
    }

    /// Index of the first letter labelled `g`, if it is minimal in the heap.
    fn minimal_position(&self, g: u8) -> Option<usize> {
        let dep = self.graph.dependent(g);
        for (i, l) in self.letters.iter().enumerate() {
            if l.gen == g {
                return Some(i);
            }
            if dep >> l.gen & 1 == 1 {
                return None;
            }
        }
        None
    }

    /// Minimal letters of the heap.
    pub fn minimal_letters(&self) -> Vec<Letter> {
        (0..self.graph.generator_count() as u8)
            .filter_map(|g| self.minimal_position(g).map(|i| self.letters[i]))
            .collect()
    }

    /// Maximal letters of the heap.
    pub fn maximal_letters(&self) -> Vec<Letter> {
        self.inv().minimal_letters().into_iter().map(Letter::inverse).collect()
    }


    /// Median of three elements: `x` times the largest common prefix of
    /// `x⁻¹y` and `x⁻¹z`.
    pub fn median(x: &NormalForm, y: &NormalForm, z: &NormalForm) -> Result<NormalForm, RaagError> {
        x.check(y)?;
        x.check(z)?;
        let xi = x.inv();
        let a = xi.mul_unchecked(y);
        let b = xi.mul_unchecked(z);
        let common = common_prefix(&x.graph, &a.letters, &b.letters);
        Ok(x.mul_letters(&common))
    }

    /// `(x|y)_o` as the distance from `o` to the median.
    pub fn gromov(x: &NormalForm, y: &NormalForm, o: &NormalForm) -> Result<usize, RaagError> {
        let m = NormalForm::median(x, y, o)?;
        Ok(o.dist_unchecked(&m))
    }

    /// Horofunction `h_x(a) = d(x, a) - d(x, o)` at interior points.
    pub fn horofunction(x: &NormalForm, o: &NormalForm, a: &NormalForm) -> Result<i64, RaagError> {
        x.check(o)?;
        x.check(a)?;
        Ok(x.dist_unchecked(a) as i64 - x.dist_unchecked(o) as i64)
    }
}

/// Normal form of a word over `dg`.
pub fn nf(dg: &Arc<DefiningGraph>, word: &[Letter]) -> Result<NormalForm, RaagError> {
    NormalForm::from_letters(dg, word)
}

pub fn mul(a: &NormalForm, b: &NormalForm) -> Result<NormalForm, RaagError> {
    a.mul(b)
}

pub fn inv(a: &NormalForm) -> NormalForm {
    a.inv()
}

pub fn dist(a: &NormalForm, b: &NormalForm) -> Result<usize, RaagError> {
    a.dist(b)
}

pub fn median_raag(x: &NormalForm, y: &NormalForm, z: &NormalForm) -> Result<NormalForm, RaagError> {
    NormalForm::median(x, y, z)
}

pub fn gromov_raag(x: &NormalForm, y: &NormalForm, o: &NormalForm) -> Result<usize, RaagError> {
    NormalForm::gromov(x, y, o)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(dg: &DefiningGraph) -> Arc<DefiningGraph> {
        Arc::new(dg.clone())
    }

    #[test]
    fn normal_form_examples() {
        let f2 = g(&DefiningGraph::f2());
        let w = NormalForm::parse(&f2, "a A b").unwrap();
        assert_eq!(w.to_string(), "b");
        assert_eq!(w.len(), 1);
        let z2 = g(&DefiningGraph::z2());
        assert_eq!(NormalForm::parse(&z2, "b a").unwrap().to_string(), "a b");
        let c5 = g(&DefiningGraph::c5());
        assert_eq!(NormalForm::parse(&c5, "v1 v3 V1").unwrap().len(), 3);
        assert_eq!(NormalForm::parse(&c5, "v1 v2 V1").unwrap().to_string(), "v2");
        assert_eq!(NormalForm::parse(&f2, "a^-1 b⁻¹").unwrap().to_string(), "A B");
        assert!(matches!(NormalForm::parse(&f2, "a c"), Err(RaagError::UnknownGenerator(_))));
        assert_eq!(NormalForm::parse(&f2, "1").unwrap().to_string(), "1");
    }

    #[test]
    fn group_operations() {
        let f2 = g(&DefiningGraph::f2());
        let a = NormalForm::parse(&f2, "a").unwrap();
        let b = NormalForm::parse(&f2, "b").unwrap();
        assert_eq!(a.dist(&a).unwrap(), 0);
        assert_eq!(a.dist(&b).unwrap(), 2);
        assert!(a.mul(&a.inv()).unwrap().is_identity());
        let z2 = g(&DefiningGraph::z2());
        let za = NormalForm::parse(&z2, "a").unwrap();
        assert_eq!(a.mul(&za), Err(RaagError::DefiningGraphMismatch));
    }

    #[test]
    fn median_examples() {
        let z2 = g(&DefiningGraph::z2());
        let p = |s| NormalForm::parse(&z2, s).unwrap();
        assert_eq!(NormalForm::median(&p("1"), &p("a"), &p("a b")).unwrap(), p("a"));
        let f2 = g(&DefiningGraph::f2());
        let q = |s| NormalForm::parse(&f2, s).unwrap();
        assert_eq!(NormalForm::median(&q("1"), &q("a b"), &q("a B")).unwrap(), q("a"));
        assert_eq!(NormalForm::gromov(&q("a b"), &q("a B"), &q("1")).unwrap(), 1);
        assert_eq!(NormalForm::gromov(&q("a b"), &q("b"), &q("a b")).unwrap(), 0);
        let x = q("a b A");
        assert_eq!(NormalForm::median(&x, &x, &q("b b")).unwrap(), x);
    }

    #[test]
    fn defining_graph_json() {
        let c5 = DefiningGraph::c5();
        let back = DefiningGraph::from_json(&c5.to_json()).unwrap();
        assert_eq!(back, c5);
        assert!(DefiningGraph::from_json(r#"{"generators":["a","B"],"edges":[]}"#).is_err());
        assert!(DefiningGraph::from_json(r#"{"generators":["a"],"edges":[["a","c"]]}"#).is_err());
        assert!(DefiningGraph::from_json(r#"{"generators":["a"],"edges":[],"x":1}"#).is_err());
        assert_eq!(DefiningGraph::preset("cycle6").unwrap().generator_count(), 6);
        assert_eq!(DefiningGraph::preset("abelian3").unwrap().edges().len(), 3);
    }
}
