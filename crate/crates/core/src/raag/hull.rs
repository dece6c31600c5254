//! Finite convex hulls of element sets, as validated median complexes.

use std::collections::VecDeque;
use std::sync::Arc;

use rustc_hash::{FxHashMap, FxHashSet};

use super::walls::{pieces, wall_key, SsWitness, WallKey};
use super::{DefiningGraph, Letter, NormalForm, RaagError};
use crate::median::{build_complex, FiniteMedianComplex, Vertex};
use crate::wallgeom::{wall_relation, WallRelation};

/// Convex hull of a point set in the Cayley graph.
#[derive(Debug, Clone)]
pub struct Hull {
    pub complex: FiniteMedianComplex,
    /// Group element of each vertex.
    pub elements: Vec<NormalForm>,
    /// Vertex of each input point.
    pub point_vertices: Vec<Vertex>,
    index: FxHashMap<Vec<Letter>, Vertex>,
}

impl Hull {
    pub fn vertex_of(&self, g: &NormalForm) -> Option<Vertex> {
        self.index.get(g.letters()).copied()
    }

    /// Wall of the hull dual to the edge `(g, g·t)`.
    pub fn wall_of_edge(&self, g: &NormalForm, t: Letter) -> Option<usize> {
        let a = self.vertex_of(g)?;
        let b = self.vertex_of(&g.mul_letters(&[t]))?;
        self.complex.wall_of_edge(a, b)
    }
}

fn edge_key(g: &NormalForm, t: Letter) -> WallKey {
    if t.inv {
        wall_key(&g.mul_letters(&[t]), t.gen)
    } else {
        wall_key(g, t.gen)
    }
}

/// Vertices whose separating walls from the first point all separate it from
/// some point of the set; i.e. the intersection of all half-spaces containing
/// the set.
pub fn hull_materialize(points: &[NormalForm], budget: usize) -> Result<Hull, RaagError> {
    let Some(s0) = points.first() else {
        return Ok(Hull {
            complex: build_complex(1, &[]).expect("single vertex"),
            elements: Vec::new(),
            point_vertices: Vec::new(),
            index: FxHashMap::default(),
        });
    };
    let dg: &Arc<DefiningGraph> = s0.graph();
    for p in points {
        if p.graph() != dg && **p.graph() != **dg {
            return Err(RaagError::DefiningGraphMismatch);
        }
    }
    let s0_inv = s0.inv();
    let mut walls: FxHashSet<WallKey> = FxHashSet::default();
    for p in points {
        walls.extend(pieces(&s0_inv.mul_unchecked(p)).iter().map(|pc| pc.wall_key()));
    }
    let letters = dg.letters();
    let e = NormalForm::identity(dg);
    let mut rel: Vec<NormalForm> = vec![e.clone()];
    let mut index: FxHashMap<Vec<Letter>, Vertex> = FxHashMap::default();
    index.insert(Vec::new(), 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        let g = rel[v].clone();
        for &t in &letters {
            let h = g.mul_letters(&[t]);
            if h.len() != g.len() + 1 || index.contains_key(h.letters()) {
                continue;
            }
            if walls.contains(&edge_key(&g, t)) {
                if rel.len() >= budget {
                    return Err(RaagError::BudgetExceeded(rel.len() + 1));
                }
                index.insert(h.letters().to_vec(), rel.len());
                queue.push_back(rel.len());
                rel.push(h);
            }
        }
    }
    let mut edges = Vec::new();
    for (v, g) in rel.iter().enumerate() {
        for &t in letters.iter().filter(|t| !t.inv) {
            if let Some(&w) = index.get(g.mul_letters(&[t]).letters()) {
                edges.push((v, w));
            }
        }
    }
    let complex = build_complex(rel.len(), &edges).map_err(|e| RaagError::Parse(format!("hull is not median: {e}")))?;
    let elements: Vec<NormalForm> = rel.iter().map(|g| s0.mul_unchecked(g)).collect();
    let index: FxHashMap<Vec<Letter>, Vertex> =
        elements.iter().enumerate().map(|(i, g)| (g.letters().to_vec(), i)).collect();
    let point_vertices = points.iter().map(|p| index[p.letters()]).collect();
    Ok(Hull {
        complex,
        elements,
        point_vertices,
        index,
    })
}

/// Re-checks a strong-separation witness inside a hull: the witness wall is
/// dual to edges at both corners and crosses both walls there.
pub fn verify_witness_in_hull(
    base_p: &NormalForm,
    p: u8,
    base_q: &NormalForm,
    q: u8,
    witness: &SsWitness,
    budget: usize,
) -> Result<bool, RaagError> {
    let (pl, ql, ul) = (Letter::new(p, false), Letter::new(q, false), Letter::new(witness.label, false));
    let v1 = &witness.p_corner;
    let v2 = &witness.q_corner;
    let mut points = vec![base_p.clone(), base_p.mul_letters(&[pl]), base_q.clone(), base_q.mul_letters(&[ql])];
    for (v, l) in [(v1, pl), (v2, ql)] {
        points.extend([v.clone(), v.mul_letters(&[l]), v.mul_letters(&[ul]), v.mul_letters(&[l, ul])]);
    }
    let hull = hull_materialize(&points, budget)?;
    let wall = |g: &NormalForm, t: Letter| hull.wall_of_edge(g, t);
    let (Some(wp), Some(wq), Some(wp1), Some(wq2), Some(t1), Some(t2)) = (
        wall(base_p, pl),
        wall(base_q, ql),
        wall(v1, pl),
        wall(v2, ql),
        wall(v1, ul),
        wall(v2, ul),
    ) else {
        return Ok(false);
    };
    let rel = |a, b| wall_relation(&hull.complex, a, b).expect("walls of the hull");
    Ok(wp == wp1
        && wq == wq2
        && t1 == t2
        && wp != wq
        && rel(t1, wp) == WallRelation::Transverse
        && rel(t1, wq) == WallRelation::Transverse)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hull_examples() {
        let z2 = Arc::new(DefiningGraph::z2());
        let e = NormalForm::identity(&z2);
        let ab = NormalForm::parse(&z2, "a b").unwrap();
        let h = hull_materialize(&[e.clone(), ab.clone()], 100).unwrap();
        assert_eq!(h.complex.vertex_count(), 4);
        assert_eq!(h.complex.edges().len(), 4);
        let f2 = Arc::new(DefiningGraph::f2());
        let g = NormalForm::parse(&f2, "a b B b a A").unwrap();
        let h = hull_materialize(&[NormalForm::identity(&f2), g.clone()], 100).unwrap();
        assert_eq!(h.complex.vertex_count(), g.len() + 1);
        let again = hull_materialize(&h.elements, 100).unwrap();
        assert_eq!(again.complex.vertex_count(), h.complex.vertex_count());
        let big = NormalForm::parse(&z2, "a a a a b b b b").unwrap();
        assert_eq!(hull_materialize(&[e, big], 10).unwrap_err(), RaagError::BudgetExceeded(11));
    }
}
