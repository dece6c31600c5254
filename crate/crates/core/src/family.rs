//! Generators for standard families of finite median graphs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::median::{build_complex, ComplexError, FiniteMedianComplex, Vertex};

/// Default cap on generated vertex counts.
pub const DEFAULT_SIZE_BUDGET: usize = 8192;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    /// Path on `vertices` vertices.
    Path { vertices: usize },
    /// Random recursive tree: vertex `i` attaches to a uniform earlier vertex.
    Tree { seed: u64, size: usize },
    /// Complete binary tree of the given depth (depth 0 is a single vertex).
    BinaryTree { depth: usize },
    /// `p x q` grid, the product of paths on `p` and `q` vertices.
    Grid { p: usize, q: usize },
    Hypercube { dim: usize },
    Product { left: Box<FamilySpec>, right: Box<FamilySpec> },
    /// Majority closure of random points of the `dim`-cube with its betweenness graph.
    MedianClosure { seed: u64, dim: usize, points: usize },
}

/// Plain undirected graph description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    pub vertices: usize,
    pub edges: Vec<(Vertex, Vertex)>,
}

impl FamilySpec {
    /// Short human-readable label, e.g. `grid(3,3)`.
    pub fn label(&self) -> String {
        match self {
            FamilySpec::Path { vertices } => format!("path({vertices})"),
            FamilySpec::Tree { seed, size } => format!("tree(seed={seed},size={size})"),
            FamilySpec::BinaryTree { depth } => format!("binary_tree({depth})"),
            FamilySpec::Grid { p, q } => format!("grid({p},{q})"),
            FamilySpec::Hypercube { dim } => format!("hypercube({dim})"),
            FamilySpec::Product { left, right } => format!("product({},{})", left.label(), right.label()),
            FamilySpec::MedianClosure { seed, dim, points } => {
                format!("median_closure(seed={seed},dim={dim},points={points})")
            }
        }
    }

    pub fn graph(&self, budget: usize) -> Result<Graph, ComplexError> {
        let g = match self {
            FamilySpec::Path { vertices } => {
                check_budget(*vertices, budget)?;
                Graph {
                    vertices: *vertices,
                    edges: (1..*vertices).map(|i| (i - 1, i)).collect(),
                }
            }
            FamilySpec::Tree { seed, size } => {
                check_budget(*size, budget)?;
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Graph {
                    vertices: *size,
                    edges: (1..*size).map(|i| (rng.random_range(0..i), i)).collect(),
                }
            }
            FamilySpec::BinaryTree { depth } => {
                let size = 1usize.checked_shl(*depth as u32 + 1).map(|s| s - 1).unwrap_or(usize::MAX);
                check_budget(size, budget)?;
                Graph {
                    vertices: size,
                    edges: (1..size).map(|i| ((i - 1) / 2, i)).collect(),
                }
            }
            FamilySpec::Grid { p, q } => product(
                &FamilySpec::Path { vertices: *p }.graph(budget)?,
                &FamilySpec::Path { vertices: *q }.graph(budget)?,
                budget,
            )?,
            FamilySpec::Hypercube { dim } => {
                let size = 1usize.checked_shl(*dim as u32).unwrap_or(usize::MAX);
                check_budget(size, budget)?;
                let mut edges = Vec::new();
                for v in 0..size {
                    for b in 0..*dim {
                        let w = v ^ (1 << b);
                        if v < w {
                            edges.push((v, w));
                        }
                    }
                }
                Graph { vertices: size, edges }
            }
            FamilySpec::Product { left, right } => product(&left.graph(budget)?, &right.graph(budget)?, budget)?,
            FamilySpec::MedianClosure { seed, dim, points } => median_closure(*seed, *dim, *points, budget)?,
        };
        Ok(g)
    }
}

fn check_budget(size: usize, budget: usize) -> Result<(), ComplexError> {
    if size > budget {
        Err(ComplexError::SizeBudgetExceeded(size))
    } else {
        Ok(())
    }
}

/// Cartesian product; vertex `(a, b)` is `a * |right| + b`.
fn product(left: &Graph, right: &Graph, budget: usize) -> Result<Graph, ComplexError> {
    let size = left.vertices.checked_mul(right.vertices).unwrap_or(usize::MAX);
    check_budget(size, budget)?;
    let nr = right.vertices;
    let mut edges = Vec::new();
    for &(u, v) in &left.edges {
        for b in 0..nr {
            edges.push((u * nr + b, v * nr + b));
        }
    }
    for a in 0..left.vertices {
        for &(u, v) in &right.edges {
            edges.push((a * nr + u, a * nr + v));
        }
    }
    Ok(Graph { vertices: size, edges })
}

fn median_closure(seed: u64, dim: usize, points: usize, budget: usize) -> Result<Graph, ComplexError> {
    assert!((1..=63).contains(&dim), "median_closure supports 1..=63 coordinates");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mask = (1u64 << dim) - 1;
    let mut set: Vec<u64> = Vec::new();
    let mut seen = FxHashSet::default();
    for _ in 0..points.max(1) {
        let p = rng.random::<u64>() & mask;
        if seen.insert(p) {
            set.push(p);
        }
    }
    // close under coordinatewise majority
    let mut frontier = 0;
    while frontier < set.len() {
        let end = set.len();
        for k in frontier..end {
            for i in 0..end {
                for j in (i + 1)..end {
                    let (a, b, c) = (set[i], set[j], set[k]);
                    let m = (a & b) | (b & c) | (a & c);
                    if seen.insert(m) {
                        set.push(m);
                        check_budget(set.len(), budget)?;
                    }
                }
            }
        }
        frontier = end;
    }
    set.sort_unstable();
    let n = set.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (set[i], set[j]);
            let (lo, hi) = (a & b, a | b);
            let between = set
                .iter()
                .any(|&c| c != a && c != b && c & lo == lo && c & !hi == 0);
            if !between {
                edges.push((i, j));
            }
        }
    }
    Ok(Graph { vertices: n, edges })
}

/// Build and validate a member of a family under the default size budget.
pub fn generate_family(spec: &FamilySpec) -> Result<FiniteMedianComplex, ComplexError> {
    generate_family_with_budget(spec, DEFAULT_SIZE_BUDGET)
}

pub fn generate_family_with_budget(spec: &FamilySpec, budget: usize) -> Result<FiniteMedianComplex, ComplexError> {
    let g = spec.graph(budget)?;
    build_complex(g.vertices, &g.edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hypercube_and_grid_wall_counts() {
        assert_eq!(generate_family(&FamilySpec::Hypercube { dim: 3 }).unwrap().wall_count(), 3);
        assert_eq!(generate_family(&FamilySpec::Grid { p: 3, q: 3 }).unwrap().wall_count(), 4);
    }

    #[test]
    fn product_of_edges_is_square() {
        let p2 = FamilySpec::Path { vertices: 2 };
        let c4 = generate_family(&FamilySpec::Product {
            left: Box::new(p2.clone()),
            right: Box::new(p2),
        })
        .unwrap();
        assert_eq!(c4.vertex_count(), 4);
        assert_eq!(c4.edges().len(), 4);
        assert!((0..4).all(|v| c4.neighbors(v).len() == 2));
    }

    #[test]
    fn trees_have_one_wall_per_edge() {
        for seed in 0..5 {
            let t = generate_family(&FamilySpec::Tree { seed, size: 40 }).unwrap();
            assert_eq!(t.wall_count(), 39);
        }
        let b = generate_family(&FamilySpec::BinaryTree { depth: 4 }).unwrap();
        assert_eq!(b.vertex_count(), 31);
    }

    #[test]
    fn median_closures_validate() {
        for seed in 0..6 {
            let spec = FamilySpec::MedianClosure { seed, dim: 6, points: 5 };
            let c = generate_family(&spec).unwrap();
            assert!(c.vertex_count() >= 1);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let err = generate_family_with_budget(&FamilySpec::Hypercube { dim: 12 }, 1000).unwrap_err();
        assert_eq!(err, ComplexError::SizeBudgetExceeded(4096));
    }

    #[test]
    fn spec_json_shape() {
        let spec: FamilySpec = serde_json::from_str(r#"{"family": "grid", "p": 3, "q": 4}"#).unwrap();
        assert_eq!(spec, FamilySpec::Grid { p: 3, q: 4 });
        assert!(serde_json::from_str::<FamilySpec>(r#"{"family": "grid", "p": 3, "q": 4, "r": 1}"#).is_err());
    }
}
