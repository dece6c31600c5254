//! Property tests over generated complexes, RAAG elements and walks.

use std::sync::Arc;

use medianwalk::raag::{self, DefiningGraph, Letter, NormalForm};
use medianwalk::walk::{self, SimOptions, StepMeasure};
use medianwalk::wallgeom::{self, WallGeometry, WallRelation};
use medianwalk::{generate_family, FamilySpec, FiniteMedianComplex, Halfspace};
use proptest::prelude::*;

fn family() -> impl Strategy<Value = FamilySpec> {
    prop_oneof![
        (1usize..30).prop_map(|vertices| FamilySpec::Path { vertices }),
        (any::<u64>(), 1usize..60).prop_map(|(seed, size)| FamilySpec::Tree { seed, size }),
        (1usize..6, 1usize..6).prop_map(|(p, q)| FamilySpec::Grid { p, q }),
        (0usize..6).prop_map(|dim| FamilySpec::Hypercube { dim }),
        (0usize..4).prop_map(|depth| FamilySpec::BinaryTree { depth }),
        (any::<u64>(), 3usize..8, 2usize..6).prop_map(|(seed, dim, points)| FamilySpec::MedianClosure { seed, dim, points }),
        ((any::<u64>(), 2usize..8), 2usize..4).prop_map(|((seed, size), vertices)| FamilySpec::Product {
            left: Box::new(FamilySpec::Tree { seed, size }),
            right: Box::new(FamilySpec::Path { vertices }),
        }),
    ]
}

fn complex_and_points(k: usize) -> impl Strategy<Value = (FiniteMedianComplex, Vec<usize>)> {
    family().prop_flat_map(move |spec| {
        let c = generate_family(&spec).unwrap();
        let n = c.vertex_count();
        (Just(c), prop::collection::vec(0..n, k))
    })
}

fn graph() -> impl Strategy<Value = Arc<DefiningGraph>> {
    prop_oneof![
        Just(DefiningGraph::f2()),
        Just(DefiningGraph::z2()),
        Just(DefiningGraph::c5()),
        Just(DefiningGraph::free(3)),
        Just(DefiningGraph::cycle(4)),
        Just(DefiningGraph::cycle(6)),
    ]
    .prop_map(Arc::new)
}

fn word(dg: &DefiningGraph, max_len: usize) -> impl Strategy<Value = Vec<Letter>> {
    prop::collection::vec(prop::sample::select(dg.letters()), 0..=max_len)
}

fn graph_and_words(k: usize, max_len: usize) -> impl Strategy<Value = (Arc<DefiningGraph>, Vec<NormalForm>)> {
    graph().prop_flat_map(move |dg| {
        let words = prop::collection::vec(word(&dg, max_len), k);
        (Just(dg.clone()), words).prop_map(|(dg, ws)| {
            let elems = ws.iter().map(|w| raag::nf(&dg, w).unwrap()).collect();
            (dg, elems)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn median_is_symmetric_and_idempotent((c, p) in complex_and_points(3)) {
        let (x, y, z) = (p[0], p[1], p[2]);
        let m = c.median(x, y, z).unwrap();
        prop_assert_eq!(m, c.median(y, x, z).unwrap());
        prop_assert_eq!(m, c.median(z, y, x).unwrap());
        prop_assert_eq!(c.median(x, x, y).unwrap(), x);
    }

    #[test]
    fn median_lies_on_all_three_intervals((c, p) in complex_and_points(3)) {
        let (x, y, z) = (p[0], p[1], p[2]);
        let m = c.median(x, y, z).unwrap();
        for (a, b) in [(x, y), (y, z), (x, z)] {
            prop_assert_eq!(c.distance(a, m) + c.distance(m, b), c.distance(a, b));
        }
        prop_assert_eq!(c.median_by_intervals(x, y, z).unwrap(), vec![m]);
    }

    #[test]
    fn distance_counts_separating_walls((c, p) in complex_and_points(2)) {
        let (x, y) = (p[0], p[1]);
        let walls = c.separating_walls(x, y);
        prop_assert_eq!(walls.len(), c.distance(x, y));
        for w in walls {
            prop_assert_ne!(c.side_of(x, w), c.side_of(y, w));
        }
    }

    #[test]
    fn gromov_product_is_distance_to_median((c, p) in complex_and_points(3)) {
        let (x, y, o) = (p[0], p[1], p[2]);
        let m = c.median(x, y, o).unwrap();
        prop_assert_eq!(c.gromov_product(x, y, o).unwrap(), c.distance(o, m));
        let doubled = c.distance(o, x) + c.distance(o, y) - c.distance(x, y);
        prop_assert_eq!(2 * c.gromov_product(x, y, o).unwrap(), doubled);
    }

    #[test]
    fn intervals_agree((c, p) in complex_and_points(2)) {
        let mut a = c.interval(p[0], p[1]).unwrap();
        let mut b = c.interval_by_halfspaces(p[0], p[1]);
        a.sort_unstable();
        b.sort_unstable();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn halfspaces_are_convex((c, p) in complex_and_points(2)) {
        for w in 0..c.wall_count() {
            for side in [false, true] {
                let h = Halfspace::new(w, side);
                if c.contains(h, p[0]) && c.contains(h, p[1]) {
                    for v in c.interval(p[0], p[1]).unwrap() {
                        prop_assert!(c.contains(h, v));
                    }
                }
            }
        }
    }

    #[test]
    fn json_round_trip_preserves_hash((c, _) in complex_and_points(0)) {
        let back = FiniteMedianComplex::from_json(&c.to_json(true)).unwrap();
        prop_assert_eq!(back.content_hash(), c.content_hash());
        prop_assert_eq!(back.wall_count(), c.wall_count());
    }

    #[test]
    fn wall_relations_are_symmetric_and_exclusive((c, _) in complex_and_points(0)) {
        let g = WallGeometry::new(&c).unwrap();
        let k = c.wall_count().min(24);
        for a in 0..k {
            for b in 0..k {
                prop_assert_eq!(g.relation(a, b), g.relation(b, a));
                if a != b {
                    let ss = g.is_strongly_separated(a, b);
                    let tr = g.is_transverse(a, b);
                    prop_assert!(!(ss && tr));
                    prop_assert_eq!(ss, wallgeom::strongly_separated(&c, a, b).unwrap());
                    prop_assert_eq!(g.relation(a, b) == WallRelation::Transverse, tr);
                }
            }
        }
    }

    #[test]
    fn ss_chains_are_nested_and_separating((c, p) in complex_and_points(2)) {
        let g = WallGeometry::new(&c).unwrap();
        let chain = g.max_ss_chain(p[0], p[1]).unwrap();
        let seps = c.separating_walls(p[0], p[1]);
        prop_assert!(chain.len() <= seps.len());
        for (i, h) in chain.iter().enumerate() {
            prop_assert!(seps.contains(&h.wall));
            for k in chain.iter().skip(i + 1) {
                prop_assert!(g.is_strongly_separated(h.wall, k.wall));
            }
        }
        prop_assert_eq!(wallgeom::max_ss_set(&c, p[0], p[1]).unwrap(), chain.len());
    }

    #[test]
    fn remark_ss_holds((c, _) in complex_and_points(0)) {
        prop_assert!(wallgeom::verify_remark_ss(&c).unwrap().counterexample.is_none());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn group_laws((_dg, e) in graph_and_words(3, 10)) {
        let (x, y, z) = (&e[0], &e[1], &e[2]);
        let xy_z = x.mul(y).unwrap().mul(z).unwrap();
        let x_yz = x.mul(&y.mul(z).unwrap()).unwrap();
        prop_assert_eq!(&xy_z, &x_yz);
        prop_assert!(x.mul(&x.inv()).unwrap().is_identity());
        prop_assert_eq!(x.inv().len(), x.len());
        prop_assert!(x.mul(y).unwrap().len() <= x.len() + y.len());
    }

    #[test]
    fn normal_form_is_idempotent((_dg, e) in graph_and_words(1, 14)) {
        let g = &e[0];
        let again = NormalForm::from_letters(g.graph(), g.letters()).unwrap();
        prop_assert_eq!(&again, g);
        prop_assert_eq!(NormalForm::parse(g.graph(), &g.to_string()).unwrap(), g.clone());
    }

    #[test]
    fn word_metric_is_left_invariant((_dg, e) in graph_and_words(3, 8)) {
        let (g, x, y) = (&e[0], &e[1], &e[2]);
        let d = x.dist(y).unwrap();
        prop_assert_eq!(g.mul(x).unwrap().dist(&g.mul(y).unwrap()).unwrap(), d);
        prop_assert_eq!(d, y.dist(x).unwrap());
        prop_assert!(d <= x.len() + y.len());
    }

    #[test]
    fn raag_median_axioms((_dg, e) in graph_and_words(4, 8)) {
        let (x, y, z, g) = (&e[0], &e[1], &e[2], &e[3]);
        let m = NormalForm::median(x, y, z).unwrap();
        prop_assert_eq!(&m, &NormalForm::median(y, z, x).unwrap());
        prop_assert_eq!(&m, &NormalForm::median(z, x, y).unwrap());
        for (a, b) in [(x, y), (y, z), (x, z)] {
            prop_assert_eq!(a.dist(&m).unwrap() + m.dist(b).unwrap(), a.dist(b).unwrap());
        }
        let gm = NormalForm::median(&g.mul(x).unwrap(), &g.mul(y).unwrap(), &g.mul(z).unwrap()).unwrap();
        prop_assert_eq!(gm, g.mul(&m).unwrap());
        prop_assert_eq!(NormalForm::gromov(x, y, z).unwrap(), z.dist(&m).unwrap());
    }

    #[test]
    fn pieces_match_length((_dg, e) in graph_and_words(1, 12)) {
        let g = &e[0];
        let ps = raag::pieces(g);
        prop_assert_eq!(ps.len(), g.len());
        let mut keys: Vec<_> = ps.iter().map(|p| p.wall_key()).collect();
        keys.sort();
        keys.dedup();
        prop_assert_eq!(keys.len(), ps.len());
    }

    #[test]
    fn certificates_only_for_nested_pieces((_dg, e) in graph_and_words(1, 10)) {
        let g = &e[0];
        let n = raag::pieces(g).len();
        for p in 0..n {
            for q in (p + 1)..n {
                let c = raag::ss_pieces(g, p, q, raag::DEFAULT_RADIUS);
                // transverse pieces are rejected outright
                prop_assert_eq!(c.is_err(), raag::transverse_pieces(g, p, q).unwrap());
            }
        }
    }

    #[test]
    fn horofunction_is_one_lipschitz((_dg, e) in graph_and_words(4, 8)) {
        let (x, o, a, b) = (&e[0], &e[1], &e[2], &e[3]);
        let ha = NormalForm::horofunction(x, o, a).unwrap();
        let hb = NormalForm::horofunction(x, o, b).unwrap();
        prop_assert!((ha - hb).unsigned_abs() as usize <= a.dist(b).unwrap());
        prop_assert_eq!(NormalForm::horofunction(x, o, o).unwrap(), 0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn walks_are_reproducible_and_lipschitz(dg in graph(), seed in any::<u64>(), n in 1usize..200) {
        let m = StepMeasure::srw(&dg);
        let a = walk::simulate(&dg, &m, seed, n, 8, &SimOptions::default());
        let b = walk::simulate(&dg, &m, seed, n, 8, &SimOptions::default());
        prop_assert_eq!(a.final_distances(), b.final_distances());
        for t in &a.trials {
            prop_assert!(t.max_increment as usize <= m.max_step());
            for (d, s) in t.d.iter().zip(&t.s_lower) {
                prop_assert!(s <= d);
            }
        }
        for (i, d) in a.final_distances().into_iter().enumerate() {
            prop_assert!(d as usize <= n);
            prop_assert_eq!(a.endpoint(i).len(), d as usize);
        }
    }

    #[test]
    fn measures_validate_iff_supported(hold in 0.0f64..0.95) {
        let dg = Arc::new(DefiningGraph::f2());
        let lazy = StepMeasure::lazy(&dg, hold);
        prop_assert!(walk::validate_measure(&dg, &lazy, 6, false).is_ok());
        let total: f64 = lazy.support.iter().map(|(_, p)| p).sum();
        prop_assert!((total - 1.0).abs() < walk::PROB_TOLERANCE);
        let a = dg.letters()[0];
        prop_assert!(walk::validate_measure(&dg, &StepMeasure::point_mass(vec![a]), 6, false).is_err());
    }
}
