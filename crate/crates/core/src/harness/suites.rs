//! Verification suites and experiments behind the command line.

use std::collections::VecDeque;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustc_hash::FxHashSet;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{read, ExperimentConfig};
use super::emit::walk_csv;
use super::HarnessError;
use crate::family::{generate_family_with_budget, FamilySpec};
use crate::median::FiniteMedianComplex;
use crate::raag::{
    find_rank1_witness, hull_materialize, is_join, pieces, ss_pieces, transverse_pieces, translation_length,
    verify_witness_in_hull, DefiningGraph, Letter, NormalForm, SsCertificate, TranslationMode,
};
use crate::report::VerificationReport;
use crate::walk::{
    boite_monitor, clt_report, cocycle_check, deviation_profile, gromov_identity_check, horofunction_translation,
    psi_sigma_estimate_with, random_element, simulate, trial_rng, SimOptions, WalkRun,
};
use crate::wallgeom::{BoxLemmaMode, RemarkSsReport, WallGeometry, WallRelation};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: Value,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: Value) -> Self {
        Check {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

/// Output of one suite before it is written to disk.
#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub suite: String,
    pub passed: bool,
    pub report: Value,
    pub csv: Option<String>,
    /// Further files as `(suffix, contents)`, written next to the report.
    pub extra_files: Vec<(String, String)>,
}

fn finish(suite: &str, checks: Vec<Check>, mut body: Value, csv: Option<String>) -> SuiteResult {
    let passed = checks.iter().all(|c| c.passed);
    body["suite"] = json!(suite);
    body["passed"] = json!(passed);
    body["checks"] = serde_json::to_value(&checks).unwrap();
    SuiteResult {
        suite: suite.to_string(),
        passed,
        report: body,
        csv,
        extra_files: Vec::new(),
    }
}

fn schema(key: &str, message: impl Into<String>) -> HarnessError {
    HarnessError::SchemaViolation {
        key: key.into(),
        message: message.into(),
    }
}

/// A deterministic mix of trees, grids, cubes up to Q6, products, binary
/// trees, paths and median closures, each with at most `max_vertices` vertices.
pub fn standard_families(count: usize, seed: u64, max_vertices: usize) -> Vec<(FamilySpec, FiniteMedianComplex)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut i = 0usize;
    while out.len() < count && i < count * 20 + 100 {
        let s = rng.random::<u64>();
        let spec = match i % 7 {
            0 => FamilySpec::Tree {
                seed: s,
                size: rng.random_range(2..=400),
            },
            1 => FamilySpec::Grid {
                p: rng.random_range(2..=16),
                q: rng.random_range(2..=16),
            },
            2 => FamilySpec::Hypercube {
                dim: rng.random_range(1..=6),
            },
            3 => FamilySpec::Product {
                left: Box::new(FamilySpec::Tree {
                    seed: s,
                    size: rng.random_range(2..=12),
                }),
                right: Box::new(if rng.random_bool(0.5) {
                    FamilySpec::Path {
                        vertices: rng.random_range(2..=20),
                    }
                } else {
                    FamilySpec::Grid {
                        p: rng.random_range(2..=5),
                        q: rng.random_range(2..=5),
                    }
                }),
            },
            4 => FamilySpec::MedianClosure {
                seed: s,
                dim: rng.random_range(4..=9),
                points: rng.random_range(3..=7),
            },
            5 => FamilySpec::BinaryTree {
                depth: rng.random_range(1..=7),
            },
            _ => FamilySpec::Path {
                vertices: rng.random_range(2..=80),
            },
        };
        i += 1;
        if let Ok(c) = generate_family_with_budget(&spec, max_vertices) {
            out.push((spec, c));
        }
    }
    out
}

/// Lemma checks on one complex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexCheck {
    pub label: String,
    pub complex_hash: String,
    pub vertices: usize,
    pub walls: usize,
    pub median_oracle: VerificationReport,
    pub box_lemma: VerificationReport,
    pub remark_ss: RemarkSsReport,
    pub projection: VerificationReport,
    pub chain_gromov: VerificationReport,
}

impl ComplexCheck {
    pub fn violations(&self) -> u64 {
        self.median_oracle.violations
            + self.box_lemma.violations
            + u64::from(self.remark_ss.counterexample.is_some())
            + self.projection.violations
            + self.chain_gromov.violations
    }
}

/// Half-space majority median against interval intersection on random triples.
pub fn median_oracle(c: &FiniteMedianComplex, triples: usize, seed: u64) -> VerificationReport {
    let mut report = VerificationReport::new("median_oracle", c);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = c.vertex_count();
    for _ in 0..triples {
        let (x, y, z) = (rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n));
        let m = c.median(x, y, z).expect("vertices in range");
        let by_intervals = c.median_by_intervals(x, y, z).expect("vertices in range");
        report.cases_checked += 1;
        report.hypothesis_cases += 1;
        if by_intervals != [m] {
            report.violation(json!({"x": x, "y": y, "z": z, "median": m, "intervals": by_intervals}));
        }
    }
    report
}

pub fn check_complex(
    label: &str,
    c: &FiniteMedianComplex,
    cfg: &ExperimentConfig,
    samples: usize,
    seed: u64,
) -> Result<ComplexCheck, HarnessError> {
    let geom = WallGeometry::new(c).map_err(|e| HarnessError::Integrity(e.to_string()))?;
    let n = c.vertex_count();
    let mode = if n <= cfg.exhaustive_limit {
        BoxLemmaMode::Exhaustive
    } else {
        BoxLemmaMode::Sampled {
            quadruples: cfg.box_quadruples,
            seed,
        }
    };
    let mut chain_gromov = VerificationReport::new("chain_gromov", c);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6368_6169_6e00);
    for _ in 0..samples {
        let (x, y) = (rng.random_range(0..n), rng.random_range(0..n));
        let chain = geom.max_ss_chain(x, y).expect("vertices in range");
        match geom.verify_chain_gromov(&chain) {
            Ok(r) => chain_gromov.merge(&r),
            Err(e) => chain_gromov.violation(json!({"x": x, "y": y, "error": e.to_string()})),
        }
    }
    Ok(ComplexCheck {
        label: label.to_string(),
        complex_hash: c.content_hash(),
        vertices: n,
        walls: c.wall_count(),
        median_oracle: median_oracle(c, cfg.triples, seed),
        box_lemma: geom.verify_box_lemma(mode),
        remark_ss: geom.verify_remark_ss(),
        projection: geom.verify_projection_lemma(samples, cfg.projection_threshold, seed),
        chain_gromov,
    })
}

/// The complexes a lemma run covers: an explicit complex, an explicit list,
/// or the standard families.
pub fn lemma_complexes(cfg: &ExperimentConfig) -> Result<Vec<(String, FiniteMedianComplex)>, HarnessError> {
    if let Some(path) = &cfg.complex_file {
        let c = FiniteMedianComplex::from_json(&read(path)?).map_err(|e| schema("complex_file", e.to_string()))?;
        return Ok(vec![(path.display().to_string(), c)]);
    }
    if let Some(spec) = &cfg.complex {
        let c = generate_family_with_budget(spec, cfg.max_vertices).map_err(|e| schema("complex", e.to_string()))?;
        return Ok(vec![(spec.label(), c)]);
    }
    if let Some(list) = &cfg.families {
        return list
            .iter()
            .enumerate()
            .map(|(i, spec)| {
                generate_family_with_budget(spec, cfg.max_vertices)
                    .map(|c| (spec.label(), c))
                    .map_err(|e| schema(&format!("families[{i}]"), e.to_string()))
            })
            .collect();
    }
    Ok(standard_families(cfg.family_count, cfg.seed, cfg.max_vertices)
        .into_iter()
        .map(|(s, c)| (s.label(), c))
        .collect())
}

pub fn lemmas_suite(cfg: &ExperimentConfig) -> Result<SuiteResult, HarnessError> {
    let complexes = lemma_complexes(cfg)?;
    let per = cfg.lemma_samples.div_ceil(complexes.len().max(1));
    let results: Vec<ComplexCheck> = complexes
        .iter()
        .enumerate()
        .map(|(i, (label, c))| check_complex(label, c, cfg, per, cfg.seed.wrapping_add(i as u64)))
        .collect::<Result<_, _>>()?;
    let total = |f: &dyn Fn(&ComplexCheck) -> u64| results.iter().map(f).sum::<u64>();
    let checks = vec![
        Check::new(
            "median_oracle",
            total(&|r| r.median_oracle.violations) == 0,
            json!({"cases": total(&|r| r.median_oracle.cases_checked), "violations": total(&|r| r.median_oracle.violations)}),
        ),
        Check::new(
            "box_lemma",
            total(&|r| r.box_lemma.violations) == 0,
            json!({
                "cases": total(&|r| r.box_lemma.cases_checked),
                "hypothesis_cases": total(&|r| r.box_lemma.hypothesis_cases),
                "violations": total(&|r| r.box_lemma.violations),
            }),
        ),
        Check::new(
            "remark_ss",
            results.iter().all(|r| r.remark_ss.counterexample.is_none()),
            json!({
                "pairs": total(&|r| r.remark_ss.pairs_checked),
                "converse_witnesses": results.iter().filter(|r| r.remark_ss.converse_witness.is_some()).count(),
            }),
        ),
        Check::new(
            "projection_lemma",
            total(&|r| r.projection.violations) == 0,
            json!({"cases": total(&|r| r.projection.cases_checked), "violations": total(&|r| r.projection.violations)}),
        ),
        Check::new(
            "chain_gromov",
            total(&|r| r.chain_gromov.violations) == 0,
            json!({"cases": total(&|r| r.chain_gromov.cases_checked), "violations": total(&|r| r.chain_gromov.violations)}),
        ),
    ];
    Ok(finish("lemmas", checks, json!({"complexes": results}), None))
}

/// Algebraic RAAG values against the same values read off materialized hulls.
pub fn hull_consistency(dg: &Arc<DefiningGraph>, instances: usize, max_len: usize, budget: usize, seed: u64) -> VerificationReport {
    let mut report = VerificationReport::with_hash("raag_hull_consistency", format!("raag:{}", dg.names().join(",")));
    let rows: Vec<(u64, Vec<Value>)> = (0..instances)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i as u64);
            let pick = |r: &mut ChaCha8Rng| {
                let len = r.random_range(0..=max_len);
                random_element(dg, len, r)
            };
            let pts = [pick(&mut rng), pick(&mut rng), pick(&mut rng)];
            let mut cases = 0u64;
            let mut bad = Vec::new();
            let hull = match hull_materialize(&pts, budget) {
                Ok(h) => h,
                Err(e) => return (1, vec![json!({"instance": i, "error": e.to_string()})]),
            };
            let c = &hull.complex;
            let v: Vec<usize> = hull.point_vertices.clone();
            for (a, b) in [(0, 1), (1, 2), (0, 2)] {
                cases += 1;
                let alg = pts[a].dist(&pts[b]).unwrap();
                if alg != c.distance(v[a], v[b]) {
                    bad.push(json!({"instance": i, "kind": "distance", "x": pts[a].to_string(), "y": pts[b].to_string()}));
                }
            }
            cases += 1;
            let m = NormalForm::median(&pts[0], &pts[1], &pts[2]).unwrap();
            if hull.elements[c.median_unchecked(v[0], v[1], v[2])] != m {
                bad.push(json!({"instance": i, "kind": "median", "points": pts.iter().map(|p| p.to_string()).collect::<Vec<_>>()}));
            }
            cases += 1;
            let g = NormalForm::gromov(&pts[0], &pts[1], &pts[2]).unwrap();
            if g != c.gromov_product(v[0], v[1], v[2]).unwrap() {
                bad.push(json!({"instance": i, "kind": "gromov"}));
            }
            // transversality of the walls crossed by a geodesic from pts[0] to pts[1]
            let w = pts[0].inv().mul(&pts[1]).unwrap();
            let ps = pieces(&w);
            for p in 0..ps.len() {
                for q in (p + 1)..ps.len() {
                    cases += 1;
                    let alg = transverse_pieces(&w, p, q).unwrap();
                    let edge = |k: usize| {
                        let base = pts[0].mul(&ps[k].base()).unwrap();
                        hull.wall_of_edge(&base, Letter::new(ps[k].label(), false))
                    };
                    let (Some(a), Some(b)) = (edge(p), edge(q)) else {
                        bad.push(json!({"instance": i, "kind": "missing_wall", "p": p, "q": q}));
                        continue;
                    };
                    let fin = crate::wallgeom::wall_relation(c, a, b).unwrap() == WallRelation::Transverse;
                    if alg != fin {
                        bad.push(json!({"instance": i, "kind": "transverse", "word": w.to_string(), "p": p, "q": q}));
                    }
                }
            }
            (cases, bad)
        })
        .collect();
    for (cases, bad) in rows {
        report.cases_checked += cases;
        report.hypothesis_cases += cases;
        for b in bad {
            report.violation(b);
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateSummary {
    pub attempts: u64,
    pub certified: u64,
    pub yes: u64,
    pub no: u64,
    pub unknown: u64,
    pub report: VerificationReport,
}

/// Draws piece pairs until `target` pairs are certified either way; every
/// yes must have disjoint links and every no-witness must re-verify in a hull.
pub fn certificate_soundness(
    dg: &Arc<DefiningGraph>,
    target: usize,
    max_len: usize,
    radius: usize,
    budget: usize,
    seed: u64,
) -> CertificateSummary {
    const BATCH: usize = 256;
    let mut summary = CertificateSummary {
        attempts: 0,
        certified: 0,
        yes: 0,
        no: 0,
        unknown: 0,
        report: VerificationReport::with_hash("certificate_soundness", format!("raag:{}", dg.names().join(","))),
    };
    let mut batch = 0u64;
    while (summary.certified as usize) < target && summary.attempts < 50 * target as u64 + 1000 {
        let outcomes: Vec<(u8, Option<Value>)> = (0..BATCH)
            .into_par_iter()
            .map(|i| {
                let mut rng = trial_rng(seed, batch * BATCH as u64 + i as u64);
                let len = rng.random_range(2..=max_len.max(2));
                let g = random_element(dg, len, &mut rng);
                let ps = pieces(&g);
                let (p, q) = (rng.random_range(0..ps.len()), rng.random_range(0..ps.len()));
                let (p, q) = (p.min(q), p.max(q));
                match ss_pieces(&g, p, q, radius) {
                    Err(_) => (0, None),
                    Ok(SsCertificate::Unknown { .. }) => (3, None),
                    Ok(SsCertificate::YesCertified(_)) => {
                        let (a, b) = (ps[p].label(), ps[q].label());
                        let ok = dg.link(a) & dg.link(b) == 0;
                        (1, (!ok).then(|| json!({"word": g.to_string(), "p": p, "q": q, "kind": "yes"})))
                    }
                    Ok(SsCertificate::NoCertified(w)) => {
                        let ok = verify_witness_in_hull(&ps[p].base(), ps[p].label(), &ps[q].base(), ps[q].label(), &w, budget);
                        let bad = !matches!(ok, Ok(true));
                        (2, bad.then(|| json!({"word": g.to_string(), "p": p, "q": q, "kind": "no", "witness_label": w.label})))
                    }
                }
            })
            .collect();
        batch += 1;
        for (kind, bad) in outcomes {
            if (summary.certified as usize) >= target && kind != 0 && kind != 3 {
                continue;
            }
            summary.attempts += 1;
            match kind {
                1 => summary.yes += 1,
                2 => summary.no += 1,
                3 => summary.unknown += 1,
                _ => continue,
            }
            if kind == 1 || kind == 2 {
                summary.certified += 1;
                summary.report.cases_checked += 1;
                summary.report.hypothesis_cases += 1;
                if let Some(b) = bad {
                    summary.report.violation(b);
                }
            }
        }
    }
    summary
}

/// Elements of length `1..=max_len` in breadth-first order of their
/// canonical words, at most `limit` of them.
pub fn enumerate_elements(dg: &Arc<DefiningGraph>, max_len: usize, limit: usize) -> Vec<NormalForm> {
    let mut seen: FxHashSet<Vec<Letter>> = FxHashSet::default();
    let mut out = Vec::new();
    let mut queue = VecDeque::from([NormalForm::identity(dg)]);
    while let Some(g) = queue.pop_front() {
        if g.len() >= max_len {
            continue;
        }
        for l in dg.letters() {
            let h = g.mul(&NormalForm::generator(dg, l)).unwrap();
            if h.len() == g.len() + 1 && seen.insert(h.letters().to_vec()) {
                out.push(h.clone());
                if out.len() >= limit {
                    return out;
                }
                queue.push_back(h);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rank1Summary {
    pub searched: usize,
    pub found: Option<String>,
    pub power: Option<u32>,
    pub translation_length: Option<String>,
    pub horofunction_estimate: Option<f64>,
}

/// First element (breadth-first) with a rank-one certificate.
pub fn rank1_search(dg: &Arc<DefiningGraph>, max_len: usize, max_power: u32) -> Rank1Summary {
    const LIMIT: usize = 20_000;
    let elements = enumerate_elements(dg, max_len, LIMIT);
    let mut searched = 0;
    for g in &elements {
        searched += 1;
        if let Some(w) = find_rank1_witness(g, max_power) {
            let n = 20;
            return Rank1Summary {
                searched,
                found: Some(g.to_string()),
                power: Some(w.power),
                translation_length: Some(translation_length(g, TranslationMode::Cyclic).value.to_string()),
                horofunction_estimate: Some(horofunction_translation(g, n, 10 * n)),
            };
        }
    }
    Rank1Summary {
        searched,
        found: None,
        power: None,
        translation_length: None,
        horofunction_estimate: None,
    }
}

pub fn raag_suite(cfg: &ExperimentConfig) -> Result<SuiteResult, HarnessError> {
    let dg = cfg.defining_graph()?;
    let join = is_join(&dg);
    let hull = hull_consistency(&dg, cfg.raag_instances, cfg.instance_max_len, cfg.hull_budget, cfg.seed);
    let certs = certificate_soundness(&dg, cfg.certified_pairs, cfg.cert_max_len, cfg.radius, cfg.hull_budget, cfg.seed ^ 1);
    let cocycle = cocycle_check(&dg, cfg.identity_samples, cfg.seed ^ 2, cfg.identity_max_len);
    let gromov = gromov_identity_check(&dg, cfg.identity_samples, cfg.seed ^ 3, cfg.identity_max_len);
    // joins have no rank-one elements; the search is kept short there
    let rank1 = rank1_search(&dg, if join.is_some() { cfg.rank1_max_len.min(4) } else { cfg.rank1_max_len }, cfg.rank1_max_power);
    let rank1_ok = match (&join, &rank1.found) {
        (Some(_), found) => found.is_none(),
        (None, Some(_)) => {
            let exact: f64 = rank1
                .translation_length
                .as_deref()
                .and_then(|t| t.parse::<f64>().ok())
                .unwrap_or(f64::NAN);
            rank1.horofunction_estimate.is_some_and(|h| (h - exact).abs() <= 1.0 / 20.0 + 1e-12)
        }
        (None, None) => dg.generator_count() < 2,
    };
    let checks = vec![
        Check::new("hull_consistency", hull.passed(), json!({"cases": hull.cases_checked, "violations": hull.violations})),
        Check::new(
            "certificate_soundness",
            certs.report.passed() && certs.certified as usize >= cfg.certified_pairs,
            json!({"certified": certs.certified, "violations": certs.report.violations}),
        ),
        Check::new("cocycle", cocycle.violations == 0, serde_json::to_value(cocycle).unwrap()),
        Check::new("gromov_identity", gromov.violations == 0, serde_json::to_value(gromov).unwrap()),
        Check::new("rank1", rank1_ok, json!({"join": join.is_some(), "found": rank1.found})),
    ];
    let body = json!({
        "graph": dg.to_file(),
        "hull_consistency": hull,
        "certificates": certs,
        "cocycle": cocycle,
        "gromov_identity": gromov,
        "rank1": rank1,
    });
    Ok(finish("raag-consistency", checks, body, None))
}

/// True for defining graphs whose RAAG is irreducible and nonelementary.
pub fn irreducible_nonelementary(dg: &DefiningGraph) -> bool {
    dg.generator_count() >= 2 && is_join(dg).is_none()
}

fn run_walk(cfg: &ExperimentConfig, extra_checkpoints: usize) -> Result<(Arc<DefiningGraph>, WalkRun), HarnessError> {
    let dg = cfg.defining_graph()?;
    let m = cfg.step_measure(&dg)?;
    let mut checkpoints = cfg.checkpoints.clone();
    if checkpoints.is_empty() {
        let n = cfg.n;
        checkpoints = vec![n / 4, n / 2, n];
        if extra_checkpoints > 0 {
            checkpoints.extend((1..=extra_checkpoints).map(|i| i * n / extra_checkpoints));
        }
    }
    let opts = SimOptions {
        checkpoints,
        keep_paths: false,
        s_window: cfg.s_window,
    };
    let run = simulate(&dg, &m, cfg.seed, cfg.n, cfg.trials, &opts);
    Ok((dg, run))
}

pub fn clt_suite(cfg: &ExperimentConfig) -> Result<SuiteResult, HarnessError> {
    let (dg, run) = run_walk(cfg, 0)?;
    let m = &run.measure;
    let lambda_hat = crate::walk::drift_estimate(&run);
    let psi = match &cfg.psi {
        Some(p) => Some(
            psi_sigma_estimate_with(&dg, m, cfg.seed ^ 0x70_7369, p.horizon, p.proxies, p.backward, lambda_hat.value)
                .map_err(|e| schema("psi", e.to_string()))?,
        ),
        None => None,
    };
    let report = clt_report(&run, cfg.lambda_oracle, cfg.sigma2_oracle, psi.as_ref());
    let tol = &cfg.tolerances;
    let mut checks = Vec::new();
    if let Some(l) = cfg.lambda_oracle {
        checks.push(Check::new(
            "drift",
            (report.lambda_hat.value - l).abs() <= tol.drift_abs,
            json!({"estimate": report.lambda_hat.value, "oracle": l, "tolerance": tol.drift_abs}),
        ));
    }
    let irreducible = irreducible_nonelementary(&dg) && !cfg.allow_degenerate;
    // the KS test is only attempted with enough trials
    if (cfg.sigma2_oracle.is_some() || irreducible) && report.normality_pass.is_some() {
        checks.push(Check::new(
            "normality",
            report.normality_pass == Some(true),
            json!({"statistic": report.ks_statistic, "critical": report.ks_critical, "variance": report.ks_variance}),
        ));
    }
    if let Some(s) = cfg.sigma2_oracle {
        checks.push(Check::new(
            "sigma2_direct",
            (report.sigma2_direct.value - s).abs() <= tol.sigma2_abs,
            json!({"estimate": report.sigma2_direct.value, "oracle": s, "tolerance": tol.sigma2_abs}),
        ));
        if let Some(f) = report.sigma2_formula {
            checks.push(Check::new(
                "sigma2_formula",
                (f.value - s).abs() <= tol.formula_rel * s,
                json!({"estimate": f.value, "oracle": s, "relative_tolerance": tol.formula_rel}),
            ));
        }
    } else if let (Some(f), true) = (report.sigma2_formula, irreducible) {
        checks.push(Check::new(
            "sigma2_consistency",
            f.overlaps(&report.sigma2_direct) && f.excludes_zero() && report.sigma2_direct.excludes_zero(),
            json!({"formula": f, "direct": report.sigma2_direct}),
        ));
    }
    if irreducible {
        checks.push(Check::new("nondegenerate", report.nondegenerate, json!(report.sigma2_direct)));
    }
    let csv = walk_csv(&run, report.lambda_center);
    let body = json!({
        "graph": dg.to_file(),
        "measure": cfg.measure,
        "report": report,
        "psi": psi,
    });
    Ok(finish("clt", checks, body, Some(csv)))
}

pub fn s_growth_suite(cfg: &ExperimentConfig) -> Result<SuiteResult, HarnessError> {
    let (dg, run) = run_walk(cfg, cfg.boite.checkpoints)?;
    let lambda = crate::walk::drift_estimate(&run);
    let slope = crate::walk::s_growth(&run);
    let mut rng = trial_rng(cfg.seed ^ 0x7072_6f62, 0);
    let probe_len = |f: usize| (f * cfg.n).max(1);
    let y = random_element(&dg, probe_len(cfg.deviation.probe_factor), &mut rng);
    let profile = deviation_profile(&run, lambda.value, &cfg.deviation.epsilons, &cfg.deviation.a_values, &y);
    let bx = random_element(&dg, probe_len(cfg.boite.probe_factor), &mut rng);
    let by = random_element(&dg, probe_len(cfg.boite.probe_factor), &mut rng);
    let boite = boite_monitor(&run, lambda.value, cfg.boite.epsilon, cfg.boite.a, &bx, &by);
    let irreducible = irreducible_nonelementary(&dg) && !cfg.allow_degenerate;
    let mut checks = vec![Check::new(
        "boite",
        boite.passed(),
        json!({"hypothesis_steps": boite.hypothesis_steps, "n0": boite.n0}),
    )];
    if irreducible {
        checks.push(Check::new("drift_positive", lambda.excludes_zero(), json!(lambda)));
        checks.push(Check::new("s_slope_positive", slope.excludes_zero(), json!(slope)));
    }
    let max_step = run.measure.max_step() as u32;
    let increments_ok = run.trials.iter().all(|t| {
        let mut prev = 0u32;
        let mut last_n = 0usize;
        run.checkpoints.iter().zip(&t.d).all(|(&n, &d)| {
            let ok = d.abs_diff(prev) as usize <= (n - last_n) * max_step as usize;
            prev = d;
            last_n = n;
            ok
        })
    });
    checks.push(Check::new("increment_bound", increments_ok, json!({"max_step": max_step})));
    let csv = walk_csv(&run, lambda.value);
    let body = json!({
        "graph": dg.to_file(),
        "measure": cfg.measure,
        "n": run.n,
        "trials": run.trial_count(),
        "seed": run.seed,
        "lambda_hat": lambda,
        "s_slope": slope,
        "s_slope_asserted": irreducible,
        "deviation_profile": profile,
        "boite": boite,
    });
    Ok(finish("s-growth", checks, body, Some(csv)))
}

/// Generates one complex; the complex itself is an extra `complex.json` file.
pub fn complex_gen_suite(cfg: &ExperimentConfig) -> Result<SuiteResult, HarnessError> {
    let spec = cfg.complex.as_ref().ok_or_else(|| schema("complex", "complex gen needs a family spec"))?;
    let c = generate_family_with_budget(spec, cfg.max_vertices).map_err(|e| schema("complex", e.to_string()))?;
    let body = json!({
        "family": spec,
        "label": spec.label(),
        "vertices": c.vertex_count(),
        "edges": c.edges().len(),
        "walls": c.wall_count(),
        "complex_hash": c.content_hash(),
    });
    let mut result = finish("complex-gen", Vec::new(), body, None);
    result.extra_files.push(("complex.json".into(), c.to_json(true) + "\n"));
    Ok(result)
}
