//! Python bindings: complexes, RAAG elements, walks and the suites.
//! Structured results cross the boundary as JSON strings.

use std::sync::Arc;

use medianwalk::harness::{self, canonical_json, ExperimentConfig, Suite};
use medianwalk::raag::{self, DefiningGraph, NormalForm};
use medianwalk::walk::{self, MeasureSpec, SimOptions, StepMeasure};
use medianwalk::wallgeom::{BoxLemmaMode, WallGeometry};
use medianwalk::{generate_family, FamilySpec, FiniteMedianComplex};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Finite median graph with its walls.
#[pyclass(name = "Complex", module = "medianwalk_py", frozen)]
struct PyComplex {
    inner: FiniteMedianComplex,
}

#[pymethods]
impl PyComplex {
    #[new]
    fn new(vertices: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        Ok(PyComplex {
            inner: medianwalk::build_complex(vertices, &edges).map_err(err)?,
        })
    }

    /// Member of a family given as JSON, e.g. `{"family": "grid", "p": 3, "q": 3}`.
    #[staticmethod]
    fn family(spec: &str) -> PyResult<Self> {
        let spec: FamilySpec = serde_json::from_str(spec).map_err(err)?;
        Ok(PyComplex {
            inner: generate_family(&spec).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyComplex {
            inner: FiniteMedianComplex::from_json(text).map_err(err)?,
        })
    }

    #[pyo3(signature = (with_walls = true))]
    fn to_json(&self, with_walls: bool) -> String {
        self.inner.to_json(with_walls)
    }

    fn content_hash(&self) -> String {
        self.inner.content_hash()
    }

    fn vertex_count(&self) -> usize {
        self.inner.vertex_count()
    }

    fn wall_count(&self) -> usize {
        self.inner.wall_count()
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().to_vec()
    }

    fn distance(&self, x: usize, y: usize) -> PyResult<usize> {
        self.inner.dist(x, y).map_err(err)
    }

    fn median(&self, x: usize, y: usize, z: usize) -> PyResult<usize> {
        self.inner.median(x, y, z).map_err(err)
    }

    fn gromov_product(&self, x: usize, y: usize, o: usize) -> PyResult<usize> {
        self.inner.gromov_product(x, y, o).map_err(err)
    }

    fn separating_walls(&self, x: usize, y: usize) -> PyResult<Vec<usize>> {
        self.inner.dist(x, y).map_err(err)?;
        Ok(self.inner.separating_walls(x, y))
    }

    /// Longest strongly separated chain between `x` and `y` as `(wall, side)` pairs.
    fn max_ss_chain(&self, x: usize, y: usize) -> PyResult<Vec<(usize, bool)>> {
        let g = WallGeometry::new(&self.inner).map_err(err)?;
        Ok(g.max_ss_chain(x, y).map_err(err)?.into_iter().map(|h| (h.wall, h.side)).collect())
    }

    fn is_strongly_separated(&self, a: usize, b: usize) -> PyResult<bool> {
        medianwalk::wallgeom::strongly_separated(&self.inner, a, b).map_err(err)
    }

    /// Box-lemma report as JSON; exhaustive unless `quadruples` is given.
    #[pyo3(signature = (quadruples = None, seed = 0))]
    fn verify_box_lemma(&self, quadruples: Option<u64>, seed: u64) -> PyResult<String> {
        let mode = match quadruples {
            Some(q) => BoxLemmaMode::Sampled { quadruples: q, seed },
            None => BoxLemmaMode::Exhaustive,
        };
        let r = medianwalk::wallgeom::verify_box_lemma(&self.inner, mode).map_err(err)?;
        Ok(canonical_json(&r))
    }

    fn verify_remark_ss(&self) -> PyResult<String> {
        Ok(canonical_json(&medianwalk::wallgeom::verify_remark_ss(&self.inner).map_err(err)?))
    }

    fn __repr__(&self) -> String {
        format!("Complex(vertices={}, walls={})", self.inner.vertex_count(), self.inner.wall_count())
    }
}

#[pyclass(name = "DefiningGraph", module = "medianwalk_py", frozen)]
struct PyGraph {
    inner: Arc<DefiningGraph>,
}

#[pymethods]
impl PyGraph {
    #[new]
    fn new(names: Vec<String>, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        Ok(PyGraph {
            inner: Arc::new(DefiningGraph::new(names, &edges).map_err(err)?),
        })
    }

    /// `f2`, `z2`, `c5`, `freeK`, `abelianK` or `cycleK`.
    #[staticmethod]
    fn preset(name: &str) -> PyResult<Self> {
        let g = DefiningGraph::preset(name).ok_or_else(|| err(format!("unknown preset {name:?}")))?;
        Ok(PyGraph { inner: Arc::new(g) })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyGraph {
            inner: Arc::new(DefiningGraph::from_json(text).map_err(err)?),
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn names(&self) -> Vec<String> {
        self.inner.names().to_vec()
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges()
    }

    fn is_join(&self) -> bool {
        raag::is_join(&self.inner).is_some()
    }

    fn element(&self, word: &str) -> PyResult<PyElement> {
        Ok(PyElement {
            inner: NormalForm::parse(&self.inner, word).map_err(err)?,
        })
    }

    fn identity(&self) -> PyElement {
        PyElement {
            inner: NormalForm::identity(&self.inner),
        }
    }

    fn __repr__(&self) -> String {
        format!("DefiningGraph({:?})", self.inner.names())
    }
}

/// Element of a right-angled Artin group in normal form.
#[pyclass(name = "Element", module = "medianwalk_py", frozen, eq, hash)]
#[derive(PartialEq, Eq, Hash)]
struct PyElement {
    inner: NormalForm,
}

#[pymethods]
impl PyElement {
    fn __mul__(&self, other: &PyElement) -> PyResult<PyElement> {
        Ok(PyElement {
            inner: self.inner.mul(&other.inner).map_err(err)?,
        })
    }

    fn __pow__(&self, n: u32, _modulo: Option<u32>) -> PyElement {
        PyElement { inner: self.inner.pow(n) }
    }

    fn inverse(&self) -> PyElement {
        PyElement { inner: self.inner.inv() }
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Element({:?})", self.inner.to_string())
    }

    fn dist(&self, other: &PyElement) -> PyResult<usize> {
        self.inner.dist(&other.inner).map_err(err)
    }

    #[staticmethod]
    fn median(x: &PyElement, y: &PyElement, z: &PyElement) -> PyResult<PyElement> {
        Ok(PyElement {
            inner: NormalForm::median(&x.inner, &y.inner, &z.inner).map_err(err)?,
        })
    }

    /// `(self|y)_o`.
    fn gromov(&self, y: &PyElement, o: &PyElement) -> PyResult<usize> {
        NormalForm::gromov(&self.inner, &y.inner, &o.inner).map_err(err)
    }

    fn piece_count(&self) -> usize {
        raag::pieces(&self.inner).len()
    }

    /// `"yes"`, `"no"` or `"unknown"` for pieces `p < q`.
    #[pyo3(signature = (p, q, radius = raag::DEFAULT_RADIUS))]
    fn ss_pieces(&self, p: usize, q: usize, radius: usize) -> PyResult<&'static str> {
        Ok(match raag::ss_pieces(&self.inner, p, q, radius).map_err(err)? {
            raag::SsCertificate::YesCertified(_) => "yes",
            raag::SsCertificate::NoCertified(_) => "no",
            raag::SsCertificate::Unknown { .. } => "unknown",
        })
    }

    #[pyo3(signature = (window = 0))]
    fn max_certified_ss_chain(&self, window: usize) -> usize {
        raag::max_certified_ss_chain(&self.inner, window)
    }

    /// The power `n` of a rank-one certificate, if one is found.
    #[pyo3(signature = (max_power = 20))]
    fn find_rank1_witness(&self, max_power: u32) -> Option<u32> {
        raag::find_rank1_witness(&self.inner, max_power).map(|w| w.power)
    }

    /// Stable translation length as `(numerator, denominator)`.
    fn translation_length(&self) -> (u64, u64) {
        let t = raag::translation_length(&self.inner, raag::TranslationMode::Cyclic).value;
        (*t.numer(), *t.denom())
    }
}

#[pyclass(name = "WalkRun", module = "medianwalk_py", frozen)]
struct PyWalkRun {
    inner: walk::WalkRun,
}

#[pymethods]
impl PyWalkRun {
    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn checkpoints(&self) -> Vec<usize> {
        self.inner.checkpoints.clone()
    }

    fn final_distances(&self) -> Vec<u32> {
        self.inner.final_distances()
    }

    fn final_s_lower(&self) -> Vec<u32> {
        self.inner.final_s_lower()
    }

    fn endpoint(&self, trial: usize) -> PyResult<PyElement> {
        if trial >= self.inner.trial_count() {
            return Err(err(format!("trial {trial} out of range")));
        }
        Ok(PyElement {
            inner: self.inner.endpoint(trial),
        })
    }

    /// `(value, lo, hi)` of the drift estimate.
    fn drift(&self) -> (f64, f64, f64) {
        let e = walk::drift_estimate(&self.inner);
        (e.value, e.lo, e.hi)
    }

    fn s_slope(&self) -> (f64, f64, f64) {
        let e = walk::s_growth(&self.inner);
        (e.value, e.lo, e.hi)
    }

    /// CLT report as JSON, optionally centered and tested against given values.
    #[pyo3(signature = (center = None, variance = None))]
    fn clt_report(&self, center: Option<f64>, variance: Option<f64>) -> String {
        canonical_json(&walk::clt_report(&self.inner, center, variance, None))
    }

    fn csv(&self, center: f64) -> String {
        harness::walk_csv(&self.inner, center)
    }

    fn __len__(&self) -> usize {
        self.inner.trial_count()
    }
}

/// Runs `trials` walks of `n` steps. `measure` is JSON such as
/// `{"kind": "lazy", "hold": 0.5}`; the default is the simple random walk.
#[pyfunction]
#[pyo3(signature = (graph, seed, n, trials, measure = None, allow_degenerate = false))]
fn simulate(
    py: Python<'_>,
    graph: &PyGraph,
    seed: u64,
    n: usize,
    trials: usize,
    measure: Option<&str>,
    allow_degenerate: bool,
) -> PyResult<PyWalkRun> {
    let dg = graph.inner.clone();
    let spec: MeasureSpec = match measure {
        Some(m) => serde_json::from_str(m).map_err(err)?,
        None => MeasureSpec::Srw,
    };
    let m = StepMeasure::from_spec(&dg, &spec).map_err(err)?;
    let m = walk::validate_measure(&dg, &m, 6, allow_degenerate).map_err(err)?;
    let run = py.detach(|| walk::simulate(&dg, &m, seed, n, trials, &SimOptions::default()));
    Ok(PyWalkRun { inner: run })
}

/// `(statistic, critical value, pass)` at α = 0.01.
#[pyfunction]
fn ks_normal_test(samples: Vec<f64>, variance: f64) -> PyResult<(f64, f64, bool)> {
    let r = walk::ks_normal_test(&samples, variance).map_err(err)?;
    Ok((r.statistic, r.critical, r.pass))
}

/// Runs a suite on a JSON configuration; returns `(passed, report JSON)`
/// without writing files.
#[pyfunction]
#[pyo3(signature = (name, config = "{}"))]
fn run_suite(py: Python<'_>, name: &str, config: &str) -> PyResult<(bool, String)> {
    let suite = Suite::parse(name).ok_or_else(|| err(format!("unknown suite {name:?}")))?;
    let cfg = ExperimentConfig::from_json(config).map_err(err)?;
    let results = py.detach(|| harness::run_suite(suite, &cfg)).map_err(err)?;
    let passed = results.iter().all(|r| r.passed);
    let reports: Vec<_> = results.into_iter().map(|r| r.report).collect();
    Ok((passed, canonical_json(&reports)))
}

#[pymodule]
fn medianwalk_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyComplex>()?;
    m.add_class::<PyGraph>()?;
    m.add_class::<PyElement>()?;
    m.add_class::<PyWalkRun>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(ks_normal_test, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
