//! Seeded random walks on right-angled Artin groups and the estimators run
//! on them.

mod analysis;
pub mod stats;

use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::raag::{chain_in_word, push_reduced, DefiningGraph, Letter, NormalForm, RaagError};

pub use analysis::{
    boite_monitor, boite_threshold, clt_report, clt_stat, cocycle_check, deviation_profile, drift_estimate, drift_exact,
    gromov_identity_check, horofunction_translation, psi_sigma_estimate, psi_sigma_estimate_with, random_element,
    s_growth, sigma2_direct, BoiteReport, CltReport, DeviationProfile, IdentityReport, PsiSigmaReport, TailRow,
    FORMULA_TOLERANCE_NOTE,
};
pub use stats::{ks_normal_test, Estimate, KsResult};

/// PRNG recorded in manifests.
pub const PRNG_NAME: &str = "ChaCha8Rng (rand_chacha 0.9), per-trial seed = seed ^ splitmix64(trial)";
pub const PROB_TOLERANCE: f64 = 1e-12;
/// Cap on elements visited by the generation check.
const GENERATION_CHECK_LIMIT: usize = 200_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WalkError {
    #[error("probabilities sum to {0}, not 1")]
    ProbSumInvalid(f64),
    #[error("probability {0} is not positive")]
    NonPositiveProbability(f64),
    #[error("measure has empty support")]
    EmptySupport,
    #[error("support does not generate {0} as a semigroup within the radius")]
    NotGenerating(String),
    #[error("need at least {needed} trials, got {got}")]
    TooFewTrials { needed: usize, got: usize },
    #[error("invalid variance {0}")]
    InvalidVariance(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Raag(#[from] RaagError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedWord {
    pub word: String,
    pub prob: f64,
}

/// Step distribution as written in configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    /// Uniform on generators and inverses.
    Srw,
    /// Simple random walk that stays put with probability `hold`.
    Lazy { hold: f64 },
    Explicit { support: Vec<WeightedWord> },
}

/// Finitely supported step distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct StepMeasure {
    pub support: Vec<(Vec<Letter>, f64)>,
}

impl StepMeasure {
    pub fn srw(dg: &DefiningGraph) -> Self {
        let letters = dg.letters();
        let p = 1.0 / letters.len() as f64;
        StepMeasure {
            support: letters.into_iter().map(|l| (vec![l], p)).collect(),
        }
    }

    pub fn lazy(dg: &DefiningGraph, hold: f64) -> Self {
        let mut m = Self::srw(dg);
        for (_, p) in &mut m.support {
            *p *= 1.0 - hold;
        }
        m.support.insert(0, (Vec::new(), hold));
        m
    }

    pub fn point_mass(word: Vec<Letter>) -> Self {
        StepMeasure {
            support: vec![(word, 1.0)],
        }
    }

    pub fn from_spec(dg: &DefiningGraph, spec: &MeasureSpec) -> Result<Self, WalkError> {
        Ok(match spec {
            MeasureSpec::Srw => Self::srw(dg),
            MeasureSpec::Lazy { hold } => {
                if !(0.0..1.0).contains(hold) {
                    return Err(WalkError::InvalidParameter(format!("hold probability {hold}")));
                }
                Self::lazy(dg, *hold)
            }
            MeasureSpec::Explicit { support } => StepMeasure {
                support: support
                    .iter()
                    .map(|w| Ok((crate::raag::parse_word(dg, &w.word)?, w.prob)))
                    .collect::<Result<_, RaagError>>()?,
            },
        })
    }

    /// Longest support word; bounds per-step distance changes.
    pub fn max_step(&self) -> usize {
        self.support.iter().map(|(w, _)| w.len()).max().unwrap_or(0)
    }

    /// The reflected measure `μ̌(g) = μ(g⁻¹)`.
    pub fn reflected(&self) -> StepMeasure {
        StepMeasure {
            support: self
                .support
                .iter()
                .map(|(w, p)| (w.iter().rev().map(|l| l.inverse()).collect(), *p))
                .collect(),
        }
    }

    fn sampler(&self) -> WeightedIndex<f64> {
        WeightedIndex::new(self.support.iter().map(|(_, p)| *p)).expect("validated measure")
    }
}

/// Checks normalization and, unless `allow_degenerate`, that products of at
/// most `radius` support words reach every generator and inverse.
pub fn validate_measure(
    dg: &Arc<DefiningGraph>,
    m: &StepMeasure,
    radius: usize,
    allow_degenerate: bool,
) -> Result<StepMeasure, WalkError> {
    if m.support.is_empty() {
        return Err(WalkError::EmptySupport);
    }
    if let Some(&(_, p)) = m.support.iter().find(|(_, p)| !(*p > 0.0 && p.is_finite())) {
        return Err(WalkError::NonPositiveProbability(p));
    }
    let sum: f64 = m.support.iter().map(|(_, p)| p).sum();
    if (sum - 1.0).abs() > PROB_TOLERANCE {
        return Err(WalkError::ProbSumInvalid(sum));
    }
    for (w, _) in &m.support {
        NormalForm::from_letters(dg, w)?;
    }
    if !allow_degenerate {
        let steps: Vec<Vec<Letter>> = m.support.iter().map(|(w, _)| w.clone()).collect();
        let mut seen: FxHashSet<Vec<Letter>> = FxHashSet::default();
        let mut layer: Vec<NormalForm> = vec![NormalForm::identity(dg)];
        for _ in 0..radius {
            let mut next = Vec::new();
            for g in &layer {
                for s in &steps {
                    let h = g.mul_letters(s);
                    if seen.len() < GENERATION_CHECK_LIMIT && seen.insert(h.letters().to_vec()) {
                        next.push(h);
                    }
                }
            }
            layer = next;
        }
        let missing: Vec<Letter> = dg.letters().into_iter().filter(|l| !seen.contains(&vec![*l])).collect();
        // name a generator neither of whose letters is reached, if any
        let blame = missing
            .iter()
            .find(|l| missing.contains(&l.inverse()))
            .map(|l| Letter::new(l.gen, false))
            .or(missing.first().copied());
        if let Some(l) = blame {
            return Err(WalkError::NotGenerating(crate::raag::format_word(dg, &[l])));
        }
    }
    Ok(m.clone())
}

/// Reduced word under right multiplication; the length is the distance to
/// the origin.
#[derive(Debug, Clone)]
pub struct Walker {
    graph: Arc<DefiningGraph>,
    word: Vec<Letter>,
}

impl Walker {
    pub fn new(graph: &Arc<DefiningGraph>) -> Self {
        Walker {
            graph: graph.clone(),
            word: Vec::new(),
        }
    }

    #[inline]
    pub fn step(&mut self, letters: &[Letter]) {
        for &l in letters {
            push_reduced(&self.graph, &mut self.word, l);
        }
    }

    #[inline]
    pub fn distance(&self) -> usize {
        self.word.len()
    }

    pub fn word(&self) -> &[Letter] {
        &self.word
    }

    pub fn normal_form(&self) -> NormalForm {
        NormalForm::from_reduced(&self.graph, self.word.clone())
    }
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ splitmix64(trial))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimOptions {
    /// Steps at which distance, chain count and position are recorded;
    /// empty means `n/4, n/2, n`.
    pub checkpoints: Vec<usize>,
    /// Keep every `d(Z_k o, o)`, not only the checkpoints.
    pub keep_paths: bool,
    /// Gate window for the certified chain count (0 = disjoint links only).
    pub s_window: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            checkpoints: Vec::new(),
            keep_paths: false,
            s_window: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    /// `d(Z_k o, o)` at each checkpoint.
    pub d: Vec<u32>,
    /// Certified chain count of `Z_k` at each checkpoint.
    pub s_lower: Vec<u32>,
    /// Reduced word of `Z_k` at each checkpoint.
    pub words: Vec<Vec<Letter>>,
    /// Full distance path when requested.
    pub path: Option<Vec<u32>>,
    /// Largest `|d_{k+1} - d_k|`.
    pub max_increment: u32,
}

#[derive(Debug, Clone)]
pub struct WalkRun {
    pub graph: Arc<DefiningGraph>,
    pub measure: StepMeasure,
    pub seed: u64,
    pub n: usize,
    pub checkpoints: Vec<usize>,
    pub trials: Vec<TrialRecord>,
}

impl PartialEq for WalkRun {
    fn eq(&self, other: &Self) -> bool {
        self.graph == other.graph
            && self.measure == other.measure
            && self.seed == other.seed
            && self.n == other.n
            && self.checkpoints == other.checkpoints
            && self.trials == other.trials
    }
}

impl WalkRun {
    pub fn trial_count(&self) -> usize {
        self.trials.len()
    }

    /// `d(Z_n o, o)` per trial.
    pub fn final_distances(&self) -> Vec<u32> {
        self.trials.iter().map(|t| *t.d.last().unwrap()).collect()
    }

    pub fn final_s_lower(&self) -> Vec<u32> {
        self.trials.iter().map(|t| *t.s_lower.last().unwrap()).collect()
    }

    pub fn endpoint(&self, trial: usize) -> NormalForm {
        NormalForm::from_reduced(&self.graph, self.trials[trial].words.last().unwrap().clone())
    }

    pub fn endpoints(&self) -> Vec<NormalForm> {
        (0..self.trials.len()).map(|t| self.endpoint(t)).collect()
    }
}

fn default_checkpoints(n: usize) -> Vec<usize> {
    let mut c = vec![n / 4, n / 2, n];
    c.dedup();
    c
}

/// Runs `trials` independent walks of `n` steps; trial `t` draws from its own
/// stream seeded by `(seed, t)`.
pub fn simulate(
    dg: &Arc<DefiningGraph>,
    m: &StepMeasure,
    seed: u64,
    n: usize,
    trials: usize,
    opts: &SimOptions,
) -> WalkRun {
    let mut checkpoints = if opts.checkpoints.is_empty() {
        default_checkpoints(n)
    } else {
        opts.checkpoints.clone()
    };
    checkpoints.retain(|&c| c <= n);
    checkpoints.sort_unstable();
    checkpoints.dedup();
    if checkpoints.last() != Some(&n) {
        checkpoints.push(n);
    }
    let sampler = m.sampler();
    let records: Vec<TrialRecord> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t as u64);
            let mut walker = Walker::new(dg);
            let mut rec = TrialRecord {
                d: Vec::with_capacity(checkpoints.len()),
                s_lower: Vec::with_capacity(checkpoints.len()),
                words: Vec::with_capacity(checkpoints.len()),
                path: opts.keep_paths.then(|| Vec::with_capacity(n + 1)),
                max_increment: 0,
            };
            let mut next_cp = 0;
            let mut prev = 0u32;
            for k in 0..=n {
                if k > 0 {
                    walker.step(&m.support[sampler.sample(&mut rng)].0);
                }
                let d = walker.distance() as u32;
                rec.max_increment = rec.max_increment.max(d.abs_diff(prev));
                prev = d;
                if let Some(p) = rec.path.as_mut() {
                    p.push(d);
                }
                if checkpoints.get(next_cp) == Some(&k) {
                    rec.d.push(d);
                    rec.s_lower.push(chain_in_word(dg, walker.word(), opts.s_window) as u32);
                    rec.words.push(walker.word().to_vec());
                    next_cp += 1;
                }
            }
            rec
        })
        .collect();
    WalkRun {
        graph: dg.clone(),
        measure: m.clone(),
        seed,
        n,
        checkpoints,
        trials: records,
    }
}
