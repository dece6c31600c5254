//! Estimators and exact checks run on top of simulated walks.

use std::sync::Arc;

use num_rational::Ratio;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{bootstrap_ci, bootstrap_mean_ci, ks_normal_test, mean_ci, sample_variance, Estimate, BOOTSTRAP_RESAMPLES};
use super::{simulate, trial_rng, SimOptions, StepMeasure, WalkError, WalkRun, PRNG_NAME};
use crate::raag::{match_prefix, prefix_overlap_indexed, push_reduced, DefiningGraph, HeapIndex, Letter, NormalForm};

/// Attached to every variance-formula report.
pub const FORMULA_TOLERANCE_NOTE: &str =
    "no convergence rate is known for the Monte Carlo ψ approximation; the 20% tolerance is an engineering choice";

/// Random reduced word of length exactly `len`; letters that would cancel
/// are redrawn.
pub fn random_element(dg: &Arc<DefiningGraph>, len: usize, rng: &mut ChaCha8Rng) -> NormalForm {
    let letters = dg.letters();
    let mut w: Vec<Letter> = Vec::with_capacity(len);
    while w.len() < len {
        let before = w.len();
        let l = letters[rng.random_range(0..letters.len())];
        push_reduced(dg, &mut w, l);
        if w.len() < before {
            push_reduced(dg, &mut w, l.inverse());
        }
    }
    NormalForm::from_reduced(dg, w)
}

fn inverse_word(w: &[Letter]) -> Vec<Letter> {
    w.iter().rev().map(|l| l.inverse()).collect()
}

/// `|u⁻¹ v|`.
fn word_dist(dg: &DefiningGraph, u: &[Letter], v: &[Letter]) -> i64 {
    let mut w = Vec::with_capacity(u.len() + v.len());
    for l in u.iter().rev() {
        push_reduced(dg, &mut w, l.inverse());
    }
    for &l in v {
        push_reduced(dg, &mut w, l);
    }
    w.len() as i64
}

/// `h_x(a) = d(x, a) - d(x, e)`.
fn horo(dg: &DefiningGraph, x: &[Letter], a: &[Letter]) -> i64 {
    word_dist(dg, x, a) - x.len() as i64
}

/// Mean of `d(Z_n o, o)/n` with a normal-approximation interval.
pub fn drift_estimate(run: &WalkRun) -> Estimate {
    if run.n == 0 {
        return Estimate { value: 0.0, lo: 0.0, hi: 0.0 };
    }
    let xs: Vec<f64> = run.final_distances().iter().map(|&d| d as f64 / run.n as f64).collect();
    mean_ci(&xs)
}

/// The drift estimate as an exact fraction.
pub fn drift_exact(run: &WalkRun) -> Ratio<u64> {
    let total: u64 = run.final_distances().iter().map(|&d| d as u64).sum();
    Ratio::new(total, (run.n.max(1) * run.trial_count().max(1)) as u64)
}

/// `(d(Z_n o, o) - nλ)/√n` per trial.
pub fn clt_stat(run: &WalkRun, lambda: f64) -> Vec<f64> {
    let n = run.n as f64;
    run.final_distances()
        .iter()
        .map(|&d| (d as f64 - n * lambda) / n.sqrt())
        .collect()
}

/// Sample variance with a bootstrap interval; the resampling seed is fixed
/// so the interval depends on the samples only.
pub fn sigma2_direct(samples: &[f64]) -> Estimate {
    bootstrap_ci(samples, sample_variance, BOOTSTRAP_RESAMPLES, 0x7369_676d_6132)
}

/// Mean of `S_lower(n)/n` at the horizon.
pub fn s_growth(run: &WalkRun) -> Estimate {
    if run.n == 0 {
        return Estimate { value: 0.0, lo: 0.0, hi: 0.0 };
    }
    let xs: Vec<f64> = run.final_s_lower().iter().map(|&s| s as f64 / run.n as f64).collect();
    mean_ci(&xs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub n: usize,
    pub threshold: f64,
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationProfile {
    /// Frequency of `|d(Z_n o,o) - nλ| ≥ εn`.
    pub deviation: Vec<TailRow>,
    /// Frequency of `(Z_n o|y)_o ≥ an`.
    pub gromov_tail: Vec<TailRow>,
    /// Per ε, whether the deviation frequency never increases along checkpoints.
    pub deviation_monotone: Vec<bool>,
    pub gromov_monotone: Vec<bool>,
}

fn monotone(rows: &[TailRow], thresholds: &[f64]) -> Vec<bool> {
    thresholds
        .iter()
        .map(|&t| {
            let f: Vec<f64> = rows.iter().filter(|r| r.threshold == t).map(|r| r.frequency).collect();
            f.windows(2).all(|w| w[1] <= w[0])
        })
        .collect()
}

/// Empirical deviation and Gromov-product tail frequencies at the run's
/// nonzero checkpoints.
pub fn deviation_profile(
    run: &WalkRun,
    lambda: f64,
    epsilons: &[f64],
    a_values: &[f64],
    probe: &NormalForm,
) -> DeviationProfile {
    let dg = &run.graph;
    let trials = run.trial_count().max(1) as f64;
    let probe_index = HeapIndex::new(dg, probe.letters());
    let mut deviation = Vec::new();
    let mut gromov_tail = Vec::new();
    for (c, &n) in run.checkpoints.iter().enumerate() {
        if n == 0 {
            continue;
        }
        let nf = n as f64;
        let overlaps: Vec<usize> = run
            .trials
            .par_iter()
            .map(|t| {
                let w = &t.words[c];
                prefix_overlap_indexed(dg, w, &HeapIndex::new(dg, w), probe.letters(), &probe_index)
            })
            .collect();
        for &eps in epsilons {
            let hits = run
                .trials
                .iter()
                .filter(|t| (t.d[c] as f64 - nf * lambda).abs() >= eps * nf)
                .count();
            deviation.push(TailRow {
                n,
                threshold: eps,
                frequency: hits as f64 / trials,
            });
        }
        for &a in a_values {
            let hits = overlaps.iter().filter(|&&g| g as f64 >= a * nf).count();
            gromov_tail.push(TailRow {
                n,
                threshold: a,
                frequency: hits as f64 / trials,
            });
        }
    }
    DeviationProfile {
        deviation_monotone: monotone(&deviation, epsilons),
        gromov_monotone: monotone(&gromov_tail, a_values),
        deviation,
        gromov_tail,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub checked: usize,
    pub violations: usize,
}

/// `σ(g, x) = d(x, g⁻¹) - d(x, e)`.
fn cocycle(dg: &DefiningGraph, g: &[Letter], x: &[Letter]) -> i64 {
    horo(dg, x, &inverse_word(g))
}

/// Checks `σ(gg', x) = σ(g, g'x) + σ(g', x)` on random triples with
/// lengths up to `max_len`.
pub fn cocycle_check(dg: &Arc<DefiningGraph>, samples: usize, seed: u64, max_len: usize) -> IdentityReport {
    let violations = (0..samples)
        .into_par_iter()
        .filter(|&i| {
            let mut rng = trial_rng(seed, i as u64);
            let pick = |r: &mut ChaCha8Rng| {
                let len = r.random_range(0..=max_len);
                random_element(dg, len, r)
            };
            let (g, h, x) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
            let gh = g.mul_letters(h.letters());
            let hx = h.mul_letters(x.letters());
            let lhs = cocycle(dg, gh.letters(), x.letters());
            let rhs = cocycle(dg, g.letters(), hx.letters()) + cocycle(dg, h.letters(), x.letters());
            lhs != rhs
        })
        .count();
    IdentityReport {
        checked: samples,
        violations,
    }
}

/// Checks `2(a|x)_z = d(a,z) + h_x(z) - h_x(a)` and
/// `h_x(a) = d(e,a) - 2(a|x)_e`, with Gromov products taken from medians.
pub fn gromov_identity_check(dg: &Arc<DefiningGraph>, samples: usize, seed: u64, max_len: usize) -> IdentityReport {
    let violations = (0..samples)
        .into_par_iter()
        .filter(|&i| {
            let mut rng = trial_rng(seed, i as u64);
            let pick = |r: &mut ChaCha8Rng| {
                let len = r.random_range(0..=max_len);
                random_element(dg, len, r)
            };
            let (a, x, z) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
            let e = NormalForm::identity(dg);
            let gz = NormalForm::gromov(&a, &x, &z).unwrap() as i64;
            let ge = NormalForm::gromov(&a, &x, &e).unwrap() as i64;
            let hz = horo(dg, x.letters(), z.letters());
            let ha = horo(dg, x.letters(), a.letters());
            let d_az = word_dist(dg, a.letters(), z.letters());
            2 * gz != d_az + hz - ha || ha != a.len() as i64 - 2 * ge
        })
        .count();
    IdentityReport {
        checked: samples,
        violations,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiSigmaReport {
    pub horizon: usize,
    pub proxies: usize,
    pub backward: usize,
    pub lambda_hat: f64,
    /// ψ̂ at each boundary proxy ξ.
    pub psi: Vec<f64>,
    /// ψ̂ at the translate `g·ξ` used for the same proxy.
    pub psi_translate: Vec<f64>,
    pub sigma2_formula: Estimate,
    pub tolerance_note: String,
}

/// Variance-formula estimate with ψ̂ from `backward` reflected-walk proxies
/// and `trials` forward proxies for boundary points, all walks of length `t`.
pub fn psi_sigma_estimate(
    dg: &Arc<DefiningGraph>,
    m: &StepMeasure,
    seed: u64,
    t: usize,
    trials: usize,
    lambda_hat: f64,
) -> Result<PsiSigmaReport, WalkError> {
    psi_sigma_estimate_with(dg, m, seed, t, trials, trials, lambda_hat)
}

pub fn psi_sigma_estimate_with(
    dg: &Arc<DefiningGraph>,
    m: &StepMeasure,
    seed: u64,
    t: usize,
    trials: usize,
    backward: usize,
    lambda_hat: f64,
) -> Result<PsiSigmaReport, WalkError> {
    const MIN_HORIZON: usize = 100;
    const MIN_TRIALS: usize = 2;
    if t < MIN_HORIZON {
        return Err(WalkError::InvalidParameter(format!("horizon {t} < {MIN_HORIZON}")));
    }
    if trials < MIN_TRIALS || backward < MIN_TRIALS {
        return Err(WalkError::TooFewTrials {
            needed: MIN_TRIALS,
            got: trials.min(backward),
        });
    }
    let opts = SimOptions {
        checkpoints: vec![t],
        ..Default::default()
    };
    let stream = |k: u64| seed ^ super::splitmix64(0x5053_4947_4d41_0000 | k);
    let back = simulate(dg, &m.reflected(), stream(1), t, backward, &opts);
    let fwd = simulate(dg, m, stream(2), t, trials, &opts);
    let sampler = WeightedIndex::new(m.support.iter().map(|(_, p)| *p)).expect("validated measure");
    let back_words: Vec<(&[Letter], HeapIndex)> = back
        .trials
        .iter()
        .map(|r| (r.words[0].as_slice(), HeapIndex::new(dg, &r.words[0])))
        .collect();
    let psi_hat = |x: &[Letter]| -> f64 {
        let ix = HeapIndex::new(dg, x);
        let total: usize = back_words.iter().map(|(y, iy)| prefix_overlap_indexed(dg, x, &ix, y, iy)).sum();
        -2.0 * total as f64 / back_words.len() as f64
    };
    let rows: Vec<(f64, f64, f64)> = fwd
        .trials
        .par_iter()
        .enumerate()
        .map(|(i, r)| {
            let mut rng = trial_rng(stream(3), i as u64);
            let g = &m.support[sampler.sample(&mut rng)].0;
            let xi = r.words[0].as_slice();
            let mut gxi: Vec<Letter> = Vec::with_capacity(g.len() + xi.len());
            for &l in g.iter().chain(xi) {
                push_reduced(dg, &mut gxi, l);
            }
            let (p, pg) = (psi_hat(xi), psi_hat(&gxi));
            let h = horo(dg, xi, &inverse_word(g)) as f64;
            (p, pg, (h - p + pg - lambda_hat).powi(2))
        })
        .collect();
    let terms: Vec<f64> = rows.iter().map(|r| r.2).collect();
    Ok(PsiSigmaReport {
        horizon: t,
        proxies: trials,
        backward,
        lambda_hat,
        psi: rows.iter().map(|r| r.0).collect(),
        psi_translate: rows.iter().map(|r| r.1).collect(),
        sigma2_formula: bootstrap_mean_ci(&terms, BOOTSTRAP_RESAMPLES, stream(4)),
        tolerance_note: FORMULA_TOLERANCE_NOTE.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoiteReport {
    pub lambda_hat: f64,
    pub epsilon: f64,
    pub a: f64,
    /// First `n ≥ 1` with `⌊An⌋ > 3εn + 2`; `None` when `A ≤ 3ε`.
    pub n0: Option<usize>,
    pub steps_checked: usize,
    pub hypothesis_steps: usize,
    pub violations_1: usize,
    pub violations_2: usize,
    pub violations_3_below_n0: usize,
    pub violations_3_beyond_n0: usize,
}

impl BoiteReport {
    pub fn passed(&self) -> bool {
        self.violations_1 == 0 && self.violations_2 == 0 && self.violations_3_beyond_n0 == 0
    }
}

pub fn boite_threshold(a: f64, eps: f64) -> Option<usize> {
    if a <= 3.0 * eps {
        return None;
    }
    (1..).find(|&n: &usize| (a * n as f64).floor() > 3.0 * eps * n as f64 + 2.0)
}

/// Checks the three box-lemma conclusions at every checkpoint and trial
/// where the four numerical hypotheses hold, with `S_lower` standing in
/// for `S`.
pub fn boite_monitor(run: &WalkRun, lambda_hat: f64, eps: f64, a: f64, x: &NormalForm, y: &NormalForm) -> BoiteReport {
    let dg = &run.graph;
    let n0 = boite_threshold(a, eps);
    let (xw, yw) = (x.letters(), y.letters());
    let (ix, iy) = (HeapIndex::new(dg, xw), HeapIndex::new(dg, yw));
    let per_trial: Vec<[usize; 6]> = run
        .trials
        .par_iter()
        .map(|rec| {
            let mut c = [0usize; 6];
            for (k, &n) in run.checkpoints.iter().enumerate() {
                if n == 0 {
                    continue;
                }
                c[0] += 1;
                let nf = n as f64;
                let g = rec.words[k].as_slice();
                let gi = inverse_word(g);
                let (ig, igi) = (HeapIndex::new(dg, g), HeapIndex::new(dg, &gi));
                let d = rec.d[k] as i64;
                // (x|g⁻¹)_o and (y|g)_o
                let ov_x = prefix_overlap_indexed(dg, xw, &ix, &gi, &igi) as i64;
                let ov_y = prefix_overlap_indexed(dg, yw, &iy, g, &ig) as i64;
                let (hx, hy) = (d - 2 * ov_x, d - 2 * ov_y);
                let near = |v: i64| (v as f64 - nf * lambda_hat).abs() <= eps * nf;
                if (rec.s_lower[k] as f64) < a * nf || !near(hx) || !near(d) || !near(hy) {
                    continue;
                }
                c[1] += 1;
                if ov_y as f64 > eps * nf {
                    c[2] += 1;
                }
                // (o|x)_{g⁻¹o}
                if ((d - ov_x) as f64) < (lambda_hat - eps) * nf {
                    c[3] += 1;
                }
                // g⁻¹ = p·u and x = p·v with p maximal, so gx = u⁻¹v reduced
                let counts = match_prefix(dg, &gi, &igi, xw, &ix);
                let mut gx = inverse_word(&igi.remainder(&gi, &counts));
                gx.extend(ix.remainder(xw, &counts));
                let ov = prefix_overlap_indexed(dg, &gx, &HeapIndex::new(dg, &gx), yw, &iy);
                if ov as f64 > eps * nf {
                    if n0.is_some_and(|n0| n >= n0) {
                        c[5] += 1;
                    } else {
                        c[4] += 1;
                    }
                }
            }
            c
        })
        .collect();
    let mut total = [0usize; 6];
    for c in per_trial {
        for (t, v) in total.iter_mut().zip(c) {
            *t += v;
        }
    }
    BoiteReport {
        lambda_hat,
        epsilon: eps,
        a,
        n0,
        steps_checked: total[0],
        hypothesis_steps: total[1],
        violations_1: total[2],
        violations_2: total[3],
        violations_3_below_n0: total[4],
        violations_3_beyond_n0: total[5],
    }
}

/// Distribution of the walk together with the estimators computed on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    pub seed: u64,
    pub n: usize,
    pub trials: usize,
    pub prng: String,
    pub lambda_hat: Estimate,
    /// `λ̂` as the exact fraction `Σ d / (n · trials)`.
    pub lambda_hat_exact: String,
    /// Centering used for the normality test.
    pub lambda_center: f64,
    pub sigma2_direct: Estimate,
    pub sigma2_formula: Option<Estimate>,
    pub sigma2_formula_note: Option<String>,
    /// Variance of the Gaussian the KS test compares against.
    pub ks_variance: f64,
    pub ks_statistic: Option<f64>,
    pub ks_critical: Option<f64>,
    pub normality_pass: Option<bool>,
    pub s_slope: Estimate,
    pub nondegenerate: bool,
}

/// Builds the report for `run`. The CLT statistic is centered at `center`
/// (default `λ̂`) and tested against `variance` (default the fitted one);
/// the KS fields are empty when there are too few trials or no positive
/// variance to test against.
pub fn clt_report(run: &WalkRun, center: Option<f64>, variance: Option<f64>, formula: Option<&PsiSigmaReport>) -> CltReport {
    let lambda_hat = drift_estimate(run);
    let lambda_center = center.unwrap_or(lambda_hat.value);
    let samples = clt_stat(run, lambda_center);
    let direct = if samples.len() >= 2 {
        sigma2_direct(&samples)
    } else {
        Estimate { value: 0.0, lo: 0.0, hi: 0.0 }
    };
    let ks_variance = variance.unwrap_or(direct.value);
    let ks = ks_normal_test(&samples, ks_variance).ok();
    CltReport {
        seed: run.seed,
        n: run.n,
        trials: run.trial_count(),
        prng: PRNG_NAME.to_string(),
        lambda_hat,
        lambda_hat_exact: drift_exact(run).to_string(),
        lambda_center,
        sigma2_direct: direct,
        sigma2_formula: formula.map(|f| f.sigma2_formula),
        sigma2_formula_note: formula.map(|f| f.tolerance_note.clone()),
        ks_variance,
        ks_statistic: ks.map(|k| k.statistic),
        ks_critical: ks.map(|k| k.critical),
        normality_pass: ks.map(|k| k.pass),
        s_slope: s_growth(run),
        nondegenerate: direct.excludes_zero(),
    }
}

/// `h_ξ(g⁻ⁿ o)/n` with `ξ = g^K o`, the horofunction estimate of the
/// translation length.
pub fn horofunction_translation(g: &NormalForm, n: u32, k: u32) -> f64 {
    let dg = g.graph();
    let xi = g.pow(k);
    let gn = g.inv().pow(n);
    horo(dg, xi.letters(), gn.letters()) as f64 / n as f64
}
