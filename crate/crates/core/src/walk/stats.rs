//! Point estimates with confidence intervals and the one-sample KS test.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::WalkError;

/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.576;
/// Asymptotic KS critical value at α = 0.01 is `KS_C / √N`.
pub const KS_C: f64 = 1.628;
pub const KS_MIN_SAMPLES: usize = 500;
pub const BOOTSTRAP_RESAMPLES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Estimate {
    pub fn excludes_zero(&self) -> bool {
        self.lo > 0.0 || self.hi < 0.0
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn overlaps(&self, other: &Estimate) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Mean ± 2.576 standard errors.
pub fn mean_ci(xs: &[f64]) -> Estimate {
    let m = mean(xs);
    let se = if xs.len() > 1 {
        (sample_variance(xs) / xs.len() as f64).sqrt()
    } else {
        0.0
    };
    Estimate {
        value: m,
        lo: m - Z99 * se,
        hi: m + Z99 * se,
    }
}

/// Sample variance with a normal-approximation interval from the fourth
/// central moment.
pub fn variance_ci(xs: &[f64]) -> Estimate {
    let n = xs.len() as f64;
    let m = mean(xs);
    let s2 = sample_variance(xs);
    let m2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    let se = ((m4 - m2 * m2).max(0.0) / n).sqrt();
    Estimate {
        value: s2,
        lo: s2 - Z99 * se,
        hi: s2 + Z99 * se,
    }
}

/// Percentile bootstrap interval (0.5% and 99.5%) for `stat`.
pub fn bootstrap_ci(xs: &[f64], stat: impl Fn(&[f64]) -> f64, resamples: usize, seed: u64) -> Estimate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = xs.len();
    let mut buf = vec![0.0; n];
    let mut stats: Vec<f64> = (0..resamples)
        .map(|_| {
            for b in buf.iter_mut() {
                *b = xs[rng.random_range(0..n)];
            }
            stat(&buf)
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let q = |p: f64| stats[((p * (resamples - 1) as f64).round() as usize).min(resamples - 1)];
    Estimate {
        value: stat(xs),
        lo: q(0.005),
        hi: q(0.995),
    }
}

pub fn bootstrap_mean_ci(xs: &[f64], resamples: usize, seed: u64) -> Estimate {
    bootstrap_ci(xs, mean, resamples, seed)
}

/// Largest gap between the empirical CDF of `samples` and `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub critical: f64,
    pub pass: bool,
}

/// One-sample KS test against the centered Gaussian of the given variance at α = 0.01.
pub fn ks_normal_test(samples: &[f64], variance: f64) -> Result<KsResult, WalkError> {
    if samples.len() < KS_MIN_SAMPLES {
        return Err(WalkError::TooFewTrials {
            needed: KS_MIN_SAMPLES,
            got: samples.len(),
        });
    }
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(WalkError::InvalidVariance(variance));
    }
    let normal = Normal::new(0.0, variance.sqrt()).map_err(|_| WalkError::InvalidVariance(variance))?;
    let statistic = ks_statistic(samples, |x| normal.cdf(x));
    let critical = KS_C / (samples.len() as f64).sqrt();
    Ok(KsResult {
        statistic,
        critical,
        pass: statistic < critical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_quantiles(n: usize, sd: f64) -> Vec<f64> {
        let normal = Normal::new(0.0, sd).unwrap();
        (0..n).map(|i| normal.inverse_cdf((i as f64 + 0.5) / n as f64)).collect()
    }

    #[test]
    fn ks_accepts_exact_quantiles() {
        let r = ks_normal_test(&gaussian_quantiles(1000, 0.75f64.sqrt()), 0.75).unwrap();
        assert!(r.pass);
        assert!(r.statistic < 1e-3);
    }

    #[test]
    fn ks_rejects_uniform() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        for v in [0.1, 0.75, 1.0, 4.0] {
            assert!(!ks_normal_test(&xs, v).unwrap().pass);
        }
    }

    #[test]
    fn ks_needs_enough_samples() {
        assert_eq!(
            ks_normal_test(&[0.0; 10], 1.0),
            Err(WalkError::TooFewTrials { needed: 500, got: 10 })
        );
    }

    #[test]
    fn intervals() {
        let xs: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let m = mean_ci(&xs);
        assert!((m.value - 49.5).abs() < 1e-12 && m.lo < 49.5 && m.hi > 49.5);
        let v = variance_ci(&xs);
        assert!(v.contains(v.value) && v.excludes_zero());
        let b = bootstrap_mean_ci(&xs, 200, 1);
        assert!(b.lo < 49.5 && b.hi > 49.5);
        assert_eq!(b, bootstrap_mean_ci(&xs, 200, 1));
        let constant = variance_ci(&[2.0; 50]);
        assert_eq!((constant.lo, constant.hi), (0.0, 0.0));
    }
}
