//! Batched, seeded Monte Carlo driver.
//!
//! Every batch owns a ChaCha8 stream: the generator is keyed by the run seed
//! and the batch index selects the stream (nonce). Batches run in parallel
//! on the rayon pool and are reduced in batch order, so results do not
//! depend on the thread count.

use crate::error::{domain, Result};
use crate::numeric::special::q_inverse;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub type McRng = ChaCha8Rng;

pub const DEFAULT_BATCHES: u32 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    pub batches: u32,
    pub confidence: f64,
}

impl McConfig {
    pub fn new(samples: u64, seed: u64) -> Result<Self> {
        let batches = DEFAULT_BATCHES.min(samples.max(1) as u32);
        let cfg = Self {
            samples,
            seed,
            batches,
            confidence: 0.95,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_batches(mut self, batches: u32) -> Result<Self> {
        self.batches = batches;
        self.validate()?;
        Ok(self)
    }

    pub fn with_confidence(mut self, confidence: f64) -> Result<Self> {
        self.confidence = confidence;
        self.validate()?;
        Ok(self)
    }

    pub fn with_samples(mut self, samples: u64) -> Result<Self> {
        self.samples = samples;
        self.batches = self.batches.min(samples.max(1) as u32);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(domain("McConfig", "samples must be at least 1"));
        }
        if self.batches == 0 || self.samples < self.batches as u64 {
            return Err(domain(
                "McConfig",
                format!("need 1 ≤ batches ≤ samples (batches = {}, samples = {})", self.batches, self.samples),
            ));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(domain("McConfig", "confidence must lie in (0, 1)"));
        }
        Ok(())
    }

    /// Independent configuration for a sub-computation identified by `tag`.
    pub fn derive(&self, tag: u64) -> Self {
        Self {
            seed: splitmix64(self.seed ^ splitmix64(tag.wrapping_add(0x5851_f42d_4c95_7f2d))),
            ..*self
        }
    }

    /// Two-sided normal quantile for the configured confidence.
    pub fn z(&self) -> f64 {
        q_inverse(0.5 * (1.0 - self.confidence)).unwrap_or(1.959_963_984_540_054)
    }

    pub fn batch_len(&self, batch: u32) -> u64 {
        let b = self.batches as u64;
        self.samples / b + u64::from((batch as u64) < self.samples % b)
    }

    pub fn rng(&self, batch: u32) -> McRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(batch as u64);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Running mean/variance (Welford) with Chan's merge.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&self, other: &Moments) -> Moments {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let w = other.n as f64 / n as f64;
        Moments {
            n,
            mean: self.mean + d * w,
            m2: self.m2 + other.m2 + d * d * self.n as f64 * w,
        }
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub n_effective: u64,
    pub ci_half_width: f64,
    /// Unclamped mean; differs from `mean` only for clamped probabilities.
    pub raw_mean: f64,
    #[serde(skip)]
    pub batch_means: Vec<f64>,
}

impl McEstimate {
    /// A value known without sampling error.
    pub fn exact(value: f64) -> Self {
        Self {
            mean: value,
            std_err: 0.0,
            n_effective: 0,
            ci_half_width: 0.0,
            raw_mean: value,
            batch_means: Vec::new(),
        }
    }

    pub fn from_value(mean: f64, std_err: f64, n_effective: u64, z: f64) -> Self {
        Self {
            mean,
            std_err,
            n_effective,
            ci_half_width: z * std_err,
            raw_mean: mean,
            batch_means: Vec::new(),
        }
    }

    pub fn from_batches(batches: &[Moments], z: f64) -> Self {
        let total = batches.iter().fold(Moments::default(), |acc, b| acc.merge(b));
        let std_err = if total.n > 0 {
            (total.variance() / total.n as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean: total.mean,
            std_err,
            n_effective: total.n,
            ci_half_width: z * std_err,
            raw_mean: total.mean,
            batch_means: batches.iter().map(|b| b.mean).collect(),
        }
    }

    pub fn clamp_probability(mut self) -> Self {
        self.mean = self.raw_mean.clamp(0.0, 1.0);
        self
    }

    pub fn ci(&self) -> (f64, f64) {
        (self.mean - self.ci_half_width, self.mean + self.ci_half_width)
    }

    /// Largest batch-mean deviation from the pooled mean, in units of the
    /// per-batch standard error.
    pub fn max_batch_deviation(&self) -> f64 {
        if self.batch_means.len() < 2 || self.std_err == 0.0 {
            return 0.0;
        }
        let per_batch = self.std_err * (self.batch_means.len() as f64).sqrt();
        self.batch_means
            .iter()
            .map(|m| (m - self.mean).abs() / per_batch)
            .fold(0.0, f64::max)
    }

    /// True when `value` lies within `k` standard errors of the mean.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_err
    }
}

/// Runs `work(rng, len, batch)` for every batch and returns the results in
/// batch order.
pub fn run_batches<T, F>(cfg: &McConfig, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut McRng, u64, u32) -> T + Sync,
{
    (0..cfg.batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = cfg.rng(b);
            work(&mut rng, cfg.batch_len(b), b)
        })
        .collect()
}

/// Sample mean of `draw` with batch-pooled standard error.
pub fn estimate_mean<F>(cfg: &McConfig, draw: F) -> McEstimate
where
    F: Fn(&mut McRng) -> f64 + Sync,
{
    let batches = run_batches(cfg, |rng, len, _| {
        let mut m = Moments::default();
        for _ in 0..len {
            m.push(draw(rng));
        }
        m
    });
    McEstimate::from_batches(&batches, cfg.z())
}

/// Mean, variance and higher central moments of a stored sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleSummary {
    pub n: u64,
    pub mean: f64,
    pub variance: f64,
    pub abs_third: f64,
    pub fourth: f64,
}

impl SampleSummary {
    pub fn from_slice(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        for &x in xs {
            let d = x - mean;
            let d2 = d * d;
            m2 += d2;
            m3 += d2 * d.abs();
            m4 += d2 * d2;
        }
        Self {
            n: xs.len() as u64,
            mean,
            variance: if xs.len() > 1 { m2 / (n - 1.0) } else { 0.0 },
            abs_third: m3 / n,
            fourth: m4 / n,
        }
    }

    pub fn mean_estimate(&self, z: f64) -> McEstimate {
        McEstimate::from_value(self.mean, (self.variance / self.n as f64).sqrt(), self.n, z)
    }

    /// Sample variance with the large-sample standard error √((μ₄ − s⁴)/n).
    pub fn variance_estimate(&self, z: f64) -> McEstimate {
        let se = ((self.fourth - self.variance * self.variance).max(0.0) / self.n as f64).sqrt();
        McEstimate::from_value(self.variance, se, self.n, z)
    }
}

/// Collects `draw` over all batches into one vector (batch order).
pub fn collect_samples<F>(cfg: &McConfig, draw: F) -> Vec<f64>
where
    F: Fn(&mut McRng) -> f64 + Sync,
{
    run_batches(cfg, |rng, len, _| (0..len).map(|_| draw(rng)).collect::<Vec<_>>())
        .into_iter()
        .flatten()
        .collect()
}

/// Two-sample Kolmogorov–Smirnov distance sup|F_a − F_b|. Sorts in place.
pub fn ks_distance(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn config_validation() {
        assert!(McConfig::new(0, 1).is_err());
        assert!(McConfig::new(10, 1).unwrap().with_batches(11).is_err());
        assert!(McConfig::new(10, 1).unwrap().with_confidence(1.0).is_err());
        let c = McConfig::new(5, 1).unwrap();
        assert_eq!(c.batches, 5);
    }

    #[test]
    fn batch_lengths_cover_samples() {
        let c = McConfig::new(1003, 9).unwrap().with_batches(10).unwrap();
        let total: u64 = (0..c.batches).map(|b| c.batch_len(b)).sum();
        assert_eq!(total, 1003);
    }

    #[test]
    fn reproducible_and_thread_independent() {
        let c = McConfig::new(100_000, 42).unwrap();
        let a = estimate_mean(&c, |r| r.random::<f64>());
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| estimate_mean(&c, |r| r.random::<f64>()));
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.std_err.to_bits(), b.std_err.to_bits());
        assert!(a.agrees_with(0.5, 4.0));
        assert!(a.max_batch_deviation() < 6.0);
    }

    #[test]
    fn derived_configs_differ() {
        let c = McConfig::new(1000, 7).unwrap();
        assert_ne!(c.derive(1).seed, c.derive(2).seed);
        assert_eq!(c.derive(1).seed, c.derive(1).seed);
    }

    #[test]
    fn chan_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.13).collect();
        let mut whole = Moments::default();
        xs.iter().for_each(|&x| whole.push(x));
        let (mut a, mut b) = (Moments::default(), Moments::default());
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        let m = a.merge(&b);
        assert!((m.mean - whole.mean).abs() < 1e-12);
        assert!((m.variance() - whole.variance()).abs() < 1e-10);
    }

    #[test]
    fn ks_identical_and_shifted() {
        let mut a: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let mut b = a.clone();
        assert_eq!(ks_distance(&mut a, &mut b), 0.0);
        let mut c: Vec<f64> = (0..100).map(|i| i as f64 + 50.0).collect();
        assert!((ks_distance(&mut a, &mut c) - 0.5).abs() < 1e-12);
    }
}
