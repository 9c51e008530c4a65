//! Log-determinants of complex Gaussian Gram matrices.

use super::engine::{collect_samples, ks_distance, McConfig, McEstimate, McRng, SampleSummary};
use crate::error::Result;
use crate::fading::model::check_positive;
use crate::mimo::MimoConfig;
use crate::numeric::special::{digamma, trigamma};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::Serialize;
use std::f64::consts::FRAC_1_SQRT_2;

/// r×t matrix with i.i.d. CN(0, 1) entries, column-major.
pub fn sample_gaussian_matrix<R: Rng + ?Sized>(r: usize, t: usize, rng: &mut R) -> Vec<Complex64> {
    (0..r * t)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
        })
        .collect()
}

/// ln det(ρI + H†H) for a column-major r×t matrix, via Cholesky.
/// Returns −∞ for a singular Gram matrix.
pub fn ln_det_gram(h: &[Complex64], r: usize, t: usize, ridge: f64) -> f64 {
    let mut g = vec![Complex64::new(0.0, 0.0); t * t];
    for i in 0..t {
        for j in 0..=i {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..r {
                s += h[i * r + k].conj() * h[j * r + k];
            }
            g[i * t + j] = s;
        }
        g[i * t + i] += ridge;
    }
    // lower Cholesky in place, row-major lower triangle
    let mut ln_det = 0.0;
    for j in 0..t {
        let mut d = g[j * t + j].re;
        for k in 0..j {
            d -= g[j * t + k].norm_sqr();
        }
        if !(d > 0.0) {
            return f64::NEG_INFINITY;
        }
        let l = d.sqrt();
        g[j * t + j] = Complex64::new(l, 0.0);
        ln_det += 2.0 * l.ln();
        for i in j + 1..t {
            let mut s = g[i * t + j];
            for k in 0..j {
                s -= g[i * t + k] * g[j * t + k].conj();
            }
            g[i * t + j] = s / l;
        }
    }
    ln_det
}

/// One draw of ln det(H†H).
pub fn sample_ln_det<R: Rng + ?Sized>(t: usize, r: usize, rng: &mut R) -> f64 {
    let h = sample_gaussian_matrix(r, t, rng);
    ln_det_gram(&h, r, t, 0.0)
}

/// One draw of Σᵢ ln(Xᵢ/2) with Xᵢ ~ χ²_{2(r−i+1)}, i = 1..t.
pub fn sample_ln_det_chi2<R: Rng + ?Sized>(t: usize, r: usize, rng: &mut R) -> f64 {
    (1..=t)
        .map(|i| {
            // χ²_{2k}/2 ~ Gamma(k, 1)
            let g = Gamma::new((r - i + 1) as f64, 1.0).expect("positive shape");
            g.sample(rng).ln()
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetLogVerification {
    pub mean: McEstimate,
    pub var: McEstimate,
    pub mean_exact: f64,
    pub var_exact: f64,
    /// Two-sample KS distance between direct and chi-square sampling.
    pub ks_distance: f64,
}

impl DetLogVerification {
    pub fn moments_agree(&self, k: f64) -> bool {
        self.mean.agrees_with(self.mean_exact, k) && self.var.agrees_with(self.var_exact, k)
    }
}

/// Samples ln det(H†H) from Gaussian matrices, compares its moments with
/// Σψ(r−i+1) and Σψ'(r−i+1), and compares its distribution with the
/// sum-of-log-chi-square construction.
pub fn det_log_verify(t: u32, r: u32, mc: &McConfig) -> Result<DetLogVerification> {
    MimoConfig::new(t, r, 1.0)?;
    mc.validate()?;
    let (tu, ru) = (t as usize, r as usize);
    let mut direct = collect_samples(mc, |rng| sample_ln_det(tu, ru, rng));
    let mut chi2 = collect_samples(&mc.derive(0xc41), |rng| sample_ln_det_chi2(tu, ru, rng));
    let summary = SampleSummary::from_slice(&direct);
    let mut mean_exact = 0.0;
    let mut var_exact = 0.0;
    for i in 1..=t {
        mean_exact += digamma((r - i + 1) as f64)?;
        var_exact += trigamma((r - i + 1) as f64)?;
    }
    Ok(DetLogVerification {
        mean: summary.mean_estimate(mc.z()),
        var: summary.variance_estimate(mc.z()),
        mean_exact,
        var_exact,
        ks_distance: ks_distance(&mut direct, &mut chi2),
    })
}

/// Monte Carlo E{ln det(I + snr·H†H)}.
pub fn telatar_capacity_mc(cfg: &MimoConfig, snr: f64, mc: &McConfig) -> Result<McEstimate> {
    cfg.validate()?;
    check_positive("telatar_capacity_mc", snr)?;
    mc.validate()?;
    let (t, r) = (cfg.t as usize, cfg.r as usize);
    let ln_snr = snr.ln();
    Ok(super::engine::estimate_mean(mc, |rng: &mut McRng| {
        let h = sample_gaussian_matrix(r, t, rng);
        // det(I + snr·G) = snr^t det(G + I/snr)
        t as f64 * ln_snr + ln_det_gram(&h, r, t, 1.0 / snr)
    }))
}
