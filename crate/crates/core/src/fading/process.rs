use super::model::FadingModel;
use crate::error::{Error, Result};
use crate::monte_carlo::engine::{run_batches, McConfig, McEstimate, Moments};
use crate::numeric::quadrature::QuadratureSpec;
use crate::numeric::special::EULER_GAMMA;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use std::f64::consts::{LN_2, PI};

/// Stationary fading sequence H₁, H₂, …
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum FadingProcess {
    Iid(FadingModel),
    /// Hᵢ = aHᵢ₋₁ + Wᵢ with unit-variance Gaussian marginal.
    GaussAr1 { a: f64 },
    GaussArma(ArmaFilter),
}

/// Causal ARMA(p, q) filter x_t = Σ φᵢ x_{t−i} + w_t + Σ θⱼ w_{t−j}.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmaFilter {
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    #[serde(skip)]
    psi: Vec<f64>,
    #[serde(skip)]
    gamma0: f64,
}

const PSI_MAX_TERMS: usize = 200_000;

impl ArmaFilter {
    pub fn new(ar: Vec<f64>, ma: Vec<f64>) -> Result<Self> {
        if ar.iter().chain(&ma).any(|c| !c.is_finite()) {
            return Err(Error::InvalidModel("ARMA coefficients must be finite".into()));
        }
        if !ar_is_stable(&ar) {
            return Err(Error::InvalidModel(format!("AR polynomial {ar:?} has a root on or inside the unit circle")));
        }
        let mut psi = vec![1.0];
        let mut quiet = 0;
        for j in 1..PSI_MAX_TERMS {
            let mut v = ma.get(j - 1).copied().unwrap_or(0.0);
            for (i, phi) in ar.iter().enumerate().take(j) {
                v += phi * psi[j - 1 - i];
            }
            psi.push(v);
            quiet = if v.abs() < 1e-18 { quiet + 1 } else { 0 };
            if j > ma.len() && quiet > ar.len().max(1) {
                break;
            }
        }
        let gamma0 = psi.iter().map(|p| p * p).sum();
        Ok(Self { ar, ma, psi, gamma0 })
    }

    /// Lag-k autocorrelation of the filter output.
    pub fn correlation(&self, k: usize) -> f64 {
        if k >= self.psi.len() {
            return 0.0;
        }
        let s: f64 = self.psi.iter().zip(&self.psi[k..]).map(|(a, b)| a * b).sum();
        s / self.gamma0
    }
}

// Step-down recursion: stable iff every reflection coefficient has |κ| < 1.
fn ar_is_stable(ar: &[f64]) -> bool {
    let mut a = ar.to_vec();
    while let Some(&k) = a.last() {
        if !(k.abs() < 1.0) {
            return false;
        }
        let p = a.len();
        let denom = 1.0 - k * k;
        let next: Vec<f64> = (0..p - 1).map(|j| (a[j] + k * a[p - 2 - j]) / denom).collect();
        a = next;
    }
    true
}

impl FadingProcess {
    pub fn gauss_ar1(a: f64) -> Result<Self> {
        if !(a.abs() < 1.0) {
            return Err(Error::InvalidModel(format!("AR(1) parameter a = {a} must satisfy |a| < 1")));
        }
        Ok(FadingProcess::GaussAr1 { a })
    }

    pub fn gauss_arma(ar: Vec<f64>, ma: Vec<f64>) -> Result<Self> {
        ArmaFilter::new(ar, ma).map(FadingProcess::GaussArma)
    }

    /// Law of a single Hᵢ. Gaussian processes have |N(0, 1)| marginals.
    pub fn marginal(&self) -> FadingModel {
        match self {
            FadingProcess::Iid(m) => m.clone(),
            _ => FadingModel::Nakagami { m: 0.5 },
        }
    }

    /// Correlation of the underlying Gaussian sequence at lag k.
    pub fn gaussian_correlation(&self, k: usize) -> Option<f64> {
        match self {
            FadingProcess::Iid(_) => None,
            FadingProcess::GaussAr1 { a } => Some(a.powi(k as i32)),
            FadingProcess::GaussArma(f) => Some(f.correlation(k)),
        }
    }

    pub fn name(&self) -> String {
        match self {
            FadingProcess::Iid(m) => format!("iid {}", m.name()),
            FadingProcess::GaussAr1 { a } => format!("gauss-ar1(a={a})"),
            FadingProcess::GaussArma(f) => format!("gauss-arma(ar={:?}, ma={:?})", f.ar, f.ma),
        }
    }
}

/// Cov(½ln H₁², ½ln H₁₊ₖ²).
pub fn log_autocovariance(process: &FadingProcess, k: usize, mc: &McConfig) -> Result<McEstimate> {
    mc.validate()?;
    match process {
        FadingProcess::Iid(model) => {
            if k > 0 {
                return Ok(McEstimate::exact(0.0));
            }
            let lm = model.log_moments(&QuadratureSpec::default())?;
            Ok(McEstimate::exact(lm.var_half_log_sq))
        }
        _ => {
            let c = process.gaussian_correlation(k).unwrap_or(0.0);
            if k == 0 {
                return Ok(McEstimate::exact(PI * PI / 8.0));
            }
            if c == 0.0 {
                return Ok(McEstimate::exact(0.0));
            }
            Ok(gaussian_log_covariance_mc(c, &mc.derive(k as u64)))
        }
    }
}

fn gaussian_log_covariance_mc(c: f64, mc: &McConfig) -> McEstimate {
    // E{ln|X|} for X ~ N(0, 1)
    let mu = -(EULER_GAMMA + LN_2) / 2.0;
    let s = (1.0 - c * c).sqrt();
    let batches = run_batches(mc, |rng, len, _| {
        let mut m = Moments::default();
        for _ in 0..len {
            let x: f64 = rng.sample(StandardNormal);
            let z: f64 = rng.sample(StandardNormal);
            let y = c * x + s * z;
            m.push((x.abs().ln() - mu) * (y.abs().ln() - mu));
        }
        m
    });
    McEstimate::from_batches(&batches, mc.z())
}

/// Stopping rule for the autocovariance series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationRule {
    pub stop_fraction: f64,
    pub max_lag: usize,
    pub consecutive: usize,
}

impl Default for TruncationRule {
    fn default() -> Self {
        Self {
            stop_fraction: 1e-3,
            max_lag: 200,
            consecutive: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispersionSum {
    pub value: f64,
    pub std_err: f64,
    /// Last lag included in the sum.
    pub lags: usize,
    pub autocovariances: Vec<McEstimate>,
}

/// ½ + R(0) + 2Σₖ R(k), truncated when a lag's estimate is below
/// `stop_fraction·R(0)` within its confidence interval for `consecutive`
/// lags in a row.
pub fn dispersion_sum(process: &FadingProcess, mc: &McConfig, rule: &TruncationRule) -> Result<DispersionSum> {
    let r0 = log_autocovariance(process, 0, mc)?;
    let mut value = 0.5 + r0.mean;
    let mut var = r0.std_err * r0.std_err;
    let mut acv = vec![r0.clone()];
    if matches!(process, FadingProcess::Iid(_)) {
        return Ok(DispersionSum {
            value,
            std_err: var.sqrt(),
            lags: 0,
            autocovariances: acv,
        });
    }
    let threshold = rule.stop_fraction * r0.mean.abs();
    let mut run = 0;
    for k in 1..=rule.max_lag {
        let r = log_autocovariance(process, k, mc)?;
        value += 2.0 * r.mean;
        var += 4.0 * r.std_err * r.std_err;
        run = if r.mean.abs() - r.ci_half_width < threshold { run + 1 } else { 0 };
        acv.push(r);
        if run >= rule.consecutive {
            return Ok(DispersionSum {
                value,
                std_err: var.sqrt(),
                lags: k,
                autocovariances: acv,
            });
        }
    }
    Err(Error::NonConvergence {
        max_lag: rule.max_lag,
        partial: value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // ¼ Σ ((k−1)!)² c^{2k} / ((½)ₖ k!)
    fn series_oracle(c: f64) -> f64 {
        let mut term = c * c / 0.5;
        let mut s = term;
        for k in 1..20_000 {
            let kf = k as f64;
            term *= kf * kf * c * c / ((kf + 0.5) * (kf + 1.0));
            s += term;
        }
        s / 4.0
    }

    #[test]
    fn series_oracle_frozen_values() {
        assert!((series_oracle(0.9) - 0.626_941_883_4).abs() < 1e-9);
        assert!((series_oracle(0.5) - 0.137_077_838_9).abs() < 1e-9);
    }

    #[test]
    fn iid_lags_exact() {
        let p = FadingProcess::Iid(FadingModel::rayleigh());
        let mc = McConfig::new(1000, 1).unwrap();
        for k in 1..10 {
            let r = log_autocovariance(&p, k, &mc).unwrap();
            assert_eq!((r.mean, r.std_err), (0.0, 0.0));
        }
        let r0 = log_autocovariance(&p, 0, &mc).unwrap();
        assert!((r0.mean - PI * PI / 24.0).abs() < 1e-13);
        let d = dispersion_sum(&p, &mc, &TruncationRule::default()).unwrap();
        assert!((d.value - (0.5 + PI * PI / 24.0)).abs() < 1e-13);
    }

    #[test]
    fn ar1_lag_covariances_match_series() {
        let mc = McConfig::new(2_000_000, 11).unwrap();
        for a in [0.9, 0.5] {
            let p = FadingProcess::gauss_ar1(a).unwrap();
            let r = log_autocovariance(&p, 1, &mc).unwrap();
            assert!(r.agrees_with(series_oracle(a), 4.0), "a = {a}: {r:?}");
        }
        let r9 = log_autocovariance(&FadingProcess::gauss_ar1(0.9).unwrap(), 1, &mc).unwrap();
        let r5 = log_autocovariance(&FadingProcess::gauss_ar1(0.5).unwrap(), 1, &mc).unwrap();
        assert!(r9.mean > r5.mean && r5.mean > 0.0);
    }

    #[test]
    fn ar1_zero_is_iid_half_normal() {
        let mc = McConfig::new(1000, 1).unwrap();
        let p = FadingProcess::gauss_ar1(0.0).unwrap();
        let d = dispersion_sum(&p, &mc, &TruncationRule::default()).unwrap();
        assert_eq!(d.value, 0.5 + PI * PI / 8.0);
        let lm = p.marginal().log_moments(&QuadratureSpec::default()).unwrap();
        assert!((lm.var_half_log_sq - PI * PI / 8.0).abs() < 1e-12);
    }

    #[test]
    fn ar1_dispersion_matches_series_sum() {
        let mc = McConfig::new(400_000, 5).unwrap();
        let a: f64 = 0.6;
        let d = dispersion_sum(&FadingProcess::gauss_ar1(a).unwrap(), &mc, &TruncationRule::default()).unwrap();
        let exact = 0.5 + PI * PI / 8.0 + 2.0 * (1..200).map(|k| series_oracle(a.powi(k))).sum::<f64>();
        assert!((d.value - exact).abs() < 4.0 * d.std_err + 2e-3, "{} vs {exact} ± {}", d.value, d.std_err);
    }

    #[test]
    fn arma_correlations() {
        let f = ArmaFilter::new(vec![0.5], vec![]).unwrap();
        for k in 0..6 {
            assert!((f.correlation(k) - 0.5f64.powi(k as i32)).abs() < 1e-14);
        }
        // MA(1): ρ(1) = θ/(1+θ²), zero beyond
        let g = ArmaFilter::new(vec![], vec![0.5]).unwrap();
        assert!((g.correlation(1) - 0.4).abs() < 1e-15);
        assert_eq!(g.correlation(2), 0.0);
    }

    #[test]
    fn arma_stability() {
        assert!(ar_is_stable(&[0.5, 0.3]));
        assert!(ar_is_stable(&[1.5, -0.56])); // roots 0.7, 0.8
        assert!(!ar_is_stable(&[1.5, -0.5])); // root at 1
        assert!(!ar_is_stable(&[0.5, 0.6]));
        assert!(FadingProcess::gauss_arma(vec![1.2], vec![]).is_err());
        assert!(FadingProcess::gauss_ar1(1.0).is_err());
    }

    #[test]
    fn nonconvergence_reports_partial_sum() {
        let mc = McConfig::new(20_000, 9).unwrap();
        let rule = TruncationRule {
            max_lag: 3,
            ..TruncationRule::default()
        };
        let err = dispersion_sum(&FadingProcess::gauss_ar1(0.95).unwrap(), &mc, &rule).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { max_lag: 3, partial } if partial > 1.7));
    }
}
