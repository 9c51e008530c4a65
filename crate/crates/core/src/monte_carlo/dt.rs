//! Dependence-testing (DT) achievability for a uniform input on a cube of
//! side `a`, and the information-density moments behind the normal
//! approximation.

use super::engine::{collect_samples, run_batches, McConfig, McEstimate, McRng, Moments, SampleSummary};
use crate::error::{domain, Result};
use crate::fading::model::check_positive;
use crate::fading::FadingModel;
use crate::numeric::special::{ln_q_function, q_function, q_inverse};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use std::f64::consts::PI;

// ln Q below this underflows a direct evaluation of the output density
const UNDERFLOW_LN: f64 = -708.0;
/// Fraction of guarded samples above which results carry a warning.
pub const GUARD_WARN_FRACTION: f64 = 1e-3;
/// Berry–Esseen constant used in the reported budget.
pub const BERRY_ESSEEN_CONSTANT: f64 = 6.0;

/// ln[Q(u − w) − Q(u + w)] for w ≥ 0, and whether a direct evaluation
/// would have underflowed.
pub fn ln_window(u: f64, w: f64) -> (f64, bool) {
    let u = u.abs();
    if w < 1e-4 {
        // Taylor expansion of ∫_{u−w}^{u+w} φ
        let phi = -0.5 * u * u - 0.5 * (2.0 * PI).ln();
        let corr = (w * w * (u * u - 1.0) / 6.0).ln_1p();
        return ((2.0 * w).ln() + phi + corr, phi < UNDERFLOW_LN);
    }
    if u > w {
        let l1 = ln_q_function(u - w);
        let l2 = ln_q_function(u + w);
        (l1 + (-(l2 - l1).exp_m1()).ln(), l1 < UNDERFLOW_LN)
    } else {
        ((1.0 - q_function(w - u) - q_function(u + w)).ln(), false)
    }
}

/// Per-symbol information density of the uniform cube input:
/// ln(ah/σ) − ½ln 2π − z²/(2σ²) − ln[Q(y/σ − ah/2σ) − Q(y/σ + ah/2σ)].
pub fn info_density(h: f64, x: f64, z: f64, a: f64, sigma: f64) -> (f64, bool) {
    let y = h * x + z;
    let (ln_d, guarded) = ln_window(y / sigma, a * h / (2.0 * sigma));
    let zs = z / sigma;
    ((a * h / sigma).ln() - 0.5 * (2.0 * PI).ln() - 0.5 * zs * zs - ln_d, guarded)
}

fn sample_info_density(model: &FadingModel, a: f64, sigma: f64, rng: &mut McRng) -> (f64, bool) {
    let h = model.sample_h(rng);
    let x = a * (rng.random::<f64>() - 0.5);
    let z: f64 = rng.sample::<f64, _>(StandardNormal) * sigma;
    info_density(h, x, z, a, sigma)
}

/// e^{−[i − ln γ]⁺}, the DT integrand.
pub fn dt_kernel(i: f64, ln_gamma: f64) -> f64 {
    (-(i - ln_gamma).max(0.0)).exp()
}

/// The same quantity written as Pr{i ≤ ln γ} + γ·E{e^{−i}·1{i > ln γ}}
/// for one realization.
pub fn dt_kernel_split(i: f64, ln_gamma: f64) -> f64 {
    if i <= ln_gamma {
        1.0
    } else {
        (ln_gamma - i).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DtResult {
    /// Upper bound on the error probability.
    pub estimate: McEstimate,
    /// Fraction of symbols whose output density needed the log-domain guard.
    pub guard_fraction: f64,
    pub accuracy_warning: Option<String>,
}

/// E{e^{−[i(xⁿ; yⁿ, hⁿ) − ln((M−1)/2)]⁺}} for M = e^{ln_m} codewords
/// drawn uniformly from the cube [−a/2, a/2]ⁿ.
pub fn dt_bound(model: &FadingModel, n: u64, cube_a: f64, ln_m: f64, sigma2: f64, mc: &McConfig) -> Result<DtResult> {
    if n == 0 {
        return Err(domain("dt_bound", "n must be positive"));
    }
    if !(ln_m >= std::f64::consts::LN_2) {
        return Err(domain("dt_bound", format!("need M ≥ 2, got ln M = {ln_m}")));
    }
    check_positive("dt_bound", cube_a)?;
    check_positive("dt_bound", sigma2)?;
    mc.validate()?;
    let sigma = sigma2.sqrt();
    // ln((M − 1)/2)
    let ln_gamma = ln_m + (-(-ln_m).exp()).ln_1p() - std::f64::consts::LN_2;
    let batches = run_batches(mc, |rng, len, _| {
        let mut m = Moments::default();
        let mut guarded = 0u64;
        for _ in 0..len {
            let mut i = 0.0;
            for _ in 0..n {
                let (di, g) = sample_info_density(model, cube_a, sigma, rng);
                i += di;
                guarded += u64::from(g);
            }
            m.push(dt_kernel(i, ln_gamma));
        }
        (m, guarded)
    });
    let guarded: u64 = batches.iter().map(|b| b.1).sum();
    let moments: Vec<Moments> = batches.into_iter().map(|b| b.0).collect();
    let estimate = McEstimate::from_batches(&moments, mc.z()).clamp_probability();
    let guard_fraction = guarded as f64 / (mc.samples as f64 * n as f64);
    let accuracy_warning = (guard_fraction > GUARD_WARN_FRACTION).then(|| {
        format!("{:.3}% of symbols hit the output-density underflow guard", 100.0 * guard_fraction)
    });
    Ok(DtResult {
        estimate,
        guard_fraction,
        accuracy_warning,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfoDensityMoments {
    /// I(X; Y, H).
    pub mean: McEstimate,
    pub var: McEstimate,
    /// E|i − I|³.
    pub rho3: McEstimate,
}

pub fn info_density_moments(model: &FadingModel, cube_a: f64, sigma2: f64, mc: &McConfig) -> Result<InfoDensityMoments> {
    check_positive("info_density_moments", cube_a)?;
    check_positive("info_density_moments", sigma2)?;
    mc.validate()?;
    let sigma = sigma2.sqrt();
    let xs = collect_samples(mc, |rng| sample_info_density(model, cube_a, sigma, rng).0);
    let s = SampleSummary::from_slice(&xs);
    let cubes: Vec<f64> = xs.iter().map(|x| (x - s.mean).abs().powi(3)).collect();
    Ok(InfoDensityMoments {
        mean: s.mean_estimate(mc.z()),
        var: s.variance_estimate(mc.z()),
        rho3: SampleSummary::from_slice(&cubes).mean_estimate(mc.z()),
    })
}

/// Cube side for the DT normal approximation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CubeRule {
    /// a = σ·n^{2+2/α}, with α from the fading regularity (1 for AWGN).
    PowerLaw,
    Fixed(f64),
}

impl CubeRule {
    pub fn side(&self, model: &FadingModel, n: u64, sigma2: f64) -> Result<(f64, Option<f64>)> {
        match *self {
            CubeRule::Fixed(a) => {
                check_positive("CubeRule::Fixed", a)?;
                Ok((a, None))
            }
            CubeRule::PowerLaw => {
                let report = model.regularity_exponent();
                let alpha = match (report.alpha, report.is_regular) {
                    (Some(a), _) => a,
                    (None, true) => 1.0,
                    (None, false) => {
                        return Err(crate::Error::InvalidModel(
                            "fading law is not regular; pass an explicit cube side".into(),
                        ))
                    }
                };
                Ok((sigma2.sqrt() * (n as f64).powf(2.0 + 2.0 / alpha), Some(alpha)))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DtNld {
    pub nld: f64,
    pub cube_a: f64,
    pub alpha: Option<f64>,
    pub moments: InfoDensityMoments,
    /// 6ρ₃/Var^{3/2}; the normal approximation error is at most this over √n.
    pub berry_esseen_b: f64,
}

/// I(X; Y, H) − ln a − √(Var(i)/n)·Q⁻¹(ε) with Monte Carlo moments.
pub fn dt_achievable_nld(
    model: &FadingModel,
    n: u64,
    eps: f64,
    sigma2: f64,
    rule: CubeRule,
    mc: &McConfig,
) -> Result<DtNld> {
    if n == 0 {
        return Err(domain("dt_achievable_nld", "n must be positive"));
    }
    let q = q_inverse(eps)?;
    let (cube_a, alpha) = rule.side(model, n, sigma2)?;
    let moments = info_density_moments(model, cube_a, sigma2, mc)?;
    let var = moments.var.mean;
    let nld = moments.mean.mean - cube_a.ln() - (var / n as f64).sqrt() * q;
    let berry_esseen_b = if var > 0.0 {
        BERRY_ESSEEN_CONSTANT * moments.rho3.mean / var.powf(1.5)
    } else {
        f64::INFINITY
    };
    Ok(DtNld {
        nld,
        cube_a,
        alpha,
        moments,
        berry_esseen_b,
    })
}

/// Output density f(y | h) of the cube input; exposed for diagnostics.
pub fn output_density(y: f64, h: f64, a: f64, sigma: f64) -> f64 {
    let (ln_d, _) = ln_window(y / sigma, a * h / (2.0 * sigma));
    (ln_d - (a * h).ln()).exp()
}
