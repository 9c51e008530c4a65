//! Sphere-packing converse: the probability that the noise leaves a ball
//! whose volume equals the per-codeword Voronoi volume after fading.

use super::engine::{collect_samples, run_batches, McConfig, McEstimate, Moments};
use super::logdet::sample_ln_det;
use crate::error::{domain, Error, Result};
use crate::fading::model::check_positive;
use crate::fading::FadingModel;
use crate::mimo::MimoConfig;
use crate::numeric::roots::{find_root, BracketedRoot};
use crate::numeric::special::{ln_ball_volume, regularized_gamma_upper};
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::Serialize;

/// Channel for the sphere-packing bound. NLD units: nats per real dimension
/// (real scalar), per complex dimension (complex scalar), per channel use
/// (MIMO).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SpChannel {
    RealScalar(FadingModel),
    /// Fading law of |H|; σ² is the total complex noise variance.
    ComplexScalar(FadingModel),
    Mimo { t: u32, r: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpEstimator {
    /// Average of 1{‖z‖² ≥ T(H)} over joint draws of fading and noise.
    Indicator,
    /// Average of Pr{‖z‖² ≥ T(H) | H}, the exact chi-square tail.
    Conditional,
}

// ‖z‖²/scale ~ Gamma(shape, 1) and ln T = −δ·delta_coef + (S − ln V_D)·det_coef
#[derive(Debug, Clone, Copy)]
struct Geometry {
    shape: f64,
    scale: f64,
    delta_coef: f64,
    det_coef: f64,
    ln_ball: f64,
}

impl SpChannel {
    fn validate(&self) -> Result<()> {
        match self {
            SpChannel::Mimo { t, r } => MimoConfig::new(*t, *r, 1.0).map(|_| ()),
            _ => Ok(()),
        }
    }

    fn geometry(&self, n: u64, sigma2: f64) -> Result<Geometry> {
        let nf = n as f64;
        Ok(match self {
            SpChannel::RealScalar(_) => Geometry {
                shape: nf / 2.0,
                scale: 2.0 * sigma2,
                delta_coef: 2.0,
                det_coef: 2.0 / nf,
                ln_ball: ln_ball_volume(n)?,
            },
            SpChannel::ComplexScalar(_) => Geometry {
                shape: nf,
                scale: sigma2,
                delta_coef: 1.0,
                det_coef: 1.0 / nf,
                ln_ball: ln_ball_volume(2 * n)?,
            },
            SpChannel::Mimo { t, .. } => {
                let tf = *t as f64;
                Geometry {
                    shape: nf * tf,
                    scale: sigma2,
                    delta_coef: 1.0 / tf,
                    det_coef: 1.0 / (nf * tf),
                    ln_ball: ln_ball_volume(2 * n * *t as u64)?,
                }
            }
        })
    }

    /// ln det of the n-block channel: Σ ln h (real), Σ ln|h|² (complex),
    /// Σ ln det(H†H) (MIMO).
    fn sample_ln_det<R: Rng + ?Sized>(&self, n: u64, rng: &mut R) -> f64 {
        match self {
            SpChannel::RealScalar(m) => (0..n).map(|_| m.sample_h(rng).ln()).sum(),
            SpChannel::ComplexScalar(m) => (0..n).map(|_| 2.0 * m.sample_h(rng).ln()).sum(),
            SpChannel::Mimo { t, r } => (0..n).map(|_| sample_ln_det(*t as usize, *r as usize, rng)).sum(),
        }
    }

    fn is_awgn(&self) -> bool {
        matches!(self, SpChannel::RealScalar(FadingModel::Awgn) | SpChannel::ComplexScalar(FadingModel::Awgn))
    }
}

impl Geometry {
    fn ln_threshold(&self, delta: f64, ln_det: f64) -> f64 {
        -delta * self.delta_coef + (ln_det - self.ln_ball) * self.det_coef
    }

    fn tail(&self, delta: f64, ln_det: f64) -> f64 {
        let x = self.ln_threshold(delta, ln_det).exp() / self.scale;
        if x == f64::INFINITY {
            return 0.0;
        }
        regularized_gamma_upper(self.shape, x).unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpResult {
    /// Lower bound on the error probability, clamped to [0, 1].
    pub estimate: McEstimate,
    /// Exact chi-square tail for unfaded channels.
    pub analytic: Option<f64>,
}

pub fn sphere_packing_bound(channel: &SpChannel, n: u64, delta: f64, sigma2: f64, mc: &McConfig) -> Result<SpResult> {
    sphere_packing_bound_with(channel, n, delta, sigma2, mc, SpEstimator::Indicator)
}

pub fn sphere_packing_bound_with(
    channel: &SpChannel,
    n: u64,
    delta: f64,
    sigma2: f64,
    mc: &McConfig,
    estimator: SpEstimator,
) -> Result<SpResult> {
    if n == 0 {
        return Err(domain("sphere_packing_bound", "n must be positive"));
    }
    if delta.is_nan() {
        return Err(domain("sphere_packing_bound", "δ is NaN"));
    }
    check_positive("sphere_packing_bound", sigma2)?;
    channel.validate()?;
    mc.validate()?;
    let geo = channel.geometry(n, sigma2)?;
    let gamma = Gamma::new(geo.shape, 1.0).map_err(|e| domain("sphere_packing_bound", e.to_string()))?;
    let batches = run_batches(mc, |rng, len, _| {
        let mut m = Moments::default();
        for _ in 0..len {
            let ln_det = channel.sample_ln_det(n, rng);
            let v = match estimator {
                SpEstimator::Indicator => {
                    let norm = gamma.sample(rng) * geo.scale;
                    f64::from(norm.ln() >= geo.ln_threshold(delta, ln_det))
                }
                SpEstimator::Conditional => geo.tail(delta, ln_det),
            };
            m.push(v);
        }
        m
    });
    let estimate = McEstimate::from_batches(&batches, mc.z()).clamp_probability();
    if estimate.mean.is_nan() {
        return Err(Error::Accuracy {
            func: "sphere_packing_bound",
            estimate: f64::NAN,
            error: f64::NAN,
        });
    }
    let analytic = if channel.is_awgn() {
        let exact = geo.tail(delta, 0.0);
        // rule-of-three slack covers estimates with zero sample variance
        let slack = 4.0 * estimate.std_err + 3.0 / estimate.n_effective as f64;
        if (estimate.mean - exact).abs() > slack {
            return Err(Error::Accuracy {
                func: "sphere_packing_bound",
                estimate: estimate.mean,
                error: (estimate.mean - exact).abs(),
            });
        }
        Some(exact)
    } else {
        None
    };
    Ok(SpResult { estimate, analytic })
}

/// Largest NLD whose sphere-packing bound is at most ε: any constellation
/// with error probability ε has NLD below this value. Uses the conditional
/// estimator on one fixed set of fading draws so the estimate is monotone
/// in δ, then bisects to 1e-4 nats.
pub fn sp_converse_nld(channel: &SpChannel, n: u64, eps: f64, sigma2: f64, mc: &McConfig) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(domain("sp_converse_nld", format!("ε = {eps} must lie in (0, 1)")));
    }
    if n == 0 {
        return Err(domain("sp_converse_nld", "n must be positive"));
    }
    check_positive("sp_converse_nld", sigma2)?;
    channel.validate()?;
    mc.validate()?;
    let geo = channel.geometry(n, sigma2)?;
    let dets = collect_samples(mc, |rng| channel.sample_ln_det(n, rng));
    let mean_det = dets.iter().sum::<f64>() / dets.len() as f64;
    let prob = |delta: f64| dets.iter().map(|&d| geo.tail(delta, d)).sum::<f64>() / dets.len() as f64;
    // δ at which the threshold equals the mean noise energy
    let center = ((mean_det - geo.ln_ball) * geo.det_coef - (geo.shape * geo.scale).ln()) / geo.delta_coef;
    let mut lo = center - 1.0;
    let mut hi = center + 1.0;
    let mut width = 1.0;
    while prob(lo) > eps {
        width *= 2.0;
        lo = center - width;
        if width > 1e3 {
            return Err(domain("sp_converse_nld", "could not bracket ε from below"));
        }
    }
    width = 1.0;
    while prob(hi) < eps {
        width *= 2.0;
        hi = center + width;
        if width > 1e3 {
            return Err(domain("sp_converse_nld", "could not bracket ε from above"));
        }
    }
    find_root(|d| prob(d) - eps, &BracketedRoot::new(lo, hi, 1e-4)?)
}
