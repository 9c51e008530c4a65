//! Typicality-decoder upper bound for lattices over fading:
//! P_e ≤ Pr{‖z‖ > r} + E{(r / r_eff(H))ⁿ}, where V_n·r_effⁿ(H) = e^{−nδ}·det H.

use super::engine::{estimate_mean, McConfig, McEstimate};
use crate::error::{domain, Result};
use crate::fading::model::check_positive;
use crate::fading::FadingModel;
use crate::numeric::special::{ln_ball_volume, regularized_gamma_upper};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypicalityBound {
    /// Pr{‖z‖ > r} averaged over the radius choice.
    pub noise_term: McEstimate,
    /// E{(r / r_eff(H))ⁿ}.
    pub lattice_term: McEstimate,
    pub total: McEstimate,
}

fn check_args(n: u64, sigma2: f64, mc: &McConfig) -> Result<()> {
    if n == 0 {
        return Err(domain("lattice_typicality_bound", "n must be positive"));
    }
    check_positive("lattice_typicality_bound", sigma2)?;
    mc.validate()
}

fn sum_estimates(a: &McEstimate, b: &McEstimate, z: f64) -> McEstimate {
    let se = (a.std_err * a.std_err + b.std_err * b.std_err).sqrt();
    McEstimate::from_value(a.mean + b.mean, se, a.n_effective.max(b.n_effective), z)
}

/// ln r_effⁿ(H) = −nδ + ln det H − ln V_n for one fading block.
fn ln_r_eff_n(model: &FadingModel, n: u64, delta: f64, ln_vn: f64, rng: &mut super::engine::McRng) -> f64 {
    let ln_det: f64 = (0..n).map(|_| model.sample_h(rng).ln()).sum();
    -(n as f64) * delta + ln_det - ln_vn
}

/// Bound with a fixed decoding radius.
pub fn lattice_typicality_bound(
    model: &FadingModel,
    n: u64,
    delta: f64,
    r_decode: f64,
    sigma2: f64,
    mc: &McConfig,
) -> Result<TypicalityBound> {
    check_args(n, sigma2, mc)?;
    if !(r_decode >= 0.0) {
        return Err(domain("lattice_typicality_bound", "radius must be nonnegative"));
    }
    let nf = n as f64;
    let noise = regularized_gamma_upper(nf / 2.0, r_decode * r_decode / (2.0 * sigma2))?;
    let ln_vn = ln_ball_volume(n)?;
    let ln_rn = nf * r_decode.ln();
    let lattice = if matches!(model, FadingModel::Awgn) {
        McEstimate::exact((ln_rn + nf * delta + ln_vn).exp())
    } else {
        estimate_mean(mc, |rng| (ln_rn - ln_r_eff_n(model, n, delta, ln_vn, rng)).exp())
    };
    let noise_term = McEstimate::exact(noise);
    let total = sum_estimates(&noise_term, &lattice, mc.z());
    Ok(TypicalityBound {
        noise_term,
        lattice_term: lattice,
        total,
    })
}

/// Bound with the radius tuned per fading realization to
/// rⁿ = r_effⁿ(H)·ε/√n, which makes the lattice term exactly ε/√n.
pub fn lattice_typicality_bound_tuned(
    model: &FadingModel,
    n: u64,
    delta: f64,
    eps: f64,
    sigma2: f64,
    mc: &McConfig,
) -> Result<TypicalityBound> {
    check_args(n, sigma2, mc)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(domain("lattice_typicality_bound_tuned", format!("ε = {eps} must lie in (0, 1)")));
    }
    let nf = n as f64;
    let ln_vn = ln_ball_volume(n)?;
    let ln_tune = (eps / nf.sqrt()).ln();
    let noise_at = |ln_rn: f64| {
        let r2 = (2.0 * ln_rn / nf).exp();
        regularized_gamma_upper(nf / 2.0, r2 / (2.0 * sigma2)).unwrap_or(f64::NAN)
    };
    let noise_term = if matches!(model, FadingModel::Awgn) {
        McEstimate::exact(noise_at(-nf * delta - ln_vn + ln_tune))
    } else {
        estimate_mean(mc, |rng| noise_at(ln_r_eff_n(model, n, delta, ln_vn, rng) + ln_tune))
    };
    let lattice = McEstimate::exact(eps / nf.sqrt());
    let total = sum_estimates(&noise_term, &lattice, mc.z());
    Ok(TypicalityBound {
        noise_term,
        lattice_term: lattice,
        total,
    })
}
