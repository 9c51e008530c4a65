//! Closed-form capacity, dispersion and finite-blocklength NLD for scalar
//! fading channels.
//!
//! Real-channel quantities are per real dimension; complex-channel
//! quantities are per complex dimension (one channel use). Multiply real
//! NLDs by 2 to compare.

use crate::error::{domain, Result};
use crate::fading::model::check_positive;
use crate::fading::{dispersion_sum, FadingModel, FadingProcess, TruncationRule};
use crate::monte_carlo::engine::McConfig;
use crate::numeric::quadrature::QuadratureSpec;
use crate::numeric::special::q_inverse;
use serde::Serialize;
use std::f64::consts::{E, PI};

/// dB per nat for real NLD gaps, 20·log₁₀(e).
pub const DB_PER_NAT_REAL: f64 = 8.685_889_638_065_037;
/// dB per nat for per-complex-dimension gaps, 10·log₁₀(e).
pub const DB_PER_NAT_COMPLEX: f64 = 4.342_944_819_032_518;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelDomain {
    RealScalar,
    ComplexScalar,
    MimoFdt,
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersionResult {
    pub delta_star: f64,
    pub v: f64,
    /// Monte Carlo standard error of `v`, zero for closed forms.
    pub v_std_err: f64,
    pub domain: ChannelDomain,
    pub sigma2: f64,
}

impl DispersionResult {
    pub fn closed_form(delta_star: f64, v: f64, domain: ChannelDomain, sigma2: f64) -> Self {
        Self {
            delta_star,
            v,
            v_std_err: 0.0,
            domain,
            sigma2,
        }
    }
}

/// Normal approximation δ* − √(V/n)·Q⁻¹(ε). The O(ln n / n) remainder is
/// not included and has no known constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiniteBlocklengthPoint {
    pub n: u64,
    pub eps: f64,
    pub nld: f64,
    pub remainder_unquantified: bool,
}

impl FiniteBlocklengthPoint {
    /// NLD with the conjectured ML-decoding term ln(n)/(2n) added; a
    /// reporting column only.
    pub fn with_ml_refinement(&self) -> f64 {
        let n = self.n as f64;
        self.nld + n.ln() / (2.0 * n)
    }
}

pub fn capacity_dispersion_real(model: &FadingModel, sigma2: f64) -> Result<DispersionResult> {
    check_positive("capacity_dispersion_real", sigma2)?;
    let lm = model.log_moments(&QuadratureSpec::default())?;
    Ok(DispersionResult::closed_form(
        lm.mean_half_log_sq - 0.5 * (2.0 * PI * E * sigma2).ln(),
        0.5 + lm.var_half_log_sq,
        ChannelDomain::RealScalar,
        sigma2,
    ))
}

/// `model` is the law of |H|; `sigma2` is the total complex noise variance.
pub fn capacity_dispersion_complex(model: &FadingModel, sigma2: f64) -> Result<DispersionResult> {
    check_positive("capacity_dispersion_complex", sigma2)?;
    let lm = model.log_moments(&QuadratureSpec::default())?;
    Ok(DispersionResult::closed_form(
        2.0 * lm.mean_half_log_sq - (PI * E * sigma2).ln(),
        1.0 + 4.0 * lm.var_half_log_sq,
        ChannelDomain::ComplexScalar,
        sigma2,
    ))
}

pub fn achievable_nld(dr: &DispersionResult, n: u64, eps: f64) -> Result<FiniteBlocklengthPoint> {
    if n == 0 {
        return Err(domain("achievable_nld", "block length must be positive"));
    }
    let q = q_inverse(eps)?;
    Ok(FiniteBlocklengthPoint {
        n,
        eps,
        nld: dr.delta_star - (dr.v / n as f64).sqrt() * q,
        remainder_unquantified: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VnrResult {
    /// 1 + √((2 + Var(ln H²))/n)·Q⁻¹(ε).
    pub mu: f64,
    /// e^{2(δ* − δ*(n,ε))}, equal to `mu` to first order.
    pub mu_exact: f64,
}

pub fn vnr_optimal(model: &FadingModel, n: u64, eps: f64) -> Result<VnrResult> {
    let dr = capacity_dispersion_real(model, 1.0)?;
    let point = achievable_nld(&dr, n, eps)?;
    let q = q_inverse(eps)?;
    Ok(VnrResult {
        mu: 1.0 + (4.0 * dr.v / n as f64).sqrt() * q,
        mu_exact: (2.0 * (dr.delta_star - point.nld)).exp(),
    })
}

/// Loss against AWGN at equal σ², in nats per real dimension and in dB.
pub fn awgn_gap(model: &FadingModel) -> Result<(f64, f64)> {
    let lm = model.log_moments(&QuadratureSpec::default())?;
    let nats = -lm.mean_half_log_sq;
    Ok((nats, DB_PER_NAT_REAL * nats))
}

/// Dispersion with input power constraint:
/// Var(½ln(1+snr·H²)) + ½(1 − E²{1/(1+snr·H²)}).
pub fn power_constrained_dispersion(model: &FadingModel, snr: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_positive("power_constrained_dispersion", snr)?;
    let ln_snr = snr.ln();
    // ½ln(1+snr·e^{2v}) without overflow
    let c = |v: f64| {
        let t = ln_snr + 2.0 * v;
        0.5 * if t > 0.0 { t + (-t).exp().ln_1p() } else { t.exp().ln_1p() }
    };
    let inv = |v: f64| 1.0 / (1.0 + (ln_snr + 2.0 * v).exp());
    let knee = [-0.5 * ln_snr];
    let mean = model.expect_log(c, spec, &knee)?;
    let var = model.expect_log(|v| (c(v) - mean).powi(2), spec, &knee)?;
    let m_inv = model.expect_log(inv, spec, &knee)?;
    Ok(var + 0.5 * (1.0 - m_inv * m_inv))
}

/// Dispersion of a stationary process with memory. Capacity depends only
/// on the marginal law.
pub fn memory_dispersion(process: &FadingProcess, sigma2: f64, mc: &McConfig) -> Result<DispersionResult> {
    memory_dispersion_with(process, sigma2, mc, &TruncationRule::default())
}

pub fn memory_dispersion_with(
    process: &FadingProcess,
    sigma2: f64,
    mc: &McConfig,
    rule: &TruncationRule,
) -> Result<DispersionResult> {
    let marginal = capacity_dispersion_real(&process.marginal(), sigma2)?;
    let sum = dispersion_sum(process, mc, rule)?;
    Ok(DispersionResult {
        v: sum.value,
        v_std_err: sum.std_err,
        ..marginal
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::special::{digamma, trigamma, EULER_GAMMA};
    use proptest::prelude::*;

    const RAYLEIGH_DELTA: f64 = -1.707_546_365_655_439;
    const RAYLEIGH_DELTA_C: f64 = -2.721_945_550_750_933;

    fn rayleigh() -> FadingModel {
        FadingModel::rayleigh()
    }

    #[test]
    fn awgn_real_and_complex() {
        for s2 in [0.1, 1.0, 3.0] {
            let r = capacity_dispersion_real(&FadingModel::Awgn, s2).unwrap();
            assert!((r.delta_star - 0.5 * (1.0 / (2.0 * PI * E * s2)).ln()).abs() < 1e-15);
            assert_eq!(r.v, 0.5);
            let c = capacity_dispersion_complex(&FadingModel::Awgn, s2).unwrap();
            assert!((c.delta_star - (1.0 / (PI * E * s2)).ln()).abs() < 1e-15);
            assert_eq!(c.v, 1.0);
        }
        assert!(capacity_dispersion_real(&FadingModel::Awgn, 0.0).is_err());
    }

    #[test]
    fn rayleigh_values() {
        let r = capacity_dispersion_real(&rayleigh(), 1.0).unwrap();
        assert!((r.v - 0.911_233_516_712_056_6).abs() < 1e-12);
        assert!((r.delta_star - RAYLEIGH_DELTA).abs() < 1e-12);
        let c = capacity_dispersion_complex(&rayleigh(), 1.0).unwrap();
        assert!((c.v - (1.0 + PI * PI / 6.0)).abs() < 1e-12);
        assert!((c.delta_star - RAYLEIGH_DELTA_C).abs() < 1e-12);
        assert!((c.delta_star + EULER_GAMMA + (PI * E).ln()).abs() < 1e-12);
    }

    #[test]
    fn normal_approximation() {
        let r = capacity_dispersion_real(&rayleigh(), 1.0).unwrap();
        assert_eq!(achievable_nld(&r, 50, 0.5).unwrap().nld, r.delta_star);
        let p = achievable_nld(&r, 100, 1e-5).unwrap();
        assert!((p.nld - (-2.114_660_5)).abs() < 1e-5, "{}", p.nld);
        assert!(p.remainder_unquantified);
        assert!((achievable_nld(&r, 100_000_000, 1e-5).unwrap().nld - r.delta_star).abs() < 1e-3);
        assert!(achievable_nld(&r, 0, 0.1).is_err());
        assert!(achievable_nld(&r, 10, 1.0).is_err());
        let ml = p.with_ml_refinement();
        assert!((ml - p.nld - 100f64.ln() / 200.0).abs() < 1e-15);
    }

    #[test]
    fn vnr() {
        assert_eq!(vnr_optimal(&rayleigh(), 100, 0.5).unwrap().mu, 1.0);
        let a = vnr_optimal(&FadingModel::Awgn, 100, 1e-5).unwrap();
        assert!((a.mu - 1.603_152).abs() < 1e-5, "{}", a.mu);
        let r = vnr_optimal(&rayleigh(), 100, 1e-5).unwrap();
        assert!((r.mu - 1.814_241).abs() < 1e-5, "{}", r.mu);
        // first-order agreement, difference is O(1/n)
        let big = vnr_optimal(&rayleigh(), 1_000_000, 1e-3).unwrap();
        assert!((big.mu - big.mu_exact).abs() < 5e-5);
    }

    #[test]
    fn gaps() {
        let (nats, db) = awgn_gap(&rayleigh()).unwrap();
        assert!((nats - 0.288_607_832_450_766_4).abs() < 1e-12);
        assert!((db - 2.506_8).abs() < 1e-3);
        assert_eq!(awgn_gap(&FadingModel::Awgn).unwrap(), (0.0, 0.0));
        let (g4, _) = awgn_gap(&FadingModel::nakagami(4.0).unwrap()).unwrap();
        assert!(g4 < nats && (g4 + (digamma(4.0).unwrap() - 4f64.ln()) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn power_constrained() {
        let spec = QuadratureSpec::default();
        assert!(power_constrained_dispersion(&rayleigh(), 1e-9, &spec).unwrap().abs() < 1e-8);
        for p in [0.1, 1.0, 10.0] {
            let v = power_constrained_dispersion(&FadingModel::Awgn, p, &spec).unwrap();
            assert!((v - p * (p + 2.0) / (2.0 * (p + 1.0).powi(2))).abs() < 1e-15);
        }
        let hi = power_constrained_dispersion(&rayleigh(), 1e6, &spec).unwrap();
        assert!((hi / 0.911_233_5 - 1.0).abs() < 0.01, "{hi}");
        let lo = power_constrained_dispersion(&rayleigh(), 1e-2, &spec).unwrap();
        assert!(lo > 0.0 && lo < hi);
    }

    #[test]
    fn memory_reduces_to_iid() {
        let mc = McConfig::new(1000, 1).unwrap();
        let m = memory_dispersion(&FadingProcess::Iid(rayleigh()), 1.0, &mc).unwrap();
        let r = capacity_dispersion_real(&rayleigh(), 1.0).unwrap();
        assert_eq!((m.delta_star, m.v), (r.delta_star, r.v));
        let g = memory_dispersion(&FadingProcess::gauss_ar1(0.0).unwrap(), 1.0, &mc).unwrap();
        let half = capacity_dispersion_real(&FadingModel::nakagami(0.5).unwrap(), 1.0).unwrap();
        assert!((g.v - half.v).abs() < 1e-12 && g.delta_star == half.delta_star);
    }

    #[test]
    fn nakagami_dispersion_decreasing() {
        let ms = [0.5, 1.0, 2.0, 4.0, 8.0, 16.0];
        let vs: Vec<f64> = ms.iter().map(|&m| trigamma(m).unwrap() / 4.0).collect();
        assert!(vs.windows(2).all(|w| w[1] < w[0]));
        assert!(vs[5] < 0.02);
    }

    proptest! {
        #[test]
        fn dispersion_at_least_awgn(m in 0.5f64..50.0, s2 in 1e-3f64..1e3) {
            let model = FadingModel::nakagami(m).unwrap();
            let r = capacity_dispersion_real(&model, s2).unwrap();
            let c = capacity_dispersion_complex(&model, s2).unwrap();
            prop_assert!(r.v >= 0.5 && c.v >= 1.0);
            let awgn = capacity_dispersion_real(&FadingModel::Awgn, s2).unwrap();
            prop_assert!(r.delta_star <= awgn.delta_star);
        }

        #[test]
        fn nld_monotone(n in 1u64..100_000, eps in 1e-9f64..0.49) {
            let r = capacity_dispersion_real(&rayleigh(), 1.0).unwrap();
            let a = achievable_nld(&r, n, eps).unwrap().nld;
            prop_assert!(achievable_nld(&r, n + 1, eps).unwrap().nld > a);
            prop_assert!(achievable_nld(&r, n, eps * 1.01).unwrap().nld > a);
            prop_assert!(vnr_optimal(&rayleigh(), n, eps).unwrap().mu > 1.0);
        }
    }
}
