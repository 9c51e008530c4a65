//! Normalized log-chi-square density and its distance from the standard
//! normal.
//!
//! If X ~ χ²ₙ then Yₙ = √(n/2)·ln(X/n) has density
//! f(y) = ((n/2)^{(n−1)/2}/Γ(n/2))·exp(√(n/2)·y − (n/2)·e^{√(2/n)·y}).

use crate::error::{domain, Result};
use crate::numeric::quadrature::{integrate, integrate_breakpoints, Domain, QuadratureSpec};
use crate::numeric::roots::{find_root, maximize_unimodal, BracketedRoot};
use crate::numeric::special::{normal_pdf, stirling_correction};
use serde::Serialize;
use std::f64::consts::PI;

// e^x − 1 − x without cancellation
fn exp_excess(x: f64) -> f64 {
    if x.abs() < 0.1 {
        let mut term = x * x / 2.0;
        let mut s = term;
        for k in 3..14 {
            term *= x / k as f64;
            s += term;
        }
        s
    } else {
        x.exp_m1() - x
    }
}

fn check_n(n: f64) -> Result<()> {
    if n >= 2.0 && n.is_finite() {
        Ok(())
    } else {
        Err(domain("log_chi2", format!("n = {n} must be at least 2")))
    }
}

// ln f(y) + ½ln 2π, written so that large n does not cancel
fn ln_density_shifted(y: f64, k: f64, corr: f64) -> f64 {
    let s = k.sqrt();
    -corr - k * exp_excess(y / s)
}

pub fn log_chi2_density(y: f64, n: f64) -> Result<f64> {
    check_n(n)?;
    let k = n / 2.0;
    let corr = stirling_correction(k)?;
    Ok((ln_density_shifted(y, k, corr) - 0.5 * (2.0 * PI).ln()).exp())
}

/// e_n(y) = f_{Yₙ}(y) − φ(y).
pub fn log_chi2_error(y: f64, n: f64) -> Result<f64> {
    check_n(n)?;
    let k = n / 2.0;
    let corr = stirling_correction(k)?;
    Ok(error_at(y, k, corr))
}

fn error_at(y: f64, k: f64, corr: f64) -> f64 {
    let phi = normal_pdf(y);
    let rel = ln_density_shifted(y, k, corr) + 0.5 * y * y;
    if rel < 700.0 {
        phi * rel.exp_m1()
    } else {
        (ln_density_shifted(y, k, corr) - 0.5 * (2.0 * PI).ln()).exp() - phi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakError {
    pub y: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogChi2Error {
    pub n: f64,
    /// ∫|f_{Yₙ} − φ|.
    pub tv: f64,
    /// 2/(3√(πn)).
    pub approx: f64,
    /// Extremes of e_n on the negative and positive half-lines.
    pub peaks: [PeakError; 2],
}

const SCAN_LO: f64 = -60.0;
const SCAN_HI: f64 = 30.0;

pub fn log_chi2_tv_error(n: f64) -> Result<LogChi2Error> {
    check_n(n)?;
    let k = n / 2.0;
    let corr = stirling_correction(k)?;
    let e = |y: f64| error_at(y, k, corr);
    let spec = QuadratureSpec::adaptive(1e-15, 1e-10);
    let mut points = vec![SCAN_LO];
    let steps = 9000;
    let h = (SCAN_HI - SCAN_LO) / steps as f64;
    let mut prev = e(SCAN_LO);
    for i in 1..=steps {
        let y = SCAN_LO + i as f64 * h;
        let cur = e(y);
        if prev.signum() != cur.signum() && prev != 0.0 && cur != 0.0 {
            points.push(find_root(e, &BracketedRoot::new(y - h, y, 1e-13)?)?);
        }
        prev = cur;
    }
    points.push(SCAN_HI);
    let abs_e = |y: f64| e(y).abs();
    let mut tv = integrate_breakpoints(abs_e, &spec, &points)?;
    tv += integrate(abs_e, &spec, Domain::LowerHalfLine(SCAN_LO))?;
    tv += integrate(abs_e, &spec, Domain::UpperHalfLine(SCAN_HI))?;
    let peak = |lo: f64, hi: f64| -> Result<PeakError> {
        let (y, _) = maximize_unimodal(abs_e, lo, hi, 1e-9)?;
        Ok(PeakError { y, value: e(y) })
    };
    Ok(LogChi2Error {
        n,
        tv,
        approx: 2.0 / (3.0 * (PI * n).sqrt()),
        peaks: [peak(-3.5, -0.8)?, peak(0.8, 3.5)?],
    })
}

/// Leading-order error −y³φ(y)/(3√(2n)).
pub fn log_chi2_error_approx(y: f64, n: f64) -> f64 {
    -y.powi(3) * normal_pdf(y) / (3.0 * (2.0 * n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_normalized() {
        let spec = QuadratureSpec::adaptive(1e-15, 1e-12);
        for n in [2.0, 10.0, 100.0, 1e4] {
            let f = |y: f64| log_chi2_density(y, n).unwrap();
            let total = integrate(f, &spec, Domain::LowerHalfLine(0.0)).unwrap()
                + integrate(f, &spec, Domain::UpperHalfLine(0.0)).unwrap();
            assert!((total - 1.0).abs() < 1e-8, "n = {n}: {total}");
        }
    }

    #[test]
    fn tv_matches_frozen_quadrature() {
        // mpmath values of ∫|f − φ|
        for (n, want) in [(2.0, 0.300_297_0), (10.0, 0.124_873_5), (100.0, 0.038_022_58), (1e4, 0.003_763_175)] {
            let r = log_chi2_tv_error(n).unwrap();
            assert!((r.tv / want - 1.0).abs() < 1e-5, "n = {n}: {}", r.tv);
        }
        let r = log_chi2_tv_error(1e4).unwrap();
        assert!((r.tv / r.approx - 1.0).abs() < 0.05);
        let r = log_chi2_tv_error(100.0).unwrap();
        assert!((r.tv / r.approx - 1.0).abs() < 0.10);
        assert!(log_chi2_tv_error(1.0).is_err());
    }

    #[test]
    fn peaks_near_root_three() {
        let n = 1e4;
        let r = log_chi2_tv_error(n).unwrap();
        for p in r.peaks {
            assert!((p.y.abs() - 3f64.sqrt()).abs() < 0.05, "{p:?}");
            assert!((p.value.abs() * n.sqrt() / 0.1 - 1.0).abs() < 0.2, "{p:?}");
            assert!((p.value / log_chi2_error_approx(p.y, n) - 1.0).abs() < 0.05);
        }
        assert!(r.peaks[0].value > 0.0 && r.peaks[1].value < 0.0);
    }
}
