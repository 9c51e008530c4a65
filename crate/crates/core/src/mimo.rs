//! MIMO channels with fixed transmission dimension (FDT): i.i.d. CN(0, 1)
//! gains, t transmit and r ≥ t receive antennas. All quantities are per
//! channel use.

use crate::error::{domain, Error, Result};
use crate::fading::model::check_positive;
use crate::numeric::quadrature::{integrate, Domain, QuadratureSpec};
use crate::numeric::special::{digamma, laguerre_assoc, ln_gamma, trigamma, EULER_GAMMA};
use crate::scalar::{achievable_nld, ChannelDomain, DispersionResult, FiniteBlocklengthPoint, DB_PER_NAT_COMPLEX};
use serde::Serialize;
use std::f64::consts::{E, PI};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MimoConfig {
    pub t: u32,
    pub r: u32,
    /// Complex noise variance per receive dimension.
    pub sigma2: f64,
}

impl MimoConfig {
    pub fn new(t: u32, r: u32, sigma2: f64) -> Result<Self> {
        let cfg = Self { t, r, sigma2 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.t == 0 || self.r == 0 {
            return Err(Error::Constraint("antenna counts must be at least 1".into()));
        }
        if self.t > self.r {
            return Err(Error::Constraint(format!("t = {} exceeds r = {}; only t ≤ r is covered", self.t, self.r)));
        }
        check_positive("MimoConfig", self.sigma2)
    }

    fn with_t(&self, t: u32) -> Self {
        Self { t, ..*self }
    }
}

fn harmonic(from: u32, to: u32) -> f64 {
    (from.max(1)..=to).map(|p| 1.0 / p as f64).sum()
}

/// E{ln det(H†H)} for the t×r Gaussian matrix, by finite sums.
fn mean_log_det(t: u32, r: u32) -> f64 {
    let (tf, rf) = (t as f64, r as f64);
    -EULER_GAMMA * tf + 1.0 - tf + tf * harmonic(1, r - t) + rf * harmonic(r - t + 1, r - 1)
}

/// Var{ln det(H†H)} by finite sums.
fn var_log_det(t: u32, r: u32) -> f64 {
    let tf = t as f64;
    let sq: f64 = (1..=r - t).map(|p| 1.0 / (p as f64).powi(2)).sum();
    let tail: f64 = (r - t + 1..r).map(|p| (r - p) as f64 / (p as f64).powi(2)).sum();
    PI * PI * tf / 6.0 - tf * sq - tail
}

pub fn mimo_capacity_fdt(cfg: &MimoConfig) -> Result<f64> {
    cfg.validate()?;
    Ok(mean_log_det(cfg.t, cfg.r) - cfg.t as f64 * (PI * E * cfg.sigma2).ln())
}

pub fn mimo_dispersion_fdt(cfg: &MimoConfig) -> Result<f64> {
    cfg.validate()?;
    Ok(cfg.t as f64 + var_log_det(cfg.t, cfg.r))
}

/// Σᵢ ψ(r−i+1) − t·ln(πeσ²).
pub fn mimo_capacity_digamma(cfg: &MimoConfig) -> Result<f64> {
    cfg.validate()?;
    let mut s = 0.0;
    for i in 1..=cfg.t {
        s += digamma((cfg.r - i + 1) as f64)?;
    }
    Ok(s - cfg.t as f64 * (PI * E * cfg.sigma2).ln())
}

/// t + Σᵢ ψ'(r−i+1).
pub fn mimo_dispersion_trigamma(cfg: &MimoConfig) -> Result<f64> {
    cfg.validate()?;
    let mut s = cfg.t as f64;
    for i in 1..=cfg.t {
        s += trigamma((cfg.r - i + 1) as f64)?;
    }
    Ok(s)
}

pub fn mimo_dispersion_result(cfg: &MimoConfig) -> Result<DispersionResult> {
    Ok(DispersionResult::closed_form(
        mimo_capacity_fdt(cfg)?,
        mimo_dispersion_fdt(cfg)?,
        ChannelDomain::MimoFdt,
        cfg.sigma2,
    ))
}

pub fn mimo_achievable_nld(cfg: &MimoConfig, n: u64, eps: f64) -> Result<FiniteBlocklengthPoint> {
    achievable_nld(&mimo_dispersion_result(cfg)?, n, eps)
}

/// L parallel complex Rayleigh channels.
pub fn parallel_capacity_dispersion(l: u32, sigma2: f64) -> Result<DispersionResult> {
    if l == 0 {
        return Err(domain("parallel_capacity_dispersion", "need at least one channel"));
    }
    check_positive("parallel_capacity_dispersion", sigma2)?;
    let lf = l as f64;
    Ok(DispersionResult::closed_form(
        -EULER_GAMMA * lf - lf * (PI * E * sigma2).ln(),
        lf + PI * PI * lf / 6.0,
        ChannelDomain::Parallel,
        sigma2,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParallelGaps {
    /// δ*(t×t MIMO) − δ*(t parallel), nats per channel use.
    pub delta_gap: f64,
    /// V(t parallel) − V(t×t MIMO).
    pub v_gap: f64,
    pub vnr_gap_db: f64,
}

pub fn mimo_vs_parallel_gaps(t: u32) -> Result<ParallelGaps> {
    if t == 0 {
        return Err(domain("mimo_vs_parallel_gaps", "t must be at least 1"));
    }
    let tf = t as f64;
    let delta_gap = 1.0 - tf + tf * harmonic(1, t - 1);
    let v_gap = (1..t).map(|p| (t - p) as f64 / (p as f64).powi(2)).sum();
    Ok(ParallelGaps {
        delta_gap,
        v_gap,
        vnr_gap_db: DB_PER_NAT_COMPLEX * delta_gap / tf,
    })
}

/// Best transmission dimension when the transmitter may use fewer than t
/// antennas (BDUT). The capacity is qualified by that constraint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BdutResult {
    pub t_opt: u32,
    pub delta_star: f64,
    pub v: f64,
    /// 1/σ² values where the optimal dimension steps from i to i+1.
    pub crossovers: Vec<f64>,
    pub qualifier: &'static str,
}

/// σ²-free intercept aᵢ with δ*(i, r) = aᵢ + i·ln(1/σ²).
pub fn bdut_intercepts(t: u32, r: u32) -> Result<Vec<f64>> {
    MimoConfig::new(t, r, 1.0)?;
    Ok((1..=t).map(|i| mean_log_det(i, r) - i as f64 * (PI * E).ln()).collect())
}

pub fn bdut_optimize(cfg: &MimoConfig) -> Result<BdutResult> {
    cfg.validate()?;
    let mut t_opt = 1;
    let mut best = mimo_capacity_fdt(&cfg.with_t(1))?;
    for i in 2..=cfg.t {
        let d = mimo_capacity_fdt(&cfg.with_t(i))?;
        // strict: ties stay with fewer antennas
        if d > best {
            best = d;
            t_opt = i;
        }
    }
    let a = bdut_intercepts(cfg.t, cfg.r)?;
    let crossovers = a.windows(2).map(|w| (w[0] - w[1]).exp()).collect();
    Ok(BdutResult {
        t_opt,
        delta_star: best,
        v: mimo_dispersion_fdt(&cfg.with_t(t_opt))?,
        crossovers,
        qualifier: "BDUT-constrained",
    })
}

/// Ergodic capacity E{ln det(I + snr·H†H)} by integrating against the
/// unordered eigenvalue density.
pub fn telatar_capacity(cfg: &MimoConfig, snr: f64, spec: &QuadratureSpec) -> Result<f64> {
    cfg.validate()?;
    check_positive("telatar_capacity", snr)?;
    let m = cfg.t.min(cfg.r);
    let d = cfg.t.max(cfg.r) - m;
    let coef: Vec<f64> = (0..m)
        .map(|k| Ok((ln_gamma(k as f64 + 1.0)? - ln_gamma((k + d) as f64 + 1.0)?).exp()))
        .collect::<Result<_>>()?;
    let density = |x: f64| {
        let s: f64 = coef
            .iter()
            .enumerate()
            .map(|(k, c)| c * laguerre_assoc(k as u32, d, x).powi(2))
            .sum();
        s * (d as f64 * x.ln() - x).exp()
    };
    let f = |x: f64| if x > 0.0 { (snr * x).ln_1p() * density(x) } else { 0.0 };
    integrate(f, spec, Domain::UpperHalfLine(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OymanApprox {
    pub c_approx: f64,
    pub v_mutual_info: f64,
}

/// High-SNR approximations of the ergodic capacity and the variance of the
/// mutual information.
pub fn oyman_approx(cfg: &MimoConfig, snr: f64) -> Result<OymanApprox> {
    check_positive("oyman_approx", snr)?;
    let m = cfg.t.min(cfg.r);
    let l = cfg.t.max(cfg.r);
    let mf = m as f64;
    let mut c = mf * snr.ln() - EULER_GAMMA * mf;
    let mut v = 0.0;
    for j in 1..=m {
        c += harmonic(1, l - j);
        v += trigamma((l - j + 1) as f64)?;
    }
    Ok(OymanApprox {
        c_approx: c,
        v_mutual_info: v,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fading::FadingModel;
    use crate::scalar::capacity_dispersion_complex;

    fn cfg(t: u32, r: u32) -> MimoConfig {
        MimoConfig::new(t, r, 1.0).unwrap()
    }

    #[test]
    fn capacity_examples() {
        let c11 = -EULER_GAMMA - (PI * E).ln();
        assert!((mimo_capacity_fdt(&cfg(1, 1)).unwrap() - c11).abs() < 1e-14);
        assert!((mimo_capacity_fdt(&cfg(2, 2)).unwrap() - (-4.443_891_101_501_866)).abs() < 1e-12);
        assert!((mimo_capacity_fdt(&cfg(1, 2)).unwrap() - (1.0 + c11)).abs() < 1e-14);
        assert!(matches!(MimoConfig::new(3, 2, 1.0), Err(Error::Constraint(_))));
        let rayleigh = capacity_dispersion_complex(&FadingModel::rayleigh(), 0.7).unwrap();
        let m = mimo_capacity_fdt(&MimoConfig::new(1, 1, 0.7).unwrap()).unwrap();
        assert!((m - rayleigh.delta_star).abs() < 1e-12);
    }

    #[test]
    fn dispersion_examples() {
        assert!((mimo_dispersion_fdt(&cfg(1, 1)).unwrap() - (1.0 + PI * PI / 6.0)).abs() < 1e-14);
        assert!((mimo_dispersion_fdt(&cfg(1, 2)).unwrap() - PI * PI / 6.0).abs() < 1e-14);
        let v: Vec<f64> = [2, 4, 8, 32].iter().map(|&r| mimo_dispersion_fdt(&cfg(2, r)).unwrap()).collect();
        assert!(v.windows(2).all(|w| w[1] < w[0]) && v[3] > 2.0);
        assert!(mimo_dispersion_fdt(&cfg(2, 200)).unwrap() - 2.0 < 0.05);
    }

    #[test]
    fn sum_forms_equal_polygamma_forms() {
        for r in 1..=16 {
            for t in 1..=r {
                let c = MimoConfig::new(t, r, 0.3).unwrap();
                let d1 = mimo_capacity_fdt(&c).unwrap();
                let d2 = mimo_capacity_digamma(&c).unwrap();
                assert!((d1 - d2).abs() < 1e-12, "δ ({t},{r}): {d1} {d2}");
                let v1 = mimo_dispersion_fdt(&c).unwrap();
                let v2 = mimo_dispersion_trigamma(&c).unwrap();
                assert!((v1 - v2).abs() < 1e-12, "V ({t},{r}): {v1} {v2}");
            }
        }
    }

    #[test]
    fn parallel() {
        let p1 = parallel_capacity_dispersion(1, 1.0).unwrap();
        let c = capacity_dispersion_complex(&FadingModel::rayleigh(), 1.0).unwrap();
        assert!((p1.delta_star - c.delta_star).abs() < 1e-12 && (p1.v - c.v).abs() < 1e-12);
        assert!((parallel_capacity_dispersion(3, 1.0).unwrap().v - (3.0 + PI * PI / 2.0)).abs() < 1e-14);
        let p2 = parallel_capacity_dispersion(2, 1.0).unwrap();
        assert!((p2.delta_star - (-5.443_891_101_501_866)).abs() < 1e-12);
    }

    #[test]
    fn gaps() {
        assert_eq!(
            mimo_vs_parallel_gaps(1).unwrap(),
            ParallelGaps {
                delta_gap: 0.0,
                v_gap: 0.0,
                vnr_gap_db: 0.0
            }
        );
        let g = mimo_vs_parallel_gaps(2).unwrap();
        assert!((g.delta_gap - 1.0).abs() < 1e-15 && (g.v_gap - 1.0).abs() < 1e-15);
        assert!((g.vnr_gap_db - 2.171_472).abs() < 1e-6);
        for t in 1..=16 {
            let g = mimo_vs_parallel_gaps(t).unwrap();
            assert!(g.delta_gap >= 0.0 && g.v_gap >= 0.0 && g.vnr_gap_db >= 0.0);
            // agrees with the difference of the closed forms
            let mimo = mimo_dispersion_result(&cfg(t, t)).unwrap();
            let par = parallel_capacity_dispersion(t, 1.0).unwrap();
            assert!((mimo.delta_star - par.delta_star - g.delta_gap).abs() < 1e-10);
            assert!((par.v - mimo.v - g.v_gap).abs() < 1e-10);
        }
    }

    #[test]
    fn bdut() {
        let a = bdut_intercepts(3, 3).unwrap();
        let want = [-1.221_945_550_750_933, -2.943_891_101_501_866, -5.665_836_652_252_799];
        for (x, y) in a.iter().zip(want) {
            assert!((x - y).abs() < 1e-12);
        }
        let low = bdut_optimize(&cfg(3, 3)).unwrap();
        assert_eq!(low.t_opt, 1);
        assert!((low.crossovers[0] - 5.595_404_023_869_415).abs() < 1e-9);
        assert!((low.crossovers[1] - 15.209_885_080_970_85).abs() < 1e-9);
        let mid = bdut_optimize(&MimoConfig::new(3, 3, 1.0 / 10.0).unwrap()).unwrap();
        assert_eq!(mid.t_opt, 2);
        let high = bdut_optimize(&MimoConfig::new(3, 3, 1.0 / 100.0).unwrap()).unwrap();
        assert_eq!(high.t_opt, 3);
        let one = bdut_optimize(&MimoConfig::new(1, 4, 0.01).unwrap()).unwrap();
        assert_eq!(one.t_opt, 1);
        assert!(one.crossovers.is_empty());
        // never below FDT, equal at high SNR
        for k in -20..=30 {
            let c = MimoConfig::new(3, 3, 10f64.powf(-k as f64 / 10.0)).unwrap();
            let b = bdut_optimize(&c).unwrap();
            let fdt = mimo_capacity_fdt(&c).unwrap();
            assert!(b.delta_star >= fdt);
            if k >= 15 {
                assert_eq!(b.delta_star, fdt);
            }
        }
    }

    #[test]
    fn telatar() {
        let spec = QuadratureSpec::default();
        let c = telatar_capacity(&cfg(1, 1), 1.0, &spec).unwrap();
        assert!((c - 0.596_347_362_323_194).abs() < 1e-10);
        let small = telatar_capacity(&cfg(1, 1), 1e-6, &spec).unwrap();
        assert!((small / 1e-6 - 1.0).abs() < 1e-5);
        let gl = QuadratureSpec::gauss_laguerre(1e-8);
        assert!((telatar_capacity(&cfg(1, 1), 1.0, &gl).unwrap() - c).abs() < 1e-8);
        // high SNR tends to E ln det + t·ln snr
        let snr = 1e8;
        let hi = telatar_capacity(&cfg(2, 3), snr, &spec).unwrap();
        assert!((hi - (mean_log_det(2, 3) + 2.0 * snr.ln())).abs() < 1e-5);
    }

    #[test]
    fn oyman() {
        let o = oyman_approx(&cfg(2, 2), 10.0).unwrap();
        assert!((o.v_mutual_info - (PI * PI / 3.0 - 1.0)).abs() < 1e-12);
        assert!((o.v_mutual_info - (mimo_dispersion_fdt(&cfg(2, 2)).unwrap() - 2.0)).abs() < 1e-12);
        let o = oyman_approx(&cfg(1, 1), 50.0).unwrap();
        assert!((o.c_approx - (50f64.ln() - EULER_GAMMA)).abs() < 1e-14);
        let o = oyman_approx(&cfg(2, 4), 1.0).unwrap();
        assert!((o.v_mutual_info - 0.678_757_022_585_341_8).abs() < 1e-12, "{}", o.v_mutual_info);
    }

    #[test]
    fn nld() {
        let c = cfg(2, 2);
        let d = mimo_capacity_fdt(&c).unwrap();
        assert_eq!(mimo_achievable_nld(&c, 100, 0.5).unwrap().nld, d);
        let p = mimo_achievable_nld(&c, 100, 1e-3).unwrap();
        assert!((d - p.nld - 0.640_06).abs() < 1e-4, "{}", d - p.nld);
        assert!((mimo_achievable_nld(&c, 1_000_000_000, 1e-3).unwrap().nld - d).abs() < 1e-3);
    }
}
