//! Gallager random-coding exponents: the infinite-constellation exponent
//! for scalar fading, Gaussian-input and uniform-input MIMO exponents, and
//! the near-capacity parabola check E ≈ (C − x)²/(2V).

use crate::error::{domain, Error, Result};
use crate::fading::model::check_positive;
use crate::fading::FadingModel;
use crate::mimo::{mimo_capacity_fdt, MimoConfig};
use crate::monte_carlo::engine::{collect_samples, run_batches, McConfig, McEstimate, Moments, SampleSummary};
use crate::monte_carlo::logdet::{ln_det_gram, sample_gaussian_matrix};
use crate::numeric::interp::Pchip;
use crate::numeric::quadrature::QuadratureSpec;
use crate::numeric::roots::{find_root, maximize_unimodal, BracketedRoot};
use serde::Serialize;
use std::f64::consts::{LN_2, PI};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentPoint {
    /// Rate or NLD, nats.
    pub x: f64,
    pub e_r: f64,
    pub rho_star: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentCurve {
    pub points: Vec<ExponentPoint>,
    pub critical_x: f64,
    pub capacity_x: f64,
    /// Upper end of the ρ range searched; below 1 only when E{det^{−ρ}}
    /// has heavy tails.
    pub rho_max: f64,
}

const ROOT_TOL: f64 = 1e-12;

/// Builds the curve from E₀ and its derivative D = E₀' (decreasing),
/// solving D(ρ*) = x on [0, ρ_max] and switching to the straight line
/// below the critical point.
fn curve_from_e0<E, D>(grid: &[f64], e0: E, deriv: D, capacity_x: f64, rho_max: f64) -> Result<ExponentCurve>
where
    E: Fn(f64) -> Result<f64>,
    D: Fn(f64) -> Result<f64>,
{
    let critical_x = deriv(rho_max)?;
    let e0_max = e0(rho_max)?;
    let mut points = Vec::with_capacity(grid.len());
    for &x in grid {
        let p = if x >= capacity_x {
            ExponentPoint { x, e_r: 0.0, rho_star: 0.0 }
        } else if x <= critical_x {
            ExponentPoint {
                x,
                e_r: e0_max - rho_max * x,
                rho_star: rho_max,
            }
        } else {
            let mut err = None;
            let rho = find_root(
                |r| match deriv(r) {
                    Ok(d) => d - x,
                    Err(e) => {
                        err = Some(e);
                        f64::NAN
                    }
                },
                &BracketedRoot::new(0.0, rho_max, ROOT_TOL)?,
            );
            if let Some(e) = err {
                return Err(e);
            }
            let rho = rho?;
            ExponentPoint {
                x,
                e_r: (e0(rho)? - rho * x).max(0.0),
                rho_star: rho,
            }
        };
        points.push(p);
    }
    Ok(ExponentCurve {
        points,
        critical_x,
        capacity_x,
        rho_max,
    })
}

/// Negative-moment functionals of a scalar fading law.
struct ScalarFading<'a> {
    model: &'a FadingModel,
    spec: &'a QuadratureSpec,
}

impl ScalarFading<'_> {
    fn check(&self, rho: f64) -> Result<()> {
        if let Some(alpha) = self.model.regularity_exponent().alpha {
            if rho >= alpha {
                return Err(Error::MomentDivergence {
                    moment: format!("E{{H^-{rho}}}"),
                    detail: format!("{} has density ∝ h^{} near 0", self.model.name(), alpha - 1.0),
                });
            }
        }
        Ok(())
    }

    /// (E{H^{−ρ}}, E{ln H·H^{−ρ}})
    fn moments(&self, rho: f64) -> Result<(f64, f64)> {
        self.check(rho)?;
        let m0 = self.model.expect_log(|v| (-rho * v).exp(), self.spec, &[])?;
        let m1 = self.model.expect_log(|v| v * (-rho * v).exp(), self.spec, &[])?;
        Ok((m0, m1))
    }
}

/// Infinite-constellation E₀(ρ) per real dimension:
/// ρδ* − (ρ/2)E{ln(H²/e)} − ((1+ρ)/2)ln(1+ρ) − ln E{H^{−ρ}}.
pub fn ic_e0_scalar(model: &FadingModel, sigma2: f64, rho: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_rho("ic_e0_scalar", rho)?;
    let delta_star = crate::scalar::capacity_dispersion_real(model, sigma2)?.delta_star;
    let mean_ln_h = model.log_moments(spec)?.mean_half_log_sq;
    let (m0, _) = ScalarFading { model, spec }.moments(rho)?;
    Ok(rho * delta_star - 0.5 * rho * (2.0 * mean_ln_h - 1.0) - 0.5 * (1.0 + rho) * rho.ln_1p() - m0.ln())
}

fn check_rho(func: &'static str, rho: f64) -> Result<()> {
    if (0.0..=1.0).contains(&rho) {
        Ok(())
    } else {
        Err(domain(func, format!("ρ = {rho} outside [0, 1]")))
    }
}

/// E_r(δ) = max_ρ E₀(ρ) − ρδ for the scalar infinite constellation.
pub fn ic_exponent_scalar(
    model: &FadingModel,
    sigma2: f64,
    delta_grid: &[f64],
    spec: &QuadratureSpec,
) -> Result<ExponentCurve> {
    let delta_star = crate::scalar::capacity_dispersion_real(model, sigma2)?.delta_star;
    let mean_ln_h = model.log_moments(spec)?.mean_half_log_sq;
    let f = ScalarFading { model, spec };
    f.check(1.0)?;
    let e0 = |rho: f64| ic_e0_scalar(model, sigma2, rho, spec);
    let deriv = |rho: f64| -> Result<f64> {
        let (m0, m1) = f.moments(rho)?;
        Ok(delta_star - mean_ln_h - 0.5 * rho.ln_1p() + m1 / m0)
    };
    curve_from_e0(delta_grid, e0, deriv, delta_star, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParabolaRatio {
    pub x: f64,
    pub gap: f64,
    /// e_r / ((capacity − x)²/(2V)); 1 by convention at zero gap.
    pub ratio: f64,
}

/// Ratios for the grid points within 0.05·√V of capacity.
pub fn near_capacity_parabola(curve: &ExponentCurve, v: f64) -> Vec<ParabolaRatio> {
    curve
        .points
        .iter()
        .filter_map(|p| {
            let gap = curve.capacity_x - p.x;
            if gap < 0.0 || gap > 0.05 * v.sqrt() {
                return None;
            }
            let ratio = if gap == 0.0 { 1.0 } else { p.e_r / (gap * gap / (2.0 * v)) };
            Some(ParabolaRatio { x: p.x, gap, ratio })
        })
        .collect()
}

/// Exact Gaussian-input E₀ for a real scalar channel with power
/// constraint: −ln E{(1 + H²·snr/(1+ρ))^{−ρ/2}}.
pub fn e0_gaussian_scalar(model: &FadingModel, snr: f64, rho: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_positive("e0_gaussian_scalar", snr)?;
    check_rho("e0_gaussian_scalar", rho)?;
    if rho == 0.0 {
        return Ok(0.0);
    }
    let ln_c = (snr / (1.0 + rho)).ln();
    let g = |v: f64| {
        let t = ln_c + 2.0 * v;
        let softplus = if t > 0.0 { t + (-t).exp().ln_1p() } else { t.exp().ln_1p() };
        (-0.5 * rho * softplus).exp()
    };
    Ok(-model.expect_log(g, spec, &[-0.5 * ln_c])?.ln())
}

/// Number of points in the ρ grid of the MIMO Gallager exponent.
pub const RHO_GRID_POINTS: usize = 33;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MimoGallager {
    pub curve: ExponentCurve,
    /// (ρ, E₀(ρ), standard error) on the sampling grid.
    pub e0_grid: Vec<(f64, f64, f64)>,
    /// Monte Carlo E{ln det(I + snr·H†H)}.
    pub capacity: McEstimate,
}

/// Gaussian-input MIMO exponent
/// max_ρ −ln E{det(I + snr/(1+ρ)·H†H)^{−ρ}} − ρR, with E₀ sampled on a
/// fixed ρ grid from one set of matrices and interpolated monotonically.
pub fn mimo_gallager_exponent(cfg: &MimoConfig, snr: f64, rate_grid: &[f64], mc: &McConfig) -> Result<MimoGallager> {
    cfg.validate()?;
    check_positive("mimo_gallager_exponent", snr)?;
    mc.validate()?;
    let rhos: Vec<f64> = (0..RHO_GRID_POINTS).map(|j| j as f64 / (RHO_GRID_POINTS - 1) as f64).collect();
    let (t, r) = (cfg.t as usize, cfg.r as usize);
    let batches = run_batches(mc, |rng, len, _| {
        let mut acc = vec![Moments::default(); rhos.len()];
        let mut cap = Moments::default();
        for _ in 0..len {
            let h = sample_gaussian_matrix(r, t, rng);
            for (j, &rho) in rhos.iter().enumerate() {
                let c = snr / (1.0 + rho);
                let l = t as f64 * c.ln() + ln_det_gram(&h, r, t, 1.0 / c);
                if j == 0 {
                    cap.push(l);
                }
                acc[j].push((-rho * l).exp());
            }
        }
        (acc, cap)
    });
    let z = mc.z();
    let capacity = McEstimate::from_batches(&batches.iter().map(|b| b.1).collect::<Vec<_>>(), z);
    let mut e0_grid = Vec::with_capacity(rhos.len());
    for (j, &rho) in rhos.iter().enumerate() {
        let per: Vec<Moments> = batches.iter().map(|b| b.0[j]).collect();
        let m = McEstimate::from_batches(&per, z);
        let e0 = if j == 0 { 0.0 } else { -m.mean.ln() };
        e0_grid.push((rho, e0, m.std_err / m.mean));
    }
    let pchip = Pchip::new(rhos.clone(), e0_grid.iter().map(|p| p.1).collect())?;
    let critical_x = pchip.derivative(1.0);
    let mut points = Vec::with_capacity(rate_grid.len());
    for &x in rate_grid {
        let (rho, val) = maximize_unimodal(|rho| pchip.eval(rho) - rho * x, 0.0, 1.0, 1e-10)?;
        points.push(ExponentPoint {
            x,
            e_r: val.max(0.0),
            rho_star: rho,
        });
    }
    Ok(MimoGallager {
        curve: ExponentCurve {
            points,
            critical_x,
            capacity_x: capacity.mean,
            rho_max: 1.0,
        },
        e0_grid,
        capacity,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HighSnrE0 {
    pub e0: f64,
    pub std_err: f64,
    pub mean_log_det: McEstimate,
    /// E{det(H†H)^{−ρ}}.
    pub inv_det_moment: McEstimate,
    /// E{det^{−2ρ}} is infinite or the batch means disagree.
    pub heavy_tail: bool,
}

fn highsnr_divergence(cfg: &MimoConfig, rho: f64) -> Result<bool> {
    let dof = (cfg.r - cfg.t + 1) as f64;
    if rho >= dof {
        return Err(Error::MomentDivergence {
            moment: format!("E{{det(H†H)^-{rho}}}"),
            detail: format!("finite only for ρ < r − t + 1 = {dof}"),
        });
    }
    Ok(2.0 * rho >= dof)
}

fn log_mean_exp(xs: &[f64], rho: f64) -> (f64, f64) {
    // (ln E{e^{−ρL}}, E{L·e^{−ρL}}/E{e^{−ρL}})
    let shift = xs.iter().map(|l| -rho * l).fold(f64::NEG_INFINITY, f64::max);
    let (mut s0, mut s1) = (0.0, 0.0);
    for &l in xs {
        let w = (-rho * l - shift).exp();
        s0 += w;
        s1 += w * l;
    }
    (shift + (s0 / xs.len() as f64).ln(), s1 / s0)
}

/// Uniform-input MIMO E₀ at high SNR:
/// ρδ* − ρE{ln det(H†H/e)} − t(1+ρ)ln(1+ρ) − ln E{det(H†H)^{−ρ}}.
pub fn mimo_e0_uniform_highsnr(cfg: &MimoConfig, rho: f64, mc: &McConfig) -> Result<HighSnrE0> {
    check_rho("mimo_e0_uniform_highsnr", rho)?;
    let delta_star = mimo_capacity_fdt(cfg)?;
    let mut heavy_tail = highsnr_divergence(cfg, rho)?;
    mc.validate()?;
    let (t, r) = (cfg.t as usize, cfg.r as usize);
    let batches = run_batches(mc, |rng, len, _| {
        let (mut ml, mut mi) = (Moments::default(), Moments::default());
        for _ in 0..len {
            let l = ln_det_gram(&sample_gaussian_matrix(r, t, rng), r, t, 0.0);
            ml.push(l);
            mi.push((-rho * l).exp());
        }
        (ml, mi)
    });
    let z = mc.z();
    let mean_log_det = McEstimate::from_batches(&batches.iter().map(|b| b.0).collect::<Vec<_>>(), z);
    let inv = McEstimate::from_batches(&batches.iter().map(|b| b.1).collect::<Vec<_>>(), z);
    heavy_tail |= inv.max_batch_deviation() > 6.0;
    let tf = t as f64;
    let e0 = rho * delta_star - rho * (mean_log_det.mean - tf) - tf * (1.0 + rho) * rho.ln_1p() - inv.mean.ln();
    let std_err = ((rho * mean_log_det.std_err).powi(2) + (inv.std_err / inv.mean).powi(2)).sqrt();
    Ok(HighSnrE0 {
        e0,
        std_err,
        mean_log_det,
        inv_det_moment: inv,
        heavy_tail,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HighSnrCurve {
    pub curve: ExponentCurve,
    /// t + Var(ln det(H†H)).
    pub v: McEstimate,
}

/// Uniform-input high-SNR exponent over an NLD grid, from one sample of
/// ln det(H†H). When t = r the ρ range stops at ½, where E{det^{−2ρ}}
/// stops being finite.
pub fn mimo_uniform_highsnr_curve(cfg: &MimoConfig, delta_grid: &[f64], mc: &McConfig) -> Result<HighSnrCurve> {
    let delta_star = mimo_capacity_fdt(cfg)?;
    mc.validate()?;
    let (t, r) = (cfg.t as usize, cfg.r as usize);
    let tf = t as f64;
    let rho_max = (0.5 * (r - t + 1) as f64).min(1.0);
    let ls = collect_samples(mc, |rng| ln_det_gram(&sample_gaussian_matrix(r, t, rng), r, t, 0.0));
    let summary = SampleSummary::from_slice(&ls);
    let m = summary.mean;
    let e0 = |rho: f64| -> Result<f64> {
        let (lme, _) = log_mean_exp(&ls, rho);
        Ok(rho * delta_star - rho * (m - tf) - tf * (1.0 + rho) * rho.ln_1p() - lme)
    };
    let deriv = |rho: f64| -> Result<f64> {
        let (_, tilt) = log_mean_exp(&ls, rho);
        Ok(delta_star - m - tf * rho.ln_1p() + tilt)
    };
    let curve = curve_from_e0(delta_grid, e0, deriv, delta_star, rho_max)?;
    let var = summary.variance_estimate(mc.z());
    let v = McEstimate::from_value(tf + var.mean, var.std_err, var.n_effective, mc.z());
    Ok(HighSnrCurve { curve, v })
}

/// Rayleigh oracle pieces: E{1/H} = √π and E{ln H/H}/E{1/H} = −(γ + 2ln 2)/2.
pub fn rayleigh_critical_nld(sigma2: f64) -> f64 {
    0.5 * (1.0 / (4.0 * PI * std::f64::consts::E * sigma2)).ln()
        - (crate::numeric::special::EULER_GAMMA + 2.0 * LN_2) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mimo::{mimo_dispersion_fdt, telatar_capacity};
    use crate::monte_carlo::engine::estimate_mean;
    use crate::numeric::quadrature::{integrate, Domain};
    use crate::scalar::capacity_dispersion_real;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn rayleigh_negative_moments() {
        let m = FadingModel::rayleigh();
        let s = spec();
        let (m0, m1) = ScalarFading { model: &m, spec: &s }.moments(1.0).unwrap();
        assert!((m0 - PI.sqrt()).abs() < 1e-10);
        assert!((m1 / m0 + 0.981_755_013_0).abs() < 1e-9);
        assert!((rayleigh_critical_nld(1.0) - (-2.747_267_136_495_357)).abs() < 1e-12);
    }

    #[test]
    fn scalar_curve_shape() {
        let m = FadingModel::rayleigh();
        let d = capacity_dispersion_real(&m, 1.0).unwrap().delta_star;
        let grid: Vec<f64> = (0..=60).map(|k| -3.5 + k as f64 * (d + 0.1 + 3.5) / 60.0).collect();
        let c = ic_exponent_scalar(&m, 1.0, &grid, &spec()).unwrap();
        assert!((c.critical_x - (-2.747_267_136_495_357)).abs() < 1e-8);
        assert_eq!(c.capacity_x, d);
        for w in c.points.windows(2) {
            assert!(w[1].e_r <= w[0].e_r + 1e-12);
            assert!(w[1].rho_star <= w[0].rho_star + 1e-12);
        }
        // exactly linear with slope −1 below the critical point
        let lin: Vec<_> = c.points.iter().filter(|p| p.x <= c.critical_x).collect();
        for w in lin.windows(2) {
            let slope = (w[1].e_r - w[0].e_r) / (w[1].x - w[0].x);
            assert!((slope + 1.0).abs() < 1e-9);
            assert_eq!(w[0].rho_star, 1.0);
        }
        // convex
        for w in c.points.windows(3) {
            assert!(w[0].e_r + w[2].e_r - 2.0 * w[1].e_r >= -1e-10);
        }
        let at = ic_exponent_scalar(&m, 1.0, &[d], &spec()).unwrap();
        assert_eq!((at.points[0].e_r, at.points[0].rho_star), (0.0, 0.0));
    }

    #[test]
    fn branches_meet_at_critical_point() {
        let m = FadingModel::nakagami(2.0).unwrap();
        let probe = ic_exponent_scalar(&m, 0.5, &[], &spec()).unwrap();
        let xc = probe.critical_x;
        let c = ic_exponent_scalar(&m, 0.5, &[xc - 1e-9, xc + 1e-9], &spec()).unwrap();
        assert!((c.points[0].e_r - c.points[1].e_r).abs() < 1e-6);
        assert!((c.points[1].rho_star - 1.0).abs() < 1e-6);
    }

    #[test]
    fn divergent_moment_detected() {
        let m = FadingModel::nakagami(0.5).unwrap();
        let err = ic_exponent_scalar(&m, 1.0, &[-2.0], &spec()).unwrap_err();
        assert!(matches!(err, Error::MomentDivergence { .. }));
    }

    #[test]
    fn parabola_ratios() {
        for (m, v) in [(FadingModel::rayleigh(), 0.5 + PI * PI / 24.0), (FadingModel::Awgn, 0.5)] {
            let d = capacity_dispersion_real(&m, 1.0).unwrap().delta_star;
            let gaps = [0.04, 0.02, 0.01, 0.0];
            let grid: Vec<f64> = gaps.iter().map(|g| d - g * v.sqrt()).collect();
            let c = ic_exponent_scalar(&m, 1.0, &grid, &spec()).unwrap();
            let r = near_capacity_parabola(&c, v);
            assert_eq!(r.len(), 4);
            assert!((r[2].ratio - 1.0).abs() < 0.05, "{r:?}");
            assert_eq!(r[3].ratio, 1.0);
            let dev: Vec<f64> = r[..3].iter().map(|p| (p.ratio - 1.0).abs()).collect();
            assert!(dev[0] > dev[1] && dev[1] > dev[2], "{dev:?}");
        }
    }

    #[test]
    fn gaussian_e0() {
        let s = spec();
        assert_eq!(e0_gaussian_scalar(&FadingModel::rayleigh(), 5.0, 0.0, &s).unwrap(), 0.0);
        let a = e0_gaussian_scalar(&FadingModel::Awgn, 1.0, 1.0, &s).unwrap();
        assert!((a - 0.5 * 1.5f64.ln()).abs() < 1e-15);
        let q = e0_gaussian_scalar(&FadingModel::rayleigh(), 100.0, 0.5, &s).unwrap();
        let mc = McConfig::new(1_000_000, 14).unwrap();
        let m = FadingModel::rayleigh();
        let est = estimate_mean(&mc, |rng| {
            let h = m.sample_h(rng);
            (1.0 + h * h * 100.0 / 1.5).powf(-0.25)
        });
        assert!((-est.mean.ln() - q).abs() < 4.0 * est.std_err / est.mean, "{q} {est:?}");
    }

    #[test]
    fn mimo_gallager() {
        let cfg = MimoConfig::new(1, 1, 1.0).unwrap();
        let mc = McConfig::new(100_000, 3).unwrap();
        let snr = 10.0;
        let g = mimo_gallager_exponent(&cfg, snr, &[0.5, 1.0, 2.0], &mc).unwrap();
        assert_eq!(g.e0_grid[0].1, 0.0);
        // E₀ nondecreasing and concave on the grid
        for w in g.e0_grid.windows(3) {
            assert!(w[1].1 >= w[0].1 && w[1].1 - w[0].1 >= w[2].1 - w[1].1 - 1e-9);
        }
        // 1×1: |H|² ~ Exp(1)
        for &(rho, e0, se) in g.e0_grid.iter().skip(8).step_by(8) {
            let c = snr / (1.0 + rho);
            let want = -integrate(|x| (1.0 + c * x).powf(-rho) * (-x).exp(), &spec(), Domain::UpperHalfLine(0.0))
                .unwrap()
                .ln();
            assert!((e0 - want).abs() < 4.0 * se, "ρ = {rho}: {e0} vs {want} ± {se}");
        }
        let cap = telatar_capacity(&cfg, snr, &spec()).unwrap();
        assert!(g.capacity.agrees_with(cap, 4.0));
        let at_cap = mimo_gallager_exponent(&cfg, snr, &[cap], &mc).unwrap();
        assert!(at_cap.curve.points[0].e_r <= 2.0 * at_cap.capacity.std_err, "{:?}", at_cap.curve.points);
    }

    #[test]
    fn uniform_highsnr() {
        let mc = McConfig::new(200_000, 8).unwrap();
        let c22 = MimoConfig::new(2, 2, 1.0).unwrap();
        assert!(mimo_e0_uniform_highsnr(&c22, 0.0, &mc).unwrap().e0.abs() < 1e-12);
        assert!(matches!(mimo_e0_uniform_highsnr(&c22, 1.0, &mc), Err(Error::MomentDivergence { .. })));
        assert!(mimo_e0_uniform_highsnr(&c22, 0.6, &mc).unwrap().heavy_tail);
        assert!(!mimo_e0_uniform_highsnr(&c22, 0.3, &mc).unwrap().heavy_tail);
        let d = mimo_capacity_fdt(&c22).unwrap();
        let curve = mimo_uniform_highsnr_curve(&c22, &[d - 0.05, d - 0.02, d], &mc).unwrap();
        assert_eq!(curve.curve.rho_max, 0.5);
        let v = mimo_dispersion_fdt(&c22).unwrap();
        assert!(curve.v.agrees_with(v, 4.0), "{:?} vs {v}", curve.v);
        let ratios = near_capacity_parabola(&curve.curve, curve.v.mean);
        assert!((ratios[1].ratio - 1.0).abs() < 0.05, "{ratios:?}");
        // t = 1, r = 2, ρ = 1: E{1/det} = 1/(r − 1), E{ln det} = 1 − γ
        let c12 = MimoConfig::new(1, 2, 1.0).unwrap();
        let e = mimo_e0_uniform_highsnr(&c12, 1.0, &mc).unwrap();
        assert!(e.heavy_tail);
        let want = 1.0 - (PI * std::f64::consts::E).ln() - 2.0 * LN_2;
        assert!((e.e0 - want).abs() < 0.03, "{} vs {want}", e.e0);
        assert!((e.inv_det_moment.mean - 1.0).abs() < 0.05);
    }
}
