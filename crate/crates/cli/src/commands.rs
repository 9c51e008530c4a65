//! One function per subcommand, each producing a [`Table`].

use crate::args::*;
use crate::error::{usage, CliError};
use crate::output::{Cell, Table};
use fading_ic::exponents::{
    e0_gaussian_scalar, ic_exponent_scalar, mimo_gallager_exponent, mimo_uniform_highsnr_curve, ExponentCurve,
    ExponentPoint,
};
use fading_ic::fading::{FadingModel, FadingProcess, TabulatedPdf};
use fading_ic::mimo::{mimo_capacity_fdt, mimo_dispersion_result, parallel_capacity_dispersion, telatar_capacity, MimoConfig};
use fading_ic::monte_carlo::dt::{dt_achievable_nld, dt_bound, CubeRule};
use fading_ic::monte_carlo::engine::{McConfig, McEstimate};
use fading_ic::monte_carlo::sphere_packing::{sp_converse_nld, sphere_packing_bound_with, SpChannel, SpEstimator};
use fading_ic::monte_carlo::typicality::{lattice_typicality_bound, lattice_typicality_bound_tuned};
use fading_ic::numeric::quadrature::QuadratureSpec;
use fading_ic::numeric::roots::maximize_unimodal;
use fading_ic::scalar::{achievable_nld, capacity_dispersion_complex, capacity_dispersion_real, memory_dispersion};

pub const SEED_ENV: &str = "FADING_IC_SEED";
pub const DEFAULT_SEED: u64 = 1;

/// A finished table plus what the run header needs to know.
#[derive(Debug)]
pub struct Output {
    pub table: Table,
    pub seed: Option<u64>,
    /// Set when the table was produced but the command still failed.
    pub failure: Option<CliError>,
}

impl Output {
    fn plain(table: Table) -> Self {
        Self {
            table,
            seed: None,
            failure: None,
        }
    }

    fn seeded(table: Table, seed: u64) -> Self {
        Self {
            table,
            seed: Some(seed),
            failure: None,
        }
    }
}

pub fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| usage(format!("{SEED_ENV} = `{v}` is not an unsigned integer"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

pub fn mc_config(a: &McArgs) -> Result<McConfig, CliError> {
    let seed = resolve_seed(a.seed)?;
    let cfg = McConfig::new(a.samples, seed)
        .and_then(|c| c.with_batches(a.batches.min(a.samples.max(1).min(u32::MAX as u64) as u32)))
        .and_then(|c| c.with_confidence(a.confidence))
        .map_err(|e| CliError::from(e).as_usage())?;
    Ok(cfg)
}

pub fn fading_model(a: &FadingArgs) -> Result<FadingModel, CliError> {
    if a.m.is_some() && a.fading != Fading::Nakagami {
        return Err(usage("--m applies only to --fading nakagami"));
    }
    if a.fading_file.is_some() && a.fading != Fading::Tabulated {
        return Err(usage("--fading-file applies only to --fading tabulated"));
    }
    let model = match a.fading {
        Fading::Awgn => FadingModel::Awgn,
        Fading::Rayleigh => FadingModel::rayleigh(),
        Fading::Nakagami => {
            let m = a.m.ok_or_else(|| usage("--fading nakagami needs --m"))?;
            FadingModel::nakagami(m).map_err(|e| CliError::from(e).as_usage())?
        }
        Fading::Tabulated => {
            let path = a.fading_file.as_ref().ok_or_else(|| usage("--fading tabulated needs --fading-file"))?;
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            let pdf = TabulatedPdf::from_csv_str(&text).map_err(|e| CliError::from(e).as_usage())?;
            FadingModel::Tabulated(pdf)
        }
    };
    Ok(model)
}

fn mimo_cfg(t: Option<u32>, r: Option<u32>, sigma2: f64) -> Result<MimoConfig, CliError> {
    let (t, r) = match (t, r) {
        (Some(t), Some(r)) => (t, r),
        _ => return Err(usage("MIMO needs --t and --r")),
    };
    MimoConfig::new(t, r, sigma2).map_err(|e| CliError::from(e).as_usage())
}

fn reject(cond: bool, msg: &str) -> Result<(), CliError> {
    if cond {
        Err(usage(msg))
    } else {
        Ok(())
    }
}

pub fn dispersion(a: &DispersionArgs) -> Result<Output, CliError> {
    use DispersionDomain as D;
    let mimo_flags = a.t.is_some() || a.r.is_some();
    let memory_flags = a.process != Process::Iid || a.a.is_some() || !a.ar.is_empty() || !a.ma.is_empty();
    reject(mimo_flags && a.domain != D::Mimo, "--t/--r apply only to --domain mimo")?;
    reject(a.l.is_some() && a.domain != D::Parallel, "--l applies only to --domain parallel")?;
    reject(memory_flags && a.domain != D::Memory, "process flags apply only to --domain memory")?;
    reject(a.n.is_empty() != a.eps.is_empty(), "--n and --eps must be given together")?;

    let mut seed = None;
    // VNR is e^{f·(δ* − δ)} with f = 2/(real dimensions per NLD unit)
    let (dr, params, vnr_factor) = match a.domain {
        D::Real | D::Complex => {
            let model = fading_model(&a.fading)?;
            let dr = if a.domain == D::Real {
                capacity_dispersion_real(&model, a.sigma2)
            } else {
                capacity_dispersion_complex(&model, a.sigma2)
            }
            .map_err(|e| CliError::from(e).as_usage())?;
            (dr, model.name(), if a.domain == D::Real { 2.0 } else { 1.0 })
        }
        D::Mimo => {
            let cfg = mimo_cfg(a.t, a.r, a.sigma2)?;
            (mimo_dispersion_result(&cfg)?, format!("t={} r={}", cfg.t, cfg.r), 1.0 / cfg.t as f64)
        }
        D::Parallel => {
            let l = a.l.ok_or_else(|| usage("--domain parallel needs --l"))?;
            let dr = parallel_capacity_dispersion(l, a.sigma2).map_err(|e| CliError::from(e).as_usage())?;
            (dr, format!("L={l}"), 1.0 / l as f64)
        }
        D::Memory => {
            let process = match a.process {
                Process::Iid => FadingProcess::Iid(fading_model(&a.fading)?),
                Process::Ar1 => {
                    let c = a.a.ok_or_else(|| usage("--process ar1 needs --a"))?;
                    FadingProcess::gauss_ar1(c).map_err(|e| CliError::from(e).as_usage())?
                }
                Process::Arma => {
                    reject(a.ar.is_empty() && a.ma.is_empty(), "--process arma needs --ar and/or --ma")?;
                    FadingProcess::gauss_arma(a.ar.clone(), a.ma.clone()).map_err(|e| CliError::from(e).as_usage())?
                }
            };
            let mc = mc_config(&a.mc)?;
            seed = Some(mc.seed);
            (memory_dispersion(&process, a.sigma2, &mc)?, process.name(), 2.0)
        }
    };

    let mut table = Table::new(&[
        "domain", "params", "delta_star", "v", "v_std_err", "n", "eps", "nld", "nld_ml", "vnr",
    ]);
    let domain = format!("{:?}", a.domain).to_lowercase();
    let base = |n: Cell, eps: Cell, nld: Cell, ml: Cell, vnr: Cell| {
        vec![
            domain.as_str().into(),
            params.as_str().into(),
            dr.delta_star.into(),
            dr.v.into(),
            dr.v_std_err.into(),
            n,
            eps,
            nld,
            ml,
            vnr,
        ]
    };
    if a.n.is_empty() {
        table.push(base(Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty));
    }
    for &n in &a.n {
        for &eps in &a.eps {
            let p = achievable_nld(&dr, n, eps).map_err(|e| CliError::from(e).as_usage())?;
            let vnr = (vnr_factor * (dr.delta_star - p.nld)).exp();
            table.push(base(n.into(), eps.into(), p.nld.into(), p.with_ml_refinement().into(), vnr.into()));
        }
    }
    if !a.n.is_empty() {
        table.meta("remainder_unquantified", true);
    }
    Ok(Output {
        table,
        seed,
        failure: None,
    })
}

// every bound estimate is a probability, so the interval is clipped to [0, 1]
fn estimate_cells(e: &McEstimate) -> Vec<Cell> {
    let (lo, hi) = e.ci();
    vec![e.mean.into(), e.std_err.into(), lo.max(0.0).into(), hi.min(1.0).into()]
}

pub fn bounds(a: &BoundsArgs) -> Result<Output, CliError> {
    reject(a.n == 0, "--n must be positive")?;
    reject(
        a.bound != BoundKind::Sp && a.domain != BoundsDomain::Real,
        "DT and typicality bounds are for --domain real",
    )?;
    reject(a.codewords.is_some() && a.bound != BoundKind::Dt, "--M applies only to --bound dt")?;
    reject(a.a_over_sigma.is_some() && a.bound != BoundKind::Dt, "--a-over-sigma applies only to --bound dt")?;
    reject(a.radius.is_some() && a.bound != BoundKind::Typicality, "--radius applies only to --bound typicality")?;
    let mc = mc_config(&a.mc)?;
    let seed = mc.seed;
    let bound = format!("{:?}", a.bound).to_lowercase();
    let domain = format!("{:?}", a.domain).to_lowercase();
    let sigma2 = a.sigma2;

    let channel = match a.domain {
        BoundsDomain::Real => SpChannel::RealScalar(fading_model(&a.fading)?),
        BoundsDomain::Complex => SpChannel::ComplexScalar(fading_model(&a.fading)?),
        BoundsDomain::Mimo => {
            let cfg = mimo_cfg(a.t, a.r, sigma2)?;
            SpChannel::Mimo { t: cfg.t, r: cfg.r }
        }
    };
    let (label, delta_star) = match &channel {
        SpChannel::RealScalar(m) => (m.name(), capacity_dispersion_real(m, sigma2)?.delta_star),
        SpChannel::ComplexScalar(m) => (m.name(), capacity_dispersion_complex(m, sigma2)?.delta_star),
        SpChannel::Mimo { t, r } => (format!("t={t} r={r}"), mimo_capacity_fdt(&MimoConfig::new(*t, *r, sigma2)?)?),
    };
    let model = match &channel {
        SpChannel::RealScalar(m) | SpChannel::ComplexScalar(m) => Some(m.clone()),
        SpChannel::Mimo { .. } => None,
    };

    if let Some(eps) = a.eps {
        if a.bound == BoundKind::Typicality {
            reject(a.radius.is_some(), "--eps tunes the radius; drop --radius")?;
            return typicality_tuned(a, eps);
        }
        reject(a.delta.is_some() || a.codewords.is_some(), "--eps replaces --delta/--M")?;
        let mut table = Table::new(&["bound", "domain", "fading", "n", "eps", "nld", "delta_star", "samples", "seed"]);
        let row = |nld: f64| -> Vec<Cell> {
            vec![
                bound.as_str().into(),
                domain.as_str().into(),
                label.as_str().into(),
                a.n.into(),
                eps.into(),
                nld.into(),
                delta_star.into(),
                mc.samples.into(),
                seed.into(),
            ]
        };
        match a.bound {
            BoundKind::Sp => {
                let nld = sp_converse_nld(&channel, a.n, eps, sigma2, &mc)?;
                table.push(row(nld));
            }
            BoundKind::Dt => {
                let model = model.unwrap_or(FadingModel::Awgn);
                let d = dt_achievable_nld(&model, a.n, eps, sigma2, CubeRule::PowerLaw, &mc)?;
                table.push(row(d.nld));
                table.meta("cube_a", d.cube_a);
                table.meta("alpha", d.alpha);
                table.meta("berry_esseen_b", d.berry_esseen_b);
            }
            BoundKind::Typicality => unreachable!(),
        }
        return Ok(Output::seeded(table, seed));
    }

    let mut table = Table::new(&[
        "bound", "domain", "fading", "n", "delta", "estimate", "std_err", "ci_lo", "ci_hi", "analytic", "samples",
        "seed",
    ]);
    let push = |table: &mut Table, delta: f64, e: &McEstimate, analytic: Option<f64>| {
        let mut row: Vec<Cell> = vec![
            bound.as_str().into(),
            domain.as_str().into(),
            label.as_str().into(),
            a.n.into(),
            delta.into(),
        ];
        row.extend(estimate_cells(e));
        row.extend([analytic.into(), mc.samples.into(), seed.into()]);
        table.push(row);
    };
    match a.bound {
        BoundKind::Sp => {
            let delta = a.delta.ok_or_else(|| usage("--bound sp needs --delta or --eps"))?;
            let est = match a.estimator {
                Estimator::Indicator => SpEstimator::Indicator,
                Estimator::Conditional => SpEstimator::Conditional,
            };
            let r = sphere_packing_bound_with(&channel, a.n, delta, sigma2, &mc, est)?;
            push(&mut table, delta, &r.estimate, r.analytic);
        }
        BoundKind::Dt => {
            let model = model.unwrap_or(FadingModel::Awgn);
            let (cube_a, alpha) = match a.a_over_sigma {
                Some(k) => CubeRule::Fixed(k * sigma2.sqrt()),
                None => CubeRule::PowerLaw,
            }
            .side(&model, a.n, sigma2)?;
            let nf = a.n as f64;
            let (delta, ln_m) = match (a.delta, a.codewords) {
                (Some(_), Some(_)) => return Err(usage("give either --delta or --M")),
                (Some(d), None) => (d, nf * (d + cube_a.ln())),
                (None, Some(m)) => {
                    reject(!(m >= 2.0), "--M must be at least 2")?;
                    (m.ln() / nf - cube_a.ln(), m.ln())
                }
                (None, None) => return Err(usage("--bound dt needs --delta, --M or --eps")),
            };
            let r = dt_bound(&model, a.n, cube_a, ln_m, sigma2, &mc)?;
            push(&mut table, delta, &r.estimate, None);
            table.meta("cube_a", cube_a);
            table.meta("alpha", alpha);
            table.meta("ln_m", ln_m);
            table.meta("guard_fraction", r.guard_fraction);
            if let Some(w) = r.accuracy_warning {
                table.meta("accuracy_warning", w);
            }
        }
        BoundKind::Typicality => {
            let model = model.unwrap_or(FadingModel::Awgn);
            let delta = a.delta.ok_or_else(|| usage("--bound typicality needs --delta"))?;
            let radius = a.radius.ok_or_else(|| usage("--bound typicality needs --radius or --eps"))?;
            let b = lattice_typicality_bound(&model, a.n, delta, radius, sigma2, &mc)?;
            push(&mut table, delta, &b.total, None);
            table.meta("noise_term", b.noise_term.mean);
            table.meta("lattice_term", b.lattice_term.mean);
        }
    }
    Ok(Output::seeded(table, seed))
}

/// Typicality bound at δ with the decoding radius tuned to ε.
fn typicality_tuned(a: &BoundsArgs, eps: f64) -> Result<Output, CliError> {
    let model = fading_model(&a.fading)?;
    let delta = a.delta.ok_or_else(|| usage("--bound typicality needs --delta"))?;
    let mc = mc_config(&a.mc)?;
    let b = lattice_typicality_bound_tuned(&model, a.n, delta, eps, a.sigma2, &mc)?;
    let mut table = Table::new(&["bound", "fading", "n", "delta", "eps", "estimate", "std_err", "ci_lo", "ci_hi"]);
    let mut row: Vec<Cell> = vec!["typicality".into(), model.name().into(), a.n.into(), delta.into(), eps.into()];
    row.extend(estimate_cells(&b.total));
    table.push(row);
    table.meta("noise_term", b.noise_term.mean);
    table.meta("lattice_term", b.lattice_term.mean);
    Ok(Output::seeded(table, mc.seed))
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![hi],
        _ => (0..n).map(|k| if k == n - 1 { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 }).collect(),
    }
}

fn curve_table(curve: &ExponentCurve) -> Table {
    let mut table = Table::new(&["x", "e_r", "rho_star"]);
    for p in &curve.points {
        table.push(vec![p.x.into(), p.e_r.into(), p.rho_star.into()]);
    }
    table.meta("critical_x", curve.critical_x);
    table.meta("capacity_x", curve.capacity_x);
    table.meta("rho_max", curve.rho_max);
    table
}

pub fn exponent(a: &ExponentArgs) -> Result<Output, CliError> {
    use ExponentDomain as D;
    reject(a.grid < 2, "--grid must be at least 2")?;
    let spec = QuadratureSpec::default();
    match a.domain {
        D::IcScalar => {
            let model = fading_model(&a.fading)?;
            let probe = ic_exponent_scalar(&model, a.sigma2, &[], &spec)?;
            let grid = linspace(probe.critical_x - 1.0, probe.capacity_x, a.grid);
            let curve = ic_exponent_scalar(&model, a.sigma2, &grid, &spec)?;
            let mut t = curve_table(&curve);
            t.meta("v", capacity_dispersion_real(&model, a.sigma2)?.v);
            Ok(Output::plain(t))
        }
        D::GaussianScalar => {
            let model = fading_model(&a.fading)?;
            let snr = a.snr.ok_or_else(|| usage("--domain gaussian-scalar needs --snr"))?;
            let curve = gaussian_scalar_curve(&model, snr, a.grid, &spec)?;
            Ok(Output::plain(curve_table(&curve)))
        }
        D::Mimo => {
            let cfg = mimo_cfg(a.t, a.r, 1.0)?;
            let snr = a.snr.ok_or_else(|| usage("--domain mimo needs --snr"))?;
            let mc = mc_config(&a.mc)?;
            let cap = telatar_capacity(&cfg, snr, &spec)?;
            let g = mimo_gallager_exponent(&cfg, snr, &linspace(0.0, cap, a.grid), &mc)?;
            let mut t = curve_table(&g.curve);
            t.meta("capacity_quadrature", cap);
            t.meta("capacity_std_err", g.capacity.std_err);
            let worst = g.e0_grid.iter().map(|p| p.2).fold(0.0, f64::max);
            t.meta("e0_max_std_err", worst);
            Ok(Output::seeded(t, mc.seed))
        }
        D::MimoUniform => {
            let cfg = mimo_cfg(a.t, a.r, a.sigma2)?;
            let mc = mc_config(&a.mc)?;
            let d = mimo_capacity_fdt(&cfg)?;
            let c = mimo_uniform_highsnr_curve(&cfg, &linspace(d - 1.0, d, a.grid), &mc)?;
            let mut t = curve_table(&c.curve);
            t.meta("v", c.v.mean);
            t.meta("v_std_err", c.v.std_err);
            Ok(Output::seeded(t, mc.seed))
        }
    }
}

/// Gaussian-input exponent of a real scalar channel over rates in [0, C].
pub fn gaussian_scalar_curve(model: &FadingModel, snr: f64, points: usize, spec: &QuadratureSpec) -> Result<ExponentCurve, CliError> {
    let ln_snr = snr.ln();
    let cap = model.expect_log(
        |v| {
            let t = ln_snr + 2.0 * v;
            0.5 * if t > 0.0 { t + (-t).exp().ln_1p() } else { t.exp().ln_1p() }
        },
        spec,
        &[-0.5 * ln_snr],
    )?;
    let e0 = |rho: f64| e0_gaussian_scalar(model, snr, rho, spec);
    let h = 1e-4;
    let critical_x = (e0(1.0)? - e0(1.0 - h)?) / h;
    let mut pts = Vec::with_capacity(points);
    for x in linspace(0.0, cap, points) {
        let mut err = None;
        let (rho, val) = maximize_unimodal(
            |rho| match e0(rho) {
                Ok(v) => v - rho * x,
                Err(e) => {
                    err.get_or_insert(e);
                    f64::NAN
                }
            },
            0.0,
            1.0,
            1e-9,
        )?;
        if let Some(e) = err {
            return Err(e.into());
        }
        pts.push(ExponentPoint {
            x,
            e_r: val.max(0.0),
            rho_star: rho,
        });
    }
    Ok(ExponentCurve {
        points: pts,
        critical_x,
        capacity_x: cap,
        rho_max: 1.0,
    })
}
