//! Acceptance checks, shared by `fading-ic verify` and the acceptance test
//! target.

use crate::args::VerifyArgs;
use crate::commands::Output;
use crate::error::{usage, CliError};
use crate::output::Table;
use fading_ic::exponents::{ic_exponent_scalar, near_capacity_parabola};
use fading_ic::fading::FadingModel;
use fading_ic::mimo::{
    bdut_optimize, mimo_capacity_digamma, mimo_capacity_fdt, mimo_dispersion_fdt, mimo_dispersion_trigamma,
    mimo_vs_parallel_gaps, telatar_capacity, MimoConfig,
};
use fading_ic::monte_carlo::dt::{dt_achievable_nld, CubeRule};
use fading_ic::monte_carlo::engine::McConfig;
use fading_ic::monte_carlo::log_chi2::log_chi2_tv_error;
use fading_ic::monte_carlo::logdet::{det_log_verify, telatar_capacity_mc};
use fading_ic::monte_carlo::sphere_packing::{sp_converse_nld, SpChannel};
use fading_ic::numeric::quadrature::QuadratureSpec;
use fading_ic::numeric::special::q_inverse;
use fading_ic::scalar::{awgn_gap, capacity_dispersion_real, power_constrained_dispersion};
use std::f64::consts::{E, PI};
use std::time::{Duration, Instant};

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

pub struct Criterion {
    pub id: u32,
    pub title: &'static str,
    pub check: fn() -> Result<Outcome, CliError>,
}

pub const CRITERIA: &[Criterion] = &[
    Criterion { id: 1, title: "AWGN baseline", check: c01_awgn },
    Criterion { id: 2, title: "Rayleigh gap to AWGN", check: c02_rayleigh_gap },
    Criterion { id: 3, title: "finite-blocklength extra loss", check: c03_extra_loss },
    Criterion { id: 4, title: "Nakagami limit", check: c04_nakagami },
    Criterion { id: 5, title: "power-constrained limit", check: c05_power },
    Criterion { id: 6, title: "MIMO closed forms", check: c06_mimo_forms },
    Criterion { id: 7, title: "parallel-vs-MIMO gaps", check: c07_parallel },
    Criterion { id: 8, title: "BDUT regions", check: c08_bdut },
    Criterion { id: 9, title: "det-log Monte Carlo", check: c09_det_log },
    Criterion { id: 10, title: "Telatar integral", check: c10_telatar },
    Criterion { id: 11, title: "log-chi-square error", check: c11_log_chi2 },
    Criterion { id: 12, title: "bound ordering", check: c12_ordering },
    Criterion { id: 13, title: "exponent sanity", check: c13_exponent },
    Criterion { id: 14, title: "determinism", check: c14_determinism },
];

pub fn criterion(id: u32) -> Option<&'static Criterion> {
    CRITERIA.iter().find(|c| c.id == id)
}

/// Runs one check; errors and panics count as failures.
pub fn run_criterion(c: &Criterion) -> Outcome {
    match std::panic::catch_unwind(c.check) {
        Ok(Ok(o)) => o,
        Ok(Err(e)) => Outcome::new(false, format!("error: {e}")),
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::new(false, format!("panic: {msg}"))
        }
    }
}

pub fn status_line(c: &Criterion, o: &Outcome) -> String {
    format!(
        "criterion {:>2} [{}] {}: {}",
        c.id,
        if o.pass { "PASS" } else { "FAIL" },
        c.title,
        o.detail
    )
}

pub fn command(a: &VerifyArgs) -> Result<Output, CliError> {
    let selected: Vec<&Criterion> = if a.only.is_empty() {
        CRITERIA.iter().collect()
    } else {
        a.only
            .iter()
            .map(|&id| criterion(id).ok_or_else(|| usage(format!("no criterion {id}; valid ids are 1-14"))))
            .collect::<Result<_, _>>()?
    };
    let mut table = Table::new(&["id", "criterion", "status", "detail"]);
    let mut failed = Vec::new();
    for c in selected {
        let o = run_criterion(c);
        eprintln!("{}", status_line(c, &o));
        if !o.pass {
            failed.push(c.id.to_string());
        }
        table.push(vec![c.id.into(), c.title.into(), if o.pass { "pass" } else { "fail" }.into(), o.detail.into()]);
    }
    let failure = (!failed.is_empty()).then(|| CliError::Failed(format!("criteria failed: {}", failed.join(", "))));
    Ok(Output {
        table,
        seed: None,
        failure,
    })
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t0 = Instant::now();
    let v = f();
    (v, t0.elapsed())
}

/// Best of a few runs, so a cold cache does not decide a sub-millisecond budget.
fn best_time<T>(mut f: impl FnMut() -> T) -> (T, Duration) {
    let (mut v, mut best) = timed(&mut f);
    for _ in 0..4 {
        let (w, d) = timed(&mut f);
        v = w;
        best = best.min(d);
    }
    (v, best)
}

fn c01_awgn() -> Result<Outcome, CliError> {
    let mut ok = true;
    let mut worst = 0.0f64;
    for s2 in [0.25, 1.0, 3.0] {
        let (r, dt) = best_time(|| capacity_dispersion_real(&FadingModel::Awgn, s2));
        let r = r?;
        let want = 0.5 * (1.0 / (2.0 * PI * E * s2)).ln();
        worst = worst.max((r.delta_star - want).abs());
        ok &= (r.delta_star - want).abs() <= 4.0 * f64::EPSILON * want.abs() && r.v == 0.5 && dt < Duration::from_millis(1);
    }
    Ok(Outcome::new(ok, format!("max |δ* error| = {worst:.1e}, V = 0.5, runtime < 1 ms")))
}

fn c02_rayleigh_gap() -> Result<Outcome, CliError> {
    let (nats, db) = awgn_gap(&FadingModel::rayleigh())?;
    let ok = (nats - 0.28861).abs() < 1e-4 && (db - 2.5069).abs() < 8.6859 * 1e-4;
    Ok(Outcome::new(ok, format!("gap = {nats:.6} nats = {db:.5} dB")))
}

fn c03_extra_loss() -> Result<Outcome, CliError> {
    let (r, dt) = best_time(|| -> Result<f64, CliError> {
        let v = capacity_dispersion_real(&FadingModel::rayleigh(), 1.0)?.v;
        let n = 100.0;
        Ok(8.6859 * ((v / n).sqrt() - (0.5f64 / n).sqrt()) * q_inverse(1e-5)?)
    });
    let db = r?;
    let ok = (db - 0.92).abs() <= 0.02 && dt < Duration::from_millis(1);
    Ok(Outcome::new(ok, format!("extra loss = {db:.4} dB, runtime < 1 ms: {}", dt < Duration::from_millis(1))))
}

fn c04_nakagami() -> Result<Outcome, CliError> {
    let ms = [0.5, 1.0, 2.0, 4.0, 8.0, 16.0];
    let vs: Vec<f64> = ms
        .iter()
        .map(|&m| Ok(capacity_dispersion_real(&FadingModel::nakagami(m)?, 1.0)?.v))
        .collect::<Result<_, CliError>>()?;
    let decreasing = vs.windows(2).all(|w| w[1] < w[0]);
    let tail = vs[5] - 0.5;
    Ok(Outcome::new(
        decreasing && tail < 0.02,
        format!("V(0.5) = {:.6}, V(16) − 0.5 = {tail:.5}, strictly decreasing: {decreasing}", vs[0]),
    ))
}

fn c05_power() -> Result<Outcome, CliError> {
    let (v, dt) = timed(|| power_constrained_dispersion(&FadingModel::rayleigh(), 1e6, &QuadratureSpec::default()));
    let v = v?;
    let rel = (v / 0.911233 - 1.0).abs();
    Ok(Outcome::new(
        rel < 0.01 && dt < Duration::from_secs(1),
        format!("V(snr = 1e6) = {v:.6}, relative distance {rel:.2e}, runtime < 1 s: {}", dt < Duration::from_secs(1)),
    ))
}

fn c06_mimo_forms() -> Result<Outcome, CliError> {
    let mut worst = 0.0f64;
    for r in 1..=16 {
        for t in 1..=r {
            let c = MimoConfig::new(t, r, 1.0)?;
            worst = worst
                .max((mimo_capacity_fdt(&c)? - mimo_capacity_digamma(&c)?).abs())
                .max((mimo_dispersion_fdt(&c)? - mimo_dispersion_trigamma(&c)?).abs());
        }
    }
    let v200 = mimo_dispersion_fdt(&MimoConfig::new(2, 200, 1.0)?)?;
    Ok(Outcome::new(
        worst <= 1e-12 && v200 - 2.0 < 0.05,
        format!("max sum/closed-form difference {worst:.1e}, V(2, 200) − 2 = {:.4}", v200 - 2.0),
    ))
}

fn c07_parallel() -> Result<Outcome, CliError> {
    let g = mimo_vs_parallel_gaps(2)?;
    let mu = (g.delta_gap / 2.0).exp();
    let exact = g.delta_gap == 1.0 && g.v_gap == 1.0 && (mu - 0.5f64.exp()).abs() < 1e-15;
    let db_ok = (g.vnr_gap_db - 2.171).abs() < 5e-4;
    let mut nonneg = true;
    for t in 1..=16 {
        let g = mimo_vs_parallel_gaps(t)?;
        nonneg &= g.delta_gap >= 0.0 && g.v_gap >= 0.0;
    }
    Ok(Outcome::new(
        exact && db_ok && nonneg,
        format!(
            "Δδ*(2) = {}, ΔV(2) = {}, Δμ*(2) = {:.6} ({:.4} dB), nonnegative up to t = 16: {nonneg}",
            g.delta_gap, g.v_gap, mu, g.vnr_gap_db
        ),
    ))
}

fn c08_bdut() -> Result<Outcome, CliError> {
    let b = bdut_optimize(&MimoConfig::new(3, 3, 1.0)?)?;
    let (x1, x2) = (b.crossovers[0], b.crossovers[1]);
    let mut order = Vec::new();
    for k in 0..=60 {
        let x = 10f64.powf(k as f64 / 30.0);
        let t = bdut_optimize(&MimoConfig::new(3, 3, 1.0 / x)?)?.t_opt;
        if order.last() != Some(&t) {
            order.push(t);
        }
    }
    let ok = (x1 - 5.596).abs() <= 0.01 && (x2 - 15.21).abs() <= 0.05 && order == [1, 2, 3];
    Ok(Outcome::new(ok, format!("crossovers {x1:.4}, {x2:.4}; t_opt order {order:?}")))
}

fn c09_det_log() -> Result<Outcome, CliError> {
    let t0 = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, (t, r)) in [(1, 1), (2, 2), (2, 3), (1, 4)].into_iter().enumerate() {
        let v = det_log_verify(t, r, &McConfig::new(1_000_000, 900 + i as u64)?)?;
        let agree = v.moments_agree(4.0) && v.ks_distance < 0.005;
        ok &= agree;
        parts.push(format!("({t},{r}) KS {:.4}{}", v.ks_distance, if agree { "" } else { " MISMATCH" }));
    }
    let fast = t0.elapsed() < Duration::from_secs(30);
    Ok(Outcome::new(ok && fast, format!("{}; runtime < 30 s: {fast}", parts.join(", "))))
}

fn c10_telatar() -> Result<Outcome, CliError> {
    let spec = QuadratureSpec::default();
    let c11 = telatar_capacity(&MimoConfig::new(1, 1, 1.0)?, 1.0, &spec)?;
    let cfg = MimoConfig::new(2, 2, 1.0)?;
    let c22 = telatar_capacity(&cfg, 100.0, &spec)?;
    let mc = telatar_capacity_mc(&cfg, 100.0, &McConfig::new(1_000_000, 10)?)?;
    let ok = (c11 - 0.596347).abs() <= 1e-5 && mc.agrees_with(c22, 4.0);
    Ok(Outcome::new(
        ok,
        format!("C(1,1,1) = {c11:.7}; C(2,2,100) = {c22:.6} vs MC {:.6} ± {:.1e}", mc.mean, mc.std_err),
    ))
}

fn c11_log_chi2() -> Result<Outcome, CliError> {
    let r = log_chi2_tv_error(1e4)?;
    let tv_ok = (r.tv / 0.00376 - 1.0).abs() <= 0.05;
    let peaks_ok = r.peaks.iter().all(|p| (p.y.abs() - 1.73).abs() <= 0.1);
    Ok(Outcome::new(
        tv_ok && peaks_ok,
        format!("TV = {:.6}, peaks at y = {:.3}, {:.3}", r.tv, r.peaks[0].y, r.peaks[1].y),
    ))
}

/// DT NLD ≤ SP NLD and both within 3√(V/n) of δ* for Rayleigh.
fn c12_ordering() -> Result<Outcome, CliError> {
    let model = FadingModel::rayleigh();
    let dr = capacity_dispersion_real(&model, 1.0)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [32u64, 100] {
        for eps in [1e-2, 1e-3] {
            let mc = McConfig::new(200_000, 1200 + n)?;
            let dt = dt_achievable_nld(&model, n, eps, 1.0, CubeRule::PowerLaw, &mc)?.nld;
            let sp = sp_converse_nld(&SpChannel::RealScalar(model.clone()), n, eps, 1.0, &mc)?;
            let band = 3.0 * (dr.v / n as f64).sqrt();
            let ordered = dt <= sp;
            let dt_in = (dt - dr.delta_star).abs() <= band;
            let sp_in = (sp - dr.delta_star).abs() <= band;
            ok &= ordered && dt_in && sp_in;
            let mut flags = Vec::new();
            if !ordered {
                flags.push("DT > SP");
            }
            if !dt_in {
                flags.push("DT outside band");
            }
            if !sp_in {
                flags.push("SP outside band");
            }
            parts.push(format!(
                "n={n} ε={eps:e}: DT {dt:.4}, SP {sp:.4}, δ*−band {:.4}{}",
                dr.delta_star - band,
                if flags.is_empty() { String::new() } else { format!(" ({})", flags.join(", ")) }
            ));
        }
    }
    Ok(Outcome::new(ok, parts.join("; ")))
}

fn c13_exponent() -> Result<Outcome, CliError> {
    let model = FadingModel::rayleigh();
    let spec = QuadratureSpec::default();
    let dr = capacity_dispersion_real(&model, 1.0)?;
    let probe = ic_exponent_scalar(&model, 1.0, &[], &spec)?;
    let xc = probe.critical_x;
    let gap = 0.01 * dr.v.sqrt();
    let grid = [xc - 1.0, xc - 0.5, xc - 1e-9, xc + 1e-9, dr.delta_star - gap, dr.delta_star];
    let c = ic_exponent_scalar(&model, 1.0, &grid, &spec)?;
    let p = &c.points;
    let at_capacity = p[5].e_r;
    let slope = (p[1].e_r - p[0].e_r) / (p[1].x - p[0].x);
    let continuity = (p[2].e_r - p[3].e_r).abs();
    let ratio = near_capacity_parabola(&c, dr.v)
        .into_iter()
        .find(|r| r.gap > 0.0)
        .map_or(f64::NAN, |r| r.ratio);
    let ok = at_capacity < 1e-6
        && (slope + 1.0).abs() < 1e-9
        && (xc + 2.747).abs() <= 0.005
        && continuity < 1e-6
        && (0.95..=1.05).contains(&ratio);
    Ok(Outcome::new(
        ok,
        format!(
            "E_r(δ*) = {at_capacity:.1e}, slope {slope:.12}, δ_cr = {xc:.6}, jump {continuity:.1e}, parabola ratio {ratio:.4}"
        ),
    ))
}

fn argv(s: &str) -> Vec<std::ffi::OsString> {
    s.split_whitespace().map(Into::into).collect()
}

fn c14_determinism() -> Result<Outcome, CliError> {
    let runs = [
        "fading-ic bounds --bound sp --fading rayleigh --n 16 --delta -2.0 --samples 1e5 --seed 7",
        "fading-ic bounds --bound dt --fading rayleigh --n 20 --M 1024 --a-over-sigma 1e4 --samples 2e4 --seed 7 --format json",
        "fading-ic exponent --domain mimo --t 2 --r 2 --snr 100 --samples 2e4 --seed 7 --grid 8",
    ];
    let mut ok = true;
    for cmd in runs {
        let a = crate::render_command(argv(&format!("{cmd} --threads 1")))?;
        let b = crate::render_command(argv(&format!("{cmd} --threads 4")))?;
        let c = crate::render_command(argv(cmd))?;
        ok &= a == b && b == c;
    }
    // through files, with the manifest sidecar
    let dir = std::env::temp_dir().join(format!("fading-ic-verify-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|source| CliError::Io {
        path: dir.clone(),
        source,
    })?;
    let out = dir.join("sp.csv");
    let cmd = format!("{} --out {}", runs[0], out.display());
    let mut bytes = Vec::new();
    for _ in 0..2 {
        if crate::run(argv(&cmd)) != 0 {
            return Ok(Outcome::new(false, "file run failed"));
        }
        bytes.push(std::fs::read(&out).map_err(|source| CliError::Io {
            path: out.clone(),
            source,
        })?);
    }
    let _ = std::fs::remove_dir_all(&dir);
    ok &= bytes[0] == bytes[1];
    Ok(Outcome::new(ok, format!("{} commands byte-identical across reruns and thread counts: {ok}", runs.len())))
}
