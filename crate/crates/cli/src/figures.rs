//! Plot data for each figure class. No rendering.

use crate::args::FiguresArgs;
use crate::commands::{mc_config, Output};
use crate::error::{usage, CliError};
use crate::output::Table;
use fading_ic::fading::{FadingModel, FadingProcess};
use fading_ic::mimo::{bdut_optimize, mimo_capacity_fdt, mimo_dispersion_fdt, mimo_vs_parallel_gaps, MimoConfig};
use fading_ic::monte_carlo::log_chi2::{log_chi2_error, log_chi2_error_approx, log_chi2_tv_error};
use fading_ic::numeric::quadrature::QuadratureSpec;
use fading_ic::scalar::{capacity_dispersion_real, memory_dispersion, power_constrained_dispersion};
use serde_json::json;

pub struct Figure {
    pub name: &'static str,
    pub about: &'static str,
    build: fn(&FiguresArgs) -> Result<Output, CliError>,
}

pub const REGISTRY: &[Figure] = &[
    Figure {
        name: "nakagami-dispersion",
        about: "V against the Nakagami shape m",
        build: nakagami_dispersion,
    },
    Figure {
        name: "power-constrained-dispersion",
        about: "Rayleigh V with input power constraint against SNR",
        build: power_constrained,
    },
    Figure {
        name: "ar1-dispersion",
        about: "V of a Gaussian AR(1) fading process against its coefficient",
        build: ar1_dispersion,
    },
    Figure {
        name: "mimo-vs-r",
        about: "MIMO capacity and dispersion against receive antennas",
        build: mimo_vs_r,
    },
    Figure {
        name: "parallel-gaps",
        about: "VNR (dB) and dispersion gaps of t×t MIMO against t parallel channels",
        build: parallel_gaps,
    },
    Figure {
        name: "bdut-3x3",
        about: "BDUT-constrained 3×3 capacity and dispersion against 1/σ²",
        build: bdut_3x3,
    },
    Figure {
        name: "log-chi2-error",
        about: "Normalized log-chi-square density error against the normal",
        build: log_chi2,
    },
];

pub fn registry_listing() -> String {
    REGISTRY.iter().map(|f| format!("  {:<30}{}", f.name, f.about)).collect::<Vec<_>>().join("\n")
}

pub fn figure(a: &FiguresArgs) -> Result<Output, CliError> {
    let f = REGISTRY
        .iter()
        .find(|f| f.name == a.name)
        .ok_or_else(|| usage(format!("unknown figure `{}`; available:\n{}", a.name, registry_listing())))?;
    (f.build)(a)
}

fn plain(table: Table) -> Output {
    Output {
        table,
        seed: None,
        failure: None,
    }
}

fn nakagami_dispersion(_: &FiguresArgs) -> Result<Output, CliError> {
    let mut t = Table::new(&["m", "v"]);
    for k in 0..=20 {
        let m = 0.5 * 2f64.powf(k as f64 / 4.0);
        let v = capacity_dispersion_real(&FadingModel::nakagami(m)?, 1.0)?.v;
        t.push(vec![m.into(), v.into()]);
    }
    t.meta("v_awgn", 0.5);
    Ok(plain(t))
}

fn power_constrained(_: &FiguresArgs) -> Result<Output, CliError> {
    let spec = QuadratureSpec::default();
    let model = FadingModel::rayleigh();
    let mut t = Table::new(&["snr_db", "v"]);
    for k in 0..=14 {
        let db = -10.0 + 5.0 * k as f64;
        let v = power_constrained_dispersion(&model, 10f64.powf(db / 10.0), &spec)?;
        t.push(vec![db.into(), v.into()]);
    }
    t.meta("v_unconstrained", capacity_dispersion_real(&model, 1.0)?.v);
    Ok(plain(t))
}

fn ar1_dispersion(a: &FiguresArgs) -> Result<Output, CliError> {
    let mc = mc_config(&a.mc)?;
    let mut t = Table::new(&["a", "v", "v_std_err"]);
    for k in 0..10 {
        let c = k as f64 / 10.0;
        let d = memory_dispersion(&FadingProcess::gauss_ar1(c)?, 1.0, &mc)?;
        t.push(vec![c.into(), d.v.into(), d.v_std_err.into()]);
    }
    Ok(Output {
        table: t,
        seed: Some(mc.seed),
        failure: None,
    })
}

fn mimo_vs_r(a: &FiguresArgs) -> Result<Output, CliError> {
    let tx = a.t.unwrap_or(2);
    let mut t = Table::new(&["r", "delta_star", "v"]);
    for r in tx.max(1)..=64 {
        let cfg = MimoConfig::new(tx, r, 1.0).map_err(|e| CliError::from(e).as_usage())?;
        t.push(vec![r.into(), mimo_capacity_fdt(&cfg)?.into(), mimo_dispersion_fdt(&cfg)?.into()]);
    }
    t.meta("t", tx);
    t.meta("v_limit", tx);
    Ok(plain(t))
}

fn parallel_gaps(_: &FiguresArgs) -> Result<Output, CliError> {
    let mut t = Table::new(&["t", "delta_mu_db", "delta_v"]);
    for k in 1..=16 {
        let g = mimo_vs_parallel_gaps(k)?;
        t.push(vec![k.into(), g.vnr_gap_db.into(), g.v_gap.into()]);
    }
    Ok(plain(t))
}

fn bdut_3x3(_: &FiguresArgs) -> Result<Output, CliError> {
    let mut t = Table::new(&["inv_sigma2", "delta_star", "v"]);
    let mut regions: Vec<(u32, f64)> = Vec::new();
    let mut crossovers = Vec::new();
    for k in 0..=40 {
        let x = 10f64.powf(k as f64 / 20.0);
        let b = bdut_optimize(&MimoConfig::new(3, 3, 1.0 / x)?)?;
        if regions.last().map(|r| r.0) != Some(b.t_opt) {
            regions.push((b.t_opt, x));
        }
        crossovers = b.crossovers;
        t.push(vec![x.into(), b.delta_star.into(), b.v.into()]);
    }
    t.meta("crossovers", &crossovers);
    t.meta("t_opt_order", regions.iter().map(|r| r.0).collect::<Vec<_>>());
    t.meta("qualifier", "BDUT-constrained");
    Ok(plain(t))
}

fn log_chi2(a: &FiguresArgs) -> Result<Output, CliError> {
    let n = a.n.unwrap_or(10_000) as f64;
    let summary = log_chi2_tv_error(n).map_err(|e| CliError::from(e).as_usage())?;
    let mut t = Table::new(&["y", "e_n", "approx"]);
    for k in 0..=200 {
        let y = -5.0 + 0.05 * k as f64;
        t.push(vec![y.into(), log_chi2_error(y, n)?.into(), log_chi2_error_approx(y, n).into()]);
    }
    t.meta("n", n);
    t.meta("tv", summary.tv);
    t.meta("tv_approx", summary.approx);
    t.meta(
        "peaks",
        summary.peaks.iter().map(|p| json!({"y": p.y, "value": p.value})).collect::<Vec<_>>(),
    );
    Ok(plain(t))
}
