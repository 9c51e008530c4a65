use crate::error::{domain, Error, Result};
use crate::numeric::quadrature::{integrate, integrate_breakpoints, Domain, QuadratureSpec};
use crate::numeric::special::{digamma, ln_gamma, trigamma};
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::Serialize;

/// Marginal law of the fading amplitude H ≥ 0, normalized to E{H²} = 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum FadingModel {
    /// H ≡ 1.
    Awgn,
    /// Nakagami-m amplitude, m ≥ ½. Rayleigh is m = 1.
    Nakagami { m: f64 },
    Tabulated(TabulatedPdf),
}

/// Piecewise-linear density on a strictly increasing grid of positive h.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TabulatedPdf {
    h: Vec<f64>,
    density: Vec<f64>,
    #[serde(skip)]
    cdf: Vec<f64>,
    /// Factor applied to h to reach unit power.
    pub scale: f64,
}

impl TabulatedPdf {
    /// Builds a density from `(h, f(h))` pairs, normalizing it to unit mass
    /// and rescaling h so that E{H²} = 1.
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidModel("tabulated density needs at least two points".into()));
        }
        for (i, &(h, f)) in points.iter().enumerate() {
            if !(h > 0.0) || !h.is_finite() {
                return Err(Error::InvalidModel(format!("grid point {i}: h = {h} must be positive")));
            }
            if !(f >= 0.0) || !f.is_finite() {
                return Err(Error::InvalidModel(format!("grid point {i}: density {f} must be nonnegative")));
            }
            if i > 0 && !(h > points[i - 1].0) {
                return Err(Error::InvalidModel(format!("grid not strictly increasing at point {i}")));
            }
        }
        let h: Vec<f64> = points.iter().map(|p| p.0).collect();
        let f: Vec<f64> = points.iter().map(|p| p.1).collect();
        let mass = segment_integrals(&h, &f, |_| 1.0).iter().sum::<f64>();
        if !(mass > 0.0) {
            return Err(Error::InvalidModel("density has zero mass".into()));
        }
        let f: Vec<f64> = f.iter().map(|v| v / mass).collect();
        // Simpson is exact for the cubic h²·f(h) on each segment
        let power: f64 = segment_integrals(&h, &f, |x| x * x).iter().sum();
        let scale = 1.0 / power.sqrt();
        let h: Vec<f64> = h.iter().map(|v| v * scale).collect();
        let density: Vec<f64> = f.iter().map(|v| v / scale).collect();
        let mut cdf = Vec::with_capacity(h.len());
        cdf.push(0.0);
        for s in segment_integrals(&h, &density, |_| 1.0) {
            cdf.push(cdf.last().unwrap() + s);
        }
        Ok(Self { h, density, cdf, scale })
    }

    /// Parses two-column `h,density` text. A non-numeric first line is
    /// treated as a header.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split([',', ';', '\t']).map(str::trim);
            let parsed = match (cols.next(), cols.next()) {
                (Some(a), Some(b)) => a.parse::<f64>().ok().zip(b.parse::<f64>().ok()),
                _ => None,
            };
            match parsed {
                Some(p) => points.push(p),
                None if points.is_empty() && lineno == 0 => continue,
                None => return Err(Error::InvalidModel(format!("line {}: expected two numeric columns", lineno + 1))),
            }
        }
        Self::new(&points)
    }

    pub fn grid(&self) -> &[f64] {
        &self.h
    }

    pub fn density_values(&self) -> &[f64] {
        &self.density
    }

    pub fn density(&self, x: f64) -> f64 {
        if x < self.h[0] || x > *self.h.last().unwrap() {
            return 0.0;
        }
        let i = self.h.partition_point(|&v| v <= x).saturating_sub(1).min(self.h.len() - 2);
        let t = (x - self.h[i]) / (self.h[i + 1] - self.h[i]);
        self.density[i] + t * (self.density[i + 1] - self.density[i])
    }

    fn inverse_cdf(&self, u: f64) -> f64 {
        let total = *self.cdf.last().unwrap();
        let u = u * total;
        let i = self.cdf.partition_point(|&c| c <= u).saturating_sub(1).min(self.h.len() - 2);
        let width = self.h[i + 1] - self.h[i];
        let f0 = self.density[i];
        let slope = (self.density[i + 1] - f0) / width;
        let r = u - self.cdf[i];
        // solve f0·t + slope·t²/2 = r on the segment
        let disc = (f0 * f0 + 2.0 * slope * r).max(0.0);
        let t = if f0 + disc.sqrt() > 0.0 { 2.0 * r / (f0 + disc.sqrt()) } else { 0.0 };
        (self.h[i] + t.clamp(0.0, width)).min(self.h[i + 1])
    }
}

fn segment_integrals(h: &[f64], f: &[f64], w: impl Fn(f64) -> f64) -> Vec<f64> {
    h.windows(2)
        .zip(f.windows(2))
        .map(|(hw, fw)| {
            let mid = 0.5 * (hw[0] + hw[1]);
            let fm = 0.5 * (fw[0] + fw[1]);
            (hw[1] - hw[0]) / 6.0 * (w(hw[0]) * fw[0] + 4.0 * w(mid) * fm + w(hw[1]) * fw[1])
        })
        .collect()
}

/// Moments of ½ln H².
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogFadingMoments {
    pub mean_half_log_sq: f64,
    pub var_half_log_sq: f64,
    pub abs_third_central: f64,
    pub all_finite: bool,
}

/// Small-h behaviour of the density, f(h) ∝ h^{α−1}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegularityReport {
    pub alpha: Option<f64>,
    pub is_regular: bool,
}

impl FadingModel {
    pub fn rayleigh() -> Self {
        FadingModel::Nakagami { m: 1.0 }
    }

    pub fn nakagami(m: f64) -> Result<Self> {
        if !(m >= 0.5) || !m.is_finite() {
            return Err(Error::InvalidModel(format!("Nakagami shape m = {m} must be at least 0.5")));
        }
        Ok(FadingModel::Nakagami { m })
    }

    pub fn tabulated(points: &[(f64, f64)]) -> Result<Self> {
        TabulatedPdf::new(points).map(FadingModel::Tabulated)
    }

    pub fn name(&self) -> String {
        match self {
            FadingModel::Awgn => "awgn".into(),
            FadingModel::Nakagami { m } if *m == 1.0 => "rayleigh".into(),
            FadingModel::Nakagami { m } => format!("nakagami(m={m})"),
            FadingModel::Tabulated(t) => format!("tabulated({} points)", t.h.len()),
        }
    }

    /// Amplitude density; `None` for the degenerate AWGN law.
    pub fn density(&self, h: f64) -> Option<f64> {
        match self {
            FadingModel::Awgn => None,
            FadingModel::Nakagami { m } => Some(if h > 0.0 { nakagami_ln_density_v(*m, h.ln()).exp() / h } else { 0.0 }),
            FadingModel::Tabulated(t) => Some(t.density(h)),
        }
    }

    /// E{g(ln H)}; `kinks` are points in the log domain where g is not smooth.
    pub fn expect_log<G: Fn(f64) -> f64>(&self, g: G, spec: &QuadratureSpec, kinks: &[f64]) -> Result<f64> {
        match self {
            FadingModel::Awgn => Ok(g(0.0)),
            FadingModel::Nakagami { m } => {
                let m = *m;
                let norm = nakagami_ln_norm(m);
                let integrand = |v: f64| {
                    let p = (norm + 2.0 * m * v - m * (2.0 * v).exp()).exp();
                    if p == 0.0 {
                        0.0
                    } else {
                        g(v) * p
                    }
                };
                let mut points: Vec<f64> = kinks.iter().copied().filter(|k| k.is_finite()).collect();
                // mode of the log-domain density sits at v = 0
                points.push(0.0);
                points.sort_by(f64::total_cmp);
                points.dedup();
                let mut sum = integrate(integrand, spec, Domain::LowerHalfLine(points[0]))?;
                sum += integrate_breakpoints(integrand, spec, &points)?;
                sum += integrate(integrand, spec, Domain::UpperHalfLine(*points.last().unwrap()))?;
                Ok(sum)
            }
            FadingModel::Tabulated(t) => {
                let mut points: Vec<f64> = t.h.clone();
                for k in kinks {
                    let hk = k.exp();
                    if hk > t.h[0] && hk < *t.h.last().unwrap() {
                        points.push(hk);
                    }
                }
                points.sort_by(f64::total_cmp);
                points.dedup();
                integrate_breakpoints(|h| g(h.ln()) * t.density(h), spec, &points)
            }
        }
    }

    /// E{g(H)}.
    pub fn expect<G: Fn(f64) -> f64>(&self, g: G, spec: &QuadratureSpec) -> Result<f64> {
        self.expect_log(|v| g(v.exp()), spec, &[])
    }

    pub fn log_moments(&self, spec: &QuadratureSpec) -> Result<LogFadingMoments> {
        let (mean, var) = match self {
            FadingModel::Awgn => {
                return Ok(LogFadingMoments {
                    mean_half_log_sq: 0.0,
                    var_half_log_sq: 0.0,
                    abs_third_central: 0.0,
                    all_finite: true,
                })
            }
            FadingModel::Nakagami { m } => ((digamma(*m)? - m.ln()) / 2.0, trigamma(*m)? / 4.0),
            FadingModel::Tabulated(_) => {
                let mean = self.expect_log(|v| v, spec, &[])?;
                let var = self.expect_log(|v| (v - mean) * (v - mean), spec, &[mean])?;
                (mean, var)
            }
        };
        let third = self.expect_log(|v| (v - mean).abs().powi(3), spec, &[mean])?;
        if !(mean.is_finite() && var.is_finite() && third.is_finite()) {
            return Err(Error::MomentDivergence {
                moment: "E{ln² H}".into(),
                detail: format!("{} has non-finite log moments", self.name()),
            });
        }
        Ok(LogFadingMoments {
            mean_half_log_sq: mean,
            var_half_log_sq: var,
            abs_third_central: third,
            all_finite: true,
        })
    }

    pub fn sample_h<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            FadingModel::Awgn => 1.0,
            FadingModel::Nakagami { m } => {
                // shape m, scale 1/m: valid by construction
                let g = Gamma::new(*m, 1.0 / *m).expect("validated Nakagami shape");
                g.sample(rng).sqrt()
            }
            FadingModel::Tabulated(t) => t.inverse_cdf(rng.random::<f64>()),
        }
    }

    /// Exponent α of the density near zero.
    pub fn regularity_exponent(&self) -> RegularityReport {
        match self {
            FadingModel::Awgn => RegularityReport {
                alpha: None,
                is_regular: true,
            },
            FadingModel::Nakagami { m } => RegularityReport {
                alpha: Some(2.0 * m),
                is_regular: true,
            },
            FadingModel::Tabulated(t) => {
                let h0 = t.h[0];
                if h0 > 0.1 {
                    return RegularityReport {
                        alpha: None,
                        is_regular: false,
                    };
                }
                let pts: Vec<(f64, f64)> = t
                    .h
                    .iter()
                    .zip(&t.density)
                    .filter(|(h, f)| **h <= 10.0 * h0 && **f > 0.0)
                    .map(|(h, f)| (h.ln(), f.ln()))
                    .collect();
                match log_log_slope(&pts) {
                    Some(slope) if slope + 1.0 > 0.0 => RegularityReport {
                        alpha: Some(slope + 1.0),
                        is_regular: true,
                    },
                    _ => RegularityReport {
                        alpha: None,
                        is_regular: false,
                    },
                }
            }
        }
    }
}

fn log_log_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn nakagami_ln_norm(m: f64) -> f64 {
    std::f64::consts::LN_2 + m * m.ln() - ln_gamma(m).unwrap_or(f64::NAN)
}

// log density of V = ln H for Nakagami-m
fn nakagami_ln_density_v(m: f64, v: f64) -> f64 {
    nakagami_ln_norm(m) + 2.0 * m * v - m * (2.0 * v).exp()
}

pub(crate) fn check_positive(name: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(domain(name, format!("{x} must be positive and finite")))
    }
}
