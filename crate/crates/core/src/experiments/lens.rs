//! Lens maps on the diagonal: compact, bounded non-compact, or unbounded
//! depending on `θ` against `1/N`.

use num_complex::Complex64;

use super::{slope, Check, ExperimentConfig, ExperimentOutput, Table};
use crate::error::Result;
use crate::kernel::KernelRouteConfig;
use crate::operator::kernel_ratio;
use crate::row;
use crate::special::median;
use crate::spectra::{decay_fit, kernel_spectrum, resolved_range, DecayModel};
use crate::symbols::{KernelPoint, PolySymbolSpec, SymbolSpec};

pub const MAX_J: u32 = 30;
const N_MAX: usize = 300;

/// Kernel ratios along `a = (r, 0, ..., 0)`, `r = 1 − 2^{−j}`.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioSweep {
    pub n_dim: usize,
    pub theta: f64,
    pub j: Vec<u32>,
    pub ratio: Vec<f64>,
    /// Slope of `log ratio` against `log 1/(1−r)`.
    pub slope: f64,
    pub median: f64,
    pub min: f64,
}

impl RatioSweep {
    /// Slope predicted by the lens boundary law, `(Nθ − 1)/2`.
    pub fn predicted_slope(&self) -> f64 {
        (self.n_dim as f64 * self.theta - 1.0) / 2.0
    }
}

pub fn lens_ratio_sweep(n_dim: usize, theta: f64, max_j: u32) -> Result<RatioSweep> {
    let poly = PolySymbolSpec::on_first(SymbolSpec::lens(theta)?, n_dim)?;
    let j: Vec<u32> = (1..=max_j).collect();
    let mut ratio = Vec::with_capacity(j.len());
    for &jj in &j {
        let mut a = vec![Complex64::new(0.0, 0.0); n_dim];
        a[0] = Complex64::new(1.0 - 2f64.powi(-(jj as i32)), 0.0);
        ratio.push(kernel_ratio(&poly, &KernelPoint::new(a)?)?);
    }
    let xs: Vec<f64> = j.iter().map(|&jj| jj as f64 * std::f64::consts::LN_2).collect();
    let ys: Vec<f64> = ratio.iter().map(|r| r.ln()).collect();
    Ok(RatioSweep {
        n_dim,
        theta,
        slope: slope(&xs, &ys),
        median: median(&ratio),
        min: ratio.iter().copied().fold(f64::INFINITY, f64::min),
        j,
        ratio,
    })
}

pub(super) fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let n_dim = cfg.n_dim.unwrap_or(2);
    let nf = n_dim as f64;
    let thetas: Vec<f64> = match cfg.theta {
        Some(t) => vec![t],
        None => [1.0 / (2.0 * nf), 1.0 / nf, 2.0 / nf].into_iter().filter(|t| *t <= 1.0).collect(),
    };

    let mut ratios = Table::new("ratios", &["n_dim", "theta", "j", "r", "ratio"]);
    let mut summary = Table::new("summary", &["n_dim", "theta", "regime", "slope", "predicted_slope", "median", "min"]);
    let mut spectra = Table::new("spectra", &["n_dim", "theta", "n", "a_kernel"]);
    let mut fits = Table::new("fits", &["n_dim", "theta", "alpha", "rate", "r2", "lo", "hi"]);
    let mut checks = Vec::new();

    for &theta in &thetas {
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(crate::error::invalid("lens theta must lie in (0, 1]"));
        }
        let sweep = lens_ratio_sweep(n_dim, theta, MAX_J)?;
        for (j, r) in sweep.j.iter().zip(&sweep.ratio) {
            ratios.push(row![n_dim, theta, *j, 1.0 - 2f64.powi(-(*j as i32)), *r]);
        }
        let critical = (nf * theta - 1.0).abs() < 1e-12;
        let regime = if critical {
            "bounded_not_compact"
        } else if nf * theta > 1.0 {
            "unbounded"
        } else {
            "compact"
        };
        let predicted = sweep.predicted_slope();
        summary.push(row![n_dim, theta, regime, sweep.slope, predicted, sweep.median, sweep.min]);
        let tag = format!("theta_{theta}");
        if critical {
            checks.push(Check::new(
                format!("{tag}_flat"),
                sweep.slope.abs() <= 0.02,
                format!("slope {:.4}", sweep.slope),
            ));
            checks.push(Check::new(
                format!("{tag}_non_vanishing"),
                sweep.min >= 0.5 * sweep.median,
                format!("min {:.4e}, median {:.4e}", sweep.min, sweep.median),
            ));
        } else {
            checks.push(Check::new(
                format!("{tag}_slope"),
                (sweep.slope - predicted).abs() <= 0.05,
                format!("slope {:.4}, predicted {predicted:.4}", sweep.slope),
            ));
        }

        if nf * theta < 1.0 && !critical {
            let (s, _) = kernel_spectrum(&SymbolSpec::lens(theta)?, &KernelRouteConfig::with_dim(n_dim), N_MAX)?;
            for n in 1..=s.len() {
                spectra.push(row![n_dim, theta, n, s.get(n).expect("in range")]);
            }
            let range = resolved_range(&s, (20, N_MAX));
            let f = decay_fit(&s, DecayModel::StretchedExp, range)?;
            fits.push(row![n_dim, theta, f.alpha, f.rate, f.r2, range.0, range.1]);
            checks.push(Check::new(
                format!("{tag}_spectrum_decays"),
                f.rate > 0.0 && f.r2 >= 0.98,
                format!("alpha {:.4}, rate {:.4}, r2 {:.5}", f.alpha, f.rate, f.r2),
            ));
        }
    }
    Ok(ExperimentOutput { tables: vec![ratios, summary, spectra, fits], checks })
}
