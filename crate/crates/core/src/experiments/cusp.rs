//! Cusp map on the diagonal of the polydisk: `e^{−d√n}` decay.

use super::{slope, Check, ExperimentConfig, ExperimentOutput, Table};
use crate::boundary::{dyadic_h_grid, rho_profile};
use crate::error::Result;
use crate::kernel::KernelRouteConfig;
use crate::operator::build_diagonal_polydisk_matrix;
use crate::row;
use crate::spectra::{
    decay_fit, kernel_spectrum, resolved_range, singular_values, upper_bound_weighted, DecayModel, RhoSource,
    SingularSpectrum,
};
use crate::symbols::{SymbolSpec, BOUNDARY_RADIUS};

pub const DEFAULT_K: usize = 1024;
pub const FIT_RANGE: (usize, usize) = (20, 300);
const N_MAX: usize = 300;
const RHO_SAMPLES: usize = 1 << 18;

/// `log s_n ≈ C − d√n` on a resolved range, with `C` raised until it
/// dominates every point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqrtFit {
    pub d: f64,
    pub c: f64,
    pub range: (usize, usize),
}

pub fn sqrt_fit(s: &SingularSpectrum, range: (usize, usize)) -> Option<SqrtFit> {
    let (lo, hi) = resolved_range(s, range);
    if hi < lo + 5 {
        return None;
    }
    let xs: Vec<f64> = (lo..=hi).map(|n| (n as f64).sqrt()).collect();
    let ys: Vec<f64> = (lo..=hi).map(|n| s.get(n).expect("in range").ln()).collect();
    let d = -slope(&xs, &ys);
    let c = xs.iter().zip(&ys).map(|(x, y)| y + d * x).fold(f64::NEG_INFINITY, f64::max);
    Some(SqrtFit { d, c, range: (lo, hi) })
}

pub(super) fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let k = cfg.k.unwrap_or(DEFAULT_K);
    let cusp = SymbolSpec::cusp(1.0)?;
    let dims: Vec<usize> = match cfg.n_dim {
        Some(n) => vec![n],
        None => vec![1, 2, 3],
    };
    let profile = rho_profile(&cusp, &dyadic_h_grid(1, 16), cfg.samples.unwrap_or(RHO_SAMPLES), BOUNDARY_RADIUS)?;

    let mut spectra = Table::new("spectra", &["n_dim", "n", "a_kernel", "s_section", "bound_weighted", "bound_scaled"]);
    let mut fits = Table::new("fits", &["n_dim", "model", "alpha", "rate", "prefactor", "r2", "lo", "hi"]);
    let mut checks = Vec::new();

    for &n_dim in &dims {
        let (conv, _) = kernel_spectrum(&cusp, &KernelRouteConfig::with_dim(n_dim), N_MAX)?;
        let section = singular_values(&build_diagonal_polydisk_matrix(&cusp, n_dim, k)?, N_MAX.min(k))?;
        let gamma = n_dim as f64 - 2.0;
        let src = RhoSource::Profile(&profile);
        let bounds: Vec<f64> =
            (1..=conv.len()).map(|n| upper_bound_weighted(&src, n as u64, gamma)).collect::<Result<_>>()?;
        let resolved = conv.resolved_len(crate::spectra::RESOLVED_FLOOR);
        let scale = (1..=resolved).map(|n| conv.get(n).expect("in range") / bounds[n - 1]).fold(0.0f64, f64::max);
        for n in 1..=conv.len() {
            spectra.push(row![
                n_dim,
                n,
                conv.get(n).expect("in range"),
                section.get(n).unwrap_or(0.0),
                bounds[n - 1],
                scale * bounds[n - 1],
            ]);
        }

        let range = resolved_range(&conv, FIT_RANGE);
        let se = decay_fit(&conv, DecayModel::StretchedExp, range)?;
        fits.push(row![n_dim, "stretched_exp", se.alpha, se.rate, se.prefactor, se.r2, range.0, range.1]);
        let sq = sqrt_fit(&conv, FIT_RANGE);
        if let Some(f) = sq {
            fits.push(row![n_dim, "sqrt", 0.5, f.d, f.c.exp(), f64::NAN, f.range.0, f.range.1]);
        }
        if n_dim >= 2 {
            let d = sq.map(|f| f.d).unwrap_or(f64::NAN);
            checks.push(Check::new(
                format!("n{n_dim}_alpha"),
                se.alpha >= 0.45,
                format!("stretched-exp alpha {:.4} over [{}, {}]", se.alpha, range.0, range.1),
            ));
            checks.push(Check::new(format!("n{n_dim}_sqrt_rate"), d > 0.0, format!("d = {d:.4}")));
        }
    }

    let mut rho = Table::new("rho", &["h", "rho_hat", "rho_upper", "level_hat"]);
    for i in 0..profile.h.len() {
        rho.push(row![profile.h[i], profile.rho_hat[i], profile.rho_upper[i], profile.level_hat[i]]);
    }
    Ok(ExperimentOutput { tables: vec![spectra, fits, rho], checks })
}
