//! Shapiro–Taylor maps: polynomial decay near `n^{−θ/2}` and the
//! Hilbert–Schmidt threshold at `θ = 2`.

use super::{Check, ExperimentConfig, ExperimentOutput, Table};
use crate::error::Result;
use crate::operator::{build_matrix, hs_norm_sq, HsReport};
use crate::row;
use crate::series::SpaceParam;
use crate::spectra::{
    decay_fit, ladder_lower_bounds, singular_values, DecayModel, KernelLadder, LadderInfo, SingularSpectrum,
};
use crate::symbols::SymbolSpec;

pub const FIT_RANGE: (usize, usize) = (20, 200);
pub const HS_TERMS: u64 = 1 << 48;
const DEFAULT_K: usize = 512;

/// Ladder lower bounds for `a_n` of the Shapiro–Taylor map with default `ε`.
pub fn st_spectrum(theta: f64) -> Result<(SingularSpectrum, LadderInfo)> {
    ladder_lower_bounds(&SymbolSpec::shapiro_taylor(theta)?, &KernelLadder::default())
}

pub fn hs_trend(theta: f64) -> Result<HsReport> {
    hs_norm_sq(&SymbolSpec::shapiro_taylor(theta)?, HS_TERMS)
}

/// Polynomial rate and the scaled sequence `n^{θ/2} s_n` over [`FIT_RANGE`].
#[derive(Clone, Debug, PartialEq)]
pub struct StFit {
    pub theta: f64,
    pub p: f64,
    pub r2: f64,
    pub scaled_first: f64,
    pub scaled_min: f64,
}

impl StFit {
    /// `n^{θ/2} s_n` stays above half its value at the start of the range.
    pub fn bounded_below(&self) -> bool {
        self.scaled_min >= 0.5 * self.scaled_first
    }

    pub fn rate_ok(&self) -> bool {
        self.p <= self.theta / 2.0 + 0.3
    }
}

pub fn st_fit(theta: f64, s: &SingularSpectrum) -> Result<StFit> {
    let f = decay_fit(s, DecayModel::Poly, FIT_RANGE)?;
    let scaled: Vec<f64> =
        (FIT_RANGE.0..=FIT_RANGE.1).map(|n| (n as f64).powf(theta / 2.0) * s.get(n).expect("in range")).collect();
    Ok(StFit {
        theta,
        p: f.rate,
        r2: f.r2,
        scaled_first: scaled[0],
        scaled_min: scaled.iter().copied().fold(f64::INFINITY, f64::min),
    })
}

pub(super) fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let thetas = match cfg.theta {
        Some(t) => vec![t],
        None => vec![1.5, 2.0, 3.0],
    };
    let k = cfg.k.unwrap_or(DEFAULT_K);
    let mut spectra = Table::new("spectra", &["theta", "n", "a_lower", "scaled", "s_section"]);
    let mut fits = Table::new("fits", &["theta", "p", "r2", "scaled_first", "scaled_min", "gram_min_eig"]);
    let mut hs = Table::new("hs", &["theta", "terms", "partial", "block_exponent", "trend"]);
    let mut checks = Vec::new();
    for &theta in &thetas {
        let (s, info) = st_spectrum(theta)?;
        let section = singular_values(
            &build_matrix(&SymbolSpec::shapiro_taylor(theta)?, k, SpaceParam::hardy())?,
            k.min(s.len()),
        )?;
        for n in 1..=s.len() {
            let v = s.get(n).expect("in range");
            spectra.push(row![theta, n, v, (n as f64).powf(theta / 2.0) * v, section.get(n).unwrap_or(0.0)]);
        }
        let f = st_fit(theta, &s)?;
        fits.push(row![theta, f.p, f.r2, f.scaled_first, f.scaled_min, info.gram_min_eig]);
        if theta <= 2.0 {
            checks.push(Check::new(
                format!("theta{theta}_rate"),
                f.rate_ok(),
                format!("p {:.4} vs {:.4}", f.p, theta / 2.0 + 0.3),
            ));
            checks.push(Check::new(
                format!("theta{theta}_bounded_below"),
                f.bounded_below(),
                format!("min {:.4e}, first {:.4e}", f.scaled_min, f.scaled_first),
            ));
        }
        let r = hs_trend(theta)?;
        let trend = format!("{:?}", r.trend).to_lowercase();
        hs.push(row![theta, HS_TERMS, r.partial, r.block_exponent.unwrap_or(f64::NAN), trend.clone()]);
        if (theta - 2.0).abs() > 1e-12 {
            let want = if theta < 2.0 { "diverging" } else { "converging" };
            checks.push(Check::new(format!("theta{theta}_hs"), trend == want, format!("{trend}, expected {want}")));
        }
    }
    Ok(ExperimentOutput { tables: vec![spectra, fits, hs], checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_on_exact_power_law() {
        let s = SingularSpectrum::from_fn(300, |n| (n as f64).powf(-0.75)).unwrap();
        let f = st_fit(1.5, &s).unwrap();
        assert!((f.p - 0.75).abs() < 1e-10);
        assert!((f.scaled_min - 1.0).abs() < 1e-10 && f.bounded_below() && f.rate_ok());
    }
}
