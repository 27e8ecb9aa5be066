//! Level sets after post-composition with the Blaschke square
//! `B_a(z) = ((z − a)/(1 − az))²`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Check, ExperimentConfig, ExperimentOutput, Table};
use crate::boundary::{dyadic_h_grid, BoundaryImage};
use crate::error::Result;
use crate::row;
use crate::symbols::{blaschke_contraction_ratio, SymbolSpec, BOUNDARY_RADIUS};

const DEFAULT_SAMPLES: usize = 1 << 18;
pub const PARAMETERS: [f64; 3] = [0.3, 0.5, 0.9];
const RATIO_POINTS: usize = 20_000;

/// `4/(1 − a²)`.
pub fn kappa(a: f64) -> f64 {
    4.0 / (1.0 - a * a)
}

fn stand_ins() -> Result<Vec<(&'static str, SymbolSpec)>> {
    Ok(vec![("cusp", SymbolSpec::cusp(1.0)?), ("lens_half", SymbolSpec::lens(0.5)?)])
}

pub(super) fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let q = cfg.samples.unwrap_or(DEFAULT_SAMPLES);
    let grid = dyadic_h_grid(1, 16);
    let mut levels = Table::new("levels", &["sigma", "a", "kappa", "h", "psi_level", "sigma_level_kappa_h"]);
    let mut ratios = Table::new("contraction", &["a", "min_ratio", "floor", "ratio_at_a", "expected_at_a"]);
    let mut checks = Vec::new();

    for (name, sigma) in stand_ins()? {
        let image = BoundaryImage::sample(&sigma, q, BOUNDARY_RADIUS)?;
        for &a in &PARAMETERS {
            let b = SymbolSpec::blaschke_square(a)?;
            let psi: Vec<Complex64> = image.values().iter().map(|w| b.eval(*w)).collect::<Result<_>>()?;
            let psi = BoundaryImage::from_values(psi, image.radius());
            let k = kappa(a);
            let mut ok = true;
            for &h in &grid {
                let lhs = psi.level_fraction(h);
                let rhs = if k * h >= 1.0 { 1.0 } else { image.level_fraction(k * h) };
                ok &= lhs <= rhs;
                levels.push(row![name, a, k, h, lhs, rhs]);
            }
            checks.push(Check::new(format!("level_{name}_a{a}"), ok, "m(|psi| > 1-h) <= m(1-|sigma| <= kappa h)"));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let zs: Vec<Complex64> = (0..RATIO_POINTS)
        .map(|_| {
            Complex64::from_polar(
                rng.random::<f64>().sqrt() * (1.0 - 1e-9),
                std::f64::consts::TAU * rng.random::<f64>(),
            )
        })
        .collect();
    for &a in &PARAMETERS {
        let min = zs.iter().map(|&z| blaschke_contraction_ratio(a, z)).collect::<Result<Vec<_>>>()?;
        let min = min.into_iter().fold(f64::INFINITY, f64::min);
        let floor = (1.0 - a * a) / 4.0;
        let at_a = blaschke_contraction_ratio(a, Complex64::new(a, 0.0))?;
        let expected = 1.0 / (1.0 - a);
        ratios.push(row![a, min, floor, at_a, expected]);
        checks.push(Check::new(format!("contraction_floor_a{a}"), min >= floor, format!("min {min:.6} vs {floor:.6}")));
        checks.push(Check::new(
            format!("contraction_at_a{a}"),
            (at_a - expected).abs() <= 1e-12 * expected,
            format!("{at_a} vs {expected}"),
        ));
    }
    Ok(ExperimentOutput { tables: vec![levels, ratios], checks })
}
