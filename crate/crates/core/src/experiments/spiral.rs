//! Harmonic measure in the spiral region: vertical tail, level sets of
//! `|e^{−f}|` and the covering multiplicity of `e^{−z}`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{slope, Check, ExperimentConfig, ExperimentOutput, Table};
use crate::error::Result;
use crate::harmonic::{
    covering_count, level_set_predicate, score, wos_harmonic_measure, wos_sample, RegionOmega, UnitDisk,
    UpperHalfPlane, EPS_ABSORB,
};
use crate::row;

pub const DEFAULT_SAMPLES: usize = 1_000_000;
/// Heights above `α` at which the tail `ω({Im > y})` is scored.
pub const TAIL_OFFSETS: [f64; 9] = [1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 2.75, 3.0];
pub const LEVEL_H: [f64; 5] = [0.5, 0.25, 0.1, 0.05, 0.025];
/// Levels used to fit the constant; the others are checked against it.
const LEVEL_FIT: usize = 2;
pub const COVERING_SAMPLES: usize = 100_000;
const HARNESS_SAMPLES: usize = 100_000;

/// Slope of `log p` against `y`, over the points with `p > 0`.
pub fn tail_slope(ys: &[f64], ps: &[f64]) -> (f64, usize) {
    let (x, l): (Vec<f64>, Vec<f64>) = ys.iter().zip(ps).filter(|(_, p)| **p > 0.0).map(|(y, p)| (*y, p.ln())).unzip();
    let used = x.len();
    (slope(&x, &l), used)
}

/// Histogram of covering counts `[#0, #1, #2, #more]` on uniform points of
/// the punctured disk.
pub fn covering_histogram(region: &RegionOmega, samples: usize, seed: u64) -> Result<[u64; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hist = [0u64; 4];
    let mut drawn = 0;
    while drawn < samples {
        let w = Complex64::from_polar(rng.random::<f64>().sqrt(), TAU * rng.random::<f64>());
        if w.norm() == 0.0 {
            continue;
        }
        drawn += 1;
        hist[(covering_count(region, w)? as usize).min(3)] += 1;
    }
    Ok(hist)
}

pub(super) fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let region = RegionOmega::default();
    let samples = cfg.samples.unwrap_or(DEFAULT_SAMPLES);
    let walks = wos_sample(&region, samples, EPS_ABSORB, cfg.seed)?;
    let mut checks = Vec::new();

    let mut tail =
        Table::new("tail", &["y_offset", "y", "probability", "ci_halfwidth", "samples", "capped", "far_field"]);
    let ys: Vec<f64> = TAIL_OFFSETS.iter().map(|o| region.alpha + o).collect();
    let mut ps = Vec::with_capacity(ys.len());
    for (o, &y) in TAIL_OFFSETS.iter().zip(&ys) {
        let e = score(&walks, &|w: Complex64| w.im > y, EPS_ABSORB, cfg.seed);
        tail.push(row![*o, y, e.probability, e.ci_halfwidth, e.samples, e.capped, e.far_field]);
        ps.push(e.probability);
    }
    let (tslope, used) = tail_slope(&ys, &ps);
    checks.push(Check::new(
        "tail_slope",
        used == ys.len() && tslope <= -0.9,
        format!("slope {tslope:.4} from {used} of {} heights", ys.len()),
    ));

    let mut level = Table::new("level", &["h", "probability", "ci_halfwidth", "bound", "ratio"]);
    let mut est = Vec::new();
    for &h in &LEVEL_H {
        let e = score(&walks, &level_set_predicate(h), EPS_ABSORB, cfg.seed);
        let bound = (5.0 * PI - region.g.value(2.0 * h)).exp();
        est.push((h, e.probability, e.ci_halfwidth, bound));
    }
    let c_hat = est[..LEVEL_FIT].iter().map(|(_, p, _, b)| p / b).fold(0.0f64, f64::max);
    for &(h, p, ci, b) in &est {
        level.push(row![h, p, ci, b, p / b]);
    }
    let fine_ok = est[LEVEL_FIT..].iter().all(|(_, p, _, b)| *p <= c_hat * b);
    let fine_hits = est[LEVEL_FIT..].iter().filter(|e| e.1 > 0.0).count();
    checks.push(Check::new(
        "level_set_bound",
        c_hat.is_finite() && fine_ok,
        format!("C = {c_hat:.4e} fitted at h >= {}; {fine_hits} finer levels with hits", LEVEL_H[LEVEL_FIT - 1]),
    ));

    let hist = covering_histogram(&region, COVERING_SAMPLES, cfg.seed ^ 0x5eed_c0fe)?;
    let mut covering = Table::new("covering", &["count", "frequency"]);
    for (k, n) in hist.iter().enumerate() {
        covering.push(row![k, *n]);
    }
    let total: u64 = hist.iter().sum();
    let two = hist[2] as f64 / total as f64;
    checks.push(Check::new(
        "covering_one_or_two",
        hist[0] == 0 && hist[3] == 0 && two > 0.999,
        format!("counts {hist:?}, frequency of 2 = {two:.6}"),
    ));

    let mut harness = Table::new("harness", &["domain", "probability", "ci_halfwidth", "exact"]);
    let n_h = samples.min(HARNESS_SAMPLES);
    let disk = UnitDisk { base: Complex64::new(0.0, 0.0) };
    let d = wos_harmonic_measure(&disk, &|w: Complex64| w.im > 0.0, n_h, EPS_ABSORB, cfg.seed.wrapping_add(1))?;
    let half = UpperHalfPlane { base: Complex64::new(0.0, 1.0), far_height: 1e4 };
    let hp = wos_harmonic_measure(&half, &|w: Complex64| w.re.abs() < 1.0, n_h, EPS_ABSORB, cfg.seed.wrapping_add(2))?;
    for (name, e) in [("disk_upper_half", &d), ("half_plane_unit_interval", &hp)] {
        harness.push(row![name, e.probability, e.ci_halfwidth, 0.5]);
        checks.push(Check::new(
            format!("harness_{name}"),
            (e.probability - 0.5).abs() <= 3.0 * e.ci_halfwidth,
            format!("{:.5} +- {:.5}", e.probability, e.ci_halfwidth),
        ));
    }
    Ok(ExperimentOutput { tables: vec![tail, level, covering, harness], checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_slope_skips_zeros() {
        let ys = [1.0, 2.0, 3.0, 4.0];
        let ps = [(-2.0f64).exp(), (-4.0f64).exp(), (-6.0f64).exp(), 0.0];
        let (s, used) = tail_slope(&ys, &ps);
        assert!((s + 2.0).abs() < 1e-12);
        assert_eq!(used, 3);
    }

    #[test]
    fn covering_histogram_is_seeded() {
        let r = RegionOmega::default();
        let a = covering_histogram(&r, 2000, 1).unwrap();
        assert_eq!(a, covering_histogram(&r, 2000, 1).unwrap());
        assert_eq!(a.iter().sum::<u64>(), 2000);
        assert_eq!(a[0], 0);
    }
}
