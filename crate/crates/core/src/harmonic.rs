//! Walk-on-spheres estimates of harmonic measure in planar domains, and the
//! geometry of the spiral channel
//! `Ω = {x + iy : x > 0, g(x) < y < g(x) + 4π}`.
//!
//! `e^{−z}` maps `Ω` two-to-one (off a null set) onto the punctured disk,
//! so for a Riemann map `f: 𝔻 → Ω` the symbol `φ = e^{−f}` has boundary
//! behaviour governed by the harmonic measure of pieces of `∂Ω` seen from
//! `f(0)`. Those harmonic measures are estimated here without constructing
//! `f`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::par;

/// Default absorption distance.
pub const EPS_ABSORB: f64 = 1e-6;
/// Trajectories taking more steps than this are abandoned and reported.
pub const STEP_CAP: u64 = 1_000_000;

/// A simply connected test domain for walk-on-spheres.
pub trait Domain: Sync {
    fn base_point(&self) -> Complex64;

    /// `0 < d̂(p) ≤ dist(p, ∂D)` for `p ∈ D`.
    fn distance_lower_bound(&self, p: Complex64) -> Result<f64>;

    /// The boundary point used for scoring an absorbed walker.
    fn project(&self, p: Complex64) -> Complex64 {
        p
    }

    /// Exit point sampled in closed form once a walker is in the far field,
    /// given a uniform variate.
    fn far_field(&self, _p: Complex64, _u: f64) -> Option<Complex64> {
        None
    }
}

/// Unit disk harness.
#[derive(Clone, Copy, Debug)]
pub struct UnitDisk {
    pub base: Complex64,
}

impl Domain for UnitDisk {
    fn base_point(&self) -> Complex64 {
        self.base
    }

    fn distance_lower_bound(&self, p: Complex64) -> Result<f64> {
        let d = 1.0 - p.norm();
        if d > 0.0 {
            Ok(d)
        } else {
            Err(Error::OutsideDomain(format!("{p} not in the unit disk")))
        }
    }

    fn project(&self, p: Complex64) -> Complex64 {
        p / p.norm()
    }
}

/// Upper half-plane harness. Walkers above `far_height` exit through the
/// Poisson (Cauchy) law in one step.
#[derive(Clone, Copy, Debug)]
pub struct UpperHalfPlane {
    pub base: Complex64,
    pub far_height: f64,
}

impl Domain for UpperHalfPlane {
    fn base_point(&self) -> Complex64 {
        self.base
    }

    fn distance_lower_bound(&self, p: Complex64) -> Result<f64> {
        if p.im > 0.0 {
            Ok(p.im)
        } else {
            Err(Error::OutsideDomain(format!("{p} not in the upper half-plane")))
        }
    }

    fn project(&self, p: Complex64) -> Complex64 {
        Complex64::new(p.re, 0.0)
    }

    fn far_field(&self, p: Complex64, u: f64) -> Option<Complex64> {
        (p.im > self.far_height).then(|| Complex64::new(p.re + p.im * (PI * (u - 0.5)).tan(), 0.0))
    }
}

/// The lower boundary curve `g` of `Ω`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GProfile {
    /// `g(t) = π^{1+p} t^{−p}`; `p = 1` is the default `π²/t`.
    Power { p: f64 },
}

impl GProfile {
    pub fn default_g() -> Self {
        GProfile::Power { p: 1.0 }
    }

    /// Profile with the growth of `log(1/δ(t/2))` for
    /// `δ(h) = exp(−s h^{−e})`, normalised so that `g(π) = π`.
    pub fn from_delta_exponent(e: f64) -> Result<Self> {
        if !(e > 0.0) {
            return Err(invalid("δ exponent must be positive"));
        }
        Ok(GProfile::Power { p: e })
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            GProfile::Power { p } => PI.powf(1.0 + p) * t.powf(-p),
        }
    }

    /// `sup |g'|` over `[a, ∞)`, `a > 0`.
    pub fn slope_bound(&self, a: f64) -> f64 {
        match self {
            GProfile::Power { p } => p * PI.powf(1.0 + p) * a.powf(-p - 1.0),
        }
    }

    /// Solves `g(t) = y` for `y > 0`.
    pub fn inverse(&self, y: f64) -> f64 {
        match self {
            GProfile::Power { p } => (PI.powf(1.0 + p) / y).powf(1.0 / p),
        }
    }
}

/// The channel `Ω` with its base point and tail threshold `α`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionOmega {
    pub g: GProfile,
    pub alpha: f64,
    pub base: Complex64,
    /// Walkers beyond this abscissa exit through the flat-channel law.
    pub x_max: f64,
}

impl Default for RegionOmega {
    fn default() -> Self {
        RegionOmega { g: GProfile::default_g(), alpha: 5.0 * PI, base: Complex64::new(PI, 3.0 * PI), x_max: 1e4 }
    }
}

impl RegionOmega {
    pub fn new(g: GProfile, alpha: f64, base: Complex64, x_max: f64) -> Result<Self> {
        let r = RegionOmega { g, alpha, base, x_max };
        r.validate()?;
        Ok(r)
    }

    /// Checks the qualitative requirements on `g` on a grid and that the
    /// base point lies in `Ω`.
    pub fn validate(&self) -> Result<()> {
        if (self.g.value(PI) - PI).abs() > 1e-12 {
            return Err(invalid("g(π) must equal π"));
        }
        let grid = crate::special::geomspace(1e-6, 1e6, 400);
        if grid.windows(2).any(|w| self.g.value(w[1]) >= self.g.value(w[0])) {
            return Err(invalid("g must be strictly decreasing"));
        }
        if self.g.value(1e-6) < 1e3 || self.g.value(1e6) > 1e-3 {
            return Err(invalid("g must tend to ∞ at 0 and to 0 at ∞"));
        }
        if !self.contains(self.base) {
            return Err(invalid(format!("base point {} not in Ω", self.base)));
        }
        Ok(())
    }

    pub fn contains(&self, p: Complex64) -> bool {
        p.re > 0.0 && {
            let g = self.g.value(p.re);
            p.im > g && p.im < g + 4.0 * PI
        }
    }
}

impl Domain for RegionOmega {
    fn base_point(&self) -> Complex64 {
        self.base
    }

    /// Vertical gaps to the two boundary graphs divided by `(1 + L²)^{1/2}`,
    /// with `L` bounding `|g'|` on `[x − Δ, x + Δ]` for the candidate radius
    /// `Δ`, iterated three times.
    fn distance_lower_bound(&self, p: Complex64) -> Result<f64> {
        if !self.contains(p) {
            return Err(Error::OutsideDomain(format!("{p} not in Ω")));
        }
        let x = p.re;
        let g = self.g.value(x);
        let gap = (p.im - g).min(g + 4.0 * PI - p.im);
        let mut delta = gap.min(0.5 * x);
        for _ in 0..3 {
            let l = self.g.slope_bound(x - delta);
            let r = gap / (1.0 + l * l).sqrt();
            delta = r.min(delta);
        }
        Ok(delta)
    }

    fn far_field(&self, p: Complex64, u: f64) -> Option<Complex64> {
        (p.re > self.x_max).then(|| {
            // Flat channel of width 4π: exit through the top with
            // probability proportional to the height above the floor.
            let g = self.g.value(p.re);
            let t = ((p.im - g) / (4.0 * PI)).clamp(0.0, 1.0);
            if u < t {
                Complex64::new(p.re, g + 4.0 * PI)
            } else {
                Complex64::new(p.re, g)
            }
        })
    }
}

/// How a trajectory ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exit {
    Absorbed,
    FarField,
    Capped,
}

/// End point of one trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Absorption {
    pub point: Complex64,
    pub steps: u64,
    pub exit: Exit,
}

/// Runs `samples` independent walks from the base point. Trajectory `i`
/// draws from ChaCha8 stream `i` of `seed`, so results do not depend on
/// scheduling.
pub fn wos_sample<D: Domain>(domain: &D, samples: usize, eps_absorb: f64, seed: u64) -> Result<Vec<Absorption>> {
    if !(eps_absorb > 0.0) {
        return Err(invalid("eps_absorb must be positive"));
    }
    domain.distance_lower_bound(domain.base_point())?;
    par::try_map_range(samples, |i| walk(domain, eps_absorb, seed, i as u64))
}

fn walk<D: Domain>(domain: &D, eps: f64, seed: u64, index: u64) -> Result<Absorption> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut p = domain.base_point();
    for steps in 0..STEP_CAP {
        if let Some(q) = domain.far_field(p, rng.random::<f64>()) {
            return Ok(Absorption { point: q, steps, exit: Exit::FarField });
        }
        // Rounding can leave a walker a hair outside; that is absorption.
        let d = domain.distance_lower_bound(p).unwrap_or(0.0);
        if d < eps {
            return Ok(Absorption { point: domain.project(p), steps, exit: Exit::Absorbed });
        }
        p += Complex64::from_polar(d, TAU * rng.random::<f64>());
    }
    Ok(Absorption { point: p, steps: STEP_CAP, exit: Exit::Capped })
}

/// Frequency estimate of a harmonic measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicMeasureEstimate {
    pub probability: f64,
    /// 95% normal-approximation half-width.
    pub ci_halfwidth: f64,
    /// Completed trajectories.
    pub samples: u64,
    /// Trajectories abandoned at the step cap (excluded).
    pub capped: u64,
    /// Trajectories that exited through the far-field law.
    pub far_field: u64,
    pub eps_absorb: f64,
    pub seed: u64,
}

/// Scores precomputed trajectories against a boundary predicate.
pub fn score(
    absorptions: &[Absorption],
    target: &dyn Fn(Complex64) -> bool,
    eps_absorb: f64,
    seed: u64,
) -> HarmonicMeasureEstimate {
    let mut hits = 0u64;
    let mut done = 0u64;
    let mut capped = 0u64;
    let mut far = 0u64;
    for a in absorptions {
        match a.exit {
            Exit::Capped => {
                capped += 1;
                continue;
            }
            Exit::FarField => far += 1,
            Exit::Absorbed => {}
        }
        done += 1;
        if target(a.point) {
            hits += 1;
        }
    }
    let p = if done > 0 { hits as f64 / done as f64 } else { 0.0 };
    let ci = if done > 0 { 1.96 * (p * (1.0 - p) / done as f64).sqrt() } else { f64::INFINITY };
    HarmonicMeasureEstimate {
        probability: p,
        ci_halfwidth: ci,
        samples: done,
        capped,
        far_field: far,
        eps_absorb,
        seed,
    }
}

/// Harmonic measure at the base point of the boundary set described by `target`.
pub fn wos_harmonic_measure<D: Domain>(
    domain: &D,
    target: &dyn Fn(Complex64) -> bool,
    samples: usize,
    eps_absorb: f64,
    seed: u64,
) -> Result<HarmonicMeasureEstimate> {
    let a = wos_sample(domain, samples, eps_absorb, seed)?;
    Ok(score(&a, target, eps_absorb, seed))
}

/// Predicate `e^{−Re w} > 1 − h`: the boundary set where `|e^{−w}| > 1 − h`.
pub fn level_set_predicate(h: f64) -> impl Fn(Complex64) -> bool {
    let x0 = -(1.0 - h).ln();
    move |w: Complex64| w.re < x0
}

/// `m({|φ*| > 1 − h})` for `φ = e^{−f}`, `f` a Riemann map onto `Ω` with
/// `f(0)` the base point, as a harmonic measure in `Ω`.
pub fn level_set_tail(
    region: &RegionOmega,
    h: f64,
    samples: usize,
    eps_absorb: f64,
    seed: u64,
) -> Result<HarmonicMeasureEstimate> {
    if !(h > 0.0 && h <= 0.5) {
        return Err(invalid(format!("h must lie in (0, 1/2], got {h}")));
    }
    wos_harmonic_measure(region, &level_set_predicate(h), samples, eps_absorb, seed)
}

/// Slack below which a boundary comparison is treated as exact equality.
const EDGE_TOLERANCE: f64 = 1e-12;

/// Number of `z ∈ Ω` with `e^{−z} = w`: with `x = −log|w|` and
/// `y₀ = −arg w`, the integers `k` with `g(x) < y₀ + 2πk < g(x) + 4π`.
/// Candidates within a relative `1e-12` of an endpoint lie on `∂Ω` and are
/// not counted.
pub fn covering_count(region: &RegionOmega, w: Complex64) -> Result<u32> {
    let r = w.norm();
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::OutsideDomain(format!("need 0 < |w| < 1, got {w}")));
    }
    let x = -r.ln();
    let y0 = -w.arg();
    let g = region.g.value(x);
    let tol = EDGE_TOLERANCE * (1.0 + g.abs());
    let k0 = ((g - y0) / TAU).floor() as i64;
    let mut count = 0;
    for k in k0..=k0 + 3 {
        let y = y0 + TAU * k as f64;
        if y > g + tol && y < g + 4.0 * PI - tol {
            count += 1;
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn base_point_distance() {
        let r = RegionOmega::default();
        let d = r.distance_lower_bound(r.base).unwrap();
        assert!(d > 0.0 && d <= TAU);
    }

    #[test]
    fn flat_limit_distance() {
        let r = RegionOmega::default();
        let x = 1e5;
        let p = c(x, r.g.value(x) + TAU);
        assert_relative_eq!(r.distance_lower_bound(p).unwrap(), TAU, max_relative = 1e-6);
    }

    #[test]
    fn outside_points_rejected() {
        let r = RegionOmega::default();
        assert!(r.distance_lower_bound(c(PI, 0.5 * PI)).is_err());
        assert!(r.distance_lower_bound(c(-1.0, 3.0)).is_err());
        assert!(r.distance_lower_bound(c(PI, 6.0 * PI)).is_err());
    }

    #[test]
    fn distance_audit() {
        // Disks of the returned radius contain no sampled boundary point.
        let r = RegionOmega::default();
        let xs = crate::special::geomspace(1e-2, 1e3, 10_000);
        let boundary: Vec<Complex64> =
            xs.iter().flat_map(|&x| [c(x, r.g.value(x)), c(x, r.g.value(x) + 4.0 * PI)]).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut checked = 0;
        while checked < 2000 {
            let x = (rng.random::<f64>() * 8.0 - 3.0).exp();
            let p = c(x, r.g.value(x) + 4.0 * PI * rng.random::<f64>());
            if !r.contains(p) {
                continue;
            }
            let d = r.distance_lower_bound(p).unwrap();
            assert!(d > 0.0);
            for b in &boundary {
                assert!((b - p).norm() >= d * (1.0 - 1e-12), "p={p} d={d} b={b}");
            }
            checked += 1;
        }
    }

    #[test]
    fn distance_positive_on_random_interior() {
        let r = RegionOmega::default();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100_000 {
            let x = (rng.random::<f64>() * 14.0 - 7.0).exp();
            let p = c(x, r.g.value(x) + 4.0 * PI * (1e-9 + (1.0 - 2e-9) * rng.random::<f64>()));
            if r.contains(p) {
                assert!(r.distance_lower_bound(p).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn disk_harness() {
        let d = UnitDisk { base: c(0.0, 0.0) };
        let target = |w: Complex64| w.im > 0.0;
        let e = wos_harmonic_measure(&d, &target, 100_000, EPS_ABSORB, 1).unwrap();
        assert!((e.probability - 0.5).abs() < 3.0 * e.ci_halfwidth, "{e:?}");
    }

    #[test]
    fn half_plane_harness() {
        let d = UpperHalfPlane { base: c(0.0, 1.0), far_height: 1e4 };
        let target = |w: Complex64| w.re.abs() < 1.0;
        let e = wos_harmonic_measure(&d, &target, 100_000, EPS_ABSORB, 2).unwrap();
        assert!((e.probability - 0.5).abs() < 3.0 * e.ci_halfwidth, "{e:?}");
    }

    #[test]
    fn deterministic_given_seed() {
        let r = RegionOmega::default();
        let a = wos_sample(&r, 200, EPS_ABSORB, 77).unwrap();
        let b =
            crate::par::run_with(crate::par::Execution::Sequential, || wos_sample(&r, 200, EPS_ABSORB, 77).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn covering_examples() {
        let r = RegionOmega::default();
        let w1 = Complex64::from_polar((-PI).exp(), -PI / 2.0);
        assert_eq!(covering_count(&r, w1).unwrap(), 2);
        let w2 = c(-(-PI).exp(), 0.0);
        assert_eq!(covering_count(&r, w2).unwrap(), 1);
        assert!(covering_count(&r, c(0.0, 0.0)).is_err());
        assert!(covering_count(&r, c(1.0, 0.0)).is_err());
    }

    #[test]
    fn covering_is_one_or_two() {
        let r = RegionOmega::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut twos = 0;
        let n = 100_000;
        for _ in 0..n {
            let w = Complex64::from_polar(rng.random::<f64>().sqrt(), TAU * rng.random::<f64>());
            if w.norm() == 0.0 {
                continue;
            }
            let k = covering_count(&r, w).unwrap();
            assert!(k == 1 || k == 2);
            twos += (k == 2) as u32;
        }
        assert!(twos as f64 / n as f64 > 0.999);
    }

    #[test]
    fn level_set_bounds() {
        let r = RegionOmega::default();
        let e = level_set_tail(&r, 0.5, 2000, EPS_ABSORB, 4).unwrap();
        assert!(e.probability <= 1.0);
        assert!(level_set_tail(&r, 0.7, 10, EPS_ABSORB, 4).is_err());
    }

    #[test]
    fn region_validation() {
        assert!(RegionOmega::default().validate().is_ok());
        assert!(RegionOmega::new(GProfile::default_g(), 5.0 * PI, c(PI, 0.5), 1e4).is_err());
        let g = GProfile::from_delta_exponent(0.5).unwrap();
        assert_relative_eq!(g.value(PI), PI, max_relative = 1e-14);
        assert_relative_eq!(g.value(g.inverse(7.0)), 7.0, max_relative = 1e-12);
    }
}
