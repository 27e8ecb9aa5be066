//! Truncated power series, space weights and Cauchy-integral coefficient
//! extraction.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest truncation order accepted by the matrix builders.
pub const MAX_ORDER: usize = 4096;

/// Coefficients `c_0..=c_K` of a power series about 0 with a bound on the
/// aliasing error carried by each coefficient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "SeriesRepr", try_from = "SeriesRepr")]
pub struct PowerSeries {
    coeffs: Vec<Complex64>,
    alias_error: f64,
}

#[derive(Serialize, Deserialize)]
struct SeriesRepr {
    /// `[re, im]` pairs.
    coeffs: Vec<[f64; 2]>,
    #[serde(default)]
    alias_error: f64,
}

impl From<PowerSeries> for SeriesRepr {
    fn from(p: PowerSeries) -> Self {
        SeriesRepr { coeffs: p.coeffs.iter().map(|c| [c.re, c.im]).collect(), alias_error: p.alias_error }
    }
}

impl TryFrom<SeriesRepr> for PowerSeries {
    type Error = Error;
    fn try_from(r: SeriesRepr) -> Result<Self> {
        let p = PowerSeries::new(r.coeffs.iter().map(|c| Complex64::new(c[0], c[1])).collect())?;
        p.with_alias_error(r.alias_error)
    }
}

impl PowerSeries {
    /// Builds a series from coefficients `c_0, c_1, ...`. At least one
    /// coefficient is required and all must be finite.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(invalid("power series needs at least one coefficient"));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(invalid("non-finite power series coefficient"));
        }
        Ok(PowerSeries { coeffs, alias_error: 0.0 })
    }

    /// Real coefficients.
    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// `z^n` truncated at order `k` (zero if `n > k`).
    pub fn monomial(n: usize, k: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
        if n <= k {
            coeffs[n] = Complex64::new(1.0, 0.0);
        }
        PowerSeries { coeffs, alias_error: 0.0 }
    }

    pub fn with_alias_error(mut self, e: f64) -> Result<Self> {
        if !(e >= 0.0) || !e.is_finite() {
            return Err(invalid(format!("alias error must be finite and >= 0, got {e}")));
        }
        self.alias_error = e;
        Ok(self)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Truncation order `K` (the series holds `K + 1` coefficients).
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Per-coefficient bound on the error from aliasing or propagated rounding.
    pub fn alias_error(&self) -> f64 {
        self.alias_error
    }

    /// Horner evaluation of the truncated series.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Re-truncates (or zero-pads) to order `k`.
    pub fn truncate(&self, k: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(k + 1, Complex64::new(0.0, 0.0));
        PowerSeries { coeffs, alias_error: self.alias_error }
    }

    /// Sum of coefficient moduli.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }
}

/// Weight parameter of the space `H²_γ`: `γ = −1` is the Hardy space and
/// `γ > −1` the standard weighted Bergman space, with
/// `‖z^k‖² = (k+1)^{−(γ+1)}` up to equivalence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceParam {
    gamma: f64,
}

impl SpaceParam {
    pub fn hardy() -> Self {
        SpaceParam { gamma: -1.0 }
    }

    pub fn bergman(gamma: f64) -> Result<Self> {
        if !(gamma >= -1.0) || !gamma.is_finite() {
            return Err(invalid(format!("space weight gamma must be >= -1, got {gamma}")));
        }
        Ok(SpaceParam { gamma })
    }

    /// The space on which the diagonal polydisk reduction acts for dimension `n`.
    pub fn for_polydisk(n: usize) -> Result<Self> {
        Self::bergman(n as f64 - 2.0)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `‖z^k‖²` in this space.
    pub fn monomial_norm_sq(&self, k: usize) -> f64 {
        ((k + 1) as f64).powf(-(self.gamma + 1.0))
    }
}

/// `sqrt(Σ |c_k|² (k+1)^{−(γ+1)})`.
pub fn weighted_norm(p: &PowerSeries, space: SpaceParam) -> f64 {
    p.coeffs.iter().enumerate().map(|(k, c)| c.norm_sqr() * space.monomial_norm_sq(k)).sum::<f64>().sqrt()
}

/// Sampling circle and sample count for coefficient extraction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplingPlan {
    pub radius: f64,
    pub samples: usize,
}

impl SamplingPlan {
    /// Default plan for order `k`: radius `exp(−8/k)`, `8(k+1)` samples rounded
    /// up to a power of two. The radius keeps `r^{−k}` rounding amplification
    /// near `e^8` while `r^M` aliasing is below `e^{−64}`.
    pub fn for_order(k: usize) -> Self {
        let radius = if k == 0 { 0.5 } else { (-8.0 / k as f64).exp() };
        SamplingPlan { radius, samples: (8 * (k + 1)).next_power_of_two() }
    }

    /// Bound on the aliasing error for a function bounded by 1 on the disk.
    pub fn alias_bound(&self) -> f64 {
        let rm = self.radius.powi(self.samples as i32);
        rm / (1.0 - rm)
    }
}

/// Samples `f` on the plan's circle: `f(r e^{2πim/M})` for `m = 0..M`.
pub(crate) fn circle_points(plan: SamplingPlan) -> Vec<Complex64> {
    let m = plan.samples as f64;
    (0..plan.samples).map(|j| Complex64::from_polar(plan.radius, std::f64::consts::TAU * j as f64 / m)).collect()
}

/// Shared forward FFT of length `m`.
pub(crate) fn forward_fft(m: usize) -> Arc<dyn Fft<f64>> {
    FftPlanner::new().plan_fft_forward(m)
}

/// Converts samples on the circle of radius `r` into coefficients `0..=k`.
pub(crate) fn samples_to_coeffs(fft: &dyn Fft<f64>, mut buf: Vec<Complex64>, radius: f64, k: usize) -> Vec<Complex64> {
    let m = buf.len();
    fft.process(&mut buf);
    let inv_m = 1.0 / m as f64;
    let inv_r = 1.0 / radius;
    let mut scale = inv_m;
    buf.truncate(k + 1);
    for c in buf.iter_mut() {
        *c *= scale;
        scale *= inv_r;
    }
    buf
}

/// Taylor coefficients `c_0..=c_k` of an analytic `f` with `|f| ≤ 1` on the
/// disk, by the trapezoid rule for the Cauchy integral on `|z| = radius`.
///
/// The returned alias error is the bound `r^M/(1 − r^M)`, valid for
/// functions bounded by 1.
pub fn extract_coefficients<F>(f: F, k: usize, radius: f64, samples: usize) -> Result<PowerSeries>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    if !(radius > 0.0 && radius < 1.0) {
        return Err(invalid(format!("sampling radius must lie in (0,1), got {radius}")));
    }
    if samples <= k {
        return Err(invalid(format!("need more than {k} samples, got {samples}")));
    }
    let plan = SamplingPlan { radius, samples };
    let vals = circle_points(plan).into_iter().map(&f).collect::<Result<Vec<_>>>()?;
    if let Some(bad) = vals.iter().find(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Singular(format!("sample value {bad}")));
    }
    let fft = forward_fft(samples);
    let coeffs = samples_to_coeffs(fft.as_ref(), vals, radius, k);
    PowerSeries::new(coeffs)?.with_alias_error(plan.alias_bound())
}

/// [`extract_coefficients`] with the default [`SamplingPlan`].
pub fn extract_default<F>(f: F, k: usize) -> Result<PowerSeries>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    let plan = SamplingPlan::for_order(k);
    extract_coefficients(f, k, plan.radius, plan.samples)
}

/// Truncated product of two series at order `k`.
pub fn mul_truncated(a: &PowerSeries, b: &PowerSeries, k: usize) -> PowerSeries {
    let (x, y) = (a.coeffs(), b.coeffs());
    let lx = x.len().min(k + 1);
    let ly = y.len().min(k + 1);
    let coeffs = if lx.min(ly) <= 64 {
        let mut out = vec![Complex64::new(0.0, 0.0); k + 1];
        for (i, &xi) in x[..lx].iter().enumerate() {
            for (j, &yj) in y[..ly.min(k + 1 - i)].iter().enumerate() {
                out[i + j] += xi * yj;
            }
        }
        out
    } else {
        let m = (lx + ly).next_power_of_two();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(m);
        let inv = planner.plan_fft_inverse(m);
        let mut fa = x[..lx].to_vec();
        fa.resize(m, Complex64::new(0.0, 0.0));
        let mut fb = y[..ly].to_vec();
        fb.resize(m, Complex64::new(0.0, 0.0));
        fwd.process(&mut fa);
        fwd.process(&mut fb);
        for (p, q) in fa.iter_mut().zip(&fb) {
            *p *= q / m as f64;
        }
        inv.process(&mut fa);
        fa.resize(k + 1, Complex64::new(0.0, 0.0));
        fa
    };
    let e = a.alias_error * b.l1_norm() + b.alias_error * a.l1_norm() + a.alias_error * b.alias_error * (k + 1) as f64;
    PowerSeries { coeffs, alias_error: e }
}

/// `p^n` truncated at order `k`, by binary powering of truncated products.
///
/// The error bound propagates the input bound through the ℓ¹ estimate
/// `(‖p‖₁ + (K+1)e)^n − ‖p‖₁^n`; an overflowing bound is reported as an error.
pub fn series_pow(p: &PowerSeries, n: u32, k: usize) -> Result<PowerSeries> {
    let mut result = PowerSeries::monomial(0, k);
    let mut base = p.truncate(k);
    base.alias_error = 0.0;
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            result = mul_truncated(&result, &base, k);
            result.alias_error = 0.0;
        }
        e >>= 1;
        if e > 0 {
            base = mul_truncated(&base, &base, k);
            base.alias_error = 0.0;
        }
    }
    let l1 = p.l1_norm();
    let bound = if p.alias_error == 0.0 {
        0.0
    } else {
        let d = (p.coeffs.len() as f64) * p.alias_error;
        (l1 + d).powi(n as i32) - l1.powi(n as i32)
    };
    if !bound.is_finite() || result.coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::Overflow(format!("power {n} of a series with l1 norm {l1}")));
    }
    result.alias_error = bound;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn geometric_series_coefficients() {
        // 1/(2 - z) = Σ z^k / 2^{k+1}
        let p = extract_default(|z| Ok(1.0 / (2.0 - z)), 40).unwrap();
        for (k, ck) in p.coeffs().iter().enumerate() {
            assert!((ck - c(0.5_f64.powi(k as i32 + 1), 0.0)).norm() < 1e-12, "k={k}");
        }
        assert!(p.alias_error() < 1e-20);
    }

    #[test]
    fn exponential_coefficients() {
        // exp((z-1)/2) is bounded by 1 on the disk.
        let p = extract_default(|z| Ok(((z - 1.0) / 2.0).exp()), 30).unwrap();
        let mut fact = 1.0;
        for k in 0..=30 {
            if k > 0 {
                fact *= k as f64;
            }
            let exact = (-0.5f64).exp() * 0.5f64.powi(k) / fact;
            assert!((p.coeffs()[k as usize].re - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn default_plan() {
        let plan = SamplingPlan::for_order(1024);
        assert_eq!(plan.samples, 16384);
        assert_relative_eq!(plan.radius, (-8.0f64 / 1024.0).exp());
        assert!(plan.alias_bound() < 1e-50);
    }

    #[test]
    fn rejects_bad_plan() {
        assert!(extract_coefficients(Ok, 10, 1.0, 64).is_err());
        assert!(extract_coefficients(Ok, 10, 0.5, 10).is_err());
        assert!(extract_coefficients(|_| Ok(c(f64::NAN, 0.0)), 4, 0.5, 16).is_err());
    }

    #[test]
    fn pow_matches_binomial() {
        // (1 + z)^7 truncated at order 4
        let p = PowerSeries::from_real(&[1.0, 1.0]).unwrap();
        let q = series_pow(&p, 7, 4).unwrap();
        let expect = [1.0, 7.0, 21.0, 35.0, 35.0];
        for (a, b) in q.coeffs().iter().zip(expect) {
            assert_relative_eq!(a.re, b, epsilon = 1e-12);
        }
        assert_eq!(q.alias_error(), 0.0);
    }

    #[test]
    fn fft_product_matches_direct() {
        let a: Vec<Complex64> =
            (0..200).map(|k| c((k as f64 * 0.37).sin(), (k as f64).cos() / (k + 1) as f64)).collect();
        let b: Vec<Complex64> = (0..150).map(|k| c(1.0 / (k + 1) as f64, 0.1)).collect();
        let pa = PowerSeries::new(a.clone()).unwrap();
        let pb = PowerSeries::new(b.clone()).unwrap();
        let fast = mul_truncated(&pa, &pb, 180);
        for n in 0..=180 {
            let mut s = c(0.0, 0.0);
            for i in 0..=n {
                if i < a.len() && n - i < b.len() {
                    s += a[i] * b[n - i];
                }
            }
            assert!((fast.coeffs()[n] - s).norm() < 1e-11);
        }
    }

    #[test]
    fn overflow_is_reported() {
        let p = PowerSeries::from_real(&[1e200, 1.0]).unwrap();
        assert!(matches!(series_pow(&p, 4, 2), Err(Error::Overflow(_))));
    }

    #[test]
    fn serde_round_trip() {
        let p = PowerSeries::new(vec![c(0.0, 0.0), c(0.5, -0.25)]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        let q: PowerSeries = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
    }

    /// Gauss–Legendre nodes on [0, 1] by Newton iteration on P_n.
    fn gauss_legendre01(n: usize) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            out.push(((1.0 + x) / 2.0, w / 2.0));
        }
        out
    }

    #[test]
    fn bergman_norm_against_area_quadrature() {
        // γ = 0: ‖f‖² = (1/π)∫_D |f|² dA, computed by a product rule.
        let p = PowerSeries::new(vec![c(0.3, 0.1), c(-0.2, 0.4), c(0.0, 0.0), c(0.25, -0.05), c(0.1, 0.1)]).unwrap();
        let nodes = gauss_legendre01(40);
        let nt = 64;
        let mut acc = 0.0;
        for &(r, w) in &nodes {
            let mut ring = 0.0;
            for j in 0..nt {
                let z = Complex64::from_polar(r, std::f64::consts::TAU * j as f64 / nt as f64);
                ring += p.eval(z).norm_sqr();
            }
            acc += w * r * ring * std::f64::consts::TAU / nt as f64;
        }
        let area = acc / std::f64::consts::PI;
        let n = weighted_norm(&p, SpaceParam::bergman(0.0).unwrap());
        assert_relative_eq!(n * n, area, max_relative = 1e-12);
    }

    #[test]
    fn hardy_norm_is_coefficient_l2() {
        let p = PowerSeries::from_real(&[3.0, 4.0]).unwrap();
        assert_relative_eq!(weighted_norm(&p, SpaceParam::hardy()), 5.0);
        assert!(SpaceParam::bergman(-1.5).is_err());
    }

    proptest! {
        #[test]
        fn coefficients_reproduce_polynomial(coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..12)) {
            // Scale so that sup |p| ≤ Σ|c_k| ≤ 1.
            let raw: Vec<Complex64> = coeffs.iter().map(|&(a, b)| c(a, b)).collect();
            let s: f64 = raw.iter().map(|z| z.norm()).sum::<f64>().max(1.0);
            let p = PowerSeries::new(raw.iter().map(|z| z / s).collect()).unwrap();
            let k = p.order() + 4;
            let q = extract_default(|z| Ok(p.eval(z)), k).unwrap();
            for j in 0..=k {
                let exact = p.coeffs().get(j).copied().unwrap_or(c(0.0, 0.0));
                prop_assert!((q.coeffs()[j] - exact).norm() < 1e-12);
            }
            prop_assert!(q.alias_error().is_finite() && q.alias_error() >= 0.0);
        }

        #[test]
        fn pow_error_finite(a in 0.0f64..0.6, n in 1u32..20) {
            let p = PowerSeries::from_real(&[a, 1.0 - a]).unwrap().with_alias_error(1e-14).unwrap();
            let q = series_pow(&p, n, 8).unwrap();
            prop_assert!(q.alias_error().is_finite() && q.alias_error() >= 0.0);
        }
    }
}
