//! Spectra from the boundary reproducing-kernel factor.
//!
//! For `Φ(z) = (φ(z₁), ..., φ(z₁))` on `H²(𝔻^N)`, or equivalently
//! `C_φ: H²_{N−2} → H²`, the squared singular values are the eigenvalues of
//! the integral operator on `L²(𝕋, dm)` with kernel
//! `k(x, y) = (1 − φ*(x) conj φ*(y))^{−N}`. In Cayley coordinates
//! `W = (1+φ)/(1−φ)`,
//!
//! ```text
//! k = ((1+W_x)(1+W̄_y)/2)^N / (W_x + W̄_y)^N
//!   = ((1+W_x)(1+W̄_y)/2)^N / Γ(N) ∫₀^∞ s^{N−1} e^{−W_x s} e^{−W̄_y s} ds,
//! ```
//!
//! an explicit factorisation `k = V V*`. Discretising both integrals with
//! log-graded trapezoid rules gives a matrix whose singular values converge
//! to `a_n(C_Φ)` with absolute error near machine precision, independently
//! of how slowly the Taylor sections converge. The route needs
//! `Re W > 0` almost everywhere on the circle, so it does not apply to maps
//! with unimodular boundary values on a set of positive measure.

use std::f64::consts::{FRAC_PI_2, PI};

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::par;
use crate::special::ln_gamma;
use crate::symbols::{boundary_cayley, one_minus_abs_sq_cayley, SymbolSpec};

/// Quadrature on the circle in the variable `s` with `cot(t/2) = ±e^s`.
///
/// The measure `dm = dt/2π` becomes `ds/(2π cosh s)` on each branch; the
/// nodes accumulate geometrically at both `t = 0` and `t = π`, where the
/// shipped maps have their contact points.
#[derive(Clone, Debug)]
pub struct CayleyGrid {
    /// `Y = cot(t/2)`.
    pub ys: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CayleyGrid {
    /// Midpoint nodes `s = −S + (m + ½)h` on both branches.
    pub fn new(s_max: f64, step: f64) -> Result<Self> {
        if !(s_max > 0.0 && step > 0.0 && step < s_max) {
            return Err(invalid(format!("bad Cayley grid s_max={s_max} step={step}")));
        }
        let per_branch = (2.0 * s_max / step).round() as usize;
        let mut ys = Vec::with_capacity(2 * per_branch);
        let mut weights = Vec::with_capacity(2 * per_branch);
        for sign in [1.0, -1.0] {
            for m in 0..per_branch {
                let s = -s_max + (m as f64 + 0.5) * step;
                ys.push(sign * s.exp());
                weights.push(step / (2.0 * PI * s.cosh()));
            }
        }
        Ok(CayleyGrid { ys, weights })
    }

    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    /// Boundary values of `spec` in Cayley coordinates at the nodes.
    pub fn images(&self, spec: &SymbolSpec) -> Result<Vec<Complex64>> {
        par::try_map_range(self.len(), |i| spec.eval_cayley(boundary_cayley(self.ys[i])))
    }
}

/// Discretisation parameters for the kernel route.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelRouteConfig {
    /// Initial half-width of the boundary grid in `s`; widened automatically
    /// until the discarded tails carry a negligible share of the trace.
    pub s_max: f64,
    /// Boundary step in `s`.
    pub step: f64,
    /// Polydisk dimension `N` (kernel exponent).
    pub n_dim: usize,
}

impl Default for KernelRouteConfig {
    fn default() -> Self {
        KernelRouteConfig { s_max: 100.0, step: 0.1, n_dim: 1 }
    }
}

impl KernelRouteConfig {
    pub fn with_dim(n_dim: usize) -> Self {
        KernelRouteConfig { n_dim, ..Default::default() }
    }
}

/// Largest `s_max` the tail extension will try.
const S_MAX_CEILING: f64 = 400.0;
/// Relative trace share allowed in discarded boundary rows.
const TAIL_TRACE: f64 = 1e-32;
/// Target relative error of each Laplace-integral rule (e^{−75}). Errors in
/// `V V*` of size `ε` move `a_n` by about `ε / a_n`, so the rule is kept far
/// below machine precision.
const LAPLACE_EXPONENT: f64 = 75.0;
/// Upper limit on the Laplace grid size.
const MAX_COLUMNS: usize = 6000;

/// Diagnostics describing the discretisation actually used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelFactorInfo {
    pub s_max: f64,
    pub n_dim: usize,
    pub rows: usize,
    pub columns: usize,
    pub laplace_step: f64,
    /// `Σ_n a_n²` estimated by the boundary quadrature (kernel trace).
    pub trace: f64,
    /// Set when the real folded factor was used.
    pub real_folded: bool,
}

/// Discretisation shared by the complex and the folded real factor.
struct Prepared {
    images: Vec<Complex64>,
    weights: Vec<f64>,
    /// Kept boundary rows.
    rows: Vec<usize>,
    /// Nodes `Y` and `−Y` sit at `i` and `i + per_branch`.
    per_branch: usize,
    xs: Vec<f64>,
    col_log: Vec<f64>,
    info: KernelFactorInfo,
}

impl Prepared {
    fn row(&self, i: usize) -> Vec<Complex64> {
        let nf = self.info_dim();
        let w = self.images[i];
        let lead = 0.5 * self.weights[i].ln() + nf * ((Complex64::new(1.0, 0.0) + w) / 2f64.sqrt()).ln();
        self.xs
            .iter()
            .zip(&self.col_log)
            .map(|(&x, &cl)| {
                let e = lead - w * x + cl;
                if e.re < -745.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    e.exp()
                }
            })
            .collect()
    }

    fn info_dim(&self) -> f64 {
        self.info.n_dim as f64
    }

    /// True when `W(−Y) = conj W(Y)` at every kept node, as for maps with
    /// real Taylor coefficients.
    fn conjugate_symmetric(&self) -> bool {
        let pb = self.per_branch;
        let kept: std::collections::HashSet<usize> = self.rows.iter().copied().collect();
        self.rows.iter().all(|&i| {
            let j = if i < pb { i + pb } else { i - pb };
            let (a, b) = (self.images[i], self.images[j].conj());
            kept.contains(&j) && (a - b).norm() <= 1e-13 * a.norm().max(b.norm())
        })
    }
}

fn prepare(spec: &SymbolSpec, cfg: &KernelRouteConfig) -> Result<Prepared> {
    let n = cfg.n_dim;
    if n == 0 {
        return Err(invalid("kernel exponent N must be >= 1"));
    }
    let nf = n as f64;
    // Widen the grid until the outermost nodes are negligible.
    let mut s_max = cfg.s_max;
    loop {
        let end =
            CayleyGrid { ys: vec![s_max.exp(), -s_max.exp(), (-s_max).exp(), -(-s_max).exp()], weights: vec![1.0; 4] };
        let imgs = end.images(spec)?;
        let w_end = cfg.step / (2.0 * PI * s_max.cosh());
        let tail = imgs.iter().map(|w| diag_term(*w, w_end, nf)).fold(0.0, f64::max);
        if !(tail > TAIL_TRACE * 1e-3) || s_max >= S_MAX_CEILING {
            break;
        }
        s_max += 50.0;
    }
    let grid = CayleyGrid::new(s_max, cfg.step)?;
    let per_branch = grid.len() / 2;
    let images = grid.images(spec)?;

    // Diagonal of the weighted kernel: w_i (1 − |φ_i|²)^{−N}.
    let diag: Vec<f64> = images.iter().zip(&grid.weights).map(|(w, &wt)| diag_term(*w, wt, nf)).collect();
    if let Some(i) = diag.iter().position(|d| !d.is_finite()) {
        return Err(Error::Singular(format!(
            "{} has unimodular boundary value at Y={} (Re W = {}); the kernel route needs |φ*| < 1 a.e.",
            spec.label(),
            grid.ys[i],
            images[i].re
        )));
    }
    let trace: f64 = diag.iter().sum();
    let mut order: Vec<usize> = (0..diag.len()).collect();
    order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]));
    let mut dropped = 0.0;
    let mut keep = vec![true; diag.len()];
    for &i in &order {
        if dropped + diag[i] > TAIL_TRACE * trace {
            break;
        }
        dropped += diag[i];
        keep[i] = false;
    }
    let rows: Vec<usize> = (0..diag.len()).filter(|&i| keep[i]).collect();

    let (mut re_min, mut re_max, mut psi) = (f64::INFINITY, 0.0f64, 0.0f64);
    for &i in &rows {
        let w = images[i];
        re_min = re_min.min(w.re);
        re_max = re_max.max(w.re);
        psi = psi.max(w.im.abs().atan2(w.re));
    }
    // Sums W_i + W̄_j stay in the sector |arg| ≤ psi; the Laplace integrand is
    // analytic in a strip of half-width π/2 − psi around the real u-axis.
    let strip = FRAC_PI_2 - psi;
    if strip < 0.02 {
        return Err(Error::Singular(format!(
            "{}: boundary image too close to tangential (sector half-angle {psi:.4})",
            spec.label()
        )));
    }
    let hu = (2.0 * PI * strip / LAPLACE_EXPONENT).min(0.25);
    let u_lo = -(2.0 * re_max).ln() - LAPLACE_EXPONENT / nf;
    let u_hi = ((LAPLACE_EXPONENT + 8.0 + 2.0 * nf) / (2.0 * re_min)).ln();
    let cols = ((u_hi - u_lo) / hu).ceil() as usize + 1;
    if cols > MAX_COLUMNS {
        return Err(Error::TooLarge(format!("{cols} Laplace nodes for {}", spec.label())));
    }
    let us: Vec<f64> = (0..cols).map(|k| u_lo + k as f64 * hu).collect();
    let col_log: Vec<f64> = us.iter().map(|&u| 0.5 * (hu.ln() + nf * u - ln_gamma(nf))).collect();
    let xs: Vec<f64> = us.iter().map(|u| u.exp()).collect();
    let info = KernelFactorInfo {
        s_max,
        n_dim: n,
        rows: rows.len(),
        columns: cols,
        laplace_step: hu,
        trace,
        real_folded: false,
    };
    Ok(Prepared { images, weights: grid.weights, rows, per_branch, xs, col_log, info })
}

/// The factor `V` with `V V* ≈` the kernel operator, plus diagnostics.
pub fn boundary_kernel_factor(
    spec: &SymbolSpec,
    cfg: &KernelRouteConfig,
) -> Result<(Mat<Complex64>, KernelFactorInfo)> {
    let p = prepare(spec, cfg)?;
    let row_data: Vec<Vec<Complex64>> = par::map_slice(&p.rows, |&i| p.row(i));
    let v = Mat::from_fn(p.rows.len(), p.info.columns, |i, k| row_data[i][k]);
    Ok((v, p.info))
}

/// Real factor with the singular values of `V`, for conjugate-symmetric
/// boundary data. Rows `v` and `conj v` at `±Y` are replaced by
/// `√2 Re v` and `√2 Im v`, a unitary change of rows.
fn folded_factor(p: &Prepared) -> Mat<f64> {
    let half: Vec<usize> = p.rows.iter().copied().filter(|&i| i < p.per_branch).collect();
    let row_data: Vec<Vec<Complex64>> = par::map_slice(&half, |&i| p.row(i));
    let r2 = 2f64.sqrt();
    Mat::from_fn(2 * half.len(), p.info.columns, |i, k| {
        let e = row_data[i / 2][k];
        r2 * if i % 2 == 0 { e.re } else { e.im }
    })
}

fn diag_term(w: Complex64, weight: f64, n: f64) -> f64 {
    let d = one_minus_abs_sq_cayley(w);
    if d <= 0.0 {
        return f64::INFINITY;
    }
    weight * d.powf(-n)
}

/// Singular values of the discretised factor, non-increasing, first `n_max`.
pub fn boundary_kernel_values(
    spec: &SymbolSpec,
    cfg: &KernelRouteConfig,
    n_max: usize,
) -> Result<(Vec<f64>, KernelFactorInfo)> {
    let mut p = prepare(spec, cfg)?;
    let lin = |e| Error::LinearAlgebra(format!("{e:?}"));
    let mut s = if p.conjugate_symmetric() {
        p.info.real_folded = true;
        folded_factor(&p).singular_values().map_err(lin)?
    } else {
        let row_data: Vec<Vec<Complex64>> = par::map_slice(&p.rows, |&i| p.row(i));
        Mat::from_fn(p.rows.len(), p.info.columns, |i, k| row_data[i][k]).singular_values().map_err(lin)?
    };
    s.sort_by(|a, b| b.total_cmp(a));
    s.truncate(n_max);
    Ok((s, p.info))
}
