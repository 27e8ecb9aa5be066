//! Singular-value spectra, tensor-product s-numbers, the Carleson-profile
//! upper bounds, decay-law fits and β_N window statistics.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::boundary::CarlesonProfile;
use crate::error::{invalid, Error, Result};
use crate::kernel::{boundary_kernel_values, KernelFactorInfo, KernelRouteConfig};
use crate::operator::OperatorMatrix;
use crate::special::{beta, line_fit, median};
use crate::symbols::SymbolSpec;

/// What a spectrum says about the approximation numbers `a_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Semantics {
    /// Singular values of a compression (finite section or kernel ladder):
    /// `s_n ≤ a_n`.
    LowerBoundOfAN,
    /// Converged boundary-kernel quadrature: approximates `a_n` itself,
    /// with absolute error near `1e-16·a_1` but no rigorous enclosure.
    ConvergedQuadrature,
    /// Exactly known values.
    Exact,
    /// Model sequences.
    Synthetic,
}

/// Non-increasing non-negative values `s_1 ≥ s_2 ≥ ...`, indexed from 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularSpectrum {
    values: Vec<f64>,
    truncation: usize,
    semantics: Semantics,
}

impl SingularSpectrum {
    /// Values must be finite, non-negative and non-increasing (ties and
    /// relative wobble below `1e-12·s_1` are tolerated and removed).
    pub fn new(mut values: Vec<f64>, truncation: usize, semantics: Semantics) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(invalid("spectrum values must be finite and non-negative"));
        }
        let top = values.first().copied().unwrap_or(0.0);
        for i in 1..values.len() {
            if values[i] > values[i - 1] {
                if values[i] - values[i - 1] > 1e-12 * top {
                    return Err(invalid(format!("spectrum increases at index {}", i + 1)));
                }
                values[i] = values[i - 1];
            }
        }
        Ok(SingularSpectrum { values, truncation, semantics })
    }

    pub fn synthetic(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        Self::new(values, n, Semantics::Synthetic)
    }

    /// `values[n−1]` for `n` from a closure.
    pub fn from_fn(len: usize, f: impl Fn(usize) -> f64) -> Result<Self> {
        Self::synthetic((1..=len).map(f).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `s_n`, 1-based.
    pub fn get(&self, n: usize) -> Option<f64> {
        n.checked_sub(1).and_then(|i| self.values.get(i)).copied()
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn semantics(&self) -> Semantics {
        self.semantics
    }

    /// Largest `n` with `s_n > floor·s_1`.
    pub fn resolved_len(&self, floor: f64) -> usize {
        let top = self.values.first().copied().unwrap_or(0.0);
        self.values.iter().take_while(|&&v| v > floor * top).count()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,s_n\n");
        for (i, v) in self.values.iter().enumerate() {
            let _ = writeln!(s, "{},{}", i + 1, v);
        }
        s
    }
}

/// Relative level below which spectra are treated as numerically unresolved.
pub const RESOLVED_FLOOR: f64 = 1e-12;

/// First `n_max` singular values of a finite section (lower bounds for `a_n`).
pub fn singular_values(m: &OperatorMatrix, n_max: usize) -> Result<SingularSpectrum> {
    let size = m.entries().nrows().min(m.entries().ncols());
    if n_max > size {
        return Err(invalid(format!("n_max = {n_max} exceeds matrix size {size}")));
    }
    let mut s = m.entries().singular_values().map_err(|e| {
        Error::LinearAlgebra(format!(
            "SVD did not converge on a {}x{} section: {e:?}",
            m.entries().nrows(),
            m.entries().ncols()
        ))
    })?;
    s.sort_by(|a, b| b.total_cmp(a));
    s.truncate(n_max);
    SingularSpectrum::new(s, m.truncation(), Semantics::LowerBoundOfAN)
}

/// Spectrum of `Φ = (φ(z₁), ..., φ(z₁))` on `H²(𝔻^N)` from the boundary kernel.
pub fn kernel_spectrum(
    spec: &SymbolSpec,
    cfg: &KernelRouteConfig,
    n_max: usize,
) -> Result<(SingularSpectrum, KernelFactorInfo)> {
    let (v, info) = boundary_kernel_values(spec, cfg, n_max)?;
    let cols = info.columns;
    Ok((SingularSpectrum::new(v, cols, Semantics::ConvergedQuadrature)?, info))
}

/// Radial ladder of kernel points `a_j = T⁻¹(e^{x₀ + jΔ})`, `j < points`,
/// accumulating at the contact point `z = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelLadder {
    pub points: usize,
    pub x0: f64,
    pub step: f64,
}

impl Default for KernelLadder {
    fn default() -> Self {
        KernelLadder { points: 400, x0: 0.0, step: 0.5 }
    }
}

/// Conditioning of the normalised kernel Gram matrix of a ladder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderInfo {
    pub ladder: KernelLadder,
    pub gram_min_eig: f64,
    pub gram_max_eig: f64,
}

/// Lower bounds `a_k(C_φ) ≥ λ_k^{1/2}` on `H²(𝔻)` from the normalised
/// Szegő kernels `k_{a_j}` of a radial ladder.
///
/// `C_φ* k_a = k_{φ(a)}`, so on `E = span{k_{a_j}}` the Rayleigh quotient of
/// `C_φ C_φ*` is the pencil `(G_φ, G_a)` of Gram matrices of `k_{φ(a_j)}`
/// and `k_{a_j}`; by min-max its eigenvalues bound `a_k²` from below. Both
/// Gram matrices are evaluated in Cayley coordinates, so points within
/// `e^{−300}` of the boundary cause no cancellation.
pub fn ladder_lower_bounds(spec: &SymbolSpec, ladder: &KernelLadder) -> Result<(SingularSpectrum, LadderInfo)> {
    use faer::{Mat, Side};
    use num_complex::Complex64;

    let n = ladder.points;
    if n == 0 || !(ladder.step > 0.0) || !ladder.x0.is_finite() {
        return Err(invalid("ladder needs points > 0, step > 0 and finite x0"));
    }
    let x_last = ladder.x0 + (n - 1) as f64 * ladder.step;
    if x_last > 300.0 || ladder.x0 < -300.0 {
        return Err(invalid(format!("ladder abscissae must stay within [−300, 300], got up to {x_last}")));
    }
    spec.validate()?;
    let xs: Vec<f64> = (0..n).map(|j| (ladder.x0 + j as f64 * ladder.step).exp()).collect();
    let vs: Vec<Complex64> = crate::par::try_map_slice(&xs, |&x| spec.eval_cayley(Complex64::new(x, 0.0)))?;
    if let Some(v) = vs.iter().find(|v| !(v.re > 0.0)) {
        return Err(Error::Singular(format!("{} maps a ladder point to the boundary (W = {v})", spec.label())));
    }
    let ga = Mat::<f64>::from_fn(n, n, |i, j| 2.0 * (xs[i] * xs[j]).sqrt() / (xs[i] + xs[j]));
    let r: Vec<Complex64> = vs.iter().zip(&xs).map(|(v, x)| (1.0 + v) / (1.0 + x)).collect();
    let gphi = Mat::<Complex64>::from_fn(n, n, |i, j| {
        r[i] * r[j].conj() * (2.0 * (xs[i] * xs[j]).sqrt()) / (vs[i] + vs[j].conj())
    });
    let lin = |e| Error::LinearAlgebra(format!("{e:?}"));
    let eig = ga.self_adjoint_eigen(Side::Lower).map_err(lin)?;
    let lam: Vec<f64> = (0..n).map(|i| eig.S()[i]).collect();
    let (lo, hi) = (lam[0], lam[n - 1]);
    if !(lo > 1e-10 * hi) {
        return Err(Error::Singular(format!("ladder Gram matrix is ill-conditioned (eigenvalues {lo:e}..{hi:e})")));
    }
    let u = eig.U();
    let z = Mat::<Complex64>::from_fn(n, n, |i, k| Complex64::new(u[(i, k)] / lam[k].sqrt(), 0.0));
    let m = z.adjoint() * &gphi * &z;
    let m = Mat::<Complex64>::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    let mut vals: Vec<f64> =
        m.self_adjoint_eigenvalues(Side::Lower).map_err(lin)?.into_iter().map(|l| l.max(0.0).sqrt()).collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    let info = LadderInfo { ladder: *ladder, gram_min_eig: lo, gram_max_eig: hi };
    Ok((SingularSpectrum::new(vals, n, Semantics::LowerBoundOfAN)?, info))
}

#[derive(PartialEq)]
struct Cand {
    v: f64,
    i: usize,
    j: usize,
}

impl Eq for Cand {}

impl PartialOrd for Cand {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cand {
    fn cmp(&self, other: &Self) -> Ordering {
        self.v.total_cmp(&other.v).then_with(|| other.i.cmp(&self.i)).then_with(|| other.j.cmp(&self.j))
    }
}

fn merge_two(s: &[f64], t: &[f64], n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max.min(s.len() * t.len()));
    if s.is_empty() || t.is_empty() {
        return out;
    }
    let mut heap = BinaryHeap::new();
    for (i, &si) in s.iter().enumerate().take(n_max) {
        heap.push(Cand { v: si * t[0], i, j: 0 });
    }
    while out.len() < n_max {
        let Some(Cand { v, i, j }) = heap.pop() else { break };
        out.push(v);
        if j + 1 < t.len() {
            heap.push(Cand { v: s[i] * t[j + 1], i, j: j + 1 });
        }
    }
    out
}

fn weakest(a: Semantics, b: Semantics) -> Semantics {
    use Semantics::*;
    match (a, b) {
        (Synthetic, _) | (_, Synthetic) => Synthetic,
        (LowerBoundOfAN, _) | (_, LowerBoundOfAN) => LowerBoundOfAN,
        (ConvergedQuadrature, _) | (_, ConvergedQuadrature) => ConvergedQuadrature,
        _ => Exact,
    }
}

/// First `n_max` values of the non-increasing rearrangement of all products
/// `s_j t_k ...`, the singular values of the tensor product. Pairwise heap
/// merges truncated at `n_max`; the full product set is never formed.
pub fn tensor_merge(factors: &[&SingularSpectrum], n_max: usize) -> Result<SingularSpectrum> {
    let (first, rest) = factors.split_first().ok_or_else(|| invalid("tensor_merge needs at least one factor"))?;
    let mut acc: Vec<f64> = first.values().iter().take(n_max).copied().collect();
    let mut sem = first.semantics();
    let mut trunc = first.truncation().max(1);
    for f in rest {
        acc = merge_two(&acc, f.values(), n_max);
        sem = weakest(sem, f.semantics());
        trunc = trunc.saturating_mul(f.truncation().max(1));
    }
    SingularSpectrum::new(acc, trunc, sem)
}

/// Relative tolerance under which a product counts as equal to the threshold.
const TIE_TOLERANCE: f64 = 1e-12;

/// `#{(j, k) : s_j t_k > x}` by a two-pointer sweep; products within a
/// relative `1e-12` of `x` count as ties and are excluded.
pub fn count_products_above(s: &[f64], t: &[f64], x: f64) -> u64 {
    let lx = x.ln() + TIE_TOLERANCE;
    let mut k = t.len();
    let mut count = 0u64;
    for &sj in s {
        if sj <= 0.0 {
            break;
        }
        let ls = sj.ln();
        while k > 0 && (t[k - 1] <= 0.0 || ls + t[k - 1].ln() <= lx) {
            k -= 1;
        }
        if k == 0 {
            break;
        }
        count += k as u64;
    }
    count
}

/// `ν_n = #{(j, k) : s_j t_k > e^{−cn}}`.
pub fn nu_count(s: &SingularSpectrum, t: &SingularSpectrum, c: f64, n: u64) -> Result<u64> {
    for (name, v) in [("s", s), ("t", t)] {
        match v.get(1) {
            Some(x) if x <= 1.0 + 1e-12 => {}
            _ => return Err(invalid(format!("{name} must be non-empty and normalised to {name}_1 <= 1"))),
        }
    }
    if !(c > 0.0) {
        return Err(invalid("c must be positive"));
    }
    Ok(count_products_above(s.values(), t.values(), (-c * n as f64).exp()))
}

/// `Σ_{l=1}^{n} (n−l+1)^A l^{B−1}`.
pub fn lemma_sum(a: f64, b: f64, n: u64) -> f64 {
    (1..=n).map(|l| ((n - l + 1) as f64).powf(a) * (l as f64).powf(b - 1.0)).sum()
}

/// Constant of the tensor-product lemma with its certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaConstant {
    pub m: u64,
    pub a: f64,
    pub b: f64,
    pub n_max: u64,
    /// `lim Σ_l (n−l+1)^A l^{B−1} / n^{A+B} = B(A+1, B)`.
    pub riemann_limit: f64,
    /// `max_{n ≤ n_max} (Σ + 1)/n^{A+B}`, whose ceiling is `M`.
    pub worst_ratio: f64,
    pub worst_n: u64,
}

/// Smallest integer `M` with `Σ_{l=1}^n (n−l+1)^A l^{B−1} ≤ M n^{A+B} − 1`
/// for all `n ≤ n_max`, checked directly after computing the candidate.
pub fn find_m(a: f64, b: f64, n_max: u64) -> Result<LemmaConstant> {
    if !(a > 0.0 && b > 0.0) {
        return Err(invalid(format!("A and B must be positive, got {a}, {b}")));
    }
    if n_max == 0 || n_max > 100_000 {
        return Err(invalid("n_max must lie in 1..=100000"));
    }
    let mut worst_ratio = 0.0f64;
    let mut worst_n = 1;
    let mut sums = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        let s = lemma_sum(a, b, n);
        let r = (s + 1.0) / (n as f64).powf(a + b);
        if r > worst_ratio {
            worst_ratio = r;
            worst_n = n;
        }
        sums.push(s);
    }
    let mut m = (worst_ratio.ceil() as u64).max(1);
    // Guard against the ratio landing a rounding error below an integer.
    while !(1..=n_max).all(|n| sums[(n - 1) as usize] <= m as f64 * (n as f64).powf(a + b) - 1.0) {
        m += 1;
    }
    while m > 1 && (1..=n_max).all(|n| sums[(n - 1) as usize] <= (m - 1) as f64 * (n as f64).powf(a + b) - 1.0) {
        m -= 1;
    }
    Ok(LemmaConstant { m, a, b, n_max, riemann_limit: beta(a + 1.0, b), worst_ratio, worst_n })
}

/// Extremal sequence `e^{−c⌈j^{1/A}⌉}`, `j = 1..=len`.
pub fn level_sequence(a: f64, c: f64, len: usize) -> Result<SingularSpectrum> {
    SingularSpectrum::from_fn(len, |j| (-c * level(j as f64, a) as f64).exp())
}

/// `⌈j^{1/A}⌉` with exact integer handling of perfect powers.
pub fn level(j: f64, a: f64) -> u64 {
    let r = j.powf(1.0 / a);
    let k = r.round();
    if (k.powf(a) - j).abs() <= 1e-9 * j {
        k as u64
    } else {
        r.ceil() as u64
    }
}

/// Source of a Carleson function for the bound evaluators.
pub enum RhoSource<'a> {
    Profile(&'a CarlesonProfile),
    /// `ρ` as a function evaluated on an explicit increasing `h`-grid.
    Function {
        rho: &'a dyn Fn(f64) -> f64,
        h_grid: &'a [f64],
    },
}

impl RhoSource<'_> {
    fn pairs(&self) -> Result<Vec<(f64, f64)>> {
        let v: Vec<(f64, f64)> = match self {
            RhoSource::Profile(p) => p.h.iter().copied().zip(p.rho_hat.iter().copied()).collect(),
            RhoSource::Function { rho, h_grid } => h_grid.iter().map(|&h| (h, rho(h))).collect(),
        };
        if v.is_empty() {
            return Err(invalid("empty h grid"));
        }
        if v.iter().any(|(h, r)| !(*h > 0.0) || !(*r >= 0.0)) {
            return Err(invalid("h grid must be positive and rho non-negative"));
        }
        if v.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(invalid("h grid must be increasing"));
        }
        Ok(v)
    }
}

/// `min_h [e^{−nh} + (ρ(h)/h)^{1/2}]` over the grid.
pub fn upper_bound_plain(src: &RhoSource<'_>, n: u64) -> Result<f64> {
    let v = src.pairs()?;
    Ok(v.iter().map(|&(h, r)| (-(n as f64) * h).exp() + (r / h).sqrt()).fold(f64::INFINITY, f64::min))
}

/// `min_h [(n+1)^{(γ+1)/2} e^{−nh} + sup_{t ≤ h} (ρ(t)/t^{2+γ})^{1/2}]` over
/// the grid, with the inner sup taken over grid points.
pub fn upper_bound_weighted(src: &RhoSource<'_>, n: u64, gamma: f64) -> Result<f64> {
    if !(gamma >= -1.0) {
        return Err(invalid("gamma must be >= -1"));
    }
    let v = src.pairs()?;
    let lead = ((n + 1) as f64).powf((gamma + 1.0) / 2.0);
    let mut sup = 0.0f64;
    let mut best = f64::INFINITY;
    for &(h, r) in &v {
        sup = sup.max((r / h.powf(2.0 + gamma)).sqrt());
        best = best.min(lead * (-(n as f64) * h).exp() + sup);
    }
    Ok(best)
}

/// Window statistics for `β_N^±`: min and max of `s_n^{1/n^{1/N}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaEstimate {
    pub n_dim: usize,
    pub beta_minus_hat: f64,
    pub beta_plus_hat: f64,
    /// Inclusive 1-based index range.
    pub window: (usize, usize),
    /// Set when a zero value made the window degenerate.
    pub degenerate: bool,
}

/// Window min/max of `s_n^{1/n^{1/N}}`; the default window is the trailing
/// half of the spectrum.
pub fn beta_estimate(s: &SingularSpectrum, n_dim: usize, window: Option<(usize, usize)>) -> Result<BetaEstimate> {
    if n_dim == 0 {
        return Err(invalid("N must be >= 1"));
    }
    let (lo, hi) = window.unwrap_or(((s.len() / 2).max(1), s.len()));
    if lo == 0 || hi < lo || hi > s.len() {
        return Err(invalid(format!("window [{lo}, {hi}] outside 1..={}", s.len())));
    }
    let mut mn = f64::INFINITY;
    let mut mx = 0.0f64;
    let mut degenerate = false;
    for n in lo..=hi {
        let v = s.get(n).expect("in range");
        if v <= 0.0 {
            degenerate = true;
            mn = 0.0;
            continue;
        }
        let b = (v.ln() / (n as f64).powf(1.0 / n_dim as f64)).exp();
        mn = mn.min(b);
        mx = mx.max(b);
    }
    Ok(BetaEstimate { n_dim, beta_minus_hat: mn, beta_plus_hat: mx, window: (lo, hi), degenerate })
}

/// Decay law family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayModel {
    /// `a_n ≈ C e^{−c n^α}`.
    StretchedExp,
    /// `a_n ≈ C n^{−p}`.
    Poly,
    /// `a_n ≈ C e^{−a n}`.
    ExpLinear,
}

/// Fitted decay law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub model: DecayModel,
    /// `c`, `p` or `a` depending on the model.
    pub rate: f64,
    /// `α` for the stretched exponential; 1 for exp-linear; 0 for poly.
    pub alpha: f64,
    /// `C`.
    pub prefactor: f64,
    pub r2: f64,
    pub range: (usize, usize),
}

fn fit_at(ns: &[f64], ys: &[f64], alpha: f64) -> Option<crate::special::LineFit> {
    let xs: Vec<f64> = ns.iter().map(|n| n.powf(alpha)).collect();
    line_fit(&xs, ys)
}

/// Least-squares fit of `log s_n` over the inclusive 1-based `range`.
///
/// The stretched exponential scans `α ∈ {0.05, ..., 0.95}` and refines the
/// best scan point by golden-section search on `R²`.
pub fn decay_fit(s: &SingularSpectrum, model: DecayModel, range: (usize, usize)) -> Result<DecayFit> {
    let (lo, hi) = range;
    if lo == 0 || hi > s.len() || hi < lo {
        return Err(invalid(format!("fit range [{lo}, {hi}] outside 1..={}", s.len())));
    }
    if hi - lo + 1 < 6 {
        return Err(Error::InsufficientData(format!("fit range [{lo}, {hi}] has fewer than 6 points")));
    }
    let ns: Vec<f64> = (lo..=hi).map(|n| n as f64).collect();
    let mut ys = Vec::with_capacity(ns.len());
    for n in lo..=hi {
        let v = s.get(n).expect("in range");
        if !(v > 0.0) {
            return Err(invalid(format!("non-positive value s_{n} = {v} in fit range")));
        }
        ys.push(v.ln());
    }
    let degenerate = || Error::InsufficientData("degenerate fit data".into());
    let fit = match model {
        DecayModel::Poly => {
            let xs: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
            let f = line_fit(&xs, &ys).ok_or_else(degenerate)?;
            DecayFit { model, rate: -f.slope, alpha: 0.0, prefactor: f.intercept.exp(), r2: f.r2, range }
        }
        DecayModel::ExpLinear => {
            let f = line_fit(&ns, &ys).ok_or_else(degenerate)?;
            DecayFit { model, rate: -f.slope, alpha: 1.0, prefactor: f.intercept.exp(), r2: f.r2, range }
        }
        DecayModel::StretchedExp => {
            let r2 = |a: f64| fit_at(&ns, &ys, a).map(|f| f.r2).unwrap_or(f64::NEG_INFINITY);
            let mut best = (0.05, r2(0.05));
            for i in 2..=19 {
                let a = 0.05 * i as f64;
                let v = r2(a);
                if v > best.1 {
                    best = (a, v);
                }
            }
            // Golden-section refinement on [α − 0.05, α + 0.05].
            let (mut a, mut b) = ((best.0 - 0.05).max(1e-3), best.0 + 0.05);
            let g = (5f64.sqrt() - 1.0) / 2.0;
            let mut x1 = b - g * (b - a);
            let mut x2 = a + g * (b - a);
            let (mut f1, mut f2) = (r2(x1), r2(x2));
            for _ in 0..200 {
                if (b - a).abs() < 1e-12 {
                    break;
                }
                if f1 < f2 {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + g * (b - a);
                    f2 = r2(x2);
                } else {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - g * (b - a);
                    f1 = r2(x1);
                }
            }
            let mut alpha = 0.5 * (a + b);
            if r2(best.0) > r2(alpha) {
                alpha = best.0;
            }
            let f = fit_at(&ns, &ys, alpha).ok_or_else(degenerate)?;
            DecayFit { model, rate: -f.slope, alpha, prefactor: f.intercept.exp(), r2: f.r2, range }
        }
    };
    Ok(DecayFit { r2: fit.r2.clamp(0.0, 1.0), ..fit })
}

/// Intersects `range` with the numerically resolved part of the spectrum
/// (`s_n > 1e-12·s_1`).
pub fn resolved_range(s: &SingularSpectrum, range: (usize, usize)) -> (usize, usize) {
    (range.0, range.1.min(s.resolved_len(RESOLVED_FLOOR)))
}

/// Shape checks against the geometric lower bound `a_n ≥ δ e^{−an}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    /// `min_n (log s_n)/n` over positive values.
    pub min_log_ratio: f64,
    /// `(n, median of (log s_k)/k over k ∈ [n/2, n])` for dyadic `n`.
    pub tail_medians: Vec<(usize, f64)>,
    /// Whether the tail medians are non-decreasing.
    pub medians_non_decreasing: bool,
    pub warnings: Vec<String>,
}

/// Reports `min (log s_n)/n` and, for symbols with `‖φ‖_∞ = 1`, whether
/// `(log s_n)/n` drifts toward 0. Problems are warnings about the section,
/// never refutations.
pub fn lower_bound_sanity(s: &SingularSpectrum, full_norm: bool) -> LowerBoundReport {
    let mut warnings = Vec::new();
    let ratios: Vec<Option<f64>> = s
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| if v > 0.0 { Some(v.ln() / (i + 1) as f64) } else { None })
        .collect();
    if let Some(i) = ratios.iter().position(|r| r.is_none()) {
        warnings.push(format!("zero singular value from n = {}", i + 1));
    }
    let min_log_ratio = ratios.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let mut tail_medians = Vec::new();
    let mut n = 4;
    while n <= s.len() {
        let w: Vec<f64> = ratios[n / 2 - 1..n].iter().flatten().copied().collect();
        if !w.is_empty() {
            tail_medians.push((n, median(&w)));
        }
        n *= 2;
    }
    let medians_non_decreasing = tail_medians.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-12);
    if full_norm && !medians_non_decreasing {
        warnings.push("tail medians of (log s_n)/n do not increase toward 0".into());
    }
    LowerBoundReport { min_log_ratio, tail_medians, medians_non_decreasing, warnings }
}

/// A decay schedule from the existence theorems.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schedule {
    /// `ε_n = scale · n^{−exponent}`, implying `a_n ≲ e^{−n ε_n}`.
    EpsilonN { scale: f64, exponent: f64 },
    /// `δ(h) = exp(−scale · h^{−exponent})`.
    DeltaH { scale: f64, exponent: f64 },
}

impl Schedule {
    pub fn epsilon_power(exponent: f64) -> Result<Self> {
        if !(exponent > 0.0) {
            return Err(invalid("ε_n exponent must be positive"));
        }
        Ok(Schedule::EpsilonN { scale: 1.0, exponent })
    }

    /// `ε_n = n^{−1/(4N−7)}`.
    pub fn polydisk_epsilon(n_dim: usize) -> Result<Self> {
        if n_dim < 2 {
            return Err(invalid("N must be >= 2"));
        }
        Self::epsilon_power(1.0 / (4.0 * n_dim as f64 - 7.0))
    }

    /// `δ` with `δ(ε_n) = e^{−n ε_n}` for `ε_n = n^{−p}`:
    /// `δ(h) = exp(−h^{−(1−p)/p})`.
    pub fn delta_matching(eps_exponent: f64) -> Result<Self> {
        if !(eps_exponent > 0.0 && eps_exponent < 1.0) {
            return Err(invalid("ε_n exponent must lie in (0, 1)"));
        }
        Ok(Schedule::DeltaH { scale: 1.0, exponent: (1.0 - eps_exponent) / eps_exponent })
    }

    pub fn epsilon(&self, n: u64) -> Option<f64> {
        match self {
            Schedule::EpsilonN { scale, exponent } => Some(scale * (n as f64).powf(-exponent)),
            Schedule::DeltaH { .. } => None,
        }
    }

    pub fn delta(&self, h: f64) -> Option<f64> {
        match self {
            Schedule::DeltaH { scale, exponent } => Some((-scale * h.powf(-exponent)).exp()),
            Schedule::EpsilonN { .. } => None,
        }
    }

    /// `e^{−n ε_n}`.
    pub fn implied_bound(&self, n: u64) -> Option<f64> {
        self.epsilon(n).map(|e| (-(n as f64) * e).exp())
    }
}

/// Verdict of the dyadic block test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Summable,
    NotSummable,
    Inconclusive,
}

/// Source for [`schatten_membership`].
pub enum SequenceSource<'a> {
    Spectrum(&'a SingularSpectrum),
    Schedule(&'a Schedule),
}

/// Number of terms generated from a schedule.
const SCHEDULE_TERMS: u64 = 1 << 24;

/// Dyadic block sums `B_j = Σ_{2^j ≤ n < 2^{j+1}} s_n^p`: the two trailing
/// ratios below 0.8 give `summable`; both at least 0.98 (blocks not
/// shrinking, as for `1/n`) give `not_summable`.
pub fn schatten_membership(src: &SequenceSource<'_>, p: f64) -> Result<Membership> {
    if !(p > 0.0) {
        return Err(invalid("p must be positive"));
    }
    let (len, term): (u64, Box<dyn Fn(u64) -> f64 + '_>) = match src {
        SequenceSource::Spectrum(s) => (s.len() as u64, Box::new(move |n| s.get(n as usize).unwrap_or(0.0))),
        SequenceSource::Schedule(sch) => {
            if sch.epsilon(1).is_none() {
                return Err(invalid("schatten_membership needs an ε_n schedule"));
            }
            (SCHEDULE_TERMS, Box::new(move |n| sch.implied_bound(n).unwrap_or(0.0)))
        }
    };
    let mut blocks = Vec::new();
    let mut j = 0;
    while (1u64 << (j + 1)) - 1 <= len {
        let b: f64 = ((1u64 << j)..(1u64 << (j + 1))).map(|n| term(n).powf(p)).sum();
        blocks.push(b);
        j += 1;
    }
    if blocks.len() < 4 {
        return Ok(Membership::Inconclusive);
    }
    let k = blocks.len();
    let (b0, b1, b2) = (blocks[k - 3], blocks[k - 2], blocks[k - 1]);
    if b2 == 0.0 || (b1 > 0.0 && b2 / b1 < 0.8 && b1 / b0 < 0.8) {
        return Ok(Membership::Summable);
    }
    if b1 > 0.0 && b2 / b1 >= 0.98 && b1 / b0 >= 0.98 {
        return Ok(Membership::NotSummable);
    }
    Ok(Membership::Inconclusive)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::build_matrix;
    use crate::series::SpaceParam;
    use approx::assert_relative_eq;
    use faer::Mat;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec_from(v: &[f64]) -> SingularSpectrum {
        SingularSpectrum::synthetic(v.to_vec()).unwrap()
    }

    #[test]
    fn ladder_identity_is_exact() {
        let (s, info) =
            ladder_lower_bounds(&SymbolSpec::identity(), &KernelLadder { points: 60, x0: -5.0, step: 0.5 }).unwrap();
        assert!(info.gram_min_eig > 0.0);
        for v in s.values() {
            assert_relative_eq!(*v, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn ladder_stays_below_converged_spectrum() {
        let spec = SymbolSpec::lens(0.25).unwrap();
        let (lb, _) = ladder_lower_bounds(&spec, &KernelLadder { points: 120, x0: 0.0, step: 0.5 }).unwrap();
        let (full, _) = kernel_spectrum(&spec, &KernelRouteConfig::default(), 120).unwrap();
        for n in 1..=120 {
            assert!(lb.get(n).unwrap() <= full.get(n).unwrap() + 1e-8, "n={n}");
        }
        assert_eq!(lb.semantics(), Semantics::LowerBoundOfAN);
    }

    #[test]
    fn ladder_rejects_bad_input() {
        assert!(ladder_lower_bounds(&SymbolSpec::identity(), &KernelLadder { points: 10, x0: 0.0, step: 0.0 }).is_err());
        assert!(
            ladder_lower_bounds(&SymbolSpec::identity(), &KernelLadder { points: 1000, x0: 0.0, step: 0.5 }).is_err()
        );
        assert!(ladder_lower_bounds(
            &SymbolSpec::rotation(0.5).unwrap(),
            &KernelLadder { points: 40, x0: 0.0, step: 0.1 }
        )
        .is_err());
    }

    #[test]
    fn rejects_increasing() {
        assert!(SingularSpectrum::synthetic(vec![0.5, 1.0]).is_err());
        assert!(SingularSpectrum::synthetic(vec![1.0, -0.1]).is_err());
    }

    #[test]
    fn constant_symbol_section() {
        let m = build_matrix(&SymbolSpec::scalar(Complex64::new(0.5, 0.0)).unwrap(), 64, SpaceParam::hardy()).unwrap();
        let s = singular_values(&m, 5).unwrap();
        assert_relative_eq!(s.values()[0], 2.0 / 3f64.sqrt(), max_relative = 1e-10);
        assert!(s.values()[1] <= 1e-12);
        assert_eq!(s.semantics(), Semantics::LowerBoundOfAN);
    }

    #[test]
    fn merge_small() {
        let a = spec_from(&[1.0, 0.5]);
        let b = spec_from(&[1.0, 1.0 / 3.0]);
        let m = tensor_merge(&[&a, &b], 10).unwrap();
        let expect = [1.0, 0.5, 1.0 / 3.0, 1.0 / 6.0];
        assert_eq!(m.len(), 4);
        for (x, y) in m.values().iter().zip(expect) {
            assert_relative_eq!(*x, y);
        }
        assert!(tensor_merge(&[], 3).is_err());
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> Mat<Complex64> {
        Mat::from_fn(n, n, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    fn svd_sorted(m: &Mat<Complex64>) -> Vec<f64> {
        let mut s = m.singular_values().unwrap();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    #[test]
    fn merge_equals_kronecker() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..10 {
            let a = random_matrix(&mut rng, 5);
            let b = random_matrix(&mut rng, 6);
            let kron = Mat::from_fn(30, 30, |i, j| a[(i / 6, j / 6)] * b[(i % 6, j % 6)]);
            let sa = SingularSpectrum::new(svd_sorted(&a), 5, Semantics::Exact).unwrap();
            let sb = SingularSpectrum::new(svd_sorted(&b), 6, Semantics::Exact).unwrap();
            let merged = tensor_merge(&[&sa, &sb], 30).unwrap();
            let direct = svd_sorted(&kron);
            for (x, y) in merged.values().iter().zip(&direct) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn supermultiplicative() {
        let s = SingularSpectrum::from_fn(40, |n| (-(n as f64).sqrt()).exp()).unwrap();
        let t = SingularSpectrum::from_fn(40, |n| 1.0 / n as f64).unwrap();
        let m = tensor_merge(&[&s, &t], 400).unwrap();
        for a in 1..=20 {
            for b in 1..=20 {
                assert!(m.get(a * b).unwrap() >= s.get(a).unwrap() * t.get(b).unwrap() * (1.0 - 1e-14));
            }
        }
    }

    #[test]
    fn nu_count_examples() {
        let one = spec_from(&[1.0]);
        assert_eq!(nu_count(&one, &one, 1.0, 3).unwrap(), 1);
        // Brute force on integer levels: pairs with ⌈j^{1/2}⌉ + k < 10.
        let (a, b, n) = (2.0, 1.0, 10u64);
        let s = level_sequence(a, 1.0, 200).unwrap();
        let t = level_sequence(b, 1.0, 200).unwrap();
        let mut brute = 0u64;
        for j in 1..=200u64 {
            for k in 1..=200u64 {
                if level(j as f64, a) + level(k as f64, b) < n {
                    brute += 1;
                }
            }
        }
        assert_eq!(nu_count(&s, &t, 1.0, n).unwrap(), brute);
        assert!(brute as f64 <= lemma_sum(a, b, n));
    }

    #[test]
    fn find_m_examples() {
        assert_eq!(find_m(1.0, 1.0, 100).unwrap().m, 2);
        let r = find_m(2.0, 1.0, 100).unwrap();
        for n in 1..=100u64 {
            assert!(lemma_sum(2.0, 1.0, n) <= r.m as f64 * (n as f64).powi(3) - 1.0);
        }
        assert!(r.m >= 1);
        assert_relative_eq!(r.riemann_limit, 1.0 / 3.0, max_relative = 1e-12);
        // Riemann limit against the sum itself at large n.
        let big = lemma_sum(1.5, 2.25, 20_000) / 20_000f64.powf(3.75);
        assert_relative_eq!(big, beta(2.5, 2.25), max_relative = 1e-3);
    }

    #[test]
    fn lemma_conclusion_on_extremal_sequences() {
        for (a, b) in [(1.0, 1.0), (2.0, 1.0), (1.5, 2.25), (2.0, 2.0), (2.0, 3.0)] {
            let m = find_m(a, b, 30).unwrap().m;
            let s = level_sequence(a, 1.0, 32f64.powf(a) as usize).unwrap();
            let t = level_sequence(b, 1.0, 32f64.powf(b) as usize).unwrap();
            for n in 1..=30u64 {
                let nu = nu_count(&s, &t, 1.0, n).unwrap();
                let idx = m * (n as f64).powf(a + b).floor() as u64;
                assert!(nu < idx, "A={a} B={b} n={n}: nu={nu} idx={idx}");
            }
        }
    }

    #[test]
    fn upper_bound_zero_profile() {
        let grid: Vec<f64> = (1..=99).map(|i| i as f64 / 100.0).collect();
        let zero = |_: f64| 0.0;
        let b = upper_bound_plain(&RhoSource::Function { rho: &zero, h_grid: &grid }, 10).unwrap();
        assert_relative_eq!(b, (-9.9f64).exp(), max_relative = 1e-12);
    }

    #[test]
    fn upper_bound_exp_profile() {
        // ρ(h) = h e^{−2/h}: e^{−nh} + e^{−1/h}, optimum near h = n^{−1/2}.
        let n = 100u64;
        let grid: Vec<f64> = (1..=100_000).map(|i| i as f64 * 1e-5).collect();
        let rho = |h: f64| h * (-2.0 / h).exp();
        let b = upper_bound_plain(&RhoSource::Function { rho: &rho, h_grid: &grid }, n).unwrap();
        // Independent 1-D golden-section minimisation of the same expression.
        let f = |h: f64| (-(n as f64) * h).exp() + (-1.0 / h).exp();
        let (mut lo, mut hi) = (1e-3, 1.0);
        for _ in 0..200 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if f(m1) < f(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        assert_relative_eq!(b, f(0.5 * (lo + hi)), max_relative = 1e-6);
        let v = b.ln() / (n as f64).sqrt();
        assert!((v - (2f64.ln() / 10.0 - 1.0)).abs() < 1e-3, "{v}");
    }

    #[test]
    fn upper_bound_schedule() {
        // ρ(h) = h δ(h)², δ(ε_n) = e^{−n ε_n}: bound at h = ε_n is ≤ 2e^{−nε_n}.
        let eps = Schedule::epsilon_power(0.5).unwrap();
        let delta = Schedule::delta_matching(0.5).unwrap();
        for n in [16u64, 100, 1000] {
            let e = eps.epsilon(n).unwrap();
            let rho = |h: f64| h * delta.delta(h).unwrap().powi(2);
            let grid = [e];
            let b = upper_bound_plain(&RhoSource::Function { rho: &rho, h_grid: &grid }, n).unwrap();
            assert!(b <= 2.0 * eps.implied_bound(n).unwrap() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn weighted_bound_shapes() {
        let grid = crate::special::geomspace(1e-3, 0.99, 4000);
        // ρ(t) = e^{−2/t}, γ = N − 2 for N = 2, 3: log value/√n ≤ −const.
        let rho = |t: f64| (-2.0 / t).exp();
        for gamma in [0.0, 1.0] {
            let mut worst = f64::NEG_INFINITY;
            for n in [16u64, 64, 256, 1024, 4096] {
                let v = upper_bound_weighted(&RhoSource::Function { rho: &rho, h_grid: &grid }, n, gamma).unwrap();
                worst = worst.max(v.ln() / (n as f64).sqrt());
            }
            assert!(worst < -0.2, "γ={gamma}: {worst}");
        }
        // ρ(t) = t²e^{−2/t²}, γ = 0: log value/n^{2/3} ≤ −const.
        let rho2 = |t: f64| t * t * (-2.0 / (t * t)).exp();
        let mut worst2 = f64::NEG_INFINITY;
        for n in [64u64, 512, 4096] {
            let v = upper_bound_weighted(&RhoSource::Function { rho: &rho2, h_grid: &grid }, n, 0.0).unwrap();
            worst2 = worst2.max(v.ln() / (n as f64).powf(2.0 / 3.0));
        }
        assert!(worst2 < -0.3, "{worst2}");
    }

    #[test]
    fn weighted_reduces_to_plain() {
        // With ρ(t)/t non-decreasing the inner sup is attained at t = h.
        let grid = crate::special::geomspace(1e-3, 0.9, 200);
        let rho = |t: f64| t * t;
        let src = RhoSource::Function { rho: &rho, h_grid: &grid };
        for n in [1u64, 10, 100, 1000] {
            assert_eq!(upper_bound_weighted(&src, n, -1.0).unwrap(), upper_bound_plain(&src, n).unwrap());
        }
    }

    #[test]
    fn beta_examples() {
        let s = SingularSpectrum::from_fn(400, |n| (-(n as f64).sqrt()).exp()).unwrap();
        let b = beta_estimate(&s, 2, None).unwrap();
        assert_relative_eq!(b.beta_minus_hat, (-1f64).exp(), max_relative = 1e-12);
        assert_relative_eq!(b.beta_plus_hat, (-1f64).exp(), max_relative = 1e-12);
        let p = SingularSpectrum::from_fn(400, |n| (n as f64).powf(-1.5)).unwrap();
        let bp = beta_estimate(&p, 2, Some((100, 400))).unwrap();
        assert!(bp.beta_minus_hat > 0.5 && bp.beta_plus_hat <= 1.0);
        let e = SingularSpectrum::from_fn(400, |n| (-(n as f64)).exp()).unwrap();
        assert!(beta_estimate(&e, 2, Some((100, 400))).unwrap().beta_plus_hat <= (-10f64).exp() * (1.0 + 1e-12));
    }

    #[test]
    fn decay_exact_models() {
        let s = SingularSpectrum::from_fn(300, |n| (-2.0 * (n as f64).sqrt()).exp()).unwrap();
        let f = decay_fit(&s, DecayModel::StretchedExp, (1, 300)).unwrap();
        assert!((f.rate - 2.0).abs() < 1e-6 && (f.alpha - 0.5).abs() < 1e-6, "{f:?}");
        assert_relative_eq!(f.r2, 1.0, epsilon = 1e-12);
        let p = SingularSpectrum::from_fn(300, |n| (n as f64).powf(-1.5)).unwrap();
        let g = decay_fit(&p, DecayModel::Poly, (1, 300)).unwrap();
        assert!((g.rate - 1.5).abs() < 1e-6);
        let e = SingularSpectrum::from_fn(100, |n| 3.0 * (-0.2 * n as f64).exp()).unwrap();
        let h = decay_fit(&e, DecayModel::ExpLinear, (1, 100)).unwrap();
        assert!((h.rate - 0.2).abs() < 1e-9 && (h.prefactor - 3.0).abs() < 1e-9);
        assert!(decay_fit(&e, DecayModel::Poly, (1, 5)).is_err());
        let z = SingularSpectrum::synthetic(vec![1.0, 0.5, 0.25, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(decay_fit(&z, DecayModel::Poly, (1, 7)).is_err());
    }

    #[test]
    fn lower_bound_examples() {
        let s = SingularSpectrum::from_fn(64, |n| 0.5f64.powi(n as i32)).unwrap();
        let r = lower_bound_sanity(&s, false);
        assert_relative_eq!(r.min_log_ratio, -(2f64.ln()), max_relative = 1e-12);
        let one = SingularSpectrum::from_fn(64, |_| 1.0).unwrap();
        let r1 = lower_bound_sanity(&one, true);
        assert!(r1.warnings.is_empty() && r1.min_log_ratio == 0.0);
    }

    #[test]
    fn schatten_examples() {
        let sch = Schedule::epsilon_power(0.5).unwrap();
        assert_eq!(schatten_membership(&SequenceSource::Schedule(&sch), 0.1).unwrap(), Membership::Summable);
        let harmonic = SingularSpectrum::from_fn(1 << 16, |n| 1.0 / n as f64).unwrap();
        assert_eq!(schatten_membership(&SequenceSource::Spectrum(&harmonic), 1.0).unwrap(), Membership::NotSummable);
        let sq = SingularSpectrum::from_fn(1 << 16, |n| 1.0 / (n as f64 * n as f64)).unwrap();
        assert_eq!(schatten_membership(&SequenceSource::Spectrum(&sq), 1.0).unwrap(), Membership::Summable);
    }

    proptest! {
        #[test]
        fn merge_is_sorted_product_multiset(
            a in prop::collection::vec(0.0f64..1.0, 1..12),
            b in prop::collection::vec(0.0f64..1.0, 1..12),
        ) {
            let mut a = a; a.sort_by(|x, y| y.total_cmp(x));
            let mut b = b; b.sort_by(|x, y| y.total_cmp(x));
            let sa = spec_from(&a);
            let sb = spec_from(&b);
            let m = tensor_merge(&[&sa, &sb], a.len() * b.len()).unwrap();
            let mut all: Vec<f64> = a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect();
            all.sort_by(|x, y| y.total_cmp(x));
            prop_assert_eq!(m.values(), &all[..]);
        }

        #[test]
        fn count_matches_brute_force(
            a in prop::collection::vec(0.01f64..1.0, 1..30),
            b in prop::collection::vec(0.01f64..1.0, 1..30),
            x in 0.001f64..1.0,
        ) {
            let mut a = a; a.sort_by(|p, q| q.total_cmp(p));
            let mut b = b; b.sort_by(|p, q| q.total_cmp(p));
            let brute = a.iter().flat_map(|p| b.iter().map(move |q| p * q)).filter(|v| v.ln() > x.ln() + TIE_TOLERANCE).count() as u64;
            prop_assert_eq!(count_products_above(&a, &b, x), brute);
        }

        #[test]
        fn find_m_holds(a in 0.5f64..3.0, b in 0.5f64..3.0) {
            let r = find_m(a, b, 60).unwrap();
            for n in 1..=60u64 {
                prop_assert!(lemma_sum(a, b, n) <= r.m as f64 * (n as f64).powf(a + b) - 1.0);
            }
            prop_assert!(r.m == 1 || (1..=60u64).any(|n| lemma_sum(a, b, n) > (r.m - 1) as f64 * (n as f64).powf(a + b) - 1.0));
        }
    }
}
