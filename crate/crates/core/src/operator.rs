//! Finite-section matrices of composition operators and closed-form
//! operator quantities.
//!
//! Column `k` of a section holds the Taylor coefficients of `φ^k`, scaled by
//! the inverse norm of `z^k` in the domain space; rows are in the Hardy
//! space. Compressions of an operator have smaller singular values, so every
//! section gives lower bounds, non-decreasing in `K`.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernel::CayleyGrid;
use crate::par;
use crate::series::{
    circle_points, extract_default, forward_fft, samples_to_coeffs, SamplingPlan, SpaceParam, MAX_ORDER,
};
use crate::special::{ln_binomial, ln_gamma};
use crate::symbols::{one_minus_abs_sq_cayley, KernelPoint, PolySymbolSpec, SymbolSpec};

/// Largest multi-index basis accepted by [`multi_index_oracle`].
pub const ORACLE_MAX_BASIS: usize = 3000;

/// Which symbol a matrix represents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "spec", rename_all = "snake_case")]
pub enum OperatorSymbol {
    Single(SymbolSpec),
    Poly(PolySymbolSpec),
}

/// Column scaling applied to the raw coefficient columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ColumnWeighting {
    /// Orthonormal monomials of the polydisk Hardy space.
    None,
    /// `(k+1)^{(γ+1)/2}`: domain `H²_γ`.
    Bergman { gamma: f64 },
    /// `C(k+N−1, N−1)^{1/2}`: the map `(φ(z₁), ..., φ(z₁))` on `H²(𝔻^N)`.
    PolydiskDiagonal { n_dim: usize },
}

/// A finite section with its provenance.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    entries: Mat<Complex64>,
    symbol: OperatorSymbol,
    weighting: ColumnWeighting,
    truncation: usize,
    alias_error: f64,
}

#[derive(Serialize, Deserialize)]
struct MatrixHeader {
    rows: usize,
    cols: usize,
    truncation: usize,
    weighting: ColumnWeighting,
    symbol: OperatorSymbol,
    alias_error: f64,
    layout: String,
}

impl OperatorMatrix {
    pub fn entries(&self) -> &Mat<Complex64> {
        &self.entries
    }

    pub fn symbol(&self) -> &OperatorSymbol {
        &self.symbol
    }

    pub fn weighting(&self) -> &ColumnWeighting {
        &self.weighting
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// Bound on the aliasing error of each raw (unweighted) coefficient.
    pub fn alias_error(&self) -> f64 {
        self.alias_error
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }

    /// Writes a little-endian binary file: a `u64` header length, a JSON
    /// header, then `(re, im)` pairs in column-major order.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let header = MatrixHeader {
            rows: self.entries.nrows(),
            cols: self.entries.ncols(),
            truncation: self.truncation,
            weighting: self.weighting.clone(),
            symbol: self.symbol.clone(),
            alias_error: self.alias_error,
            layout: "column-major f64 (re, im) little-endian".into(),
        };
        let h = serde_json::to_vec(&header)?;
        let mut out = BufWriter::new(File::create(path)?);
        out.write_all(&(h.len() as u64).to_le_bytes())?;
        out.write_all(&h)?;
        for j in 0..header.cols {
            for i in 0..header.rows {
                let z = self.entries[(i, j)];
                out.write_all(&z.re.to_le_bytes())?;
                out.write_all(&z.im.to_le_bytes())?;
            }
        }
        out.flush()?;
        Ok(())
    }

    /// Reads a file produced by [`write_binary`](Self::write_binary).
    pub fn read_binary(path: &Path) -> Result<Self> {
        let mut input = BufReader::new(File::open(path)?);
        let mut len = [0u8; 8];
        input.read_exact(&mut len)?;
        let mut h = vec![0u8; u64::from_le_bytes(len) as usize];
        input.read_exact(&mut h)?;
        let header: MatrixHeader = serde_json::from_slice(&h)?;
        let mut data = vec![0u8; header.rows * header.cols * 16];
        input.read_exact(&mut data)?;
        let f = |o: usize| f64::from_le_bytes(data[o..o + 8].try_into().expect("8 bytes"));
        let entries = Mat::from_fn(header.rows, header.cols, |i, j| {
            let o = (j * header.rows + i) * 16;
            Complex64::new(f(o), f(o + 8))
        });
        Ok(OperatorMatrix {
            entries,
            symbol: header.symbol,
            weighting: header.weighting,
            truncation: header.truncation,
            alias_error: header.alias_error,
        })
    }
}

fn check_order(k: usize) -> Result<()> {
    if k == 0 || k > MAX_ORDER {
        return Err(Error::TooLarge(format!("truncation order must lie in 1..={MAX_ORDER}, got {k}")));
    }
    Ok(())
}

/// Raw coefficient columns of `φ^k`, `k = 0..=K`, via pointwise powers on the
/// sampling circle and one FFT per column.
fn power_columns(spec: &SymbolSpec, k: usize) -> Result<(Vec<Vec<Complex64>>, f64)> {
    let plan = SamplingPlan::for_order(k);
    let pts = circle_points(plan);
    let vals = par::try_map_slice(&pts, |&z| spec.eval(z))?;
    let fft = forward_fft(plan.samples);
    let cols = par::map_range(k + 1, |p| {
        let buf: Vec<Complex64> = vals.iter().map(|v| v.powu(p as u32)).collect();
        samples_to_coeffs(fft.as_ref(), buf, plan.radius, k)
    });
    Ok((cols, plan.alias_bound()))
}

fn assemble(cols: Vec<Vec<Complex64>>, scale: impl Fn(usize) -> f64) -> Mat<Complex64> {
    let n = cols.len();
    Mat::from_fn(n, n, |i, j| cols[j][i] * scale(j))
}

/// Section of `C_φ: H²_γ → H²` on degrees `0..=K`.
pub fn build_matrix(spec: &SymbolSpec, k: usize, domain: SpaceParam) -> Result<OperatorMatrix> {
    check_order(k)?;
    spec.validate()?;
    let (cols, alias) = power_columns(spec, k)?;
    let g = domain.gamma();
    let entries = assemble(cols, |j| ((j + 1) as f64).powf((g + 1.0) / 2.0));
    Ok(OperatorMatrix {
        entries,
        symbol: OperatorSymbol::Single(spec.clone()),
        weighting: ColumnWeighting::Bergman { gamma: g },
        truncation: k,
        alias_error: alias,
    })
}

/// Section of `C_Φ` for `Φ = (φ(z₁), ..., φ(z₁))` on `H²(𝔻^N)`: column `k`
/// weighted by `C(k+N−1, N−1)^{1/2}`, binomials in log space.
pub fn build_diagonal_polydisk_matrix(spec: &SymbolSpec, n_dim: usize, k: usize) -> Result<OperatorMatrix> {
    if n_dim == 0 {
        return Err(invalid("dimension must be >= 1"));
    }
    check_order(k)?;
    spec.validate()?;
    let (cols, alias) = power_columns(spec, k)?;
    let m = (n_dim - 1) as f64;
    let entries = assemble(cols, |j| (0.5 * ln_binomial(j as f64 + m, m)).exp());
    Ok(OperatorMatrix {
        entries,
        symbol: OperatorSymbol::Single(spec.clone()),
        weighting: ColumnWeighting::PolydiskDiagonal { n_dim },
        truncation: k,
        alias_error: alias,
    })
}

/// Multi-indices of total degree `≤ d` in `n` variables, graded then
/// lexicographic.
pub fn multi_indices(n: usize, d: usize) -> Vec<Vec<u16>> {
    let mut out = Vec::new();
    for total in 0..=d {
        let mut cur = vec![0u16; n];
        fill(&mut out, &mut cur, 0, total);
    }
    out
}

fn fill(out: &mut Vec<Vec<u16>>, cur: &mut Vec<u16>, pos: usize, rest: usize) {
    if pos + 1 == cur.len() {
        cur[pos] = rest as u16;
        out.push(cur.clone());
        return;
    }
    for v in (0..=rest).rev() {
        cur[pos] = v as u16;
        fill(out, cur, pos + 1, rest - v);
    }
}

/// Number of multi-indices of total degree `≤ d` in `n` variables.
pub fn basis_size(n: usize, d: usize) -> f64 {
    ln_binomial((d + n) as f64, n as f64).exp().round()
}

/// Dense section of `C_Φ` on `H²(𝔻^N)` in the monomial basis `z^α`,
/// `|α| ≤ D`. Independent of the diagonal reduction, used to validate it.
pub fn multi_index_oracle(poly: &PolySymbolSpec, d: usize) -> Result<OperatorMatrix> {
    let n = poly.dimension();
    let size = basis_size(n, d);
    if size > ORACLE_MAX_BASIS as f64 {
        return Err(Error::TooLarge(format!("basis of size {size} exceeds {ORACLE_MAX_BASIS}")));
    }
    let basis = multi_indices(n, d);
    let index: HashMap<&[u16], usize> = basis.iter().enumerate().map(|(i, a)| (a.as_slice(), i)).collect();
    // shift[i][v] = index of basis[i] + e_v, if still of degree ≤ d.
    let shift: Vec<Vec<Option<usize>>> = basis
        .iter()
        .map(|a| {
            (0..n)
                .map(|v| {
                    let mut b = a.clone();
                    b[v] += 1;
                    index.get(b.as_slice()).copied()
                })
                .collect()
        })
        .collect();
    let mut alias = 0.0f64;
    let mut series = Vec::with_capacity(n);
    for c in poly.coords() {
        let p = extract_default(|z| c.map.eval(z), d)?;
        alias = alias.max(p.alias_error());
        series.push((c.source, p.coeffs().to_vec()));
    }
    let columns = par::map_slice(&basis, |alpha| {
        let mut poly_c = vec![Complex64::new(0.0, 0.0); basis.len()];
        poly_c[0] = Complex64::new(1.0, 0.0);
        for (j, &e) in alpha.iter().enumerate() {
            let (src, coeffs) = &series[j];
            for _ in 0..e {
                let mut next = vec![Complex64::new(0.0, 0.0); basis.len()];
                for (i, &v) in poly_c.iter().enumerate() {
                    if v == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let mut at = Some(i);
                    for &c in coeffs.iter() {
                        match at {
                            Some(t) => {
                                next[t] += v * c;
                                at = shift[t][*src];
                            }
                            None => break,
                        }
                    }
                }
                poly_c = next;
            }
        }
        poly_c
    });
    let s = basis.len();
    let entries = Mat::from_fn(s, s, |i, j| columns[j][i]);
    Ok(OperatorMatrix {
        entries,
        symbol: OperatorSymbol::Poly(poly.clone()),
        weighting: ColumnWeighting::None,
        truncation: d,
        alias_error: alias,
    })
}

/// Convergence verdict for a monotone partial-sum sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Converging,
    Diverging,
    Inconclusive,
}

/// Hilbert–Schmidt partial sums `Σ_{k≤K} ‖φ^k‖²_{H²}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HsReport {
    pub partial: f64,
    /// `(j, Σ_{2^j ≤ k < 2^{j+1}} ‖φ^k‖²)`.
    pub block_sums: Vec<(u32, f64)>,
    /// Fitted exponent `b` in `B_j ≈ C j^{−b}` over the trailing blocks.
    pub block_exponent: Option<f64>,
    pub trend: Trend,
}

/// `Σ_{k=0}^{K} ‖φ^k‖²` with `‖φ^k‖² = ∫ |φ*|^{2k} dm`, by boundary
/// quadrature with closed-form geometric sums at each node, so `K` may be
/// astronomically large.
///
/// Trend: trailing dyadic block ratio below 0.75 means converging;
/// otherwise a log-log fit of block sums against the block index gives
/// `b > 1.25` converging, `b < 0.75` diverging, else inconclusive.
pub fn hs_norm_sq(spec: &SymbolSpec, k: u64) -> Result<HsReport> {
    if k == 0 {
        return Err(invalid("K must be positive"));
    }
    spec.validate()?;
    let grid = CayleyGrid::new(100.0, 0.1)?;
    let images = grid.images(spec)?;
    let d: Vec<f64> = images.iter().map(|w| one_minus_abs_sq_cayley(*w).clamp(0.0, 1.0)).collect();
    // Σ_{a ≤ k < b} r^{2k} = r^{2a}(1 − r^{2(b−a)})/(1 − r²) with r² = 1 − d.
    let block = |a: u64, b: u64| -> f64 {
        d.iter()
            .zip(&grid.weights)
            .map(|(&di, &w)| {
                let n = (b - a) as f64;
                if di == 0.0 {
                    return w * n;
                }
                if di == 1.0 {
                    return if a == 0 { w } else { 0.0 };
                }
                let l = (-di).ln_1p();
                w * (a as f64 * l).exp() * (-(n * l).exp_m1()) / di
            })
            .sum()
    };
    let partial = block(0, k + 1);
    let top = 63 - (k + 1).leading_zeros();
    let mut block_sums = Vec::new();
    for j in 0..top {
        let (a, b) = (1u64 << j, 1u64 << (j + 1));
        if b - 1 > k {
            break;
        }
        block_sums.push((j, block(a, b)));
    }
    let (trend, block_exponent) = classify_blocks(&block_sums);
    Ok(HsReport { partial, block_sums, block_exponent, trend })
}

fn classify_blocks(blocks: &[(u32, f64)]) -> (Trend, Option<f64>) {
    let usable: Vec<(f64, f64)> = blocks.iter().filter(|(j, _)| *j >= 2).map(|&(j, b)| (j as f64, b)).collect();
    if usable.len() < 6 {
        return (Trend::Inconclusive, None);
    }
    let last = usable.len() - 1;
    let tiny = usable[last].1 <= 1e-300;
    if tiny || usable[last].1 < 0.75 * usable[last - 1].1 && usable[last - 1].1 < 0.75 * usable[last - 2].1 {
        return (Trend::Converging, None);
    }
    let tail = &usable[usable.len() / 2..];
    let xs: Vec<f64> = tail.iter().map(|(j, _)| j.ln()).collect();
    let ys: Vec<f64> = tail.iter().map(|(_, b)| b.ln()).collect();
    match crate::special::line_fit(&xs, &ys) {
        Some(f) => {
            let b = -f.slope;
            let t = if b > 1.25 {
                Trend::Converging
            } else if b < 0.75 {
                Trend::Diverging
            } else {
                Trend::Inconclusive
            };
            (t, Some(b))
        }
        None => (Trend::Inconclusive, None),
    }
}

/// `‖C_Φ* k_a‖ / ‖k_a‖ = (Π_j (1 − |a_j|²) / Π_j (1 − |φ_j(a_{s_j})|²))^{1/2}`
/// for the normalised polydisk Szegő kernel at `a`.
pub fn kernel_ratio(poly: &PolySymbolSpec, point: &KernelPoint) -> Result<f64> {
    let a = point.coords();
    if a.len() != poly.dimension() {
        return Err(invalid(format!("point has {} coordinates, map has {}", a.len(), poly.dimension())));
    }
    let mut log = 0.0;
    if a.iter().any(|z| z.norm() >= 1.0 - 1e-12) {
        return Err(Error::OutsideDomain("kernel point too close to the torus (|a_j| >= 1 - 1e-12)".into()));
    }
    for z in a {
        log += ((1.0 - z.norm()) * (1.0 + z.norm())).ln();
    }
    for c in poly.coords() {
        log -= c.map.one_minus_abs_sq(a[c.source])?.ln();
    }
    let r = (0.5 * log).exp();
    if !r.is_finite() {
        return Err(Error::Overflow("kernel ratio".into()));
    }
    Ok(r)
}

/// Norms for the test function `f_n = ((z₁ + z₂)/2)^n` under
/// `Φ(z₁, z₂) = (z₁, z₁)`: `‖f_n‖² = 4^{−n} C(2n, n)` while `f_n∘Φ = z₁^n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnboundednessWitness {
    pub n: u64,
    pub norm_f: f64,
    pub norm_cf: f64,
    pub ratio: f64,
}

/// Exact witness norms, binomial in log space. The ratio grows like `(πn)^{1/4}`.
pub fn unboundedness_witness(n: u64) -> Result<UnboundednessWitness> {
    if n == 0 || n > 1_000_000 {
        return Err(invalid(format!("witness index must lie in 1..=10^6, got {n}")));
    }
    let nf = n as f64;
    let ln_c = ln_gamma(2.0 * nf + 1.0) - 2.0 * ln_gamma(nf + 1.0);
    let norm_f = (0.5 * (ln_c - nf * 4f64.ln())).exp();
    Ok(UnboundednessWitness { n, norm_f, norm_cf: 1.0, ratio: 1.0 / norm_f })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::CoordinateMap;
    use approx::assert_relative_eq;

    fn svals(m: &OperatorMatrix) -> Vec<f64> {
        let mut s = m.entries().singular_values().unwrap();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    #[test]
    fn identity_section_is_identity() {
        let m = build_matrix(&SymbolSpec::identity(), 16, SpaceParam::hardy()).unwrap();
        for i in 0..=16 {
            for j in 0..=16 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((m.get(i, j) - Complex64::new(e, 0.0)).norm() < 1e-11, "({i},{j})");
            }
        }
    }

    #[test]
    fn dilation_section_diagonal() {
        let m = build_matrix(&SymbolSpec::dilation(0.5).unwrap(), 20, SpaceParam::hardy()).unwrap();
        for k in 0..=20 {
            assert_relative_eq!(m.get(k, k).re, 0.5f64.powi(k as i32), max_relative = 1e-9, epsilon = 1e-14);
        }
    }

    #[test]
    fn bergman_weighting() {
        let m = build_matrix(&SymbolSpec::dilation(0.5).unwrap(), 8, SpaceParam::bergman(0.0).unwrap()).unwrap();
        assert_relative_eq!(m.get(3, 3).re, 0.125 * 2.0, max_relative = 1e-10);
    }

    #[test]
    fn section_spectra_increase_with_k() {
        let s = SymbolSpec::lens(0.5).unwrap();
        let a = svals(&build_matrix(&s, 32, SpaceParam::hardy()).unwrap());
        let b = svals(&build_matrix(&s, 64, SpaceParam::hardy()).unwrap());
        for n in 0..a.len() {
            assert!(b[n] >= a[n] - 1e-10, "n={n}");
        }
    }

    #[test]
    fn oracle_matches_diagonal_reduction() {
        for n in [2usize, 3] {
            for map in [SymbolSpec::dilation(0.5).unwrap(), SymbolSpec::lens(0.25).unwrap()] {
                let poly = PolySymbolSpec::on_first(map.clone(), n).unwrap();
                let o = svals(&multi_index_oracle(&poly, 6).unwrap());
                let d = svals(&build_diagonal_polydisk_matrix(&map, n, 6).unwrap());
                for k in 0..d.len() {
                    assert!((o[k] - d[k]).abs() < 1e-8, "N={n} k={k}: {} vs {}", o[k], d[k]);
                }
                assert!(o[d.len()..].iter().all(|&v| v < 1e-8));
            }
        }
    }

    #[test]
    fn oracle_product_map() {
        // Φ(z₁, z₂) = (z₁/2, z₂/3): singular values 2^{−i}3^{−j}, i + j ≤ D.
        let poly = PolySymbolSpec::new(vec![
            CoordinateMap { source: 0, map: SymbolSpec::dilation(0.5).unwrap() },
            CoordinateMap { source: 1, map: SymbolSpec::dilation(1.0 / 3.0).unwrap() },
        ])
        .unwrap();
        let o = svals(&multi_index_oracle(&poly, 5).unwrap());
        let mut exact: Vec<f64> =
            multi_indices(2, 5).iter().map(|a| 0.5f64.powi(a[0] as i32) * (1.0 / 3.0f64).powi(a[1] as i32)).collect();
        exact.sort_by(|a, b| b.total_cmp(a));
        for (x, y) in o.iter().zip(&exact) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_size_guard() {
        let poly = PolySymbolSpec::diagonal(SymbolSpec::identity(), 6).unwrap();
        assert!(matches!(multi_index_oracle(&poly, 12), Err(Error::TooLarge(_))));
        assert_eq!(multi_indices(3, 4).len(), basis_size(3, 4) as usize);
    }

    #[test]
    fn hs_norm_of_dilation() {
        // Σ 4^{−k} = 4/3
        let r = hs_norm_sq(&SymbolSpec::dilation(0.5).unwrap(), 1 << 12).unwrap();
        assert_relative_eq!(r.partial, 4.0 / 3.0, max_relative = 1e-12);
        assert_eq!(r.trend, Trend::Converging);
    }

    #[test]
    fn hs_norm_matches_coefficient_sum() {
        // For λ_{1/4}, Σ_{k≤K} ‖φ^k‖² from Taylor coefficients agrees with
        // quadrature; the truncated coefficient sums fall short by the tail.
        let s = SymbolSpec::lens(0.25).unwrap();
        let k = 64;
        let mut direct = 0.0;
        for j in 0..=k {
            let p = crate::series::extract_default(|z| Ok(s.eval(z)?.powu(j)), 1 << 15).unwrap();
            direct += p.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>();
        }
        let q = hs_norm_sq(&s, k as u64).unwrap();
        assert!(q.partial >= direct && q.partial - direct < 3e-5 * direct, "{} vs {direct}", q.partial);
    }

    #[test]
    fn hs_trend_identity_diverges() {
        let r = hs_norm_sq(&SymbolSpec::identity(), 1 << 20).unwrap();
        assert_relative_eq!(r.partial, (1u64 << 20) as f64 + 1.0, max_relative = 1e-12);
        assert_eq!(r.trend, Trend::Diverging);
    }

    #[test]
    fn kernel_ratio_identity_is_one() {
        let poly = PolySymbolSpec::diagonal(SymbolSpec::identity(), 3).unwrap();
        let p = KernelPoint::diagonal(0.999, 3).unwrap();
        assert_relative_eq!(kernel_ratio(&poly, &p).unwrap(), 1.0, max_relative = 1e-9);
    }

    #[test]
    fn kernel_ratio_lens_closed_form() {
        // Diagonal lens: ratio² = ((1−r²)/(1−λ(r)²))^N, λ(r) real.
        // Φ = (λ(z₁), λ(z₁)) at a = (r, 0): ratio² = (1−r²)/(1−λ(r)²)².
        let (theta, n, r) = (0.5, 2, 0.9);
        let s = SymbolSpec::lens(theta).unwrap();
        let poly = PolySymbolSpec::on_first(s.clone(), n).unwrap();
        let lam = s.eval(Complex64::new(r, 0.0)).unwrap().re;
        let exact = ((1.0 - r * r) / (1.0 - lam * lam).powi(n as i32)).sqrt();
        let point = KernelPoint::new(vec![Complex64::new(r, 0.0), Complex64::new(0.0, 0.0)]).unwrap();
        assert_relative_eq!(kernel_ratio(&poly, &point).unwrap(), exact, max_relative = 1e-12);
    }

    #[test]
    fn witness_values() {
        let w = unboundedness_witness(1).unwrap();
        assert_relative_eq!(w.norm_f, 0.5f64.sqrt(), max_relative = 1e-14);
        let big = unboundedness_witness(10_000).unwrap();
        assert_relative_eq!(big.ratio, (std::f64::consts::PI * 1e4).powf(0.25), max_relative = 1e-4);
        assert!(unboundedness_witness(0).is_err());
    }

    #[test]
    fn binary_round_trip() {
        let m = build_matrix(&SymbolSpec::lens(0.5).unwrap(), 12, SpaceParam::hardy()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bin");
        m.write_binary(&path).unwrap();
        let back = OperatorMatrix::read_binary(&path).unwrap();
        assert_eq!(back.truncation(), 12);
        assert_eq!(back.symbol(), m.symbol());
        for i in 0..13 {
            for j in 0..13 {
                assert_eq!(back.get(i, j), m.get(i, j));
            }
        }
    }

    #[test]
    fn order_guard() {
        assert!(matches!(build_matrix(&SymbolSpec::identity(), 5000, SpaceParam::hardy()), Err(Error::TooLarge(_))));
    }
}
