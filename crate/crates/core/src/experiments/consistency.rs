//! One constant times `upper_bound_plain` on the measured `ρ̂` against the
//! finite-section spectra of every shipped symbol.

use crate::boundary::{dyadic_h_grid, rho_profile};
use crate::error::Result;
use crate::operator::build_matrix;
use crate::series::SpaceParam;
use crate::spectra::{singular_values, upper_bound_plain, RhoSource, RESOLVED_FLOOR};
use crate::symbols::{SymbolSpec, BOUNDARY_RADIUS};

/// Per-symbol outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolConsistency {
    pub name: String,
    /// `(n, s_n, B_n)` for every computed index.
    pub rows: Vec<(usize, f64, f64)>,
    pub resolved: usize,
    /// `max s_n/B_n` over resolved indices.
    pub max_ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundConsistency {
    pub symbols: Vec<SymbolConsistency>,
    /// The single constant, fitted jointly over all symbols.
    pub c_hat: f64,
}

impl BoundConsistency {
    /// Indices where `Ĉ B_n < s_n`, as `(symbol, n)`.
    pub fn violations(&self) -> Vec<(String, usize)> {
        let mut v = Vec::new();
        for s in &self.symbols {
            for &(n, sn, bn) in &s.rows {
                if !(self.c_hat * bn >= sn) {
                    v.push((s.name.clone(), n));
                }
            }
        }
        v
    }
}

/// Finite sections of size `k` and profiles from `q` boundary samples on
/// the dyadic grid `2^{−12} ... 2^{−1}`.
pub fn bound_consistency(k: usize, q: usize) -> Result<BoundConsistency> {
    let grid = dyadic_h_grid(1, 12);
    let mut symbols = Vec::new();
    for (name, spec) in SymbolSpec::shipped() {
        let s = singular_values(&build_matrix(&spec, k, SpaceParam::hardy())?, k)?;
        let profile = rho_profile(&spec, &grid, q, BOUNDARY_RADIUS)?;
        let src = RhoSource::Profile(&profile);
        let mut rows = Vec::with_capacity(s.len());
        for n in 1..=s.len() {
            rows.push((n, s.get(n).expect("in range"), upper_bound_plain(&src, n as u64)?));
        }
        let resolved = s.resolved_len(RESOLVED_FLOOR);
        let max_ratio = rows[..resolved].iter().map(|(_, sn, bn)| sn / bn).fold(0.0f64, f64::max);
        symbols.push(SymbolConsistency { name, rows, resolved, max_ratio });
    }
    let c_hat = symbols.iter().map(|s| s.max_ratio).fold(0.0f64, f64::max);
    Ok(BoundConsistency { symbols, c_hat })
}
