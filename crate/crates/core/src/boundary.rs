//! Window measures `ρ_φ(h) = sup_ξ m({t : |φ*(e^{it}) − ξ| ≤ h})` of the
//! pushforward of arc-length under boundary values, estimated from `Q`
//! equispaced boundary samples.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::par;
use crate::special::{line_fit, LineFit};
use crate::symbols::SymbolSpec;

/// Default number of boundary samples.
pub const DEFAULT_SAMPLES: usize = 1 << 20;

/// Boundary values `φ(r_b e^{2πim/Q})`, sorted by argument.
#[derive(Clone, Debug)]
pub struct BoundaryImage {
    /// Arguments in `(−π, π]`, ascending.
    args: Vec<f64>,
    /// Matching values.
    values: Vec<Complex64>,
    q: usize,
    r_b: f64,
}

impl BoundaryImage {
    pub fn sample(spec: &SymbolSpec, q: usize, r_b: f64) -> Result<Self> {
        if q < 16 {
            return Err(invalid(format!("need at least 16 boundary samples, got {q}")));
        }
        let vals = par::try_map_range(q, |m| spec.boundary_eval(TAU * m as f64 / q as f64, r_b))?;
        Ok(Self::from_values(vals, r_b))
    }

    pub fn from_values(mut values: Vec<Complex64>, r_b: f64) -> Self {
        values.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
        let args = values.iter().map(|w| w.arg()).collect();
        let q = values.len();
        BoundaryImage { args, values, q, r_b }
    }

    pub fn samples(&self) -> usize {
        self.q
    }

    pub fn radius(&self) -> f64 {
        self.r_b
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Fraction of samples with `|w| ≥ 1 − h`.
    pub fn level_fraction(&self, h: f64) -> f64 {
        let c = self.values.iter().filter(|w| w.norm() >= 1.0 - h).count();
        c as f64 / self.q as f64
    }

    /// Fraction of samples with `|w − ξ| ≤ h`.
    pub fn window_fraction(&self, xi: Complex64, h: f64) -> f64 {
        let c = self.values.iter().filter(|w| (**w - xi).norm() <= h).count();
        c as f64 / self.q as f64
    }

    /// Maximum window fraction over `n_xi` equispaced centres, for each of
    /// the radii in `hs`, restricted to samples with `|w| ≥ 1 − max(hs)`.
    fn grid_max(&self, n_xi: usize, hs: &[f64]) -> Vec<f64> {
        let h_top = hs.iter().cloned().fold(0.0, f64::max);
        let (cargs, cvals): (Vec<f64>, Vec<Complex64>) =
            self.args.iter().zip(&self.values).filter(|(_, w)| w.norm() >= 1.0 - h_top).map(|(a, w)| (*a, *w)).unzip();
        if cargs.is_empty() {
            return vec![0.0; hs.len()];
        }
        // Directions of the disk B(ξ, h) seen from 0 lie within asin(h) of ξ.
        let spread = if h_top >= 1.0 { PI } else { h_top.asin() + 1e-12 };
        let counts = par::map_range(n_xi, |j| {
            let psi = -PI + TAU * (j as f64 + 0.5) / n_xi as f64;
            let xi = Complex64::from_polar(1.0, psi);
            let mut c = vec![0usize; hs.len()];
            let mut visit = |lo: f64, hi: f64| {
                let a = cargs.partition_point(|&x| x < lo);
                let b = cargs.partition_point(|&x| x <= hi);
                for w in &cvals[a..b] {
                    let d = (*w - xi).norm();
                    for (ci, &h) in c.iter_mut().zip(hs) {
                        if d <= h {
                            *ci += 1;
                        }
                    }
                }
            };
            if spread >= PI {
                visit(-PI - 1.0, PI + 1.0);
            } else {
                let (lo, hi) = (psi - spread, psi + spread);
                visit(lo.max(-PI - 1.0), hi.min(PI));
                if lo < -PI {
                    visit(lo + TAU, PI);
                }
                if hi > PI {
                    visit(-PI - 1.0, hi - TAU);
                }
            }
            c
        });
        let mut best = vec![0usize; hs.len()];
        for c in counts {
            for (b, v) in best.iter_mut().zip(c) {
                *b = (*b).max(v);
            }
        }
        best.into_iter().map(|b| b as f64 / self.q as f64).collect()
    }
}

/// `m({t : |φ(r_b e^{it}) − ξ| ≤ h})` from `q` samples, for `|ξ| = 1`.
pub fn window_measure(spec: &SymbolSpec, xi: Complex64, h: f64, q: usize, r_b: f64) -> Result<f64> {
    if (xi.norm() - 1.0).abs() > 1e-12 {
        return Err(invalid(format!("window centre must lie on the circle, got {xi}")));
    }
    if !(h > 0.0 && h <= 2.0) {
        return Err(invalid(format!("window radius must lie in (0,2], got {h}")));
    }
    Ok(BoundaryImage::sample(spec, q, r_b)?.window_fraction(xi, h))
}

/// Estimated Carleson profile on an `h`-grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarlesonProfile {
    pub symbol: String,
    pub h: Vec<f64>,
    /// Lower bracket of `ρ_φ(h)`: maximum over the centre grid, made
    /// monotone by a running maximum in `h`.
    pub rho_hat: Vec<f64>,
    /// Upper bracket: grid maximum at radius `3h/2`, which contains every
    /// window of radius `h` centred between grid points.
    pub rho_upper: Vec<f64>,
    /// `m({|φ*| ≥ 1 − h})`.
    pub level_hat: Vec<f64>,
    pub xi_grid_size: Vec<usize>,
    pub q: usize,
    pub r_b: f64,
}

impl CarlesonProfile {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("h,rho_hat,level_hat,Q,xi_grid_size,r_b,rho_upper\n");
        for i in 0..self.h.len() {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                self.h[i],
                self.rho_hat[i],
                self.level_hat[i],
                self.q,
                self.xi_grid_size[i],
                self.r_b,
                self.rho_upper[i]
            );
        }
        s
    }

    /// `ρ̂` at the largest grid point `≤ h`, or 0 below the grid.
    pub fn rho_at(&self, h: f64) -> f64 {
        let i = self.h.partition_point(|&x| x <= h);
        if i == 0 {
            0.0
        } else {
            self.rho_hat[i - 1]
        }
    }
}

/// Window measures on a sorted `h`-grid from a sampled boundary image.
pub fn rho_profile_from_image(image: &BoundaryImage, h_grid: &[f64], symbol: &str) -> Result<CarlesonProfile> {
    if h_grid.is_empty() {
        return Err(invalid("empty h grid"));
    }
    if h_grid.windows(2).any(|w| w[1] <= w[0]) || h_grid[0] <= 0.0 || *h_grid.last().unwrap() > 1.0 {
        return Err(invalid("h grid must be strictly increasing inside (0,1]"));
    }
    let mut rho_hat = Vec::with_capacity(h_grid.len());
    let mut rho_upper = Vec::with_capacity(h_grid.len());
    let mut sizes = Vec::with_capacity(h_grid.len());
    let mut running = 0.0f64;
    for &h in h_grid {
        // Centre spacing at most h/4; powers of two keep the grids nested.
        let n_xi = ((8.0 * PI / h).ceil() as usize).next_power_of_two();
        let m = image.grid_max(n_xi, &[h, 1.5 * h]);
        running = running.max(m[0]);
        rho_hat.push(running);
        rho_upper.push(m[1].max(running));
        sizes.push(n_xi);
    }
    let level_hat = h_grid.iter().map(|&h| image.level_fraction(h)).collect();
    Ok(CarlesonProfile {
        symbol: symbol.to_string(),
        h: h_grid.to_vec(),
        rho_hat,
        rho_upper,
        level_hat,
        xi_grid_size: sizes,
        q: image.samples(),
        r_b: image.radius(),
    })
}

/// Samples the boundary of `spec` and estimates its Carleson profile.
pub fn rho_profile(spec: &SymbolSpec, h_grid: &[f64], q: usize, r_b: f64) -> Result<CarlesonProfile> {
    let image = BoundaryImage::sample(spec, q, r_b)?;
    rho_profile_from_image(&image, h_grid, &spec.label())
}

/// Power-law order `ρ̂(h) ≈ C h^α`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum CarlesonOrder {
    /// Fewer than four positive values, all zero: the image stays away from
    /// the circle at every resolved scale.
    Degenerate,
    Fitted {
        alpha: f64,
        log_c: f64,
        r2: f64,
        points: usize,
    },
}

/// Least-squares slope of `log ρ̂` against `log h` over the positive values.
pub fn carleson_order_fit(profile: &CarlesonProfile) -> Result<CarlesonOrder> {
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        profile.h.iter().zip(&profile.rho_hat).filter(|(_, r)| **r > 0.0).map(|(h, r)| (h.ln(), r.ln())).unzip();
    if xs.is_empty() {
        return Ok(CarlesonOrder::Degenerate);
    }
    if xs.len() < 4 {
        return Err(Error::InsufficientData(format!("{} positive profile values, need 4", xs.len())));
    }
    let LineFit { slope, intercept, r2 } =
        line_fit(&xs, &ys).ok_or_else(|| Error::InsufficientData("degenerate h grid".into()))?;
    Ok(CarlesonOrder::Fitted { alpha: slope, log_c: intercept, r2, points: xs.len() })
}

/// Smallest `c` with `ρ̂(h) ≥ exp(−c/h)` at every grid point where `ρ̂ > 0`.
pub fn exponential_constant_fit(profile: &CarlesonProfile) -> Option<f64> {
    profile.h.iter().zip(&profile.rho_hat).filter(|(_, r)| **r > 0.0).map(|(h, r)| -h * r.ln()).reduce(f64::max)
}

/// Dyadic grid `2^{-j}` for `j = j_max, ..., j_min` (ascending in `h`).
pub fn dyadic_h_grid(j_min: i32, j_max: i32) -> Vec<f64> {
    (j_min..=j_max).rev().map(|j| 2f64.powi(-j)).collect()
}
