//! Analytic self-maps of the disk and coordinate-wise maps of the polydisk.
//!
//! Besides ordinary evaluation every map can be evaluated in Cayley
//! coordinates `W = (1+z)/(1−z)`, which send the disk to the right half-plane
//! and the boundary point 1 to infinity. Near contact points `1 − |φ|` is
//! then available as `4 Re W/|1+W|²` without cancellation, which is what the
//! boundary quadratures and kernel ratios rely on.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::series::PowerSeries;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// A self-map of the unit disk from the shipped catalogue.
///
/// Serialized as `{"kind": ..., "params": {...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum SymbolSpec {
    Identity,
    /// The constant map `z ↦ c`, `|c| < 1`.
    Scalar {
        c: Complex64,
    },
    /// `z ↦ e^{iα} z`.
    Rotation {
        alpha: f64,
    },
    /// Lens map `λ_θ = T⁻¹(T(z)^θ)` with `T(z) = (1+z)/(1−z)`, `0 < θ ≤ 1`.
    Lens {
        theta: f64,
    },
    /// Cusp map `χ = (w − b)/(w + b)` with `w = log 4 − Log(1 − z)`.
    ///
    /// `Re w ≥ log 2` away from `z = 1`, so the image touches the circle only
    /// at 1, where `|1 − χ(e^{it})| ≍ 1/log(1/|t|)`.
    Cusp {
        b: f64,
    },
    /// `B_a(z) = ((z − a)/(1 − a z))²`, `0 ≤ a < 1`.
    BlaschkeSquare {
        a: f64,
    },
    /// Shapiro–Taylor map `exp(−f_θ(ε φ₀(z)))`, `f_θ(g) = g(−Log g)^θ`,
    /// where `φ₀` maps the disk onto the right half of the unit disk.
    ShapiroTaylor {
        theta: f64,
        eps: f64,
    },
    /// `outer ∘ inner`.
    Compose {
        outer: Box<SymbolSpec>,
        inner: Box<SymbolSpec>,
    },
    /// A polynomial with `Σ|c_k| ≤ 1`, which certifies the self-map property.
    Explicit {
        series: PowerSeries,
    },
}

/// `(1+z)/(1−z)`.
pub fn to_cayley(z: Complex64) -> Complex64 {
    (ONE + z) / (ONE - z)
}

/// `(W−1)/(W+1)`.
pub fn from_cayley(w: Complex64) -> Complex64 {
    (w - ONE) / (w + ONE)
}

/// `1 − |z|²` for `z = (W−1)/(W+1)`, free of cancellation near the circle.
pub fn one_minus_abs_sq_cayley(w: Complex64) -> f64 {
    let d = (w + ONE).norm();
    if d.is_infinite() {
        return 0.0;
    }
    (4.0 * w.re / d) / d
}

/// Cayley image `W = iY` of the boundary point `e^{it}`, `Y = cot(t/2)`.
pub fn boundary_cayley(y: f64) -> Complex64 {
    Complex64::new(0.0, y)
}

fn finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Principal square root, except that arguments on the negative real axis
/// are taken as limits from the lower half-plane.
fn sqrt_lower(u: Complex64) -> Complex64 {
    if u.im == 0.0 && u.re < 0.0 {
        Complex64::new(0.0, -(-u.re).sqrt())
    } else {
        u.sqrt()
    }
}

impl SymbolSpec {
    pub fn identity() -> Self {
        SymbolSpec::Identity
    }

    pub fn scalar(c: Complex64) -> Result<Self> {
        let s = SymbolSpec::Scalar { c };
        s.validate()?;
        Ok(s)
    }

    pub fn rotation(alpha: f64) -> Result<Self> {
        let s = SymbolSpec::Rotation { alpha };
        s.validate()?;
        Ok(s)
    }

    pub fn lens(theta: f64) -> Result<Self> {
        let s = SymbolSpec::Lens { theta };
        s.validate()?;
        Ok(s)
    }

    pub fn cusp(b: f64) -> Result<Self> {
        let s = SymbolSpec::Cusp { b };
        s.validate()?;
        Ok(s)
    }

    pub fn blaschke_square(a: f64) -> Result<Self> {
        let s = SymbolSpec::BlaschkeSquare { a };
        s.validate()?;
        Ok(s)
    }

    /// Shapiro–Taylor map with the default `ε_θ = min(1/2, e^{−2θ})`.
    pub fn shapiro_taylor(theta: f64) -> Result<Self> {
        Self::shapiro_taylor_eps(theta, (0.5f64).min((-2.0 * theta).exp()))
    }

    pub fn shapiro_taylor_eps(theta: f64, eps: f64) -> Result<Self> {
        let s = SymbolSpec::ShapiroTaylor { theta, eps };
        s.validate()?;
        Ok(s)
    }

    pub fn compose(outer: SymbolSpec, inner: SymbolSpec) -> Result<Self> {
        let s = SymbolSpec::Compose { outer: Box::new(outer), inner: Box::new(inner) };
        s.validate()?;
        Ok(s)
    }

    pub fn explicit(series: PowerSeries) -> Result<Self> {
        let s = SymbolSpec::Explicit { series };
        s.validate()?;
        Ok(s)
    }

    /// The dilation `z ↦ r z`, `0 ≤ r ≤ 1`.
    pub fn dilation(r: f64) -> Result<Self> {
        Self::explicit(PowerSeries::from_real(&[0.0, r])?)
    }

    /// The maps used for regression and the bound-domination checks.
    pub fn shipped() -> Vec<(String, SymbolSpec)> {
        let items = [
            ("identity", SymbolSpec::Identity),
            ("scalar_half", SymbolSpec::Scalar { c: Complex64::new(0.5, 0.0) }),
            ("dilation_half", Self::dilation(0.5).expect("valid")),
            ("rotation", SymbolSpec::Rotation { alpha: 0.7 }),
            ("lens_half", SymbolSpec::Lens { theta: 0.5 }),
            ("lens_quarter", SymbolSpec::Lens { theta: 0.25 }),
            ("cusp", SymbolSpec::Cusp { b: 1.0 }),
            ("shapiro_taylor_2", Self::shapiro_taylor(2.0).expect("valid")),
            (
                "blaschke_cusp",
                SymbolSpec::Compose {
                    outer: Box::new(SymbolSpec::BlaschkeSquare { a: 0.5 }),
                    inner: Box::new(SymbolSpec::Cusp { b: 1.0 }),
                },
            ),
        ];
        items.into_iter().map(|(n, s)| (n.to_string(), s)).collect()
    }

    /// Checks parameter ranges.
    pub fn validate(&self) -> Result<()> {
        match self {
            SymbolSpec::Identity => Ok(()),
            SymbolSpec::Scalar { c } => {
                if finite(*c) && c.norm() < 1.0 {
                    Ok(())
                } else {
                    Err(invalid(format!("scalar symbol needs |c| < 1, got {c}")))
                }
            }
            SymbolSpec::Rotation { alpha } => {
                if alpha.is_finite() {
                    Ok(())
                } else {
                    Err(invalid("rotation angle must be finite"))
                }
            }
            SymbolSpec::Lens { theta } => {
                if *theta > 0.0 && *theta <= 1.0 {
                    Ok(())
                } else {
                    Err(invalid(format!("lens parameter must lie in (0,1], got {theta}")))
                }
            }
            SymbolSpec::Cusp { b } => {
                if *b > 0.0 && b.is_finite() {
                    Ok(())
                } else {
                    Err(invalid(format!("cusp parameter must be positive, got {b}")))
                }
            }
            SymbolSpec::BlaschkeSquare { a } => {
                if *a >= 0.0 && *a < 1.0 {
                    Ok(())
                } else {
                    Err(invalid(format!("Blaschke parameter must lie in [0,1), got {a}")))
                }
            }
            SymbolSpec::ShapiroTaylor { theta, eps } => {
                if !(*theta > 0.0 && theta.is_finite()) {
                    return Err(invalid(format!("Shapiro-Taylor theta must be positive, got {theta}")));
                }
                if !(*eps > 0.0 && *eps <= 0.5) {
                    return Err(invalid(format!("Shapiro-Taylor eps must lie in (0, 1/2], got {eps}")));
                }
                // arg((−Log g)^θ) ≤ θ·(π/2)/log(1/ε); keep Re f_θ > 0 on V_ε.
                if theta * (PI / 2.0) / (1.0 / eps).ln() >= PI / 2.0 {
                    return Err(invalid(format!("eps = {eps} too large for theta = {theta}")));
                }
                Ok(())
            }
            SymbolSpec::Compose { outer, inner } => {
                outer.validate()?;
                inner.validate()
            }
            SymbolSpec::Explicit { series } => {
                if series.l1_norm() <= 1.0 + 1e-12 {
                    Ok(())
                } else {
                    Err(invalid(format!("explicit symbol needs coefficient l1 norm <= 1, got {}", series.l1_norm())))
                }
            }
        }
    }

    /// Short human-readable label.
    pub fn label(&self) -> String {
        match self {
            SymbolSpec::Identity => "identity".into(),
            SymbolSpec::Scalar { c } => format!("scalar({})", c),
            SymbolSpec::Rotation { alpha } => format!("rotation({alpha})"),
            SymbolSpec::Lens { theta } => format!("lens({theta})"),
            SymbolSpec::Cusp { b } => format!("cusp({b})"),
            SymbolSpec::BlaschkeSquare { a } => format!("blaschke_square({a})"),
            SymbolSpec::ShapiroTaylor { theta, eps } => format!("shapiro_taylor({theta},{eps})"),
            SymbolSpec::Compose { outer, inner } => format!("{}∘{}", outer.label(), inner.label()),
            SymbolSpec::Explicit { series } => format!("explicit(order {})", series.order()),
        }
    }

    /// `φ(z)` for `|z| < 1`.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        if !finite(z) || z.norm() >= 1.0 {
            return Err(Error::OutsideDomain(format!("{} needs |z| < 1, got {z}", self.label())));
        }
        let v = self.eval_unchecked(z)?;
        if !finite(v) {
            return Err(Error::Singular(format!("{} at {z}", self.label())));
        }
        Ok(v)
    }

    fn eval_unchecked(&self, z: Complex64) -> Result<Complex64> {
        Ok(match self {
            SymbolSpec::Identity => z,
            SymbolSpec::Scalar { c } => *c,
            SymbolSpec::Rotation { alpha } => Complex64::from_polar(1.0, *alpha) * z,
            SymbolSpec::Lens { theta } => {
                let p = (ONE + z).powf(*theta);
                let m = (ONE - z).powf(*theta);
                (p - m) / (p + m)
            }
            SymbolSpec::Cusp { b } => {
                let w = Complex64::new(4f64.ln(), 0.0) - (ONE - z).ln();
                (w - b) / (w + b)
            }
            SymbolSpec::BlaschkeSquare { a } => {
                let m = (z - a) / (ONE - a * z);
                m * m
            }
            SymbolSpec::ShapiroTaylor { theta, eps } => {
                let s = ((z - I) / (I * z - ONE)).sqrt();
                let phi0 = (s - I) / (-I * s + ONE);
                let g = phi0 * *eps;
                let f = g * (-g.ln()).powf(*theta);
                (-f).exp()
            }
            SymbolSpec::Compose { outer, inner } => {
                let w = inner.eval(z)?;
                outer.eval(w)?
            }
            SymbolSpec::Explicit { series } => series.eval(z),
        })
    }

    /// The map in Cayley coordinates: `W ↦ T(φ(T⁻¹ W))` on the closed right
    /// half-plane. Boundary inputs `W = iY` give radial limits.
    pub fn eval_cayley(&self, w: Complex64) -> Result<Complex64> {
        if !finite(w) || w.re < 0.0 {
            return Err(Error::OutsideDomain(format!("Cayley input must satisfy Re W >= 0, got {w}")));
        }
        let v = match self {
            SymbolSpec::Identity => w,
            SymbolSpec::Lens { theta } => w.powf(*theta),
            SymbolSpec::Cusp { b } => (Complex64::new(LN_2, 0.0) + (ONE + w).ln()) / *b,
            SymbolSpec::BlaschkeSquare { a } => {
                // The Möbius factor is the dilation W ↦ kW; squaring is
                // V ↦ (V + 1/V)/2.
                let v = w * ((1.0 - a) / (1.0 + a));
                (v + v.inv()) * 0.5
            }
            SymbolSpec::ShapiroTaylor { theta, eps } => {
                let delta = 2.0 * I / (w + I);
                let q = sqrt_lower(ONE - delta);
                let phi0 = 2.0 / ((w + I) * (ONE + q) * (ONE + q));
                let g = phi0 * *eps;
                let f = g * (-g.ln()).powf(*theta);
                // T(exp(−F)) = coth(F/2)
                (f * 0.5).tanh().inv()
            }
            SymbolSpec::Compose { outer, inner } => {
                let u = inner.eval_cayley(w)?;
                outer.eval_cayley(Complex64::new(u.re.max(0.0), u.im))?
            }
            SymbolSpec::Scalar { .. } | SymbolSpec::Rotation { .. } | SymbolSpec::Explicit { .. } => {
                let z = from_cayley(w);
                let v = self.eval_unchecked(z)?;
                to_cayley(v)
            }
        };
        if !finite(v) {
            return Err(Error::Singular(format!("{} in Cayley coordinates at {w}", self.label())));
        }
        Ok(v)
    }

    /// `1 − |φ(z)|²`, accurate near contact points.
    pub fn one_minus_abs_sq(&self, z: Complex64) -> Result<f64> {
        if !finite(z) || z.norm() >= 1.0 {
            return Err(Error::OutsideDomain(format!("need |z| < 1, got {z}")));
        }
        Ok(one_minus_abs_sq_cayley(self.eval_cayley(to_cayley(z))?))
    }

    /// `φ(r_b e^{it})`, the radial stand-in for the boundary value at `e^{it}`.
    pub fn boundary_eval(&self, t: f64, r_b: f64) -> Result<Complex64> {
        if !(r_b > 0.0 && r_b < 1.0) {
            return Err(invalid(format!("boundary radius must lie in (0,1), got {r_b}")));
        }
        self.eval(Complex64::from_polar(r_b, t))
    }
}

/// Default radius for [`SymbolSpec::boundary_eval`].
pub const BOUNDARY_RADIUS: f64 = 1.0 - 1e-8;

/// Largest deviation `|λ_θ(λ_θ'(z)) − λ_{θθ'}(z)|` over `grid`.
pub fn lens_semigroup_check(theta: f64, theta2: f64, grid: &[Complex64]) -> Result<f64> {
    let a = SymbolSpec::lens(theta)?;
    let b = SymbolSpec::lens(theta2)?;
    let ab = SymbolSpec::lens(theta * theta2)?;
    let mut worst = 0.0f64;
    for &z in grid {
        let d = (a.eval(b.eval(z)?)? - ab.eval(z)?).norm();
        worst = worst.max(d);
    }
    Ok(worst)
}

/// `(1 − |B_a(z)|)/(1 − |z|)` for the Blaschke square.
pub fn blaschke_contraction_ratio(a: f64, z: Complex64) -> Result<f64> {
    let b = SymbolSpec::blaschke_square(a)?;
    let num = b.one_minus_abs_sq(z)? / (1.0 + b.eval(z)?.norm());
    let den = (1.0 - z.norm_sqr()) / (1.0 + z.norm());
    Ok(num / den)
}

/// One output coordinate of a polydisk map: `φ(z_source)`, `source` 0-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordinateMap {
    pub source: usize,
    pub map: SymbolSpec,
}

/// A map `Φ: 𝔻^N → 𝔻^N` whose coordinates each depend on one input variable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolySymbolSpec {
    dimension: usize,
    coords: Vec<CoordinateMap>,
}

impl PolySymbolSpec {
    pub fn new(coords: Vec<CoordinateMap>) -> Result<Self> {
        let dimension = coords.len();
        if dimension == 0 {
            return Err(invalid("polydisk map needs at least one coordinate"));
        }
        for c in &coords {
            if c.source >= dimension {
                return Err(invalid(format!("coordinate source {} out of range 0..{dimension}", c.source)));
            }
            c.map.validate()?;
        }
        Ok(PolySymbolSpec { dimension, coords })
    }

    /// `(φ(z_1), ..., φ(z_N))`.
    pub fn diagonal(map: SymbolSpec, n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| CoordinateMap { source: i, map: map.clone() }).collect())
    }

    /// `(φ(z_1), ..., φ(z_1))`: every coordinate reads `z_1`.
    pub fn on_first(map: SymbolSpec, n: usize) -> Result<Self> {
        Self::new((0..n).map(|_| CoordinateMap { source: 0, map: map.clone() }).collect())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn coords(&self) -> &[CoordinateMap] {
        &self.coords
    }

    pub fn eval(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        if z.len() != self.dimension {
            return Err(invalid(format!("expected {} coordinates, got {}", self.dimension, z.len())));
        }
        self.coords.iter().map(|c| c.map.eval(z[c.source])).collect()
    }
}

/// A point of the open polydisk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelPoint {
    a: Vec<Complex64>,
}

impl KernelPoint {
    pub fn new(a: Vec<Complex64>) -> Result<Self> {
        if a.is_empty() || a.iter().any(|z| !finite(*z) || z.norm() >= 1.0) {
            return Err(Error::OutsideDomain("kernel point needs all |a_j| < 1".into()));
        }
        Ok(KernelPoint { a })
    }

    /// `(r, ..., r)`.
    pub fn diagonal(r: f64, n: usize) -> Result<Self> {
        Self::new(vec![Complex64::new(r, 0.0); n])
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.a
    }
}
