//! External potentials `V`, the Kato norm and the admissibility conditions.
//!
//! The Kato norm is normalized with the Newtonian kernel,
//! `||V||_K = sup_x C_d int |V(y)| |x - y|^{2-d} dy = ||(-Delta)^{-1}|V| ||_inf`,
//! so the form bound reads `int |V||u|^2 <= ||V||_K ||grad u||^2` and the
//! negative part is admissible when `||V_-||_K < 1`, i.e. when the raw integral
//! `sup_x int |V_-(y)| |x-y|^{2-d} dy` stays below `1/C_d` (`4 pi` in 3-D).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::grid::{norm_sq, Grid, Point, RealField};
use crate::riesz::RieszKernel;
use crate::spectral::SpectralOps;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Zero,
    /// `a exp(-|x|^2 / sigma^2)`.
    GaussianBump { a: f64, sigma: f64 },
    /// `a exp(1 - R^2 / (R^2 - |x|^2))` inside the ball of radius `R`, zero outside.
    SmoothCompactBump { a: f64, radius: f64 },
    /// `a (1 + |x|^2)^{-k}`.
    InversePoly { a: f64, k: f64 },
    /// `a` on the closed ball of radius `R`, zero outside.
    BallIndicator { a: f64, radius: f64 },
    /// Node values on the run grid.
    GridSampled { values: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignClass {
    /// Identically zero: satisfies both one-sided hypotheses.
    Zero,
    NonNeg,
    NonPos,
    Mixed,
}

impl SignClass {
    pub fn is_nonneg(self) -> bool {
        matches!(self, SignClass::Zero | SignClass::NonNeg)
    }

    pub fn is_nonpos(self) -> bool {
        matches!(self, SignClass::Zero | SignClass::NonPos)
    }
}

/// Samples of `2V + x.grad V`, with a flag when the value is only the
/// interior part of a distribution.
#[derive(Debug, Clone)]
pub struct VirialWeight {
    pub field: RealField,
    pub approximate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    /// `||V||_{L^{d/2}}` over the box.
    pub ld2_norm: f64,
    pub kato_norm: f64,
    /// `||V_-||_K` in the normalized convention.
    pub kato_norm_negative: f64,
    /// `sup_x int |V_-(y)| |x-y|^{2-d} dy`, compared against `1/C_d`.
    pub kato_integral_negative: f64,
    pub inverse_c_d: f64,
    pub ld2_finite: bool,
    pub kato_finite: bool,
    pub negative_part_small: bool,
    pub compact_support: Option<bool>,
    pub admissible: bool,
    pub notes: Vec<String>,
}

/// `Gamma(d/2) / ((d - 2) 2 pi^{d/2})`, the constant of the Newtonian kernel
/// `(-Delta)^{-1} f = C_d |x|^{2-d} * f`.
pub fn c_d(dim: usize) -> Result<f64> {
    if dim < 3 {
        return Err(Error::domain("c_d", format!("d = {dim} must be at least 3")));
    }
    let d = dim as f64;
    Ok(gamma(d / 2.0) / ((d - 2.0) * 2.0 * PI.powf(d / 2.0)))
}

impl PotentialSpec {
    pub fn is_zero(&self) -> bool {
        match self {
            PotentialSpec::Zero => true,
            PotentialSpec::GaussianBump { a, .. }
            | PotentialSpec::SmoothCompactBump { a, .. }
            | PotentialSpec::InversePoly { a, .. }
            | PotentialSpec::BallIndicator { a, .. } => *a == 0.0,
            PotentialSpec::GridSampled { values } => values.iter().all(|v| *v == 0.0),
        }
    }

    /// Checks parameter ranges.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::domain("PotentialSpec", msg));
        let finite = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::domain("PotentialSpec", format!("{name} = {v} is not finite")))
            }
        };
        match *self {
            PotentialSpec::Zero => Ok(()),
            PotentialSpec::GaussianBump { a, sigma } => {
                finite("a", a)?;
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return bad(format!("sigma = {sigma} must be positive"));
                }
                Ok(())
            }
            PotentialSpec::SmoothCompactBump { a, radius } | PotentialSpec::BallIndicator { a, radius } => {
                finite("a", a)?;
                if !(radius > 0.0 && radius.is_finite()) {
                    return bad(format!("radius = {radius} must be positive"));
                }
                Ok(())
            }
            PotentialSpec::InversePoly { a, k } => {
                finite("a", a)?;
                if !(k > 0.0 && k.is_finite()) {
                    return bad(format!("k = {k} must be positive"));
                }
                Ok(())
            }
            PotentialSpec::GridSampled { ref values } => {
                if values.iter().any(|v| !v.is_finite()) {
                    return bad("grid_sampled values contain non-finite entries".into());
                }
                Ok(())
            }
        }
    }

    /// Multiplies the amplitude by `c`.
    pub fn scaled(&self, c: f64) -> PotentialSpec {
        match self.clone() {
            PotentialSpec::Zero => PotentialSpec::Zero,
            PotentialSpec::GaussianBump { a, sigma } => PotentialSpec::GaussianBump { a: c * a, sigma },
            PotentialSpec::SmoothCompactBump { a, radius } => PotentialSpec::SmoothCompactBump { a: c * a, radius },
            PotentialSpec::InversePoly { a, k } => PotentialSpec::InversePoly { a: c * a, k },
            PotentialSpec::BallIndicator { a, radius } => PotentialSpec::BallIndicator { a: c * a, radius },
            PotentialSpec::GridSampled { values } => {
                PotentialSpec::GridSampled { values: values.into_iter().map(|v| c * v).collect() }
            }
        }
    }

    /// `V(x)` for analytic kinds; `None` for grid samples.
    pub fn value_at(&self, x: &Point) -> Option<f64> {
        let r2 = norm_sq(x);
        Some(match *self {
            PotentialSpec::Zero => 0.0,
            PotentialSpec::GaussianBump { a, sigma } => a * (-r2 / (sigma * sigma)).exp(),
            PotentialSpec::SmoothCompactBump { a, radius } => {
                let rr = radius * radius;
                if r2 >= rr {
                    0.0
                } else {
                    a * (1.0 - rr / (rr - r2)).exp()
                }
            }
            PotentialSpec::InversePoly { a, k } => a * (1.0 + r2).powf(-k),
            PotentialSpec::BallIndicator { a, radius } => {
                if r2 <= radius * radius {
                    a
                } else {
                    0.0
                }
            }
            PotentialSpec::GridSampled { .. } => return None,
        })
    }

    /// `x . grad V(x)` for smooth analytic kinds. The ball indicator returns
    /// the interior value 0 and grid samples return `None`.
    pub fn x_grad_at(&self, x: &Point) -> Option<f64> {
        let r2 = norm_sq(x);
        let v = self.value_at(x)?;
        Some(match *self {
            PotentialSpec::Zero | PotentialSpec::BallIndicator { .. } => 0.0,
            PotentialSpec::GaussianBump { sigma, .. } => -2.0 * r2 / (sigma * sigma) * v,
            PotentialSpec::SmoothCompactBump { radius, .. } => {
                let rr = radius * radius;
                if r2 >= rr {
                    0.0
                } else {
                    -2.0 * r2 * rr / ((rr - r2) * (rr - r2)) * v
                }
            }
            PotentialSpec::InversePoly { k, .. } => -2.0 * k * r2 / (1.0 + r2) * v,
            PotentialSpec::GridSampled { .. } => unreachable!(),
        })
    }

    /// Samples `V` on the grid nodes. The ball indicator is averaged over
    /// each grid cell instead, so that its discontinuity carries the right
    /// volume.
    pub fn eval_v(&self, grid: &Grid) -> Result<RealField> {
        self.validate()?;
        match *self {
            PotentialSpec::GridSampled { ref values } => RealField::from_values(*grid, values.clone()),
            PotentialSpec::BallIndicator { a, radius } => {
                Ok(RealField::from_fn(*grid, |x| a * ball_cell_fraction(grid, &x, radius)))
            }
            _ => Ok(RealField::from_fn(*grid, |x| self.value_at(&x).expect("analytic kind"))),
        }
    }

    /// Samples `V_- = min(V, 0)`.
    pub fn eval_negative_part(&self, grid: &Grid) -> Result<RealField> {
        Ok(self.eval_v(grid)?.map(|v| v.min(0.0)))
    }

    /// Samples `2V + x.grad V`. Grid samples use the spectral gradient; the
    /// ball indicator returns the interior value `2V` and sets `approximate`,
    /// since its radial derivative is a surface measure.
    pub fn eval_2v_xgradv(&self, grid: &Grid) -> Result<VirialWeight> {
        let v = self.eval_v(grid)?;
        match self {
            PotentialSpec::GridSampled { .. } => {
                let ops = SpectralOps::new(*grid);
                let grad = ops.gradient(&v.to_complex());
                let values = (0..grid.len())
                    .map(|flat| {
                        let x = grid.node(flat);
                        let xg: f64 = (0..grid.dim()).map(|j| x[j] * grad[j].values()[flat].re).sum();
                        2.0 * v.values()[flat] + xg
                    })
                    .collect();
                Ok(VirialWeight { field: RealField::from_values(*grid, values)?, approximate: false })
            }
            PotentialSpec::BallIndicator { .. } => {
                log::warn!("ball_indicator: x.grad V is a surface measure; using the interior value 2V");
                Ok(VirialWeight { field: v.map(|val| 2.0 * val), approximate: true })
            }
            _ => {
                let field = RealField::from_fn(*grid, |x| {
                    2.0 * self.value_at(&x).expect("analytic") + self.x_grad_at(&x).expect("analytic")
                });
                Ok(VirialWeight { field, approximate: false })
            }
        }
    }

    /// Samples `x . grad V` (same conventions as [`Self::eval_2v_xgradv`]).
    pub fn eval_xgradv(&self, grid: &Grid) -> Result<VirialWeight> {
        let w = self.eval_2v_xgradv(grid)?;
        let v = self.eval_v(grid)?;
        let values = w.field.values().iter().zip(v.values()).map(|(a, b)| a - 2.0 * b).collect();
        Ok(VirialWeight { field: RealField::from_values(*grid, values)?, approximate: w.approximate })
    }

    /// Whether the support is compact; `None` when this cannot be decided.
    pub fn compact_support(&self) -> Option<bool> {
        match self {
            PotentialSpec::Zero | PotentialSpec::SmoothCompactBump { .. } | PotentialSpec::BallIndicator { .. } => {
                Some(true)
            }
            PotentialSpec::GaussianBump { a, .. } | PotentialSpec::InversePoly { a, .. } => Some(*a == 0.0),
            PotentialSpec::GridSampled { .. } => None,
        }
    }
}

/// Sub-samples per axis for cells cut by the sphere.
const BALL_SUBSAMPLES: usize = 8;

/// Fraction of the grid cell centred at `x` lying inside the ball.
fn ball_cell_fraction(grid: &Grid, x: &Point, radius: f64) -> f64 {
    let h = grid.spacing();
    let dim = grid.dim();
    let r = norm_sq(x).sqrt();
    let half_diag = 0.5 * h * (dim as f64).sqrt();
    if r + half_diag <= radius {
        return 1.0;
    }
    if r - half_diag > radius {
        return 0.0;
    }
    let m = BALL_SUBSAMPLES;
    let total = m.pow(dim as u32);
    let inside = (0..total)
        .filter(|&s| {
            let mut rem = s;
            let mut p = *x;
            for c in p.iter_mut().take(dim) {
                *c += ((rem % m) as f64 + 0.5) / m as f64 * h - 0.5 * h;
                rem /= m;
            }
            norm_sq(&p) <= radius * radius
        })
        .count();
    inside as f64 / total as f64
}

/// `sup_x C_d int |V(y)| |x-y|^{2-d} dy` over grid nodes.
pub fn kato_norm(v: &PotentialSpec, grid: &Grid) -> Result<f64> {
    let samples = v.eval_v(grid)?;
    kato_norm_of_samples(&samples)
}

pub fn kato_norm_of_samples(v: &RealField) -> Result<f64> {
    let grid = v.grid();
    let cd = c_d(grid.dim())?;
    if v.values().iter().all(|x| *x == 0.0) {
        return Ok(0.0);
    }
    let kernel = RieszKernel::new(grid, grid.dim() as f64 - 2.0)?;
    let abs = v.map(f64::abs);
    Ok(cd * kernel.convolve(&abs)?.max())
}

pub fn check_admissible(v: &PotentialSpec, grid: &Grid) -> Result<AdmissibilityReport> {
    let cd = c_d(grid.dim())?;
    let samples = v.eval_v(grid)?;
    let p = grid.dim() as f64 / 2.0;
    let ld2_norm = samples.map(|x| x.abs().powf(p)).integrate().powf(1.0 / p);
    let kato = kato_norm_of_samples(&samples)?;
    let negative = samples.map(|x| x.min(0.0));
    let kato_neg = kato_norm_of_samples(&negative)?;
    let ld2_finite = ld2_norm.is_finite();
    let kato_finite = kato.is_finite();
    let negative_part_small = kato_neg < 1.0;
    let compact_support = v.compact_support();
    let mut notes = Vec::new();
    if compact_support == Some(false) {
        notes.push("support is not compact; membership in the closure of compactly supported potentials is assumed".into());
    }
    if compact_support.is_none() {
        notes.push("support of sampled potential is limited to the box".into());
    }
    if !negative_part_small {
        notes.push(format!("||V_-||_K = {kato_neg:.6} >= 1: the Hamiltonian need not be positive"));
    }
    Ok(AdmissibilityReport {
        ld2_norm,
        kato_norm: kato,
        kato_norm_negative: kato_neg,
        kato_integral_negative: kato_neg / cd,
        inverse_c_d: 1.0 / cd,
        ld2_finite,
        kato_finite,
        negative_part_small,
        compact_support,
        admissible: ld2_finite && kato_finite && negative_part_small,
        notes,
    })
}

/// Sign class of `2V + x.grad V` on the grid with relative tolerance `tol`.
pub fn sign_classify(v: &PotentialSpec, grid: &Grid, tol: f64) -> Result<SignClass> {
    let w = v.eval_2v_xgradv(grid)?;
    Ok(sign_of_samples(w.field.values(), tol))
}

pub(crate) fn sign_of_samples(values: &[f64], tol: f64) -> SignClass {
    let scale = values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return SignClass::Zero;
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if min >= -tol * scale {
        SignClass::NonNeg
    } else if max <= tol * scale {
        SignClass::NonPos
    } else {
        SignClass::Mixed
    }
}

pub const DEFAULT_SIGN_TOL: f64 = 1e-10;
