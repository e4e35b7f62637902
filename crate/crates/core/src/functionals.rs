//! Scalar functionals: mass, interaction, weighted kinetic energy, energy,
//! Weinstein ratio, variance and the virial derivatives.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{norm_sq, Field, RealField};
use crate::model::Model;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalSnapshot {
    pub time: f64,
    pub mass: f64,
    pub energy: f64,
    pub p_value: f64,
    pub hv_sq: f64,
    pub grad_sq: f64,
    pub variance_i: f64,
    pub virial_i1: f64,
    pub virial_i2: f64,
    pub e_term: f64,
    /// Set when `2V + x.grad V` was replaced by its interior value.
    pub approximate: bool,
}

impl FunctionalSnapshot {
    /// `M^{1-s} P^{s}` with `s = (gamma - 2)/2`.
    pub fn mass_interaction_product(&self, gamma: f64) -> f64 {
        let s = (gamma - 2.0) / 2.0;
        self.mass.powf(1.0 - s) * self.p_value.powf(s)
    }

    /// `sqrt(I)`.
    pub fn z(&self) -> f64 {
        self.variance_i.sqrt()
    }
}

pub fn mass(u: &Field) -> f64 {
    u.l2_norm_sq()
}

/// `|x|^{-gamma} * |u|^2`.
pub fn riesz_potential(model: &Model, u: &Field) -> Result<RealField> {
    model.grid().check_same(u.grid(), "riesz_potential")?;
    model.kernel().convolve(&u.density())
}

/// `P(u) = int (|x|^{-gamma} * |u|^2) |u|^2`, times the model coupling.
pub fn p_functional(model: &Model, u: &Field) -> Result<f64> {
    let rho = u.density();
    let phi = model.kernel().convolve(&rho)?;
    Ok(model.coupling() * p_from(&rho, &phi))
}

fn p_from(rho: &RealField, phi: &RealField) -> f64 {
    let s: f64 = rho.values().iter().zip(phi.values()).map(|(a, b)| a * b).sum();
    (s * rho.grid().cell_volume()).max(0.0)
}

pub fn grad_sq(model: &Model, u: &Field) -> Result<f64> {
    model.grid().check_same(u.grid(), "grad_sq")?;
    Ok(model.ops().grad_norm_sq(u))
}

/// `int w |u|^2` for a real weight.
pub fn weighted_density_integral(w: &RealField, u: &Field) -> f64 {
    let s: f64 = w.values().iter().zip(u.values()).map(|(a, z)| a * z.norm_sqr()).sum();
    s * u.grid().cell_volume()
}

/// `||grad u||^2 + int V |u|^2`.
pub fn hv_norm_sq(model: &Model, u: &Field) -> Result<f64> {
    Ok(grad_sq(model, u)? + weighted_density_integral(model.v(), u))
}

pub fn energy(model: &Model, u: &Field) -> Result<f64> {
    Ok(hv_norm_sq(model, u)? / 2.0 - p_functional(model, u)? / 4.0)
}

/// `P / (hv^{gamma/2} M^{(4-gamma)/2})`.
pub fn weinstein(model: &Model, u: &Field) -> Result<f64> {
    let m = mass(u);
    if m == 0.0 {
        return Err(Error::domain("weinstein", "zero field"));
    }
    let hv = hv_norm_sq(model, u)?;
    if hv <= 0.0 {
        return Err(Error::domain("weinstein", format!("nonpositive weighted kinetic energy {hv}")));
    }
    let g = model.gamma();
    Ok(p_functional(model, u)? / (hv.powf(g / 2.0) * m.powf((4.0 - g) / 2.0)))
}

/// `int |x|^2 |u|^2`.
pub fn variance(u: &Field) -> f64 {
    let grid = u.grid();
    let s: f64 = u.values().iter().enumerate().map(|(flat, z)| norm_sq(&grid.node(flat)) * z.norm_sqr()).sum();
    s * grid.cell_volume()
}

/// `4 Im int x . conj(u) grad u` with spectral derivatives.
pub fn virial_first(model: &Model, u: &Field) -> Result<f64> {
    model.grid().check_same(u.grid(), "virial_first")?;
    let grad = model.ops().gradient(u);
    Ok(virial_first_from(u, &grad))
}

fn virial_first_from(u: &Field, grad: &[Field]) -> f64 {
    let grid = u.grid();
    let mut s = 0.0;
    for (flat, z) in u.values().iter().enumerate() {
        let x = grid.node(flat);
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, g) in grad.iter().enumerate() {
            acc += x[j] * g.values()[flat];
        }
        s += (z.conj() * acc).im;
    }
    4.0 * s * grid.cell_volume()
}

/// `4 int (2V + x.grad V) |u|^2`.
pub fn e_term(model: &Model, u: &Field) -> Result<f64> {
    model.grid().check_same(u.grid(), "e_term")?;
    Ok(4.0 * weighted_density_integral(&model.virial_weight().field, u))
}

/// The two algebraically equal forms of the second virial derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirialSecond {
    /// `8 hv - 2 gamma P - e`.
    pub value: f64,
    /// `8 ||grad u||^2 - 4 int x.grad V |u|^2 - 2 gamma P`.
    pub gradient_form: f64,
}

impl VirialSecond {
    pub fn relative_disagreement(&self) -> f64 {
        let scale = self.value.abs().max(self.gradient_form.abs()).max(f64::MIN_POSITIVE);
        (self.value - self.gradient_form).abs() / scale
    }
}

pub fn virial_second(model: &Model, u: &Field) -> Result<VirialSecond> {
    let g2 = grad_sq(model, u)?;
    let hv = g2 + weighted_density_integral(model.v(), u);
    let p = p_functional(model, u)?;
    let e = e_term(model, u)?;
    let gamma = model.gamma();
    let xgv = weighted_density_integral(model.x_grad_v(), u);
    Ok(VirialSecond {
        value: 8.0 * hv - 2.0 * gamma * p - e,
        gradient_form: 8.0 * g2 - 4.0 * xgv - 2.0 * gamma * p,
    })
}

/// Right side minus left side of the weighted Cauchy-Schwarz bound
/// `(Im int x conj(u) grad u)^2 <= I (hv - P^{2/gamma} / (C_Q M^{(4-gamma)/gamma}))`.
pub fn cauchy_schwarz_gap(model: &Model, u: &Field, c_q: f64) -> Result<f64> {
    let s = snapshot(model, u, 0.0)?;
    Ok(cauchy_schwarz_gap_of(&s, model.gamma(), c_q))
}

pub fn cauchy_schwarz_gap_of(s: &FunctionalSnapshot, gamma: f64, c_q: f64) -> f64 {
    let bracket = s.hv_sq - s.p_value.powf(2.0 / gamma) / (c_q * s.mass.powf((4.0 - gamma) / gamma));
    s.variance_i * bracket - (s.virial_i1 / 4.0).powi(2)
}

/// Every functional at once, sharing transforms.
pub fn snapshot(model: &Model, u: &Field, time: f64) -> Result<FunctionalSnapshot> {
    model.grid().check_same(u.grid(), "snapshot")?;
    let ops = model.ops();
    let spec = ops.forward(u);
    let grad_sq = ops.grad_norm_sq_from_spectrum(&spec);
    let grad = ops.gradient_from_spectrum(&spec);
    let virial_i1 = virial_first_from(u, &grad);
    let rho = u.density();
    let p_value = if model.coupling() == 0.0 {
        0.0
    } else {
        model.coupling() * p_from(&rho, &model.kernel().convolve(&rho)?)
    };
    let mass = rho.integrate();
    let hv_sq = grad_sq + weighted_density_integral(model.v(), u);
    let e_term = 4.0 * weighted_density_integral(&model.virial_weight().field, u);
    let gamma = model.gamma();
    Ok(FunctionalSnapshot {
        time,
        mass,
        energy: hv_sq / 2.0 - p_value / 4.0,
        p_value,
        hv_sq,
        grad_sq,
        variance_i: variance(u),
        virial_i1,
        virial_i2: 8.0 * hv_sq - 2.0 * gamma * p_value - e_term,
        e_term,
        approximate: model.virial_weight().approximate,
    })
}
