//! Initial-data families.

use std::path::PathBuf;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{norm_sq, Field, Grid, Point};
use crate::model::Model;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    /// `scale * exp(i chirp |x|^2) * Q` with `Q` the reference ground state.
    ScaledGroundState {
        scale: f64,
        #[serde(default)]
        chirp: f64,
    },
    /// `amplitude * exp(-|x|^2 / (2 width^2) + i chirp |x|^2)`.
    Gaussian {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        chirp: f64,
    },
    /// A ground-state dump, translated so its mass centroid sits at the origin.
    File {
        path: PathBuf,
        #[serde(default = "unit")]
        scale: f64,
        #[serde(default)]
        chirp: f64,
    },
}

fn unit() -> f64 {
    1.0
}

impl InitialSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::domain("initial", msg));
        let check_chirp = |c: f64| if c.is_finite() { Ok(()) } else { bad(format!("chirp = {c} must be finite")) };
        match self {
            InitialSpec::ScaledGroundState { scale, chirp } | InitialSpec::File { scale, chirp, .. } => {
                if !(*scale > 0.0 && scale.is_finite()) {
                    return bad(format!("scale = {scale} must be positive"));
                }
                check_chirp(*chirp)
            }
            InitialSpec::Gaussian { amplitude, width, chirp } => {
                if !(*amplitude > 0.0 && amplitude.is_finite()) {
                    return bad(format!("amplitude = {amplitude} must be positive"));
                }
                if !(*width > 0.0 && width.is_finite()) {
                    return bad(format!("width = {width} must be positive"));
                }
                check_chirp(*chirp)
            }
        }
    }

    pub fn needs_ground_state(&self) -> bool {
        matches!(self, InitialSpec::ScaledGroundState { .. })
    }
}

pub fn gaussian(grid: Grid, amplitude: f64, width: f64, chirp: f64) -> Field {
    Field::from_fn(grid, |x| {
        let r2 = norm_sq(&x);
        Complex64::from_polar(amplitude * (-r2 / (2.0 * width * width)).exp(), chirp * r2)
    })
}

/// `scale * exp(i chirp |x|^2) * q`.
pub fn scaled_with_chirp(q: &Field, scale: f64, chirp: f64) -> Field {
    q.scaled(Complex64::new(scale, 0.0)).with_phase(|x| chirp * norm_sq(&x))
}

/// Mass centroid `int x |u|^2 / int |u|^2`.
pub fn centroid(u: &Field) -> Point {
    let grid = u.grid();
    let mut c = [0.0; crate::grid::MAX_DIM];
    let mut m = 0.0;
    for (flat, z) in u.values().iter().enumerate() {
        let w = z.norm_sqr();
        let x = grid.node(flat);
        for j in 0..grid.dim() {
            c[j] += w * x[j];
        }
        m += w;
    }
    if m > 0.0 {
        for cj in c.iter_mut() {
            *cj /= m;
        }
    }
    c
}

/// Builds the field described by `spec`. `reference` is the ground-state
/// profile for the scaled family.
pub fn build_initial(model: &Model, spec: &InitialSpec, reference: Option<&Field>) -> Result<Field> {
    spec.validate()?;
    let grid = *model.grid();
    match spec {
        InitialSpec::ScaledGroundState { scale, chirp } => {
            let q = reference
                .ok_or_else(|| Error::domain("initial", "scaled_ground_state needs a reference ground state"))?;
            grid.check_same(q.grid(), "initial")?;
            Ok(scaled_with_chirp(q, *scale, *chirp))
        }
        InitialSpec::Gaussian { amplitude, width, chirp } => Ok(gaussian(grid, *amplitude, *width, *chirp)),
        InitialSpec::File { path, scale, chirp } => {
            let dump = crate::io::read_ground_state_dump(path)?;
            grid.check_same(dump.profile.grid(), "initial")?;
            let c = centroid(&dump.profile);
            let shift: Point = std::array::from_fn(|j| -c[j]);
            let centred = model.ops().translate(&dump.profile, shift);
            Ok(scaled_with_chirp(&centred, *scale, *chirp))
        }
    }
}
