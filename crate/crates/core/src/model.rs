//! A validated problem instance: grid, Riesz exponent, potential samples and
//! the shared spectral machinery.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Grid, RealField};
use crate::potentials::{PotentialSpec, VirialWeight};
use crate::riesz::RieszKernel;
use crate::spectral::SpectralOps;

/// Checks `2 < gamma < min(4, d)`.
pub fn validate_gamma(gamma: f64, dim: usize) -> Result<()> {
    let upper = 4f64.min(dim as f64);
    if !(gamma > 2.0 && gamma < upper) {
        return Err(Error::domain(
            "gamma",
            format!("gamma = {gamma} must satisfy 2 < gamma < min(4, d) = {upper}"),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Model {
    grid: Grid,
    gamma: f64,
    potential: PotentialSpec,
    v: Arc<RealField>,
    weight: Arc<VirialWeight>,
    x_grad_v: Arc<RealField>,
    ops: Arc<SpectralOps>,
    kernel: Arc<RieszKernel>,
    coupling: f64,
}

impl Model {
    pub fn new(grid: Grid, gamma: f64, potential: PotentialSpec) -> Result<Self> {
        validate_gamma(gamma, grid.dim())?;
        let ops = Arc::new(SpectralOps::new(grid));
        let kernel = Arc::new(RieszKernel::new(&grid, gamma)?);
        Self::assemble(grid, gamma, potential, ops, kernel)
    }

    fn assemble(
        grid: Grid,
        gamma: f64,
        potential: PotentialSpec,
        ops: Arc<SpectralOps>,
        kernel: Arc<RieszKernel>,
    ) -> Result<Self> {
        let v = potential.eval_v(&grid)?;
        let weight = potential.eval_2v_xgradv(&grid)?;
        let x_grad_v = RealField::from_values(
            grid,
            weight.field.values().iter().zip(v.values()).map(|(w, v)| w - 2.0 * v).collect(),
        )?;
        Ok(Model {
            grid,
            gamma,
            potential,
            v: Arc::new(v),
            weight: Arc::new(weight),
            x_grad_v: Arc::new(x_grad_v),
            ops,
            kernel,
            coupling: 1.0,
        })
    }

    /// Same grid, exponent and kernels with a different potential.
    pub fn with_potential(&self, potential: PotentialSpec) -> Result<Self> {
        let mut m = Self::assemble(self.grid, self.gamma, potential, self.ops.clone(), self.kernel.clone())?;
        m.coupling = self.coupling;
        Ok(m)
    }

    /// The linear equation `i u_t + Delta u - V u = 0`, used for diagnostics.
    pub fn without_interaction(&self) -> Self {
        Model { coupling: 0.0, ..self.clone() }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    pub fn v(&self) -> &RealField {
        &self.v
    }

    /// Samples of `2V + x.grad V`.
    pub fn virial_weight(&self) -> &VirialWeight {
        &self.weight
    }

    pub fn x_grad_v(&self) -> &RealField {
        &self.x_grad_v
    }

    pub fn ops(&self) -> &SpectralOps {
        &self.ops
    }

    pub fn kernel(&self) -> &RieszKernel {
        &self.kernel
    }

    /// 1 for the focusing equation, 0 when the Hartree term is switched off.
    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn has_potential(&self) -> bool {
        !self.potential.is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_range_is_enforced() {
        assert!(validate_gamma(2.5, 3).is_ok());
        assert!(validate_gamma(2.0, 3).is_err());
        assert!(validate_gamma(3.0, 3).is_err());
        assert!(validate_gamma(4.0, 3).is_err());
        assert!(validate_gamma(3.5, 5).is_ok());
        let g = Grid::new(3, 8, 2.0).unwrap();
        assert!(Model::new(g, 3.2, PotentialSpec::Zero).is_err());
    }
}
