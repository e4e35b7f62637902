//! Self-consistent frequency in an attractive Gaussian well.
//!
//! The frequency is iterated until the virial balance holds with the
//! potential term included; the closed-form constant then applies again.

use nlh::ground_state::{closed_form_c_q, solve_ground_state, OmegaMode, SolverOptions};
use nlh::potentials::check_admissible;
use nlh::{Grid, Model, PotentialSpec};

fn main() -> nlh::Result<()> {
    let grid = Grid::new(3, 64, 8.0)?;
    let v = PotentialSpec::GaussianBump { a: -1.0, sigma: 0.5 };
    let report = check_admissible(&v, &grid)?;
    println!("K(V_-) = {:.4}, admissible = {}", report.kato_norm_negative, report.admissible);

    let model = Model::new(grid, 2.5, v)?;
    let gs = solve_ground_state(&model, OmegaMode::SelfConsistent { initial: 1.0 }, &SolverOptions::default())?;
    println!("converged {} after {} outer steps", gs.converged, gs.outer_iterations);
    for (k, w) in gs.omega_history.iter().enumerate() {
        println!("  omega[{k}] = {w:.10}");
    }
    println!("Pohozaev residuals {:.2e} {:.2e}", gs.pohozaev_residuals.0, gs.pohozaev_residuals.1);
    println!("C_Q {:.8}, closed form {:.8}", gs.c_q, closed_form_c_q(gs.snapshot.mass, gs.omega, 2.5));
    Ok(())
}
