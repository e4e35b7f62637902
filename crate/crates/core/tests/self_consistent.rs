use nlh::ground_state::{closed_form_c_q, solve_ground_state, OmegaMode, SolverOptions};
use nlh::potentials::check_admissible;
use nlh::{Grid, Model, PotentialSpec};

#[test]
fn attractive_well_reaches_self_consistent_frequency() {
    let grid = Grid::new(3, 64, 8.0).unwrap();
    let v = PotentialSpec::GaussianBump { a: -1.0, sigma: 0.5 };
    assert!(check_admissible(&v, &grid).unwrap().admissible);
    let model = Model::new(grid, 2.5, v).unwrap();
    let gs = solve_ground_state(&model, OmegaMode::SelfConsistent { initial: 1.0 }, &SolverOptions::default()).unwrap();
    assert!(gs.converged, "residual {}", gs.fixed_point_residual);
    assert!(gs.outer_iterations <= 20, "{} outer steps", gs.outer_iterations);
    // Self-consistency makes the weighted virial term drop out of the balance.
    let (r1, r2) = gs.pohozaev_residuals;
    assert!(r1 < 1e-4 && r2 < 1e-4, "{r1} {r2}");
    let closed = closed_form_c_q(gs.snapshot.mass, gs.omega, 2.5);
    assert!((closed - gs.c_q).abs() < 1e-4 * gs.c_q, "{closed} vs {}", gs.c_q);
    assert!(gs.c_q_closed_form.is_some());
    assert!(gs.omega > 0.9 && gs.omega < 1.0, "omega {}", gs.omega);
    assert!(gs.omega_history.len() >= 2);
}
