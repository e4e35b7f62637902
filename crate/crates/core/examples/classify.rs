//! Threshold classification of chirped, rescaled ground states.

use nlh::grid::norm_sq;
use nlh::ground_state::{solve_ground_state, OmegaMode, SolverOptions};
use nlh::threshold::{classify, Branch, Reference};
use nlh::{Grid, Model, PotentialSpec};
use rustfft::num_complex::Complex64;

fn main() -> nlh::Result<()> {
    let model = Model::new(Grid::new(3, 64, 12.0)?, 2.5, PotentialSpec::Zero)?;
    let gs = solve_ground_state(&model, OmegaMode::Fixed { omega: 1.0 }, &SolverOptions::default())?.require_converged()?;
    let reference = Reference::from_ground_state(&gs, Branch::Free, 2.5);

    println!("{:>6} {:>6} {:>9} {:>9} {:>9}  verdict", "c", "chirp", "ME", "lhs", "MP/MPQ");
    for (c, chirp) in [(1.05, -0.1), (1.05, 0.1), (0.95, 0.1), (0.95, -0.3), (1.0, 0.0), (1.3, 0.0)] {
        let u0 = gs.profile().scaled(Complex64::new(c, 0.0)).with_phase(|x| chirp * norm_sq(&x));
        let r = classify(&model, &u0, &reference)?;
        println!(
            "{c:>6.2} {chirp:>6.2} {:>9} {:>9.4} {:>9.4}  {}",
            r.me.map_or("-".into(), |m| format!("{m:.4}")),
            r.virial_condition.lhs,
            r.mp_value / r.mp_reference,
            r.verdict.label()
        );
    }
    Ok(())
}
