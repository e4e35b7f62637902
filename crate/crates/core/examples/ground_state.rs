//! Ground state of the potential-free problem and its sharp constants.
//!
//! cargo run --release --example ground_state -- [n] [half_len]

use nlh::ground_state::{closed_form_c_q, radial_deviation_within, solve_ground_state, threshold_product, OmegaMode, SolverOptions};
use nlh::{Grid, Model, PotentialSpec};

fn main() -> nlh::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(64, |s| s.parse().expect("n"));
    let half_len: f64 = args.next().map_or(8.0, |s| s.parse().expect("half_len"));
    let gamma = 2.5;

    let model = Model::new(Grid::new(3, n, half_len)?, gamma, PotentialSpec::Zero)?;
    let gs = solve_ground_state(&model, OmegaMode::Fixed { omega: 1.0 }, &SolverOptions::default())?.require_converged()?;
    let s = &gs.snapshot;

    println!("iterations        {}", gs.iterations);
    println!("residual          {:.3e}", gs.fixed_point_residual);
    println!("Q(0)              {:.10}", gs.profile().max_abs());
    println!("mass              {:.10}", s.mass);
    println!("hv / mass         {:.10}  (expect {:.10})", s.hv_sq / s.mass, gamma / (4.0 - gamma));
    println!("P / mass          {:.10}  (expect {:.10})", s.p_value / s.mass, 4.0 / (4.0 - gamma));
    println!("P / E             {:.10}", s.p_value / s.energy);
    println!("C_GN              {:.10}", gs.c_gn);
    println!("C_Q               {:.10}  closed form {:.10}", gs.c_q, closed_form_c_q(s.mass, 1.0, gamma));
    println!("M^(1-s) E^s       {:.10}", threshold_product(gs.c_q, gamma));
    println!("radial dev (r<4)  {:.3e}", radial_deviation_within(gs.profile(), 4.0));
    Ok(())
}
