//! Split-step evolution of a Gaussian in a repulsive bump.

use nlh::evolve::{evolve, virial_consistency, EvolveConfig};
use nlh::initial::gaussian;
use nlh::{Grid, Model, PotentialSpec};

fn main() -> nlh::Result<()> {
    let grid = Grid::new(3, 32, 8.0)?;
    let model = Model::new(grid, 2.5, PotentialSpec::GaussianBump { a: 0.5, sigma: 1.5 })?;
    let u0 = gaussian(grid, 0.35, 1.0, 0.05);
    let cfg = EvolveConfig { dt0: 5e-3, t_max: 1.0, adaptive: false, record_stride: 20, ..Default::default() };
    let rec = evolve(&model, &u0, &cfg)?;
    println!("{} after {} steps", rec.termination.label(), rec.accepted_steps);
    println!("{:>6} {:>14} {:>14} {:>12} {:>12}", "t", "mass", "energy", "I", "I'");
    for s in &rec.snapshots {
        println!("{:>6.2} {:>14.10} {:>14.10} {:>12.6} {:>12.6}", s.time, s.mass, s.energy, s.variance_i, s.virial_i1);
    }
    println!("max mass drift {:.2e}", rec.max_mass_drift());
    let fine = EvolveConfig { dt0: 1e-3, t_max: 0.2, adaptive: false, record_stride: 1, ..Default::default() };
    let vc = virial_consistency(&evolve(&model, &u0, &fine)?)?;
    println!("virial finite differences: first {:.2e}, second {:.2e}", vc.first, vc.second);
    Ok(())
}
