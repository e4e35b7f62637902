//! Kato norms and admissibility of the built-in potential families.

use nlh::potentials::{check_admissible, sign_classify, DEFAULT_SIGN_TOL};
use nlh::{Grid, PotentialSpec};

fn main() -> nlh::Result<()> {
    let grid = Grid::new(3, 64, 6.0)?;
    let cases = [
        PotentialSpec::BallIndicator { a: 1.0, radius: 1.0 },
        PotentialSpec::BallIndicator { a: -1.5, radius: 1.0 },
        PotentialSpec::GaussianBump { a: 0.5, sigma: 1.5 },
        PotentialSpec::GaussianBump { a: -10.0, sigma: 0.5 },
        PotentialSpec::SmoothCompactBump { a: -0.5, radius: 2.0 },
        PotentialSpec::InversePoly { a: 1.0, k: 2.0 },
    ];
    println!("{:<55} {:>9} {:>9} {:>6} {:>8}", "potential", "K(V)", "K(V_-)", "adm", "2V+xV'");
    for v in &cases {
        let r = check_admissible(v, &grid)?;
        let sign = sign_classify(v, &grid, DEFAULT_SIGN_TOL)?;
        println!(
            "{:<55} {:>9.4} {:>9.4} {:>6} {:>8?}",
            format!("{v:?}"),
            r.kato_norm,
            r.kato_norm_negative,
            r.admissible,
            sign
        );
    }
    Ok(())
}
