//! The comparison function and its critical point for given scalars.
//!
//! cargo run --example threshold -- <E> <M> <C_Q> <gamma>

use nlh::threshold::{f_eval, me_from_constant, threshold_identity_residuals, x0_solve, ThresholdInputs};

fn main() -> nlh::Result<()> {
    let v: Vec<f64> = std::env::args().skip(1).map(|s| s.parse().expect("number")).collect();
    let (e, m, c_q, gamma) = match v[..] {
        [e, m, c, g] => (e, m, c, g),
        _ => (0.25, 1.2, 1.1076612377, 2.5),
    };
    let p = ThresholdInputs::new(e, m, c_q, gamma)?;
    let x0 = x0_solve(&p)?;
    println!("ME          {:?}", me_from_constant(&p));
    println!("x0          {x0:.12e}");
    println!("f(x0)       {:.12e}  x0/8 = {:.12e}", f_eval(x0, &p)?, x0 / 8.0);
    let (power, first) = threshold_identity_residuals(&p)?;
    println!("ME (1 - x0/16E)^s - 1 = {power:.3e}");
    println!("ME (1 - x0/16E)   - 1 = {first:.3e}");
    for k in 0..=8 {
        let x = x0 + (16.0 * e - x0) * (k as f64 / 8.0) - (16.0 * e - x0) * 0.5;
        if x <= 16.0 * e {
            println!("  f({x:>12.6}) = {:.8}", f_eval(x, &p)?);
        }
    }
    Ok(())
}
