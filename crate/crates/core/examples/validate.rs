//! The invariant suites at a reduced size.

use nlh::suites::{run_suites, SuiteSettings};

fn main() -> nlh::Result<()> {
    let settings = SuiteSettings { n: 32, trials: 20, kato_pairs: 10, threshold_tuples: 50, seed: 1 };
    let names: Vec<String> = std::env::args().skip(1).collect();
    for suite in run_suites(&names, settings, 2)? {
        for r in &suite.rows {
            println!("{} {:<18} {:<30} {:>12.4e}  {}", if r.pass { "ok  " } else { "FAIL" }, r.suite, r.check, r.value, r.detail);
        }
    }
    Ok(())
}
