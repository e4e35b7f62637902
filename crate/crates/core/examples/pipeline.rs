//! Runs a preset end to end and emits plot series.
//!
//! cargo run --release --example pipeline -- presets/blowup-demo.toml /tmp/blowup

use std::path::PathBuf;

use nlh::config::parse_config;
use nlh::harness::{run, RunOptions};
use nlh::io::emit_plot_data;

fn main() -> nlh::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = PathBuf::from(args.next().unwrap_or_else(|| "presets/blowup-demo.toml".into()));
    let out = args.next().map(PathBuf::from);
    let cfg = parse_config(&config)?;
    let outcome = run(&cfg, &RunOptions { out, ..Default::default() })?;
    for line in outcome.summary() {
        println!("{line}");
    }
    if outcome.record.is_some() {
        for f in emit_plot_data(&outcome.dir)? {
            println!("wrote {}", f.display());
        }
    }
    Ok(())
}
