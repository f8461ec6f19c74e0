//! Drives the same code path as `gantry-flat run` from a TOML scenario.
//!
//! cargo run --release --example scenario_file -- scenarios/compare_80ms.toml

use std::path::PathBuf;

use gantry_flat::cli::{cmd_run, Options};

fn main() -> gantry_flat::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/benchmark_10ms.toml"));
    let outcome = cmd_run(&path, &Options::default())?;
    print!("{}", outcome.table);
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
