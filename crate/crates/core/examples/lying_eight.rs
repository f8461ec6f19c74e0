//! Closed figure-eight path for the load, tracked at 10 ms.

use gantry_flat::control::ErrorDynamicsSpec;
use gantry_flat::params::CraneParams;
use gantry_flat::simulation::{run_closed_loop, ControllerKind, PlantModel, Scenario};
use gantry_flat::trajectory::{lying_eight_reference, LyingEight};

fn main() -> gantry_flat::Result<()> {
    let ts = 0.01;
    let params = CraneParams::default();
    let shape = LyingEight::default();
    let reference = lying_eight_reference(&shape, ts, &params)?;
    println!(
        "{} samples, closes at k={} ({} s)",
        reference.len(),
        reference.transition_end(),
        reference.duration()
    );

    let spec = ErrorDynamicsSpec::uniform(0.5, 4, 2)?;
    let s = Scenario::new("lying_eight", PlantModel::new(params, ts), ControllerKind::QuasiStatic, spec, reference);
    let result = run_closed_loop(&s)?;
    let summary = result.summary();
    println!("max error {:.3} mm", summary.max_error * 1e3);
    std::fs::create_dir_all("out")?;
    println!("wrote {}", result.save_csv("out")?.display());
    Ok(())
}
