//! Rest-to-rest load transfer on the simulated crane (RK4 plant, input held
//! over each sampling interval), tracked by the quasi-static law at 10 ms.
//! Writes the log to `out/benchmark_quasi-static_10ms.csv`.

use gantry_flat::control::ErrorDynamicsSpec;
use gantry_flat::model::FlatOutput;
use gantry_flat::params::CraneParams;
use gantry_flat::simulation::{run_closed_loop, ControllerKind, PlantModel, Scenario};
use gantry_flat::trajectory::polynomial_reference;

fn main() -> gantry_flat::Result<()> {
    let ts = 0.01;
    let reference = polynomial_reference(FlatOutput::new(0.2, 0.7), FlatOutput::new(1.0, 0.5), 1.7, ts)?;
    let plant = PlantModel::new(CraneParams::default(), ts);
    let spec = ErrorDynamicsSpec::uniform(0.5, 4, 2)?;
    let mut scenario = Scenario::new("benchmark", plant, ControllerKind::QuasiStatic, spec, reference);
    scenario.settle_steps = 100;

    let result = run_closed_loop(&scenario)?;
    let s = result.summary();
    println!("max error   {:.3} mm", s.max_error * 1e3);
    println!("final error {:.3e} mm", s.final_error * 1e3);
    println!("F in [{:.3}, {:.3}] N, M in [{:.4}, {:.4}] N m", s.force_min, s.force_max, s.torque_min, s.torque_max);

    std::fs::create_dir_all("out")?;
    let path = result.save_csv("out")?;
    println!("wrote {}", path.display());
    Ok(())
}
