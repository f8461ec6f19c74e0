//! Discrete quasi-static law against the continuous-time law evaluated at the
//! sampling instants, over a range of sampling times. Runs in parallel.

use gantry_flat::control::ErrorDynamicsSpec;
use gantry_flat::model::FlatOutput;
use gantry_flat::params::CraneParams;
use gantry_flat::simulation::{sweep_sampling_times, ControllerKind, PlantModel, Scenario};
use gantry_flat::trajectory::polynomial_reference;

fn main() -> gantry_flat::Result<()> {
    let ts_list = [0.001, 0.01, 0.02, 0.04, 0.06, 0.08, 0.1];
    let rows = sweep_sampling_times(
        |kind, ts| {
            let reference = polynomial_reference(FlatOutput::new(0.2, 0.7), FlatOutput::new(1.0, 0.5), 1.7, ts)?;
            let (ox, oy) = kind.orders();
            let spec = ErrorDynamicsSpec::uniform(0.5, ox, oy)?;
            let mut s = Scenario::new("sweep", PlantModel::new(CraneParams::default(), ts), kind, spec, reference);
            s.settle_steps = (1.0 / ts).round() as usize;
            Ok(s)
        },
        &[ControllerKind::QuasiStatic, ControllerKind::Continuous],
        &ts_list,
    )?;
    println!("{:<14} {:>7} {:>10} {:>12}", "controller", "ts[ms]", "status", "max err[mm]");
    for row in rows {
        let status = match &row.summary.diverged {
            Some(d) => format!("div@{}", d.last_valid),
            None => "ok".into(),
        };
        println!(
            "{:<14} {:>7} {:>10} {:>12.3}",
            row.controller.name(),
            row.ts * 1e3,
            status,
            row.summary.max_error * 1e3
        );
    }
    Ok(())
}
