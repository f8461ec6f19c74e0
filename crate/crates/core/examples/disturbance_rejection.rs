//! A constant force on the trolley leaves a stationary offset; integral
//! parts switched on at the end of the transition remove it.

use gantry_flat::control::ErrorDynamicsSpec;
use gantry_flat::model::{FlatOutput, Input};
use gantry_flat::params::CraneParams;
use gantry_flat::simulation::{run_closed_loop, ControllerKind, PlantModel, Scenario};
use gantry_flat::trajectory::polynomial_reference;

fn main() -> gantry_flat::Result<()> {
    let ts = 0.01;
    let reference = polynomial_reference(FlatOutput::new(0.2, 0.7), FlatOutput::new(1.0, 0.5), 1.7, ts)?;
    let base = ErrorDynamicsSpec::uniform(0.93, 4, 2)?;
    let with_integral = ErrorDynamicsSpec::new(
        base.x_l.with_integral_root(0.98, ts)?,
        base.y_l.with_integral_root(0.98, ts)?,
    );

    for (label, spec) in [("without integral", base), ("with integral", with_integral)] {
        let mut plant = PlantModel::new(CraneParams::default(), ts);
        plant.disturbance = Input::new(0.5, 0.0);
        let mut s = Scenario::new("disturbance", plant, ControllerKind::QuasiStatic, spec, reference.clone());
        s.integral_from = Some(reference.transition_end());
        s.settle_steps = 600;
        let result = run_closed_loop(&s)?;
        println!("{label}");
        for secs in [0, 1, 2, 3, 4, 5] {
            let k = reference.transition_end() + secs * 100;
            let e = result.rows[k].error;
            println!("  {secs} s after transition: |e| = {:.4} mm", e.x_l.hypot(e.y_l) * 1e3);
        }
    }
    Ok(())
}
