//! Both discrete laws on the Euler model they are designed for: a deadbeat
//! error spec wipes out an initial offset in a fixed number of steps.

use gantry_flat::control::{
    dynamic_feedback_step, quasi_static_feedback_step, DynamicControllerState, ErrorDynamicsSpec, Integral,
};
use gantry_flat::model::{euler_step, FlatOutput, TransformedState};
use gantry_flat::params::CraneParams;
use gantry_flat::trajectory::polynomial_reference;

fn main() -> gantry_flat::Result<()> {
    let params = CraneParams::default();
    let ts = 0.05;
    let reference = polynomial_reference(FlatOutput::new(0.2, 0.7), FlatOutput::new(1.0, 0.5), 1.7, ts)?;
    let start = TransformedState::rest(FlatOutput::new(0.201, 0.699));

    for (name, dynamic) in [("dynamic (4,4)", true), ("quasi-static (4,2)", false)] {
        let spec = if dynamic {
            ErrorDynamicsSpec::deadbeat(4, 4)
        } else {
            ErrorDynamicsSpec::deadbeat(4, 2)
        };
        let mut x = start;
        let mut z = DynamicControllerState::from_state(&x, ts);
        println!("{name}");
        for k in 0..8 {
            let r = reference.sample(k);
            println!("  k={k}  e_x={:+.3e}  e_y={:+.3e}", x.x_l - r.x_l, x.y_l - r.y_l);
            let window = reference.window(k);
            let input = if dynamic {
                let step = dynamic_feedback_step(&x, &z, &window, &spec, &params, ts, Integral::default())?;
                z = step.next;
                step.input
            } else {
                quasi_static_feedback_step(&x, &window, &spec, &params, ts, Integral::default())?.input
            };
            x = euler_step(&x, &input, &params, ts)?;
        }
    }
    Ok(())
}
