//! Roll the Euler sampled-data model forward for four steps, then recover
//! the initial state and the first input from the five load positions alone.

use gantry_flat::model::{euler_step, flat_parameterize, FlatWindow, Input, TransformedState};
use gantry_flat::params::CraneParams;

fn main() -> gantry_flat::Result<()> {
    let params = CraneParams::default();
    let ts = 0.02;
    let x0 = TransformedState {
        x_l: 0.3,
        y_l: 0.7,
        v_lx: 0.15,
        v_ly: -0.05,
        theta: 0.1,
        omega_theta: -0.2,
    };
    let inputs = [1.2, -0.4, 0.8, 2.0].map(|f| Input::new(f, params.holding_torque() + 0.005));

    let mut states = vec![x0];
    for u in &inputs {
        states.push(euler_step(states.last().unwrap(), u, &params, ts)?);
    }
    let positions: Vec<_> = states.iter().map(TransformedState::position).collect();
    let window = FlatWindow::from_slice(&positions, 0).expect("five samples");

    let (x, u) = flat_parameterize(&window, &params, ts)?;
    println!("generating state  {x0:?}");
    println!("recovered state   {x:?}");
    println!("generating input  F={:.12} M={:.12}", inputs[0].force, inputs[0].torque);
    println!("recovered input   F={:.12} M={:.12}", u.force, u.torque);
    Ok(())
}
