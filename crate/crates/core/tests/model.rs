mod common;

use common::*;
use gantry_flat::model::*;
use gantry_flat::params::CraneParams;
use proptest::prelude::*;

#[test]
fn accelerations_satisfy_equations_of_motion() {
    let params = CraneParams::default();
    let mut rng = rng(1);
    for _ in 0..2000 {
        let load = random_load_state(&mut rng);
        let drive = inverse_transform(&load, &params).unwrap();
        let u = random_input(&mut rng, &params);
        let d = continuous_dynamics(&drive, &u, &params).unwrap();
        let res = motion_residual(&drive, [d[3], d[4], d[5]], &u, &params);
        for r in res {
            assert!(r.abs() < 1e-10, "residual {res:?} at {drive:?}");
        }
        let lu = motion_accelerations_lu(&drive, &u, &params);
        assert!(max_abs_diff(&lu, &d[3..]) < 1e-8);
    }
}

#[test]
fn transform_round_trip() {
    let params = CraneParams::default();
    let mut rng = rng(2);
    for _ in 0..1000 {
        let load = random_load_state(&mut rng);
        let drive = inverse_transform(&load, &params).unwrap();
        let back = transform_to_load_coords(&drive, &params);
        assert!(max_abs_diff(&back.to_array(), &load.to_array()) < 1e-12);
        let again = inverse_transform(&back, &params).unwrap();
        // phi = l/R carries the 1/R scale
        let scale = [1.0, params.drum_radius, 1.0, 1.0, params.drum_radius, 1.0];
        let a: Vec<f64> = again.to_array().iter().zip(scale).map(|(v, s)| v * s).collect();
        let b: Vec<f64> = drive.to_array().iter().zip(scale).map(|(v, s)| v * s).collect();
        assert!(max_abs_diff(&a, &b) < 1e-12);
    }
}

/// Chain rule: d/dt of the transformed state along the drive flow.
#[test]
fn transformed_dynamics_match_pushed_forward_flow() {
    let params = CraneParams::default();
    let mut rng = rng(3);
    let h = 1e-7;
    for _ in 0..300 {
        let load = random_load_state(&mut rng);
        let drive = inverse_transform(&load, &params).unwrap();
        let u = random_input(&mut rng, &params);
        let d = continuous_dynamics(&drive, &u, &params).unwrap();
        let x = drive.to_array();
        let fwd = OriginalState::from_array(std::array::from_fn(|i| x[i] + h * d[i]));
        let bwd = OriginalState::from_array(std::array::from_fn(|i| x[i] - h * d[i]));
        let tf = transform_to_load_coords(&fwd, &params).to_array();
        let tb = transform_to_load_coords(&bwd, &params).to_array();
        let fd: Vec<f64> = (0..6).map(|i| (tf[i] - tb[i]) / (2.0 * h)).collect();
        let exact = transformed_dynamics(&load, &u, &params).unwrap();
        assert!(max_abs_diff(&fd, &exact) < 1e-6, "{fd:?} vs {exact:?}");
    }
}

#[test]
fn pendulum_constraint_holds() {
    let params = CraneParams::default();
    let mut rng = rng(4);
    for _ in 0..1000 {
        let mut load = random_load_state(&mut rng);
        if load.theta.abs() < 1e-3 {
            load.theta = 0.3;
        }
        let u = random_input(&mut rng, &params);
        let d = transformed_dynamics(&load, &u, &params).unwrap();
        let expected = params.gravity - d[2] * load.theta.cos() / load.theta.sin();
        assert!((d[3] - expected).abs() < 1e-10);
    }
    let load = TransformedState {
        theta: 0.3,
        ..TransformedState::rest(FlatOutput::new(0.1, 0.6))
    };
    let d = transformed_dynamics(&load, &Input::new(2.0, -0.08), &params).unwrap();
    assert!((d[3] - (params.gravity - d[2] / 0.3f64.tan())).abs() < 1e-10);
}

/// Input transformations commute with the Euler discretization: stepping the
/// triangular form with `(a_Lx, α_θ)` computed from `(F, M)` equals the Euler
/// step in `(F, M)`.
#[test]
fn euler_discretization_commutes_with_input_transformation() {
    let worst = commutation_deviation(5, 1000);
    assert!(worst < 1e-12, "max deviation {worst:e}");
}

#[test]
fn flatness_round_trip_on_random_rollouts() {
    let (state_err, input_err) = round_trip_errors(0.05, 6, 1000);
    assert!(state_err < 1e-9, "state error {state_err:e}");
    assert!(input_err < 1e-9, "input error {input_err:e}");
}

/// At 10 ms the input is a fourth difference over ts⁴ = 1e-8 s⁴; one ulp in a
/// window sample already moves F by about 2e-9 N.
#[test]
fn flatness_round_trip_at_ten_milliseconds() {
    let (state_err, input_err) = round_trip_errors(0.01, 8, 1000);
    assert!(state_err < 1e-9, "state error {state_err:e}");
    assert!(input_err < 1e-7, "input error {input_err:e}");
}

#[test]
fn parameterization_is_shift_compatible() {
    let params = CraneParams::default();
    let ts = 0.01;
    let mut rng = rng(7);
    let mut checked = 0;
    while checked < 200 {
        let x0 = random_load_state(&mut rng);
        let inputs: Vec<Input> = (0..5).map(|_| random_input(&mut rng, &params)).collect();
        let Some(states) = rollout(x0, &inputs, &params, ts) else { continue };
        let ys = positions(&states);
        let (x_k, u_k) = flat_parameterize(&FlatWindow::from_slice(&ys, 0).unwrap(), &params, ts).unwrap();
        let (x_next, _) = flat_parameterize(&FlatWindow::from_slice(&ys, 1).unwrap(), &params, ts).unwrap();
        let stepped = euler_step(&x_k, &u_k, &params, ts).unwrap();
        assert!(max_abs_diff(&stepped.to_array(), &x_next.to_array()) < 1e-9);
        checked += 1;
    }
}

proptest! {
    #[test]
    fn rest_windows_parameterize_to_holding_input(x in -2.0..2.0f64, y in 0.05..2.0f64, ts in 0.001..0.2f64) {
        let params = CraneParams::default();
        let (s, u) = flat_parameterize(&FlatWindow::constant(FlatOutput::new(x, y)), &params, ts).unwrap();
        prop_assert_eq!(s, TransformedState::rest(FlatOutput::new(x, y)));
        prop_assert!(u.force.abs() < 1e-12);
        prop_assert!((u.torque - params.holding_torque()).abs() < 1e-12);
    }

    #[test]
    fn transform_is_bijective(
        x_l in -2.0..2.0f64, y_l in 0.01..2.0f64, v_lx in -2.0..2.0f64,
        v_ly in -2.0..2.0f64, theta in -1.4..1.4f64, w in -3.0..3.0f64,
    ) {
        let params = CraneParams::default();
        let load = TransformedState { x_l, y_l, v_lx, v_ly, theta, omega_theta: w };
        let back = transform_to_load_coords(&inverse_transform(&load, &params).unwrap(), &params);
        prop_assert!(max_abs_diff(&back.to_array(), &load.to_array()) < 1e-12);
    }
}
