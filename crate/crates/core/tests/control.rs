mod common;

use common::*;
use gantry_flat::control::*;
use gantry_flat::model::{FlatOutput, FlatWindow, TransformedState};
use gantry_flat::params::CraneParams;
use proptest::prelude::*;
use rand::RngExt;

#[test]
fn dynamic_deadbeat_zeroes_error_after_four_steps() {
    let ts = 0.05;
    let refs = benchmark_samples(ts, 60);
    let law = Law::Dynamic(ErrorDynamicsSpec::deadbeat(4, 4));
    let run = closed_loop(&law, perturbed(refs[0], 1e-3, -1e-3, 0.01), &refs, ts, 50, usize::MAX);
    let (ex, ey) = errors(&run, &refs);
    assert!(ex[3].abs() > 1e-6, "x error vanished early: {ex:?}");
    for k in 4..ex.len() {
        assert!(ex[k].abs() < 1e-9 && ey[k].abs() < 1e-9, "k={k}: {} {}", ex[k], ey[k]);
    }
}

#[test]
fn quasi_static_deadbeat_zeroes_error_after_four_and_two_steps() {
    let ts = 0.05;
    let refs = benchmark_samples(ts, 60);
    let law = Law::QuasiStatic(ErrorDynamicsSpec::deadbeat(4, 2));
    let run = closed_loop(&law, perturbed(refs[0], 1e-3, -1e-3, 0.01), &refs, ts, 50, usize::MAX);
    let (ex, ey) = errors(&run, &refs);
    assert!(ex[3].abs() > 1e-6);
    assert!(ey[1].abs() > 1e-6);
    for k in 4..ex.len() {
        assert!(ex[k].abs() < 1e-9, "x error at {k}: {}", ex[k]);
    }
    for k in 2..ey.len() {
        assert!(ey[k].abs() < 1e-9, "y error at {k}: {}", ey[k]);
    }
}

#[test]
fn error_recursion_holds_for_half_poles() {
    let ts = 0.01;
    let refs = benchmark_samples(ts, 60);
    for law in [
        Law::Dynamic(ErrorDynamicsSpec::uniform(0.5, 4, 4).unwrap()),
        Law::QuasiStatic(ErrorDynamicsSpec::uniform(0.5, 4, 2).unwrap()),
    ] {
        let run = closed_loop(&law, perturbed(refs[0], 2e-4, 1e-4, 0.002), &refs, ts, 50, usize::MAX);
        let (ex, ey) = errors(&run, &refs);
        let zeros = vec![0.0; ex.len()];
        assert!(recursion_residual(&law.spec().x_l, &ex, &zeros) < 1e-9);
        assert!(recursion_residual(&law.spec().y_l, &ey, &zeros) < 1e-9);
    }
}

#[test]
fn error_recursion_holds_for_random_stable_poles() {
    let ts = 0.01;
    let refs = benchmark_samples(ts, 60);
    let mut rng = rng(21);
    for _ in 0..20 {
        let dynamic = ErrorDynamicsSpec::new(
            pole_place(&random_roots(&mut rng, 4)).unwrap(),
            pole_place(&random_roots(&mut rng, 4)).unwrap(),
        );
        let quasi = ErrorDynamicsSpec::new(
            pole_place(&random_roots(&mut rng, 4)).unwrap(),
            pole_place(&random_roots(&mut rng, 2)).unwrap(),
        );
        for law in [Law::Dynamic(dynamic.clone()), Law::QuasiStatic(quasi.clone())] {
            let run = closed_loop(&law, perturbed(refs[0], 1e-5, -1e-5, 1e-4), &refs, ts, 50, usize::MAX);
            let (ex, ey) = errors(&run, &refs);
            let zeros = vec![0.0; ex.len()];
            let rx = recursion_residual(&law.spec().x_l, &ex, &zeros);
            let ry = recursion_residual(&law.spec().y_l, &ey, &zeros);
            assert!(rx < 1e-9 && ry < 1e-9, "{rx:e} {ry:e} for {:?}", law.spec());
        }
    }
}

#[test]
fn extended_recursion_holds_with_integral() {
    let ts = 0.01;
    let refs = benchmark_samples(ts, 100);
    let x = pole_place_with_integral_real(&[0.7, 0.75, 0.8, 0.85, 0.9], ts).unwrap();
    let y4 = pole_place_with_integral_real(&[0.7, 0.75, 0.8, 0.85, 0.9], ts).unwrap();
    let y2 = pole_place_with_integral_real(&[0.7, 0.8, 0.9], ts).unwrap();
    for law in [
        Law::Dynamic(ErrorDynamicsSpec::new(x.clone(), y4)),
        Law::QuasiStatic(ErrorDynamicsSpec::new(x.clone(), y2)),
    ] {
        let run = closed_loop(&law, perturbed(refs[0], 1e-3, 1e-3, 0.0), &refs, ts, 80, 0);
        let (ex, ey) = errors(&run, &refs);
        let ix: Vec<f64> = run.integrals.iter().map(|i| i.x_l).collect();
        let iy: Vec<f64> = run.integrals.iter().map(|i| i.y_l).collect();
        assert!(recursion_residual(&law.spec().x_l, &ex, &ix) < 1e-9);
        assert!(recursion_residual(&law.spec().y_l, &ey, &iy) < 1e-9);
    }
}

#[test]
fn dynamic_feedback_linearizes_to_fourth_shift() {
    let ts = 0.01;
    let refs = benchmark_samples(ts, 210);
    let law = Law::Dynamic(ErrorDynamicsSpec::uniform(0.5, 4, 4).unwrap());
    let run = closed_loop(&law, perturbed(refs[0], 2e-3, -1e-3, 0.01), &refs, ts, 200, usize::MAX);
    for k in 0..run.windows.len() - 4 {
        let v = run.windows[k].0[4];
        let y = run.states[k + 4].position();
        assert!(v.distance(&y) < 1e-9, "k={k}: v={v:?} y[4]={y:?}");
    }
}

#[test]
fn quasi_static_feedback_linearizes_to_four_and_two_shifts() {
    let ts = 0.01;
    let refs = benchmark_samples(ts, 210);
    let law = Law::QuasiStatic(ErrorDynamicsSpec::uniform(0.5, 4, 2).unwrap());
    let run = closed_loop(&law, perturbed(refs[0], 2e-3, -1e-3, 0.01), &refs, ts, 200, usize::MAX);
    for k in 0..run.windows.len() - 4 {
        let vx = run.windows[k].0[4].x_l;
        assert!((vx - run.states[k + 4].x_l).abs() < 1e-9, "x channel at {k}");
        let vy = run.windows[k].0[2].y_l;
        assert!((vy - run.states[k + 2].y_l).abs() < 1e-9, "y channel at {k}");
    }
}

#[test]
fn both_laws_agree_on_the_benchmark() {
    let ts = 0.01;
    let refs = benchmark_samples(ts, 230);
    let x0 = perturbed(refs[0], 1e-3, 1e-3, 0.0);
    let dynamic = closed_loop(&Law::Dynamic(ErrorDynamicsSpec::uniform(0.5, 4, 4).unwrap()), x0, &refs, ts, 220, usize::MAX);
    let quasi = closed_loop(&Law::QuasiStatic(ErrorDynamicsSpec::uniform(0.5, 4, 2).unwrap()), x0, &refs, ts, 220, usize::MAX);
    let worst = dynamic
        .states
        .iter()
        .zip(&quasi.states)
        .map(|(a, b)| a.position().distance(&b.position()))
        .fold(0.0, f64::max);
    assert!(worst < 1e-3, "paths differ by {worst}");
}

#[test]
fn quasi_static_step_is_pure() {
    let params = CraneParams::default();
    let ts = 0.01;
    let refs = benchmark_samples(ts, 120);
    let spec = ErrorDynamicsSpec::uniform(0.5, 4, 2).unwrap();
    let mut rng = rng(22);
    for k in (0..100).step_by(7) {
        let x = TransformedState {
            theta: rng.random_range(-0.1..0.1),
            omega_theta: rng.random_range(-0.2..0.2),
            ..perturbed(refs[k], 1e-3, 1e-3, 0.0)
        };
        let w = FlatWindow::from_slice(&refs, k).unwrap();
        let a = quasi_static_feedback_step(&x, &w, &spec, &params, ts, Integral::default()).unwrap();
        let b = quasi_static_feedback_step(&x, &w, &spec, &params, ts, Integral::default()).unwrap();
        assert_eq!(a.input.force.to_bits(), b.input.force.to_bits());
        assert_eq!(a.input.torque.to_bits(), b.input.torque.to_bits());
    }
}

#[test]
fn integral_update_examples() {
    let s = integral_update(IntegralState::default(), FlatOutput::new(0.01, 0.0), true, 0.01);
    assert!((s.x_l - 1e-4).abs() < 1e-18);
    let frozen = integral_update(s, FlatOutput::new(5.0, 5.0), false, 0.01);
    assert_eq!(frozen, s);
}

proptest! {
    #[test]
    fn companion_eigenvalues_match_requested_roots(seed in 0u64..1000, order in 1usize..7) {
        let mut rng = rng(seed);
        let roots = random_roots(&mut rng, order);
        let ch = pole_place(&roots).unwrap();
        let mut got = ch.eigenvalues(1.0);
        // greedy matching, each requested root to its nearest unused eigenvalue
        for r in &roots {
            let (i, d) = got
                .iter()
                .enumerate()
                .map(|(i, z)| (i, (z - r).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            prop_assert!(d < 1e-10 || roots.iter().filter(|q| (*q - r).norm() < 1e-3).count() > 1, "root {r} off by {d}");
            got.remove(i);
        }
    }

    #[test]
    fn integral_freezes_while_inactive(x in -1.0..1.0f64, y in -1.0..1.0f64, ex in -1.0..1.0f64, ey in -1.0..1.0f64) {
        let s = IntegralState { x_l: x, y_l: y };
        prop_assert_eq!(integral_update(s, FlatOutput::new(ex, ey), false, 0.01), s);
    }
}
