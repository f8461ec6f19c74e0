#![allow(dead_code)]

use gantry_flat::control::*;
use gantry_flat::model::{euler_step, flat_parameterize, inverse_transform, FlatOutput, FlatWindow, Input, OriginalState, TransformedState};
use gantry_flat::params::CraneParams;
use nalgebra::{Complex, Matrix3, Vector3};
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_load_state(rng: &mut impl Rng) -> TransformedState {
    TransformedState {
        x_l: rng.random_range(-1.0..1.0),
        y_l: rng.random_range(0.3..1.2),
        v_lx: rng.random_range(-0.5..0.5),
        v_ly: rng.random_range(-0.3..0.3),
        theta: rng.random_range(-0.6..0.6),
        omega_theta: rng.random_range(-1.0..1.0),
    }
}

pub fn random_input(rng: &mut impl Rng, params: &CraneParams) -> Input {
    Input::new(
        rng.random_range(-5.0..5.0),
        params.holding_torque() + rng.random_range(-0.03..0.03),
    )
}

/// Left-hand sides minus right-hand sides of the three displayed equations of
/// motion, with the accelerations supplied by the caller.
pub fn motion_residual(
    s: &OriginalState,
    acc: [f64; 3],
    u: &Input,
    p: &CraneParams,
) -> [f64; 3] {
    let (m_t, m_l, j, r, g) = (p.trolley_mass, p.load_mass, p.drum_inertia, p.drum_radius, p.gravity);
    let (sn, cs) = s.theta.sin_cos();
    let [xdd, pdd, tdd] = acc;
    let (pd, td) = (s.omega_phi, s.omega_theta);
    [
        (m_t + m_l) * xdd - m_l * r * sn * pdd - m_l * r * s.phi * cs * tdd
            + m_l * td * (r * s.phi * td * sn - 2.0 * r * pd * cs)
            - u.force,
        -m_l * r * sn * xdd + (j + m_l * r * r) * pdd - m_l * r * (r * s.phi * td * td + g * cs)
            - u.torque,
        -cs * xdd + r * s.phi * tdd + 2.0 * r * pd * td + g * sn,
    ]
}

/// Accelerations of the equations of motion by a generic 3×3 linear solve.
pub fn motion_accelerations_lu(s: &OriginalState, u: &Input, p: &CraneParams) -> [f64; 3] {
    let (m_t, m_l, j, r, g) = (p.trolley_mass, p.load_mass, p.drum_inertia, p.drum_radius, p.gravity);
    let (sn, cs) = s.theta.sin_cos();
    let (pd, td) = (s.omega_phi, s.omega_theta);
    let mass = Matrix3::new(
        m_t + m_l, -m_l * r * sn, -m_l * r * s.phi * cs,
        -m_l * r * sn, j + m_l * r * r, 0.0,
        -cs, 0.0, r * s.phi,
    );
    let rhs = Vector3::new(
        u.force - m_l * td * (r * s.phi * td * sn - 2.0 * r * pd * cs),
        u.torque + m_l * r * (r * s.phi * td * td + g * cs),
        -2.0 * r * pd * td - g * sn,
    );
    let a = mass.lu().solve(&rhs).expect("regular mass matrix");
    [a[0], a[1], a[2]]
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn positions(states: &[TransformedState]) -> Vec<FlatOutput> {
    states.iter().map(TransformedState::position).collect()
}

/// Rest-to-rest degree-7 blend with vanishing derivatives 1..3 at both ends.
pub fn blend7(tau: f64) -> f64 {
    let t = tau.clamp(0.0, 1.0);
    t.powi(4) * (35.0 - 84.0 * t + 70.0 * t * t - 20.0 * t.powi(3))
}

/// Reference samples for `y0 -> y1` that start blending after `delay` samples,
/// padded to `len`.
pub fn blended_samples(y0: FlatOutput, y1: FlatOutput, duration: f64, ts: f64, delay: usize, len: usize) -> Vec<FlatOutput> {
    (0..len)
        .map(|k| {
            let t = (k as f64 - delay as f64) * ts;
            let s = blend7(t / duration);
            FlatOutput::new(y0.x_l + s * (y1.x_l - y0.x_l), y0.y_l + s * (y1.y_l - y0.y_l))
        })
        .collect()
}

pub fn benchmark_samples(ts: f64, len: usize) -> Vec<FlatOutput> {
    blended_samples(FlatOutput::new(0.2, 0.7), FlatOutput::new(1.0, 0.5), 1.7, ts, 3, len)
}

#[derive(Clone)]
pub enum Law {
    Dynamic(ErrorDynamicsSpec),
    QuasiStatic(ErrorDynamicsSpec),
}

impl Law {
    pub fn spec(&self) -> &ErrorDynamicsSpec {
        match self {
            Law::Dynamic(s) | Law::QuasiStatic(s) => s,
        }
    }
}

pub struct Run {
    pub states: Vec<TransformedState>,
    pub windows: Vec<FlatWindow>,
    pub integrals: Vec<IntegralState>,
}

/// Closed loop on the Euler model itself, integral active from step `integral_from`.
pub fn closed_loop(law: &Law, x0: TransformedState, refs: &[FlatOutput], ts: f64, steps: usize, integral_from: usize) -> Run {
    let params = CraneParams::default();
    let mut x = x0;
    let mut z = DynamicControllerState::from_state(&x0, ts);
    let mut e_i = IntegralState::default();
    let mut run = Run { states: vec![x], windows: vec![], integrals: vec![e_i] };
    for k in 0..steps {
        let reference = FlatWindow::from_slice(refs, k).unwrap();
        let integral = Integral::new(e_i, k >= integral_from);
        let (input, window) = match law {
            Law::Dynamic(spec) => {
                let step = dynamic_feedback_step(&x, &z, &reference, spec, &params, ts, integral).unwrap();
                z = step.next;
                (step.input, step.window)
            }
            Law::QuasiStatic(spec) => {
                let step = quasi_static_feedback_step(&x, &reference, spec, &params, ts, integral).unwrap();
                (step.input, step.window)
            }
        };
        let e = FlatOutput::new(x.x_l - refs[k].x_l, x.y_l - refs[k].y_l);
        e_i = integral_update(e_i, e, integral.active, ts);
        x = euler_step(&x, &input, &params, ts).unwrap();
        run.states.push(x);
        run.windows.push(window);
        run.integrals.push(e_i);
    }
    run
}

pub fn perturbed(y: FlatOutput, dx: f64, dy: f64, dtheta: f64) -> TransformedState {
    TransformedState {
        theta: dtheta,
        ..TransformedState::rest(FlatOutput::new(y.x_l + dx, y.y_l + dy))
    }
}

pub fn errors(run: &Run, refs: &[FlatOutput]) -> (Vec<f64>, Vec<f64>) {
    run.states
        .iter()
        .zip(refs)
        .map(|(s, r)| (s.x_l - r.x_l, s.y_l - r.y_l))
        .unzip()
}

/// Largest residual of `e[k+n] + Σ a_i e[k+i] + a_I e_I[k]` along the run.
pub fn recursion_residual(ch: &ChannelDynamics, e: &[f64], e_i: &[f64]) -> f64 {
    let n = ch.order();
    (0..e.len() - n)
        .map(|k| {
            let lin: f64 = ch.coeffs().iter().zip(&e[k..k + n]).map(|(a, v)| a * v).sum();
            (e[k + n] + lin + ch.integral_gain().unwrap_or(0.0) * e_i[k]).abs()
        })
        .fold(0.0, f64::max)
}

pub fn random_roots(rng: &mut impl rand::Rng, count: usize) -> Vec<Complex<f64>> {
    let mut roots = Vec::new();
    while roots.len() < count {
        if count - roots.len() >= 2 && rng.random_bool(0.5) {
            let z = Complex::from_polar(rng.random_range(0.0..0.9), rng.random_range(0.0..std::f64::consts::PI));
            roots.push(z);
            roots.push(z.conj());
        } else {
            roots.push(Complex::new(rng.random_range(-0.9..0.9), 0.0));
        }
    }
    roots
}

pub fn rollout(
    x0: TransformedState,
    inputs: &[Input],
    params: &CraneParams,
    ts: f64,
) -> Option<Vec<TransformedState>> {
    let mut states = vec![x0];
    for u in inputs {
        let next = euler_step(states.last().unwrap(), u, params, ts).ok()?;
        next.validate().ok()?;
        states.push(next);
    }
    Some(states)
}

pub fn round_trip_errors(ts: f64, seed: u64, count: usize) -> (f64, f64) {
    let params = CraneParams::default();
    let mut rng = rng(seed);
    let mut done = 0;
    let (mut state_err, mut input_err): (f64, f64) = (0.0, 0.0);
    while done < count {
        let x0 = random_load_state(&mut rng);
        let inputs: Vec<Input> = (0..4).map(|_| random_input(&mut rng, &params)).collect();
        let Some(states) = rollout(x0, &inputs, &params, ts) else { continue };
        let window = FlatWindow::from_slice(&positions(&states), 0).unwrap();
        let (x, u) = flat_parameterize(&window, &params, ts).unwrap();
        state_err = state_err.max(max_abs_diff(&x.to_array(), &x0.to_array()));
        input_err = input_err
            .max((u.force - inputs[0].force).abs())
            .max((u.torque - inputs[0].torque).abs());
        done += 1;
    }
    (state_err, input_err)
}

/// Largest gap between Euler-stepping the triangular form in `(a_Lx, α_θ)`
/// obtained from `(F, M)` and the Euler step taken directly in `(F, M)`.
pub fn commutation_deviation(seed: u64, count: usize) -> f64 {
    let params = CraneParams::default();
    let g = params.gravity;
    let mut rng = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let mut load = random_load_state(&mut rng);
        if load.theta.abs() < 0.05 {
            load.theta = 0.05f64.copysign(load.theta);
        }
        let u = random_input(&mut rng, &params);
        let ts = 0.01;
        // input transformation through the generic 3×3 solve
        let drive = inverse_transform(&load, &params).unwrap();
        let [xdd, pdd, tdd] = motion_accelerations_lu(&drive, &u, &params);
        let r = params.drum_radius;
        let (s, c) = drive.theta.sin_cos();
        let rope = r * drive.phi;
        let rate = r * drive.omega_phi;
        let w = drive.omega_theta;
        let a_lx = xdd - r * pdd * s - 2.0 * rate * c * w - rope * c * tdd + rope * s * w * w;
        let alpha = tdd;
        let tri = [
            load.x_l + ts * load.v_lx,
            load.y_l + ts * load.v_ly,
            load.v_lx + ts * a_lx,
            load.v_ly + ts * (g - a_lx / load.theta.tan()),
            load.theta + ts * load.omega_theta,
            load.omega_theta + ts * alpha,
        ];
        let euler = euler_step(&load, &u, &params, ts).unwrap().to_array();
        worst = worst.max(max_abs_diff(&tri, &euler));
    }
    worst
}
