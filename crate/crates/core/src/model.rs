//! Gantry crane dynamics in the drive chart and in the load chart, the Euler
//! sampled-data model and its discrete parameterizing map.
//!
//! The drive chart `(x_T, φ, θ, v_T, ω_φ, ω_θ)` is the natural one for
//! simulation. The load chart `(x_L, y_L, v_Lx, v_Ly, θ, ω_θ)` contains the
//! flat output (the load position) and its velocity; Euler-discretizing the
//! dynamics in this chart gives a forward-flat sampled-data model, which is
//! what every discrete controller in this crate is built on.
//!
//! Both inputs act on the load through two affine quantities: the rope
//! tension per unit load mass `K` and the pendulum angular acceleration
//! `α_θ`. The load acceleration is `(K·sinθ, g - K·cosθ)`, which is the
//! pendulum constraint `a_Ly = g - a_Lx / tanθ`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::params::CraneParams;

/// Largest admissible pendulum angle magnitude.
pub const THETA_LIMIT: f64 = FRAC_PI_2 * (1.0 - 1.0e-6);
/// Smallest admissible load depth below the trolley \[m\].
pub const MIN_DEPTH: f64 = 1.0e-4;

/// Crane state in drive coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OriginalState {
    pub x_t: f64,
    pub phi: f64,
    pub theta: f64,
    pub v_t: f64,
    pub omega_phi: f64,
    pub omega_theta: f64,
}

/// Crane state in load coordinates. `y_l` points down.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TransformedState {
    pub x_l: f64,
    pub y_l: f64,
    pub v_lx: f64,
    pub v_ly: f64,
    pub theta: f64,
    pub omega_theta: f64,
}

/// Trolley force \[N\] and drum torque \[N·m\].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Input {
    pub force: f64,
    pub torque: f64,
}

impl Input {
    pub const fn new(force: f64, torque: f64) -> Self {
        Self { force, torque }
    }
}

impl std::ops::Add for Input {
    type Output = Input;

    fn add(self, rhs: Input) -> Input {
        Input::new(self.force + rhs.force, self.torque + rhs.torque)
    }
}

/// One sample of the flat output, the load position.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FlatOutput {
    pub x_l: f64,
    pub y_l: f64,
}

impl FlatOutput {
    pub const fn new(x_l: f64, y_l: f64) -> Self {
        Self { x_l, y_l }
    }

    pub fn distance(&self, other: &FlatOutput) -> f64 {
        (self.x_l - other.x_l).hypot(self.y_l - other.y_l)
    }
}

macro_rules! six_vector {
    ($ty:ident { $($field:ident),* }) => {
        impl $ty {
            pub fn to_array(&self) -> [f64; 6] {
                [$(self.$field),*]
            }

            pub fn from_array(a: [f64; 6]) -> Self {
                let [$($field),*] = a;
                Self { $($field),* }
            }

            pub fn is_finite(&self) -> bool {
                self.to_array().iter().all(|v| v.is_finite())
            }
        }
    };
}

six_vector!(OriginalState { x_t, phi, theta, v_t, omega_phi, omega_theta });
six_vector!(TransformedState { x_l, y_l, v_lx, v_ly, theta, omega_theta });

fn check_angle(theta: f64, what: &str) -> Result<()> {
    if theta.is_finite() && theta.abs() < THETA_LIMIT {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{what}: pendulum angle {theta} outside (-{THETA_LIMIT}, {THETA_LIMIT})"
        )))
    }
}

fn check_depth(depth: f64, what: &str) -> Result<()> {
    if depth.is_finite() && depth > MIN_DEPTH {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{what}: load depth {depth} m not above {MIN_DEPTH} m"
        )))
    }
}

impl OriginalState {
    pub fn rope_length(&self, params: &CraneParams) -> f64 {
        params.drum_radius * self.phi
    }

    pub fn validate(&self, params: &CraneParams) -> Result<()> {
        if !self.is_finite() {
            return Err(Error::Domain(format!("non-finite state {self:?}")));
        }
        check_angle(self.theta, "drive state")?;
        check_depth(self.rope_length(params), "drive state rope length")
    }
}

impl TransformedState {
    /// Load hanging at rest at `position`.
    pub fn rest(position: FlatOutput) -> Self {
        Self {
            x_l: position.x_l,
            y_l: position.y_l,
            ..Self::default()
        }
    }

    pub fn position(&self) -> FlatOutput {
        FlatOutput::new(self.x_l, self.y_l)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.is_finite() {
            return Err(Error::Domain(format!("non-finite state {self:?}")));
        }
        check_angle(self.theta, "load state")?;
        check_depth(self.y_l, "load state")
    }
}

/// Affine dependence of `(K, α_θ)` on `(F, M)` at a fixed state.
///
/// `K` is the rope tension divided by the load mass.
#[derive(Debug, Clone, Copy)]
struct InputMap {
    tension: [f64; 3],
    angular: [f64; 3],
    sin: f64,
    cos: f64,
    trolley_accel: [f64; 3],
}

impl InputMap {
    /// `rope` and `rope_rate` are the rope length and its time derivative.
    fn new(theta: f64, omega: f64, rope: f64, rope_rate: f64, p: &CraneParams) -> Self {
        let (s, c) = theta.sin_cos();
        let (m_t, m_l, j, r, g) = (
            p.trolley_mass,
            p.load_mass,
            p.drum_inertia,
            p.drum_radius,
            p.gravity,
        );
        let den = j * m_t + j * m_l * s * s + r * r * m_l * m_t;
        // K = kF·F + kM·M + k0
        let tension = [
            j * s / den,
            -r * m_t / den,
            j * m_t * (rope * omega * omega + g * c) / den,
        ];
        // trolley: m_T·ẍ_T = F - m_L·K·sinθ
        let trolley_accel = [
            (1.0 - m_l * s * tension[0]) / m_t,
            -m_l * s * tension[1] / m_t,
            -m_l * s * tension[2] / m_t,
        ];
        // pendulum: l·θ̈ = cosθ·ẍ_T - 2·l̇·θ̇ - g·sinθ
        let angular = [
            c * trolley_accel[0] / rope,
            c * trolley_accel[1] / rope,
            (c * trolley_accel[2] - 2.0 * rope_rate * omega - g * s) / rope,
        ];
        Self {
            tension,
            angular,
            sin: s,
            cos: c,
            trolley_accel,
        }
    }

    fn tension(&self, u: &Input) -> f64 {
        self.tension[0] * u.force + self.tension[1] * u.torque + self.tension[2]
    }

    fn angular(&self, u: &Input) -> f64 {
        self.angular[0] * u.force + self.angular[1] * u.torque + self.angular[2]
    }

    fn trolley_accel(&self, u: &Input) -> f64 {
        self.trolley_accel[0] * u.force + self.trolley_accel[1] * u.torque + self.trolley_accel[2]
    }

    /// Inputs that produce the requested tension and angular acceleration.
    fn solve(&self, tension: f64, angular: f64) -> Result<Input> {
        let [a, b, k0] = self.tension;
        let [c, d, w0] = self.angular;
        let det = a * d - b * c;
        let scale = (a.abs() + b.abs()) * (c.abs() + d.abs());
        if !(det.abs() > 1e-14 * scale) || !det.is_finite() {
            return Err(Error::Singular {
                context: "input map",
                detail: format!("(K, alpha) -> (F, M) determinant {det:e}"),
            });
        }
        let rhs0 = tension - k0;
        let rhs1 = angular - w0;
        Ok(Input::new(
            (d * rhs0 - b * rhs1) / det,
            (a * rhs1 - c * rhs0) / det,
        ))
    }
}

/// Accelerations `(ẍ_T, φ̈, θ̈)` of the equations of motion.
fn drive_accelerations(
    state: &OriginalState,
    input: &Input,
    params: &CraneParams,
) -> Result<[f64; 3]> {
    state.validate(params)?;
    let r = params.drum_radius;
    let rope = state.rope_length(params);
    let map = InputMap::new(state.theta, state.omega_theta, rope, r * state.omega_phi, params);
    let tension = map.tension(input);
    let trolley = map.trolley_accel(input);
    // drum: J·φ̈ = M + R·m_L·K
    let drum = (input.torque + r * params.load_mass * tension) / params.drum_inertia;
    let angular = map.angular(input);
    let out = [trolley, drum, angular];
    if out.iter().all(|v| v.is_finite()) {
        Ok(out)
    } else {
        Err(Error::Singular {
            context: "equations of motion",
            detail: format!("non-finite accelerations at {state:?}"),
        })
    }
}

/// Time derivative of the drive-coordinate state under `input`.
pub fn continuous_dynamics(
    state: &OriginalState,
    input: &Input,
    params: &CraneParams,
) -> Result<[f64; 6]> {
    let [a_t, a_phi, a_theta] = drive_accelerations(state, input, params)?;
    Ok([
        state.v_t,
        state.omega_phi,
        state.omega_theta,
        a_t,
        a_phi,
        a_theta,
    ])
}

/// Drive coordinates to load coordinates.
pub fn transform_to_load_coords(state: &OriginalState, params: &CraneParams) -> TransformedState {
    let r = params.drum_radius;
    let (s, c) = state.theta.sin_cos();
    let rope = r * state.phi;
    TransformedState {
        x_l: state.x_t - rope * s,
        y_l: rope * c,
        v_lx: state.v_t - state.omega_phi * r * s - state.omega_theta * rope * c,
        v_ly: r * (state.omega_phi * c - s * state.phi * state.omega_theta),
        theta: state.theta,
        omega_theta: state.omega_theta,
    }
}

/// Rope length and rope rate in load coordinates.
fn rope_in_load_coords(state: &TransformedState) -> (f64, f64) {
    let (s, c) = state.theta.sin_cos();
    let rope = state.y_l / c;
    let rate = (state.v_ly + rope * s * state.omega_theta) / c;
    (rope, rate)
}

/// Load coordinates back to drive coordinates.
pub fn inverse_transform(state: &TransformedState, params: &CraneParams) -> Result<OriginalState> {
    state.validate()?;
    let (s, c) = state.theta.sin_cos();
    if c <= 0.0 {
        return Err(Error::Domain(format!("cos(theta) = {c} not positive")));
    }
    let (rope, rate) = rope_in_load_coords(state);
    let r = params.drum_radius;
    Ok(OriginalState {
        x_t: state.x_l + rope * s,
        phi: rope / r,
        theta: state.theta,
        v_t: state.v_lx + rate * s + rope * c * state.omega_theta,
        omega_phi: rate / r,
        omega_theta: state.omega_theta,
    })
}

fn load_input_map(state: &TransformedState, params: &CraneParams) -> Result<InputMap> {
    state.validate()?;
    let (rope, rate) = rope_in_load_coords(state);
    Ok(InputMap::new(state.theta, state.omega_theta, rope, rate, params))
}

/// Time derivative of the load-coordinate state,
/// `(v_Lx, v_Ly, a_Lx, a_Ly, ω_θ, α_θ)`.
pub fn transformed_dynamics(
    state: &TransformedState,
    input: &Input,
    params: &CraneParams,
) -> Result<[f64; 6]> {
    let map = load_input_map(state, params)?;
    let tension = map.tension(input);
    let out = [
        state.v_lx,
        state.v_ly,
        tension * map.sin,
        params.gravity - tension * map.cos,
        state.omega_theta,
        map.angular(input),
    ];
    if out.iter().all(|v| v.is_finite()) {
        Ok(out)
    } else {
        Err(Error::Singular {
            context: "load-coordinate dynamics",
            detail: format!("non-finite derivative at {state:?}"),
        })
    }
}

/// Input that realizes the tension per unit load mass `tension` and the
/// pendulum angular acceleration `angular` at `state`.
pub fn input_for_tension(
    state: &TransformedState,
    tension: f64,
    angular: f64,
    params: &CraneParams,
) -> Result<Input> {
    load_input_map(state, params)?.solve(tension, angular)
}

/// Load acceleration `(a_Lx, a_Ly)` produced by `input` at `state`.
pub fn load_acceleration(
    state: &TransformedState,
    input: &Input,
    params: &CraneParams,
) -> Result<(f64, f64)> {
    let d = transformed_dynamics(state, input, params)?;
    Ok((d[2], d[3]))
}

/// One step of the Euler sampled-data model in load coordinates.
pub fn euler_step(
    state: &TransformedState,
    input: &Input,
    params: &CraneParams,
    ts: f64,
) -> Result<TransformedState> {
    if !(ts > 0.0 && ts.is_finite()) {
        return Err(Error::Domain(format!("sampling time {ts} must be positive")));
    }
    let d = transformed_dynamics(state, input, params)?;
    let x = state.to_array();
    Ok(TransformedState::from_array(std::array::from_fn(|i| {
        x[i] + ts * d[i]
    })))
}

/// Five consecutive flat-output samples `y(k), ..., y(k+4)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatWindow(pub [FlatOutput; 5]);

impl FlatWindow {
    pub fn new(samples: [FlatOutput; 5]) -> Self {
        Self(samples)
    }

    /// Window taken from `samples[start..start + 5]`.
    pub fn from_slice(samples: &[FlatOutput], start: usize) -> Option<Self> {
        let s = samples.get(start..start + 5)?;
        Some(Self([s[0], s[1], s[2], s[3], s[4]]))
    }

    pub fn constant(y: FlatOutput) -> Self {
        Self([y; 5])
    }

    pub fn samples(&self) -> &[FlatOutput; 5] {
        &self.0
    }

    /// Discrete load accelerations `(a_x(k+i), a_y(k+i))` for `i = 0, 1, 2`.
    pub fn accelerations(&self, ts: f64) -> [(f64, f64); 3] {
        let y = &self.0;
        let h2 = ts * ts;
        std::array::from_fn(|i| {
            (
                (y[i + 2].x_l - 2.0 * y[i + 1].x_l + y[i].x_l) / h2,
                (y[i + 2].y_l - 2.0 * y[i + 1].y_l + y[i].y_l) / h2,
            )
        })
    }
}

/// Pendulum angle and tension per unit mass that realise a load acceleration.
fn angle_from_acceleration(a_x: f64, a_y: f64, gravity: f64) -> Result<(f64, f64)> {
    let vertical = gravity - a_y;
    let tension = a_x.hypot(vertical);
    if !(tension > 1e-12 * gravity) {
        return Err(Error::Singular {
            context: "angle reconstruction",
            detail: format!("free fall: a_x = {a_x}, g - a_y = {vertical}"),
        });
    }
    let theta = a_x.atan2(vertical);
    check_angle(theta, "reconstructed angle")?;
    Ok((theta, tension))
}

/// The discrete parameterizing map: the unique state and input of the Euler
/// sampled-data model whose flat output emits `window` over the next five
/// sampling instants.
pub fn flat_parameterize(
    window: &FlatWindow,
    params: &CraneParams,
    ts: f64,
) -> Result<(TransformedState, Input)> {
    if !(ts > 0.0 && ts.is_finite()) {
        return Err(Error::Domain(format!("sampling time {ts} must be positive")));
    }
    let y = window.samples();
    let acc = window.accelerations(ts);
    let mut theta = [0.0; 3];
    let mut tension = 0.0;
    for (i, (a_x, a_y)) in acc.iter().enumerate() {
        let (t, k) = angle_from_acceleration(*a_x, *a_y, params.gravity)?;
        theta[i] = t;
        if i == 0 {
            tension = k;
        }
    }
    let omega0 = (theta[1] - theta[0]) / ts;
    let omega1 = (theta[2] - theta[1]) / ts;
    let state = TransformedState {
        x_l: y[0].x_l,
        y_l: y[0].y_l,
        v_lx: (y[1].x_l - y[0].x_l) / ts,
        v_ly: (y[1].y_l - y[0].y_l) / ts,
        theta: theta[0],
        omega_theta: omega0,
    };
    let map = load_input_map(&state, params)?;
    let input = map.solve(tension, (omega1 - omega0) / ts)?;
    Ok((state, input))
}
