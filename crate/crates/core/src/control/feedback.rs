use crate::error::{Error, Result};
use crate::model::{flat_parameterize, FlatOutput, FlatWindow, Input, TransformedState, THETA_LIMIT};
use crate::params::CraneParams;

use super::{ErrorDynamicsSpec, Integral, ReferenceWindow};

/// Compensator state of the dynamic feedback: `y_L[2]` and `y_L[3]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicControllerState {
    pub z1: f64,
    pub z2: f64,
}

impl DynamicControllerState {
    /// Starts on the reference, `z1 = y_Ld(2)`, `z2 = y_Ld(3)`.
    pub fn from_reference(reference: &ReferenceWindow) -> Self {
        Self {
            z1: reference.0[2].y_l,
            z2: reference.0[3].y_l,
        }
    }

    /// Continues the measured vertical motion with zero acceleration. Equals
    /// [`from_reference`](Self::from_reference) when the crane rests on the
    /// reference, and stays consistent with a perturbed initial state.
    pub fn from_state(x: &TransformedState, ts: f64) -> Self {
        Self {
            z1: x.y_l + 2.0 * ts * x.v_ly,
            z2: x.y_l + 3.0 * ts * x.v_ly,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.z1.is_finite() && self.z2.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicStep {
    pub input: Input,
    pub next: DynamicControllerState,
    /// Flat-output window the input realizes; entry 4 is the new input `v`.
    pub window: FlatWindow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiStaticStep {
    pub input: Input,
    /// Window the input realizes: `x_L[4]` and `y_L[2]` are the new inputs,
    /// later `y_L` shifts are the predicted closed-loop samples.
    pub window: FlatWindow,
}

/// `x_L, ..., x_L[3]` of the Euler model from the state and `y_L, ..., y_L[3]`.
///
/// Rows `v_Lx⁺ = v_Lx + ts·a_x` with `a_x = (g - a_y)·tan θ` and `θ⁺ = θ + ts·ω`.
fn horizontal_shifts(x: &TransformedState, y: &[f64; 4], params: &CraneParams, ts: f64) -> Result<[f64; 4]> {
    let g = params.gravity;
    let theta1 = x.theta + ts * x.omega_theta;
    if theta1.abs() >= THETA_LIMIT {
        return Err(Error::Domain(format!("predicted angle {theta1} beyond the guard")));
    }
    let a_y0 = (y[2] - 2.0 * y[1] + y[0]) / (ts * ts);
    let a_y1 = (y[3] - 2.0 * y[2] + y[1]) / (ts * ts);
    let a_x0 = (g - a_y0) * x.theta.tan();
    let a_x1 = (g - a_y1) * theta1.tan();
    let v1 = x.v_lx + ts * a_x0;
    let v2 = v1 + ts * a_x1;
    let x1 = x.x_l + ts * x.v_lx;
    let x2 = x1 + ts * v1;
    Ok([x.x_l, x1, x2, x2 + ts * v2])
}

fn require_orders(spec: &ErrorDynamicsSpec, want: (usize, usize), law: &str) -> Result<()> {
    if spec.orders() != want {
        return Err(Error::InvalidDynamics(format!(
            "{law} needs orders {want:?}, got {:?}",
            spec.orders()
        )));
    }
    Ok(())
}

/// Closes the window from the shifts `y[0..4]` per channel, extending the
/// errors to index 4, and parameterizes the input.
fn close_window(
    xs: &[f64],
    ys: &[f64],
    reference: &ReferenceWindow,
    spec: &ErrorDynamicsSpec,
    params: &CraneParams,
    ts: f64,
    integral: Integral,
) -> Result<(FlatWindow, Input)> {
    let r = &reference.0;
    let ex: Vec<f64> = xs.iter().zip(r).map(|(y, d)| y - d.x_l).collect();
    let ey: Vec<f64> = ys.iter().zip(r).map(|(y, d)| y - d.y_l).collect();
    let ex = spec.x_l.extend_errors(&ex, integral.state.x_l, integral.active, ts, 5);
    let ey = spec.y_l.extend_errors(&ey, integral.state.y_l, integral.active, ts, 5);
    let window = FlatWindow::new(std::array::from_fn(|i| {
        FlatOutput::new(r[i].x_l + ex[i], r[i].y_l + ey[i])
    }));
    let (_, input) = flat_parameterize(&window, params, ts)?;
    Ok((window, input))
}

/// Linearizing endogenous dynamic feedback with closed-loop dynamics
/// `y[4] = v` per channel, `v` from the error recursion of order (4, 4).
pub fn dynamic_feedback_step(
    x: &TransformedState,
    z: &DynamicControllerState,
    reference: &ReferenceWindow,
    spec: &ErrorDynamicsSpec,
    params: &CraneParams,
    ts: f64,
    integral: Integral,
) -> Result<DynamicStep> {
    require_orders(spec, (4, 4), "dynamic feedback")?;
    x.validate()?;
    let ys = [x.y_l, x.y_l + ts * x.v_ly, z.z1, z.z2];
    let xs = horizontal_shifts(x, &ys, params, ts)?;
    let (window, input) = close_window(&xs, &ys, reference, spec, params, ts, integral)?;
    Ok(DynamicStep {
        input,
        next: DynamicControllerState {
            z1: z.z2,
            z2: window.0[4].y_l,
        },
        window,
    })
}

/// Linearizing quasi-static state feedback for the Brunovsky orders (4, 2).
///
/// The `y_L` channel is closed after two shifts, so `y_L[2..4]` follow from
/// the error recursion and its shifts. The triangular structure of the Euler
/// rows then gives `x_L[2]`, `x_L[3]` explicitly and no iteration is needed.
pub fn quasi_static_feedback_step(
    x: &TransformedState,
    reference: &ReferenceWindow,
    spec: &ErrorDynamicsSpec,
    params: &CraneParams,
    ts: f64,
    integral: Integral,
) -> Result<QuasiStaticStep> {
    require_orders(spec, (4, 2), "quasi-static feedback")?;
    x.validate()?;
    let r = &reference.0;
    let known = [x.y_l - r[0].y_l, x.y_l + ts * x.v_ly - r[1].y_l];
    let ey = spec.y_l.extend_errors(&known, integral.state.y_l, integral.active, ts, 5);
    let ys: [f64; 4] = std::array::from_fn(|i| r[i].y_l + ey[i]);
    let xs = horizontal_shifts(x, &ys, params, ts)?;
    // ys[0..2] are measured, the y channel recursion restarts from them
    let (window, input) = close_window(&xs, &ys[..2], reference, spec, params, ts, integral)?;
    Ok(QuasiStaticStep { input, window })
}
