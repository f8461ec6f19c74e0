//! Discrete-time exact-linearization tracking controllers.
//!
//! Both laws work on the Euler model in load coordinates. They rebuild the
//! flat-output shifts `y, ..., y[3]` from what is measured (and, for the
//! dynamic law, the compensator state), extend the tracking error by the
//! prescribed linear recursion and feed the resulting window through
//! [`flat_parameterize`](crate::model::flat_parameterize).

mod dynamics;
mod feedback;
mod friction;

pub use dynamics::{
    pole_place, pole_place_real, pole_place_with_integral, pole_place_with_integral_real,
    ChannelDynamics, ErrorDynamicsSpec,
};
pub use feedback::{
    dynamic_feedback_step, quasi_static_feedback_step, DynamicControllerState, DynamicStep,
    QuasiStaticStep,
};
pub use friction::{desired_drive_velocities, friction_feedforward};

use crate::model::{FlatOutput, FlatWindow};

/// Reference samples `y_d(k), ..., y_d(k+4)`.
pub type ReferenceWindow = FlatWindow;

/// Accumulated tracking error per channel \[m·s\].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IntegralState {
    pub x_l: f64,
    pub y_l: f64,
}

impl IntegralState {
    pub fn update(self, error: FlatOutput, active: bool, ts: f64) -> Self {
        integral_update(self, error, active, ts)
    }
}

/// `e_I + ts·e` while active, unchanged otherwise.
pub fn integral_update(state: IntegralState, error: FlatOutput, active: bool, ts: f64) -> IntegralState {
    if !active {
        return state;
    }
    IntegralState {
        x_l: state.x_l + ts * error.x_l,
        y_l: state.y_l + ts * error.y_l,
    }
}

/// Integrator value handed to a control law together with its activation flag.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Integral {
    pub state: IntegralState,
    pub active: bool,
}

impl Integral {
    pub fn new(state: IntegralState, active: bool) -> Self {
        Self { state, active }
    }
}
