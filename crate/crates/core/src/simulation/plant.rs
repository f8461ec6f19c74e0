use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{continuous_dynamics, euler_step, inverse_transform, transform_to_load_coords, Input, OriginalState};
use crate::params::CraneParams;

/// Largest state magnitude before a run counts as diverged.
pub const STATE_BOUND: f64 = 1e6;

/// Substeps per sampling interval at 10 ms; scaled with the sampling time.
pub const SUBSTEPS_AT_10MS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    /// Classical Runge-Kutta on the drive-coordinate equations of motion.
    #[default]
    Rk4,
    /// One step of the Euler sampled-data model per sampling interval.
    Euler,
}

/// Simulated crane: equations of motion plus friction and a constant disturbance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantModel {
    pub params: CraneParams,
    pub friction_enabled: bool,
    /// Velocity scale of the smooth Coulomb friction \[m/s or rad/s\].
    pub friction_eps: f64,
    /// Constant force and torque added to the applied input.
    pub disturbance: Input,
    pub substeps: usize,
    pub integrator: Integrator,
}

impl PlantModel {
    pub fn new(params: CraneParams, ts: f64) -> Self {
        Self {
            params,
            friction_enabled: false,
            friction_eps: 1e-3,
            disturbance: Input::default(),
            substeps: default_substeps(ts),
            integrator: Integrator::Rk4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.substeps == 0 {
            return Err(Error::Config("substeps must be at least 1".into()));
        }
        if !(self.friction_eps > 0.0 && self.friction_eps.is_finite()) {
            return Err(Error::Config(format!("friction_eps {} must be positive", self.friction_eps)));
        }
        if !(self.disturbance.force.is_finite() && self.disturbance.torque.is_finite()) {
            return Err(Error::Config("disturbance must be finite".into()));
        }
        Ok(())
    }

    /// Input that actually acts on the mechanics.
    fn effective_input(&self, x: &OriginalState, u: &Input) -> Input {
        let mut eff = *u + self.disturbance;
        if self.friction_enabled {
            let p = &self.params;
            eff.force -= p.trolley_friction.smooth(x.v_t, self.friction_eps);
            eff.torque -= p.drum_friction.smooth(x.omega_phi, self.friction_eps);
        }
        eff
    }

    pub fn derivative(&self, x: &OriginalState, u: &Input) -> Result<[f64; 6]> {
        continuous_dynamics(x, &self.effective_input(x, u), &self.params)
    }

    /// Advances the plant by `ts` with `u` held constant.
    pub fn step(&self, x: &OriginalState, u: &Input, ts: f64) -> Result<OriginalState> {
        match self.integrator {
            Integrator::Rk4 => {
                let h = ts / self.substeps as f64;
                let mut state = *x;
                for _ in 0..self.substeps {
                    state = self.rk4(&state, u, h)?;
                }
                Ok(state)
            }
            Integrator::Euler => {
                let load = transform_to_load_coords(x, &self.params);
                let next = euler_step(&load, &self.effective_input(x, u), &self.params, ts)?;
                inverse_transform(&next, &self.params)
            }
        }
    }

    fn rk4(&self, x: &OriginalState, u: &Input, h: f64) -> Result<OriginalState> {
        let x0 = x.to_array();
        let at = |d: &[f64; 6], c: f64| OriginalState::from_array(std::array::from_fn(|i| x0[i] + c * d[i]));
        let k1 = self.derivative(x, u)?;
        let k2 = self.derivative(&at(&k1, 0.5 * h), u)?;
        let k3 = self.derivative(&at(&k2, 0.5 * h), u)?;
        let k4 = self.derivative(&at(&k3, h), u)?;
        Ok(OriginalState::from_array(std::array::from_fn(|i| {
            x0[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        })))
    }

    /// Kinetic plus potential energy, with the potential zero at the trolley rail.
    pub fn energy(&self, x: &OriginalState) -> f64 {
        let p = &self.params;
        let load = transform_to_load_coords(x, p);
        0.5 * p.trolley_mass * x.v_t * x.v_t
            + 0.5 * p.drum_inertia * x.omega_phi * x.omega_phi
            + 0.5 * p.load_mass * (load.v_lx * load.v_lx + load.v_ly * load.v_ly)
            - p.load_mass * p.gravity * load.y_l
    }
}

/// [`SUBSTEPS_AT_10MS`] scaled proportionally to `ts`, at least one.
pub fn default_substeps(ts: f64) -> usize {
    ((SUBSTEPS_AT_10MS as f64 * ts / 0.01).round() as usize).max(1)
}

/// Valid domain of the plant, with a bound on every state magnitude.
pub fn check_state(x: &OriginalState, params: &CraneParams) -> Result<()> {
    x.validate(params)?;
    if let Some(v) = x.to_array().iter().find(|v| v.abs() > STATE_BOUND) {
        return Err(Error::Domain(format!("state component {v} exceeds {STATE_BOUND}")));
    }
    transform_to_load_coords(x, params).validate()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rest(params: &CraneParams) -> OriginalState {
        OriginalState {
            x_t: 0.2,
            phi: 0.7 / params.drum_radius,
            ..Default::default()
        }
    }

    #[test]
    fn substeps_scale_with_ts() {
        assert_eq!(default_substeps(0.01), 20);
        assert_eq!(default_substeps(0.08), 160);
        assert_eq!(default_substeps(0.001), 2);
        assert_eq!(default_substeps(1e-5), 1);
    }

    #[test]
    fn rest_is_a_fixed_point() {
        let params = CraneParams::default();
        let plant = PlantModel::new(params, 0.01);
        let x = rest(&params);
        let next = plant.step(&x, &params.rest_input(), 0.01).unwrap();
        for (a, b) in next.to_array().iter().zip(x.to_array()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn disturbance_pushes_the_trolley() {
        let params = CraneParams::default();
        let mut plant = PlantModel::new(params, 0.01);
        plant.disturbance = Input::new(0.5, 0.0);
        let next = plant.step(&rest(&params), &params.rest_input(), 0.01).unwrap();
        assert!(next.v_t > 0.0);
    }

    #[test]
    fn friction_opposes_motion() {
        let mut params = CraneParams::default();
        params.trolley_friction = crate::params::DriveFriction::symmetric(1.0, 0.5);
        let mut plant = PlantModel::new(params, 0.01);
        plant.friction_enabled = true;
        let x = OriginalState { v_t: 0.3, ..rest(&params) };
        let with = plant.derivative(&x, &params.rest_input()).unwrap();
        plant.friction_enabled = false;
        let without = plant.derivative(&x, &params.rest_input()).unwrap();
        assert!(with[3] < without[3]);
    }
}
