//! Sampled-data closed loop: the continuous crane integrated under
//! zero-order hold, driven by one of the discrete laws or by the sampled
//! continuous-time law.

mod continuous;
mod plant;
mod sweep;

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::control::{
    desired_drive_velocities, dynamic_feedback_step, friction_feedforward, integral_update,
    quasi_static_feedback_step, DynamicControllerState, ErrorDynamicsSpec, Integral, IntegralState,
};
use crate::error::{Error, Result};
use crate::model::{
    flat_parameterize, inverse_transform, transform_to_load_coords, FlatOutput, Input, OriginalState,
    TransformedState,
};
use crate::trajectory::ReferenceTrajectory;

pub use continuous::{emulated_continuous_controller, ContinuousSpec};
pub use plant::{check_state, default_substeps, Integrator, PlantModel, STATE_BOUND, SUBSTEPS_AT_10MS};
pub use sweep::{sweep_sampling_times, SweepRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControllerKind {
    /// Discrete endogenous dynamic feedback, orders (4, 4).
    Dynamic,
    /// Discrete quasi-static feedback, orders (4, 2).
    QuasiStatic,
    /// Continuous-time quasi-static law sampled and held.
    Continuous,
}

impl ControllerKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Dynamic => "dynamic",
            Self::QuasiStatic => "quasi-static",
            Self::Continuous => "continuous",
        }
    }

    /// Error-recursion orders the discrete law needs.
    pub fn orders(&self) -> (usize, usize) {
        match self {
            Self::Dynamic => (4, 4),
            Self::QuasiStatic | Self::Continuous => (4, 2),
        }
    }
}

impl std::fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ControllerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dynamic" => Ok(Self::Dynamic),
            "quasi-static" => Ok(Self::QuasiStatic),
            "continuous" => Ok(Self::Continuous),
            other => Err(Error::Config(format!(
                "unknown controller {other:?}; expected dynamic, quasi-static or continuous"
            ))),
        }
    }
}

/// Everything one closed-loop run needs.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub plant: PlantModel,
    pub controller: ControllerKind,
    pub spec: ErrorDynamicsSpec,
    pub continuous: ContinuousSpec,
    pub reference: ReferenceTrajectory,
    /// Initial load state; `None` starts at rest on the first reference sample.
    pub initial: Option<TransformedState>,
    pub friction_feedforward: bool,
    /// Sampling instant from which the integral parts run.
    pub integral_from: Option<usize>,
    /// Steps simulated beyond the end of the reference.
    pub settle_steps: usize,
}

impl Scenario {
    pub fn new(
        name: impl Into<String>,
        plant: PlantModel,
        controller: ControllerKind,
        spec: ErrorDynamicsSpec,
        reference: ReferenceTrajectory,
    ) -> Self {
        Self {
            name: name.into(),
            plant,
            controller,
            spec,
            continuous: ContinuousSpec::uniform(-15.0).expect("negative poles"),
            reference,
            initial: None,
            friction_feedforward: false,
            integral_from: None,
            settle_steps: 0,
        }
    }

    pub fn ts(&self) -> f64 {
        self.reference.ts()
    }

    pub fn steps(&self) -> usize {
        self.reference.len() + self.settle_steps
    }
}

/// Logged signals of one sampling instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRow {
    pub k: usize,
    pub t: f64,
    pub drive: OriginalState,
    pub load: TransformedState,
    /// Input held over `[t, t + ts)`; `None` if the run stopped at this instant.
    pub input: Option<Input>,
    pub reference: FlatOutput,
    /// `y(k) - y_d(k)`.
    pub error: FlatOutput,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Divergence {
    /// Last logged instant.
    pub last_valid: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub scenario: String,
    pub controller: ControllerKind,
    pub ts: f64,
    pub rows: Vec<LogRow>,
    pub diverged: Option<Divergence>,
}

/// Metrics of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub scenario: String,
    pub controller: ControllerKind,
    pub ts: f64,
    pub steps: usize,
    pub completed: bool,
    pub diverged: Option<Divergence>,
    pub max_error_x: f64,
    pub max_error_y: f64,
    /// Largest Euclidean load-position error \[m\].
    pub max_error: f64,
    pub final_error_x: f64,
    pub final_error_y: f64,
    pub final_error: f64,
    pub force_min: f64,
    pub force_max: f64,
    pub torque_min: f64,
    pub torque_max: f64,
}

impl ScenarioResult {
    pub fn completed(&self) -> bool {
        self.diverged.is_none()
    }

    pub fn errors(&self) -> impl Iterator<Item = FlatOutput> + '_ {
        self.rows.iter().map(|r| r.error)
    }

    /// Largest Euclidean tracking error over instants `from..`.
    pub fn max_error_from(&self, from: usize) -> f64 {
        self.rows
            .iter()
            .skip(from)
            .map(|r| r.error.x_l.hypot(r.error.y_l))
            .fold(0.0, f64::max)
    }

    pub fn final_error(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.error.x_l.hypot(r.error.y_l))
    }

    pub fn summary(&self) -> Summary {
        let abs_max = |f: fn(&LogRow) -> f64| self.rows.iter().map(|r| f(r).abs()).fold(0.0, f64::max);
        let inputs: Vec<Input> = self.rows.iter().filter_map(|r| r.input).collect();
        let extent = |f: fn(&Input) -> f64| {
            inputs
                .iter()
                .map(f)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
        };
        let (force_min, force_max) = extent(|u| u.force);
        let (torque_min, torque_max) = extent(|u| u.torque);
        let last = self.rows.last().map(|r| r.error).unwrap_or_default();
        Summary {
            scenario: self.scenario.clone(),
            controller: self.controller,
            ts: self.ts,
            steps: self.rows.len(),
            completed: self.completed(),
            diverged: self.diverged.clone(),
            max_error_x: abs_max(|r| r.error.x_l),
            max_error_y: abs_max(|r| r.error.y_l),
            max_error: self.max_error_from(0),
            final_error_x: last.x_l,
            final_error_y: last.y_l,
            final_error: last.x_l.hypot(last.y_l),
            force_min,
            force_max,
            torque_min,
            torque_max,
        }
    }

    /// Output file name `<scenario>_<controller>_<Ts_ms>ms.csv`.
    pub fn file_name(&self) -> String {
        format!("{}_{}_{}ms.csv", self.scenario, self.controller, ts_millis(self.ts))
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(CSV_HEADER)?;
        for r in &self.rows {
            let d = &r.drive;
            let l = &r.load;
            let u = r.input.unwrap_or(Input::new(f64::NAN, f64::NAN));
            let values = [
                r.t,
                d.x_t,
                d.phi,
                d.theta,
                d.v_t,
                d.omega_phi,
                d.omega_theta,
                l.x_l,
                l.y_l,
                l.v_lx,
                l.v_ly,
                u.force,
                u.torque,
                r.reference.x_l,
                r.reference.y_l,
                r.error.x_l,
                r.error.y_l,
            ];
            let mut record = vec![r.k.to_string()];
            record.extend(values.iter().map(|v| v.to_string()));
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, dir: impl AsRef<Path>) -> Result<std::path::PathBuf> {
        let path = dir.as_ref().join(self.file_name());
        self.write_csv(std::fs::File::create(&path)?)?;
        Ok(path)
    }
}

pub const CSV_HEADER: [&str; 18] = [
    "k", "t", "x_T", "phi", "theta", "v_T", "omega_phi", "omega_theta", "x_L", "y_L", "v_Lx", "v_Ly", "F", "M",
    "x_Ld", "y_Ld", "e_x", "e_y",
];

/// Sampling time in milliseconds without trailing zeros, `0.01 -> "10"`.
pub fn ts_millis(ts: f64) -> String {
    let ms = (ts * 1e3 * 1e6).round() / 1e6;
    format!("{ms}")
}

/// Initial plant state: the given load state, or rest at the first reference sample.
fn initial_state(scenario: &Scenario) -> Result<OriginalState> {
    let params = &scenario.plant.params;
    let load = match scenario.initial {
        Some(x) => x,
        None => flat_parameterize(&scenario.reference.window(0), params, scenario.ts())?.0,
    };
    inverse_transform(&load, params)
}

fn check_setup(scenario: &Scenario) -> Result<()> {
    scenario.plant.validate()?;
    let ts = scenario.ts();
    if scenario.controller != ControllerKind::Continuous {
        let want = scenario.controller.orders();
        if scenario.spec.orders() != want {
            return Err(Error::InvalidDynamics(format!(
                "{} feedback needs orders {want:?}, got {:?}",
                scenario.controller,
                scenario.spec.orders()
            )));
        }
        scenario.spec.validate(ts)?;
    } else if scenario.reference.continuous().is_none() {
        return Err(Error::InvalidReference(
            "the continuous-time law needs a reference with analytic derivatives".into(),
        ));
    }
    Ok(())
}

/// Runs the closed loop over the reference plus the settling steps.
///
/// Setup errors are returned as `Err`; leaving the valid domain or a failing
/// control law ends the run early and is reported in
/// [`ScenarioResult::diverged`].
pub fn run_closed_loop(scenario: &Scenario) -> Result<ScenarioResult> {
    check_setup(scenario)?;
    let ts = scenario.ts();
    let plant = &scenario.plant;
    let params = &plant.params;
    let reference = &scenario.reference;

    let mut drive = initial_state(scenario)?;
    let mut z = DynamicControllerState::from_state(&transform_to_load_coords(&drive, params), ts);
    let mut e_i = IntegralState::default();
    let mut rows = Vec::with_capacity(scenario.steps());
    let mut diverged = None;

    for k in 0..scenario.steps() {
        let t = k as f64 * ts;
        let load = transform_to_load_coords(&drive, params);
        let y_d = reference.sample(k);
        let error = FlatOutput::new(load.x_l - y_d.x_l, load.y_l - y_d.y_l);
        let mut row = LogRow {
            k,
            t,
            drive,
            load,
            input: None,
            reference: y_d,
            error,
        };
        if let Err(e) = check_state(&drive, params) {
            rows.push(row);
            diverged = Some(Divergence {
                last_valid: k,
                reason: format!("plant: {e}"),
            });
            break;
        }
        let active = scenario.integral_from.is_some_and(|from| k >= from);
        let window = reference.window(k);
        let law = match scenario.controller {
            ControllerKind::Dynamic => {
                dynamic_feedback_step(&load, &z, &window, &scenario.spec, params, ts, Integral::new(e_i, active))
                    .map(|step| {
                        z = step.next;
                        step.input
                    })
            }
            ControllerKind::QuasiStatic => {
                quasi_static_feedback_step(&load, &window, &scenario.spec, params, ts, Integral::new(e_i, active))
                    .map(|step| step.input)
            }
            ControllerKind::Continuous => {
                let transition = reference.continuous().expect("checked in setup");
                emulated_continuous_controller(&load, &transition.derivatives(t), &scenario.continuous, params)
            }
        };
        let input = law
            .and_then(|u| {
                if !scenario.friction_feedforward {
                    return Ok(u);
                }
                let (v_t, omega_phi) = desired_drive_velocities(&window, params, ts)?;
                Ok(u + friction_feedforward(v_t, omega_phi, params))
            })
            .and_then(|u| {
                if u.force.is_finite() && u.torque.is_finite() {
                    Ok(u)
                } else {
                    Err(Error::Domain(format!("non-finite input {u:?}")))
                }
            });
        let input = match input {
            Ok(u) => u,
            Err(e) => {
                rows.push(row);
                diverged = Some(Divergence {
                    last_valid: k,
                    reason: format!("controller: {e}"),
                });
                break;
            }
        };
        row.input = Some(input);
        rows.push(row);
        e_i = integral_update(e_i, error, active, ts);
        match plant.step(&drive, &input, ts) {
            Ok(next) => drive = next,
            Err(e) => {
                diverged = Some(Divergence {
                    last_valid: k,
                    reason: format!("plant: {e}"),
                });
                break;
            }
        }
    }

    Ok(ScenarioResult {
        scenario: scenario.name.clone(),
        controller: scenario.controller,
        ts,
        rows,
        diverged,
    })
}
