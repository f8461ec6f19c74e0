//! Scenario files: TOML with `[crane]`, `[controller]`, `[reference]`,
//! `[simulation]` and `[output]` sections.

use std::path::{Path, PathBuf};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::control::{pole_place_real, ChannelDynamics, ErrorDynamicsSpec};
use crate::error::{Error, Result};
use crate::model::{flat_parameterize, FlatOutput, Input};
use crate::params::{CraneParams, CraneParamsConfig};
use crate::simulation::{default_substeps, ContinuousSpec, ControllerKind, Integrator, PlantModel, Scenario};
use crate::trajectory::{
    lying_eight_reference, optimize_minimax_acceleration, polynomial_initializer, polynomial_reference, LyingEight,
    OptimizationProblem, OptimizationReport, ReferenceTrajectory, SolverSettings,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub crane: CraneParamsConfig,
    #[serde(default)]
    pub controller: ControllerConfig,
    pub reference: ReferenceConfig,
    #[serde(default)]
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerConfig {
    /// Laws to run on the same reference, one output file each.
    pub kinds: Vec<ControllerKind>,
    /// Root used for every channel unless `roots_x`/`roots_y` are given.
    pub root: f64,
    pub roots_x: Option<Vec<f64>>,
    pub roots_y: Option<Vec<f64>>,
    pub integral: bool,
    /// Where the integrator pole moves to when the integral parts are on.
    pub integral_root: f64,
    /// Activation time \[s\]; defaults to the end of the reference transition.
    pub integral_start: Option<f64>,
    /// Pole of the continuous-time law \[rad/s\], used for every channel.
    pub continuous_pole: f64,
    pub friction_feedforward: bool,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            kinds: vec![ControllerKind::QuasiStatic],
            root: 0.5,
            roots_x: None,
            roots_y: None,
            integral: false,
            integral_root: 0.98,
            integral_start: None,
            continuous_pole: -15.0,
            friction_feedforward: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ReferenceConfig {
    Polynomial {
        start: [f64; 2],
        end: [f64; 2],
        duration: f64,
    },
    Optimal {
        start: [f64; 2],
        end: [f64; 2],
        horizon: f64,
        force_max: f64,
        torque_max: f64,
        #[serde(default = "default_iterations")]
        max_iterations: usize,
        #[serde(default = "default_tolerance")]
        tolerance: f64,
    },
    LyingEight {
        center: [f64; 2],
        width: f64,
        height: f64,
        period: f64,
    },
    /// `k,t,x_L,y_L` samples; a relative path is resolved against the config file.
    File { path: PathBuf },
}

fn default_iterations() -> usize {
    SolverSettings::default().max_iterations
}

fn default_tolerance() -> f64 {
    SolverSettings::default().tolerance
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    pub ts: f64,
    /// RK4 substeps per interval; scaled from 20 at 10 ms when absent.
    pub substeps: Option<usize>,
    pub integrator: Integrator,
    /// Simulated time after the reference ends \[s\].
    pub settle: f64,
    pub friction: bool,
    pub friction_eps: f64,
    /// Constant `(F, M)` acting on the plant.
    pub disturbance: [f64; 2],
    /// Offset of the initial load position from the first reference sample \[m\].
    pub initial_offset: [f64; 2],
    /// Half-width of a uniform random offset added to `initial_offset` \[m\].
    pub perturbation: f64,
    pub seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            ts: 0.01,
            substeps: None,
            integrator: Integrator::Rk4,
            settle: 1.0,
            friction: false,
            friction_eps: 1e-3,
            disturbance: [0.0, 0.0],
            initial_offset: [0.0, 0.0],
            perturbation: 0.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

fn point(p: [f64; 2]) -> FlatOutput {
    FlatOutput::new(p[0], p[1])
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads and validates a scenario file. Relative reference paths are
    /// made absolute against the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut config = Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        if let ReferenceConfig::File { path: file } = &mut config.reference {
            if file.is_relative() {
                *file = path.parent().unwrap_or(Path::new(".")).join(&*file);
            }
        }
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn params(&self) -> Result<CraneParams> {
        self.crane.clone().try_into()
    }

    /// Cross-checks the sections at the configured sampling time.
    pub fn validate(&self) -> Result<()> {
        self.validate_at(self.simulation.ts)
    }

    pub fn validate_at(&self, ts: f64) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::Config(format!("name {:?} is not usable in file names", self.name)));
        }
        self.params()?;
        if !(ts > 0.0 && ts.is_finite()) {
            return Err(Error::Config(format!("sampling time ts={ts} must be positive")));
        }
        let sim = &self.simulation;
        if sim.substeps == Some(0) {
            return Err(Error::Config("substeps must be at least 1".into()));
        }
        if !(sim.settle >= 0.0 && sim.friction_eps > 0.0 && sim.perturbation >= 0.0) {
            return Err(Error::Config("settle and perturbation must be non-negative, friction_eps positive".into()));
        }
        let c = &self.controller;
        if c.kinds.is_empty() {
            return Err(Error::Config("controller.kinds is empty".into()));
        }
        for kind in &c.kinds {
            if *kind == ControllerKind::Continuous {
                if !matches!(self.reference, ReferenceConfig::Polynomial { .. }) {
                    return Err(Error::Config(
                        "the continuous-time law needs a polynomial reference".into(),
                    ));
                }
                ContinuousSpec::uniform(c.continuous_pole)?;
            } else {
                self.spec(*kind, ts)?;
            }
        }
        match &self.reference {
            ReferenceConfig::Optimal { horizon, .. } => {
                let n = (horizon / ts).round();
                if (n * ts - horizon).abs() > 1e-9 * horizon {
                    return Err(Error::Config(format!(
                        "optimization horizon T={horizon} s is not a multiple of ts={ts} s"
                    )));
                }
            }
            ReferenceConfig::Polynomial { duration, .. } if !(*duration > 0.0) => {
                return Err(Error::Config(format!("duration {duration} must be positive")));
            }
            _ => {}
        }
        Ok(())
    }

    fn roots(&self, given: &Option<Vec<f64>>, order: usize, channel: &str) -> Result<Vec<f64>> {
        match given {
            None => Ok(vec![self.controller.root; order]),
            Some(r) if r.len() == order => Ok(r.clone()),
            Some(r) => Err(Error::Config(format!(
                "{channel} needs {order} roots for this controller, got {}",
                r.len()
            ))),
        }
    }

    /// Error dynamics for a discrete law at sampling time `ts`.
    pub fn spec(&self, kind: ControllerKind, ts: f64) -> Result<ErrorDynamicsSpec> {
        let (nx, ny) = kind.orders();
        let c = &self.controller;
        let channel = |roots: Vec<f64>| -> Result<ChannelDynamics> {
            let base = pole_place_real(&roots)?;
            if c.integral {
                base.with_integral_root(c.integral_root, ts)
            } else {
                Ok(base)
            }
        };
        Ok(ErrorDynamicsSpec::new(
            channel(self.roots(&c.roots_x, nx, "roots_x")?)?,
            channel(self.roots(&c.roots_y, ny, "roots_y")?)?,
        ))
    }

    /// Reference sampled at `ts`, and the optimizer report when one ran.
    pub fn reference(&self, ts: f64) -> Result<(ReferenceTrajectory, Option<OptimizationReport>)> {
        let params = self.params()?;
        match &self.reference {
            ReferenceConfig::Polynomial { start, end, duration } => {
                let r = polynomial_reference(point(*start), point(*end), *duration, ts)?;
                r.validate(&params)?;
                Ok((r, None))
            }
            ReferenceConfig::Optimal { .. } => {
                let problem = self.optimization_problem(ts)?;
                let init = polynomial_initializer(&problem)?;
                let (r, report) = optimize_minimax_acceleration(&problem, &init, &params)?;
                Ok((r, Some(report)))
            }
            ReferenceConfig::LyingEight { center, width, height, period } => {
                let shape = LyingEight {
                    center: point(*center),
                    width: *width,
                    height: *height,
                    period: *period,
                };
                Ok((lying_eight_reference(&shape, ts, &params)?, None))
            }
            ReferenceConfig::File { path } => {
                let r = ReferenceTrajectory::load_csv(path, Some(ts))?;
                r.validate(&params)?;
                Ok((r, None))
            }
        }
    }

    pub fn optimization_problem(&self, ts: f64) -> Result<OptimizationProblem> {
        let ReferenceConfig::Optimal {
            start,
            end,
            horizon,
            force_max,
            torque_max,
            max_iterations,
            tolerance,
        } = &self.reference
        else {
            return Err(Error::Config("reference kind is not \"optimal\"".into()));
        };
        Ok(OptimizationProblem {
            start: point(*start),
            end: point(*end),
            horizon: *horizon,
            ts,
            force_max: *force_max,
            torque_max: *torque_max,
            settings: SolverSettings {
                max_iterations: *max_iterations,
                tolerance: *tolerance,
                ..SolverSettings::default()
            },
        })
    }

    pub fn plant(&self, ts: f64) -> Result<PlantModel> {
        let sim = &self.simulation;
        let plant = PlantModel {
            params: self.params()?,
            friction_enabled: sim.friction,
            friction_eps: sim.friction_eps,
            disturbance: Input::new(sim.disturbance[0], sim.disturbance[1]),
            substeps: sim.substeps.unwrap_or_else(|| default_substeps(ts)),
            integrator: sim.integrator,
        };
        plant.validate()?;
        Ok(plant)
    }

    /// Closed-loop scenario for one law. The random part of the initial
    /// offset is drawn from ChaCha8 seeded with `seed`.
    pub fn scenario(&self, kind: ControllerKind, reference: &ReferenceTrajectory, seed: u64) -> Result<Scenario> {
        let ts = reference.ts();
        self.validate_at(ts)?;
        let params = self.params()?;
        let spec = match kind {
            // the continuous law does not use the discrete error dynamics
            ControllerKind::Continuous => ErrorDynamicsSpec::deadbeat(4, 2),
            _ => self.spec(kind, ts)?,
        };
        let mut scenario = Scenario::new(self.name.clone(), self.plant(ts)?, kind, spec, reference.clone());
        let c = &self.controller;
        scenario.continuous = ContinuousSpec::uniform(c.continuous_pole)?;
        scenario.friction_feedforward = c.friction_feedforward;
        scenario.settle_steps = (self.simulation.settle / ts).round() as usize;
        if c.integral {
            scenario.integral_from = Some(match c.integral_start {
                Some(t) => (t / ts).round() as usize,
                None => reference.transition_end(),
            });
        }
        let sim = &self.simulation;
        let mut offset = sim.initial_offset;
        if sim.perturbation > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for o in &mut offset {
                *o += rng.random_range(-sim.perturbation..=sim.perturbation);
            }
        }
        if offset != [0.0, 0.0] {
            let (mut x0, _) = flat_parameterize(&reference.window(0), &params, ts)?;
            x0.x_l += offset[0];
            x0.y_l += offset[1];
            scenario.initial = Some(x0);
        }
        Ok(scenario)
    }
}
