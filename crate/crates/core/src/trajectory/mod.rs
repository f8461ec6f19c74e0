//! Reference trajectories for the flat output.
//!
//! Samples are held at the initial rest point for [`REST_SAMPLES`] instants
//! before anything moves and at the final rest point after the transition,
//! so every window at the boundaries parameterizes to the rest state.

mod eight;
mod optimize;
mod polynomial;

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{flat_parameterize, FlatOutput, FlatWindow, MIN_DEPTH};
use crate::params::CraneParams;

pub use eight::{lying_eight_reference, LyingEight};
pub use optimize::{
    optimize_minimax_acceleration, polynomial_initializer, ConstraintActivity, IterationLog,
    OptimizationProblem, OptimizationReport, OptimizerFailure, ProblemEcho, SolverSettings,
};
pub use polynomial::{blend, PolynomialTransition};

/// Number of leading samples equal to the initial rest point, the largest
/// shift order of the flat output.
pub const REST_SAMPLES: usize = 4;

/// Sampled flat-output reference `y_d(0), y_d(1), ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTrajectory {
    ts: f64,
    samples: Vec<FlatOutput>,
    transition_end: usize,
    continuous: Option<PolynomialTransition>,
}

impl ReferenceTrajectory {
    /// Wraps raw samples. The first [`REST_SAMPLES`] must coincide; the
    /// sequence is padded at the end so that it finishes with that many
    /// copies of the last sample.
    pub fn from_samples(samples: Vec<FlatOutput>, ts: f64) -> Result<Self> {
        if !(ts > 0.0 && ts.is_finite()) {
            return Err(Error::InvalidReference(format!("sampling time {ts} must be positive")));
        }
        let Some(&first) = samples.first() else {
            return Err(Error::InvalidReference("no samples".into()));
        };
        if let Some(k) = samples.iter().position(|y| !(y.x_l.is_finite() && y.y_l.is_finite())) {
            return Err(Error::InvalidReference(format!("non-finite sample at k={k}")));
        }
        if let Some(k) = samples.iter().take(REST_SAMPLES).position(|y| *y != first) {
            return Err(Error::InvalidReference(format!(
                "sample k={k} differs from the initial rest point; the first {REST_SAMPLES} samples must be equal"
            )));
        }
        let mut samples = samples;
        let last = *samples.last().unwrap();
        let transition_end = samples.iter().rposition(|y| *y != last).map_or(0, |k| k + 1);
        samples.resize(samples.len().max(transition_end + REST_SAMPLES), last);
        Ok(Self {
            ts,
            samples,
            transition_end,
            continuous: None,
        })
    }

    pub fn ts(&self) -> f64 {
        self.ts
    }

    pub fn samples(&self) -> &[FlatOutput] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn start(&self) -> FlatOutput {
        self.samples[0]
    }

    pub fn end(&self) -> FlatOutput {
        *self.samples.last().unwrap()
    }

    /// First index from which the reference stays at its final rest point.
    pub fn transition_end(&self) -> usize {
        self.transition_end
    }

    /// Time at which the reference has reached its final rest point.
    pub fn duration(&self) -> f64 {
        self.transition_end as f64 * self.ts
    }

    /// Underlying continuous transition, when the samples come from one.
    pub fn continuous(&self) -> Option<&PolynomialTransition> {
        self.continuous.as_ref()
    }

    /// Sample `k`, holding the final rest point beyond the stored range.
    pub fn sample(&self, k: usize) -> FlatOutput {
        self.samples[k.min(self.samples.len() - 1)]
    }

    pub fn window(&self, k: usize) -> FlatWindow {
        FlatWindow::new(std::array::from_fn(|i| self.sample(k + i)))
    }

    /// First `r` samples equal the start and the last `r` equal the end.
    pub fn has_rest_padding(&self, r: usize) -> bool {
        let n = self.samples.len();
        n >= r
            && self.samples[..r].iter().all(|y| *y == self.start())
            && self.samples[n - r..].iter().all(|y| *y == self.end())
    }

    /// Checks that every window parameterizes to a valid state and input.
    pub fn validate(&self, params: &CraneParams) -> Result<()> {
        for k in 0..self.samples.len() {
            if self.samples[k].y_l <= MIN_DEPTH {
                return Err(Error::InvalidReference(format!(
                    "k={k}: load depth {} too small",
                    self.samples[k].y_l
                )));
            }
            let (state, _) = flat_parameterize(&self.window(k), params, self.ts)
                .map_err(|e| Error::InvalidReference(format!("window at k={k} not admissible: {e}")))?;
            state
                .validate()
                .map_err(|e| Error::InvalidReference(format!("window at k={k} not admissible: {e}")))?;
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for (k, y) in self.samples.iter().enumerate() {
            w.serialize(CsvRow {
                k,
                t: k as f64 * self.ts,
                x_l: y.x_l,
                y_l: y.y_l,
            })?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    /// Reads `k,t,x_L,y_L` rows. The sampling time is taken from `ts` or
    /// inferred from the first two rows.
    pub fn read_csv<R: Read>(reader: R, ts: Option<f64>) -> Result<Self> {
        let mut rows = Vec::new();
        for row in csv::Reader::from_reader(reader).deserialize() {
            let row: CsvRow = row?;
            rows.push(row);
        }
        if rows.len() < 2 {
            return Err(Error::InvalidReference("need at least two rows".into()));
        }
        let ts = ts.unwrap_or(rows[1].t - rows[0].t);
        for (i, row) in rows.iter().enumerate() {
            if row.k != i || (row.t - i as f64 * ts).abs() > 1e-9 * (1.0 + row.t.abs()) {
                return Err(Error::InvalidReference(format!(
                    "row {i} (k={}, t={}) is off the sampling grid with ts={ts}",
                    row.k, row.t
                )));
            }
        }
        Self::from_samples(rows.iter().map(|r| FlatOutput::new(r.x_l, r.y_l)).collect(), ts)
    }

    pub fn load_csv(path: impl AsRef<Path>, ts: Option<f64>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?, ts)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    k: usize,
    t: f64,
    #[serde(rename = "x_L")]
    x_l: f64,
    #[serde(rename = "y_L")]
    y_l: f64,
}

/// Samples the degree-7 rest-to-rest transition `y0 -> y1` of the given
/// duration. Motion starts after the leading rest block, at `t = 3·ts`, so
/// that sample 3 is already the first polynomial sample. The duration need
/// not be a multiple of `ts`; the last partial interval ends at rest.
pub fn polynomial_reference(y0: FlatOutput, y1: FlatOutput, duration: f64, ts: f64) -> Result<ReferenceTrajectory> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::InvalidReference(format!("duration {duration} must be positive")));
    }
    if !(ts > 0.0 && ts.is_finite()) {
        return Err(Error::InvalidReference(format!("sampling time {ts} must be positive")));
    }
    let delay = REST_SAMPLES - 1;
    let transition = PolynomialTransition {
        y0,
        y1,
        duration,
        start: delay as f64 * ts,
    };
    let steps = (duration / ts - 1e-9).ceil() as usize;
    let len = delay + steps + REST_SAMPLES;
    let samples = (0..len).map(|k| transition.position(k as f64 * ts)).collect();
    let mut reference = ReferenceTrajectory::from_samples(samples, ts)?;
    reference.continuous = Some(transition);
    Ok(reference)
}
