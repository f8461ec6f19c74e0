use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::model::FlatOutput;
use crate::params::CraneParams;

use super::{blend, ReferenceTrajectory, REST_SAMPLES};

/// Figure-eight lying on its side: one horizontal and two vertical periods
/// traversed once, starting and ending at rest in the center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyingEight {
    pub center: FlatOutput,
    pub width: f64,
    pub height: f64,
    pub period: f64,
}

impl Default for LyingEight {
    fn default() -> Self {
        Self {
            center: FlatOutput::new(0.6, 0.6),
            width: 0.6,
            height: 0.15,
            period: 6.0,
        }
    }
}

impl LyingEight {
    /// Point on the path at time `t` after motion starts. The path parameter
    /// follows the degree-7 blend, so the load starts and stops at rest.
    pub fn position(&self, t: f64) -> FlatOutput {
        // fract maps the end of the lap back to 0, closing the path exactly
        let sigma = blend(t / self.period)[0].fract();
        FlatOutput::new(
            self.center.x_l + 0.5 * self.width * (TAU * sigma).sin(),
            self.center.y_l + 0.5 * self.height * (2.0 * TAU * sigma).sin(),
        )
    }
}

/// Samples one lap of the lying eight and checks every window for admissibility.
pub fn lying_eight_reference(shape: &LyingEight, ts: f64, params: &CraneParams) -> Result<ReferenceTrajectory> {
    if !(shape.period > 0.0 && shape.period.is_finite()) {
        return Err(Error::InvalidReference(format!("period {} must be positive", shape.period)));
    }
    if !(shape.width >= 0.0 && shape.height >= 0.0) {
        return Err(Error::InvalidReference("width and height must be non-negative".into()));
    }
    if !(ts > 0.0 && ts.is_finite()) {
        return Err(Error::InvalidReference(format!("sampling time {ts} must be positive")));
    }
    let delay = REST_SAMPLES - 1;
    let steps = (shape.period / ts - 1e-9).ceil() as usize;
    let samples = (0..delay + steps + REST_SAMPLES)
        .map(|k| shape.position((k as f64 - delay as f64) * ts))
        .collect();
    let reference = ReferenceTrajectory::from_samples(samples, ts)?;
    reference.validate(params)?;
    Ok(reference)
}
