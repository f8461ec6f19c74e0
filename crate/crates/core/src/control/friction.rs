use crate::error::Result;
use crate::model::{flat_parameterize, inverse_transform, Input};
use crate::params::CraneParams;

use super::ReferenceWindow;

/// Friction compensation `(r_vT·v_Td + r_CT·sign(v_Td), r_vphi·ω_φd + r_Cphi·sign(ω_φd))`,
/// with the coefficients picked by the sign of each velocity.
pub fn friction_feedforward(v_td: f64, omega_phid: f64, params: &CraneParams) -> Input {
    Input::new(
        params.trolley_friction.compensation(v_td),
        params.drum_friction.compensation(omega_phid),
    )
}

/// Trolley and drum velocities `(v_Td, ω_φd)` along the reference window.
pub fn desired_drive_velocities(reference: &ReferenceWindow, params: &CraneParams, ts: f64) -> Result<(f64, f64)> {
    let (load, _) = flat_parameterize(reference, params, ts)?;
    let drive = inverse_transform(&load, params)?;
    Ok((drive.v_t, drive.omega_phi))
}
