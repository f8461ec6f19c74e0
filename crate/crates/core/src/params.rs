//! Physical constants of the crane.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Viscous and Coulomb friction coefficients for one drive.
///
/// The negative-direction coefficients default to the positive ones, so a
/// symmetric drive only needs `viscous` and `coulomb`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DriveFriction {
    pub viscous: f64,
    pub coulomb: f64,
    pub viscous_neg: f64,
    pub coulomb_neg: f64,
}

impl DriveFriction {
    pub fn symmetric(viscous: f64, coulomb: f64) -> Self {
        Self {
            viscous,
            coulomb,
            viscous_neg: viscous,
            coulomb_neg: coulomb,
        }
    }

    /// Coefficients `(viscous, coulomb)` that apply for a velocity of the given sign.
    pub fn select(&self, velocity: f64) -> (f64, f64) {
        if velocity < 0.0 {
            (self.viscous_neg, self.coulomb_neg)
        } else {
            (self.viscous, self.coulomb)
        }
    }

    /// `r_v·v + r_C·sign(v)` with `sign(0) = 0`.
    pub fn compensation(&self, velocity: f64) -> f64 {
        let (viscous, coulomb) = self.select(velocity);
        viscous * velocity + coulomb * signum0(velocity)
    }

    /// Smooth plant-side friction force, `r_v·v + r_C·tanh(v/v_eps)`.
    pub fn smooth(&self, velocity: f64, v_eps: f64) -> f64 {
        let (viscous, coulomb) = self.select(velocity);
        viscous * velocity + coulomb * (velocity / v_eps).tanh()
    }

    fn validate(&self, name: &str) -> Result<()> {
        let all = [self.viscous, self.coulomb, self.viscous_neg, self.coulomb_neg];
        if all.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::InvalidParams(format!(
                "{name} friction coefficients must be finite and non-negative, got {self:?}"
            )));
        }
        Ok(())
    }
}

pub(crate) fn signum0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Masses, drum geometry, gravity and friction of the gantry crane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CraneParams {
    /// Trolley mass \[kg\].
    pub trolley_mass: f64,
    /// Load mass \[kg\].
    pub load_mass: f64,
    /// Drum moment of inertia \[kg·m²\].
    pub drum_inertia: f64,
    /// Drum radius \[m\].
    pub drum_radius: f64,
    /// Gravitational acceleration, pointing in +y \[m/s²\].
    pub gravity: f64,
    /// Trolley friction \[N·s/m, N\].
    pub trolley_friction: DriveFriction,
    /// Drum friction \[N·m·s, N·m\].
    pub drum_friction: DriveFriction,
}

impl Default for CraneParams {
    fn default() -> Self {
        Self {
            trolley_mass: 1.0,
            load_mass: 0.5,
            drum_inertia: 1.0e-4,
            drum_radius: 0.02,
            gravity: 9.81,
            trolley_friction: DriveFriction::default(),
            drum_friction: DriveFriction::default(),
        }
    }
}

impl CraneParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("m_T", self.trolley_mass),
            ("m_L", self.load_mass),
            ("J", self.drum_inertia),
            ("R", self.drum_radius),
            ("g", self.gravity),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        self.trolley_friction.validate("trolley")?;
        self.drum_friction.validate("drum")
    }

    /// Drum torque that holds the load at rest, `-m_L·R·g`.
    pub fn holding_torque(&self) -> f64 {
        -self.load_mass * self.drum_radius * self.gravity
    }

    /// Input that keeps the crane at a rest position.
    pub fn rest_input(&self) -> crate::model::Input {
        crate::model::Input::new(0.0, self.holding_torque())
    }
}

/// Flat `key = value` representation used in config files. Field names follow
/// the usual symbols (`m_T`, `r_vT`, ...).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CraneParamsConfig {
    #[serde(rename = "m_T")]
    pub m_t: f64,
    #[serde(rename = "m_L")]
    pub m_l: f64,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub g: f64,
    #[serde(rename = "r_vT", default)]
    pub r_vt: f64,
    #[serde(rename = "r_CT", default)]
    pub r_ct: f64,
    #[serde(rename = "r_vphi", default)]
    pub r_vphi: f64,
    #[serde(rename = "r_Cphi", default)]
    pub r_cphi: f64,
    #[serde(rename = "r_vT_neg", default, skip_serializing_if = "Option::is_none")]
    pub r_vt_neg: Option<f64>,
    #[serde(rename = "r_CT_neg", default, skip_serializing_if = "Option::is_none")]
    pub r_ct_neg: Option<f64>,
    #[serde(rename = "r_vphi_neg", default, skip_serializing_if = "Option::is_none")]
    pub r_vphi_neg: Option<f64>,
    #[serde(rename = "r_Cphi_neg", default, skip_serializing_if = "Option::is_none")]
    pub r_cphi_neg: Option<f64>,
}

impl Default for CraneParamsConfig {
    fn default() -> Self {
        CraneParams::default().into()
    }
}

impl From<CraneParams> for CraneParamsConfig {
    fn from(p: CraneParams) -> Self {
        let t = p.trolley_friction;
        let d = p.drum_friction;
        let asym = |neg: f64, pos: f64| (neg != pos).then_some(neg);
        Self {
            m_t: p.trolley_mass,
            m_l: p.load_mass,
            j: p.drum_inertia,
            r: p.drum_radius,
            g: p.gravity,
            r_vt: t.viscous,
            r_ct: t.coulomb,
            r_vphi: d.viscous,
            r_cphi: d.coulomb,
            r_vt_neg: asym(t.viscous_neg, t.viscous),
            r_ct_neg: asym(t.coulomb_neg, t.coulomb),
            r_vphi_neg: asym(d.viscous_neg, d.viscous),
            r_cphi_neg: asym(d.coulomb_neg, d.coulomb),
        }
    }
}

impl TryFrom<CraneParamsConfig> for CraneParams {
    type Error = Error;

    fn try_from(c: CraneParamsConfig) -> Result<Self> {
        let params = CraneParams {
            trolley_mass: c.m_t,
            load_mass: c.m_l,
            drum_inertia: c.j,
            drum_radius: c.r,
            gravity: c.g,
            trolley_friction: DriveFriction {
                viscous: c.r_vt,
                coulomb: c.r_ct,
                viscous_neg: c.r_vt_neg.unwrap_or(c.r_vt),
                coulomb_neg: c.r_ct_neg.unwrap_or(c.r_ct),
            },
            drum_friction: DriveFriction {
                viscous: c.r_vphi,
                coulomb: c.r_cphi,
                viscous_neg: c.r_vphi_neg.unwrap_or(c.r_vphi),
                coulomb_neg: c.r_cphi_neg.unwrap_or(c.r_cphi),
            },
        };
        params.validate()?;
        Ok(params)
    }
}

impl CraneParams {
    /// Parses a `key = value` parameter file.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let raw: CraneParamsConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        raw.try_into()
    }

    pub fn to_config_string(&self) -> String {
        toml::to_string(&CraneParamsConfig::from(*self)).expect("flat struct serializes")
    }
}
