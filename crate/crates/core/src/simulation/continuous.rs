use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{input_for_tension, FlatOutput, Input, TransformedState};
use crate::params::CraneParams;

/// Continuous error dynamics of the quasi-static law: `e⁽⁴⁾ + b₃e⁽³⁾ + ... + b₀e = 0`
/// for `x_L` and `ë + a₁ė + a₀e = 0` for `y_L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuousSpec {
    pub x_l: [f64; 4],
    pub y_l: [f64; 2],
}

impl ContinuousSpec {
    /// Places the poles at the given real values \[rad/s\], all negative.
    pub fn from_roots(x_roots: [f64; 4], y_roots: [f64; 2]) -> Result<Self> {
        if let Some(r) = x_roots.iter().chain(&y_roots).find(|r| !(r.is_finite() && **r < 0.0)) {
            return Err(Error::InvalidDynamics(format!("continuous pole {r} not in the open left half plane")));
        }
        let x = expand(&x_roots);
        let y = expand(&y_roots);
        Ok(Self {
            x_l: [x[0], x[1], x[2], x[3]],
            y_l: [y[0], y[1]],
        })
    }

    /// Every pole at `root`.
    pub fn uniform(root: f64) -> Result<Self> {
        Self::from_roots([root; 4], [root; 2])
    }
}

/// Coefficients `c₀..c_{n-1}` of the monic polynomial `Π (s - r)`.
fn expand(roots: &[f64]) -> Vec<f64> {
    let mut c = vec![1.0];
    for r in roots {
        let mut next = vec![0.0; c.len() + 1];
        for (i, ci) in c.iter().enumerate() {
            next[i + 1] += ci;
            next[i] -= r * ci;
        }
        c = next;
    }
    c.pop();
    c
}

/// Continuous-time quasi-static flatness-based law, `ẍ`-chain of order four
/// for `x_L` and of order two for `y_L`. `reference` holds the value and the
/// first four time derivatives of the reference.
pub fn emulated_continuous_controller(
    x: &TransformedState,
    reference: &[FlatOutput; 5],
    spec: &ContinuousSpec,
    params: &CraneParams,
) -> Result<Input> {
    let g = params.gravity;
    let [yd, yd1, yd2, yd3, yd4] = reference.map(|r| r.y_l);
    let [xd, xd1, xd2, xd3, xd4] = reference.map(|r| r.x_l);
    let [a0, a1] = spec.y_l;
    let [b0, b1, b2, b3] = spec.x_l;

    // vertical channel: ÿ = w and its first two derivatives along the closed loop
    let e = x.y_l - yd;
    let e1 = x.v_ly - yd1;
    let w = yd2 - a1 * e1 - a0 * e;
    let e2 = w - yd2;
    let w1 = yd3 - a1 * e2 - a0 * e1;
    let e3 = w1 - yd3;
    let w2 = yd4 - a1 * e3 - a0 * e2;

    let lift = g - w;
    let (s, c) = x.theta.sin_cos();
    if !(lift.abs() > 1e-9 && c > 0.0) {
        return Err(Error::Singular {
            context: "continuous quasi-static law",
            detail: format!("g - w = {lift}, cos(theta) = {c} at {x:?}"),
        });
    }
    let t = s / c;
    let om = x.omega_theta;
    let x2 = lift * t;
    let x3 = -w1 * t + lift * om / (c * c);
    let v = xd4 - b3 * (x3 - xd3) - b2 * (x2 - xd2) - b1 * (x.v_lx - xd1) - b0 * (x.x_l - xd);
    let alpha = c * c * ((v + w2 * t + 2.0 * w1 * om / (c * c)) / lift - 2.0 * om * om * s / (c * c * c));
    input_for_tension(x, lift / c, alpha, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::transformed_dynamics;

    #[test]
    fn expansion_of_double_root() {
        assert_eq!(expand(&[-2.0, -2.0]), vec![4.0, 4.0]);
        let spec = ContinuousSpec::uniform(-1.0).unwrap();
        assert_eq!(spec.x_l, [1.0, 4.0, 6.0, 4.0]);
    }

    #[test]
    fn rejects_unstable_pole() {
        assert!(ContinuousSpec::from_roots([-1.0, -1.0, 0.5, -1.0], [-1.0, -1.0]).is_err());
    }

    #[test]
    fn rest_gives_holding_input() {
        let params = CraneParams::default();
        let y = FlatOutput::new(0.2, 0.7);
        let mut r = [FlatOutput::default(); 5];
        r[0] = y;
        let u = emulated_continuous_controller(
            &TransformedState::rest(y),
            &r,
            &ContinuousSpec::uniform(-15.0).unwrap(),
            &params,
        )
        .unwrap();
        assert!(u.force.abs() < 1e-12);
        assert!((u.torque - params.holding_torque()).abs() < 1e-12);
    }

    #[test]
    fn realizes_the_vertical_chain() {
        let params = CraneParams::default();
        let spec = ContinuousSpec::uniform(-5.0).unwrap();
        let x = TransformedState {
            x_l: 0.3,
            y_l: 0.65,
            v_lx: 0.1,
            v_ly: -0.05,
            theta: 0.1,
            omega_theta: 0.2,
        };
        let r = [FlatOutput::new(0.31, 0.6), FlatOutput::default(), FlatOutput::default(), FlatOutput::default(), FlatOutput::default()];
        let u = emulated_continuous_controller(&x, &r, &spec, &params).unwrap();
        let d = transformed_dynamics(&x, &u, &params).unwrap();
        let want = -spec.y_l[1] * x.v_ly - spec.y_l[0] * (x.y_l - 0.6);
        assert!((d[3] - want).abs() < 1e-10, "{} vs {want}", d[3]);
        // ẍ = (g - ÿ)·tanθ holds by the constraint
        assert!((d[2] - (params.gravity - d[3]) * x.theta.tan()).abs() < 1e-10);
    }
}
