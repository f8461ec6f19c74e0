use crate::model::FlatOutput;

/// Degree-7 rest-to-rest blend `s(τ) = 35τ⁴ - 84τ⁵ + 70τ⁶ - 20τ⁷` and its
/// first four derivatives, constant outside `[0, 1]`.
pub fn blend(tau: f64) -> [f64; 5] {
    if tau <= 0.0 {
        return [0.0; 5];
    }
    if tau >= 1.0 {
        return [1.0, 0.0, 0.0, 0.0, 0.0];
    }
    let t = tau;
    let t2 = t * t;
    let t3 = t2 * t;
    [
        t2 * t2 * (35.0 + t * (-84.0 + t * (70.0 - 20.0 * t))),
        t3 * (140.0 + t * (-420.0 + t * (420.0 - 140.0 * t))),
        t2 * (420.0 + t * (-1680.0 + t * (2100.0 - 840.0 * t))),
        t * (840.0 + t * (-5040.0 + t * (8400.0 - 4200.0 * t))),
        840.0 + t * (-10080.0 + t * (25200.0 - 16800.0 * t)),
    ]
}

/// Continuous rest-to-rest transition `y0 -> y1` over `duration`, starting at `start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolynomialTransition {
    pub y0: FlatOutput,
    pub y1: FlatOutput,
    pub duration: f64,
    pub start: f64,
}

impl PolynomialTransition {
    /// Value and time derivatives up to order four at time `t`.
    pub fn derivatives(&self, t: f64) -> [FlatOutput; 5] {
        let s = blend((t - self.start) / self.duration);
        let dx = self.y1.x_l - self.y0.x_l;
        let dy = self.y1.y_l - self.y0.y_l;
        let mut out = [FlatOutput::default(); 5];
        let mut scale = 1.0;
        for i in 0..5 {
            out[i] = if i == 0 {
                self.position(t)
            } else {
                FlatOutput::new(s[i] * dx * scale, s[i] * dy * scale)
            };
            scale /= self.duration;
        }
        out
    }

    pub fn position(&self, t: f64) -> FlatOutput {
        let s = blend((t - self.start) / self.duration)[0];
        if s == 1.0 {
            return self.y1;
        }
        FlatOutput::new(
            self.y0.x_l + s * (self.y1.x_l - self.y0.x_l),
            self.y0.y_l + s * (self.y1.y_l - self.y0.y_l),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_is_half() {
        assert_eq!(blend(0.5)[0], 0.5);
    }

    #[test]
    fn endpoints_are_exact() {
        assert_eq!(blend(0.0), [0.0; 5]);
        assert_eq!(blend(1.0)[0], 1.0);
        let near = blend(1.0 - 1e-9);
        assert!((near[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-6;
        for tau in [0.1, 0.37, 0.5, 0.81] {
            let a = blend(tau - h);
            let b = blend(tau + h);
            for i in 0..4 {
                let fd = (b[i] - a[i]) / (2.0 * h);
                assert!((fd - blend(tau)[i + 1]).abs() < 1e-5 * (1.0 + fd.abs()), "order {i} at {tau}");
            }
        }
    }
}
