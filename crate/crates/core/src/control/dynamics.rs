//! Linear tracking error dynamics imposed on the linearized loop.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};

/// Error dynamics of one flat-output channel,
/// `e[n] + a_{n-1}·e[n-1] + ... + a_0·e[0] + a_I·e_I = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDynamics {
    coeffs: Vec<f64>,
    integral_gain: Option<f64>,
}

impl ChannelDynamics {
    /// Coefficients `a_0, ..., a_{n-1}` without integral part.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        let ch = Self {
            coeffs,
            integral_gain: None,
        };
        ch.check_finite()?;
        ch.validate(1.0)?;
        Ok(ch)
    }

    /// Coefficients and integral gain; stability depends on `ts`.
    pub fn with_integral(coeffs: Vec<f64>, integral_gain: f64, ts: f64) -> Result<Self> {
        let ch = Self {
            coeffs,
            integral_gain: Some(integral_gain),
        };
        ch.check_finite()?;
        ch.validate(ts)?;
        Ok(ch)
    }

    /// Deadbeat dynamics of the given order.
    pub fn deadbeat(order: usize) -> Self {
        Self {
            coeffs: vec![0.0; order],
            integral_gain: None,
        }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn integral_gain(&self) -> Option<f64> {
        self.integral_gain
    }

    fn check_finite(&self) -> Result<()> {
        if self.coeffs.is_empty() {
            return Err(Error::InvalidDynamics("empty coefficient list".into()));
        }
        if self.coeffs.iter().chain(&self.integral_gain).any(|c| !c.is_finite()) {
            return Err(Error::InvalidDynamics(format!("non-finite coefficients in {self:?}")));
        }
        Ok(())
    }

    /// Companion matrix of the error recursion, extended by the integrator
    /// state `e_I` in the first row when an integral gain is present.
    pub fn companion(&self, ts: f64) -> DMatrix<f64> {
        let n = self.order();
        match self.integral_gain {
            None => {
                let mut m = DMatrix::zeros(n, n);
                for i in 0..n - 1 {
                    m[(i, i + 1)] = 1.0;
                }
                for (i, a) in self.coeffs.iter().enumerate() {
                    m[(n - 1, i)] = -a;
                }
                m
            }
            Some(gain) => {
                let mut m = DMatrix::zeros(n + 1, n + 1);
                m[(0, 0)] = 1.0;
                m[(0, 1)] = ts;
                for i in 1..n {
                    m[(i, i + 1)] = 1.0;
                }
                m[(n, 0)] = -gain;
                for (i, a) in self.coeffs.iter().enumerate() {
                    m[(n, i + 1)] = -a;
                }
                m
            }
        }
    }

    pub fn eigenvalues(&self, ts: f64) -> Vec<Complex<f64>> {
        self.companion(ts).complex_eigenvalues().iter().copied().collect()
    }

    /// Adds an integral part that moves the integrator pole from 1 to
    /// `root`, keeping the coefficients: `a_I = (1 - root)·p(root)/ts`.
    pub fn with_integral_root(&self, root: f64, ts: f64) -> Result<Self> {
        if !(root.abs() < 1.0) {
            return Err(Error::InvalidDynamics(format!(
                "integral root {root} is not strictly inside the unit circle"
            )));
        }
        if !(ts > 0.0) {
            return Err(Error::InvalidDynamics(format!("sampling time {ts} must be positive")));
        }
        let p_at_root = self.coeffs.iter().rev().fold(1.0, |acc, a| acc * root + a);
        Self::with_integral(self.coeffs.clone(), (1.0 - root) * p_at_root / ts, ts)
    }

    /// All closed-loop eigenvalues strictly inside the unit circle, with the
    /// integral part switched on and, if present, switched off.
    pub fn validate(&self, ts: f64) -> Result<()> {
        let radius = |m: DMatrix<f64>| m.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut worst = radius(self.companion(ts));
        if self.integral_gain.is_some() {
            let base = Self {
                coeffs: self.coeffs.clone(),
                integral_gain: None,
            };
            worst = worst.max(radius(base.companion(ts)));
        }
        if worst < 1.0 {
            Ok(())
        } else {
            Err(Error::InvalidDynamics(format!(
                "spectral radius {worst} >= 1 for {self:?}"
            )))
        }
    }

    /// Next error sample from the recursion, given `errors[0..order]` and the
    /// matching integrator value.
    pub(crate) fn next_error(&self, errors: &[f64], integral: f64) -> f64 {
        let lin: f64 = self.coeffs.iter().zip(errors).map(|(a, e)| a * e).sum();
        -lin - self.integral_gain.unwrap_or(0.0) * integral
    }

    /// Extends `known = e[0..order]` by the recursion up to `len` samples.
    /// The integrator runs along the predicted errors while `active`.
    pub(crate) fn extend_errors(
        &self,
        known: &[f64],
        integral: f64,
        active: bool,
        ts: f64,
        len: usize,
    ) -> Vec<f64> {
        let n = self.order();
        debug_assert_eq!(known.len(), n);
        let mut e = known.to_vec();
        let mut acc = integral;
        while e.len() < len {
            let shift = e.len() - n;
            let next = self.next_error(&e[shift..], acc);
            if active {
                acc += ts * e[shift];
            }
            e.push(next);
        }
        e
    }
}

/// Expands `prod (z - root)` into the monic coefficients `a_0, ..., a_{n-1}`.
fn monic_coefficients(roots: &[Complex<f64>]) -> Result<Vec<f64>> {
    let mut poly = vec![Complex::new(1.0, 0.0)];
    for root in roots {
        let mut next = vec![Complex::new(0.0, 0.0); poly.len() + 1];
        for (i, c) in poly.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= c * root;
        }
        poly = next;
    }
    let imag = poly.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    if imag > 1e-9 {
        return Err(Error::InvalidDynamics(format!(
            "complex roots are not in conjugate pairs (imaginary residue {imag:e})"
        )));
    }
    poly.pop();
    Ok(poly.into_iter().map(|c| c.re).collect())
}

fn check_roots(roots: &[Complex<f64>]) -> Result<()> {
    if roots.is_empty() {
        return Err(Error::InvalidDynamics("no roots given".into()));
    }
    if let Some(bad) = roots.iter().find(|r| !(r.norm() < 1.0)) {
        return Err(Error::InvalidDynamics(format!(
            "root {bad} is not strictly inside the unit circle"
        )));
    }
    Ok(())
}

/// Error dynamics with the requested roots.
pub fn pole_place(roots: &[Complex<f64>]) -> Result<ChannelDynamics> {
    check_roots(roots)?;
    ChannelDynamics::new(monic_coefficients(roots)?)
}

/// Same as [`pole_place`] for real roots.
pub fn pole_place_real(roots: &[f64]) -> Result<ChannelDynamics> {
    let roots: Vec<Complex<f64>> = roots.iter().map(|r| Complex::new(*r, 0.0)).collect();
    pole_place(&roots)
}

/// Error dynamics with integral part whose extended companion matrix has the
/// requested `order + 1` roots.
///
/// The extended characteristic polynomial is `(z - 1)·p(z) + a_I·ts`, so for a
/// target `q(z)` we take `a_I = q(1)/ts` and `p(z) = (q(z) - q(1))/(z - 1)`.
pub fn pole_place_with_integral(roots: &[Complex<f64>], ts: f64) -> Result<ChannelDynamics> {
    check_roots(roots)?;
    if roots.len() < 2 {
        return Err(Error::InvalidDynamics(
            "integral error dynamics need at least two roots".into(),
        ));
    }
    if !(ts > 0.0) {
        return Err(Error::InvalidDynamics(format!("sampling time {ts} must be positive")));
    }
    // q(z) = z^{n+1} + b_n z^n + ... + b_0, stored low to high with the leading 1
    let mut q = monic_coefficients(roots)?;
    q.push(1.0);
    let q_at_one: f64 = q.iter().sum();
    // synthetic division of q(z) - q(1) by (z - 1)
    let degree = q.len() - 1;
    let mut quotient = vec![0.0; degree];
    let mut carry = 0.0;
    for i in (1..=degree).rev() {
        carry += q[i];
        quotient[i - 1] = carry;
    }
    quotient.pop();
    ChannelDynamics::with_integral(quotient, q_at_one / ts, ts)
}

/// Same as [`pole_place_with_integral`] for real roots.
pub fn pole_place_with_integral_real(roots: &[f64], ts: f64) -> Result<ChannelDynamics> {
    let roots: Vec<Complex<f64>> = roots.iter().map(|r| Complex::new(*r, 0.0)).collect();
    pole_place_with_integral(&roots, ts)
}

/// Error dynamics of both flat-output channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorDynamicsSpec {
    pub x_l: ChannelDynamics,
    pub y_l: ChannelDynamics,
}

impl ErrorDynamicsSpec {
    pub fn new(x_l: ChannelDynamics, y_l: ChannelDynamics) -> Self {
        Self { x_l, y_l }
    }

    /// Same roots for every pole of both channels.
    pub fn uniform(root: f64, x_order: usize, y_order: usize) -> Result<Self> {
        Ok(Self {
            x_l: pole_place_real(&vec![root; x_order])?,
            y_l: pole_place_real(&vec![root; y_order])?,
        })
    }

    pub fn deadbeat(x_order: usize, y_order: usize) -> Self {
        Self {
            x_l: ChannelDynamics::deadbeat(x_order),
            y_l: ChannelDynamics::deadbeat(y_order),
        }
    }

    pub fn orders(&self) -> (usize, usize) {
        (self.x_l.order(), self.y_l.order())
    }

    pub fn validate(&self, ts: f64) -> Result<()> {
        self.x_l.validate(ts)?;
        self.y_l.validate(ts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deadbeat_from_zero_roots() {
        let ch = pole_place_real(&[0.0; 4]).unwrap();
        assert_eq!(ch.coeffs(), &[0.0; 4]);
    }

    #[test]
    fn binomial_expansion() {
        let ch = pole_place_real(&[0.5, 0.5]).unwrap();
        assert_eq!(ch.coeffs(), &[0.25, -1.0]);
    }

    #[test]
    fn conjugate_pair() {
        let roots = [Complex::new(0.3, 0.4), Complex::new(0.3, -0.4)];
        let ch = pole_place(&roots).unwrap();
        // z² - 0.6 z + 0.25
        assert!((ch.coeffs()[0] - 0.25).abs() < 1e-15);
        assert!((ch.coeffs()[1] + 0.6).abs() < 1e-15);
    }

    #[test]
    fn rejects_unpaired_complex_root() {
        assert!(pole_place(&[Complex::new(0.3, 0.4)]).is_err());
    }

    #[test]
    fn rejects_roots_on_or_outside_unit_circle() {
        assert!(pole_place_real(&[0.5, 1.0]).is_err());
        assert!(pole_place_real(&[-1.2]).is_err());
        assert!(ChannelDynamics::new(vec![1.0, 0.0]).is_err()); // z² + 1
    }

    #[test]
    fn integral_placement_matches_extended_matrix() {
        let ts = 0.01;
        let ch = pole_place_with_integral_real(&[0.5, 0.6, 0.7, 0.8, 0.9], ts).unwrap();
        assert_eq!(ch.order(), 4);
        let mut eig: Vec<f64> = ch.eigenvalues(ts).iter().map(|z| z.re).collect();
        eig.sort_by(f64::total_cmp);
        for (got, want) in eig.iter().zip([0.5, 0.6, 0.7, 0.8, 0.9]) {
            assert!((got - want).abs() < 1e-6, "{eig:?}");
        }
    }

    #[test]
    fn integral_root_keeps_base_dynamics() {
        let ts = 0.01;
        let base = pole_place_real(&[0.9; 4]).unwrap();
        let ch = base.with_integral_root(0.98, ts).unwrap();
        assert_eq!(ch.coeffs(), base.coeffs());
        let hit = ch.eigenvalues(ts).iter().any(|z| (z - Complex::new(0.98, 0.0)).norm() < 1e-6);
        assert!(hit, "{:?}", ch.eigenvalues(ts));
        ch.validate(ts).unwrap();
    }

    #[test]
    fn integral_root_rejected_when_extended_loop_is_unstable() {
        // a large integral gain pushes the remaining roots out
        let base = pole_place_real(&[0.9, 0.9]).unwrap();
        assert!(base.with_integral_root(-0.9, 0.01).is_err());
    }

    #[test]
    fn error_extension_follows_recursion() {
        let ch = pole_place_real(&[0.5, 0.5]).unwrap();
        let e = ch.extend_errors(&[1.0, 0.2], 0.0, false, 0.01, 5);
        for k in 0..3 {
            assert!((e[k + 2] - e[k + 1] + 0.25 * e[k]).abs() < 1e-15);
        }
    }
}
