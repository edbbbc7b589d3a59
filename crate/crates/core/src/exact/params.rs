use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Breather parameters `(α, β, μ, x₁, x₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreatherParams {
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    pub x1: f64,
    pub x2: f64,
}

impl BreatherParams {
    pub fn new(alpha: f64, beta: f64, mu: f64) -> Result<Self> {
        Self::with_shifts(alpha, beta, mu, 0.0, 0.0)
    }

    pub fn with_shifts(alpha: f64, beta: f64, mu: f64, x1: f64, x2: f64) -> Result<Self> {
        let p = Self { alpha, beta, mu, x1, x2 };
        p.validate()?;
        Ok(p)
    }

    /// Parameters at `μ = fraction · μ_max`.
    pub fn at_mu_fraction(alpha: f64, beta: f64, fraction: f64) -> Result<Self> {
        Self::new(alpha, beta, fraction * ((alpha * alpha + beta * beta) / 2.0).sqrt())
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.alpha, self.beta, self.mu, self.x1, self.x2];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::ParameterDomain("non-finite parameter".into()));
        }
        if self.alpha == 0.0 || self.beta == 0.0 {
            return Err(Error::ParameterDomain(format!(
                "alpha and beta must be nonzero (alpha = {}, beta = {})",
                self.alpha, self.beta
            )));
        }
        if self.big_delta() <= 0.0 {
            return Err(Error::ParameterDomain(format!(
                "alpha^2 + beta^2 - 2 mu^2 = {} must be positive",
                self.big_delta()
            )));
        }
        Ok(())
    }

    pub fn shifted(&self, x1: f64, x2: f64) -> Self {
        Self { x1, x2, ..*self }
    }

    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        let p = Self { mu, ..*self };
        p.validate()?;
        Ok(p)
    }

    pub fn delta(&self) -> f64 {
        self.alpha * self.alpha - 3.0 * self.beta * self.beta
    }

    pub fn gamma(&self) -> f64 {
        3.0 * self.alpha * self.alpha - self.beta * self.beta
    }

    /// `Δ = α² + β² − 2μ²`.
    pub fn big_delta(&self) -> f64 {
        self.alpha * self.alpha + self.beta * self.beta - 2.0 * self.mu * self.mu
    }

    pub fn mu_max(&self) -> f64 {
        ((self.alpha * self.alpha + self.beta * self.beta) / 2.0).sqrt()
    }

    pub fn a2b2(&self) -> f64 {
        self.alpha * self.alpha + self.beta * self.beta
    }

    /// Time period and the spatial shift accumulated over one period.
    pub fn period(&self) -> (f64, f64) {
        let t = (2.0 * PI / (self.alpha * (self.gamma() - self.delta()))).abs();
        (t, -self.gamma() * t)
    }

    /// Center of the envelope `cosh(β y₂)` at time `t`.
    pub fn center(&self, t: f64) -> f64 {
        -self.gamma() * t - self.x2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonParams {
    pub c: f64,
    pub mu: f64,
}

impl SolitonParams {
    pub fn new(c: f64, mu: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite() && mu.is_finite()) {
            return Err(Error::ParameterDomain(format!("soliton needs c > 0 (c = {c}, mu = {mu})")));
        }
        Ok(Self { c, mu })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoublePoleParams {
    pub beta: f64,
    pub mu: f64,
    pub x1: f64,
    pub x2: f64,
}

impl DoublePoleParams {
    pub fn new(beta: f64, mu: f64, x1: f64, x2: f64) -> Result<Self> {
        let p = Self { beta, mu, x1, x2 };
        if beta == 0.0 || !beta.is_finite() || !mu.is_finite() {
            return Err(Error::ParameterDomain("double pole needs finite nonzero beta".into()));
        }
        if p.delta0() <= 0.0 {
            return Err(Error::ParameterDomain(format!(
                "beta^2 - 2 mu^2 = {} must be positive",
                p.delta0()
            )));
        }
        Ok(p)
    }

    pub fn delta0(&self) -> f64 {
        self.beta * self.beta - 2.0 * self.mu * self.mu
    }
}

/// Value, x-derivatives through order four, and time derivative at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Jet {
    pub value: f64,
    pub dx: [f64; 4],
    pub dt: f64,
}

impl Jet {
    pub fn constant(value: f64) -> Self {
        Self { value, ..Self::default() }
    }

    /// `∂ₓⁿ`, with `n = 0` the value.
    pub fn d(&self, n: usize) -> f64 {
        if n == 0 {
            self.value
        } else {
            self.dx[n - 1]
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            value: s * self.value,
            dx: self.dx.map(|v| s * v),
            dt: s * self.dt,
        }
    }

    pub fn add(&self, o: &Jet) -> Self {
        let mut dx = self.dx;
        for (a, b) in dx.iter_mut().zip(o.dx) {
            *a += b;
        }
        Self { value: self.value + o.value, dx, dt: self.dt + o.dt }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.dt.is_finite() && self.dx.iter().all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_quantities() {
        let p = BreatherParams::new(1.0, 1.0, 0.5).unwrap();
        assert_eq!(p.delta(), -2.0);
        assert_eq!(p.gamma(), 2.0);
        assert_eq!(p.big_delta(), 1.5);
        assert_eq!(p.mu_max(), 1.0);
        let (t, l) = p.period();
        assert!((t - PI / 2.0).abs() < 1e-15);
        assert!((l + PI).abs() < 1e-15);
    }

    #[test]
    fn rejects_inadmissible() {
        assert!(BreatherParams::new(1.0, 1.0, 1.0).is_err());
        assert!(BreatherParams::new(0.0, 1.0, 0.1).is_err());
        assert!(BreatherParams::new(1.0, 1.0, f64::NAN).is_err());
        assert!(SolitonParams::new(0.0, 0.3).is_err());
        assert!(DoublePoleParams::new(1.0, 0.8, 0.0, 0.0).is_err());
    }

    #[test]
    fn period_is_positive_for_negative_alpha() {
        let p = BreatherParams::new(-0.5, 2.0, 0.3).unwrap();
        assert!(p.period().0 > 0.0);
    }
}
