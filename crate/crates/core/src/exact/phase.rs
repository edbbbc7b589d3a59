//! The complex phase `Φ = log(F + iG)` of a breather and its Taylor expansion
//! in `(y₁, y₂)`.
//!
//! `θ = Im Φ` is `arctan(G/F)` up to the branch and `Re Φ = ½ log(F² + G²)`.
//! `F` and `G` are rescaled by `e^{−|βy₂|}` before the logarithm so that
//! far-field evaluations do not overflow; the scale is restored exactly on
//! the real part.

use crate::ad::{PhaseOperator, Real, Series2};

use super::params::BreatherParams;

/// Coefficients `e^{a y} aʲ / j!` of `e^{a(y + h)}`.
fn expo<T: Real>(a: T, y: T, order: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(order + 1);
    let mut c = (a * y).exp();
    out.push(c);
    for j in 1..=order {
        c = c * a.scale(1.0 / j as f64);
        out.push(c);
    }
    out
}

/// Coefficients of `sin(α(y + h))` and `cos(α(y + h))`.
fn trig<T: Real>(alpha: T, y: T, order: usize) -> (Vec<T>, Vec<T>) {
    let (s, c) = ((alpha * y).sin(), (alpha * y).cos());
    let mut sin = Vec::with_capacity(order + 1);
    let mut cos = Vec::with_capacity(order + 1);
    let mut pow = T::cst(1.0);
    for i in 0..=order {
        if i > 0 {
            pow = pow * alpha.scale(1.0 / i as f64);
        }
        // derivatives cycle sin → cos → −sin → −cos
        let (ds, dc) = match i % 4 {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        };
        sin.push(pow * ds);
        cos.push(pow * dc);
    }
    (sin, cos)
}

/// Expansion of `Φ` about one point, with the phase velocities needed to
/// turn `(∂ₓ, ∂ₜ)` into `(∂₁, ∂₂)`.
#[derive(Debug, Clone)]
pub struct Phase<T: Real = f64> {
    series: Series2<T>,
    delta: T,
    gamma: T,
}

impl<T: Real> Phase<T> {
    pub(crate) fn from_parts(series: Series2<T>, delta: T, gamma: T) -> Self {
        Self { series, delta, gamma }
    }

    /// Breather phase with generic scalar parameters, so that `α`, `β` or `μ`
    /// may carry a derivative.
    pub fn breather(alpha: T, beta: T, mu: T, x1: T, x2: T, t: f64, x: f64, order: usize) -> Self {
        let a2 = alpha * alpha;
        let b2 = beta * beta;
        let delta = a2 - b2.scale(3.0);
        let gamma = a2.scale(3.0) - b2;
        let big = a2 + b2 - (mu * mu).scale(2.0);
        let r = (a2 + b2).sqrt();
        let sd = big.sqrt();
        let s2mu = mu.scale(std::f64::consts::SQRT_2);
        let c_g = beta * r / (alpha * sd);
        let c_f = s2mu * beta / (alpha * r * sd);
        let c_e = s2mu * beta / big;

        let y1 = T::cst(x) + delta.scale(t) + x1;
        let y2 = T::cst(x) + gamma.scale(t) + x2;
        let sigma = if (beta * y2).val() >= 0.0 { 1.0 } else { -1.0 };
        let (sn, cs) = trig(alpha, y1, order);
        let e_s = expo(beta.scale(-sigma), y2, order);
        let e_p = expo(beta.scale(1.0 - sigma), y2, order);
        let e_m = expo(beta.scale(-1.0 - sigma), y2, order);

        let mut s = Series2::zero(order);
        for i in 0..=order {
            for j in 0..=(order - i) {
                let trig_f = c_f * (alpha * cs[i] - beta * sn[i]);
                let mut f = -(trig_f * e_s[j]);
                let mut g = c_g * sn[i] * e_s[j];
                if i == 0 {
                    f = f + (e_p[j] + e_m[j]).scale(0.5);
                    g = g - c_e * e_p[j];
                }
                s.set(i, j, f, g);
            }
        }
        let mut phi = s.ln();
        phi.add_real(0, 0, (beta * y2).scale(sigma));
        phi.add_real(0, 1, beta.scale(sigma));
        Self { series: phi, delta, gamma }
    }

    fn op(&self, dx: usize, dt: usize, d1: usize, d2: usize) -> PhaseOperator<T> {
        PhaseOperator::new(dx, dt, d1, d2, self.delta, self.gamma)
    }

    /// `∂ₓᵃ ∂ₜᵇ ∂_{x₁}ᶜ ∂_{x₂}ᵈ θ` for `a + b + c + d ≥ 1`; branch-free.
    pub fn theta(&self, dx: usize, dt: usize, d1: usize, d2: usize) -> T {
        self.series.apply(&self.op(dx, dt, d1, d2)).1
    }

    /// `∂ₓᵃ ∂ₜᵇ ∂_{x₁}ᶜ ∂_{x₂}ᵈ log(F² + G²)`.
    pub fn log_density(&self, dx: usize, dt: usize, d1: usize, d2: usize) -> T {
        self.series.apply(&self.op(dx, dt, d1, d2)).0.scale(2.0)
    }

    /// Principal angle `atan2(G, F)` at the base point.
    pub fn principal_angle(&self) -> T {
        self.series.coeff(0, 0).1
    }

    pub fn order(&self) -> usize {
        self.series.order()
    }
}

impl Phase<f64> {
    pub fn of(p: &BreatherParams, t: f64, x: f64, order: usize) -> Self {
        Self::breather(p.alpha, p.beta, p.mu, p.x1, p.x2, t, x, order)
    }
}

/// Unscaled `F` and `G` with their expansions, for direct inspection.
pub(crate) fn fg_series(p: &BreatherParams, t: f64, x: f64, order: usize) -> Series2<f64> {
    let (a, b, mu) = (p.alpha, p.beta, p.mu);
    let big = p.big_delta();
    let r = p.a2b2().sqrt();
    let c_g = b * r / (a * big.sqrt());
    let c_f = 2f64.sqrt() * mu * b / (a * r * big.sqrt());
    let c_e = 2f64.sqrt() * mu * b / big;
    let y1 = x + p.delta() * t + p.x1;
    let y2 = x + p.gamma() * t + p.x2;
    let (sn, cs) = trig(a, y1, order);
    let e_p = expo(b, y2, order);
    let e_m = expo(-b, y2, order);
    let mut s = Series2::zero(order);
    for i in 0..=order {
        for j in 0..=(order - i) {
            let mut f = 0.0;
            let mut g = 0.0;
            if j == 0 {
                f -= c_f * (a * cs[i] - b * sn[i]);
                g += c_g * sn[i];
            }
            if i == 0 {
                f += 0.5 * (e_p[j] + e_m[j]);
                g -= c_e * e_p[j];
            }
            s.set(i, j, f, g);
        }
    }
    s
}
