use std::f64::consts::SQRT_2;

use crate::ad::Series2;
use crate::error::Result;

use super::params::{DoublePoleParams, Jet};
use super::phase::Phase;

fn phase(p: &DoublePoleParams, t: f64, x: f64, order: usize) -> Phase {
    let (b, mu) = (p.beta, p.mu);
    let d0 = p.delta0();
    let y1 = x - 3.0 * b * b * t + p.x1;
    let y2 = x - b * b * t + p.x2;
    let sigma = if b * y2 >= 0.0 { 1.0 } else { -1.0 };
    let expo = |a: f64| {
        let mut v = vec![(a * y2).exp()];
        for j in 1..=order {
            let last = v[j - 1];
            v.push(last * a / j as f64);
        }
        v
    };
    let (e_s, e_p, e_m) = (expo(-sigma * b), expo((1.0 - sigma) * b), expo((-1.0 - sigma) * b));
    let sd = d0.sqrt();
    let mut s = Series2::<f64>::zero(order);
    for i in 0..=order.min(1) {
        for j in 0..=(order - i) {
            // (1 − β(y₁ + h₁)) and β²(y₁ + h₁), linear in h₁
            let lin_f = if i == 0 { 1.0 - b * y1 } else { -b };
            let lin_g = if i == 0 { b * b * y1 } else { b * b };
            let mut f = -SQRT_2 * mu * lin_f / sd * e_s[j];
            let mut g = lin_g / sd * e_s[j];
            if i == 0 {
                f += 0.5 * (e_p[j] + e_m[j]);
                g -= SQRT_2 * mu * b / d0 * e_p[j];
            }
            s.set(i, j, f, g);
        }
    }
    let mut phi = s.ln();
    phi.add_real(0, 0, sigma * b * y2);
    phi.add_real(0, 1, sigma * b);
    Phase::from_parts(phi, -3.0 * b * b, -b * b)
}

/// Double-pole solution `2√2 ∂ₓ arctan(G/F)`.
pub fn double_pole(p: &DoublePoleParams, t: f64, x: f64) -> Result<f64> {
    Ok(double_pole_jet(p, t, x)?.value)
}

pub fn double_pole_jet(p: &DoublePoleParams, t: f64, x: f64) -> Result<Jet> {
    DoublePoleParams::new(p.beta, p.mu, p.x1, p.x2)?;
    Ok(super::breather::jet_of(&phase(p, t, x, 5), 0, 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_formula() {
        let p = DoublePoleParams::new(1.0, 0.5, 0.2, -0.1).unwrap();
        let ang = |x: f64| {
            let (y1, y2) = (x + 0.2, x - 0.1);
            let d0 = 0.5f64;
            let g = y1 / d0.sqrt() - SQRT_2 * 0.5 * y2.exp() / d0;
            let f = y2.cosh() - SQRT_2 * 0.5 * (1.0 - y1) / d0.sqrt();
            g.atan2(f)
        };
        for &x in &[-3.0, -0.5, 0.4, 2.0] {
            let h = 1e-5;
            let fd = 2.0 * SQRT_2 * (ang(x + h) - ang(x - h)) / (2.0 * h);
            let v = double_pole(&p, 0.0, x).unwrap();
            assert!((v - fd).abs() < 1e-7, "{v} vs {fd}");
        }
    }
}
