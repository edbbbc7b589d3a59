use std::f64::consts::{PI, SQRT_2};

use crate::ad::{Dual, Real};
use crate::error::{Error, Result};
use crate::fields::{Field, Grid};

use super::params::{BreatherParams, Jet};
use super::phase::{fg_series, Phase};

pub const TWO_SQRT_2: f64 = 2.0 * SQRT_2;

/// Distance (in units of `1/|β|`) of the left anchor used to fix the branch
/// of `arctan(G/F)`.
pub const ANCHOR_DECAY: f64 = 40.0;

/// `F`, `G` and their jets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FgJets {
    pub f: Jet,
    pub g: Jet,
}

/// `∂ₓⁿ` of the field `2√2 ∂ₓ θ` differentiated `d1`, `d2` times in the shifts.
fn jet_from<T: Real>(ph: &Phase<T>, d1: usize, d2: usize) -> [T; 6] {
    let c = TWO_SQRT_2;
    [
        ph.theta(1, 0, d1, d2).scale(c),
        ph.theta(2, 0, d1, d2).scale(c),
        ph.theta(3, 0, d1, d2).scale(c),
        ph.theta(4, 0, d1, d2).scale(c),
        ph.theta(5, 0, d1, d2).scale(c),
        ph.theta(1, 1, d1, d2).scale(c),
    ]
}

fn to_jet(v: [f64; 6]) -> Jet {
    Jet { value: v[0], dx: [v[1], v[2], v[3], v[4]], dt: v[5] }
}

fn tangent_jet(v: [Dual; 6]) -> Jet {
    Jet { value: v[0].d, dx: [v[1].d, v[2].d, v[3].d, v[4].d], dt: v[5].d }
}

/// Jet of `∂_{x₁}^{d1} ∂_{x₂}^{d2} B` from a precomputed phase.
pub fn jet_of(ph: &Phase, d1: usize, d2: usize) -> Jet {
    to_jet(jet_from(ph, d1, d2))
}

pub fn breather_fg(p: &BreatherParams, t: f64, x: f64) -> Result<FgJets> {
    p.validate()?;
    let s = fg_series(p, t, x, 5);
    let (d, g) = (p.delta(), p.gamma());
    let pick = |imag: bool| {
        let get = |dx: usize, dt: usize| {
            let (re, im) = s.apply(&crate::ad::PhaseOperator::new(dx, dt, 0, 0, d, g));
            if imag {
                im
            } else {
                re
            }
        };
        Jet { value: get(0, 0), dx: [get(1, 0), get(2, 0), get(3, 0), get(4, 0)], dt: get(0, 1) }
    };
    Ok(FgJets { f: pick(false), g: pick(true) })
}

/// `B = 2√2 ∂ₓ arctan(G/F)` with jets through `∂ₓ⁴` and `∂ₜ`.
pub fn gardner_breather(p: &BreatherParams, t: f64, x: f64) -> Result<Jet> {
    p.validate()?;
    Ok(jet_of(&Phase::of(p, t, x, 5), 0, 0))
}

/// Any mixed derivative `∂ₓᵃ ∂ₜᵇ ∂_{x₁}ᶜ ∂_{x₂}ᵈ B`.
pub fn breather_derivative(p: &BreatherParams, t: f64, x: f64, dx: usize, dt: usize, d1: usize, d2: usize) -> f64 {
    let ph = Phase::of(p, t, x, 1 + dx + dt + d1 + d2);
    TWO_SQRT_2 * ph.theta(1 + dx, dt, d1, d2)
}

/// `(B₁, B₂) = (∂_{x₁} B, ∂_{x₂} B)`.
pub fn kernel_directions(p: &BreatherParams, t: f64, x: f64) -> Result<(Jet, Jet)> {
    p.validate()?;
    let ph = Phase::of(p, t, x, 6);
    Ok((jet_of(&ph, 1, 0), jet_of(&ph, 0, 1)))
}

/// `(Λ_α B, Λ_β B) = (∂_α B, ∂_β B)`.
pub fn scaling_directions(p: &BreatherParams, t: f64, x: f64) -> Result<(Jet, Jet)> {
    p.validate()?;
    let c = Dual::cst;
    let pa = Phase::breather(Dual::variable(p.alpha), c(p.beta), c(p.mu), c(p.x1), c(p.x2), t, x, 5);
    let pb = Phase::breather(c(p.alpha), Dual::variable(p.beta), c(p.mu), c(p.x1), c(p.x2), t, x, 5);
    Ok((tangent_jet(jet_from(&pa, 0, 0)), tangent_jet(jet_from(&pb, 0, 0))))
}

/// `B₀ = (α Λ_β B + β Λ_α B) / (8αβ(α²+β²))`.
pub fn b_zero(p: &BreatherParams, t: f64, x: f64) -> Result<Jet> {
    let (la, lb) = scaling_directions(p, t, x)?;
    let k = 1.0 / (8.0 * p.alpha * p.beta * p.a2b2());
    Ok(lb.scale(p.alpha * k).add(&la.scale(p.beta * k)))
}

/// mKdV breather with boundary value `μ`: `μ + B(t, x − 3μ²t)`.
pub fn mkdv_nvbc_breather(p: &BreatherParams, t: f64, x: f64) -> Result<Jet> {
    let mut j = gardner_breather(p, t, x - 3.0 * p.mu * p.mu * t)?;
    j.value += p.mu;
    j.dt -= 3.0 * p.mu * p.mu * j.dx[0];
    Ok(j)
}

/// `(T, L)` with `B(t + T, x) = B(t, x − L)`.
pub fn breather_period(p: &BreatherParams) -> (f64, f64) {
    p.period()
}

/// Left anchor where the branch of the angle is fixed to its principal value.
pub fn angle_anchor(p: &BreatherParams, t: f64) -> f64 {
    p.center(t) - ANCHOR_DECAY / p.beta.abs()
}

/// Continuous angle `θ` of `(F, G)` at each of `xs` (ascending), continued
/// from the principal value at the left anchor.
pub fn tracked_angle(p: &BreatherParams, t: f64, xs: &[f64]) -> Result<Vec<f64>> {
    p.validate()?;
    if xs.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::ParameterDomain("tracking abscissae must be ascending".into()));
    }
    let mut out = Vec::with_capacity(xs.len());
    let Some(&first) = xs.first() else { return Ok(out) };
    let mut x = angle_anchor(p, t).min(first);
    let mut ph = Phase::of(p, t, x, 2);
    let mut th = ph.principal_angle();
    for &target in xs {
        while x < target {
            let (d1, d2) = (ph.theta(1, 0, 0, 0), ph.theta(2, 0, 0, 0));
            let mut h = (target - x).min(0.25 / (d1.abs() + d2.abs().sqrt() + 1e-9)).min(0.5);
            loop {
                let pred = th + d1 * h + 0.5 * d2 * h * h;
                let cand = Phase::of(p, t, x + h, 2);
                let a = cand.principal_angle();
                let lifted = a + 2.0 * PI * ((pred - a) / (2.0 * PI)).round();
                if (lifted - pred).abs() < 0.2 {
                    x += h;
                    th = lifted;
                    ph = cand;
                    break;
                }
                h *= 0.5;
                if h < 1e-12 {
                    return Err(Error::BranchTracking { x });
                }
            }
        }
        out.push(th);
    }
    Ok(out)
}

/// `B̃ = 2√2 arctan(G/F)` on the continuous branch; `∂ₓ B̃ = B`.
pub fn b_tilde(p: &BreatherParams, t: f64, x: f64) -> Result<f64> {
    Ok(TWO_SQRT_2 * tracked_angle(p, t, &[x])?[0])
}

pub fn b_tilde_on_grid(p: &BreatherParams, t: f64, grid: &Grid) -> Result<Field> {
    let th = tracked_angle(p, t, &grid.nodes())?;
    Field::new(grid.clone(), th.into_iter().map(|v| TWO_SQRT_2 * v).collect())
}

/// Partial mass `𝓜 = 2β + ∂ₓ log(G² + F²) − μB̃`, i.e. `½∫_{−∞}^x B²`.
pub fn partial_mass(p: &BreatherParams, t: f64, x: f64) -> Result<f64> {
    let bt = b_tilde(p, t, x)?;
    let ph = Phase::of(p, t, x, 1);
    Ok(2.0 * p.beta + ph.log_density(1, 0, 0, 0) - p.mu * bt)
}

/// `∂ₜ 𝓜 = ∂ₓ∂ₜ log(G² + F²) − μ B̃ₜ`; branch independent.
pub fn partial_mass_dt(p: &BreatherParams, t: f64, x: f64) -> Result<f64> {
    p.validate()?;
    let ph = Phase::of(p, t, x, 2);
    Ok(ph.log_density(1, 1, 0, 0) - p.mu * TWO_SQRT_2 * ph.theta(0, 1, 0, 0))
}

/// Samples a jet-valued function at every grid node, keeping slot `n`.
pub fn sample<F>(grid: &Grid, n: usize, f: F) -> Result<Field>
where
    F: Fn(f64) -> Result<Jet>,
{
    let vals = grid.nodes().into_iter().map(|x| f(x).map(|j| j.d(n))).collect::<Result<Vec<_>>>()?;
    Field::new(grid.clone(), vals)
}

/// Jets at every grid node.
pub fn sample_jets<F>(grid: &Grid, f: F) -> Result<Vec<Jet>>
where
    F: Fn(f64) -> Result<Jet>,
{
    grid.nodes().into_iter().map(f).collect()
}

pub fn sample_breather(p: &BreatherParams, t: f64, grid: &Grid) -> Result<Field> {
    sample(grid, 0, |x| gardner_breather(p, t, x))
}

/// `B(t; x₁, x₂)` on the grid, evaluated at the periodic image of each node
/// nearest the moving envelope.
pub fn sample_breather_wrapped(p: &BreatherParams, t: f64, grid: &Grid) -> Result<Field> {
    let c = p.center(t);
    sample(grid, 0, |x| gardner_breather(p, t, grid.wrap_near(x, c)))
}

/// Decay length, in units of `1/|β|`, kept between the envelope center and the
/// domain edge by [`resolved_grid`].
pub const RESOLVED_DECAY: f64 = 36.0;

/// Grid on which the breather at `t = 0` is resolved.
///
/// `L = max(L_min, 36/|β|)` keeps the periodic wrap below roundoff even for
/// fourth derivatives; `N = 1024·2ᵏ` (at most 16384) is the smallest size on
/// which the spectral `∂ₓ⁴B` matches the exact jet to `1e−9` of its sup.
pub fn resolved_grid(p: &BreatherParams, min_half_length: f64) -> Result<Grid> {
    let half = min_half_length.max(RESOLVED_DECAY / p.beta.abs());
    let mut n = crate::fields::DEFAULT_POINTS;
    loop {
        let g = Grid::new(half, n)?;
        let jets = sample_jets(&g, |x| gardner_breather(p, 0.0, x))?;
        let b = Field::new(g, jets.iter().map(|j| j.value).collect())?;
        let d4 = crate::fields::derivative(&b, 4)?;
        let sup = jets.iter().map(|j| j.dx[3].abs()).fold(0.0, f64::max);
        let err = d4.values().iter().zip(&jets).map(|(v, j)| (v - j.dx[3]).abs()).fold(0.0, f64::max);
        if err <= 1e-9 * sup || n >= 16384 {
            return Ok(g);
        }
        n *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p0() -> BreatherParams {
        BreatherParams::with_shifts(1.0, 1.0, 0.5, 0.3, -0.2).unwrap()
    }

    #[test]
    fn mu_zero_is_the_mkdv_breather() {
        let p = BreatherParams::new(0.7, 1.2, 0.0).unwrap();
        let (t, x) = (0.4, 0.9);
        let y1 = x + p.delta() * t;
        let y2 = x + p.gamma() * t;
        let h = 1e-5;
        let ang = |x: f64| {
            let y1 = x + p.delta() * t;
            let y2 = x + p.gamma() * t;
            ((p.beta / p.alpha) * (p.alpha * y1).sin() / (p.beta * y2).cosh()).atan()
        };
        let _ = (y1, y2);
        let fd = TWO_SQRT_2 * (ang(x + h) - ang(x - h)) / (2.0 * h);
        let b = gardner_breather(&p, t, x).unwrap().value;
        assert!((b - fd).abs() < 1e-8, "{b} vs {fd}");
    }

    #[test]
    fn tracked_angle_derivative_is_breather() {
        let p = BreatherParams::at_mu_fraction(0.5, 2.0, 0.9).unwrap();
        let xs: Vec<f64> = (0..400).map(|i| -10.0 + 0.05 * i as f64).collect();
        let th = tracked_angle(&p, 0.0, &xs).unwrap();
        for i in 1..xs.len() - 1 {
            let fd = TWO_SQRT_2 * (th[i + 1] - th[i - 1]) / 0.1;
            let b = gardner_breather(&p, 0.0, xs[i]).unwrap().value;
            assert!((fd - b).abs() < 0.05 * (1.0 + b.abs()), "x = {}", xs[i]);
        }
    }

    #[test]
    fn partial_mass_vanishes_on_the_left() {
        let p = p0();
        assert!(partial_mass(&p, 0.0, -40.0).unwrap().abs() < 1e-7);
    }

    #[test]
    fn b_zero_combination() {
        let p = p0();
        let (la, lb) = scaling_directions(&p, 0.1, 0.2).unwrap();
        let b0 = b_zero(&p, 0.1, 0.2).unwrap();
        let want = (la.value + lb.value) / 16.0;
        assert!((b0.value - want).abs() < 1e-14);
    }

    #[test]
    fn fg_values() {
        let p = p0();
        let j = breather_fg(&p, 0.0, 0.0).unwrap();
        let s2 = 2f64.sqrt();
        let big = p.big_delta();
        let (y1, y2) = (p.x1, p.x2);
        let g = s2 / big.sqrt() * y1.sin() - s2 * 0.5 * y2.exp() / big;
        let f = y2.cosh() - s2 * 0.5 * (y1.cos() - y1.sin()) / (s2 * big.sqrt());
        assert!((j.g.value - g).abs() < 1e-14);
        assert!((j.f.value - f).abs() < 1e-14);
    }
}
