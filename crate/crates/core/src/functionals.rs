//! Conserved functionals by quadrature, and their closed forms on solitons and
//! breathers.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{gardner_soliton, resolved_grid, sample_breather, BreatherParams, SolitonParams};
use crate::fields::{derivatives, integrate, Field, DEFAULT_HALF_LENGTH};

fn powers(w: &Field, f: impl Fn(f64) -> f64) -> f64 {
    integrate(&w.map(f))
}

/// `M[w] = ½∫w²`.
pub fn mass(w: &Field) -> f64 {
    0.5 * powers(w, |v| v * v)
}

/// `E_μ[w] = ½∫w_x² − μ∫w³ − ¼∫w⁴`.
pub fn energy(w: &Field, mu: f64) -> Result<f64> {
    let d = derivatives(w, 1)?;
    let e = d[0].zip_with(&d[1], |v, vx| 0.5 * vx * vx - mu * v * v * v - 0.25 * v.powi(4))?;
    Ok(integrate(&e))
}

/// `F_μ[w] = ½∫w_xx² − 5μ∫w w_x² + (5/2)μ²∫w⁴ − (5/2)∫w²w_x² + (3/2)μ∫w⁵ + ¼∫w⁶`.
pub fn f_functional(w: &Field, mu: f64) -> Result<f64> {
    let d = derivatives(w, 2)?;
    let (v, vx, vxx) = (d[0].values(), d[1].values(), d[2].values());
    let dens: Vec<f64> = (0..v.len())
        .map(|i| {
            let (u, ux, uxx) = (v[i], vx[i], vxx[i]);
            let u2 = u * u;
            0.5 * uxx * uxx - 5.0 * mu * u * ux * ux + 2.5 * mu * mu * u2 * u2 - 2.5 * u2 * ux * ux
                + 1.5 * mu * u2 * u2 * u
                + 0.25 * u2 * u2 * u2
        })
        .collect();
    Ok(integrate(&Field::new(*w.grid(), dens)?))
}

/// `H_μ = F_μ + 2(β²−α²)E_μ + (α²+β²)²M`.
pub fn lyapunov(w: &Field, p: &BreatherParams) -> Result<f64> {
    let (a2, b2) = (p.alpha * p.alpha, p.beta * p.beta);
    Ok(f_functional(w, p.mu)? + 2.0 * (b2 - a2) * energy(w, p.mu)? + (a2 + b2).powi(2) * mass(w))
}

/// `½∫(u² − μ²)`.
pub fn mass_nvbc(u: &Field, mu: f64) -> f64 {
    0.5 * powers(u, |v| v * v - mu * mu)
}

/// `½∫u_x² − ¼∫(u⁴ − μ⁴)`.
pub fn energy_nvbc(u: &Field, mu: f64) -> Result<f64> {
    let d = derivatives(u, 1)?;
    let e = d[0].zip_with(&d[1], |v, vx| 0.5 * vx * vx - 0.25 * (v.powi(4) - mu.powi(4)))?;
    Ok(integrate(&e))
}

/// Closed-form quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quantity {
    SolitonMass,
    SolitonEnergy,
    SolitonF,
    SolitonDMdc,
    BreatherMass,
    BreatherEnergy,
    BreatherF,
    BreatherH,
    DMdAlpha,
    DMdBeta,
    DEdAlpha,
    DEdBeta,
    QLambdaAlpha,
    QLambdaBeta,
    BZeroPairing,
}

impl Quantity {
    pub const ALL: [Quantity; 15] = [
        Quantity::SolitonMass,
        Quantity::SolitonEnergy,
        Quantity::SolitonF,
        Quantity::SolitonDMdc,
        Quantity::BreatherMass,
        Quantity::BreatherEnergy,
        Quantity::BreatherF,
        Quantity::BreatherH,
        Quantity::DMdAlpha,
        Quantity::DMdBeta,
        Quantity::DEdAlpha,
        Quantity::DEdBeta,
        Quantity::QLambdaAlpha,
        Quantity::QLambdaBeta,
        Quantity::BZeroPairing,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Quantity::SolitonMass => "soliton-mass",
            Quantity::SolitonEnergy => "soliton-energy",
            Quantity::SolitonF => "soliton-F",
            Quantity::SolitonDMdc => "soliton-dMdc",
            Quantity::BreatherMass => "breather-mass",
            Quantity::BreatherEnergy => "breather-energy",
            Quantity::BreatherF => "breather-F",
            Quantity::BreatherH => "breather-H",
            Quantity::DMdAlpha => "dM/dalpha",
            Quantity::DMdBeta => "dM/dbeta",
            Quantity::DEdAlpha => "dE/dalpha",
            Quantity::DEdBeta => "dE/dbeta",
            Quantity::QLambdaAlpha => "Q[LamA]",
            Quantity::QLambdaBeta => "Q[LamB]",
            Quantity::BZeroPairing => "<B0,B>",
        }
    }

    pub fn is_soliton(self) -> bool {
        matches!(
            self,
            Quantity::SolitonMass | Quantity::SolitonEnergy | Quantity::SolitonF | Quantity::SolitonDMdc
        )
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Quantity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL.into_iter().find(|q| q.id() == s).ok_or_else(|| Error::UnknownQuantity(s.to_string()))
    }
}

/// What a closed form is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    Soliton(SolitonParams),
    Breather(BreatherParams),
}

/// `arctan(2√2 μβ/Δ)`, the angle shared by all breather closed forms.
fn breather_angle(p: &BreatherParams) -> f64 {
    (2.0 * SQRT_2 * p.mu * p.beta / p.big_delta()).atan()
}

/// `μ · arctan(√c/(√2μ))`, extended by its limit at `μ = 0`.
fn soliton_angle(c: f64, mu: f64) -> f64 {
    if mu == 0.0 {
        0.0
    } else {
        (c.sqrt() / (SQRT_2 * mu)).atan()
    }
}

pub fn closed_form(q: Quantity, target: Profile) -> Result<f64> {
    match (q.is_soliton(), target) {
        (true, Profile::Soliton(s)) => soliton_closed(q, &s),
        (false, Profile::Breather(p)) => {
            p.validate()?;
            Ok(breather_closed(q, &p))
        }
        _ => Err(Error::ParameterDomain(format!("`{q}` does not apply to this profile"))),
    }
}

fn soliton_closed(q: Quantity, s: &SolitonParams) -> Result<f64> {
    let SolitonParams { c, mu } = *s;
    if !(c > 0.0) {
        return Err(Error::ParameterDomain(format!("c = {c} must be positive")));
    }
    let rc = c.sqrt();
    let th = soliton_angle(c, mu);
    Ok(match q {
        Quantity::SolitonMass => 2.0 * rc - 2.0 * SQRT_2 * mu * th,
        Quantity::SolitonEnergy => -2.0 / 3.0 * c * rc + 4.0 * mu * mu * rc - 4.0 * SQRT_2 * mu.powi(3) * th,
        Quantity::SolitonF => {
            2.0 / 15.0 * rc * (3.0 * c * c - 10.0 * mu * mu * c + 60.0 * mu.powi(4)) - 8.0 * SQRT_2 * mu.powi(5) * th
        }
        Quantity::SolitonDMdc => rc / (c + 2.0 * mu * mu),
        _ => unreachable!("breather quantity routed to soliton"),
    })
}

fn breather_closed(q: Quantity, p: &BreatherParams) -> f64 {
    let (a, b, mu) = (p.alpha, p.beta, p.mu);
    let (a2, b2, m2) = (a * a, b * b, mu * mu);
    let d = p.big_delta();
    let th = breather_angle(p);
    // Δ² + 8μ²β² and Δ² + 2μ²Δ + 4μ²β² recur throughout
    let den = d * d + 8.0 * m2 * b2;
    let num = d * d + 2.0 * m2 * d + 4.0 * m2 * b2;
    match q {
        Quantity::BreatherMass => 4.0 * b + 2.0 * SQRT_2 * mu * th,
        Quantity::BreatherEnergy => 4.0 / 3.0 * b * p.gamma() + 8.0 * b * m2 + 4.0 * SQRT_2 * mu.powi(3) * th,
        Quantity::BreatherF => {
            4.0 / 15.0
                * (3.0 * b * (b2 * b2 - 10.0 * b2 * a2 + 5.0 * a2 * a2) - 10.0 * m2 * b * (b2 - 3.0 * a2 - 6.0 * m2))
                + 8.0 * SQRT_2 * mu.powi(5) * th
        }
        Quantity::BreatherH => {
            let h1 = 8.0 * b / 15.0 * (4.0 * b2 * b2 + 20.0 * a2 * b2 + 5.0 * m2 * (5.0 * b2 - 3.0 * a2 + 6.0 * m2));
            let h2 = (a2 + b2).powi(2) + 4.0 * m2 * (b2 - a2 + m2);
            h1 + h2 * 2.0 * SQRT_2 * mu * th
        }
        Quantity::DMdAlpha => -16.0 * m2 * b * a / den,
        Quantity::DMdBeta => 4.0 * num / den,
        Quantity::DEdAlpha => 8.0 * a * b * (1.0 - 4.0 * m2 * m2 / den),
        Quantity::DEdBeta => 4.0 * (a2 - b2) + 8.0 * m2 * num / den,
        Quantity::QLambdaAlpha => 32.0 * a2 * b * (1.0 + 2.0 * m2 * d / den),
        Quantity::QLambdaBeta => -16.0 * b * ((a2 - b2) + (a2 + b2 + 2.0 * m2) * num / den),
        Quantity::BZeroPairing => (d * d + 2.0 * m2 * d) / (2.0 * b * (a2 + b2) * den),
        _ => unreachable!("soliton quantity routed to breather"),
    }
}

/// Branch of `arctan` used when continuing soliton closed forms to complex `√c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArctanBranch {
    Principal,
    /// `arctan(z) − (π/2) sgn(Re z)`, continuous through `z = ∞`.
    Infinity,
}

/// Soliton mass, energy and `F_μ` as analytic functions of `s = √c`.
pub fn soliton_closed_complex(q: Quantity, s: Complex64, mu: f64, branch: ArctanBranch) -> Result<Complex64> {
    let th = if mu == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        let z = s / (SQRT_2 * mu);
        match branch {
            ArctanBranch::Principal => z.atan(),
            ArctanBranch::Infinity => z.atan() - std::f64::consts::FRAC_PI_2 * z.re.signum(),
        }
    };
    let c = s * s;
    Ok(match q {
        Quantity::SolitonMass => 2.0 * s - 2.0 * SQRT_2 * mu * th,
        Quantity::SolitonEnergy => -2.0 / 3.0 * c * s + 4.0 * mu * mu * s - 4.0 * SQRT_2 * mu.powi(3) * th,
        Quantity::SolitonF => {
            2.0 / 15.0 * s * (3.0 * c * c - 10.0 * mu * mu * c + 60.0 * mu.powi(4)) - 8.0 * SQRT_2 * mu.powi(5) * th
        }
        other => return Err(Error::UnknownQuantity(format!("{other} has no complex soliton form"))),
    })
}

/// Breather value obtained as `2 Re[soliton value at √c = β + iα]`.
///
/// With principal branches the result is short by `2√2πμ`, `4√2πμ³`,
/// `8√2πμ⁵` for mass, energy and `F_μ`; the [`ArctanBranch::Infinity`]
/// branch closes the gap.
pub fn breather_from_soliton(q: Quantity, p: &BreatherParams, branch: ArctanBranch) -> Result<f64> {
    p.validate()?;
    let s = Complex64::new(p.beta, p.alpha);
    let sol = |q| soliton_closed_complex(q, s, p.mu, branch).map(|z| 2.0 * z.re);
    match q {
        Quantity::BreatherMass => sol(Quantity::SolitonMass),
        Quantity::BreatherEnergy => sol(Quantity::SolitonEnergy),
        Quantity::BreatherF => sol(Quantity::SolitonF),
        Quantity::BreatherH => {
            let (a2, b2) = (p.alpha * p.alpha, p.beta * p.beta);
            Ok(sol(Quantity::SolitonF)?
                + 2.0 * (b2 - a2) * sol(Quantity::SolitonEnergy)?
                + (a2 + b2).powi(2) * sol(Quantity::SolitonMass)?)
        }
        other => Err(Error::UnknownQuantity(format!("{other} has no soliton counterpart"))),
    }
}

/// One closed form against grid quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    pub quantity: Quantity,
    pub quadrature: f64,
    pub closed_form: f64,
    pub rel_err: f64,
}

pub const COMPARISON_TOLERANCE: f64 = 1e-7;

impl ComparisonRow {
    pub fn pass(&self) -> bool {
        self.rel_err <= COMPARISON_TOLERANCE
    }
}

/// Breather mass, energy, `F`, `H` at `t = 0`, and soliton mass, energy, `F`
/// for `√c = β` at the same `μ`, each on its resolved grid.
pub fn compare_closed_forms(p: &BreatherParams) -> Result<Vec<ComparisonRow>> {
    p.validate()?;
    let grid = resolved_grid(p, DEFAULT_HALF_LENGTH)?;
    let b = sample_breather(p, 0.0, &grid)?;
    let s = SolitonParams::new(p.beta * p.beta, p.mu)?;
    let w = Field::from_fn(grid, |x| gardner_soliton(&s, x).value);
    let row = |quantity: Quantity, quadrature: f64, target: Profile| -> Result<ComparisonRow> {
        let closed_form = closed_form(quantity, target)?;
        let rel_err = (quadrature - closed_form).abs() / closed_form.abs().max(f64::MIN_POSITIVE);
        Ok(ComparisonRow { alpha: p.alpha, beta: p.beta, mu: p.mu, quantity, quadrature, closed_form, rel_err })
    };
    let bp = Profile::Breather(*p);
    let sp = Profile::Soliton(s);
    Ok(vec![
        row(Quantity::BreatherMass, mass(&b), bp)?,
        row(Quantity::BreatherEnergy, energy(&b, p.mu)?, bp)?,
        row(Quantity::BreatherF, f_functional(&b, p.mu)?, bp)?,
        row(Quantity::BreatherH, lyapunov(&b, p)?, bp)?,
        row(Quantity::SolitonMass, mass(&w), sp)?,
        row(Quantity::SolitonEnergy, energy(&w, p.mu)?, sp)?,
        row(Quantity::SolitonF, f_functional(&w, p.mu)?, sp)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ids_round_trip() {
        for q in Quantity::ALL {
            assert_eq!(q.id().parse::<Quantity>().unwrap(), q);
        }
        assert!(matches!("nope".parse::<Quantity>(), Err(Error::UnknownQuantity(_))));
    }

    #[test]
    fn reference_values() {
        let p = BreatherParams::new(1.0, 1.0, 0.5).unwrap();
        let b = Profile::Breather(p);
        assert_relative_eq!(closed_form(Quantity::DMdAlpha, b).unwrap(), -16.0 / 17.0, max_relative = 1e-14);
        assert_relative_eq!(closed_form(Quantity::DMdBeta, b).unwrap(), 64.0 / 17.0, max_relative = 1e-14);
        assert_relative_eq!(closed_form(Quantity::QLambdaAlpha, b).unwrap(), 32.0 * (1.0 + 0.75 / 4.25), max_relative = 1e-14);
        assert_relative_eq!(closed_form(Quantity::BZeroPairing, b).unwrap(), 3.0 / 17.0, max_relative = 1e-14);
        let s = Profile::Soliton(SolitonParams::new(1.0, 0.5).unwrap());
        assert_relative_eq!(closed_form(Quantity::SolitonDMdc, s).unwrap(), 1.0 / 1.5, max_relative = 1e-14);
        assert!(closed_form(Quantity::BreatherMass, s).is_err());
    }

    #[test]
    fn limits_and_special_cases() {
        let p = BreatherParams::new(0.7, 1.3, 1e-9).unwrap();
        assert_relative_eq!(closed_form(Quantity::BreatherMass, Profile::Breather(p)).unwrap(), 5.2, max_relative = 1e-12);
        for &(b, f) in &[(0.5, 0.3), (1.0, 0.5), (2.0, 0.9)] {
            let p = BreatherParams::at_mu_fraction(b, b, f).unwrap();
            let m = p.mu;
            let want = 8.0 * m * m * b.powi(4) / (b.powi(4) + m.powi(4));
            let got = closed_form(Quantity::DEdBeta, Profile::Breather(p)).unwrap();
            assert_relative_eq!(got, want, max_relative = 1e-12);
            assert!(got > 0.0);
        }
    }

    #[test]
    fn principal_branch_misses_by_a_constant() {
        let p = BreatherParams::new(1.0, 1.0, 0.5).unwrap();
        let pi = std::f64::consts::PI;
        let m = breather_from_soliton(Quantity::BreatherMass, &p, ArctanBranch::Principal).unwrap();
        let e = breather_from_soliton(Quantity::BreatherEnergy, &p, ArctanBranch::Principal).unwrap();
        let b = Profile::Breather(p);
        assert!((closed_form(Quantity::BreatherMass, b).unwrap() - m - 2.0 * SQRT_2 * pi * 0.5).abs() < 1e-12);
        assert!((closed_form(Quantity::BreatherEnergy, b).unwrap() - e - 4.0 * SQRT_2 * pi * 0.125).abs() < 1e-12);
    }

    #[test]
    fn breathers_are_twice_the_real_part_of_complex_solitons() {
        for &(a, b, f) in &[(1.0, 1.0, 0.5), (0.5, 2.0, 0.9), (2.0, 0.5, 0.1), (2.0, 0.5, 0.9), (1.0, 2.0, 0.5)] {
            let p = BreatherParams::at_mu_fraction(a, b, f).unwrap();
            for q in [Quantity::BreatherMass, Quantity::BreatherEnergy, Quantity::BreatherF, Quantity::BreatherH] {
                let direct = closed_form(q, Profile::Breather(p)).unwrap();
                let via = breather_from_soliton(q, &p, ArctanBranch::Infinity).unwrap();
                assert!((direct - via).abs() < 1e-10 * direct.abs().max(1.0), "{q} at {p:?}: {direct} vs {via}");
            }
        }
    }
}
