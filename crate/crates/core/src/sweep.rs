//! Parameter lattices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::BreatherParams;

const LATTICES: &str = include_str!("../sweeps/lattices.toml");

/// `α × β × μ` with `μ` given as fractions of `μ_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub mu_fractions: Vec<f64>,
}

#[derive(Debug, Deserialize)]
struct LatticeFile {
    version: u32,
    standard: Lattice,
    functionals: Lattice,
}

fn file() -> LatticeFile {
    toml::from_str(LATTICES).expect("bundled lattice file parses")
}

pub fn lattice_version() -> u32 {
    file().version
}

/// `α, β ∈ {0.5, 1, 2}`, `μ/μ_max ∈ {0.1, 0.5, 0.9}`.
pub fn standard() -> Lattice {
    file().standard
}

/// The standard lattice with `μ/μ_max = 0.3` added.
pub fn functionals() -> Lattice {
    file().functionals
}

/// A lattice point, or the reason it was skipped.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepPoint {
    Admissible(BreatherParams),
    Skipped { alpha: f64, beta: f64, mu: f64, reason: String },
}

impl Lattice {
    /// All points in `α`-major order.
    pub fn points(&self) -> Vec<BreatherParams> {
        self.classify().into_iter().filter_map(|p| match p {
            SweepPoint::Admissible(p) => Some(p),
            SweepPoint::Skipped { .. } => None,
        })
        .collect()
    }

    pub fn classify(&self) -> Vec<SweepPoint> {
        let mut out = Vec::new();
        for &a in &self.alphas {
            for &b in &self.betas {
                for &f in &self.mu_fractions {
                    let mu = f * ((a * a + b * b) / 2.0).sqrt();
                    out.push(classify_point(a, b, mu));
                }
            }
        }
        out
    }
}

/// Lattice with absolute `μ` values, as used when sweeping explicit `μ`.
pub fn absolute(alphas: &[f64], betas: &[f64], mus: &[f64]) -> Vec<SweepPoint> {
    let mut out = Vec::new();
    for &a in alphas {
        for &b in betas {
            for &mu in mus {
                out.push(classify_point(a, b, mu));
            }
        }
    }
    out
}

fn classify_point(alpha: f64, beta: f64, mu: f64) -> SweepPoint {
    match BreatherParams::new(alpha, beta, mu) {
        Ok(p) => SweepPoint::Admissible(p),
        Err(Error::ParameterDomain(reason)) => SweepPoint::Skipped { alpha, beta, mu, reason },
        Err(e) => SweepPoint::Skipped { alpha, beta, mu, reason: e.to_string() },
    }
}

/// Parses `start:stop:count` into `count` evenly spaced values.
pub fn parse_range(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::ParameterDomain(format!("range `{spec}` is not start:stop:count"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    match n {
        0 => Err(bad()),
        1 => Ok(vec![start]),
        _ => Ok((0..n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_lattices() {
        assert_eq!(standard().points().len(), 27);
        assert_eq!(functionals().points().len(), 36);
        assert!(lattice_version() >= 1);
    }

    #[test]
    fn inadmissible_points_are_skipped_with_reason() {
        let pts = absolute(&[1.0], &[1.0], &[0.5, 1.0, 2.0]);
        assert!(matches!(pts[0], SweepPoint::Admissible(_)));
        assert!(matches!(&pts[1], SweepPoint::Skipped { reason, .. } if reason.contains("positive")));
        assert_eq!(pts.iter().filter(|p| matches!(p, SweepPoint::Skipped { .. })).count(), 2);
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0.1:0.9:5").unwrap().len(), 5);
        assert!((parse_range("0.1:0.9:5").unwrap()[2] - 0.5).abs() < 1e-15);
        assert!(parse_range("1:2").is_err());
        assert!(parse_range("1:2:0").is_err());
    }
}
