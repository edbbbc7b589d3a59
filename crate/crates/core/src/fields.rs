//! Uniform periodic grids on `[-L, L)` and Fourier-collocation calculus.
//!
//! Every integral over the real line in this crate is the trapezoid sum on
//! such a grid. For smooth integrands that are either periodic or decayed
//! below the tail tolerance at the boundary this is spectrally accurate.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_HALF_LENGTH: f64 = 40.0;
pub const DEFAULT_POINTS: usize = 1024;
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    half_length: f64,
    num_points: usize,
}

impl Grid {
    pub fn new(half_length: f64, num_points: usize) -> Result<Self> {
        if !(half_length > 0.0) || !half_length.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "half length must be positive and finite, got {half_length}"
            )));
        }
        if num_points % 2 != 0 {
            return Err(Error::InvalidGrid(format!("odd N = {num_points}")));
        }
        if num_points < 16 {
            return Err(Error::InvalidGrid(format!("N = {num_points} < 16")));
        }
        Ok(Self { half_length, num_points })
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn len(&self) -> usize {
        self.num_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.num_points as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        -self.half_length + i as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.num_points).map(|i| self.node(i)).collect()
    }

    /// Wavenumbers in FFT storage order; the Nyquist slot holds `-π N / (2L)`.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.num_points as i64;
        let base = std::f64::consts::PI / self.half_length;
        (0..n)
            .map(|j| {
                let m = if j < n / 2 { j } else { j - n };
                base * m as f64
            })
            .collect()
    }

    pub fn max_wavenumber(&self) -> f64 {
        std::f64::consts::PI * self.num_points as f64 / (2.0 * self.half_length)
    }

    /// Nearest periodic image of `x` relative to `center`, in `[center - L, center + L)`.
    pub fn wrap_near(&self, x: f64, center: f64) -> f64 {
        let period = 2.0 * self.half_length;
        let d = (x - center + self.half_length).rem_euclid(period) - self.half_length;
        center + d
    }
}

impl Default for Grid {
    fn default() -> Self {
        Self { half_length: DEFAULT_HALF_LENGTH, num_points: DEFAULT_POINTS }
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn fft_pair(n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        (p.plan_fft_forward(n), p.plan_fft_inverse(n))
    })
}

/// Forward transform of real samples (unnormalized).
pub fn forward(values: &[f64]) -> Vec<Complex64> {
    let (fwd, _) = fft_pair(values.len());
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    buf
}

/// Inverse transform including the `1/N` normalization; returns real parts.
pub fn inverse_real(mut spectrum: Vec<Complex64>) -> Vec<f64> {
    let n = spectrum.len();
    let (_, inv) = fft_pair(n);
    inv.process(&mut spectrum);
    let scale = 1.0 / n as f64;
    spectrum.into_iter().map(|c| c.re * scale).collect()
}

/// Fixed-order pairwise summation: identical inputs give identical bits.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        let mut s = 0.0;
        for &x in xs {
            s += x;
        }
        return s;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
    periodic: bool,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} samples for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite sample at index {i}")));
        }
        Ok(Self { grid, values, periodic: false })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().into_iter().map(f).collect();
        Self { grid, values, periodic: false }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![0.0; grid.len()], periodic: false }
    }

    /// Declares the field periodic on the grid, which silences the tail check.
    pub fn into_periodic(mut self) -> Self {
        self.periodic = true;
        self
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn boundary_magnitude(&self) -> f64 {
        self.values[0].abs().max(self.values[self.values.len() - 1].abs())
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
            periodic: self.periodic,
        }
    }

    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.check_grid(other)?;
        Ok(Field {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
            periodic: self.periodic && other.periodic,
        })
    }

    pub fn scale(&self, s: f64) -> Field {
        self.map(|v| s * v)
    }

    /// `self + s * other`
    pub fn axpy(&self, s: f64, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + s * b)
    }

    pub fn check_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }
}

/// Fourier-collocation derivative of order 1 to 4.
///
/// The Nyquist mode is dropped for odd orders so the result stays real.
pub fn derivative(f: &Field, order: usize) -> Result<Field> {
    if !(1..=4).contains(&order) {
        return Err(Error::DerivativeOrder(order));
    }
    let ks = f.grid.wavenumbers();
    let n = f.grid.len();
    let mut spec = forward(&f.values);
    for (j, c) in spec.iter_mut().enumerate() {
        if order % 2 == 1 && j == n / 2 {
            *c = Complex64::new(0.0, 0.0);
            continue;
        }
        *c *= Complex64::new(0.0, ks[j]).powu(order as u32);
    }
    Ok(Field { grid: f.grid, values: inverse_real(spec), periodic: f.periodic })
}

/// All derivatives `f, f', …, f^(max_order)` from a single forward transform.
pub fn derivatives(f: &Field, max_order: usize) -> Result<Vec<Field>> {
    if max_order > 4 {
        return Err(Error::DerivativeOrder(max_order));
    }
    let ks = f.grid.wavenumbers();
    let n = f.grid.len();
    let spec = forward(&f.values);
    let mut out = vec![f.clone()];
    for order in 1..=max_order {
        let d: Vec<Complex64> = spec
            .iter()
            .enumerate()
            .map(|(j, &c)| {
                if order % 2 == 1 && j == n / 2 {
                    Complex64::new(0.0, 0.0)
                } else {
                    c * Complex64::new(0.0, ks[j]).powu(order as u32)
                }
            })
            .collect();
        out.push(Field { grid: f.grid, values: inverse_real(d), periodic: f.periodic });
    }
    Ok(out)
}

pub fn integrate(f: &Field) -> f64 {
    integrate_with_tolerance(f, DEFAULT_TAIL_TOLERANCE)
}

pub fn integrate_with_tolerance(f: &Field, tail_tolerance: f64) -> f64 {
    if !f.periodic {
        let b = f.boundary_magnitude();
        if b > tail_tolerance {
            log::warn!("integrand boundary magnitude {b:.3e} exceeds tail tolerance {tail_tolerance:.1e}");
        }
    }
    f.grid.spacing() * pairwise_sum(&f.values)
}

/// `Σ_{j≤s} ∫ (∂ʲf)²`; the H² convention is `∫ f² + f_x² + f_xx²`.
pub fn sobolev_norm_sq(f: &Field, s: usize) -> Result<f64> {
    if s > 2 {
        return Err(Error::SobolevIndex(s));
    }
    let ds = derivatives(f, s)?;
    Ok(ds
        .iter()
        .map(|d| {
            let sq = d.map(|v| v * v);
            d.grid.spacing() * pairwise_sum(&sq.values)
        })
        .sum())
}

pub fn h2_norm(f: &Field) -> f64 {
    sobolev_norm_sq(f, 2).expect("s = 2 is valid").sqrt()
}

pub fn inner_product(f: &Field, g: &Field) -> Result<f64> {
    let prod = f.zip_with(g, |a, b| a * b)?;
    Ok(integrate(&prod))
}

/// `∫_{-L}^{x_i} f` by prefix trapezoid from the left boundary.
pub fn cumulative_integral(f: &Field) -> Vec<f64> {
    let h = f.grid.spacing();
    let mut out = Vec::with_capacity(f.values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in f.values.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// `∫_{-L}^{x_i} f` to spectral accuracy for a decayed integrand.
///
/// The total `I = ∫f` is carried by a Gaussian of width `L/8` whose
/// antiderivative is an error function; the zero-mean remainder is
/// integrated by dividing its spectrum by `ik`.
pub fn cumulative_integral_spectral(f: &Field) -> Vec<f64> {
    let g = f.grid;
    let s = g.half_length / 8.0;
    let total = integrate(f);
    let norm = 1.0 / (s * std::f64::consts::PI.sqrt());
    let xs = g.nodes();
    let rest: Vec<f64> = f
        .values
        .iter()
        .zip(&xs)
        .map(|(v, x)| v - total * norm * (-(x / s) * (x / s)).exp())
        .collect();
    let ks = g.wavenumbers();
    let n = g.len();
    let mut spec = forward(&rest);
    for (j, c) in spec.iter_mut().enumerate() {
        if j == 0 || j == n / 2 {
            *c = Complex64::new(0.0, 0.0);
        } else {
            *c /= Complex64::new(0.0, ks[j]);
        }
    }
    let anti = inverse_real(spec);
    let step = |x: f64| 0.5 * total * (1.0 + libm::erf(x / s));
    let base = anti[0] + step(xs[0]);
    anti.iter().zip(&xs).map(|(a, &x)| a + step(x) - base).collect()
}
