//! Pseudospectral evolution of `w_t + (w_xx + 3μw² + w³)_x = 0`, modulation
//! onto the breather family and the orbital stability experiment.
//!
//! The solver runs in a frame moving with velocity `v`: grid node `xᵢ` sits at
//! the physical point `xᵢ + v t`. With `v = −γ` a breather with zero shifts
//! stays in the middle of the box.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{b_zero, gardner_breather, kernel_directions, scaling_directions, BreatherParams, Phase, TWO_SQRT_2};
use crate::fields::{sobolev_norm_sq, Field, Grid};
use crate::functionals::{energy, f_functional, lyapunov, mass};
use crate::spectral::{band_limited_noise, quadratic_form};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    #[default]
    EtdRk4,
    IfRk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub grid: Grid,
    pub dt: f64,
    pub t_end: f64,
    pub dealias: f64,
    pub integrator: Integrator,
    pub snapshot_stride: usize,
    pub frame_velocity: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            grid: Grid::default(),
            dt: 1e-4,
            t_end: 1.0,
            dealias: 2.0 / 3.0,
            integrator: Integrator::EtdRk4,
            snapshot_stride: 1000,
            frame_velocity: 0.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::SolverConfig(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt = {} must be positive", self.dt));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end = {} must be non-negative", self.t_end));
        }
        if !(self.dealias > 0.0 && self.dealias <= 1.0) {
            return bad(format!("dealias = {} outside (0, 1]", self.dealias));
        }
        if self.snapshot_stride == 0 {
            return bad("snapshot_stride must be positive".into());
        }
        if !self.frame_velocity.is_finite() {
            return bad("frame velocity must be finite".into());
        }
        Ok(())
    }

    /// Number of steps and the step that lands exactly on `t_end`.
    pub fn steps(&self) -> (usize, f64) {
        let n = (self.t_end / self.dt).round().max(1.0) as usize;
        (n, self.t_end / n as f64)
    }
}

/// Time stepper holding the half spectrum of a real field.
pub struct Stepper {
    grid: Grid,
    mu: f64,
    integrator: Integrator,
    h: f64,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    // −ik on the dealiasing band, zero elsewhere
    dk: Vec<Complex64>,
    e: Vec<Complex64>,
    e2: Vec<Complex64>,
    // ETDRK4 weights; IF-RK4 uses only e and e2
    q: Vec<Complex64>,
    f1: Vec<Complex64>,
    f2: Vec<Complex64>,
    f3: Vec<Complex64>,
    v: Vec<Complex64>,
    steps: u64,
    initial_sup: f64,
    real: Vec<f64>,
}

/// φ-function weights by the contour mean of Kassam and Trefethen.
fn etd_weights(z: Complex64, h: f64) -> [Complex64; 4] {
    const M: usize = 64;
    let mut acc = [Complex64::new(0.0, 0.0); 4];
    for j in 0..M {
        let r = z + Complex64::from_polar(1.0, 2.0 * PI * (j as f64 + 0.5) / M as f64);
        let er = r.exp();
        let r3 = r * r * r;
        acc[0] += ((r * 0.5).exp() - 1.0) / r;
        acc[1] += (-4.0 - r + er * (4.0 - 3.0 * r + r * r)) / r3;
        acc[2] += (2.0 + r + er * (r - 2.0)) / r3;
        acc[3] += (-4.0 - 3.0 * r - r * r + er * (4.0 - r)) / r3;
    }
    acc.map(|a| a * (h / M as f64))
}

impl Stepper {
    pub fn new(w0: &Field, cfg: &SolverConfig, mu: f64) -> Result<Self> {
        cfg.validate()?;
        if w0.grid() != &cfg.grid {
            return Err(Error::GridMismatch);
        }
        let (_, h) = cfg.steps();
        let n = cfg.grid.len();
        let mut planner = RealFftPlanner::<f64>::new();
        let r2c = planner.plan_fft_forward(n);
        let c2r = planner.plan_fft_inverse(n);
        let m = n / 2 + 1;
        let base = PI / cfg.grid.half_length();
        let kmax = cfg.grid.max_wavenumber();
        let (mut dk, mut e, mut e2) = (vec![], vec![], vec![]);
        let (mut q, mut f1, mut f2, mut f3) = (vec![], vec![], vec![], vec![]);
        for j in 0..m {
            // the Nyquist mode of an even grid carries no odd derivative
            let k = if n % 2 == 0 && j == n / 2 { 0.0 } else { base * j as f64 };
            let keep = k > 0.0 && k <= cfg.dealias * kmax;
            dk.push(if keep { Complex64::new(0.0, -k) } else { Complex64::new(0.0, 0.0) });
            let l = Complex64::new(0.0, k * k * k + cfg.frame_velocity * k);
            e.push((l * h).exp());
            e2.push((l * (0.5 * h)).exp());
            if cfg.integrator == Integrator::EtdRk4 {
                let [a, b, c, d] = etd_weights(l * h, h);
                q.push(a);
                f1.push(b);
                f2.push(c);
                f3.push(d);
            }
        }
        let mut real = w0.values().to_vec();
        let mut v = r2c.make_output_vec();
        r2c.process(&mut real, &mut v).map_err(|e| Error::SolverConfig(e.to_string()))?;
        Ok(Self {
            grid: cfg.grid,
            mu,
            integrator: cfg.integrator,
            h,
            r2c,
            c2r,
            dk,
            e,
            e2,
            q,
            f1,
            f2,
            f3,
            v,
            steps: 0,
            initial_sup: w0.sup_norm().max(f64::MIN_POSITIVE),
            real,
        })
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 * self.h
    }

    pub fn field(&self) -> Result<Field> {
        let mut spec = self.v.clone();
        let mut out = self.c2r.make_output_vec();
        spec[0].im = 0.0;
        if self.grid.len() % 2 == 0 {
            spec.last_mut().expect("nonempty").im = 0.0;
        }
        self.c2r.process(&mut spec, &mut out).map_err(|e| Error::SolverConfig(e.to_string()))?;
        let s = 1.0 / self.grid.len() as f64;
        Field::new(self.grid, out.into_iter().map(|x| x * s).collect())
    }

    /// `−∂ₓ(3μw² + w³)` in Fourier space, truncated to the dealiasing band.
    fn nonlinear(&mut self, v: &[Complex64], out: &mut [Complex64]) {
        let n = self.grid.len();
        out.copy_from_slice(v);
        out[0].im = 0.0;
        if n % 2 == 0 {
            out[n / 2].im = 0.0;
        }
        self.c2r.process(out, &mut self.real).expect("sizes fixed at construction");
        let s = 1.0 / n as f64;
        let mu = self.mu;
        for x in self.real.iter_mut() {
            let w = *x * s;
            *x = w * w * (3.0 * mu + w);
        }
        self.r2c.process(&mut self.real, out).expect("sizes fixed at construction");
        for (o, d) in out.iter_mut().zip(&self.dk) {
            *o *= d;
        }
    }

    fn step(&mut self) {
        let m = self.v.len();
        let z = Complex64::new(0.0, 0.0);
        let v = std::mem::take(&mut self.v);
        let (mut na, mut nb, mut nc, mut nv) = (vec![z; m], vec![z; m], vec![z; m], vec![z; m]);
        let mut s = vec![z; m];
        self.v = match self.integrator {
            Integrator::EtdRk4 => {
                self.nonlinear(&v, &mut nv);
                let a: Vec<_> = (0..m).map(|j| self.e2[j] * v[j] + self.q[j] * nv[j]).collect();
                self.nonlinear(&a, &mut na);
                for j in 0..m {
                    s[j] = self.e2[j] * v[j] + self.q[j] * na[j];
                }
                self.nonlinear(&s, &mut nb);
                for j in 0..m {
                    s[j] = self.e2[j] * a[j] + self.q[j] * (2.0 * nb[j] - nv[j]);
                }
                self.nonlinear(&s, &mut nc);
                (0..m)
                    .map(|j| {
                        self.e[j] * v[j] + nv[j] * self.f1[j] + 2.0 * (na[j] + nb[j]) * self.f2[j] + nc[j] * self.f3[j]
                    })
                    .collect()
            }
            Integrator::IfRk4 => {
                let h = self.h;
                self.nonlinear(&v, &mut nv);
                for j in 0..m {
                    s[j] = self.e2[j] * (v[j] + 0.5 * h * nv[j]);
                }
                self.nonlinear(&s, &mut na);
                for j in 0..m {
                    s[j] = self.e2[j] * v[j] + 0.5 * h * na[j];
                }
                self.nonlinear(&s, &mut nb);
                for j in 0..m {
                    s[j] = self.e[j] * v[j] + self.e2[j] * h * nb[j];
                }
                self.nonlinear(&s, &mut nc);
                (0..m)
                    .map(|j| {
                        self.e[j] * v[j]
                            + h * (self.e[j] * nv[j] + 2.0 * self.e2[j] * (na[j] + nb[j]) + nc[j]) / 6.0
                    })
                    .collect()
            }
        };
        self.steps += 1;
    }

    /// Takes `steps` steps, checking for blow-up every 64.
    pub fn advance(&mut self, steps: usize) -> Result<()> {
        for i in 0..steps {
            self.step();
            if (i + 1) % 64 == 0 || i + 1 == steps {
                self.guard()?;
            }
        }
        Ok(())
    }

    fn guard(&self) -> Result<()> {
        let sup = self.field().map(|f| f.sup_norm()).unwrap_or(f64::INFINITY);
        if !(sup <= 1e3 * self.initial_sup) {
            return Err(Error::BlowUp { t: self.time(), sup });
        }
        Ok(())
    }
}

/// Snapshots `(t, w)` every `snapshot_stride` steps, plus `t = 0` and `t_end`.
pub fn evolve(w0: &Field, cfg: &SolverConfig, mu: f64) -> Result<Vec<(f64, Field)>> {
    let mut st = Stepper::new(w0, cfg, mu)?;
    let (n, _) = cfg.steps();
    let mut out = vec![(0.0, w0.clone())];
    let mut done = 0;
    while done < n {
        let k = cfg.snapshot_stride.min(n - done);
        st.advance(k)?;
        done += k;
        out.push((st.time(), st.field()?));
    }
    Ok(out)
}

/// Physical abscissae of the moving frame at time `t`.
pub fn frame_points(grid: &Grid, velocity: f64, t: f64) -> Vec<f64> {
    grid.nodes().into_iter().map(|x| x + velocity * t).collect()
}

/// `B(t; x₁, x₂)` sampled on the moving frame.
pub fn breather_in_frame(p: &BreatherParams, t: f64, grid: &Grid, velocity: f64) -> Result<Field> {
    let vals = frame_points(grid, velocity, t)
        .into_iter()
        .map(|x| gardner_breather(p, t, x).map(|j| j.value))
        .collect::<Result<Vec<_>>>()?;
    Field::new(*grid, vals)
}

/// `‖a − b‖_{H²}`.
pub fn h2_distance(a: &Field, b: &Field) -> Result<f64> {
    Ok(sobolev_norm_sq(&a.zip_with(b, |x, y| x - y)?, 2)?.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulationState {
    pub x1: f64,
    pub x2: f64,
    pub converged: bool,
    pub newton_iters: usize,
}

impl ModulationState {
    pub fn at(x1: f64, x2: f64) -> Self {
        Self { x1, x2, converged: false, newton_iters: 0 }
    }
}

pub const CAPTURE_RADIUS: f64 = 0.5;
const MAX_NEWTON: usize = 50;

/// Orthogonality residuals `J_j = ∫(w − B)B_j` and their Jacobian in `(x₁, x₂)`.
fn modulation_system(w: &Field, q: &BreatherParams, t: f64, xs: &[f64]) -> Result<([f64; 2], [f64; 4], f64, [f64; 2])> {
    let h = w.grid().spacing();
    let n = xs.len();
    let mut cols = vec![[0.0f64; 7]; n];
    for (i, &x) in xs.iter().enumerate() {
        let ph = Phase::of(q, t, x, 3);
        let d = |d1: usize, d2: usize| TWO_SQRT_2 * ph.theta(1, 0, d1, d2);
        let b = d(0, 0);
        if !b.is_finite() {
            return Err(Error::ParameterDomain(format!("breather not finite at x = {x}")));
        }
        cols[i] = [w.values()[i] - b, d(1, 0), d(0, 1), d(2, 0), d(1, 1), d(0, 2), 0.0];
    }
    let sum = |f: &dyn Fn(&[f64; 7]) -> f64| h * crate::fields::pairwise_sum(&cols.iter().map(f).collect::<Vec<_>>());
    let j1 = sum(&|c| c[0] * c[1]);
    let j2 = sum(&|c| c[0] * c[2]);
    let a11 = sum(&|c| -c[1] * c[1] + c[0] * c[3]);
    let a12 = sum(&|c| -c[2] * c[1] + c[0] * c[4]);
    let a21 = sum(&|c| -c[1] * c[2] + c[0] * c[4]);
    let a22 = sum(&|c| -c[2] * c[2] + c[0] * c[5]);
    let zn = sum(&|c| c[0] * c[0]).sqrt();
    let bn = [sum(&|c| c[1] * c[1]).sqrt(), sum(&|c| c[2] * c[2]).sqrt()];
    Ok(([j1, j2], [a11, a12, a21, a22], zn, bn))
}

/// Newton iteration for shifts with `∫(w − B)B₁ = ∫(w − B)B₂ = 0`.
///
/// `offset` is the frame displacement `v t`. A start farther than the
/// capture radius in `H²`, or 50 iterations without convergence, returns
/// `converged = false`.
pub fn modulate(w: &Field, p: &BreatherParams, t: f64, offset: f64, guess: ModulationState) -> Result<ModulationState> {
    let g = *w.grid();
    let xs: Vec<f64> = g.nodes().into_iter().map(|x| x + offset).collect();
    let mut st = ModulationState { converged: false, newton_iters: 0, ..guess };
    let q0 = p.shifted(st.x1, st.x2);
    let b0 = Field::new(g, xs.iter().map(|&x| gardner_breather(&q0, t, x).map(|j| j.value)).collect::<Result<Vec<_>>>()?)?;
    if h2_distance(w, &b0)? > CAPTURE_RADIUS {
        return Ok(st);
    }
    for it in 0..=MAX_NEWTON {
        let q = p.shifted(st.x1, st.x2);
        let (j, a, zn, bn) = modulation_system(w, &q, t, &xs)?;
        let small = |i: usize| j[i].abs() <= 1e-10 * zn * bn[i] + 1e-13 * bn[i] * bn[i];
        if small(0) && small(1) {
            st.converged = true;
            st.newton_iters = it;
            return Ok(st);
        }
        if it == MAX_NEWTON {
            break;
        }
        let det = a[0] * a[3] - a[1] * a[2];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let d1 = (a[3] * j[0] - a[1] * j[1]) / det;
        let d2 = (a[0] * j[1] - a[2] * j[0]) / det;
        st.x1 -= d1;
        st.x2 -= d2;
        st.newton_iters = it + 1;
        if !(st.x1.is_finite() && st.x2.is_finite()) {
            break;
        }
    }
    st.converged = false;
    Ok(st)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbationKind {
    RandomBandLimited,
    KernelAligned,
    ScalingAligned,
    B0Aligned,
}

impl std::str::FromStr for PerturbationKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random-band-limited" => Ok(Self::RandomBandLimited),
            "kernel-aligned" => Ok(Self::KernelAligned),
            "scaling-aligned" => Ok(Self::ScalingAligned),
            "b0-aligned" => Ok(Self::B0Aligned),
            _ => Err(Error::SolverConfig(format!("unknown perturbation `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub kind: PerturbationKind,
    pub eta: f64,
    pub seed: u64,
}

/// Unit-`H²` perturbation field at `t = 0`.
///
/// The random kind is band-limited noise (cutoff a quarter of the grid band)
/// under a Gaussian envelope of width `4/β` on the breather, so it decays
/// like the initial data must.
pub fn perturbation_field(p: &BreatherParams, pert: &Perturbation, grid: &Grid) -> Result<Field> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(pert.seed);
    let c = p.center(0.0);
    let xs: Vec<f64> = grid.nodes();
    let sample = |f: &dyn Fn(f64) -> Result<f64>| -> Result<Field> {
        Field::new(*grid, xs.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?)
    };
    let (a, b) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let z = match pert.kind {
        PerturbationKind::RandomBandLimited => {
            let noise = band_limited_noise(grid, 0.25, &mut rng)?;
            let w = 4.0 / p.beta.abs();
            noise.zip_with(&Field::from_fn(*grid, |x| (-((x - c) / w).powi(2)).exp()), |u, v| u * v)?
        }
        PerturbationKind::KernelAligned => sample(&|x| {
            let (b1, b2) = kernel_directions(p, 0.0, x)?;
            Ok(a * b1.value + b * b2.value)
        })?,
        PerturbationKind::ScalingAligned => sample(&|x| {
            let (la, lb) = scaling_directions(p, 0.0, x)?;
            Ok(a * la.value + b * lb.value)
        })?,
        PerturbationKind::B0Aligned => sample(&|x| Ok(b_zero(p, 0.0, x)?.value))?,
    };
    let n = sobolev_norm_sq(&z, 2)?.sqrt();
    if !(n > 0.0) {
        return Err(Error::SolverConfig("perturbation has zero norm".into()));
    }
    Ok(z.scale(1.0 / n))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Invariants {
    pub mass: f64,
    pub energy: f64,
    pub f: f64,
    pub h: f64,
}

pub fn invariants(w: &Field, p: &BreatherParams) -> Result<Invariants> {
    Ok(Invariants { mass: mass(w), energy: energy(w, p.mu)?, f: f_functional(w, p.mu)?, h: lyapunov(w, p)? })
}

impl Invariants {
    /// Largest relative change of the four functionals.
    pub fn drift_from(&self, base: &Invariants) -> f64 {
        let r = |a: f64, b: f64| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
        r(self.mass, base.mass).max(r(self.energy, base.energy)).max(r(self.f, base.f)).max(r(self.h, base.h))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub distance_h2: f64,
    pub x1: f64,
    pub x2: f64,
    pub invariants: Invariants,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    pub perturbation: Perturbation,
    pub eta: f64,
    pub sup_distance: f64,
    pub amplification: f64,
    pub invariant_drift: f64,
    pub modulation_speed: f64,
    pub horizon: f64,
    pub captured: bool,
    pub escape_time: Option<f64>,
    /// least-squares slope of the distance over the last half of the
    /// horizon, sampled once per period so the breathing does not enter the fit
    pub late_slope: f64,
    pub late_slope_stderr: f64,
    pub samples: Vec<Sample>,
}

impl StabilityReport {
    /// Slope within 1.96 standard errors of zero.
    pub fn slope_is_zero(&self) -> bool {
        self.late_slope.abs() <= 1.96 * self.late_slope_stderr
    }

    /// No positive slope at the one-sided 97.5% level.
    pub fn growth_is_secular(&self) -> bool {
        self.late_slope > 1.96 * self.late_slope_stderr
    }
}

/// Ordinary least squares `y = a + s t`; returns `(s, stderr(s))`.
pub fn linear_fit(ts: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = ts.len() as f64;
    if ts.len() < 3 {
        return (0.0, f64::INFINITY);
    }
    let tm = ts.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let stt: f64 = ts.iter().map(|t| (t - tm).powi(2)).sum();
    let sty: f64 = ts.iter().zip(ys).map(|(t, y)| (t - tm) * (y - ym)).sum();
    let s = sty / stt;
    let a = ym - s * tm;
    let rss: f64 = ts.iter().zip(ys).map(|(t, y)| (y - a - s * t).powi(2)).sum();
    (s, (rss / (n - 2.0) / stt).sqrt())
}

pub const SNAPSHOTS_PER_PERIOD: usize = 8;

/// Perturb `B(0; x₁, x₂)`, evolve `horizon_periods` periods in the frame
/// moving with the envelope, and modulate at every snapshot.
///
/// `cfg.dt` is rounded so that eight snapshots fall on each period;
/// `cfg.snapshot_stride`, `t_end` and `frame_velocity` are overridden.
pub fn stability_experiment(
    p: &BreatherParams,
    pert: &Perturbation,
    horizon_periods: f64,
    cfg: &SolverConfig,
) -> Result<StabilityReport> {
    stability_experiment_observed(p, pert, horizon_periods, cfg, |_, _, _| {})
}

/// [`stability_experiment`], handing every captured snapshot to `observe` as
/// `(t, w, frame offset)`; physical abscissae are the grid nodes plus the offset.
pub fn stability_experiment_observed(
    p: &BreatherParams,
    pert: &Perturbation,
    horizon_periods: f64,
    cfg: &SolverConfig,
    mut observe: impl FnMut(f64, &Field, f64),
) -> Result<StabilityReport> {
    p.validate()?;
    if !(pert.eta >= 0.0 && pert.eta <= 1e-2) {
        return Err(Error::SolverConfig(format!("eta = {} outside [0, 1e-2]", pert.eta)));
    }
    if !(p.mu > 0.0 && p.mu < p.mu_max()) {
        return Err(Error::ParameterDomain(format!("mu = {} outside (0, mu_max)", p.mu)));
    }
    let (tp, _) = p.period();
    let v = -p.gamma();
    // eight snapshots per period, each landing on the step grid
    let stride = ((tp / (SNAPSHOTS_PER_PERIOD as f64 * cfg.dt)).round() as usize).max(1);
    let dt = tp / (stride * SNAPSHOTS_PER_PERIOD) as f64;
    let cfg = SolverConfig { dt, t_end: horizon_periods * tp, frame_velocity: v, snapshot_stride: stride, ..*cfg };
    let g = cfg.grid;
    // the frame is anchored at the envelope of the unshifted breather
    let w0 = breather_in_frame(p, 0.0, &g, v)?.axpy(pert.eta, &perturbation_field(p, pert, &g)?)?;
    let base = invariants(&w0, p)?;

    let mut st = Stepper::new(&w0, &cfg, p.mu)?;
    let (nsteps, _) = cfg.steps();
    let mut guess = ModulationState::at(p.x1, p.x2);
    let mut samples = Vec::new();
    let mut escape_time = None;
    let mut drift = 0.0f64;
    let mut done = 0;
    loop {
        let t = st.time();
        let w = st.field()?;
        let m = modulate(&w, p, t, v * t, guess)?;
        if !m.converged {
            escape_time = Some(t);
            break;
        }
        guess = m;
        let b = breather_in_frame(&p.shifted(m.x1, m.x2), t, &g, v)?;
        let inv = invariants(&w, p)?;
        drift = drift.max(inv.drift_from(&base));
        samples.push(Sample { t, distance_h2: h2_distance(&w, &b)?, x1: m.x1, x2: m.x2, invariants: inv });
        observe(t, &w, v * t);
        if done >= nsteps {
            break;
        }
        let k = cfg.snapshot_stride.min(nsteps - done);
        match st.advance(k) {
            Ok(()) => done += k,
            Err(Error::BlowUp { t, .. }) => {
                escape_time = Some(t);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let sup_distance = samples.iter().map(|s| s.distance_h2).fold(0.0, f64::max);
    let modulation_speed = samples
        .windows(2)
        .map(|w| ((w[1].x1 - w[0].x1).abs() + (w[1].x2 - w[0].x2).abs()) / (w[1].t - w[0].t))
        .fold(0.0, f64::max);
    let t_last = samples.last().map_or(0.0, |s| s.t);
    let late: Vec<&Sample> = samples
        .iter()
        .filter(|s| s.t >= 0.5 * t_last && ((s.t / tp) - (s.t / tp).round()).abs() < 1e-6)
        .collect();
    let (late_slope, late_slope_stderr) = linear_fit(
        &late.iter().map(|s| s.t).collect::<Vec<_>>(),
        &late.iter().map(|s| s.distance_h2).collect::<Vec<_>>(),
    );
    Ok(StabilityReport {
        alpha: p.alpha,
        beta: p.beta,
        mu: p.mu,
        perturbation: *pert,
        eta: pert.eta,
        sup_distance,
        amplification: if pert.eta > 0.0 { sup_distance / pert.eta } else { 0.0 },
        invariant_drift: drift,
        modulation_speed,
        horizon: horizon_periods,
        captured: escape_time.is_none(),
        escape_time,
        late_slope,
        late_slope_stderr,
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovExpansion {
    /// `H[B + z] − H[B]`
    pub lhs: f64,
    /// `½ Q[z]`
    pub quad: f64,
    /// `lhs − quad`
    pub cubic: f64,
}

/// `z` is sampled on the envelope frame of `B(t)`.
pub fn lyapunov_expansion_check(p: &BreatherParams, t: f64, z: &Field) -> Result<LyapunovExpansion> {
    let g = z.grid();
    let b = crate::spectral::frame_sample(p, t, g, 0, |x| gardner_breather(p, t, x))?;
    let h0 = lyapunov(&b, p)?;
    let h1 = lyapunov(&b.axpy(1.0, z)?, p)?;
    let quad = 0.5 * quadratic_form(z, p, t)?;
    Ok(LyapunovExpansion { lhs: h1 - h0, quad, cubic: h1 - h0 - quad })
}

/// Log-log slope of `|cubic|` for `z → s z`, `s ∈ {1, ½, ¼, ⅛}`.
pub fn cubic_exponent(p: &BreatherParams, t: f64, z: &Field) -> Result<f64> {
    let mut ls = Vec::new();
    let mut lr = Vec::new();
    for k in 0..4 {
        let s = 0.5f64.powi(k);
        let e = lyapunov_expansion_check(p, t, &z.scale(s))?;
        ls.push(s.ln());
        lr.push(e.cubic.abs().ln());
    }
    Ok(linear_fit(&ls, &lr).0)
}
