//! The linearized operator around a breather, its quadratic form and
//! spectrum, the Wronskian of the kernel and coercivity measurements.
//!
//! Everything here works in the envelope frame: node `xᵢ` of the grid sits at
//! the physical point `center(t) + xᵢ`, so shifts and time only move the
//! profile inside a window that follows it.
//!
//! The operator is written in divergence form
//! `L z = z₄ₓ + (P z_x)_x + V z` with
//! `P = 5B² + 10μB − 2(β² − α²)` and
//! `V = (α²+β²)² + 5B_x² + 10BB_xx + 15/2 B⁴ − 6(β²−α²)B²
//!      + 3μ(10B³ − 4(β²−α²)B + 10/3 B_xx + 10μB²)`,
//! which makes the discrete matrix `D₄ + D₁ diag(P) D₁ + diag(V)` symmetric
//! by construction.

use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{b_zero, gardner_breather, kernel_directions, resolved_grid, BreatherParams, Jet};
use crate::fields::{derivative, derivatives, inner_product, integrate, Field, Grid};
use crate::functionals::{Profile, Quantity};

/// Physical abscissae of the envelope frame.
pub fn frame_nodes(p: &BreatherParams, t: f64, grid: &Grid) -> Vec<f64> {
    let c = p.center(t);
    grid.nodes().into_iter().map(|x| c + x).collect()
}

/// Samples a jet-valued function in the envelope frame, keeping slot `n`.
pub fn frame_sample<F>(p: &BreatherParams, t: f64, grid: &Grid, n: usize, f: F) -> Result<Field>
where
    F: Fn(f64) -> Result<Jet>,
{
    let vals = frame_nodes(p, t, grid).into_iter().map(|x| f(x).map(|j| j.d(n))).collect::<Result<Vec<_>>>()?;
    Field::new(*grid, vals)
}

/// Coefficients `P` and `V` of the divergence form.
#[derive(Debug, Clone, PartialEq)]
pub struct Potentials {
    pub p: Field,
    pub v: Field,
}

pub fn potentials(par: &BreatherParams, t: f64, grid: &Grid) -> Result<Potentials> {
    par.validate()?;
    let s = par.beta * par.beta - par.alpha * par.alpha;
    let r4 = par.a2b2() * par.a2b2();
    let mu = par.mu;
    let mut pv = Vec::with_capacity(grid.len());
    let mut vv = Vec::with_capacity(grid.len());
    for x in frame_nodes(par, t, grid) {
        let j = gardner_breather(par, t, x)?;
        let (b, bx, bxx) = (j.value, j.dx[0], j.dx[1]);
        pv.push(5.0 * b * b + 10.0 * mu * b - 2.0 * s);
        vv.push(
            r4 + 5.0 * bx * bx + 10.0 * b * bxx + 7.5 * b.powi(4) - 6.0 * s * b * b
                + 3.0 * mu * (10.0 * b.powi(3) - 4.0 * s * b + 10.0 / 3.0 * bxx + 10.0 * mu * b * b),
        );
    }
    Ok(Potentials { p: Field::new(*grid, pv)?, v: Field::new(*grid, vv)? })
}

impl Potentials {
    /// Constant coefficients of the far-field operator (`B ≡ 0`).
    pub fn free(par: &BreatherParams, grid: &Grid) -> Self {
        let s = par.beta * par.beta - par.alpha * par.alpha;
        Self { p: Field::from_fn(*grid, |_| -2.0 * s), v: Field::from_fn(*grid, |_| par.a2b2() * par.a2b2()) }
    }
}

/// `L z` by spectral differentiation, without forming a matrix.
pub fn apply_operator(pot: &Potentials, z: &Field) -> Result<Field> {
    z.check_grid(&pot.p)?;
    let zx = derivative(z, 1)?;
    let flux = pot.p.zip_with(&zx, |a, b| a * b)?;
    let div = derivative(&flux, 1)?;
    let z4 = derivative(z, 4)?;
    let vals = (0..z.grid().len())
        .map(|i| z4.values()[i] + div.values()[i] + pot.v.values()[i] * z.values()[i])
        .collect();
    Field::new(*z.grid(), vals)
}

/// Discretized `L_μ` on the envelope frame.
#[derive(Debug, Clone)]
pub struct SymmetricOperator {
    pub grid: Grid,
    pub matrix: Mat<f64>,
    pub params: BreatherParams,
    pub t: f64,
    pub potentials: Potentials,
}

fn unit(grid: &Grid, j: usize) -> Field {
    let mut v = vec![0.0; grid.len()];
    v[j] = 1.0;
    Field::new(*grid, v).expect("finite")
}

pub fn assemble(p: &BreatherParams, t: f64, grid: &Grid) -> Result<SymmetricOperator> {
    assemble_from(p, t, potentials(p, t, grid)?)
}

pub fn assemble_from(p: &BreatherParams, t: f64, pot: Potentials) -> Result<SymmetricOperator> {
    let grid = &pot.p.grid().clone();
    let n = grid.len();
    // D₄ is circulant, so one column fixes it.
    let d4 = derivative(&unit(grid, 0), 4)?.into_values();
    let d1 = derivative(&unit(grid, 0), 1)?.into_values();
    let mut a = Mat::<f64>::zeros(n, n);
    for j in 0..n {
        // column j of D₁ diag(P) D₁
        let col: Vec<f64> = (0..n).map(|i| pot.p.values()[i] * d1[(i + n - j) % n]).collect();
        let div = derivative(&Field::new(*grid, col)?, 1)?;
        for i in 0..n {
            a[(i, j)] = d4[(i + n - j) % n] + div.values()[i];
        }
        a[(j, j)] += pot.v.values()[j];
    }
    for j in 0..n {
        for i in 0..j {
            let m = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = m;
            a[(j, i)] = m;
        }
    }
    Ok(SymmetricOperator { grid: *grid, matrix: a, params: *p, t, potentials: pot })
}

impl SymmetricOperator {
    pub fn apply(&self, z: &Field) -> Result<Field> {
        z.check_grid(&self.potentials.p)?;
        let n = self.grid.len();
        let zs = z.values();
        let out = (0..n)
            .map(|i| {
                let row = self.matrix.row(i);
                let terms: Vec<f64> = (0..n).map(|j| row[j] * zs[j]).collect();
                crate::fields::pairwise_sum(&terms)
            })
            .collect();
        Field::new(self.grid, out)
    }

    pub fn max_abs(&self) -> f64 {
        let n = self.grid.len();
        let mut m = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                m = m.max(self.matrix[(i, j)].abs());
            }
        }
        m
    }

    pub fn symmetry_defect(&self) -> f64 {
        let n = self.grid.len();
        let mut m = 0.0f64;
        for j in 0..n {
            for i in 0..j {
                m = m.max((self.matrix[(i, j)] - self.matrix[(j, i)]).abs());
            }
        }
        m
    }
}

/// `∫ z_xx² − ∫ P z_x² + ∫ V z²`, i.e. `∫ z L z` after integrating by parts.
pub fn quadratic_form(z: &Field, p: &BreatherParams, t: f64) -> Result<f64> {
    let pot = potentials(p, t, z.grid())?;
    quadratic_form_with(&pot, z)
}

pub fn quadratic_form_with(pot: &Potentials, z: &Field) -> Result<f64> {
    z.check_grid(&pot.p)?;
    let ds = derivatives(z, 2)?;
    let (z0, z1, z2) = (ds[0].values(), ds[1].values(), ds[2].values());
    let dens: Vec<f64> = (0..z0.len())
        .map(|i| z2[i] * z2[i] - pot.p.values()[i] * z1[i] * z1[i] + pot.v.values()[i] * z0[i] * z0[i])
        .collect();
    Ok(integrate(&Field::new(*z.grid(), dens)?))
}

/// Kernel samples `(B₁, B₂)` in the envelope frame.
pub fn kernel_fields(p: &BreatherParams, t: f64, grid: &Grid) -> Result<(Field, Field)> {
    let ks = frame_nodes(p, t, grid).into_iter().map(|x| kernel_directions(p, t, x)).collect::<Result<Vec<_>>>()?;
    Ok((
        Field::new(*grid, ks.iter().map(|k| k.0.value).collect())?,
        Field::new(*grid, ks.iter().map(|k| k.1.value).collect())?,
    ))
}

/// Lowest eigenpairs of the discretized operator; vectors are unit in `L²`.
#[derive(Debug, Clone)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Field>,
}

pub fn lowest_eigenpairs(op: &SymmetricOperator, k: usize) -> Result<Eigenpairs> {
    let evd = op.matrix.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let n = op.grid.len();
    let k = k.min(n);
    let scale = 1.0 / op.grid.spacing().sqrt();
    let values = (0..k).map(|i| s[i]).collect();
    let vectors = (0..k)
        .map(|i| Field::new(op.grid, (0..n).map(|r| u[(r, i)] * scale).collect()))
        .collect::<Result<Vec<_>>>()?;
    Ok(Eigenpairs { values, vectors })
}

/// `det [[B₁, B₂], [B₁ₓ, B₂ₓ]]` from exact jets.
pub fn wronskian_numeric(p: &BreatherParams, t: f64, x: f64) -> Result<f64> {
    let (b1, b2) = kernel_directions(p, t, x)?;
    Ok(b1.value * b2.dx[0] - b2.value * b1.dx[0])
}

/// `K = (α²+β²)² − 4μ²(α² − μ²)`, which equals `Δ² + 4β²μ²`.
pub fn wronskian_k(p: &BreatherParams) -> f64 {
    let (a2, m2) = (p.alpha * p.alpha, p.mu * p.mu);
    p.a2b2() * p.a2b2() - 4.0 * m2 * (a2 - m2)
}

/// Coefficients of `f_μ = sinh(2βy) + c_cosh cosh(2βy) − c_sin sin(2αy₁) + c_cos cos(2αy₁)`.
fn f_mu_coefficients(p: &BreatherParams) -> (f64, f64, f64) {
    let (a, b, m2) = (p.alpha, p.beta, p.mu * p.mu);
    let (r2, d, k) = (p.a2b2(), p.big_delta(), wronskian_k(p));
    let c_cosh = 4.0 * b * b * m2 / k;
    let c_sin = b * d * (r2 * r2 - 2.0 * m2 * (a * a - b * b)) / (a * r2 * k);
    let c_cos = 4.0 * b * b * m2 * d / (r2 * k);
    (c_cosh, c_sin, c_cos)
}

/// Closed form of the Wronskian determinant.
pub fn wronskian_closed(p: &BreatherParams, t: f64, x: f64) -> Result<f64> {
    p.validate()?;
    let (a, b) = (p.alpha, p.beta);
    let (r2, d, k) = (p.a2b2(), p.big_delta(), wronskian_k(p));
    let y1 = x + p.delta() * t + p.x1;
    let y2 = x + p.gamma() * t + p.x2;
    let log_d = crate::exact::Phase::of(p, t, x, 0).log_density(0, 0, 0, 0);
    // every term is divided by D² = e^{2 log D} before it can overflow
    let e = |s: f64| (s - 2.0 * log_d).exp();
    let (c_cosh, c_sin, c_cos) = f_mu_coefficients(p);
    let hyper = 0.5 * (e(2.0 * b * y2) - e(-2.0 * b * y2)) + 0.5 * c_cosh * (e(2.0 * b * y2) + e(-2.0 * b * y2));
    let trig = (-c_sin * (2.0 * a * y1).sin() + c_cos * (2.0 * a * y1).cos()) * e(0.0);
    Ok(4.0 * b.powi(3) * r2 * r2 * k / d.powi(3) * (hyper + trig))
}

/// Resolved grid on which `L B₀ + B` also vanishes to `1e−7·sup|B|`.
///
/// Matrix-free residuals of the fourth-order operator are more sensitive to
/// resolution than `∂ₓ⁴B` alone, so `N` keeps doubling (up to 16384) from
/// [`resolved_grid`] until that holds.
pub fn spectral_grid(p: &BreatherParams, t: f64) -> Result<Grid> {
    let mut g = resolved_grid(p, 40.0)?;
    loop {
        let r = b_zero_residual(p, t, &g)?;
        if r <= 1e-7 || g.len() >= 16384 {
            return Ok(g);
        }
        g = Grid::new(g.half_length(), 2 * g.len())?;
    }
}

fn b_zero_field(p: &BreatherParams, t: f64, g: &Grid) -> Result<Field> {
    frame_sample(p, t, g, 0, |x| b_zero(p, t, x))
}

/// `sup|L B₀ + B| / sup|B|`.
fn b_zero_residual(p: &BreatherParams, t: f64, g: &Grid) -> Result<f64> {
    let pot = potentials(p, t, g)?;
    let b = frame_sample(p, t, g, 0, |x| gardner_breather(p, t, x))?;
    let lb0 = apply_operator(&pot, &b_zero_field(p, t, g)?)?;
    let r = lb0.zip_with(&b, |a, b| a + b)?;
    Ok(r.sup_norm() / b.sup_norm())
}

/// Bottom of the continuous spectrum: `(α²+β²)²` when `|β| ≥ |α|`, else
/// `4α²β²`, the minimum of the symbol `k⁴ + 2(β²−α²)k² + (α²+β²)²`.
pub fn continuum_edge(p: &BreatherParams) -> f64 {
    if p.beta.abs() >= p.alpha.abs() {
        p.a2b2() * p.a2b2()
    } else {
        4.0 * p.alpha * p.alpha * p.beta * p.beta
    }
}

/// Eigenvalues below `−tol` count as negative, those within `tol` of zero as
/// kernel; `tol = 1e−3·4α²β²`, a thousandth of the lowest possible edge.
pub fn spectral_tolerance(p: &BreatherParams) -> f64 {
    4e-3 * p.alpha * p.alpha * p.beta * p.beta
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    pub t: f64,
    pub grid_half_length: f64,
    pub grid_points: usize,
    pub eigenvalues: Vec<f64>,
    pub negative_count: usize,
    pub kernel_dim_numeric: usize,
    pub lambda0_sq: f64,
    pub subspace_angle_kernel: f64,
    pub continuum_edge: f64,
    pub tolerance: f64,
}

impl SpectrumReport {
    /// One negative eigenvalue, a two-dimensional kernel aligned with
    /// `span{B₁, B₂}` to `1e−4`, and `λ₀²` well clear of the kernel.
    pub fn structure_ok(&self) -> bool {
        self.negative_count == 1
            && self.kernel_dim_numeric == 2
            && self.subspace_angle_kernel < 1e-4
            && self.lambda0_sq > 10.0 * self.tolerance
    }
}

/// Report together with the eigenpairs it was computed from.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub report: SpectrumReport,
    pub pairs: Eigenpairs,
}

fn orthonormalize(fs: &[Field]) -> Result<Vec<Field>> {
    let mut out: Vec<Field> = Vec::with_capacity(fs.len());
    for f in fs {
        let mut g = f.clone();
        // twice, for cancellation
        for _ in 0..2 {
            for e in &out {
                g = g.axpy(-inner_product(&g, e)?, e)?;
            }
        }
        let n = inner_product(&g, &g)?.sqrt();
        if !(n > 0.0) {
            return Err(Error::Structure("linearly dependent directions".into()));
        }
        out.push(g.scale(1.0 / n));
    }
    Ok(out)
}

/// Removes the `L²` components along `dirs`.
pub fn project_out(z: &Field, dirs: &[Field]) -> Result<Field> {
    let mut g = z.clone();
    for e in orthonormalize(dirs)? {
        g = g.axpy(-inner_product(&g, &e)?, &e)?;
    }
    Ok(g)
}

/// Largest principal angle between two 2-dimensional subspaces.
fn subspace_angle(a: &[Field], b: &[Field]) -> Result<f64> {
    let ea = orthonormalize(a)?;
    let eb = orthonormalize(b)?;
    let res = eb.iter().map(|u| project_out(u, &ea)).collect::<Result<Vec<_>>>()?;
    let g11 = inner_product(&res[0], &res[0])?;
    let g22 = inner_product(&res[1], &res[1])?;
    let g12 = inner_product(&res[0], &res[1])?;
    let tr = 0.5 * (g11 + g22);
    let top = tr + (0.25 * (g11 - g22).powi(2) + g12 * g12).sqrt();
    Ok(top.max(0.0).sqrt().min(1.0).asin())
}

pub fn spectrum(op: &SymmetricOperator, k: usize) -> Result<Spectrum> {
    if k < 4 {
        return Err(Error::Structure(format!("need at least 4 eigenvalues, asked for {k}")));
    }
    let pairs = lowest_eigenpairs(op, k)?;
    let p = &op.params;
    let tol = spectral_tolerance(p);
    let vals = &pairs.values;
    let negative_count = vals.iter().filter(|&&l| l < -tol).count();
    let kernel_dim_numeric = vals.iter().filter(|&&l| l.abs() < tol).count();
    let lambda0_sq = if vals[0] < 0.0 { -vals[0] } else { 0.0 };
    // the two eigenvalues closest to zero stand in for the kernel
    let mut idx: Vec<usize> = (0..vals.len()).collect();
    idx.sort_by(|&i, &j| vals[i].abs().total_cmp(&vals[j].abs()));
    let near: Vec<Field> = idx[..2].iter().map(|&i| pairs.vectors[i].clone()).collect();
    let (b1, b2) = kernel_fields(p, op.t, &op.grid)?;
    let subspace_angle_kernel = subspace_angle(&near, &[b1, b2])?;
    let report = SpectrumReport {
        alpha: p.alpha,
        beta: p.beta,
        mu: p.mu,
        t: op.t,
        grid_half_length: op.grid.half_length(),
        grid_points: op.grid.len(),
        eigenvalues: vals.clone(),
        negative_count,
        kernel_dim_numeric,
        lambda0_sq,
        subspace_angle_kernel,
        continuum_edge: continuum_edge(p),
        tolerance: tol,
    };
    Ok(Spectrum { report, pairs })
}

/// Unit eigenfunction of the negative eigenvalue, signed so `⟨B₋₁, B⟩ > 0`.
pub fn b_minus_one(sp: &Spectrum, p: &BreatherParams) -> Result<Field> {
    if sp.report.negative_count != 1 {
        return Err(Error::Structure(format!("{} negative eigenvalues, expected 1", sp.report.negative_count)));
    }
    let v = &sp.pairs.vectors[0];
    let b = frame_sample(p, sp.report.t, v.grid(), 0, |x| gardner_breather(p, sp.report.t, x))?;
    let v = v.scale(1.0 / inner_product(v, v)?.sqrt());
    Ok(if inner_product(&v, &b)? < 0.0 { v.scale(-1.0) } else { v })
}

/// Number of eigenvalues below `−tol`, from the inertia of an `LBLᵀ`
/// factorization of `A + tol·I` (Sylvester's law).
pub fn negative_count_inertia(op: &SymmetricOperator, tol: f64) -> Result<usize> {
    let n = op.grid.len();
    let mut a = op.matrix.clone();
    for i in 0..n {
        a[(i, i)] += tol;
    }
    let f = faer::linalg::solvers::Lblt::new(a.as_ref(), Side::Lower);
    let d = f.B_diag().column_vector();
    let s = f.B_subdiag().column_vector();
    let mut count = 0;
    let mut i = 0;
    while i < n {
        if i + 1 < n && s[i] != 0.0 {
            let det = d[i] * d[i + 1] - s[i] * s[i];
            if det < 0.0 {
                count += 1;
            } else if d[i] + d[i + 1] < 0.0 {
                count += 2;
            }
            i += 2;
        } else {
            if d[i] < 0.0 {
                count += 1;
            }
            i += 1;
        }
    }
    Ok(count)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BZeroReport {
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    pub t: f64,
    pub grid_points: usize,
    /// `sup|L B₀ + B| / sup|B|`
    pub residual: f64,
    pub q_b0: f64,
    pub pairing: f64,
    pub pairing_closed: f64,
    pub pass: bool,
}

impl BZeroReport {
    pub fn pairing_error(&self) -> f64 {
        (self.pairing - self.pairing_closed).abs() / self.pairing_closed.abs()
    }
}

pub fn b_zero_check(p: &BreatherParams, t: f64, g: &Grid) -> Result<BZeroReport> {
    let pot = potentials(p, t, g)?;
    let b = frame_sample(p, t, g, 0, |x| gardner_breather(p, t, x))?;
    let b0 = b_zero_field(p, t, g)?;
    let r = apply_operator(&pot, &b0)?.zip_with(&b, |a, b| a + b)?;
    let residual = r.sup_norm() / b.sup_norm();
    let q_b0 = quadratic_form_with(&pot, &b0)?;
    let pairing = inner_product(&b0, &b)?;
    let pairing_closed = crate::functionals::closed_form(Quantity::BZeroPairing, Profile::Breather(*p))?;
    let mut rep = BZeroReport {
        alpha: p.alpha,
        beta: p.beta,
        mu: p.mu,
        t,
        grid_points: g.len(),
        residual,
        q_b0,
        pairing,
        pairing_closed,
        pass: false,
    };
    rep.pass = residual < 1e-6 && q_b0 < 0.0 && rep.pairing_error() < 1e-7;
    Ok(rep)
}

/// `Q` with the two extra terms `10∫BB_x z z_x + 10μ∫B_x z z_x` of the
/// long-hand expansion. They do not come from `∫ z L z`; kept to measure the
/// difference.
pub fn quadratic_form_expanded(z: &Field, p: &BreatherParams, t: f64) -> Result<f64> {
    let g = z.grid();
    let pot = potentials(p, t, g)?;
    let base = quadratic_form_with(&pot, z)?;
    let b = frame_sample(p, t, g, 0, |x| gardner_breather(p, t, x))?;
    let bx = frame_sample(p, t, g, 1, |x| gardner_breather(p, t, x))?;
    let zx = derivative(z, 1)?;
    let dens: Vec<f64> = (0..g.len())
        .map(|i| 10.0 * (b.values()[i] + p.mu) * bx.values()[i] * z.values()[i] * zx.values()[i])
        .collect();
    Ok(base + integrate(&Field::new(*g, dens)?))
}

/// `f_μ(y₂)` with `y₁ = y₂ + phase`, `phase = (δ − γ)t + x₁ − x₂`.
pub fn f_mu(p: &BreatherParams, phase: f64, y2: f64) -> f64 {
    let (c_cosh, c_sin, c_cos) = f_mu_coefficients(p);
    let (a, b) = (p.alpha, p.beta);
    let y1 = y2 + phase;
    (2.0 * b * y2).sinh() + c_cosh * (2.0 * b * y2).cosh() - c_sin * (2.0 * a * y1).sin()
        + c_cos * (2.0 * a * y1).cos()
}

fn f_mu_prime(p: &BreatherParams, phase: f64, y2: f64) -> f64 {
    let (c_cosh, c_sin, c_cos) = f_mu_coefficients(p);
    let (a, b) = (p.alpha, p.beta);
    let y1 = y2 + phase;
    2.0 * b * ((2.0 * b * y2).cosh() + c_cosh * (2.0 * b * y2).sinh())
        - 2.0 * a * (c_sin * (2.0 * a * y1).cos() + c_cos * (2.0 * a * y1).sin())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootScan {
    pub count: usize,
    pub roots: Vec<f64>,
    /// `f′` at each root
    pub slopes: Vec<f64>,
    /// scan half-width actually used
    pub r0: f64,
    /// the starting bound `asinh(|c_sin| + |c_cos|)/(2|β|)` had to be widened
    pub widened: bool,
    /// a root where `B₁, B₂` and their derivatives all vanish
    pub degenerate: bool,
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Sign changes of `g` on `[−r, r]` with step at most `step`.
fn sign_changes(g: &impl Fn(f64) -> f64, r: f64, step: f64) -> Vec<f64> {
    let n = ((2.0 * r / step).ceil() as usize).max(2000);
    let h = 2.0 * r / n as f64;
    let mut roots = Vec::new();
    let mut prev = (-r, g(-r));
    for i in 1..=n {
        let y = -r + h * i as f64;
        let v = g(y);
        if v == 0.0 || (v > 0.0) != (prev.1 > 0.0) {
            roots.push(bisect(g, prev.0, y));
        }
        prev = (y, v);
    }
    roots
}

/// Roots of `f_μ` for the phase fixed by `t` and `x_tilde = x₁ − x₂`.
///
/// The scan starts from the sinh bound and doubles `R₀` until `f_μ` has the
/// sign of `sinh` at both ends: the `cosh` term is not covered by that bound.
pub fn f_mu_root_count(p: &BreatherParams, t: f64, x_tilde: f64) -> Result<RootScan> {
    p.validate()?;
    let phase = (p.delta() - p.gamma()) * t + x_tilde;
    let (_, c_sin, c_cos) = f_mu_coefficients(p);
    let b = p.beta.abs();
    let mut r0 = (c_sin.abs() + c_cos.abs()).asinh() / (2.0 * b);
    let start = r0;
    let f = |y: f64| f_mu(p, phase, y);
    let sgn = p.beta.signum();
    while !(sgn * f(r0) > 0.0 && sgn * f(-r0) < 0.0) {
        r0 = (2.0 * r0).max(1e-3 / b);
        if r0 > 1e3 / b {
            return Err(Error::Structure("f_mu keeps its sign pattern open at the scan ends".into()));
        }
    }
    let step = 0.01 * (1.0 / p.alpha.abs()).min(1.0 / b);
    let roots = sign_changes(&f, r0, step);
    let slopes = roots.iter().map(|&y| f_mu_prime(p, phase, y)).collect();
    let q = p.shifted(x_tilde, 0.0);
    let mut degenerate = false;
    for &y in &roots {
        let (b1, b2) = kernel_directions(&q, t, q.center(t) + y)?;
        let size = b1.value.abs() + b1.dx[0].abs() + b2.value.abs() + b2.dx[0].abs();
        degenerate |= size < 1e-8;
    }
    Ok(RootScan { count: roots.len(), roots, slopes, r0, widened: r0 > start, degenerate })
}

/// Sign changes of the numeric Wronskian determinant over the envelope frame
/// `[−R, R]`, located by bisection.
pub fn wronskian_zeros(p: &BreatherParams, t: f64, r: f64) -> Result<Vec<f64>> {
    p.validate()?;
    let c = p.center(t);
    let g = |y: f64| wronskian_numeric(p, t, c + y).unwrap_or(f64::NAN);
    let step = 0.01 * (1.0 / p.alpha.abs()).min(1.0 / p.beta.abs());
    Ok(sign_changes(&g, r, step))
}

/// Worst `|closed + numeric| / |closed|` over `x ∈ center ± r`, skipping points
/// where the closed form is below `1e−10` of its sup.
pub fn wronskian_max_rel_err(p: &BreatherParams, t: f64, r: f64, points: usize) -> Result<f64> {
    let c = p.center(t);
    let xs: Vec<f64> = (0..points).map(|i| c - r + 2.0 * r * i as f64 / (points - 1) as f64).collect();
    let pairs = xs
        .iter()
        .map(|&x| Ok((wronskian_closed(p, t, x)?, wronskian_numeric(p, t, x)?)))
        .collect::<Result<Vec<_>>>()?;
    let sup = pairs.iter().map(|q| q.0.abs()).fold(0.0, f64::max);
    Ok(pairs
        .iter()
        .filter(|q| q.0.abs() > 1e-10 * sup)
        .map(|q| (q.0 + q.1).abs() / q.0.abs())
        .fold(0.0, f64::max))
}

/// Gaussian white noise with every mode above `cutoff·k_max` removed.
pub fn band_limited_noise<R: rand::Rng>(grid: &Grid, cutoff: f64, rng: &mut R) -> Result<Field> {
    let white: Vec<f64> = (0..grid.len()).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect();
    let kmax = grid.max_wavenumber();
    let mut spec = crate::fields::forward(&white);
    for (c, k) in spec.iter_mut().zip(grid.wavenumbers()) {
        if k.abs() > cutoff * kmax {
            *c = num_complex::Complex64::new(0.0, 0.0);
        }
    }
    Field::new(*grid, crate::fields::inverse_real(spec))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoercivityReport {
    pub trials: usize,
    pub seed: u64,
    /// min `Q[z]/‖z‖²_{H²}` with `B₋₁, B₁, B₂` projected out
    pub nu_measured: f64,
    /// largest `σ` on the grid with `Q[z] ≥ σ‖z‖²_{H²} − (∫zB)²/σ` for every
    /// trial with `B₁, B₂` projected out; zero if none
    pub sigma_witness: f64,
    /// `Q[z]/‖z‖²_{H²}` for `z = B₋₁` with only `B₁, B₂` projected out
    pub unprojected_negative: f64,
    /// min `Q[z]/‖z‖²_{H²}` with `B, B₁, B₂` projected out
    pub nu_pairing_free: f64,
}

impl CoercivityReport {
    pub fn pass(&self) -> bool {
        self.nu_measured > 0.0 && self.sigma_witness > 0.0
    }
}

/// `σ` grid for the witness search: `10⁻⁶ … 1`, 61 points.
pub fn sigma_grid() -> Vec<f64> {
    (0..=60).map(|j| 10f64.powf(-6.0 + 0.1 * j as f64)).collect()
}

/// Trial fields: global band-limited noise with a random cutoff, noise under
/// a Gaussian envelope near the breather, and random combinations of the
/// computed low eigenvectors.
fn trial_fields(sp: &Spectrum, grid: &Grid, trials: usize, seed: u64, p: &BreatherParams) -> Result<Vec<Field>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / p.alpha.abs().min(p.beta.abs());
    (0..trials)
        .map(|i| match i % 3 {
            0 => {
                let c = rng.gen_range(0.02..0.5);
                band_limited_noise(grid, c, &mut rng)
            }
            1 => {
                let c = rng.gen_range(0.02..0.25);
                let w = scale * rng.gen_range(0.3..6.0);
                let x0 = scale * rng.gen_range(-3.0..3.0);
                let n = band_limited_noise(grid, c, &mut rng)?;
                let env = Field::from_fn(*grid, |x| (-((x - x0) / w).powi(2)).exp());
                n.zip_with(&env, |a, b| a * b)
            }
            _ => {
                let mut z = Field::zeros(*grid);
                for v in &sp.pairs.vectors[1..] {
                    z = z.axpy(rng.sample::<f64, _>(rand_distr::StandardNormal), v)?;
                }
                Ok(z)
            }
        })
        .collect()
}

fn ratio(pot: &Potentials, z: &Field) -> Result<(f64, f64)> {
    Ok((quadratic_form_with(pot, z)?, crate::fields::sobolev_norm_sq(z, 2)?))
}

pub fn coercivity_estimate(op: &SymmetricOperator, sp: &Spectrum, trials: usize, seed: u64) -> Result<CoercivityReport> {
    let p = &op.params;
    let t = op.t;
    let g = &op.grid;
    let pot = &op.potentials;
    let bm1 = b_minus_one(sp, p)?;
    let (b1, b2) = kernel_fields(p, t, g)?;
    let b = frame_sample(p, t, g, 0, |x| gardner_breather(p, t, x))?;
    let raw = trial_fields(sp, g, trials, seed, p)?;

    let full = [bm1.clone(), b1.clone(), b2.clone()];
    let kern = [b1.clone(), b2.clone()];
    let pairing_free = [b.clone(), b1.clone(), b2.clone()];
    let mut nu = f64::INFINITY;
    let mut nu_free = f64::INFINITY;
    // (Q, ‖z‖², (∫zB)²) for the witness search
    let mut witness_data = Vec::with_capacity(trials + 2);
    for z in &raw {
        let (q, n) = ratio(pot, &project_out(z, &full)?)?;
        nu = nu.min(q / n);
        let (q, n) = ratio(pot, &project_out(z, &pairing_free)?)?;
        nu_free = nu_free.min(q / n);
        let zk = project_out(z, &kern)?;
        let (q, n) = ratio(pot, &zk)?;
        witness_data.push((q, n, inner_product(&zk, &b)?.powi(2)));
    }
    let neg = project_out(&bm1, &kern)?;
    let (qn, nn) = ratio(pot, &neg)?;
    witness_data.push((qn, nn, inner_product(&neg, &b)?.powi(2)));
    let b0 = project_out(&b_zero_field(p, t, g)?, &kern)?;
    let (q0, n0) = ratio(pot, &b0)?;
    witness_data.push((q0, n0, inner_product(&b0, &b)?.powi(2)));

    let sigma_witness = sigma_grid()
        .into_iter()
        .filter(|&s| witness_data.iter().all(|&(q, n, m)| q + m / s >= s * n))
        .fold(0.0, f64::max);
    Ok(CoercivityReport {
        trials,
        seed,
        nu_measured: nu,
        sigma_witness,
        unprojected_negative: qn / nn,
        nu_pairing_free: nu_free,
    })
}
