use std::io;

use gardner_core::dynamics::{stability_experiment_observed, Perturbation, SolverConfig, StabilityReport};
use gardner_core::exact::{BreatherParams, SolitonParams};
use gardner_core::exec::Execution;
use gardner_core::fields::{Field, Grid};
use gardner_core::functionals::{closed_form, compare_closed_forms, Profile, Quantity};
use gardner_core::identities::{check_all, CheckOptions};
use gardner_core::spectral::{
    assemble, coercivity_estimate, f_mu_root_count, spectral_grid, spectrum, wronskian_max_rel_err,
};
use gardner_core::sweep::{self, SweepPoint};
use gardner_core::Error;
use serde::Serialize;
use serde_json::Value;

use crate::config::{Command, RunConfig, UsageError};
use crate::output::Artifacts;

/// Wronskian comparison window around the envelope, and its sample count.
const WRONSKIAN_RADIUS: f64 = 20.0;
const WRONSKIAN_POINTS: usize = 801;
const WRONSKIAN_TOLERANCE: f64 = 1e-8;
const AMPLIFICATION_BOUND: f64 = 50.0;
const RETURN_TOLERANCE: f64 = 1e-6;
const DRIFT_TOLERANCE: f64 = 1e-9;

#[derive(Debug)]
pub enum RunError {
    Usage(String),
    Failed(String),
}

impl From<UsageError> for RunError {
    fn from(e: UsageError) -> Self {
        RunError::Usage(e.0)
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::ParameterDomain(_) | Error::InvalidGrid(_) | Error::SolverConfig(_) | Error::UnknownQuantity(_) => {
                RunError::Usage(e.to_string())
            }
            _ => RunError::Failed(e.to_string()),
        }
    }
}

impl From<io::Error> for RunError {
    fn from(e: io::Error) -> Self {
        RunError::Usage(format!("output: {e}"))
    }
}

/// One gated check and its one-line summary.
#[derive(Debug, Clone)]
pub struct Check {
    pub id: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(id: impl Into<String>, pass: bool, detail: String) -> Self {
        Self { id: id.into(), pass, detail }
    }
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    /// Informational lines that gate nothing.
    pub notes: Vec<String>,
}

impl Outcome {
    pub fn failures(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.id.as_str()).collect()
    }
}

fn exec(cfg: &RunConfig) -> Execution {
    if cfg.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn short(x: f64) -> String {
    let s = format!("{x:.6}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn tag(p: &BreatherParams) -> String {
    format!("({},{},{})", short(p.alpha), short(p.beta), short(p.mu))
}

/// The single configured point, or the sweep lattice when any range is set.
fn points(cfg: &RunConfig) -> Result<Vec<SweepPoint>, RunError> {
    let shift = |pts: Vec<SweepPoint>| {
        pts.into_iter()
            .map(|s| match s {
                SweepPoint::Admissible(p) => SweepPoint::Admissible(p.shifted(cfg.x1, cfg.x2)),
                other => other,
            })
            .collect()
    };
    if cfg.has_sweep() {
        let or = |v: &Option<Vec<f64>>, x: f64| v.clone().unwrap_or_else(|| vec![x]);
        return Ok(shift(sweep::absolute(
            &or(&cfg.sweep_alpha, cfg.alpha),
            &or(&cfg.sweep_beta, cfg.beta),
            &or(&cfg.sweep_mu, cfg.mu),
        )));
    }
    if cfg.command == Command::Sweep {
        return Ok(shift(sweep::functionals().classify()));
    }
    let p = BreatherParams::with_shifts(cfg.alpha, cfg.beta, cfg.mu, cfg.x1, cfg.x2)?;
    Ok(vec![SweepPoint::Admissible(p)])
}

fn admissible(pts: Vec<SweepPoint>, out: &mut Outcome) -> Vec<BreatherParams> {
    pts.into_iter()
        .filter_map(|s| match s {
            SweepPoint::Admissible(p) => Some(p),
            SweepPoint::Skipped { alpha, beta, mu, reason } => {
                out.notes.push(format!("SKIP ({},{},{}): {reason}", short(alpha), short(beta), short(mu)));
                None
            }
        })
        .collect()
}

fn single(cfg: &RunConfig) -> Result<BreatherParams, RunError> {
    if cfg.has_sweep() {
        return Err(RunError::Usage(format!("{} runs one parameter point; drop the sweep ranges", cfg.command.name())));
    }
    Ok(BreatherParams::with_shifts(cfg.alpha, cfg.beta, cfg.mu, cfg.x1, cfg.x2)?)
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let mut art = Artifacts::new(cfg)?;
    match cfg.command {
        Command::Verify => verify(cfg, &mut art),
        Command::Spectrum => spectrum_cmd(cfg, &mut art),
        Command::Simulate | Command::Stability => dynamics(cfg, &mut art),
        Command::Sweep => sweep_cmd(cfg, &mut art),
        Command::ClosedForms => closed_forms(cfg, &mut art),
    }
}

#[derive(Debug, Serialize)]
struct VerifyRecord {
    identity: &'static str,
    alpha: f64,
    beta: f64,
    mu: f64,
    t: f64,
    sup_residual: f64,
    rel_scale: f64,
    gated: bool,
    pass: bool,
}

fn verify(cfg: &RunConfig, art: &mut Artifacts) -> Result<Outcome, RunError> {
    let mut out = Outcome::default();
    let (l, n) = cfg.grid.unwrap_or((40.0, 1024));
    let opts = CheckOptions { min_half_length: l, points: n, execution: exec(cfg) };
    let mut records = Vec::new();
    for p in admissible(points(cfg)?, &mut out) {
        for r in check_all(&p, cfg.t, &opts)? {
            let id = r.identity.name();
            let line = format!("{id} {} t={} rel={:.3e}", tag(&p), cfg.t, r.relative());
            if r.gated {
                out.checks.push(Check::new(format!("{id}@{}", tag(&p)), r.pass, line));
            } else {
                out.notes.push(format!("INFO {line}"));
            }
            records.push(VerifyRecord {
                identity: id,
                alpha: p.alpha,
                beta: p.beta,
                mu: p.mu,
                t: r.t,
                sup_residual: r.sup_residual,
                rel_scale: r.rel_scale,
                gated: r.gated,
                pass: r.pass,
            });
        }
    }
    art.json_records(&records)?;
    art.csv_rows(".csv", &records)?;
    Ok(out)
}

#[derive(Debug, Serialize)]
struct SpectrumRecord {
    alpha: f64,
    beta: f64,
    mu: f64,
    t: f64,
    grid_half_length: f64,
    grid_points: usize,
    eigenvalues: Vec<f64>,
    negative_count: usize,
    kernel_dim: usize,
    lambda0_sq: f64,
    subspace_angle: f64,
    nu_measured: Option<f64>,
    sigma_witness: Option<f64>,
    f_mu_root_count: usize,
    wronskian_max_rel_err: f64,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct SpectrumRow {
    alpha: f64,
    beta: f64,
    mu: f64,
    t: f64,
    grid_points: usize,
    negative_count: usize,
    kernel_dim: usize,
    lambda0_sq: f64,
    subspace_angle: f64,
    nu_measured: Option<f64>,
    sigma_witness: Option<f64>,
    f_mu_root_count: usize,
    wronskian_max_rel_err: f64,
    pass: bool,
    eigenvalues: String,
}

fn spectrum_point(cfg: &RunConfig, p: &BreatherParams) -> Result<SpectrumRecord, Error> {
    let g = match cfg.grid {
        Some((l, n)) => Grid::new(l, n)?,
        None => spectral_grid(p, cfg.t)?,
    };
    let op = assemble(p, cfg.t, &g)?;
    let sp = spectrum(&op, cfg.eigenvalues)?;
    let coer = match coercivity_estimate(&op, &sp, cfg.trials, cfg.seed) {
        Ok(c) => Some(c),
        Err(Error::Structure(_)) => None,
        Err(e) => return Err(e),
    };
    let roots = f_mu_root_count(p, cfg.t, 0.0)?;
    let werr = wronskian_max_rel_err(p, cfg.t, WRONSKIAN_RADIUS, WRONSKIAN_POINTS)?;
    let r = &sp.report;
    let pass = r.structure_ok()
        && coer.as_ref().is_some_and(|c| c.pass())
        && roots.count == 1
        && werr <= WRONSKIAN_TOLERANCE;
    Ok(SpectrumRecord {
        alpha: p.alpha,
        beta: p.beta,
        mu: p.mu,
        t: cfg.t,
        grid_half_length: r.grid_half_length,
        grid_points: r.grid_points,
        eigenvalues: r.eigenvalues.clone(),
        negative_count: r.negative_count,
        kernel_dim: r.kernel_dim_numeric,
        lambda0_sq: r.lambda0_sq,
        subspace_angle: r.subspace_angle_kernel,
        nu_measured: coer.as_ref().map(|c| c.nu_measured),
        sigma_witness: coer.as_ref().map(|c| c.sigma_witness),
        f_mu_root_count: roots.count,
        wronskian_max_rel_err: werr,
        pass,
    })
}

fn spectrum_cmd(cfg: &RunConfig, art: &mut Artifacts) -> Result<Outcome, RunError> {
    let mut out = Outcome::default();
    let pts = admissible(points(cfg)?, &mut out);
    let results = exec(cfg).map(&pts, |p| spectrum_point(cfg, p));
    let mut records = Vec::new();
    for (p, r) in pts.iter().zip(results) {
        let r = r?;
        let line = format!(
            "spectrum {} neg={} ker={} angle={:.2e} lambda0_sq={:.4e} nu={} roots={} wronskian={:.2e}",
            tag(p),
            r.negative_count,
            r.kernel_dim,
            r.subspace_angle,
            r.lambda0_sq,
            r.nu_measured.map_or("n/a".into(), |v| format!("{v:.3e}")),
            r.f_mu_root_count,
            r.wronskian_max_rel_err
        );
        out.checks.push(Check::new(format!("spectrum@{}", tag(p)), r.pass, line));
        records.push(r);
    }
    art.json_records(&records)?;
    let rows: Vec<SpectrumRow> = records
        .iter()
        .map(|r| SpectrumRow {
            alpha: r.alpha,
            beta: r.beta,
            mu: r.mu,
            t: r.t,
            grid_points: r.grid_points,
            negative_count: r.negative_count,
            kernel_dim: r.kernel_dim,
            lambda0_sq: r.lambda0_sq,
            subspace_angle: r.subspace_angle,
            nu_measured: r.nu_measured,
            sigma_witness: r.sigma_witness,
            f_mu_root_count: r.f_mu_root_count,
            wronskian_max_rel_err: r.wronskian_max_rel_err,
            pass: r.pass,
            eigenvalues: r.eigenvalues.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(" "),
        })
        .collect();
    art.csv_rows(".csv", &rows)?;
    Ok(out)
}

#[derive(Debug, Serialize)]
struct SeriesRow {
    t: f64,
    #[serde(rename = "distance_H2")]
    distance_h2: f64,
    x1: f64,
    x2: f64,
    #[serde(rename = "M")]
    mass: f64,
    #[serde(rename = "E")]
    energy: f64,
    #[serde(rename = "F")]
    f: f64,
    #[serde(rename = "H")]
    h: f64,
}

fn summary(r: &StabilityReport) -> Result<Value, RunError> {
    let mut v = serde_json::to_value(r).map_err(|e| RunError::Failed(e.to_string()))?;
    if let Value::Object(m) = &mut v {
        m.remove("samples");
        m.insert("snapshots".into(), Value::from(r.samples.len()));
        m.insert("slope_is_zero".into(), Value::from(r.slope_is_zero()));
        m.insert("growth_is_secular".into(), Value::from(r.growth_is_secular()));
    }
    Ok(v)
}

fn dynamics(cfg: &RunConfig, art: &mut Artifacts) -> Result<Outcome, RunError> {
    let p = single(cfg)?;
    let (l, n) = cfg.grid.expect("dynamics always has a grid");
    let scfg = SolverConfig { grid: Grid::new(l, n)?, dt: cfg.dt, integrator: cfg.integrator, ..Default::default() };
    let pert = Perturbation { kind: cfg.perturbation, eta: cfg.eta, seed: cfg.seed };
    let mut first: Option<(Vec<f64>, Field)> = None;
    let mut last: Option<(Vec<f64>, Field)> = None;
    let r = stability_experiment_observed(&p, &pert, cfg.periods, &scfg, |_, w, offset| {
        let xs: Vec<f64> = w.grid().nodes().into_iter().map(|x| x + offset).collect();
        if first.is_none() {
            first = Some((xs, w.clone()));
        } else {
            last = Some((xs, w.clone()));
        }
    })?;

    let mut out = Outcome::default();
    let who = format!("{}", tag(&p));
    out.checks.push(Check::new(
        format!("captured@{who}"),
        r.captured,
        match r.escape_time {
            None => format!("captured {who} over {} periods", r.horizon),
            Some(t) => format!("captured {who}: escaped at t={t}"),
        },
    ));
    match cfg.command {
        Command::Stability => {
            out.checks.push(Check::new(
                format!("amplification@{who}"),
                r.amplification <= AMPLIFICATION_BOUND,
                format!("amplification {who} {:.4} (sup distance {:.3e})", r.amplification, r.sup_distance),
            ));
            out.checks.push(Check::new(
                format!("secular-growth@{who}"),
                !r.growth_is_secular(),
                format!("late slope {who} {:.3e} +- {:.3e}", r.late_slope, r.late_slope_stderr),
            ));
            out.notes.push(format!("INFO modulation speed / eta = {:.4e}", r.modulation_speed / cfg.eta.max(f64::MIN_POSITIVE)));
        }
        _ if cfg.eta == 0.0 => {
            out.checks.push(Check::new(
                format!("return@{who}"),
                r.sup_distance <= RETURN_TOLERANCE,
                format!("distance to the exact orbit {who} {:.3e}", r.sup_distance),
            ));
            out.checks.push(Check::new(
                format!("drift@{who}"),
                r.invariant_drift <= DRIFT_TOLERANCE,
                format!("invariant drift {who} {:.3e}", r.invariant_drift),
            ));
        }
        _ => out.notes.push(format!("INFO sup distance {:.3e}, drift {:.3e}", r.sup_distance, r.invariant_drift)),
    }

    art.json_records(&[summary(&r)?])?;
    let rows: Vec<SeriesRow> = r
        .samples
        .iter()
        .map(|s| SeriesRow {
            t: s.t,
            distance_h2: s.distance_h2,
            x1: s.x1,
            x2: s.x2,
            mass: s.invariants.mass,
            energy: s.invariants.energy,
            f: s.invariants.f,
            h: s.invariants.h,
        })
        .collect();
    art.csv_rows(".csv", &rows)?;
    let ts: Vec<f64> = r.samples.iter().map(|s| s.t).collect();
    let ds: Vec<f64> = r.samples.iter().map(|s| s.distance_h2).collect();
    art.xy("-distance.dat", ("t", "distance_H2"), &ts, &ds)?;
    for (name, snap) in [("-profile-initial.dat", &first), ("-profile-final.dat", &last)] {
        if let Some((xs, w)) = snap {
            art.xy(name, ("x", "w"), xs, w.values())?;
        }
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
struct SweepRow {
    alpha: f64,
    beta: f64,
    mu: f64,
    quantity: String,
    quadrature: Option<f64>,
    closed_form: Option<f64>,
    rel_err: Option<f64>,
    status: String,
}

impl SweepRow {
    fn empty(alpha: f64, beta: f64, mu: f64, status: String) -> Self {
        Self { alpha, beta, mu, quantity: String::new(), quadrature: None, closed_form: None, rel_err: None, status }
    }
}

fn sweep_cmd(cfg: &RunConfig, art: &mut Artifacts) -> Result<Outcome, RunError> {
    let mut out = Outcome::default();
    let pts = points(cfg)?;
    let results = exec(cfg).map(&pts, |s| match s {
        SweepPoint::Admissible(p) => Some(compare_closed_forms(p)),
        SweepPoint::Skipped { .. } => None,
    });
    let mut rows = Vec::new();
    for (s, r) in pts.iter().zip(results) {
        match (s, r) {
            (SweepPoint::Skipped { alpha, beta, mu, reason }, _) => {
                out.notes.push(format!("SKIP ({},{},{}): {reason}", short(*alpha), short(*beta), short(*mu)));
                rows.push(SweepRow::empty(*alpha, *beta, *mu, format!("skipped: {reason}")));
            }
            (SweepPoint::Admissible(p), Some(Err(e))) => {
                out.checks.push(Check::new(format!("sweep@{}", tag(p)), false, format!("sweep {}: {e}", tag(p))));
                rows.push(SweepRow::empty(p.alpha, p.beta, p.mu, format!("error: {e}")));
            }
            (SweepPoint::Admissible(p), Some(Ok(cmp))) => {
                for c in cmp {
                    let id = format!("{}@{}", c.quantity, tag(p));
                    out.checks.push(Check::new(id.clone(), c.pass(), format!("{id} rel={:.3e}", c.rel_err)));
                    rows.push(SweepRow {
                        alpha: c.alpha,
                        beta: c.beta,
                        mu: c.mu,
                        quantity: c.quantity.id().to_string(),
                        quadrature: Some(c.quadrature),
                        closed_form: Some(c.closed_form),
                        rel_err: Some(c.rel_err),
                        status: if c.pass() { "pass" } else { "fail" }.into(),
                    });
                }
            }
            (SweepPoint::Admissible(_), None) => unreachable!("admissible points are always compared"),
        }
    }
    art.csv_rows(".csv", &rows)?;
    art.json_records(&rows)?;
    Ok(out)
}

#[derive(Debug, Serialize)]
struct ClosedFormRecord {
    profile: &'static str,
    alpha: f64,
    beta: f64,
    mu: f64,
    c: Option<f64>,
    quantity: &'static str,
    value: f64,
}

fn closed_forms(cfg: &RunConfig, art: &mut Artifacts) -> Result<Outcome, RunError> {
    let p = single(cfg)?;
    let s = SolitonParams::new(p.beta * p.beta, p.mu)?;
    let mut out = Outcome::default();
    let mut records = Vec::new();
    for q in Quantity::ALL {
        let (profile, target, c) = if q.is_soliton() {
            ("soliton", Profile::Soliton(s), Some(s.c))
        } else {
            ("breather", Profile::Breather(p), None)
        };
        let value = closed_form(q, target)?;
        out.notes.push(format!("{profile} {q} = {value:.15e}"));
        records.push(ClosedFormRecord { profile, alpha: p.alpha, beta: p.beta, mu: p.mu, c, quantity: q.id(), value });
    }
    art.json_records(&records)?;
    art.csv_rows(".csv", &records)?;
    Ok(out)
}
