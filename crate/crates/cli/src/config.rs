//! Run configuration: an optional TOML file, overridden flag by flag.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use gardner_core::dynamics::{Integrator, PerturbationKind};
use gardner_core::sweep::parse_range;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Subcommand)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Pointwise identities of the breather
    Verify,
    /// Spectrum of the linearized operator, Wronskian and coercivity
    Spectrum,
    /// Evolve a (possibly perturbed) breather
    Simulate,
    /// Perturbed breather with modulation over many periods
    Stability,
    /// Closed forms against quadrature over a parameter lattice
    Sweep,
    /// Print the closed forms at one point
    ClosedForms,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Spectrum => "spectrum",
            Command::Simulate => "simulate",
            Command::Stability => "stability",
            Command::Sweep => "sweep",
            Command::ClosedForms => "closed-forms",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PerturbationArg {
    RandomBandLimited,
    KernelAligned,
    ScalingAligned,
    B0Aligned,
}

impl From<PerturbationArg> for PerturbationKind {
    fn from(a: PerturbationArg) -> Self {
        match a {
            PerturbationArg::RandomBandLimited => PerturbationKind::RandomBandLimited,
            PerturbationArg::KernelAligned => PerturbationKind::KernelAligned,
            PerturbationArg::ScalingAligned => PerturbationKind::ScalingAligned,
            PerturbationArg::B0Aligned => PerturbationKind::B0Aligned,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IntegratorArg {
    EtdRk4,
    IfRk4,
}

impl From<IntegratorArg> for Integrator {
    fn from(a: IntegratorArg) -> Self {
        match a {
            IntegratorArg::EtdRk4 => Integrator::EtdRk4,
            IntegratorArg::IfRk4 => Integrator::IfRk4,
        }
    }
}

/// Flags shared by every subcommand. Unset flags fall back to the config
/// file, then to per-command defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub x1: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub x2: Option<f64>,
    /// Evaluation time for verify and spectrum
    #[arg(long, global = true)]
    pub t: Option<f64>,
    /// Half length of the periodic box
    #[arg(long = "grid-L", global = true)]
    pub grid_l: Option<f64>,
    /// Number of grid points
    #[arg(long = "grid-N", global = true)]
    pub grid_n: Option<usize>,
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    #[arg(long, global = true)]
    pub periods: Option<f64>,
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub perturbation: Option<PerturbationArg>,
    #[arg(long, global = true, value_enum)]
    pub integrator: Option<IntegratorArg>,
    /// Random trials for the coercivity estimate
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Number of lowest eigenvalues reported
    #[arg(long, global = true)]
    pub eigenvalues: Option<usize>,
    /// `start:stop:count` values of alpha
    #[arg(long, global = true)]
    pub sweep_alpha: Option<String>,
    /// `start:stop:count` values of beta
    #[arg(long, global = true)]
    pub sweep_beta: Option<String>,
    /// `start:stop:count` absolute values of mu
    #[arg(long, global = true)]
    pub sweep_mu: Option<String>,
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    /// Write JSON records (with --csv, only the named formats are written)
    #[arg(long, global = true)]
    pub json: bool,
    /// Write CSV tables
    #[arg(long, global = true)]
    pub csv: bool,
    /// Write two-column plot data
    #[arg(long, global = true)]
    pub plot: bool,
    /// Run sweeps on one thread
    #[arg(long, global = true)]
    pub sequential: bool,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    params: ParamsSection,
    #[serde(default)]
    grid: GridSection,
    #[serde(default)]
    solver: SolverSection,
    #[serde(default)]
    spectrum: SpectrumSection,
    #[serde(default)]
    sweep: SweepSection,
    #[serde(default)]
    output: OutputSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsSection {
    alpha: Option<f64>,
    beta: Option<f64>,
    mu: Option<f64>,
    x1: Option<f64>,
    x2: Option<f64>,
    t: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    half_length: Option<f64>,
    points: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverSection {
    dt: Option<f64>,
    periods: Option<f64>,
    eta: Option<f64>,
    seed: Option<u64>,
    perturbation: Option<PerturbationKind>,
    integrator: Option<Integrator>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpectrumSection {
    trials: Option<usize>,
    eigenvalues: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    alpha: Option<String>,
    beta: Option<String>,
    mu: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    dir: Option<PathBuf>,
    json: Option<bool>,
    csv: Option<bool>,
    plot: Option<bool>,
}

/// Fully resolved configuration. Everything that can change a number is
/// serialized into the hash; output plumbing is not.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    pub x1: f64,
    pub x2: f64,
    pub t: f64,
    /// `None` picks a grid per point.
    pub grid: Option<(f64, usize)>,
    pub dt: f64,
    pub periods: f64,
    pub eta: f64,
    pub seed: u64,
    pub perturbation: PerturbationKind,
    pub integrator: Integrator,
    pub trials: usize,
    pub eigenvalues: usize,
    pub sweep_alpha: Option<Vec<f64>>,
    pub sweep_beta: Option<Vec<f64>>,
    pub sweep_mu: Option<Vec<f64>>,
    #[serde(skip)]
    pub output_dir: PathBuf,
    #[serde(skip)]
    pub json: bool,
    #[serde(skip)]
    pub csv: bool,
    #[serde(skip)]
    pub plot: bool,
    #[serde(skip)]
    pub sequential: bool,
}

#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn read_file(path: &Path) -> Result<FileConfig, UsageError> {
    let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())))
}

fn range(spec: Option<String>) -> Result<Option<Vec<f64>>, UsageError> {
    spec.map(|s| parse_range(&s).map_err(|e| UsageError(e.to_string()))).transpose()
}

impl RunConfig {
    pub fn resolve(command: Command, flags: Flags) -> Result<Self, UsageError> {
        let file = match &flags.config {
            Some(p) => read_file(p)?,
            None => FileConfig::default(),
        };
        let grid = match (flags.grid_l.or(file.grid.half_length), flags.grid_n.or(file.grid.points)) {
            (None, None) if command == Command::Spectrum => None,
            (l, n) => {
                let default_n = match command {
                    Command::Simulate => 2048,
                    Command::Stability => 1536,
                    _ => 1024,
                };
                Some((l.unwrap_or(40.0), n.unwrap_or(default_n)))
            }
        };
        let (default_dt, default_periods, default_eta) = match command {
            Command::Stability => (2e-4, 50.0, 1e-3),
            _ => (5e-5, 1.0, 0.0),
        };
        let want_json = flags.json || file.output.json.unwrap_or(false);
        let want_csv = flags.csv || file.output.csv.unwrap_or(false);
        let cfg = RunConfig {
            command,
            alpha: flags.alpha.or(file.params.alpha).unwrap_or(1.0),
            beta: flags.beta.or(file.params.beta).unwrap_or(1.0),
            mu: flags.mu.or(file.params.mu).unwrap_or(0.5),
            x1: flags.x1.or(file.params.x1).unwrap_or(0.0),
            x2: flags.x2.or(file.params.x2).unwrap_or(0.0),
            t: flags.t.or(file.params.t).unwrap_or(0.0),
            grid,
            dt: flags.dt.or(file.solver.dt).unwrap_or(default_dt),
            periods: flags.periods.or(file.solver.periods).unwrap_or(default_periods),
            eta: flags.eta.or(file.solver.eta).unwrap_or(default_eta),
            seed: flags.seed.or(file.solver.seed).unwrap_or(0),
            perturbation: flags
                .perturbation
                .map(Into::into)
                .or(file.solver.perturbation)
                .unwrap_or(PerturbationKind::RandomBandLimited),
            integrator: flags.integrator.map(Into::into).or(file.solver.integrator).unwrap_or_default(),
            trials: flags.trials.or(file.spectrum.trials).unwrap_or(200),
            eigenvalues: flags.eigenvalues.or(file.spectrum.eigenvalues).unwrap_or(8),
            sweep_alpha: range(flags.sweep_alpha.or(file.sweep.alpha))?,
            sweep_beta: range(flags.sweep_beta.or(file.sweep.beta))?,
            sweep_mu: range(flags.sweep_mu.or(file.sweep.mu))?,
            output_dir: flags.output_dir.or(file.output.dir).unwrap_or_else(|| PathBuf::from("gardner-out")),
            json: want_json || !want_csv,
            csv: want_csv || !want_json,
            plot: flags.plot || file.output.plot.unwrap_or(false),
            sequential: flags.sequential,
        };
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), UsageError> {
        let bad = |m: String| Err(UsageError(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt = {} must be positive", self.dt));
        }
        if !(self.periods > 0.0 && self.periods.is_finite()) {
            return bad(format!("periods = {} must be positive", self.periods));
        }
        if self.eigenvalues < 4 {
            return bad("at least 4 eigenvalues are needed".into());
        }
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        if let Some((l, n)) = self.grid {
            if let Err(e) = gardner_core::fields::Grid::new(l, n) {
                return bad(e.to_string());
            }
        }
        Ok(())
    }

    pub fn has_sweep(&self) -> bool {
        self.sweep_alpha.is_some() || self.sweep_beta.is_some() || self.sweep_mu.is_some()
    }

    /// First 12 hex digits of the SHA-256 of the canonical JSON of the config.
    pub fn hash(&self) -> String {
        let canon = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(format!("{VERSION}\n{canon}").as_bytes());
        let mut s = String::new();
        for b in &digest[..6] {
            write!(s, "{b:02x}").unwrap();
        }
        s
    }
}
