//! Run configuration: built-in defaults, then a TOML file, then flags.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;

use conestab::boundary::MIN_RESOLUTION;
use conestab::cones::{build, ConeKind, ConeSpec};
use conestab::domain::{eta1_estimate, eta_upper, ConvexDomain};
use conestab::measure::QuadratureBudget;
use conestab::verify::Check;

use crate::CliError;

/// Flags shared by every subcommand. Unset flags fall back to the config
/// file and then to the defaults.
#[derive(Args, Debug, Default, Clone)]
pub struct Flags {
    /// Cone type: plane, y or t.
    #[arg(long)]
    pub cone: Option<ConeKind>,
    /// Ambient dimension (the cone sits in the first three coordinates).
    #[arg(long)]
    pub dim: Option<usize>,
    /// Domain parameter η.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Sliding radius δ; defaults to R1(η).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Maximum quadrature panels per sheet.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Mesh resolution (boundary subdivisions).
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated check names.
    #[arg(long, value_delimiter = ',')]
    pub checks: Option<Vec<String>>,
    /// Perturb-and-descend trials for `minimize`.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Allowed final-area shortfall for `minimize`.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// TOML file with the same keys as the flags (`out_dir` for `--out-dir`).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Record wall-clock runtimes in reports (they are then not reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    cone: Option<ConeKind>,
    dim: Option<usize>,
    eta: Option<f64>,
    delta: Option<f64>,
    budget: Option<usize>,
    resolution: Option<usize>,
    seed: Option<u64>,
    checks: Option<Vec<String>>,
    trials: Option<usize>,
    tol: Option<f64>,
    out_dir: Option<PathBuf>,
    timing: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub cone: ConeKind,
    pub dim: usize,
    pub eta: f64,
    pub delta: f64,
    pub budget: QuadratureBudget,
    pub resolution: Option<usize>,
    pub seed: u64,
    pub checks: Option<Vec<Check>>,
    pub trials: usize,
    pub tol: f64,
    pub out_dir: PathBuf,
    pub timing: bool,
}

fn read_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
}

impl RunConfig {
    pub fn resolve(flags: &Flags) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(p) => read_file(p)?,
            None => FileConfig::default(),
        };
        let cone = flags.cone.or(file.cone).unwrap_or(ConeKind::Y);
        let eta = flags.eta.or(file.eta).unwrap_or(0.1);
        let checks = match flags.checks.clone().or(file.checks) {
            Some(names) => Some(
                names
                    .iter()
                    .map(|n| n.trim().parse::<Check>().map_err(|e| CliError::Usage(e.to_string())))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            None => None,
        };
        let cfg = RunConfig {
            cone,
            dim: flags.dim.or(file.dim).unwrap_or(3),
            eta,
            delta: flags.delta.or(file.delta).unwrap_or(f64::NAN),
            budget: match flags.budget.or(file.budget) {
                Some(p) => QuadratureBudget::with_max_panels(p),
                None => QuadratureBudget::default(),
            },
            resolution: flags.resolution.or(file.resolution),
            seed: flags.seed.or(file.seed).unwrap_or(0),
            checks,
            trials: flags.trials.or(file.trials).unwrap_or(10),
            tol: flags.tol.or(file.tol).unwrap_or(if cone == ConeKind::T { 2e-3 } else { 1e-3 }),
            out_dir: flags.out_dir.clone().or(file.out_dir).unwrap_or_else(|| PathBuf::from("out")),
            timing: flags.timing || file.timing.unwrap_or(false),
        };
        cfg.validate()
    }

    fn validate(mut self) -> Result<Self, CliError> {
        let upper = eta_upper(self.cone);
        if !(self.eta > 0.0 && self.eta < upper) {
            let regime = if self.cone == ConeKind::Plane { "0 < η < 1" } else { "0 < η < 1/2" };
            return Err(CliError::Usage(format!(
                "eta = {} is outside the stability regime {regime} for the {} cone",
                self.eta, self.cone
            )));
        }
        let spec = self.spec()?;
        let eta1 = eta1_estimate(&spec, 50).map_err(CliError::from)?;
        if self.eta >= eta1 {
            return Err(CliError::Usage(format!(
                "eta = {} is not below the estimated η₁ = {eta1:.3} of the {} cone (plates must stay disjoint)",
                self.eta, self.cone
            )));
        }
        let r1 = ConvexDomain::new(spec, self.eta)?.r1();
        if self.delta.is_nan() {
            self.delta = r1;
        }
        if !(self.delta > 0.0 && self.delta <= r1 + 1e-12) {
            return Err(CliError::Usage(format!("delta = {} must lie in (0, R1(η) = {r1:.6}]", self.delta)));
        }
        if !(self.tol > 0.0) {
            return Err(CliError::Usage("tol must be positive".into()));
        }
        if self.budget.max_panels < self.budget.initial_panels {
            return Err(CliError::Usage(format!("budget must be at least {} panels", self.budget.initial_panels)));
        }
        if let Some(r) = self.resolution {
            if r < MIN_RESOLUTION {
                return Err(CliError::Usage(format!("resolution must be at least {MIN_RESOLUTION}")));
            }
        }
        if self.trials == 0 {
            return Err(CliError::Usage("trials must be at least 1".into()));
        }
        Ok(self)
    }

    pub fn spec(&self) -> Result<ConeSpec, CliError> {
        build(self.cone, self.dim).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn domain(&self) -> Result<ConvexDomain, CliError> {
        Ok(ConvexDomain::new(self.spec()?, self.eta)?)
    }
}
