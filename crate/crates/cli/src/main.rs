use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use conestab::boundary::{boundary_mesh, DEFAULT_RESOLUTION};
use conestab::cones::ConeKind;
use conestab::deform::{stability_experiment, ExperimentOptions};
use conestab::error::Error;
use conestab::mesh_io::obj_string;
use conestab::verify::{run_check, Check, CheckConfig, CheckOutput};

mod config;

use config::{Flags, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "conestab", version, about = "Minimal cones in convex domains: build, verify, minimize")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the cone, its domain and a labelled boundary mesh.
    Build(Flags),
    /// Run verification checks and write one JSON report per check.
    Verify(Flags),
    /// Perturb the cone mesh and descend; write traces and a summary.
    Minimize(Flags),
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Internal(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::ResolutionTooCoarse(_) => CliError::Usage(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

fn write(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))
}

fn out_dir(cfg: &RunConfig) -> Result<&Path, CliError> {
    fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| CliError::Internal(format!("cannot create {}: {e}", cfg.out_dir.display())))?;
    Ok(&cfg.out_dir)
}

fn json(v: &impl serde::Serialize) -> Result<String, CliError> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn cmd_build(cfg: &RunConfig) -> Result<bool, CliError> {
    let dom = cfg.domain()?;
    let bm = boundary_mesh(&dom, cfg.resolution.unwrap_or(DEFAULT_RESOLUTION))?;
    let dir = out_dir(cfg)?;
    write(dir, &format!("{}.json", cfg.cone), json(dom.spec())?)?;
    write(dir, "domain.json", json(&dom.to_json())?)?;
    write(dir, "boundary.obj", obj_string(&bm.mesh))?;
    write(dir, "boundary_labels.csv", bm.labels_csv())?;
    println!(
        "built {} cone in R^{} with eta = {}: {} boundary triangles in {}",
        cfg.cone,
        cfg.dim,
        cfg.eta,
        bm.mesh.triangles().len(),
        dir.display()
    );
    Ok(true)
}

fn default_checks(cone: ConeKind) -> Vec<Check> {
    Check::ALL
        .into_iter()
        .filter(|c| cone == ConeKind::T || !matches!(c, Check::CalibrationIdentity | Check::CalibrationBound))
        .collect()
}

fn cmd_verify(cfg: &RunConfig) -> Result<bool, CliError> {
    let checks = cfg.checks.clone().unwrap_or_else(|| default_checks(cfg.cone));
    let ccfg = CheckConfig {
        cone: cfg.cone,
        dim: cfg.dim,
        eta: cfg.eta,
        budget: cfg.budget,
        resolution: cfg.resolution.unwrap_or(DEFAULT_RESOLUTION),
        seed: cfg.seed,
    };
    let outputs: Vec<Result<CheckOutput, Error>> = checks
        .par_iter()
        .map(|&c| {
            let t = Instant::now();
            let mut out = run_check(c, &ccfg)?;
            if cfg.timing {
                out.report.runtime = Some(t.elapsed().as_secs_f64());
            }
            Ok(out)
        })
        .collect();
    let dir = out_dir(cfg)?;
    let mut all = true;
    for (check, out) in checks.iter().zip(outputs) {
        let out = out?;
        let r = &out.report;
        write(dir, &format!("{check}.json"), json(r)?)?;
        for (name, table) in &out.tables {
            write(dir, &format!("{check}_{name}"), table)?;
        }
        let summary: Vec<String> = r
            .rules
            .iter()
            .map(|rule| format!("{}={:.4e}", rule.quantity, r.quantities.get(&rule.quantity).copied().unwrap_or(f64::NAN)))
            .collect();
        println!("{} {check}: {}", if r.pass { "PASS" } else { "FAIL" }, summary.join(" "));
        for f in r.failures() {
            eprintln!("  {check}: {f}");
        }
        all &= r.pass;
    }
    Ok(all)
}

fn cmd_minimize(cfg: &RunConfig) -> Result<bool, CliError> {
    let spec = cfg.spec()?;
    let opts = ExperimentOptions { resolution: cfg.resolution.unwrap_or(8), tol: cfg.tol, ..Default::default() };
    let s = stability_experiment(&spec, cfg.eta, cfg.delta, cfg.trials, cfg.seed, &opts).map_err(|e| match e {
        Error::InvalidArgument(m) => CliError::Usage(m),
        other => CliError::Internal(format!("mesh generation or descent failed: {other}")),
    })?;
    let dir = out_dir(cfg)?;
    write(dir, "summary.json", json(&s)?)?;
    for (k, t) in s.traces.iter().enumerate() {
        write(dir, &format!("trace_{k:03}.csv"), t.csv())?;
    }
    if let Some(m) = &s.initial_mesh {
        write(dir, "initial.obj", obj_string(m))?;
    }
    for (k, m) in s.final_meshes.iter().enumerate() {
        write(dir, &format!("final_{k:03}.obj"), obj_string(m))?;
    }
    if let Some(m) = &s.counterexample {
        write(dir, "counterexample.obj", obj_string(m))?;
    }
    println!(
        "{} minimize {}: trials={} cone_area={:.8} min_final_area={:.8} tol={:e} converged={:.2}",
        if s.pass { "PASS" } else { "FAIL" },
        cfg.cone,
        s.trials,
        s.cone_area,
        s.min_final_area,
        cfg.tol,
        s.converged_fraction
    );
    Ok(s.pass)
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let (flags, f): (&Flags, fn(&RunConfig) -> Result<bool, CliError>) = match &cli.command {
        Command::Build(fl) => (fl, cmd_build),
        Command::Verify(fl) => (fl, cmd_verify),
        Command::Minimize(fl) => (fl, cmd_minimize),
    };
    let cfg = RunConfig::resolve(flags)?;
    log::info!("{cfg:?}");
    f(&cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Internal(m)) => {
            eprintln!("internal error: {m}");
            ExitCode::from(3)
        }
    }
}
