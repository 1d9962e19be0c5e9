use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use permeaflow::experiments::{
    check_rates, check_run, check_sharp_limit, convergence_study, run_case_with, sharp_limit_cells, CaseKind,
    CaseSpec, Check, RunOptions,
};
use permeaflow::io::{parse_config, render_config, write_manifest, RunConfig};
use permeaflow::{Error, Result};

#[derive(Parser)]
#[command(name = "permeaflow", version, about = "Phase-field solver for permeable moving interfaces")]
struct Cli {
    /// Output root (defaults to $PERMEAFLOW_OUT, then ./permeaflow-out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for data-parallel batteries.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Only print warnings, errors and the final verdict.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one case.
    Run { config: PathBuf },
    /// Grid-halving battery with Cauchy-error rate table.
    Convergence { config: PathBuf },
    /// Time-step battery checking the modified energy never increases.
    EnergyTest { config: PathBuf },
    /// Interface-width sweep against the sharp-interface solution.
    Limits { config: PathBuf },
    /// Case catalog.
    Cases {
        #[command(subcommand)]
        action: CasesAction,
    },
}

#[derive(Subcommand)]
enum CasesAction {
    /// List the available case names.
    List,
}

fn output_root(cli: &Cli, cfg: &RunConfig) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| cfg.out_dir.clone())
        .or_else(|| std::env::var_os("PERMEAFLOW_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("permeaflow-out"))
}

fn load(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    parse_config(&text)
}

fn write_text(path: &Path, text: &str) -> Result<PathBuf> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
    }
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(path.to_path_buf())
}

fn report(checks: &[Check]) -> bool {
    for c in checks {
        println!("{c}");
    }
    checks.iter().all(|c| c.passed)
}

fn cmd_run(root: &Path, cfg: &RunConfig) -> Result<bool> {
    let dir = root.join(cfg.case.kind.name());
    let echo = write_text(&dir.join("effective.ini"), &render_config(cfg))?;
    let opts = RunOptions {
        out_dir: Some(dir.clone()),
        ..Default::default()
    };
    let outcome = run_case_with(&cfg.case, &cfg.solver, &opts)?;
    let mut artifacts = outcome.artifacts.clone();
    artifacts.retain(|p| !p.ends_with(permeaflow::io::MANIFEST_NAME));
    artifacts.push(echo);
    write_manifest(&dir, &artifacts)?;
    println!("{}: {} steps, t = {:.6}", cfg.case.kind.name(), outcome.stats.steps, outcome.final_state.t);
    println!("{:#?}", outcome.report);
    Ok(report(&check_run(&outcome)))
}

fn cmd_convergence(root: &Path, cfg: &RunConfig) -> Result<bool> {
    if !matches!(cfg.case.kind, CaseKind::Convergence2D { .. }) {
        return Err(Error::Config("convergence needs a [Convergence2D] config".into()));
    }
    let dir = root.join("convergence");
    let echo = write_text(&dir.join("effective.ini"), &render_config(cfg))?;
    let (table, runs) = convergence_study(&cfg.case, &cfg.sizes)?;
    print!("{table}");
    let rates = write_text(&dir.join("rates.txt"), &table.to_string())?;
    write_manifest(&dir, &[echo, rates])?;
    let mut checks = vec![check_rates(&table)];
    for r in &runs {
        for mut c in check_run(r) {
            c.name = format!("{} {}x{}", c.name, r.spec.grid.nx, r.spec.grid.ny);
            checks.push(c);
        }
    }
    Ok(report(&checks))
}

fn cmd_energy(root: &Path, cfg: &RunConfig) -> Result<bool> {
    if cfg.case.frozen_interface {
        return Err(Error::Config("energy-test needs a case that evolves the interface".into()));
    }
    let dir = root.join("energy-test");
    let echo = write_text(&dir.join("effective.ini"), &render_config(cfg))?;
    let mut artifacts = vec![echo];
    let mut checks = Vec::new();
    for (k, &dt) in cfg.dts.iter().enumerate() {
        let mut spec = cfg.case.clone();
        spec.dt = dt;
        if let CaseKind::EnergyStability { .. } = spec.kind {
            spec.kind = CaseKind::EnergyStability { dt };
        } else if let CaseKind::Convergence2D { h, .. } = spec.kind {
            spec.kind = CaseKind::Convergence2D { h, dt };
        }
        let solver = permeaflow::scheme::SolverConfig { dt, ..cfg.solver };
        let sub = dir.join(format!("dt_{k:02}"));
        let opts = RunOptions {
            out_dir: Some(sub.clone()),
            ..Default::default()
        };
        log::info!("energy battery: dt = {dt:e}");
        let outcome = run_case_with(&spec, &solver, &opts)?;
        artifacts.extend(outcome.artifacts.iter().filter(|p| !p.ends_with(permeaflow::io::MANIFEST_NAME)).cloned());
        for mut c in check_run(&outcome) {
            c.name = format!("{} dt={dt:e}", c.name);
            checks.push(c);
        }
    }
    write_manifest(&dir, &artifacts)?;
    Ok(report(&checks))
}

fn cmd_limits(root: &Path, cfg: &RunConfig) -> Result<bool> {
    if !matches!(cfg.case.kind, CaseKind::SharpLimit1D { .. }) {
        return Err(Error::Config("limits needs a [SharpLimit1D] config".into()));
    }
    let dir = root.join("limits");
    let echo = write_text(&dir.join("effective.ini"), &render_config(cfg))?;
    let mut rows = Vec::new();
    for &eps in &cfg.epsilons {
        let mut spec = cfg.case.clone();
        spec.kind = CaseKind::SharpLimit1D { epsilon: eps };
        spec.params.epsilon = eps;
        spec.grid.nx = sharp_limit_cells(eps);
        let outcome = run_case_with(&spec, &cfg.solver, &RunOptions::default())?;
        if let permeaflow::experiments::CaseReport::SharpLimit { bulk_linf, .. } = outcome.report {
            println!("eps = {eps:e}: {} cells, bulk Linf error {bulk_linf:.4e}", spec.grid.nx);
            rows.push((eps, bulk_linf));
        }
    }
    let csv: String = std::iter::once("epsilon,bulk_linf\n".to_string())
        .chain(rows.iter().map(|(e, v)| format!("{e:.16e},{v:.16e}\n")))
        .collect();
    let table = write_text(&dir.join("limits.csv"), &csv)?;
    write_manifest(&dir, &[echo, table])?;
    Ok(report(&[check_sharp_limit(&rows)]))
}

fn execute(cli: &Cli) -> Result<bool> {
    if let Command::Cases { action: CasesAction::List } = &cli.command {
        for name in CaseKind::ALL_NAMES {
            let spec = CaseSpec::by_name(name)?;
            println!("{name:<16} {spec}");
        }
        return Ok(true);
    }
    let (Command::Run { config }
    | Command::Convergence { config }
    | Command::EnergyTest { config }
    | Command::Limits { config }) = &cli.command
    else {
        unreachable!("cases handled above")
    };
    let cfg = load(config)?;
    let root = output_root(cli, &cfg);
    match &cli.command {
        Command::Run { .. } => cmd_run(&root, &cfg),
        Command::Convergence { .. } => cmd_convergence(&root, &cfg),
        Command::EnergyTest { .. } => cmd_energy(&root, &cfg),
        Command::Limits { .. } => cmd_limits(&root, &cfg),
        Command::Cases { .. } => unreachable!("cases handled above"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("one or more acceptance thresholds failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
