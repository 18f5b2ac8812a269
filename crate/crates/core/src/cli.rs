//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::acoustics::{acoustic_energy, acoustic_propagate, regularized_acoustic_data, AcousticState};
use crate::compressible::{apriori_diagnostics, energy_report, CompressibleStepper, EnergyLedger, FieldState};
use crate::error::{Error, Result};
use crate::harness::{make_ill_prepared_data, run_sweep, SweepMode};
use crate::incompressible::{kinetic_energy, IncompressibleState, IncompressibleStepper, Target};
use crate::io::config::{parse_config, RunConfig};
use crate::io::report::{csv_table, energy_csv, json_text, write_sweep_report};
use crate::io::snapshot::{read_snapshot, write_snapshot, Snapshot};
use crate::model::SimParams;
use crate::relative_energy::{corollary_norms, dissipation_blocks, relative_energy, TestTriple};
use crate::spectral::{helmholtz_split, Grid};

#[derive(Debug, Parser)]
#[command(name = "lowmach", version, about = "Low Mach number limit simulations and checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON run configuration.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Seed of the initial-data recipe (overrides the config).
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Worker threads for per-eps parallelism.
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
    /// Only print warnings and errors.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    pub common: Common,
    /// Compressible snapshots.
    #[arg(long = "compressible", value_name = "PATH", num_args = 1.., required = true)]
    pub compressible: Vec<PathBuf>,
    /// Incompressible target snapshots, paired with the compressible ones by position.
    #[arg(long = "target", value_name = "PATH", num_args = 1.., required = true)]
    pub target: Vec<PathBuf>,
    /// Acoustic snapshots; without them the comparison density is 1 and no wave velocity is added.
    #[arg(long = "acoustic", value_name = "PATH", num_args = 1..)]
    pub acoustic: Vec<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compressible micro-polar Navier-Stokes from the configured data.
    SimulateCompressible(Common),
    /// Incompressible micro-polar Navier-Stokes from the solenoidal part of the data.
    SimulateNs(Common),
    /// Euler with transported micro-rotation from the solenoidal part of the data.
    SimulateEuler(Common),
    /// Exact acoustic propagation of the regularized data.
    Acoustics(Common),
    /// eps-sweep against incompressible Navier-Stokes.
    SweepWeakWeak(Common),
    /// Joint eps, nu sweep against Euler through the relative energy.
    SweepWeakStrong(Common),
    /// Relative energy and error norms between snapshot sets.
    Diagnose(DiagnoseArgs),
    /// Quick invariant suite.
    Selftest(Common),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::SimulateCompressible(c)
            | Command::SimulateNs(c)
            | Command::SimulateEuler(c)
            | Command::Acoustics(c)
            | Command::SweepWeakWeak(c)
            | Command::SweepWeakStrong(c)
            | Command::Selftest(c) => c,
            Command::Diagnose(d) => &d.common,
        }
    }
}

/// Parses `argv`, runs the command and returns the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let common = cli.command.common();
    let level = if common.quiet { "warn" } else { "info" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match dispatch(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, Error::Parameter { .. } | Error::ConfigSyntax { .. }) && common.config.is_none() {
                eprintln!("usage: lowmach <COMMAND> --config PATH [--out DIR] [--seed N] [--threads N] [--quiet]");
            }
            e.exit_code()
        }
    }
}

fn load_config(c: &Common) -> Result<RunConfig> {
    let path = c
        .config
        .as_ref()
        .ok_or_else(|| Error::param("--config", "a configuration file is required"))?;
    let text = fs::read_to_string(path)?;
    let mut cfg = parse_config(&text)?;
    if let Some(out) = &c.out {
        cfg.output.dir = out.clone();
    }
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn with_threads<R: Send>(n: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match n {
        Some(0) => Err(Error::param("--threads", "must be positive")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::param("--threads", e.to_string()))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

fn dispatch(cmd: &Command) -> Result<()> {
    let common = cmd.common().clone();
    if let Command::Selftest(_) = cmd {
        return selftest(&common);
    }
    let cfg = load_config(&common)?;
    with_threads(common.threads, || match cmd {
        Command::SimulateCompressible(_) => simulate_compressible(&cfg),
        Command::SimulateNs(_) => simulate_target(&cfg, Target::Ns),
        Command::SimulateEuler(_) => simulate_target(&cfg, Target::Euler),
        Command::Acoustics(_) => simulate_acoustics(&cfg),
        Command::SweepWeakWeak(_) => sweep(&cfg, SweepMode::WeakWeak),
        Command::SweepWeakStrong(_) => sweep(&cfg, SweepMode::WeakStrong),
        Command::Diagnose(d) => diagnose(&cfg, d),
        Command::Selftest(_) => unreachable!("handled above"),
    })?
}

/// Output times: every `snapshot_every` up to `t_final`, always ending at `t_final`.
fn output_times(cfg: &RunConfig) -> Vec<f64> {
    let t = cfg.t_final;
    match cfg.output.snapshot_every {
        Some(dt) => {
            let n = (t / dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
            (1..=n).map(|k| (k as f64 * dt).min(t)).collect()
        }
        None => vec![t],
    }
}

fn snapshot_path(dir: &Path, kind: &str, k: usize) -> PathBuf {
    dir.join(format!("{kind}_{k:04}.snap"))
}

#[derive(Serialize)]
struct RunSummary<'a, T: Serialize> {
    config: &'a RunConfig,
    seed: u64,
    result: T,
}

fn write_summary<T: Serialize>(cfg: &RunConfig, result: T) -> Result<()> {
    let s = RunSummary {
        config: cfg,
        seed: cfg.seed,
        result,
    };
    fs::write(cfg.output.dir.join("summary.json"), json_text(&s))?;
    Ok(())
}

fn initial_state(cfg: &RunConfig) -> Result<(FieldState, crate::harness::InitialData)> {
    let grid = Grid::new(cfg.params.grid);
    let data = make_ill_prepared_data(&grid, &cfg.data, cfg.params.eps, cfg.seed)?;
    Ok((data.state(), data))
}

fn simulate_compressible(cfg: &RunConfig) -> Result<()> {
    let p = cfg.params;
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir)?;
    let (s0, _) = initial_state(cfg)?;
    let mut st = CompressibleStepper::new(&s0, &p, &cfg.solver)?;
    let mut ledger = EnergyLedger::new();
    energy_report(&s0, &mut ledger, &p);
    write_snapshot(&s0.to_snapshot(&p), &snapshot_path(dir, "compressible", 0))?;
    let mut traj = vec![s0];
    for (k, t) in output_times(cfg).into_iter().enumerate() {
        if let Err(e) = st.advance_to(t, Some(&mut ledger)) {
            if let Some(snap) = e.snapshot() {
                write_snapshot(snap, &dir.join("abort.snap"))?;
            }
            return Err(e);
        }
        let s = st.state();
        energy_report(&s, &mut ledger, &p);
        write_snapshot(&s.to_snapshot(&p), &snapshot_path(dir, "compressible", k + 1))?;
        log::info!("t = {t:.4}, steps = {}", st.steps_taken());
        traj.push(s);
    }
    fs::write(dir.join("energy.csv"), energy_csv(&ledger.rows))?;
    let residual = ledger.max_abs_residual();
    let e0 = ledger.initial_energy().unwrap_or(0.0);
    #[derive(Serialize)]
    struct R {
        steps: usize,
        max_abs_energy_residual: f64,
        initial_energy: f64,
        apriori: crate::compressible::AprioriTable,
    }
    write_summary(
        cfg,
        R {
            steps: st.steps_taken(),
            max_abs_energy_residual: residual,
            initial_energy: e0,
            apriori: apriori_diagnostics(&traj, &p),
        },
    )?;
    if residual > cfg.tolerances.energy_residual * e0 {
        log::warn!("energy residual {residual:e} exceeds the configured tolerance");
    }
    Ok(())
}

fn simulate_target(cfg: &RunConfig, target: Target) -> Result<()> {
    let p = cfg.params;
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir)?;
    let (_, data) = initial_state(cfg)?;
    let (v0, _) = helmholtz_split(&data.u0);
    let s0 = IncompressibleState::new(0.0, v0, data.omega0).with_pressure();
    let kind = match target {
        Target::Ns => "ns",
        Target::Euler => "euler",
    };
    write_snapshot(&s0.to_snapshot(&p, target), &snapshot_path(dir, kind, 0))?;
    let mut st = IncompressibleStepper::new(&s0, &p, target)?;
    let mut rows = vec![vec![Some(0.0), Some(kinetic_energy(&s0))]];
    for (k, t) in output_times(cfg).into_iter().enumerate() {
        if let Err(e) = st.advance_to(t) {
            if let Some(snap) = e.snapshot() {
                write_snapshot(snap, &dir.join("abort.snap"))?;
            }
            return Err(e);
        }
        let s = st.state().with_pressure();
        rows.push(vec![Some(t), Some(kinetic_energy(&s))]);
        write_snapshot(&s.to_snapshot(&p, target), &snapshot_path(dir, kind, k + 1))?;
    }
    fs::write(dir.join("energy.csv"), csv_table("incompressible-energy", &["t", "kinetic"], &rows))?;
    write_summary(cfg, serde_json::json!({ "target": target, "final_kinetic": rows.last().and_then(|r| r[1]) }))
}

fn simulate_acoustics(cfg: &RunConfig) -> Result<()> {
    let p = cfg.params;
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir)?;
    let (_, data) = initial_state(cfg)?;
    let eta = cfg.sweep.eta_rule.eta(p.eps);
    let ac0 = regularized_acoustic_data(&data.rho1, &data.u0, eta)?;
    write_snapshot(&ac0.to_snapshot(&p), &snapshot_path(dir, "acoustic", 0))?;
    let e0 = acoustic_energy(&ac0, &p);
    let mut rows = vec![vec![Some(0.0), Some(e0)]];
    for (k, t) in output_times(cfg).into_iter().enumerate() {
        let s = acoustic_propagate(&ac0, &p, t);
        rows.push(vec![Some(t), Some(acoustic_energy(&s, &p))]);
        write_snapshot(&s.to_snapshot(&p), &snapshot_path(dir, "acoustic", k + 1))?;
    }
    fs::write(dir.join("energy.csv"), csv_table("acoustic-energy", &["t", "energy"], &rows))?;
    write_summary(cfg, serde_json::json!({ "eta": eta, "initial_energy": e0 }))
}

fn sweep(cfg: &RunConfig, mode: SweepMode) -> Result<()> {
    let plan = cfg.sweep_plan(mode)?;
    let report = run_sweep(&plan, &cfg.params)?;
    write_sweep_report(&report, cfg, &cfg.output.dir)?;
    for f in &report.fits {
        log::info!("{}: slope {:.4} +/- {:.4}", f.metric, f.fit.slope, f.fit.half_width);
    }
    let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::Check(failed.join(", ")))
    }
}

fn check_pairing(a: &Snapshot, b: &Snapshot) -> Result<()> {
    if a.header.n != b.header.n || a.header.box_len != b.header.box_len {
        return Err(Error::Precondition("snapshots use different grids".into()));
    }
    if (a.header.time - b.header.time).abs() > 1e-9 * a.header.time.abs().max(1.0) {
        log::warn!("pairing snapshots at t = {} and t = {}", a.header.time, b.header.time);
    }
    Ok(())
}

fn diagnose(cfg: &RunConfig, d: &DiagnoseArgs) -> Result<()> {
    if d.compressible.len() != d.target.len() || (!d.acoustic.is_empty() && d.acoustic.len() != d.target.len()) {
        return Err(Error::param("diagnose", "snapshot lists must have equal lengths"));
    }
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir)?;
    let mut rows = Vec::new();
    for i in 0..d.compressible.len() {
        let cs = read_snapshot(&d.compressible[i])?;
        let ts = read_snapshot(&d.target[i])?;
        check_pairing(&cs, &ts)?;
        let grid = Grid::new(crate::model::GridSpec::new(cs.header.n, cs.header.box_len)?);
        let s = FieldState::from_snapshot(&cs, &grid)?;
        let p = params_from_snapshot(&cfg.params, &cs)?;
        let target = IncompressibleState::from_snapshot(&ts, &grid)?;
        let ac = match d.acoustic.get(i) {
            Some(path) => {
                let a = read_snapshot(path)?;
                check_pairing(&cs, &a)?;
                AcousticState::from_snapshot(&a, &grid)?
            }
            None => AcousticState::zero(&grid),
        };
        let tt: TestTriple = crate::relative_energy::compose_test_triple(&target, &ac, p.eps)?;
        let e = relative_energy(&s, &tt, &p)?;
        let c = corollary_norms(&s, &tt, p.eps, p.gamma);
        let b = dissipation_blocks(&s, &tt, &p);
        let mut row = vec![Some(s.t), Some(e)];
        row.extend(c.iter().map(|v| Some(*v)));
        row.extend(b.iter().map(|v| Some(*v)));
        rows.push(row);
    }
    let cols = [
        "t",
        "rel_energy",
        "corollary_1",
        "corollary_2",
        "corollary_3",
        "corollary_4",
        "d1",
        "d2",
        "d3",
        "d4",
        "d5",
    ];
    fs::write(dir.join("diagnose.csv"), csv_table("diagnose", &cols, &rows))?;
    Ok(())
}

/// Physical constants of a snapshot: the config, with eps, nu, gamma and a from the header.
fn params_from_snapshot(base: &SimParams, s: &Snapshot) -> Result<SimParams> {
    let mut p = *base;
    let get = |k: &str| s.header.meta.get(k).copied();
    if let Some(eps) = get("eps") {
        p.eps = eps;
    }
    if let Some(nu) = get("nu") {
        p.nu = nu;
    }
    if let Some(g) = get("gamma") {
        p.gamma = g;
    }
    if let Some(a) = get("a") {
        p.a = a;
    }
    p.grid = crate::model::GridSpec::new(s.header.n, s.header.box_len)?;
    p.validate()?;
    Ok(p)
}

fn selftest(c: &Common) -> Result<()> {
    let results = crate::selftest::run_selftest();
    let mut failed = Vec::new();
    for r in &results {
        if !c.quiet {
            println!("{} {} ({})", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
        }
        if !r.passed {
            failed.push(r.name.clone());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::Check(failed.join(", ")))
    }
}
