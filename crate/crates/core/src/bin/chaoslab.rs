use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use chaoslab::analysis::{fit_rate, lln_exceedance};
use chaoslab::config::RunConfig;
use chaoslab::coupling::{simulate_particles, CoupledSetup};
use chaoslab::experiments::{run_replicates, run_sweep, summarize};
use chaoslab::kernels::{
    calibrate_envelope_constant, verify_local_lipschitz, KernelSpec, LipschitzEnvelope, RegularizedKernel, SamplingWindow,
};
use chaoslab::output::{csv_table, emit_sweep, fmt_f64, OutputDir, RunManifest};
use chaoslab::par::{init_threads, Execution};
use chaoslab::pde::{self, diagnostics};
use chaoslab::stochastics::SeedSpec;
use chaoslab::{Error, Result};

#[derive(Parser)]
#[command(name = "chaoslab", version, about = "Coupled particle and mean-field simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON configuration; every key is optional.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Master seed, overriding `master_seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Replace the results of a previous run in `--out`.
    #[arg(long)]
    force: bool,
    /// Worker threads for replicate loops.
    #[arg(long, env = "CHAOSLAB_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the regularised PDE at the fixed cutoff `eps`.
    SolvePde(Common),
    /// Run the N-particle system alone.
    Simulate(Common),
    /// Run coupled particle / mean-field replicates at `N`.
    Couple(Common),
    /// Law-of-large-numbers exceedance over `lln.N_list`.
    Lln(Common),
    /// Coupled sweep over `N_list`.
    Sweep(Common),
    /// Calibrate and check the local Lipschitz envelope at `eps`.
    VerifyKernel(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(dir) => {
            println!("{}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.master_seed = seed;
    }
    init_threads(common.threads);
    Ok(cfg)
}

fn run(command: Command) -> Result<PathBuf> {
    match command {
        Command::SolvePde(c) => solve_pde(&c),
        Command::Simulate(c) => simulate(&c),
        Command::Couple(c) => couple(&c),
        Command::Lln(c) => lln(&c),
        Command::Sweep(c) => sweep(&c),
        Command::VerifyKernel(c) => verify_kernel(&c),
    }
}

fn start(name: &str, common: &Common, cfg: &RunConfig) -> Result<(OutputDir, RunManifest)> {
    let dir = OutputDir::prepare(&common.out, common.force)?;
    Ok((dir, RunManifest::new(name, cfg, cfg.master_seed, common.threads)))
}

fn solve_pde(common: &Common) -> Result<PathBuf> {
    let cfg = load(common)?;
    let (mut dir, mut manifest) = start("solve-pde", common, &cfg)?;
    let clock = Instant::now();
    let rk = RegularizedKernel::new(KernelSpec::new(cfg.kernel.clone())?, cfg.eps)?;
    let sol = pde::solve(&cfg.rho0, &rk, cfg.sigma, cfg.t_end, cfg.grid()?, cfg.dt, cfg.save_every, cfg.pde)?;
    manifest.wall_times.push(("solve".into(), clock.elapsed().as_secs_f64()));
    let rows = sol.snapshots.iter().flat_map(|s| {
        s.values
            .iter()
            .enumerate()
            .map(move |(j, v)| vec![fmt_f64(s.t), fmt_f64(s.grid.center(j)), fmt_f64(*v)])
    });
    dir.write_csv("snapshots.csv", cfg.master_seed, &csv_table("t,x,rho", rows))?;
    dir.write_json("diagnostics.json", &diagnostics(&sol))?;
    dir.finish(manifest)
}

fn simulate(common: &Common) -> Result<PathBuf> {
    let cfg = load(common)?;
    let (mut dir, mut manifest) = start("simulate", common, &cfg)?;
    let clock = Instant::now();
    let seed = SeedSpec::new(cfg.master_seed, 0, 0);
    let path = simulate_particles(&cfg.coupled(), seed, cfg.save_every, Execution::default())?;
    manifest.wall_times.push(("simulate".into(), clock.elapsed().as_secs_f64()));
    let rows = path.times.iter().zip(&path.positions).flat_map(|(t, xs)| {
        xs.iter()
            .enumerate()
            .map(move |(i, x)| vec![fmt_f64(*t), i.to_string(), fmt_f64(*x)])
    });
    dir.write_csv("particles.csv", cfg.master_seed, &csv_table("t,particle,x", rows))?;
    dir.finish(manifest)
}

fn couple(common: &Common) -> Result<PathBuf> {
    let cfg = load(common)?;
    let (mut dir, mut manifest) = start("couple", common, &cfg)?;
    let clock = Instant::now();
    let setup = CoupledSetup::prepare(&cfg.coupled())?;
    let records = run_replicates(&setup, cfg.reps, cfg.master_seed, Execution::default())?;
    let elapsed = clock.elapsed().as_secs_f64();
    manifest.wall_times.push(("couple".into(), elapsed));
    let rows = records.iter().flat_map(|r| {
        (0..r.times.len()).map(move |k| {
            vec![
                r.replicate_id.to_string(),
                fmt_f64(r.times[k]),
                fmt_f64(r.sup_dev[k]),
                fmt_f64(r.j[k]),
                u8::from(r.running_sup[k] >= r.threshold).to_string(),
            ]
        })
    });
    dir.write_csv("couple.csv", cfg.master_seed, &csv_table("replicate_id,t,sup_dev,J,exceeded", rows))?;
    let summary = summarize(&setup, &records, elapsed)?;
    #[derive(serde::Serialize)]
    struct Sidecar<'a, C: serde::Serialize, S: serde::Serialize> {
        master_seed: u64,
        config: &'a C,
        summary: &'a S,
    }
    dir.write_json(
        "couple.json",
        &Sidecar {
            master_seed: cfg.master_seed,
            config: &setup.config,
            summary: &summary,
        },
    )?;
    dir.finish(manifest)
}

fn lln(common: &Common) -> Result<PathBuf> {
    let cfg = load(common)?;
    let (mut dir, mut manifest) = start("lln", common, &cfg)?;
    let h = KernelSpec::new(cfg.lln.h.clone())?;
    let mut summaries = Vec::new();
    for &n in &cfg.lln.n_list {
        let clock = Instant::now();
        let s = lln_exceedance(
            &h,
            &cfg.lln.rho0,
            n,
            cfg.lln.alpha,
            cfg.lln.delta,
            cfg.lln.reps,
            cfg.master_seed,
            Execution::default(),
        )?;
        manifest.wall_times.push((format!("N={n}"), clock.elapsed().as_secs_f64()));
        summaries.push(s);
    }
    let rows = summaries.iter().map(|s| {
        vec![
            s.n.to_string(),
            s.reps.to_string(),
            fmt_f64(s.exceedance_fraction),
            fmt_f64(s.median_dev),
        ]
    });
    dir.write_csv("lln.csv", cfg.master_seed, &csv_table("N,reps,exceedance_fraction,median_dev", rows))?;
    let points = |f: fn(&chaoslab::analysis::LlnSummary) -> f64| {
        summaries.iter().map(|s| (s.n as f64, f(s))).collect::<Vec<_>>()
    };
    let fit_or_reason = |pts: Vec<(f64, f64)>| match fit_rate(&pts) {
        Ok(fit) => serde_json::json!({ "fit": fit }),
        Err(e) => serde_json::json!({ "unavailable": e.to_string() }),
    };
    dir.write_json(
        "rates.json",
        &serde_json::json!({
            "master_seed": cfg.master_seed,
            "median_dev": fit_or_reason(points(|s| s.median_dev)),
            "exceedance_fraction": fit_or_reason(points(|s| s.exceedance_fraction)),
        }),
    )?;
    dir.finish(manifest)
}

fn sweep(common: &Common) -> Result<PathBuf> {
    let cfg = load(common)?;
    let (dir, manifest) = start("sweep", common, &cfg)?;
    let partial = dir.join("partial");
    let result = run_sweep(&cfg.sweep(), Execution::default(), Some(&partial))?;
    let out = emit_sweep(&result, dir, manifest)?;
    remove_partial(&partial)?;
    Ok(out)
}

fn remove_partial(path: &Path) -> Result<()> {
    match std::fs::remove_dir_all(path) {
        Err(e) if e.kind() != std::io::ErrorKind::NotFound => Err(Error::io(path, e)),
        _ => Ok(()),
    }
}

fn verify_kernel(common: &Common) -> Result<PathBuf> {
    let cfg = load(common)?;
    let (mut dir, manifest) = start("verify-kernel", common, &cfg)?;
    let base = KernelSpec::new(cfg.kernel.clone())?;
    let rk = RegularizedKernel::new(base.clone(), cfg.eps)?;
    let constant = match cfg.verify.constant {
        Some(c) => c,
        None => calibrate_envelope_constant(&rk, cfg.verify.samples, SeedSpec::new(cfg.master_seed, 0, 0), cfg.verify.safety)?,
    };
    let env = LipschitzEnvelope::new(&base, cfg.eps, constant);
    let report = verify_local_lipschitz(
        &rk,
        &env,
        cfg.verify.samples,
        SeedSpec::new(cfg.master_seed, 1, 0),
        SamplingWindow::covering(&base),
    )?;
    dir.write_json("violation_report.json", &report)?;
    dir.finish(manifest)
}
