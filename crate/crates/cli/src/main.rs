//! Command line front end for the spectral laboratory: the self-check
//! suite, initial-data construction, Besov norm evaluation, time
//! integration, and the scripted experiments. Experiments and checks
//! read one JSON config schema and write CSV tables plus a
//! `summary.json` under the output directory; the process exits 0
//! exactly when every verdict in the run passed.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use bel_core::bundle::{read_bundle, write_phys_vector, write_spec_vector, BundleData};
use bel_core::construct::{build_fn, build_gn, build_series, SeriesWeight};
use bel_core::experiments::{run as run_experiment, run_check_suite};
use bel_core::report::{ExperimentReport, Table};
use bel_core::solver::{Integrator, SolverConfig};
use bel_core::{besov, BesovParams, ExperimentConfig, ExperimentId, Fft3, FilterBank, Grid, Preset};

#[derive(Parser)]
#[command(
    name = "besov-euler-lab",
    version,
    about = "Desk-scale laboratory for frequency-localized analysis of rotating incompressible flow"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the analysis and integrator self-check suite and write its report.
    Check(RunArgs),
    /// Build a named initial-data family and store it as a field bundle.
    Construct(ConstructArgs),
    /// Evaluate a Besov norm of a stored field bundle.
    Norm(NormArgs),
    /// Integrate a stored state and write snapshot bundles plus a trajectory log.
    Solve(SolveArgs),
    /// Run one scripted experiment (y1, zz, pro1, pro2, th2, th3, th4).
    Experiment(ExperimentArgs),
}

/// Flags shared by every report-producing run. Command line flags override
/// the corresponding config-file keys.
#[derive(Args)]
struct RunArgs {
    /// JSON config file (keys: preset, besov, n_values, omega, alpha,
    /// epsilon, k_exponent, t_grid, seed, output_dir).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Grid resolution preset: ci, desk, or paper.
    #[arg(long, value_parser = parse_preset)]
    preset: Option<Preset>,
    /// Directory for the report (default "reports").
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment id: y1, zz, pro1, pro2, th2, th3, or th4.
    id: String,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct ConstructArgs {
    /// Family to build: fn (single oscillatory block), gn (low-frequency
    /// companion), th3 (weighted block series), or th4 (flat block series).
    #[arg(long)]
    family: String,
    /// Dyadic index of the block (families fn, gn) or first index of the
    /// series (families th3, th4). Defaults to the preset's smallest index.
    #[arg(long)]
    n: Option<u32>,
    /// Last dyadic index of a series build (families th3, th4 only).
    #[arg(long)]
    n_max: Option<u32>,
    /// Regularity exponent entering the amplitude rule.
    #[arg(long, default_value_t = 3.0)]
    s: f64,
    /// Grid resolution preset: ci, desk, or paper.
    #[arg(long, default_value = "ci", value_parser = parse_preset)]
    preset: Preset,
    /// Bundle directory to create.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct NormArgs {
    /// Field bundle directory to read.
    #[arg(long)]
    bundle: PathBuf,
    /// Regularity exponent s.
    #[arg(long, default_value_t = 3.0)]
    s: f64,
    /// Lebesgue exponent p in [1, inf].
    #[arg(long, default_value = "2", value_parser = parse_extended)]
    p: f64,
    /// Summation exponent r in [1, inf].
    #[arg(long, default_value = "2", value_parser = parse_extended)]
    r: f64,
    /// Optional CSV path for the per-block breakdown.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// Field bundle directory holding the initial state.
    #[arg(long)]
    init: PathBuf,
    /// Rotation speed.
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    /// Integration horizon.
    #[arg(long)]
    horizon: f64,
    /// Fixed step size; omitted derives one from the CFL heuristic.
    #[arg(long)]
    dt: Option<f64>,
    /// Comma-separated snapshot times in [0, horizon]; default the horizon.
    #[arg(long)]
    snapshots: Option<String>,
    /// Directory for snapshot bundles and trajectory.json.
    #[arg(long)]
    out: PathBuf,
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    Preset::from_str(s).map_err(|e| e.to_string())
}

/// Accept "inf" (any case) for the endpoint exponents.
fn parse_extended(s: &str) -> Result<f64, String> {
    if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
        return Ok(f64::INFINITY);
    }
    s.parse::<f64>().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    bel_core::init_thread_pool();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Check(args) => run_report(None, &args),
        Command::Experiment(args) => match args.id.parse::<ExperimentId>() {
            Ok(id) => run_report(Some(id), &args.run),
            Err(e) => Err(anyhow::Error::from(e)),
        },
        Command::Construct(args) => construct_cmd(&args).map(|()| ExitCode::SUCCESS),
        Command::Norm(args) => norm_cmd(&args).map(|()| ExitCode::SUCCESS),
        Command::Solve(args) => solve_cmd(&args).map(|()| ExitCode::SUCCESS),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Load, override, and validate the experiment config. Nothing is written
/// to disk until this succeeds, so a malformed config leaves no partial
/// report directory behind.
fn load_config(args: &RunArgs) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read config {}", path.display()))?;
            // serde_json positions its message at the offending line/column.
            serde_json::from_str::<ExperimentConfig>(&text)
                .map_err(|e| anyhow::anyhow!("{}: {}", path.display(), e))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(p) = args.preset {
        cfg.preset = p;
    }
    if let Some(dir) = &args.output_dir {
        cfg.output_dir = Some(dir.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_report(id: Option<ExperimentId>, args: &RunArgs) -> anyhow::Result<ExitCode> {
    let cfg = load_config(args)?;
    let report = match id {
        Some(id) => run_experiment(id, &cfg)?,
        None => run_check_suite(&cfg)?,
    };
    let out_dir = cfg
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("reports"));
    let written = report.write(&out_dir)?;
    print_report(&report, &written);
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn print_report(report: &ExperimentReport, written: &[PathBuf]) {
    println!("{}: {}", report.id, report.title);
    for slope in &report.slopes {
        println!(
            "  slope {}: {:.4} (intercept {:.4}, residual {:.2e})",
            slope.name, slope.slope, slope.intercept, slope.residual
        );
    }
    for v in &report.verdicts {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("  {tag} {}: {:.6e} {}", v.name, v.measured, v.threshold);
    }
    for path in written {
        println!("  wrote {}", path.display());
    }
    let overall = if report.passed() { "PASS" } else { "FAIL" };
    println!("{}: {overall}", report.id);
}

fn construct_cmd(args: &ConstructArgs) -> anyhow::Result<()> {
    let grid = Grid::from_preset(args.preset);
    let defaults = args.preset.n_values();
    let n_first = args.n.unwrap_or(defaults[0]);
    let n_last = args.n_max.unwrap_or(*defaults.last().unwrap());
    let (field, prov) = match args.family.as_str() {
        "fn" => build_fn(&grid, n_first, args.s)?,
        "gn" => build_gn(&grid, n_first)?,
        "th3" => build_series(&grid, n_first..=n_last, args.s, SeriesWeight::Weighted)?,
        "th4" => build_series(&grid, n_first..=n_last, args.s, SeriesWeight::Flat)?,
        other => bail!("unknown family '{other}' (expected fn, gn, th3, or th4)"),
    };
    let provenance = json!({
        "build": prov,
        "preset": args.preset.as_str(),
    });
    write_phys_vector(&args.out, &field, provenance)?;
    println!("wrote bundle {}", args.out.display());
    Ok(())
}

fn norm_cmd(args: &NormArgs) -> anyhow::Result<()> {
    let params = BesovParams::new(args.s, args.p, args.r)?;
    let bundle = read_bundle(&args.bundle)?;
    let grid = Grid::new(bundle.meta.grid.clone())?;
    let mut fft = Fft3::new(grid.clone());
    let hat = match &bundle.data {
        BundleData::Physical(u) => fft.forward_vector(u),
        BundleData::Spectral(u) => u.clone(),
    };
    let bank = FilterBank::new(grid.clone());
    let result = besov::besov_norm(&mut fft, &bank, &hat, &params)?;
    let mut table = Table::new("blocks", &["j", "block_lp", "weighted"]);
    for row in &result.rows {
        table.push(vec![row.j.into(), row.block_lp.into(), row.weighted.into()]);
    }
    if let Some(path) = &args.out {
        std::fs::write(path, table.to_csv())
            .with_context(|| format!("cannot write {}", path.display()))?;
        println!("wrote {}", path.display());
    } else {
        print!("{}", table.to_csv());
    }
    println!("norm = {:.12e}", result.value);
    Ok(())
}

fn solve_cmd(args: &SolveArgs) -> anyhow::Result<()> {
    let snapshots: Vec<f64> = match &args.snapshots {
        Some(list) => list
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map_err(|e| anyhow::anyhow!("bad snapshot time '{tok}': {e}"))
            })
            .collect::<anyhow::Result<_>>()?,
        None => vec![args.horizon],
    };
    let bundle = read_bundle(&args.init)?;
    let grid = Grid::new(bundle.meta.grid.clone())?;
    let mut fft = Fft3::new(grid.clone());
    let u0 = match &bundle.data {
        BundleData::Physical(u) => fft.forward_vector(u),
        BundleData::Spectral(u) => u.clone(),
    };
    let mut integrator = Integrator::new(
        Arc::clone(&grid),
        SolverConfig {
            omega: args.omega,
            dt: args.dt,
            ..SolverConfig::default()
        },
    );
    let output = integrator.solve(&u0, args.horizon, &snapshots)?;
    std::fs::create_dir_all(&args.out)?;
    let mut entries = Vec::new();
    for (idx, (t, state)) in output.states.iter().enumerate() {
        let dir = args.out.join(format!("snapshot_{idx:03}"));
        let provenance = json!({
            "t": t,
            "omega": args.omega,
            "source": args.init.display().to_string(),
        });
        write_spec_vector(&dir, state, provenance)?;
        entries.push(json!({
            "t": t,
            "dir": dir.file_name().unwrap().to_string_lossy(),
        }));
    }
    let trajectory = json!({
        "diagnostics": output.diagnostics,
        "snapshots": entries,
    });
    let path = args.out.join("trajectory.json");
    let mut text = serde_json::to_string_pretty(&trajectory)?;
    text.push('\n');
    std::fs::write(&path, text)?;
    println!(
        "integrated to t = {} in {} steps; wrote {}",
        args.horizon,
        output.diagnostics.total_steps,
        args.out.display()
    );
    Ok(())
}
