//! `pgtt`: terrain generation, scripted rollouts, trace evaluation, and
//! grid utilities behind one binary.
//!
//! Exit codes: 0 success, 1 usage, 2 bad data or I/O, 3 terrain
//! generation failure.

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use pgtt_core::config::ToolkitConfig;
use pgtt_core::curriculum::{eval_metrics, success_rate, EvalBatch};
use pgtt_core::io;
use pgtt_core::reward::{total_reward, Suite};
use pgtt_core::rollout::{read_trace_dir, run_batch, GaitSource, RolloutSetup};
use pgtt_core::spline::desired_foot_height;
use pgtt_core::terrain::{generate_field, TerrainError};
use pgtt_core::Parallelism;
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "pgtt", version, about = "Phase-guided locomotion toolkit")]
struct Cli {
    /// Config file; defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Run single-threaded even where work could be parallelized.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a stair terrain and write it as binary, CSV, and tile text.
    Terrain(TerrainArgs),
    /// Run scripted episodes over a terrain file and write traces.
    Rollout(RolloutArgs),
    /// Score a directory of traces: per-term CSV plus tracking metrics.
    Eval(EvalArgs),
    /// Fill enclosed holes in an elevation grid file.
    MedianFill(MedianFillArgs),
    /// Dump the swing trajectory as phase,height CSV.
    TrajectoryDump(TrajectoryDumpArgs),
    /// Print the effective config as TOML.
    PrintConfig,
}

#[derive(Args)]
struct TerrainArgs {
    /// Output directory for terrain.pghf, terrain.csv, tiles.txt.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the config's terrain seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RolloutArgs {
    /// Terrain file written by the terrain subcommand.
    #[arg(long)]
    terrain: PathBuf,
    /// Output directory for one ep_NNNN.jsonl per episode.
    #[arg(long)]
    out: PathBuf,
    /// Episodes to run; zero is a no-op success.
    #[arg(long, default_value_t = 1)]
    episodes: usize,
    /// Overrides the config's base rollout seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's reward suite: pgtt, massloco, or wild.
    #[arg(long, value_parser = parse_suite)]
    suite: Option<Suite>,
}

#[derive(Args)]
struct EvalArgs {
    /// Directory of trace files.
    #[arg(long)]
    traces: PathBuf,
    /// Per-term reward time series CSV.
    #[arg(long)]
    out_csv: PathBuf,
    /// Overrides the suite recorded in each trace: pgtt, massloco, or wild.
    #[arg(long, value_parser = parse_suite)]
    suite: Option<Suite>,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    match s {
        "pgtt" => Ok(Suite::Pgtt),
        "massloco" => Ok(Suite::MassLoco),
        "wild" => Ok(Suite::Wild),
        other => Err(format!("unknown suite {other:?} (pgtt, massloco, wild)")),
    }
}

#[derive(Args)]
struct MedianFillArgs {
    /// Elevation grid file to fill.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Largest hole radius that gets filled.
    #[arg(long, default_value_t = 2)]
    radius: usize,
}

#[derive(Args)]
struct TrajectoryDumpArgs {
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Phase samples across one cycle.
    #[arg(long, default_value_t = 256)]
    samples: usize,
    /// Terrain height spread feeding the apex adaptation.
    #[arg(long, default_value_t = 0.0)]
    spread: f64,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        let generation = e
            .downcast_ref::<TerrainError>()
            .is_some_and(|t| matches!(t, TerrainError::GenerationFailed { .. }));
        std::process::exit(if generation { 3 } else { 2 });
    }
}

fn run(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(path) => ToolkitConfig::load(path)
            .with_context(|| format!("loading config {}", path.display()))?,
        None => ToolkitConfig::default(),
    };
    let mode = if cli.sequential {
        Parallelism::Sequential
    } else {
        Parallelism::default()
    };
    match cli.command {
        Command::Terrain(args) => cmd_terrain(&config, args),
        Command::Rollout(args) => cmd_rollout(&config, args, mode),
        Command::Eval(args) => cmd_eval(&config, args),
        Command::MedianFill(args) => cmd_median_fill(args),
        Command::TrajectoryDump(args) => cmd_trajectory_dump(&config, args),
        Command::PrintConfig => {
            print!("{}", config.to_toml()?);
            Ok(())
        }
    }
}

fn cmd_terrain(config: &ToolkitConfig, args: TerrainArgs) -> Result<()> {
    let seed = args.seed.unwrap_or(config.seeds.terrain);
    let (grid, field) = generate_field(&config.terrain, seed)?;
    std::fs::create_dir_all(&args.out)?;
    io::save_height_field(&field, args.out.join("terrain.pghf"))?;
    let csv = std::fs::File::create(args.out.join("terrain.csv"))?;
    io::write_height_field_csv(&field, std::io::BufWriter::new(csv))?;
    let text = std::fs::File::create(args.out.join("tiles.txt"))?;
    io::write_tile_grid_text(&grid, std::io::BufWriter::new(text))?;

    let (min, max) = field.min_max();
    let mut counts = [0usize; 3];
    for tile in &grid.cells {
        counts[tile.kind as usize] += 1;
    }
    println!("terrain seed={seed} cells={}x{}", field.rows, field.cols);
    println!("height min={min} max={max}");
    println!(
        "tiles flat={} stair={} corner={}",
        counts[0], counts[1], counts[2]
    );
    Ok(())
}

fn cmd_rollout(config: &ToolkitConfig, args: RolloutArgs, mode: Parallelism) -> Result<()> {
    let terrain = io::load_height_field(&args.terrain)
        .with_context(|| format!("loading terrain {}", args.terrain.display()))?;
    let rollout_config = config.rollout_config();
    let weights = config.rewards.resolved_weights();
    let gait = GaitSource::Sampled {
        ranges: config.gait.clone(),
    };
    let setup = RolloutSetup {
        terrain: &terrain,
        model: &config.robot,
        trajectory: &config.trajectory,
        weights: &weights,
        suite: args.suite.unwrap_or(config.rewards.suite),
        gait: &gait,
        config: &rollout_config,
        terrain_tag: args.terrain.file_stem().and_then(|s| s.to_str()),
    };
    let base = args.seed.unwrap_or(config.seeds.rollout);
    let seeds: Vec<u64> = (0..args.episodes as u64).map(|k| base + k).collect();
    let traces = run_batch(&setup, &seeds, mode)?;
    std::fs::create_dir_all(&args.out)?;
    for (k, trace) in traces.iter().enumerate() {
        trace.save(args.out.join(format!("ep_{k:04}.jsonl")))?;
    }
    println!(
        "rollout episodes={} dir={}",
        traces.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_eval(config: &ToolkitConfig, args: EvalArgs) -> Result<()> {
    let traces = read_trace_dir(&args.traces)
        .with_context(|| format!("reading traces from {}", args.traces.display()))?;
    if traces.is_empty() {
        bail!("no trace files in {}", args.traces.display());
    }
    let weights = config.rewards.resolved_weights();
    let mut csv = String::new();
    let mut header_terms: Option<Vec<String>> = None;
    for (e, trace) in traces.iter().enumerate() {
        let suite = args.suite.unwrap_or(trace.header.suite);
        for (k, step) in trace.steps.iter().enumerate() {
            let breakdown = total_reward(suite, &step.input, &config.trajectory, &weights)?;
            let terms = header_terms
                .get_or_insert_with(|| breakdown.terms.iter().map(|t| t.name.clone()).collect());
            if breakdown.terms.len() != terms.len()
                || breakdown
                    .terms
                    .iter()
                    .zip(terms.iter())
                    .any(|(t, n)| t.name != *n)
            {
                bail!("episode {e} step {k}: term set differs from the first trace");
            }
            if csv.is_empty() {
                write!(csv, "episode,step,time")?;
                for name in terms.iter() {
                    write!(csv, ",{name}")?;
                }
                writeln!(csv, ",total")?;
            }
            write!(csv, "{e},{k},{}", step.time)?;
            for term in &breakdown.terms {
                write!(csv, ",{}", term.weighted)?;
            }
            writeln!(csv, ",{}", breakdown.total)?;
        }
    }
    std::fs::write(&args.out_csv, csv)?;

    let batch = EvalBatch::from_traces(&traces);
    let (m_v, m_omega) = eval_metrics(&batch, &config.curriculum)?;
    let sr = success_rate(batch.terminated, batch.total)?;
    println!("episodes={}", traces.len());
    println!("m_v={m_v}");
    println!("m_omega={m_omega}");
    println!("sr={sr}");
    Ok(())
}

fn cmd_median_fill(args: MedianFillArgs) -> Result<()> {
    let grid = io::load_elevation_grid(&args.input)
        .with_context(|| format!("loading grid {}", args.input.display()))?;
    let before = grid.valid.iter().filter(|v| !**v).count();
    let filled = pgtt_core::elevation::median_fill(&grid, args.radius)?;
    let after = filled.valid.iter().filter(|v| !**v).count();
    io::save_elevation_grid(&filled, &args.output)?;
    println!("holes before={before} after={after}");
    Ok(())
}

fn cmd_trajectory_dump(config: &ToolkitConfig, args: TrajectoryDumpArgs) -> Result<()> {
    if args.samples < 2 {
        bail!("need at least two samples, got {}", args.samples);
    }
    let mut csv = String::from("phase,height\n");
    for k in 0..args.samples {
        let phase = std::f64::consts::TAU * k as f64 / (args.samples - 1) as f64;
        // The final sample lands exactly on 2 pi, which reads as phase 0.
        let phase = phase.min(std::f64::consts::TAU);
        let height = desired_foot_height(phase, &config.trajectory, args.spread)?;
        writeln!(csv, "{phase},{height}")?;
    }
    match &args.out {
        Some(path) => std::fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}
