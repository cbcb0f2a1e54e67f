use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tips_core::io::{
    export_ilp, generate_synthetic, parse_instance, run_experiments, write_csv, write_instance,
    Algorithm, ExperimentConfig, InstancePaths, Problem, Solver, SolverSettings, SyntheticParams,
};
use tips_core::netclus::{build_index, NetClusIndex};
use tips_core::sampling::{reduce_instance, sample_sites, sample_trajectories};
use tips_core::{DistanceMatrix, PlacementInstance, TipsError};

#[derive(Parser)]
#[command(
    name = "tips",
    version,
    about = "Trajectory-aware service placement on road networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve MAX-TIPS or AVG-TIPS and print the result as JSON.
    Solve(SolveArgs),
    /// Build a NetClus index and write it to a file.
    Index(IndexArgs),
    /// Write a reduced instance built by site and trajectory sampling.
    Sample(SampleArgs),
    /// Write a synthetic grid-city instance.
    Generate(GenerateArgs),
    /// Write the integer program of an instance in LP format.
    ExportIlp(ExportArgs),
    /// Run an experiment grid from a TOML config and write CSV.
    Bench(BenchArgs),
}

#[derive(Args)]
struct InstanceArgs {
    /// Directory holding edges.txt, trajectories.txt and optional sites.txt, facilities.txt.
    #[arg(long, conflicts_with_all = ["edges", "trajectories"])]
    instance: Option<PathBuf>,
    #[arg(long, requires = "trajectories")]
    edges: Option<PathBuf>,
    #[arg(long, requires = "edges")]
    trajectories: Option<PathBuf>,
    /// Candidate sites; every node when omitted.
    #[arg(long)]
    sites: Option<PathBuf>,
    /// Existing facilities; none when omitted.
    #[arg(long)]
    facilities: Option<PathBuf>,
}

impl InstanceArgs {
    fn load(&self) -> Result<PlacementInstance, TipsError> {
        let mut paths = match (&self.instance, &self.edges, &self.trajectories) {
            (Some(dir), _, _) => InstancePaths::in_dir(dir),
            (None, Some(e), Some(t)) => InstancePaths {
                edges: e.clone(),
                trajectories: t.clone(),
                sites: None,
                facilities: None,
            },
            _ => {
                return Err(TipsError::InvalidParameter(
                    "give --instance DIR or both --edges and --trajectories".into(),
                ))
            }
        };
        if self.sites.is_some() {
            paths.sites = self.sites.clone();
        }
        if self.facilities.is_some() {
            paths.facilities = self.facilities.clone();
        }
        parse_instance(&paths)
    }
}

#[derive(Args)]
struct IndexParams {
    #[arg(long, default_value_t = tips_core::netclus::DEFAULT_TAU_MIN)]
    tau_min: f64,
    #[arg(long, default_value_t = tips_core::netclus::DEFAULT_TAU_MAX)]
    tau_max: f64,
    #[arg(long, default_value_t = tips_core::netclus::DEFAULT_EPSILON)]
    epsilon: f64,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, value_parser = parse_problem)]
    problem: Problem,
    #[arg(long, value_parser = parse_algorithm)]
    algo: Algorithm,
    #[arg(short, long)]
    k: usize,
    /// User fraction for MAX-TIPS.
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    index: IndexParams,
    /// Prebuilt index file for netclus.
    #[arg(long)]
    index_file: Option<PathBuf>,
    /// Binary-search precision for netclus (meters).
    #[arg(long)]
    precision: Option<f64>,
    /// HCC swap fraction.
    #[arg(long, default_value_t = 0.05)]
    sf: f64,
    #[arg(long, default_value_t = 3)]
    trials: usize,
    /// HCC iteration cap.
    #[arg(long, default_value_t = 50)]
    eta: usize,
    /// MIF restarts when there are no existing facilities.
    #[arg(long, default_value_t = 3)]
    restarts: usize,
    /// Largest number of subsets the exact solvers may enumerate.
    #[arg(long, default_value_t = 10_000_000)]
    budget: u64,
    /// Largest distance matrix (entries) the AVG-TIPS solvers may build.
    #[arg(long, default_value_t = 50_000_000)]
    matrix_budget: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IndexArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    index: IndexParams,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Site-sampling radius (meters).
    #[arg(long)]
    radius: f64,
    /// Trajectories to keep; all when omitted.
    #[arg(long)]
    keep: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    width: usize,
    #[arg(long)]
    height: usize,
    #[arg(long, default_value_t = 100.0)]
    edge_len: f64,
    /// Number of trajectories.
    #[arg(long)]
    count: usize,
    /// Nodes per trajectory.
    #[arg(long)]
    length: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, value_parser = parse_problem)]
    problem: Problem,
    #[arg(short, long)]
    k: usize,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    /// CSV destination; overrides the config, stdout when neither is set.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_problem(s: &str) -> Result<Problem, String> {
    s.parse().map_err(|e: TipsError| e.to_string())
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: TipsError| e.to_string())
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), TipsError> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn solve(args: SolveArgs) -> Result<(), TipsError> {
    let inst = args.instance.load()?;
    let settings = SolverSettings {
        enumeration_budget: args.budget,
        matrix_budget: args.matrix_budget,
        mif_restarts: args.restarts,
        trials: args.trials,
        swap_fraction: args.sf,
        max_iterations: args.eta,
        tau_min: args.index.tau_min,
        tau_max: args.index.tau_max,
        epsilon: args.index.epsilon,
        precision: args.precision,
    };
    let mut solver = Solver::new(&inst, &settings, args.seed);
    if let Some(path) = &args.index_file {
        let index = NetClusIndex::from_text(&fs::read_to_string(path)?)?;
        index.check_instance(&inst)?;
        solver = solver.with_index(index);
    }
    let result = solver.solve(args.problem, args.algo, args.k, args.gamma)?;
    let json = serde_json::to_string_pretty(&result).expect("results serialize");
    emit(args.out.as_deref(), &format!("{json}\n"))
}

fn index(args: IndexArgs) -> Result<(), TipsError> {
    let inst = args.instance.load()?;
    let p = &args.index;
    let index = build_index(&inst, p.tau_min, p.tau_max, p.epsilon, args.seed)?;
    fs::write(&args.out, index.to_text())?;
    Ok(())
}

fn sample(args: SampleArgs) -> Result<(), TipsError> {
    let inst = args.instance.load()?;
    let sites = sample_sites(&inst, args.radius, args.seed)?;
    let keep = args.keep.unwrap_or(inst.trajectory_count());
    let trajs = sample_trajectories(&inst, &sites, keep)?;
    let reduced = reduce_instance(&inst, &sites, &trajs)?;
    write_instance(&reduced, &args.out)?;
    eprintln!(
        "kept {} of {} sites and {} of {} trajectories",
        reduced.sites.len(),
        inst.sites.len(),
        reduced.trajectory_count(),
        inst.trajectory_count()
    );
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<(), TipsError> {
    let inst = generate_synthetic(&SyntheticParams {
        width: args.width,
        height: args.height,
        edge_len: args.edge_len,
        traj_count: args.count,
        traj_len: args.length,
        seed: args.seed,
    })?;
    write_instance(&inst, &args.out)?;
    Ok(())
}

fn export(args: ExportArgs) -> Result<(), TipsError> {
    let inst = args.instance.load()?;
    let matrix = DistanceMatrix::build(&inst)?;
    let lp = export_ilp(&inst, &matrix, args.problem, args.k, args.gamma)?;
    emit(args.out.as_deref(), &lp)
}

fn bench(args: BenchArgs) -> Result<(), TipsError> {
    let cfg = ExperimentConfig::load(&args.config)?;
    let rows = run_experiments(&cfg)?;
    match args.out.or(cfg.output) {
        Some(path) => write_csv(&rows, fs::File::create(path)?),
        None => write_csv(&rows, std::io::stdout().lock()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Index(a) => index(a),
        Command::Sample(a) => sample(a),
        Command::Generate(a) => generate(a),
        Command::ExportIlp(a) => export(a),
        Command::Bench(a) => bench(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_budget() { 3 } else { 2 })
        }
    }
}
