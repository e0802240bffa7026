use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rws_core::bench::{exponential_fit, phase1_plan, run_phase1, run_phase2, PHASE2_CASES};
use rws_core::io::{export_csv, load_combinations_from_path, save_combinations_to_path};
use rws_core::phase2::DEFAULT_MEMORY_THRESHOLD;
use rws_core::{
    generate, solve, AssignmentMatrix, CoreError, GenerateError, GenerationRequest, IoError, ScheduleParams,
    ShiftType, SolveError, SolveMethod, SolveRequest,
};

const EXIT_OTHER: u8 = 1;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_MEMORY_GUARD: u8 = 4;
const EXIT_PARSE: u8 = 5;

#[derive(Debug, Parser)]
#[command(name = "rws", version, about = "Rotational workforce schedule generator")]
struct Cli {
    /// Worker threads for the parallel searches (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Enumerate work/free patterns and write them to a combination file.
    Generate(GenerateArgs),
    /// Assign shift types to one stored pattern and export a schedule.
    Solve(SolveArgs),
    /// Time the reference cases and print a CSV report.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct ParamArgs {
    /// Number of shift types per day.
    #[arg(long, default_value_t = 1)]
    shift_types: usize,
    /// Schedulable days per week, counted from Monday.
    #[arg(long, default_value_t = 7)]
    working_days: usize,
    /// Weeks in the cycle, one per worker.
    #[arg(long)]
    weeks: usize,
    /// Shift length in hours.
    #[arg(long, default_value_t = 8.33)]
    shift_length: f64,
    /// Weekly working hours per worker.
    #[arg(long, default_value_t = 36.0)]
    weekly_hours: f64,
    /// Minimum continuous weekly rest in hours.
    #[arg(long, default_value_t = 36.0)]
    weekly_rest: f64,
    /// Minimum run of free days when --cluster is set.
    #[arg(long, default_value_t = 2)]
    min_free_cluster: usize,
    /// Minimum rest between consecutive shifts in hours.
    #[arg(long, default_value_t = 11.0)]
    min_rest: f64,
    /// Minimum workers on every shift of every schedulable day.
    #[arg(long, default_value_t = 1)]
    min_workers: u32,
    /// Shift start used for the weekly-rest check.
    #[arg(long, default_value_t = 8.0)]
    anchor: f64,
    /// Shift catalog as LABEL@START_HOUR entries; defaults to D, E, N.
    #[arg(long, value_delimiter = ',')]
    catalog: Vec<String>,
}

impl ParamArgs {
    fn params(&self) -> Result<ScheduleParams> {
        let mut p = ScheduleParams::new(
            self.shift_types,
            self.working_days,
            self.weeks,
            self.shift_length,
            self.weekly_hours,
            self.weekly_rest,
        );
        p.min_free_cluster = self.min_free_cluster;
        p.min_rest_between_shifts = self.min_rest;
        p.min_workers_per_shift = self.min_workers;
        p.anchor_start_hour = self.anchor;
        if !self.catalog.is_empty() {
            p.shift_catalog = self
                .catalog
                .iter()
                .map(|entry| {
                    let (label, start) = entry
                        .split_once('@')
                        .with_context(|| format!("catalog entry {entry:?} is not LABEL@HOUR"))?;
                    let start = start.parse().with_context(|| format!("bad start hour in {entry:?}"))?;
                    Ok(ShiftType::new(label, start, self.shift_length))
                })
                .collect::<Result<_>>()?;
        }
        Ok(p)
    }
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Stop after --fast-limit accepted patterns (default).
    #[arg(long, conflicts_with = "full")]
    fast: bool,
    /// Visit every candidate.
    #[arg(long)]
    full: bool,
    #[arg(long, default_value_t = 100)]
    fast_limit: usize,
    /// Require free days to come in runs of --min-free-cluster.
    #[arg(long)]
    cluster: bool,
    /// Combination file to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Auto,
    Cartesian,
    Recursive,
}

impl From<MethodArg> for SolveMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Auto => SolveMethod::Auto,
            MethodArg::Cartesian => SolveMethod::Cartesian,
            MethodArg::Recursive => SolveMethod::Recursive,
        }
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Combination file written by `rws generate`.
    #[arg(long)]
    combinations: PathBuf,
    /// Pattern to solve, counted from 0.
    #[arg(long, default_value_t = 0)]
    index: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    method: MethodArg,
    /// Run even when the Cartesian table would exceed the memory threshold.
    #[arg(long)]
    yes_memory: bool,
    #[arg(long, default_value_t = DEFAULT_MEMORY_THRESHOLD)]
    memory_threshold: u64,
    /// Solution to export, counted from 0.
    #[arg(long, default_value_t = 0)]
    solution: usize,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Phase1,
    Phase2,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    /// Largest cycle length to run.
    #[arg(long, default_value_t = 4)]
    max_weeks: usize,
    /// Include the five-week three-shift full generation.
    #[arg(long)]
    extreme: bool,
    /// Phase 2: run cases whose Cartesian table crosses the memory threshold.
    #[arg(long)]
    yes_memory: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let core = |e: &CoreError| match e {
        CoreError::Infeasible { .. } => EXIT_INFEASIBLE,
        _ => EXIT_OTHER,
    };
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<SolveError>() {
            return match e {
                SolveError::MemoryGuard(_) => EXIT_MEMORY_GUARD,
                SolveError::Core(c) => core(c),
                SolveError::Cancelled(_) => EXIT_OTHER,
            };
        }
        if let Some(e) = cause.downcast_ref::<GenerateError>() {
            return match e {
                GenerateError::Core(c) => core(c),
                GenerateError::Cancelled(_) => EXIT_OTHER,
            };
        }
        if let Some(e) = cause.downcast_ref::<IoError>() {
            return match e {
                IoError::Parse { .. } | IoError::Validation { .. } | IoError::Version(_) => EXIT_PARSE,
                IoError::Core(c) => core(c),
                _ => EXIT_OTHER,
            };
        }
        if let Some(e) = cause.downcast_ref::<CoreError>() {
            return core(e);
        }
        if cause.downcast_ref::<NoSolution>().is_some() {
            return EXIT_INFEASIBLE;
        }
    }
    EXIT_OTHER
}

#[derive(Debug)]
struct NoSolution;

impl std::fmt::Display for NoSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("the chosen pattern admits no feasible shift assignment")
    }
}

impl std::error::Error for NoSolution {}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let params = args.params.params()?;
    let request = if args.full {
        GenerationRequest::full(params)
    } else {
        GenerationRequest::fast(params).with_fast_limit(args.fast_limit)
    }
    .with_clustering(args.cluster);
    let result = generate(&request)?;
    let bytes = save_combinations_to_path(&result, &args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    println!("mode                  {:?}", request.mode);
    println!("combinations examined {}", result.combinations_examined);
    println!("solutions found       {}", result.solutions_found);
    println!("elapsed (s)           {:.3}", result.elapsed);
    println!("written               {} ({} bytes)", args.out.display(), bytes);
    Ok(())
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let file = load_combinations_from_path(&args.combinations)
        .with_context(|| format!("reading {}", args.combinations.display()))?;
    let params = file.request.params;
    let Some(array) = file.arrays.get(args.index) else {
        bail!("index {} out of range: the file holds {} patterns", args.index, file.arrays.len());
    };
    let template = AssignmentMatrix::from_origin(array.clone(), &params)?;
    let mut request = SolveRequest::new(template, params.clone()).with_method(args.method.into());
    request.confirm_memory = args.yes_memory;
    request.memory_threshold = args.memory_threshold;
    let set = match solve(&request) {
        Err(SolveError::MemoryGuard(d)) => {
            return Err(anyhow::Error::new(SolveError::MemoryGuard(d)))
                .context("re-run with --yes-memory or --method recursive");
        }
        other => other?,
    };
    eprintln!("method                {:?}", set.method);
    eprintln!("candidates examined   {}", set.candidates_examined);
    eprintln!("solutions found       {}", set.solutions.len());
    if set.solutions.is_empty() {
        return Err(anyhow::Error::new(NoSolution));
    }
    let Some(chosen) = set.solutions.get(args.solution) else {
        bail!("solution {} out of range: {} found", args.solution, set.solutions.len());
    };
    let csv = export_csv(chosen, &params)?;
    match args.out {
        Some(path) => fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?,
        None => io::stdout().write_all(csv.as_bytes())?,
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let mut out = csv::Writer::from_writer(io::stdout().lock());
    let opt = |v: Option<f64>| v.map(|t| format!("{t:.6}")).unwrap_or_default();
    match args.suite {
        Suite::Phase1 => {
            out.write_record(["type", "weeks", "time_fast", "time_full", "combinations", "solutions"])?;
            let mut points = Vec::new();
            for (case, full) in phase1_plan(args.max_weeks, args.extreme) {
                let row = run_phase1(&case, full)?;
                out.write_record([
                    row.label.clone(),
                    row.weeks.to_string(),
                    format!("{:.6}", row.time_fast),
                    opt(row.time_full),
                    row.combinations.to_string(),
                    row.solutions.map(|s| s.to_string()).unwrap_or_default(),
                ])?;
                out.flush()?;
                if let Some(t) = row.time_full {
                    points.push((row.weeks as f64, t));
                }
            }
            match exponential_fit(&points) {
                Some((scale, rate)) => eprintln!("fit: time_full = {scale:.3e} * exp({rate:.4} * weeks)"),
                None => eprintln!("fit: not enough timed full runs"),
            }
        }
        Suite::Phase2 => {
            out.write_record([
                "shift_types",
                "working_cells",
                "weeks",
                "combinations",
                "solutions",
                "estimated_bytes",
                "time",
            ])?;
            for case in PHASE2_CASES.iter().filter(|c| c.weeks <= args.max_weeks) {
                let row = run_phase2(case, args.yes_memory)?;
                out.write_record([
                    row.shift_types.to_string(),
                    row.working_cells.to_string(),
                    row.weeks.to_string(),
                    row.combinations.to_string(),
                    row.solutions.map(|s| s.to_string()).unwrap_or_default(),
                    row.estimated_bytes.to_string(),
                    opt(row.time),
                ])?;
                out.flush()?;
            }
        }
    }
    out.flush()?;
    Ok(())
}
