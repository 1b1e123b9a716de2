//! Command-line front end: solve problems, replay event scenarios with repair
//! or recomputation, sweep the optimality-gap bounds, and generate inputs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use taskalloc::analysis::ENUMERATION_LIMIT;
use taskalloc::harness::{
    self, generate_problem, generate_scenario, read_problem, read_scenario, run_bounds_sweep,
    run_scenario, verify_solution, write_problem, write_scenario, write_solution, Mode,
    ScenarioConfig, ScenarioKind, WorldParams,
};
use taskalloc::planner::PrmConfig;
use taskalloc::search::{Allocator, SearchConfig, SearchOutcome};
use taskalloc::ProblemDomainF64;

#[derive(Parser, Debug)]
#[command(
    name = "taskalloc",
    version,
    about = "Task allocation, scheduling and motion planning for robot teams"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Seed for the roadmap sampler and the generators.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Weight of the allocation-quality heuristic against schedule quality.
    #[arg(long, global = true, default_value_t = 0.5)]
    alpha: f64,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true, default_value_t = PrmConfig::default().samples)]
    prm_samples: usize,
    #[arg(long, global = true, default_value_t = PrmConfig::default().neighbors)]
    prm_k: usize,
    /// Expansion cap per search call.
    #[arg(long, global = true, default_value_t = SearchConfig::default().max_expansions)]
    max_expansions: usize,
    /// Wall-clock cap per search call, in seconds.
    #[arg(long, global = true, default_value_t = SearchConfig::default().max_seconds)]
    max_seconds: f64,
    /// Worker threads for child evaluation; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

impl Common {
    fn search(&self) -> SearchConfig {
        let defaults = SearchConfig::default();
        SearchConfig {
            alpha: self.alpha,
            max_expansions: self.max_expansions,
            max_seconds: self.max_seconds,
            prm: PrmConfig {
                samples: self.prm_samples,
                neighbors: self.prm_k,
                seed: self.seed,
            },
            record_expansions: false,
            threads: self.threads.unwrap_or(defaults.threads).max(1),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve a problem file and write solution.json.
    Solve { problem: PathBuf },
    /// Solve a problem, then replay a scenario's events.
    RunScenario {
        problem: PathBuf,
        scenario: PathBuf,
        #[arg(long, default_value = "both", value_parser = ["repair", "recompute", "both"])]
        mode: String,
        /// Timing repetitions per solve; the median is reported.
        #[arg(long, default_value_t = 3)]
        repetitions: usize,
    },
    /// Compare achieved makespans with the enumerated optimum and the gap bounds.
    Bounds {
        /// Problem files; when none are given, problems are generated.
        #[arg(long = "problem")]
        problems: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',', default_values_t = harness::DEFAULT_ALPHAS)]
        alphas: Vec<f64>,
        #[command(flatten)]
        size: GenSize,
        /// Number of generated problems.
        #[arg(long, default_value_t = 10)]
        count: u64,
    },
    /// Generate inputs.
    #[command(subcommand)]
    Gen(Gen),
}

#[derive(Args, Debug)]
struct GenSize {
    #[arg(long, default_value_t = 3)]
    robots: usize,
    #[arg(long, default_value_t = 4)]
    tasks: usize,
    #[arg(long, default_value_t = 2)]
    traits: usize,
    #[arg(long, default_value_t = WorldParams::default().obstacles)]
    obstacles: usize,
}

impl GenSize {
    fn world(&self) -> WorldParams {
        WorldParams {
            obstacles: self.obstacles,
            ..WorldParams::default()
        }
    }
}

#[derive(Subcommand, Debug)]
enum Gen {
    /// Write problem.json.
    Problem {
        #[command(flatten)]
        size: GenSize,
    },
    /// Write scenario.json with events valid for the given problem.
    Scenario {
        problem: PathBuf,
        /// An event kind, `mixed_sequence` or `mixed_traits`.
        #[arg(long, default_value = "mixed_sequence")]
        kind: String,
    },
}

fn load(path: &Path) -> Result<ProblemDomainF64> {
    read_problem(path).with_context(|| format!("reading problem {}", path.display()))
}

fn solve(common: &Common, problem: &Path) -> Result<()> {
    let domain = load(problem)?;
    let mut allocator = Allocator::new(domain, common.search())?;
    let solution = match allocator.run()? {
        SearchOutcome::Solved(s) => s,
        SearchOutcome::Exhausted(e) => bail!("no solution: {e}"),
    };
    verify_solution(allocator.domain(), &solution).context("solution failed verification")?;
    fs::create_dir_all(&common.out)?;
    write_solution(
        &common.out.join("solution.json"),
        allocator.domain(),
        &solution,
    )?;
    let stats = allocator.stats();
    println!(
        "makespan {:.4}, {} assignments, {} expansions, {} planner calls",
        solution.makespan(),
        solution.allocation.count(),
        stats.expansions,
        stats.planner_calls
    );
    Ok(())
}

fn scenario(
    common: &Common,
    problem: &Path,
    scenario: &Path,
    mode: &str,
    repetitions: usize,
) -> Result<()> {
    let domain = load(problem)?;
    let events = read_scenario(scenario)
        .with_context(|| format!("reading scenario {}", scenario.display()))?;
    let config = ScenarioConfig {
        search: common.search(),
        repetitions,
    };
    let mode: Mode = mode.parse()?;
    let result = run_scenario(&domain, &events, mode, &config)?;
    result.write(&common.out)?;
    print!("{}", result.summary());
    Ok(())
}

fn bounds(
    common: &Common,
    problems: &[PathBuf],
    alphas: &[f64],
    size: &GenSize,
    count: u64,
) -> Result<()> {
    let domains = if problems.is_empty() {
        if size.robots * size.tasks > ENUMERATION_LIMIT {
            bail!("robots × tasks must be at most {ENUMERATION_LIMIT} for the enumerated optimum");
        }
        (0..count)
            .map(|k| {
                generate_problem(
                    common.seed.wrapping_add(k),
                    size.robots,
                    size.tasks,
                    size.traits,
                    &size.world(),
                )
            })
            .collect::<taskalloc::Result<Vec<_>>>()?
    } else {
        problems
            .iter()
            .map(|p| load(p))
            .collect::<Result<Vec<_>>>()?
    };
    let reports = run_bounds_sweep(&domains, alphas, &common.search())?;
    fs::create_dir_all(&common.out)?;
    harness::write_bounds(&common.out.join("bounds.csv"), &reports)?;
    harness::check_sweep(&reports)?;
    println!("{} rows, all within both bounds", reports.len());
    Ok(())
}

fn gen(common: &Common, what: &Gen) -> Result<()> {
    fs::create_dir_all(&common.out)?;
    match what {
        Gen::Problem { size } => {
            let domain = generate_problem(
                common.seed,
                size.robots,
                size.tasks,
                size.traits,
                &size.world(),
            )?;
            let path = common.out.join("problem.json");
            write_problem(&path, &domain)?;
            println!("{}", path.display());
        }
        Gen::Scenario { problem, kind } => {
            let domain = load(problem)?;
            let Some(kind) = ScenarioKind::parse(kind) else {
                bail!("unknown scenario kind `{kind}`");
            };
            let events = generate_scenario(common.seed, &domain, kind)?;
            let path = common.out.join("scenario.json");
            write_scenario(&path, &events)?;
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let c = &cli.common;
    let result = match &cli.command {
        Command::Solve { problem } => solve(c, problem),
        Command::RunScenario {
            problem,
            scenario: s,
            mode,
            repetitions,
        } => scenario(c, problem, s, mode, *repetitions),
        Command::Bounds {
            problems,
            alphas,
            size,
            count,
        } => bounds(c, problems, alphas, size, *count),
        Command::Gen(what) => gen(c, what),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
