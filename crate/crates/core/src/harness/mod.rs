//! Problem files, seeded generators, solution verification and the
//! experiment runners behind the command-line tool.

mod generate;
mod io;
mod scenario;
mod sweep;
mod verify;

pub use generate::{
    generate_problem, generate_scenario, is_satisfiable, ScenarioKind, WorldParams,
};
pub use io::{
    parse_problem, parse_scenario, problem_to_json, read_problem, read_scenario, write_problem,
    write_scenario, write_solution, ProblemFile, ScenarioFile, SolutionFile, TaskFile, WorldFile,
};
pub use scenario::{
    run_scenario, Mode, ScenarioConfig, ScenarioRecord, ScenarioResult, SCENARIO_CSV_HEADER,
};
pub use sweep::{bounds_to_csv, check_sweep, run_bounds_sweep, write_bounds, DEFAULT_ALPHAS};
pub use verify::verify_solution;
