use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::verify::verify_solution;
use crate::domain::{resource_count, ProblemDomain, Solution};
use crate::error::{Error, Result};
use crate::repair::{apply_decomposed, DynamicEvent};
use crate::search::{Allocator, SearchConfig, SearchStats};

/// How events are handled after the initial solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Repair the retained search.
    Repair,
    /// Throw the search away and solve the changed problem from scratch.
    Recompute,
    /// Both, on identical event sequences.
    Both,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::Repair => "repair",
            Mode::Recompute => "recompute",
            Mode::Both => "both",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "repair" => Ok(Mode::Repair),
            "recompute" => Ok(Mode::Recompute),
            "both" => Ok(Mode::Both),
            other => Err(Error::InvalidEvent(format!("unknown mode `{other}`"))),
        }
    }
}

/// Column order of [`ScenarioRecord`] rows.
pub const SCENARIO_CSV_HEADER: &str = "index,event,time,mode,wall_time_ms,makespan,resource_count,expansions,nodes_touched,planner_calls,scheduler_calls,retained_reads";

/// One solve: the initial problem (`index` 0, event `initial`) or the
/// problem after event `index`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRecord {
    pub index: usize,
    pub event: String,
    pub time: f64,
    pub mode: String,
    /// Median over the repetitions; the only column that varies between runs.
    pub wall_time_ms: f64,
    pub makespan: f64,
    pub resource_count: usize,
    pub expansions: usize,
    pub nodes_touched: usize,
    pub planner_calls: usize,
    pub scheduler_calls: usize,
    pub retained_reads: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub records: Vec<ScenarioRecord>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub search: SearchConfig,
    /// Timing repetitions per solve; the median is reported.
    pub repetitions: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            search: SearchConfig::default(),
            repetitions: 3,
        }
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_by(f64::total_cmp);
    let k = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[k]
    } else {
        0.5 * (xs[k - 1] + xs[k])
    }
}

fn record(
    index: usize,
    event: &str,
    time: f64,
    mode: Mode,
    times: Vec<f64>,
    solution: &Solution<f64>,
    stats: SearchStats,
) -> ScenarioRecord {
    ScenarioRecord {
        index,
        event: event.to_owned(),
        time,
        mode: mode.label().to_owned(),
        wall_time_ms: median(times),
        makespan: solution.makespan(),
        resource_count: resource_count(&solution.allocation),
        expansions: stats.expansions,
        nodes_touched: stats.nodes_touched,
        planner_calls: stats.planner_calls,
        scheduler_calls: stats.scheduler_calls,
        retained_reads: stats.retained_reads,
    }
}

fn millis(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Fresh allocator on `domain`, timed including the roadmap build.
fn solve_fresh(
    domain: &ProblemDomain<f64>,
    config: &ScenarioConfig,
) -> Result<(Allocator<f64>, Solution<f64>, Vec<f64>)> {
    let mut times = Vec::new();
    let mut last = None;
    for _ in 0..config.repetitions.max(1) {
        let start = Instant::now();
        let mut a = Allocator::new(domain.clone(), config.search.clone())?;
        let outcome = a.run()?;
        times.push(millis(start));
        last = Some((a, outcome));
    }
    let (a, outcome) = last.expect("at least one repetition");
    let solution = outcome.into_result()?;
    verify_solution(a.domain(), &solution)?;
    Ok((a, solution, times))
}

fn run_repair(
    domain: &ProblemDomain<f64>,
    events: &[DynamicEvent<f64>],
    config: &ScenarioConfig,
    out: &mut Vec<ScenarioRecord>,
) -> Result<()> {
    let (mut allocator, mut solution, times) = solve_fresh(domain, config)?;
    out.push(record(
        0,
        "initial",
        0.0,
        Mode::Repair,
        times,
        &solution,
        allocator.stats(),
    ));
    for (k, event) in events.iter().enumerate() {
        let mut times = Vec::new();
        let mut last = None;
        for _ in 0..config.repetitions.max(1) {
            let mut a = allocator.clone();
            let start = Instant::now();
            let outcome = a.repair(Some(&solution), event)?;
            times.push(millis(start));
            last = Some((a, outcome));
        }
        let (a, outcome) = last.expect("at least one repetition");
        let next = outcome.into_result()?;
        verify_solution(a.domain(), &next)?;
        let stats = a.stats().since(&allocator.stats());
        out.push(record(
            k + 1,
            event.kind.name(),
            event.time,
            Mode::Repair,
            times,
            &next,
            stats,
        ));
        log::debug!(
            "repair event {} ({}): makespan {}",
            k + 1,
            event.kind.name(),
            next.makespan()
        );
        allocator = a;
        solution = next;
    }
    Ok(())
}

fn run_recompute(
    domain: &ProblemDomain<f64>,
    events: &[DynamicEvent<f64>],
    config: &ScenarioConfig,
    out: &mut Vec<ScenarioRecord>,
) -> Result<()> {
    let (allocator, solution, times) = solve_fresh(domain, config)?;
    out.push(record(
        0,
        "initial",
        0.0,
        Mode::Recompute,
        times,
        &solution,
        allocator.stats(),
    ));
    let mut current = domain.clone();
    for (k, event) in events.iter().enumerate() {
        current = apply_decomposed(&current, event)?;
        let (a, solution, times) = solve_fresh(&current, config)?;
        out.push(record(
            k + 1,
            event.kind.name(),
            event.time,
            Mode::Recompute,
            times,
            &solution,
            a.stats(),
        ));
    }
    Ok(())
}

/// Solves `domain`, then handles `events` in time order by repair,
/// recomputation or both. Every solution is verified before it is
/// recorded; an invalid one aborts the run with [`Error::InvalidSolution`].
pub fn run_scenario(
    domain: &ProblemDomain<f64>,
    events: &[DynamicEvent<f64>],
    mode: Mode,
    config: &ScenarioConfig,
) -> Result<ScenarioResult> {
    let mut events = events.to_vec();
    // stable, so simultaneous events keep file order
    events.sort_by(|a, b| a.time.total_cmp(&b.time));
    let mut records = Vec::new();
    if matches!(mode, Mode::Repair | Mode::Both) {
        run_repair(domain, &events, config, &mut records)?;
    }
    if matches!(mode, Mode::Recompute | Mode::Both) {
        run_recompute(domain, &events, config, &mut records)?;
    }
    Ok(ScenarioResult { records })
}

impl ScenarioResult {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.records {
            w.serialize(r)?;
        }
        if self.records.is_empty() {
            return Ok(format!("{SCENARIO_CSV_HEADER}\n"));
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Per event kind and mode: count, median wall time, median makespan.
    pub fn summary(&self) -> String {
        let mut groups: BTreeMap<(&str, &str), (Vec<f64>, Vec<f64>)> = BTreeMap::new();
        for r in &self.records {
            let g = groups.entry((&r.event, &r.mode)).or_default();
            g.0.push(r.wall_time_ms);
            g.1.push(r.makespan);
        }
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<24} {:<10} {:>5} {:>14} {:>14}",
            "event", "mode", "n", "median_ms", "median_makespan"
        );
        for ((event, mode), (ms, mk)) in groups {
            let n = ms.len();
            let _ = writeln!(
                s,
                "{:<24} {:<10} {:>5} {:>14.3} {:>14.3}",
                event,
                mode,
                n,
                median(ms),
                median(mk)
            );
        }
        s
    }

    /// `results.csv`, `results.json` and `summary.txt` under `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("results.csv"), self.to_csv()?)?;
        fs::write(
            dir.join("results.json"),
            serde_json::to_string_pretty(self)?,
        )?;
        fs::write(dir.join("summary.txt"), self.summary())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::generate::{
        generate_problem, generate_scenario, ScenarioKind, WorldParams,
    };
    use crate::repair::EventKind;

    fn config() -> ScenarioConfig {
        ScenarioConfig {
            search: SearchConfig {
                threads: 1,
                ..SearchConfig::default()
            },
            repetitions: 1,
        }
    }

    fn problem() -> ProblemDomain<f64> {
        generate_problem(11, 4, 5, 2, &WorldParams::default()).unwrap()
    }

    fn without_time(csv: &str) -> Vec<String> {
        csv.lines()
            .map(|l| {
                let mut f: Vec<&str> = l.split(',').collect();
                f.remove(4);
                f.join(",")
            })
            .collect()
    }

    #[test]
    fn header_matches_record_fields() {
        let r = run_scenario(&problem(), &[], Mode::Repair, &config()).unwrap();
        assert_eq!(
            r.to_csv().unwrap().lines().next().unwrap(),
            SCENARIO_CSV_HEADER
        );
        assert_eq!(
            ScenarioResult::default().to_csv().unwrap().trim(),
            SCENARIO_CSV_HEADER
        );
    }

    #[test]
    fn empty_scenario_modes_agree() {
        let r = run_scenario(&problem(), &[], Mode::Both, &config()).unwrap();
        assert_eq!(r.records.len(), 2);
        let (a, b) = (&r.records[0], &r.records[1]);
        assert_eq!(
            (a.makespan, a.resource_count),
            (b.makespan, b.resource_count)
        );
        assert_eq!((a.event.as_str(), b.event.as_str()), ("initial", "initial"));
    }

    #[test]
    fn both_modes_pair_up() {
        let d = problem();
        let events = generate_scenario(4, &d, ScenarioKind::Sequence(3)).unwrap();
        let r = run_scenario(&d, &events, Mode::Both, &config()).unwrap();
        let seq = |mode: &str| -> Vec<(usize, String)> {
            r.records
                .iter()
                .filter(|x| x.mode == mode)
                .map(|x| (x.index, x.event.clone()))
                .collect()
        };
        assert_eq!(seq("repair"), seq("recompute"));
        assert_eq!(seq("repair").len(), 4);
        // recompute never looks at retained nodes
        assert!(r
            .records
            .iter()
            .filter(|x| x.mode == "recompute")
            .all(|x| x.retained_reads == 0));
    }

    #[test]
    fn events_run_in_time_order() {
        let d = problem();
        let late = DynamicEvent::new(
            5.0,
            EventKind::DurationChanged {
                task: "t0".into(),
                duration: 2.0,
            },
        );
        let early = DynamicEvent::new(1.0, EventKind::TaskLost { task: "t1".into() });
        let r = run_scenario(&d, &[late, early], Mode::Recompute, &config()).unwrap();
        let kinds: Vec<&str> = r.records.iter().map(|x| x.event.as_str()).collect();
        assert_eq!(kinds, ["initial", "task_lost", "duration_changed"]);
    }

    #[test]
    fn output_is_deterministic_apart_from_timing() {
        let d = problem();
        let events = generate_scenario(9, &d, ScenarioKind::Sequence(2)).unwrap();
        let a = run_scenario(&d, &events, Mode::Both, &config()).unwrap();
        let b = run_scenario(&d, &events, Mode::Both, &config()).unwrap();
        assert_eq!(
            without_time(&a.to_csv().unwrap()),
            without_time(&b.to_csv().unwrap())
        );
    }

    #[test]
    fn writes_three_files() {
        let dir = tempfile::tempdir().unwrap();
        let r = run_scenario(&problem(), &[], Mode::Repair, &config()).unwrap();
        r.write(dir.path()).unwrap();
        let json: ScenarioResult =
            serde_json::from_str(&fs::read_to_string(dir.path().join("results.json")).unwrap())
                .unwrap();
        assert_eq!(json, r);
        assert!(fs::read_to_string(dir.path().join("summary.txt"))
            .unwrap()
            .contains("initial"));
    }

    #[test]
    fn mode_parses() {
        assert_eq!("both".parse::<Mode>().unwrap(), Mode::Both);
        assert!("sideways".parse::<Mode>().is_err());
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0]), 2.5);
        assert_eq!(median(vec![]), 0.0);
    }
}
