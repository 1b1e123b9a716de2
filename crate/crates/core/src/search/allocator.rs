use std::num::NonZeroUsize;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::heuristics::{apr, NsqBounds};
use super::state::{ExpansionRecord, NodeId, NodeStatus, SearchState};
use super::Exhausted;
use crate::domain::{validate_problem, Allocation, ProblemDomain, Solution};
use crate::error::{Error, Result};
use crate::planner::{EstimatedTravel, Planner, PrmConfig, RecordingTravel, TravelTimes};
use crate::scalar::Scalar;
use crate::scheduler::{build_scheduling_problem, solve_schedule, Schedule};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Weight of the requirement term against the makespan term.
    pub alpha: f64,
    pub max_expansions: usize,
    pub max_seconds: f64,
    pub prm: PrmConfig,
    /// Keep parent/child heuristic values for every generated edge.
    pub record_expansions: bool,
    /// Worker threads for scoring the children of one expansion.
    pub threads: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            max_expansions: 100_000,
            max_seconds: 300.0,
            prm: PrmConfig::default(),
            record_expansions: false,
            threads: thread::available_parallelism().map_or(1, NonZeroUsize::get),
        }
    }
}

impl SearchConfig {
    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }
}

/// Work counters, cumulative over the allocator's lifetime.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub expansions: usize,
    pub nodes_generated: usize,
    pub scheduler_calls: usize,
    pub planner_calls: usize,
    /// Nodes whose values were computed, recomputed or moved between sets.
    pub nodes_touched: usize,
    /// Pops where the next open node had the same priority.
    pub ties_at_pop: usize,
    /// Nodes inherited from an earlier solve that repair looked at.
    pub retained_reads: usize,
}

impl SearchStats {
    /// Counter-wise difference `self − earlier`.
    pub fn since(&self, earlier: &SearchStats) -> SearchStats {
        SearchStats {
            expansions: self.expansions - earlier.expansions,
            nodes_generated: self.nodes_generated - earlier.nodes_generated,
            scheduler_calls: self.scheduler_calls - earlier.scheduler_calls,
            planner_calls: self.planner_calls - earlier.planner_calls,
            nodes_touched: self.nodes_touched - earlier.nodes_touched,
            ties_at_pop: self.ties_at_pop - earlier.ties_at_pop,
            retained_reads: self.retained_reads - earlier.retained_reads,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SearchOutcome<T> {
    Solved(Solution<T>),
    Exhausted(Exhausted),
}

impl<T> SearchOutcome<T> {
    pub fn into_result(self) -> Result<Solution<T>> {
        match self {
            SearchOutcome::Solved(s) => Ok(s),
            SearchOutcome::Exhausted(e) => Err(Error::Exhausted(e)),
        }
    }

    pub fn solution(&self) -> Option<&Solution<T>> {
        match self {
            SearchOutcome::Solved(s) => Some(s),
            SearchOutcome::Exhausted(_) => None,
        }
    }
}

/// APR and optimal schedule of one allocation.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation<T> {
    pub apr: T,
    /// `None` when some travel is impossible or the constraints conflict.
    pub schedule: Option<Schedule<T>>,
}

pub fn evaluate_allocation<T: Scalar, P: TravelTimes<T> + ?Sized>(
    domain: &ProblemDomain<T>,
    alloc: &Allocation,
    travel: &P,
) -> Result<Evaluation<T>> {
    let apr = apr(alloc, &domain.team, &domain.requirements)?;
    let schedule = build_scheduling_problem(domain, alloc, travel).and_then(|p| solve_schedule(&p));
    Ok(Evaluation { apr, schedule })
}

fn evaluate_many<T: Scalar>(
    domain: &ProblemDomain<T>,
    travel: EstimatedTravel<'_, T>,
    allocs: &[Allocation],
    threads: usize,
) -> Result<Vec<Evaluation<T>>> {
    let serial = |chunk: &[Allocation]| -> Result<Vec<Evaluation<T>>> {
        chunk
            .iter()
            .map(|a| evaluate_allocation(domain, a, &travel))
            .collect()
    };
    if threads <= 1 || allocs.len() < 2 * threads {
        return serial(allocs);
    }
    let chunk = allocs.len().div_ceil(threads);
    thread::scope(|scope| {
        let handles: Vec<_> = allocs
            .chunks(chunk)
            .map(|c| scope.spawn(move || serial(c)))
            .collect();
        let mut out = Vec::with_capacity(allocs.len());
        for h in handles {
            out.extend(h.join().expect("evaluation worker panicked")?);
        }
        Ok(out)
    })
}

enum Refinement {
    Infeasible,
    Changed,
    Unchanged,
}

/// Owns one problem domain, its motion planner and the search state.
#[derive(Clone)]
pub struct Allocator<T: Scalar> {
    pub(crate) domain: ProblemDomain<T>,
    pub(crate) planner: Planner<T>,
    pub(crate) state: SearchState<T>,
    pub(crate) config: SearchConfig,
    pub(crate) stats: SearchStats,
}

impl<T: Scalar> Allocator<T> {
    /// Validates the domain, builds the roadmap and scores the empty allocation.
    pub fn new(domain: ProblemDomain<T>, config: SearchConfig) -> Result<Self> {
        let report = validate_problem(&domain);
        if !report.is_empty() {
            return Err(Error::InvalidProblem(report.to_string()));
        }
        let planner = Planner::for_domain(&domain, &config.prm)?;
        Self::with_planner(domain, config, planner)
    }

    /// Like [`Allocator::new`] but reuses an existing planner; the domain is
    /// not re-validated.
    pub fn with_planner(
        domain: ProblemDomain<T>,
        config: SearchConfig,
        mut planner: Planner<T>,
    ) -> Result<Self> {
        let alpha = T::lit(config.alpha);
        if !(config.alpha >= 0.0 && config.alpha <= 1.0) {
            return Err(Error::AlphaOutOfRange(config.alpha));
        }
        planner.ensure_sites(&domain);
        let bounds = NsqBounds::for_domain(&domain, Some(planner.roadmap().total_edge_length()));
        let mut this = Self {
            domain,
            planner,
            state: SearchState::new(alpha, bounds),
            config,
            stats: SearchStats::default(),
        };
        let root = Allocation::zeros(this.domain.num_tasks(), this.domain.num_robots());
        let id = this.state.insert(root.clone(), None);
        let eval = this.evaluate(&root)?;
        this.stats.nodes_generated += 1;
        this.file(id, eval);
        Ok(this)
    }

    pub fn domain(&self) -> &ProblemDomain<T> {
        &self.domain
    }

    pub fn state(&self) -> &SearchState<T> {
        &self.state
    }

    pub fn planner(&self) -> &Planner<T> {
        &self.planner
    }

    pub fn config(&self) -> &SearchConfig {
        &self.config
    }

    pub fn stats(&self) -> SearchStats {
        SearchStats {
            planner_calls: self.planner.calls(),
            ..self.stats
        }
    }

    pub fn set_limits(&mut self, max_expansions: usize, max_seconds: f64) {
        self.config.max_expansions = max_expansions;
        self.config.max_seconds = max_seconds;
    }

    /// Recomputes the makespan normalization for the current domain and
    /// rescores the open set if it moved.
    pub(crate) fn refresh_bounds(&mut self) {
        let bounds = NsqBounds::for_domain(
            &self.domain,
            Some(self.planner.roadmap().total_edge_length()),
        );
        if self.state.set_bounds(bounds) {
            self.stats.nodes_touched += self.state.open_len();
        }
    }

    /// Stores an evaluation and files the node as open, or pruned when
    /// unschedulable.
    pub(crate) fn file(&mut self, id: NodeId, eval: Evaluation<T>) {
        self.stats.nodes_touched += 1;
        let node = self.state.node_mut(id);
        node.apr = eval.apr;
        node.schedule = eval.schedule;
        node.refined = false;
        node.plans.clear();
        if node.schedule.is_some() {
            self.state.open(id);
        } else {
            self.state.prune(id);
        }
    }

    /// Scores `alloc` from scratch under the current domain.
    pub(crate) fn evaluate(&mut self, alloc: &Allocation) -> Result<Evaluation<T>> {
        self.stats.scheduler_calls += 1;
        evaluate_allocation(
            &self.domain,
            alloc,
            &EstimatedTravel::new(self.planner.roadmap()),
        )
    }

    /// Runs best-first search until a goal is certified or the search stops.
    pub fn run(&mut self) -> Result<SearchOutcome<T>> {
        let started = Instant::now();
        let budget = Duration::from_secs_f64(self.config.max_seconds.max(0.0));
        let mut expansions = 0usize;
        loop {
            if expansions >= self.config.max_expansions || started.elapsed() > budget {
                return Ok(SearchOutcome::Exhausted(Exhausted::Limits));
            }
            let Some((id, tie)) = self.state.pop() else {
                return Ok(SearchOutcome::Exhausted(Exhausted::NoSolution));
            };
            if tie {
                self.stats.ties_at_pop += 1;
            }
            if self.state.node(id).apr == T::zero() {
                if !self.state.node(id).refined {
                    match self.refine(id) {
                        Refinement::Infeasible => {
                            self.state.prune(id);
                            continue;
                        }
                        Refinement::Changed => {
                            self.state.open(id);
                            continue;
                        }
                        Refinement::Unchanged => {}
                    }
                }
                // keep the certified node findable by a later repair
                self.state.open(id);
                return Ok(SearchOutcome::Solved(self.solution_of(id)));
            }
            self.expand(id)?;
            expansions += 1;
        }
    }

    /// Re-solves the node's schedule with planned motion instead of
    /// straight-line estimates.
    fn refine(&mut self, id: NodeId) -> Refinement {
        self.stats.scheduler_calls += 1;
        self.stats.nodes_touched += 1;
        let travel = RecordingTravel::new(&self.planner);
        let node = self.state.node(id);
        let schedule = build_scheduling_problem(&self.domain, &node.allocation, &travel)
            .and_then(|p| solve_schedule(&p));
        let plans = travel.into_records();
        let node = self.state.node_mut(id);
        let Some(schedule) = schedule else {
            node.schedule = None;
            return Refinement::Infeasible;
        };
        let before = node.makespan().unwrap_or_else(T::infinity);
        let changed = (schedule.makespan - before).abs() > T::tolerance();
        node.schedule = Some(schedule);
        node.plans = plans;
        node.refined = true;
        if changed {
            Refinement::Changed
        } else {
            Refinement::Unchanged
        }
    }

    fn expand(&mut self, id: NodeId) -> Result<()> {
        self.state.close(id);
        self.stats.expansions += 1;
        let parent = self.state.node(id).allocation.clone();
        let mut children = Vec::new();
        for m in 0..parent.tasks() {
            for n in 0..parent.robots() {
                if parent.get(m, n) {
                    continue;
                }
                let child = parent.with(m, n);
                if self.state.lookup(&child).is_none() {
                    children.push(child);
                }
            }
        }
        let evals = evaluate_many(
            &self.domain,
            EstimatedTravel::new(self.planner.roadmap()),
            &children,
            self.config.threads,
        )?;
        self.stats.scheduler_calls += evals.len();
        self.stats.nodes_generated += evals.len();
        for (alloc, eval) in children.into_iter().zip(evals) {
            let cid = self.state.insert(alloc, Some(id));
            self.file(cid, eval);
            if self.config.record_expansions && self.state.node(cid).status == NodeStatus::Open {
                let (p, c) = (self.state.node(id), self.state.node(cid));
                let record = ExpansionRecord {
                    parent: id,
                    child: cid,
                    parent_apr: p.apr,
                    child_apr: c.apr,
                    parent_nsq: p.nsq,
                    child_nsq: c.nsq,
                };
                self.state.expansions.push(record);
            }
        }
        Ok(())
    }

    pub(crate) fn solution_of(&self, id: NodeId) -> Solution<T> {
        let node = self.state.node(id);
        Solution {
            allocation: node.allocation.clone(),
            schedule: node.schedule.clone().expect("goal node has a schedule"),
            motion_plans: node.plans.clone(),
        }
    }
}
