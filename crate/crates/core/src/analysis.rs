//! Optimality-gap bounds, brute-force oracles for small instances and the
//! reports that compare the two.

use serde::{Deserialize, Serialize};

use crate::domain::{is_valid_allocation, resource_count, Allocation, ProblemDomain, Solution};
use crate::error::{Error, Result};
use crate::planner::TravelTimes;
use crate::scalar::Scalar;
use crate::scheduler::{build_scheduling_problem, solve_schedule};
use crate::search::{Allocator, SearchConfig};

/// Largest `tasks × robots` the enumeration oracles accept.
pub const ENUMERATION_LIMIT: usize = 12;

fn gap_factor<T: Scalar>(alpha: T, lb: T, ub: T) -> Result<T> {
    let half = T::lit(0.5);
    if !(alpha >= T::zero() && alpha <= T::one()) {
        return Err(Error::AlphaOutOfRange(alpha.to_f64_lossy()));
    }
    if alpha >= half {
        return Err(Error::BoundInsignificant(alpha.to_f64_lossy()));
    }
    if !(ub > lb) {
        return Err(Error::DegenerateBounds {
            lb: lb.to_f64_lossy(),
            ub: ub.to_f64_lossy(),
        });
    }
    Ok(alpha / (T::one() - alpha) * (ub - lb))
}

/// Worst-case makespan excess over the optimum: `α/(1−α)·(ub − lb)`.
pub fn time_optimality_bound<T: Scalar>(alpha: T, lb: T, ub: T) -> Result<T> {
    gap_factor(alpha, lb, ub)
}

/// The same bound scaled by the smallest APR left in the open set.
pub fn posthoc_bound<T: Scalar>(alpha: T, lb: T, ub: T, min_open_apr: T) -> Result<T> {
    if !(min_open_apr >= T::zero() && min_open_apr <= T::one()) {
        return Err(Error::InvalidProblem(format!(
            "min open APR {min_open_apr} outside [0, 1]"
        )));
    }
    Ok(gap_factor(alpha, lb, ub)? * min_open_apr)
}

fn check_size<T: Scalar>(domain: &ProblemDomain<T>) -> Result<()> {
    let (tasks, robots) = (domain.num_tasks(), domain.num_robots());
    if tasks * robots > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            tasks,
            robots,
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(())
}

/// Every valid allocation with its optimal makespan under `travel`;
/// unschedulable ones are skipped.
fn valid_schedules<T: Scalar, P: TravelTimes<T> + ?Sized>(
    domain: &ProblemDomain<T>,
    travel: &P,
) -> Result<Vec<(Allocation, T)>> {
    check_size(domain)?;
    let (m, n) = (domain.num_tasks(), domain.num_robots());
    let mut out = Vec::new();
    for bits in 0u32..1 << (m * n) {
        let mut alloc = Allocation::zeros(m, n);
        for c in (0..m * n).filter(|c| bits >> c & 1 == 1) {
            alloc.set(c / n, c % n, true);
        }
        if !is_valid_allocation(&alloc, &domain.team, &domain.requirements)? {
            continue;
        }
        let schedule =
            build_scheduling_problem(domain, &alloc, travel).and_then(|p| solve_schedule(&p));
        if let Some(s) = schedule {
            out.push((alloc, s.makespan));
        }
    }
    Ok(out)
}

/// Shortest makespan over all valid allocations, or `None` if none is
/// schedulable. Needs `tasks × robots ≤ ENUMERATION_LIMIT`.
pub fn brute_force_optimal_makespan<T: Scalar, P: TravelTimes<T> + ?Sized>(
    domain: &ProblemDomain<T>,
    travel: &P,
) -> Result<Option<T>> {
    Ok(valid_schedules(domain, travel)?
        .into_iter()
        .map(|(_, c)| c)
        .reduce(T::min))
}

/// Fewest assignments over all valid, schedulable allocations.
pub fn brute_force_min_assignments<T: Scalar, P: TravelTimes<T> + ?Sized>(
    domain: &ProblemDomain<T>,
    travel: &P,
) -> Result<Option<usize>> {
    Ok(valid_schedules(domain, travel)?
        .iter()
        .map(|(a, _)| resource_count(a))
        .min())
}

/// Search result at one `alpha` set against the enumerated optimum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub alpha: f64,
    #[serde(rename = "optimal")]
    pub optimal_makespan: f64,
    #[serde(rename = "achieved")]
    pub achieved_makespan: f64,
    pub lb: f64,
    pub ub: f64,
    #[serde(rename = "bound_eq6")]
    pub apriori_bound: f64,
    #[serde(rename = "bound_eq14")]
    pub posthoc_bound: f64,
    pub min_open_apr: f64,
    #[serde(rename = "gap_normalized")]
    pub normalized_gap: f64,
}

/// Column order of [`BoundReport`] rows.
pub const BOUND_CSV_HEADER: &str =
    "alpha,optimal,achieved,lb,ub,bound_eq6,bound_eq14,min_open_apr,gap_normalized";

impl BoundReport {
    pub fn gap(&self) -> f64 {
        self.achieved_makespan - self.optimal_makespan
    }

    pub fn normalized_apriori(&self) -> f64 {
        self.apriori_bound / (self.ub - self.lb)
    }

    pub fn normalized_posthoc(&self) -> f64 {
        self.posthoc_bound / (self.ub - self.lb)
    }

    pub fn respects_apriori(&self) -> bool {
        self.gap() <= self.apriori_bound + 1e-9
    }

    pub fn respects_posthoc(&self) -> bool {
        self.gap() <= self.posthoc_bound + 1e-9
    }
}

/// Solves `domain` at `alpha` and fills a [`BoundReport`] without judging
/// it. The solution and allocator are returned for further inspection.
pub fn evaluate_bound<T: Scalar>(
    domain: &ProblemDomain<T>,
    alpha: f64,
    config: &SearchConfig,
) -> Result<(BoundReport, Solution<T>, Allocator<T>)> {
    check_size(domain)?;
    let a = T::lit(alpha);
    let config = config.clone().with_alpha(alpha);
    let mut allocator = Allocator::new(domain.clone(), config)?;
    let solution = allocator.run()?.into_result()?;
    let bounds = *allocator.state().bounds();
    let apriori = time_optimality_bound(a, bounds.lower, bounds.upper)?;
    // goal nodes still queued say nothing about the gap
    let min_apr = allocator.state().min_open_apr().unwrap_or_else(T::zero);
    let posthoc = posthoc_bound(a, bounds.lower, bounds.upper, min_apr)?;
    let optimal = brute_force_optimal_makespan(allocator.domain(), allocator.planner())?
        .expect("search found a valid allocation, so one exists");
    let achieved = solution.makespan();
    let report = BoundReport {
        alpha,
        optimal_makespan: optimal.to_f64_lossy(),
        achieved_makespan: achieved.to_f64_lossy(),
        lb: bounds.lower.to_f64_lossy(),
        ub: bounds.upper.to_f64_lossy(),
        apriori_bound: apriori.to_f64_lossy(),
        posthoc_bound: posthoc.to_f64_lossy(),
        min_open_apr: min_apr.to_f64_lossy(),
        normalized_gap: ((achieved - optimal) / bounds.span()).to_f64_lossy(),
    };
    Ok((report, solution, allocator))
}

/// [`evaluate_bound`], failing if either gap bound is exceeded.
pub fn validate_bound<T: Scalar>(
    domain: &ProblemDomain<T>,
    alpha: f64,
    config: &SearchConfig,
) -> Result<BoundReport> {
    let (report, _, _) = evaluate_bound(domain, alpha, config)?;
    if !report.respects_apriori() || !report.respects_posthoc() {
        return Err(Error::BoundViolation(format!(
            "alpha {}: gap {} exceeds bound {} or tightened bound {}",
            report.alpha,
            report.gap(),
            report.apriori_bound,
            report.posthoc_bound
        )));
    }
    Ok(report)
}

/// Assignment count at `alpha = 1` against the enumerated minimum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub achieved: usize,
    pub optimal: usize,
    /// Pops where the best open node shared its priority with another;
    /// greedy descent is only guaranteed minimal when this is zero.
    pub ties: usize,
}

pub fn evaluate_resources<T: Scalar>(
    domain: &ProblemDomain<T>,
    config: &SearchConfig,
) -> Result<(ResourceReport, Solution<T>, Allocator<T>)> {
    check_size(domain)?;
    let mut allocator = Allocator::new(domain.clone(), config.clone().with_alpha(1.0))?;
    let solution = allocator.run()?.into_result()?;
    let optimal = brute_force_min_assignments(allocator.domain(), allocator.planner())?
        .expect("search found a valid allocation, so one exists");
    let report = ResourceReport {
        achieved: resource_count(&solution.allocation),
        optimal,
        ties: allocator.stats().ties_at_pop,
    };
    Ok((report, solution, allocator))
}
