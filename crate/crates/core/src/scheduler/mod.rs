//! Makespan-minimizing scheduler for a fixed allocation.
//!
//! Start times obey difference constraints (precedence, travel, arrival) plus
//! disjunctive mutex pairs. Once every mutex pair has a direction the
//! constraints form a simple temporal network whose earliest solution is a
//! longest-path computation; the disjunctions are resolved exactly by
//! branch-and-bound over pair directions.

mod bnb;
mod bounds;
mod problem;
mod stn;

pub use bnb::{solve_schedule, solve_schedule_with_stats, BnbStats};
pub use bounds::{schedule_lower_bound, schedule_upper_bound};
pub use problem::{build_scheduling_problem, SchedulingProblem};
pub use stn::stn_solve;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Start time per task, the makespan, and the direction chosen for every
/// reduced mutex pair as `(before, after)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule<T> {
    pub start_times: Vec<T>,
    pub makespan: T,
    pub orderings: Vec<(usize, usize)>,
}

impl<T: Scalar> Schedule<T> {
    /// Schedule of a problem with no tasks.
    pub fn empty() -> Self {
        Self {
            start_times: Vec::new(),
            makespan: T::zero(),
            orderings: Vec::new(),
        }
    }

    /// Checks every constraint of `problem` against this schedule, returning
    /// a description of the first violation.
    pub fn check(&self, problem: &SchedulingProblem<T>) -> Result<(), String> {
        let tol = T::tolerance();
        let s = &self.start_times;
        let d = &problem.durations;
        if s.len() != d.len() {
            return Err(format!("{} start times for {} tasks", s.len(), d.len()));
        }
        for i in 0..s.len() {
            if self.makespan + tol < s[i] + d[i] {
                return Err(format!("task {i} ends after the makespan"));
            }
            if s[i] + tol < problem.initial_arrivals[i] {
                return Err(format!("task {i} starts before its coalition can arrive"));
            }
        }
        let sequenced = |i: usize, j: usize| s[j] + tol >= s[i] + d[i] + problem.transition(i, j);
        for &(i, j) in &problem.precedence {
            if !sequenced(i, j) {
                return Err(format!("precedence ({i}, {j}) violated"));
            }
        }
        for &(a, b) in &problem.mutex_reduced {
            let chosen = self
                .orderings
                .iter()
                .find(|&&(x, y)| (x, y) == (a, b) || (x, y) == (b, a))
                .ok_or_else(|| format!("mutex ({a}, {b}) has no direction"))?;
            if !sequenced(chosen.0, chosen.1) {
                return Err(format!("mutex ({a}, {b}) overlaps"));
            }
        }
        Ok(())
    }
}

/// Completion time of the last task; zero without tasks.
pub fn makespan<T: Scalar>(start_times: &[T], durations: &[T]) -> T {
    start_times
        .iter()
        .zip(durations)
        .map(|(&s, &d)| s + d)
        .fold(T::zero(), T::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn makespan_examples() {
        assert_eq!(makespan::<f64>(&[], &[]), 0.0);
        assert_eq!(makespan(&[0.0, 3.0], &[2.0, 3.0]), 6.0);
        assert_eq!(makespan(&[0.0, 0.0], &[5.0, 1.0]), 5.0);
    }
}
