use super::{makespan, Schedule, SchedulingProblem};
use crate::scalar::Scalar;

/// Earliest start times under precedence plus the given `(before, after)`
/// edges, or `None` when the constraint graph has a positive cycle.
///
/// Longest path from a virtual source (edge weight `x_i` to task `i`) over
/// edges `i -> j` weighted `d_i + x_ij`, by Bellman-Ford relaxation.
pub(crate) fn earliest_starts<T: Scalar>(
    problem: &SchedulingProblem<T>,
    extra: &[(usize, usize)],
) -> Option<Vec<T>> {
    let m = problem.len();
    let edges: Vec<(usize, usize, T)> = problem
        .precedence
        .iter()
        .chain(extra)
        .map(|&(i, j)| (i, j, problem.durations[i] + problem.transition(i, j)))
        .collect();
    let mut s = problem.initial_arrivals.clone();
    for _ in 0..=m {
        let mut changed = false;
        for &(i, j, w) in &edges {
            let candidate = s[i] + w;
            if candidate > s[j] {
                s[j] = candidate;
                changed = true;
            }
        }
        if !changed {
            return Some(s);
        }
    }
    None
}

/// Solves the temporal network obtained by fixing every mutex pair's direction.
///
/// `orderings` holds one `(before, after)` entry per pair of
/// `problem.mutex_reduced`. Returns the componentwise-minimal start times, or
/// `None` if the fixed orderings are infeasible.
///
/// # Panics
///
/// If some mutex pair has no direction in `orderings`.
pub fn stn_solve<T: Scalar>(
    problem: &SchedulingProblem<T>,
    orderings: &[(usize, usize)],
) -> Option<Schedule<T>> {
    for &(a, b) in &problem.mutex_reduced {
        assert!(
            orderings.iter().any(|&o| o == (a, b) || o == (b, a)),
            "mutex pair ({a}, {b}) has no direction"
        );
    }
    let starts = earliest_starts(problem, orderings)?;
    Some(Schedule {
        makespan: makespan(&starts, &problem.durations),
        start_times: starts,
        orderings: orderings.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exhaustive search over start times on a grid; returns the smallest
    /// feasible makespan.
    fn grid_oracle(problem: &SchedulingProblem<f64>, step: f64, horizon: f64) -> Option<f64> {
        let m = problem.len();
        let ticks = (horizon / step) as usize;
        let mut best: Option<f64> = None;
        let mut idx = vec![0usize; m];
        loop {
            let s: Vec<f64> = idx.iter().map(|&k| k as f64 * step).collect();
            let ok = (0..m).all(|i| s[i] >= problem.initial_arrivals[i])
                && problem
                    .precedence
                    .iter()
                    .all(|&(i, j)| s[j] >= s[i] + problem.durations[i] + problem.transition(i, j));
            if ok {
                let c = makespan(&s, &problem.durations);
                best = Some(best.map_or(c, |b: f64| b.min(c)));
            }
            let mut k = 0;
            loop {
                if k == m {
                    return best;
                }
                idx[k] += 1;
                if idx[k] <= ticks {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    #[test]
    fn single_task() {
        let p = SchedulingProblem::new(vec![5.0]);
        let s = stn_solve(&p, &[]).unwrap();
        assert_eq!(s.start_times, vec![0.0]);
        assert_eq!(s.makespan, 5.0);
    }

    #[test]
    fn precedence_with_transition_matches_grid_search() {
        let p = SchedulingProblem::new(vec![2.0, 3.0])
            .with_precedence(0, 1)
            .with_transition(0, 1, 1.0);
        assert_eq!(grid_oracle(&p, 0.5, 8.0), Some(6.0));
        let s = stn_solve(&p, &[]).unwrap();
        assert_eq!(s.start_times, vec![0.0, 3.0]);
        assert_eq!(s.makespan, 6.0);
        assert!(s.check(&p).is_ok());
    }

    #[test]
    fn cyclic_orderings_are_infeasible() {
        let p = SchedulingProblem::new(vec![1.0, 1.0]).with_mutex(0, 1);
        assert!(earliest_starts(&p, &[(0, 1), (1, 0)]).is_none());
    }

    #[test]
    fn zero_weight_cycle_is_feasible() {
        let p = SchedulingProblem::new(vec![0.0, 0.0])
            .with_precedence(0, 1)
            .with_precedence(1, 0);
        let s = stn_solve(&p, &[]).unwrap();
        assert_eq!(s.makespan, 0.0);
    }

    #[test]
    #[should_panic(expected = "no direction")]
    fn missing_direction_panics() {
        let p = SchedulingProblem::new(vec![1.0, 1.0]).with_mutex(0, 1);
        stn_solve(&p, &[]);
    }
}
