use std::collections::VecDeque;

use super::stn::earliest_starts;
use super::{makespan, Schedule, SchedulingProblem};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BnbStats {
    /// Branch-and-bound nodes whose relaxation was solved.
    pub nodes: usize,
    /// Temporal-network solves, including branching look-ahead.
    pub stn_solves: usize,
}

/// Minimum-makespan schedule over every direction assignment of the mutex
/// pairs, or `None` when all assignments are infeasible.
pub fn solve_schedule<T: Scalar>(problem: &SchedulingProblem<T>) -> Option<Schedule<T>> {
    solve_schedule_with_stats(problem).0
}

pub fn solve_schedule_with_stats<T: Scalar>(
    problem: &SchedulingProblem<T>,
) -> (Option<Schedule<T>>, BnbStats) {
    let mut out = vec![Vec::new(); problem.len()];
    for &(i, j) in &problem.precedence {
        out[i].push((j, problem.durations[i] + problem.transition(i, j)));
    }
    let mut search = BranchAndBound {
        problem,
        out,
        best: None,
        stats: BnbStats {
            nodes: 0,
            stn_solves: 1,
        },
    };
    if let Some(starts) = earliest_starts(problem, &[]) {
        let mut decided = vec![None; problem.mutex_reduced.len()];
        search.explore(&mut decided, starts);
    }
    (search.best, search.stats)
}

struct BranchAndBound<'a, T> {
    problem: &'a SchedulingProblem<T>,
    /// Outgoing weighted edges: precedence plus the mutex directions decided
    /// on the path to the current node.
    out: Vec<Vec<(usize, T)>>,
    best: Option<Schedule<T>>,
    stats: BnbStats,
}

/// Direction of a mutex pair `(a, b)`: `true` means `a` before `b`.
type Decisions = Vec<Option<bool>>;

impl<T: Scalar> BranchAndBound<'_, T> {
    fn oriented(&self, pair: usize, fwd: bool) -> (usize, usize) {
        let (a, b) = self.problem.mutex_reduced[pair];
        if fwd {
            (a, b)
        } else {
            (b, a)
        }
    }

    fn weight(&self, i: usize, j: usize) -> T {
        self.problem.durations[i] + self.problem.transition(i, j)
    }

    /// Earliest starts once edge `a -> b` joins the current graph, pushed
    /// forward from `starts`, the fixpoint without it. Dropping the undecided
    /// pairs can only shorten the makespan, so this bounds every completion
    /// from below. An increase that reaches `a` closes a positive cycle
    /// through the new edge.
    fn with_edge(&mut self, starts: &[T], a: usize, b: usize) -> Option<Vec<T>> {
        self.stats.stn_solves += 1;
        let mut s = starts.to_vec();
        let candidate = s[a] + self.weight(a, b);
        if candidate <= s[b] {
            return Some(s);
        }
        s[b] = candidate;
        let mut queue = VecDeque::from([b]);
        while let Some(i) = queue.pop_front() {
            for &(j, w) in &self.out[i] {
                let candidate = s[i] + w;
                if candidate > s[j] {
                    if j == a {
                        return None;
                    }
                    s[j] = candidate;
                    queue.push_back(j);
                }
            }
        }
        Some(s)
    }

    fn sequenced(&self, s: &[T], i: usize, j: usize) -> bool {
        let p = self.problem;
        s[j] + T::tolerance() >= s[i] + p.durations[i] + p.transition(i, j)
    }

    fn look_ahead(&mut self, starts: &[T], pair: usize, fwd: bool) -> (T, Option<Vec<T>>) {
        let (a, b) = self.oriented(pair, fwd);
        let child = self.with_edge(starts, a, b);
        let bound = child
            .as_ref()
            .map_or(T::infinity(), |s| makespan(s, &self.problem.durations));
        (bound, child)
    }

    fn explore(&mut self, decided: &mut Decisions, starts: Vec<T>) {
        self.stats.nodes += 1;
        let bound = makespan(&starts, &self.problem.durations);
        if self.best.as_ref().is_some_and(|b| bound >= b.makespan) {
            return;
        }

        let violated: Vec<usize> = self
            .problem
            .mutex_reduced
            .iter()
            .enumerate()
            .filter(|&(k, &(a, b))| {
                decided[k].is_none()
                    && !self.sequenced(&starts, a, b)
                    && !self.sequenced(&starts, b, a)
            })
            .map(|(k, _)| k)
            .collect();

        if violated.is_empty() {
            // the relaxed optimum already separates every open pair
            let orderings = self
                .problem
                .mutex_reduced
                .iter()
                .zip(decided.iter())
                .map(|(&(a, b), d)| {
                    let fwd = d.unwrap_or_else(|| self.sequenced(&starts, a, b));
                    if fwd {
                        (a, b)
                    } else {
                        (b, a)
                    }
                })
                .collect();
            self.best = Some(Schedule {
                makespan: bound,
                start_times: starts,
                orderings,
            });
            return;
        }

        // pair whose cheaper direction still pushes furthest
        let push = |i: usize, j: usize| starts[i] + self.weight(i, j) - starts[j];
        let k = violated
            .iter()
            .copied()
            .max_by(|&x, &y| {
                let (a, b) = self.problem.mutex_reduced[x];
                let (c, d) = self.problem.mutex_reduced[y];
                let px = push(a, b).min(push(b, a));
                let py = push(c, d).min(push(d, c));
                px.partial_cmp(&py).expect("finite").then(y.cmp(&x))
            })
            .expect("violated pairs exist");
        let fwd = self.look_ahead(&starts, k, true);
        let bwd = self.look_ahead(&starts, k, false);
        let order = if fwd.0 <= bwd.0 {
            [(true, fwd), (false, bwd)]
        } else {
            [(false, bwd), (true, fwd)]
        };
        for (dir, (child_bound, child)) in order {
            let Some(child) = child else {
                continue;
            };
            if self
                .best
                .as_ref()
                .is_some_and(|b| child_bound >= b.makespan)
            {
                continue;
            }
            let (a, b) = self.oriented(k, dir);
            let w = self.weight(a, b);
            self.out[a].push((b, w));
            decided[k] = Some(dir);
            self.explore(decided, child);
            decided[k] = None;
            self.out[a].pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheduler::stn_solve;

    fn brute_force(problem: &SchedulingProblem<f64>) -> Option<f64> {
        let pairs = &problem.mutex_reduced;
        let mut best: Option<f64> = None;
        for mask in 0u32..(1 << pairs.len()) {
            let orderings: Vec<_> = pairs
                .iter()
                .enumerate()
                .map(|(k, &(a, b))| if mask >> k & 1 == 1 { (a, b) } else { (b, a) })
                .collect();
            if let Some(s) = stn_solve(problem, &orderings) {
                best = Some(best.map_or(s.makespan, |b| b.min(s.makespan)));
            }
        }
        best
    }

    #[test]
    fn no_mutex_matches_stn() {
        let p = SchedulingProblem::new(vec![2.0, 3.0, 1.0])
            .with_precedence(0, 1)
            .with_transition(0, 1, 1.0);
        assert_eq!(solve_schedule(&p), stn_solve(&p, &[]));
    }

    #[test]
    fn symmetric_pair_gives_sum() {
        let p = SchedulingProblem::new(vec![4.0, 1.0]).with_mutex(0, 1);
        assert_eq!(brute_force(&p), Some(5.0));
        let s = solve_schedule(&p).unwrap();
        assert_eq!(s.makespan, 5.0);
        assert!(s.check(&p).is_ok());
    }

    #[test]
    fn asymmetric_transition_picks_cheap_order() {
        let p = SchedulingProblem::new(vec![2.0, 2.0])
            .with_mutex(0, 1)
            .with_transition(1, 0, 10.0);
        assert_eq!(brute_force(&p), Some(4.0));
        let s = solve_schedule(&p).unwrap();
        assert_eq!(s.makespan, 4.0);
        assert_eq!(s.orderings, vec![(0, 1)]);
    }

    #[test]
    fn infeasible_everywhere() {
        // precedence both ways with positive durations
        let p = SchedulingProblem::new(vec![1.0, 1.0])
            .with_precedence(0, 1)
            .with_precedence(1, 0);
        assert!(solve_schedule(&p).is_none());
    }

    #[test]
    fn works_in_single_precision() {
        let p = SchedulingProblem::<f32>::new(vec![2.0, 2.0])
            .with_mutex(0, 1)
            .with_transition(1, 0, 10.0);
        assert_eq!(solve_schedule(&p).unwrap().makespan, 4.0f32);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        pub(super) fn instance() -> impl Strategy<Value = SchedulingProblem<f64>> {
            (2usize..7).prop_flat_map(|m| {
                let pairs: Vec<(usize, usize)> = (0..m)
                    .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
                    .collect();
                let np = pairs.len();
                (
                    prop::collection::vec(0.0f64..10.0, m),
                    prop::collection::vec(0.0f64..5.0, m),
                    prop::collection::vec(0.0f64..4.0, m * m),
                    prop::collection::vec(0u8..6, np),
                )
                    .prop_map(move |(d, arr, x, kind)| {
                        let mut p = SchedulingProblem::new(d);
                        for (i, a) in arr.into_iter().enumerate() {
                            p.initial_arrivals[i] = a;
                        }
                        for i in 0..m {
                            for j in 0..m {
                                if i != j {
                                    p.set_transition(i, j, x[i * m + j]);
                                }
                            }
                        }
                        let mut mutexes = 0;
                        for (&(i, j), k) in pairs.iter().zip(kind) {
                            match k {
                                0 => p.precedence.push((i, j)),
                                1 | 2 if mutexes < 6 => {
                                    p.mutex_reduced.push((i, j));
                                    mutexes += 1;
                                }
                                _ => {}
                            }
                        }
                        p
                    })
            })
        }

        proptest! {
            #[test]
            fn branch_and_bound_is_exact(p in instance()) {
                let expected = brute_force(&p);
                let got = solve_schedule(&p);
                prop_assert_eq!(expected.is_some(), got.is_some());
                if let (Some(e), Some(g)) = (expected, got) {
                    prop_assert!((e - g.makespan).abs() <= 1e-9);
                    prop_assert!(g.check(&p).is_ok());
                }
            }

            #[test]
            fn relaxation_bounds_every_completion(p in instance(), fix in 0u32..64) {
                // decide a prefix of the pairs, relax the rest
                let k = p.mutex_reduced.len();
                let prefix = (fix as usize) % (k + 1);
                let decided: Vec<(usize, usize)> = p.mutex_reduced[..prefix]
                    .iter()
                    .enumerate()
                    .map(|(i, &(a, b))| if fix >> i & 1 == 1 { (a, b) } else { (b, a) })
                    .collect();
                if let Some(relaxed) = earliest_starts(&p, &decided) {
                    let bound = makespan(&relaxed, &p.durations);
                    let rest = &p.mutex_reduced[prefix..];
                    for mask in 0u32..(1 << rest.len()) {
                        let mut all = decided.clone();
                        all.extend(rest.iter().enumerate().map(|(i, &(a, b))| {
                            if mask >> i & 1 == 1 { (a, b) } else { (b, a) }
                        }));
                        if let Some(s) = stn_solve(&p, &all) {
                            prop_assert!(bound <= s.makespan + 1e-9);
                        }
                    }
                }
            }

            #[test]
            fn tightening_never_shortens(p in instance(), which in 0usize..3, amount in 0.0f64..5.0) {
                let mut q = p.clone();
                let m = q.len();
                match which {
                    0 => q.durations[0] += amount,
                    1 => { let x = q.transition(0, 1); q.set_transition(0, 1, x + amount); }
                    _ => if !q.mutex_reduced.contains(&(0, m - 1)) && !q.precedence.contains(&(0, m - 1)) {
                        q.mutex_reduced.push((0, m - 1));
                    },
                }
                if let (Some(a), Some(b)) = (solve_schedule(&p), solve_schedule(&q)) {
                    prop_assert!(b.makespan + 1e-9 >= a.makespan);
                }
                if solve_schedule(&p).is_none() {
                    prop_assert!(solve_schedule(&q).is_none());
                }
            }
        }
    }
}
