use crate::domain::{Allocation, ProblemDomain};
use crate::planner::TravelTimes;
use crate::scalar::Scalar;

/// Constraint data for one allocation.
#[derive(Clone, Debug, PartialEq)]
pub struct SchedulingProblem<T> {
    pub durations: Vec<T>,
    /// Ordered pairs that are always enforced as `s_j >= s_i + d_i + x_ij`.
    pub precedence: Vec<(usize, usize)>,
    /// Unordered pairs `(i, j)`, `i < j`, that must not overlap and are not
    /// already ordered by (transitive) precedence.
    pub mutex_reduced: Vec<(usize, usize)>,
    /// Earliest possible start of each task given where its coalition starts.
    pub initial_arrivals: Vec<T>,
    transitions: Vec<T>,
}

impl<T: Scalar> SchedulingProblem<T> {
    pub fn new(durations: Vec<T>) -> Self {
        let m = durations.len();
        Self {
            durations,
            precedence: Vec::new(),
            mutex_reduced: Vec::new(),
            initial_arrivals: vec![T::zero(); m],
            transitions: vec![T::zero(); m * m],
        }
    }

    pub fn len(&self) -> usize {
        self.durations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.durations.is_empty()
    }

    /// Time needed between the end of `i` and the start of `j`.
    pub fn transition(&self, i: usize, j: usize) -> T {
        self.transitions[i * self.len() + j]
    }

    pub fn set_transition(&mut self, i: usize, j: usize, t: T) {
        let m = self.len();
        self.transitions[i * m + j] = t;
    }

    pub fn with_precedence(mut self, i: usize, j: usize) -> Self {
        self.precedence.push((i, j));
        self
    }

    pub fn with_mutex(mut self, i: usize, j: usize) -> Self {
        self.mutex_reduced.push((i.min(j), i.max(j)));
        self
    }

    pub fn with_transition(mut self, i: usize, j: usize, t: T) -> Self {
        self.set_transition(i, j, t);
        self
    }

    pub fn with_arrival(mut self, i: usize, t: T) -> Self {
        self.initial_arrivals[i] = t;
        self
    }
}

/// Assembles the scheduling constraints for `alloc`.
///
/// Robots are single-task: any two tasks sharing a robot become mutually
/// exclusive unless precedence already orders them, and the shared robots'
/// travel between the sites sets the transition time. Returns `None` when
/// `travel` reports some required movement as impossible.
pub fn build_scheduling_problem<T: Scalar, P: TravelTimes<T> + ?Sized>(
    domain: &ProblemDomain<T>,
    alloc: &Allocation,
    travel: &P,
) -> Option<SchedulingProblem<T>> {
    let net = &domain.network;
    let m = net.len();
    let mut problem = SchedulingProblem::new(net.durations());
    let closure = net.precedence_closure();
    let ordered = |i: usize, j: usize| closure[i][j] || closure[j][i];

    problem.precedence = net.precedence.clone();
    let mut mutex: Vec<(usize, usize)> = net
        .mutex
        .iter()
        .copied()
        .filter(|&(a, b)| !ordered(a, b))
        .collect();

    for i in 0..m {
        for j in 0..m {
            if i == j || !alloc.shared_robots(i, j).any(|_| true) {
                continue;
            }
            let from = net.tasks[i].terminal;
            let to = net.tasks[j].initial;
            let mut x = T::zero();
            for n in alloc.shared_robots(i, j) {
                x = x.max(travel.travel_time(domain, n, from, to)?);
            }
            problem.set_transition(i, j, x);
            if closure[i][j] {
                // a precedence chain orders the pair; the robot still has to travel
                if !problem.precedence.contains(&(i, j)) {
                    problem.precedence.push((i, j));
                }
            } else if i < j && !closure[j][i] {
                mutex.push((i, j));
            }
        }
    }
    mutex.sort_unstable();
    mutex.dedup();
    problem.mutex_reduced = mutex;

    for (i, task) in net.tasks.iter().enumerate() {
        let mut arrival = T::zero();
        for n in alloc.robots_of(i) {
            let start = domain.world.robot_starts[n];
            arrival = arrival.max(travel.travel_time(domain, n, start, task.initial)?);
            if task.is_spatial() {
                travel.travel_time(domain, n, task.initial, task.terminal)?;
            }
        }
        problem.initial_arrivals[i] = arrival;
    }
    Some(problem)
}
