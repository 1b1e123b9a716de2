//! Problem formalism: trait matrices, the task network, the world model,
//! allocations and the validity predicates built on them.

mod allocation;
mod validation;

pub use allocation::Allocation;
pub use validation::{validate_problem, IssueCode, ValidationIssue, ValidationReport};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Obstacle, Point};
use crate::matrix::Matrix;
use crate::planner::PlanRecord;
use crate::scalar::Scalar;
use crate::scheduler::Schedule;

/// Capabilities of the team: one row per robot, one column per trait.
#[derive(Clone, Debug, PartialEq)]
pub struct TeamTraitMatrix<T> {
    pub entries: Matrix<T>,
    pub robot_ids: Vec<String>,
    pub trait_names: Vec<String>,
}

impl<T: Scalar> TeamTraitMatrix<T> {
    pub fn new(
        robot_ids: Vec<String>,
        trait_names: Vec<String>,
        rows: Vec<Vec<T>>,
    ) -> Result<Self> {
        if rows.len() != robot_ids.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} trait rows for {} robots",
                rows.len(),
                robot_ids.len()
            )));
        }
        let entries = Matrix::from_rows_with_cols(rows, trait_names.len())?;
        Ok(Self {
            entries,
            robot_ids,
            trait_names,
        })
    }

    pub fn num_robots(&self) -> usize {
        self.entries.rows()
    }

    pub fn num_traits(&self) -> usize {
        self.entries.cols()
    }
}

/// Requirements of every task: one row per task, one column per trait.
#[derive(Clone, Debug, PartialEq)]
pub struct DesiredTraitMatrix<T> {
    pub entries: Matrix<T>,
}

impl<T: Scalar> DesiredTraitMatrix<T> {
    pub fn new(rows: Vec<Vec<T>>, num_traits: usize) -> Result<Self> {
        Ok(Self {
            entries: Matrix::from_rows_with_cols(rows, num_traits)?,
        })
    }

    pub fn num_tasks(&self) -> usize {
        self.entries.rows()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaskSpec<T> {
    pub id: String,
    /// Seconds.
    pub duration: T,
    pub initial: Point<T>,
    pub terminal: Point<T>,
}

impl<T: Scalar> TaskSpec<T> {
    /// A task performed in place.
    pub fn stationary(id: impl Into<String>, duration: T, at: Point<T>) -> Self {
        Self {
            id: id.into(),
            duration,
            initial: at,
            terminal: at,
        }
    }

    pub fn is_spatial(&self) -> bool {
        self.initial != self.terminal
    }
}

/// Tasks plus precedence (`before`, `after`) and mutex edges, by task index.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct TaskNetwork<T> {
    pub tasks: Vec<TaskSpec<T>>,
    pub precedence: Vec<(usize, usize)>,
    /// Unordered pairs, stored with the smaller index first.
    pub mutex: Vec<(usize, usize)>,
}

impl<T: Scalar> TaskNetwork<T> {
    pub fn new(
        tasks: Vec<TaskSpec<T>>,
        precedence: Vec<(usize, usize)>,
        mutex: Vec<(usize, usize)>,
    ) -> Self {
        let mut mutex: Vec<_> = mutex
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        mutex.sort_unstable();
        mutex.dedup();
        let mut precedence = precedence;
        precedence.sort_unstable();
        precedence.dedup();
        Self {
            tasks,
            precedence,
            mutex,
        }
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn durations(&self) -> Vec<T> {
        self.tasks.iter().map(|t| t.duration).collect()
    }

    /// `reach[i][j]` is true when a chain of precedence edges leads from `i` to `j`.
    pub fn precedence_closure(&self) -> Vec<Vec<bool>> {
        let m = self.len();
        let mut reach = vec![vec![false; m]; m];
        for &(a, b) in &self.precedence {
            if a < m && b < m {
                reach[a][b] = true;
            }
        }
        for k in 0..m {
            for i in 0..m {
                if reach[i][k] {
                    for j in 0..m {
                        if reach[k][j] {
                            reach[i][j] = true;
                        }
                    }
                }
            }
        }
        reach
    }

    /// Drops task `index` and every edge touching it, shifting later indices down.
    pub fn remove_task(&mut self, index: usize) {
        self.tasks.remove(index);
        let shift = |i: usize| if i > index { i - 1 } else { i };
        self.precedence = self
            .precedence
            .iter()
            .filter(|&&(a, b)| a != index && b != index)
            .map(|&(a, b)| (shift(a), shift(b)))
            .collect();
        self.mutex = self
            .mutex
            .iter()
            .filter(|&&(a, b)| a != index && b != index)
            .map(|&(a, b)| (shift(a), shift(b)))
            .collect();
    }
}

/// Static geometry plus where each robot starts and how fast it moves.
///
/// `robot_starts` and `robot_speeds` are indexed like the team matrix rows.
#[derive(Clone, Debug, PartialEq)]
pub struct WorldModel<T> {
    pub bounds: Aabb<T>,
    pub obstacles: Vec<Obstacle<T>>,
    pub robot_starts: Vec<Point<T>>,
    /// Metres per second.
    pub robot_speeds: Vec<T>,
}

impl<T: Scalar> WorldModel<T> {
    pub fn is_free(&self, p: &Point<T>) -> bool {
        self.bounds.contains(p) && !self.obstacles.iter().any(|o| o.contains(p))
    }

    pub fn segment_is_free(&self, a: &Point<T>, b: &Point<T>) -> bool {
        !self.obstacles.iter().any(|o| o.intersects_segment(a, b))
    }

    pub fn slowest_speed(&self) -> Option<T> {
        self.robot_speeds.iter().copied().reduce(T::min)
    }
}

/// One robot as written in problem files and new-agent events. Traits not
/// listed are zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
pub struct RobotSpec<T> {
    pub id: String,
    pub traits: BTreeMap<String, T>,
    pub start: Point<T>,
    /// Metres per second.
    pub speed: T,
}

/// Everything needed to define one iteration of the problem.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemDomain<T> {
    pub iteration: u64,
    pub network: TaskNetwork<T>,
    pub team: TeamTraitMatrix<T>,
    pub requirements: DesiredTraitMatrix<T>,
    pub world: WorldModel<T>,
}

impl<T: Scalar> ProblemDomain<T> {
    pub fn num_tasks(&self) -> usize {
        self.network.len()
    }

    pub fn num_robots(&self) -> usize {
        self.team.num_robots()
    }

    pub fn num_traits(&self) -> usize {
        self.team.num_traits()
    }

    pub fn robot_index(&self, id: &str) -> Result<usize> {
        self.team
            .robot_ids
            .iter()
            .position(|r| r == id)
            .ok_or_else(|| Error::UnknownRobot(id.to_owned()))
    }

    pub fn task_index(&self, id: &str) -> Result<usize> {
        self.network
            .tasks
            .iter()
            .position(|t| t.id == id)
            .ok_or_else(|| Error::UnknownTask(id.to_owned()))
    }

    /// Dense trait row for a name→value map; unknown names are an error.
    pub fn trait_row(&self, traits: &BTreeMap<String, T>) -> Result<Vec<T>> {
        let mut row = vec![T::zero(); self.num_traits()];
        for (name, &v) in traits {
            row[self.trait_index(name)?] = v;
        }
        Ok(row)
    }

    pub fn trait_index(&self, name: &str) -> Result<usize> {
        self.team
            .trait_names
            .iter()
            .position(|t| t == name)
            .ok_or_else(|| Error::UnknownTrait(name.to_owned()))
    }
}

/// Allocation, schedule and the motion plans backing its travel times.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution<T> {
    pub allocation: Allocation,
    pub schedule: Schedule<T>,
    pub motion_plans: Vec<PlanRecord<T>>,
}

impl<T: Scalar> Solution<T> {
    pub fn makespan(&self) -> T {
        self.schedule.makespan
    }
}

fn check_dims<T: Scalar>(alloc: &Allocation, team: &TeamTraitMatrix<T>) -> Result<()> {
    if alloc.robots() != team.num_robots() {
        return Err(Error::DimensionMismatch(format!(
            "allocation has {} robot columns, team has {} robots",
            alloc.robots(),
            team.num_robots()
        )));
    }
    Ok(())
}

/// Traits gathered at each task: the product `A·Q`.
pub fn aggregate_traits<T: Scalar>(
    alloc: &Allocation,
    team: &TeamTraitMatrix<T>,
) -> Result<Matrix<T>> {
    check_dims(alloc, team)?;
    let mut out = Matrix::zeros(alloc.tasks(), team.num_traits());
    for m in 0..alloc.tasks() {
        for n in alloc.robots_of(m) {
            for (acc, &q) in out.row_mut(m).iter_mut().zip(team.entries.row(n)) {
                *acc = *acc + q;
            }
        }
    }
    Ok(out)
}

/// Unmet requirement per task and trait: `Y* − A·Q`.
pub fn trait_mismatch<T: Scalar>(
    alloc: &Allocation,
    team: &TeamTraitMatrix<T>,
    req: &DesiredTraitMatrix<T>,
) -> Result<Matrix<T>> {
    if alloc.tasks() != req.num_tasks() || team.num_traits() != req.entries.cols() {
        return Err(Error::DimensionMismatch(format!(
            "allocation {}x{}, team {}x{}, requirements {}x{}",
            alloc.tasks(),
            alloc.robots(),
            team.num_robots(),
            team.num_traits(),
            req.entries.rows(),
            req.entries.cols()
        )));
    }
    req.entries.sub(&aggregate_traits(alloc, team)?)
}

/// True when every aggregated trait meets its requirement (within tolerance).
pub fn is_valid_allocation<T: Scalar>(
    alloc: &Allocation,
    team: &TeamTraitMatrix<T>,
    req: &DesiredTraitMatrix<T>,
) -> Result<bool> {
    let tol = T::tolerance();
    Ok(trait_mismatch(alloc, team, req)?.iter().all(|&e| e <= tol))
}

/// Total number of robot-to-task assignments.
pub fn resource_count(alloc: &Allocation) -> usize {
    alloc.count()
}
