//! Small hand-built domains for unit tests.

use crate::domain::{
    DesiredTraitMatrix, ProblemDomain, TaskNetwork, TaskSpec, TeamTraitMatrix, WorldModel,
};
use crate::geometry::{Aabb, Obstacle, Point};

/// Open 10×10 world, unit speeds, robots starting on the bottom edge and
/// task `m` sitting at `(2m + 1, 5)`.
pub(crate) fn domain(
    team: Vec<Vec<f64>>,
    req: Vec<Vec<f64>>,
    durations: Vec<f64>,
) -> ProblemDomain<f64> {
    domain_in(team, req, durations, Vec::new())
}

pub(crate) fn domain_in(
    team: Vec<Vec<f64>>,
    req: Vec<Vec<f64>>,
    durations: Vec<f64>,
    obstacles: Vec<Obstacle<f64>>,
) -> ProblemDomain<f64> {
    let u = team.first().or(req.first()).map_or(1, Vec::len);
    let n = team.len();
    let tasks = durations
        .iter()
        .enumerate()
        .map(|(m, &d)| {
            TaskSpec::stationary(format!("t{m}"), d, Point::new(2.0 * m as f64 + 1.0, 5.0))
        })
        .collect();
    ProblemDomain {
        iteration: 0,
        network: TaskNetwork::new(tasks, vec![], vec![]),
        team: TeamTraitMatrix::new(
            (0..n).map(|i| format!("r{i}")).collect(),
            (0..u).map(|i| format!("u{i}")).collect(),
            team,
        )
        .unwrap(),
        requirements: DesiredTraitMatrix::new(req, u).unwrap(),
        world: WorldModel {
            bounds: Aabb::new(Point::new(0.0, 0.0), Point::new(10.0, 10.0)),
            obstacles,
            robot_starts: (0..n).map(|i| Point::new(i as f64 + 0.5, 0.5)).collect(),
            robot_speeds: vec![1.0; n],
        },
    }
}
