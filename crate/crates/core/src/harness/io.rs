use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::{
    DesiredTraitMatrix, ProblemDomain, RobotSpec, Solution, TaskNetwork, TaskSpec, TeamTraitMatrix,
    WorldModel,
};
use crate::error::{Error, Result};
use crate::geometry::{Aabb, Obstacle, Point};
use crate::matrix::Matrix;
use crate::planner::PlanRecord;
use crate::repair::DynamicEvent;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
pub struct TaskFile<T> {
    pub id: String,
    pub duration: T,
    #[serde(default)]
    pub requires: BTreeMap<String, T>,
    pub initial: Point<T>,
    pub terminal: Point<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
pub struct WorldFile<T> {
    pub bounds: Aabb<T>,
    #[serde(default)]
    pub obstacles: Vec<Obstacle<T>>,
}

/// On-disk problem description. Ids are names; trait maps omit zeros.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
pub struct ProblemFile<T> {
    pub robots: Vec<RobotSpec<T>>,
    pub traits: Vec<String>,
    pub tasks: Vec<TaskFile<T>>,
    #[serde(default)]
    pub precedence: Vec<(String, String)>,
    #[serde(default)]
    pub mutex: Vec<(String, String)>,
    pub world: WorldFile<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
pub struct ScenarioFile<T> {
    pub events: Vec<DynamicEvent<T>>,
}

fn sparse<T: Scalar>(names: &[String], row: &[T]) -> BTreeMap<String, T> {
    names
        .iter()
        .zip(row)
        .filter(|(_, &v)| v != T::zero())
        .map(|(n, &v)| (n.clone(), v))
        .collect()
}

impl<T: Scalar> ProblemFile<T> {
    pub fn from_domain(domain: &ProblemDomain<T>) -> Self {
        let names = &domain.team.trait_names;
        let net = &domain.network;
        let id = |i: usize| net.tasks[i].id.clone();
        Self {
            robots: (0..domain.num_robots())
                .map(|n| RobotSpec {
                    id: domain.team.robot_ids[n].clone(),
                    traits: sparse(names, domain.team.entries.row(n)),
                    start: domain.world.robot_starts[n],
                    speed: domain.world.robot_speeds[n],
                })
                .collect(),
            traits: names.clone(),
            tasks: net
                .tasks
                .iter()
                .enumerate()
                .map(|(m, t)| TaskFile {
                    id: t.id.clone(),
                    duration: t.duration,
                    requires: sparse(names, domain.requirements.entries.row(m)),
                    initial: t.initial,
                    terminal: t.terminal,
                })
                .collect(),
            precedence: net
                .precedence
                .iter()
                .map(|&(a, b)| (id(a), id(b)))
                .collect(),
            mutex: net.mutex.iter().map(|&(a, b)| (id(a), id(b))).collect(),
            world: WorldFile {
                bounds: domain.world.bounds,
                obstacles: domain.world.obstacles.clone(),
            },
        }
    }

    /// Resolves names to indices; the result is not validated.
    pub fn into_domain(self) -> Result<ProblemDomain<T>> {
        let trait_index: HashMap<&str, usize> = self
            .traits
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let row = |map: &BTreeMap<String, T>| -> Result<Vec<T>> {
            let mut row = vec![T::zero(); self.traits.len()];
            for (name, &v) in map {
                let u = *trait_index
                    .get(name.as_str())
                    .ok_or_else(|| Error::UnknownTrait(name.clone()))?;
                row[u] = v;
            }
            Ok(row)
        };
        let team_rows = self
            .robots
            .iter()
            .map(|r| row(&r.traits))
            .collect::<Result<Vec<_>>>()?;
        let req_rows = self
            .tasks
            .iter()
            .map(|t| row(&t.requires))
            .collect::<Result<Vec<_>>>()?;
        let task_index: HashMap<&str, usize> = self
            .tasks
            .iter()
            .enumerate()
            .map(|(i, t)| (t.id.as_str(), i))
            .collect();
        let edge = |(a, b): &(String, String)| -> Result<(usize, usize)> {
            let find = |id: &String| {
                task_index
                    .get(id.as_str())
                    .copied()
                    .ok_or_else(|| Error::UnknownTask(id.clone()))
            };
            Ok((find(a)?, find(b)?))
        };
        let precedence = self
            .precedence
            .iter()
            .map(edge)
            .collect::<Result<Vec<_>>>()?;
        let mutex = self.mutex.iter().map(edge).collect::<Result<Vec<_>>>()?;
        let tasks = self
            .tasks
            .iter()
            .map(|t| TaskSpec {
                id: t.id.clone(),
                duration: t.duration,
                initial: t.initial,
                terminal: t.terminal,
            })
            .collect();
        let team = TeamTraitMatrix::new(
            self.robots.iter().map(|r| r.id.clone()).collect(),
            self.traits.clone(),
            team_rows,
        )?;
        let requirements = DesiredTraitMatrix {
            entries: if req_rows.is_empty() {
                Matrix::zeros(0, self.traits.len())
            } else {
                Matrix::from_rows_with_cols(req_rows, self.traits.len())?
            },
        };
        Ok(ProblemDomain {
            iteration: 0,
            network: TaskNetwork::new(tasks, precedence, mutex),
            team,
            requirements,
            world: WorldModel {
                bounds: self.world.bounds,
                obstacles: self.world.obstacles,
                robot_starts: self.robots.iter().map(|r| r.start).collect(),
                robot_speeds: self.robots.iter().map(|r| r.speed).collect(),
            },
        })
    }
}

pub fn parse_problem<T: Scalar>(json: &str) -> Result<ProblemDomain<T>> {
    serde_json::from_str::<ProblemFile<T>>(json)?.into_domain()
}

pub fn problem_to_json<T: Scalar>(domain: &ProblemDomain<T>) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ProblemFile::from_domain(
        domain,
    ))?)
}

pub fn read_problem<T: Scalar>(path: &Path) -> Result<ProblemDomain<T>> {
    parse_problem(&fs::read_to_string(path)?)
}

pub fn write_problem<T: Scalar>(path: &Path, domain: &ProblemDomain<T>) -> Result<()> {
    fs::write(path, problem_to_json(domain)? + "\n")?;
    Ok(())
}

pub fn parse_scenario<T: Scalar>(json: &str) -> Result<Vec<DynamicEvent<T>>> {
    Ok(serde_json::from_str::<ScenarioFile<T>>(json)?.events)
}

pub fn read_scenario<T: Scalar>(path: &Path) -> Result<Vec<DynamicEvent<T>>> {
    parse_scenario(&fs::read_to_string(path)?)
}

pub fn write_scenario<T: Scalar>(path: &Path, events: &[DynamicEvent<T>]) -> Result<()> {
    let file = ScenarioFile {
        events: events.to_vec(),
    };
    fs::write(path, serde_json::to_string_pretty(&file)? + "\n")?;
    Ok(())
}

/// Solution as written by the tool, keyed by robot and task ids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SolutionFile<T> {
    pub makespan: T,
    /// Robots assigned to each task.
    pub coalitions: BTreeMap<String, Vec<String>>,
    pub start_times: BTreeMap<String, T>,
    /// Chosen order of each mutually exclusive pair, `[before, after]`.
    pub orderings: Vec<(String, String)>,
    pub motion_plans: Vec<PlanRecord<T>>,
}

impl<T: Scalar> SolutionFile<T> {
    pub fn new(domain: &ProblemDomain<T>, solution: &Solution<T>) -> Self {
        let task = |m: usize| domain.network.tasks[m].id.clone();
        Self {
            makespan: solution.makespan(),
            coalitions: (0..domain.num_tasks())
                .map(|m| {
                    let robots = solution
                        .allocation
                        .robots_of(m)
                        .map(|n| domain.team.robot_ids[n].clone());
                    (task(m), robots.collect())
                })
                .collect(),
            start_times: (0..domain.num_tasks())
                .map(|m| (task(m), solution.schedule.start_times[m]))
                .collect(),
            orderings: solution
                .schedule
                .orderings
                .iter()
                .map(|&(a, b)| (task(a), task(b)))
                .collect(),
            motion_plans: solution.motion_plans.clone(),
        }
    }
}

pub fn write_solution<T: Scalar>(
    path: &Path,
    domain: &ProblemDomain<T>,
    solution: &Solution<T>,
) -> Result<()> {
    fs::write(
        path,
        serde_json::to_string_pretty(&SolutionFile::new(domain, solution))? + "\n",
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{validate_problem, IssueCode};

    const SAMPLE: &str = r#"{
        "robots": [
            {"id": "a", "traits": {"lift": 2}, "start": [1, 1], "speed": 1.5},
            {"id": "b", "traits": {"lift": 1, "water": 3}, "start": [2, 1], "speed": 1}
        ],
        "traits": ["lift", "water"],
        "tasks": [
            {"id": "carry", "duration": 4, "requires": {"lift": 3}, "initial": [5, 5], "terminal": [6, 5]},
            {"id": "douse", "duration": 2, "requires": {"water": 1}, "initial": [8, 8], "terminal": [8, 8]}
        ],
        "precedence": [["carry", "douse"]],
        "mutex": [],
        "world": {"bounds": [0, 0, 10, 10], "obstacles": [{"type": "circle", "c": [3, 7], "r": 1}]}
    }"#;

    #[test]
    fn parses_sample() {
        let d: ProblemDomain<f64> = parse_problem(SAMPLE).unwrap();
        assert!(validate_problem(&d).is_empty());
        assert_eq!(
            d.team.entries.to_rows(),
            vec![vec![2.0, 0.0], vec![1.0, 3.0]]
        );
        assert_eq!(
            d.requirements.entries.to_rows(),
            vec![vec![3.0, 0.0], vec![0.0, 1.0]]
        );
        assert_eq!(d.network.precedence, vec![(0, 1)]);
        assert!(d.network.tasks[0].is_spatial());
        assert_eq!(d.world.robot_speeds, vec![1.5, 1.0]);
    }

    #[test]
    fn round_trips() {
        let d: ProblemDomain<f64> = parse_problem(SAMPLE).unwrap();
        let again: ProblemDomain<f64> = parse_problem(&problem_to_json(&d).unwrap()).unwrap();
        assert_eq!(again, d);
    }

    #[test]
    fn rejects_unknown_keys_and_names() {
        let extra = SAMPLE.replacen(
            "\"traits\": [\"lift\", \"water\"],",
            "\"traits\": [\"lift\", \"water\"], \"colour\": 1,",
            1,
        );
        assert!(parse_problem::<f64>(&extra).is_err());
        let bad_trait = SAMPLE.replace("{\"water\": 1}", "{\"fire\": 1}");
        assert!(matches!(
            parse_problem::<f64>(&bad_trait),
            Err(Error::UnknownTrait(_))
        ));
        let bad_task = SAMPLE.replace("[\"carry\", \"douse\"]", "[\"carry\", \"nap\"]");
        assert!(matches!(
            parse_problem::<f64>(&bad_task),
            Err(Error::UnknownTask(_))
        ));
        let bad_shape = SAMPLE.replace("\"circle\"", "\"hexagon\"");
        assert!(parse_problem::<f64>(&bad_shape).is_err());
    }

    #[test]
    fn cycle_parses_but_fails_validation() {
        let cyclic = SAMPLE.replace(
            "[[\"carry\", \"douse\"]]",
            "[[\"carry\", \"douse\"], [\"douse\", \"carry\"]]",
        );
        let d: ProblemDomain<f64> = parse_problem(&cyclic).unwrap();
        assert!(validate_problem(&d).contains(IssueCode::CyclicPrecedence));
    }

    #[test]
    fn scenario_round_trip() {
        let json = r#"{"events": [
            {"time": 1, "kind": "agent_lost", "payload": {"agent": "a"}},
            {"time": 2, "kind": "requirements_reduced", "payload": {"task": "carry", "requires": {"lift": 1}}}
        ]}"#;
        let events: Vec<DynamicEvent<f64>> = parse_scenario(json).unwrap();
        assert_eq!(events.len(), 2);
        let text = serde_json::to_string(&ScenarioFile {
            events: events.clone(),
        })
        .unwrap();
        assert_eq!(parse_scenario::<f64>(&text).unwrap(), events);
        assert!(parse_scenario::<f64>(r#"{"events": [], "extra": 0}"#).is_err());
    }
}
