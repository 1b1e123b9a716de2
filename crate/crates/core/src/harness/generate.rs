use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{
    validate_problem, DesiredTraitMatrix, ProblemDomain, RobotSpec, TaskNetwork, TaskSpec,
    TeamTraitMatrix, WorldModel,
};
use crate::error::{Error, Result};
use crate::geometry::{Aabb, Obstacle, Point};
use crate::repair::{apply_decomposed, DynamicEvent, EventKind};

/// Size and clutter of generated worlds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldParams {
    pub width: f64,
    pub height: f64,
    pub obstacles: usize,
    /// Fraction of tasks whose terminal site differs from the initial one.
    pub spatial_fraction: f64,
}

impl Default for WorldParams {
    fn default() -> Self {
        Self {
            width: 20.0,
            height: 20.0,
            obstacles: 4,
            spatial_fraction: 0.25,
        }
    }
}

const PRECEDENCE_PROBABILITY: f64 = 0.15;
const MUTEX_PROBABILITY: f64 = 0.1;
const RETRY_CAP: usize = 1000;

fn round(v: f64, step: f64) -> f64 {
    (v / step).round() * step
}

fn free_point(rng: &mut ChaCha8Rng, world: &WorldModel<f64>) -> Result<Point<f64>> {
    let b = world.bounds;
    for _ in 0..RETRY_CAP {
        let p = Point::new(
            round(rng.gen_range(b.min.x..=b.max.x), 0.01),
            round(rng.gen_range(b.min.y..=b.max.y), 0.01),
        );
        // keep a margin so sites are not pressed against an obstacle
        let clear = world.obstacles.iter().all(|o| match o {
            Obstacle::Circle { center, radius } => center.distance(&p) > radius + 0.3,
            Obstacle::Rect { .. } => !o.contains(&p),
        });
        if world.is_free(&p) && clear {
            return Ok(p);
        }
    }
    Err(Error::Generation("no free point found".into()))
}

/// Circles kept apart from each other and from the border, so free space
/// stays connected.
fn obstacles(rng: &mut ChaCha8Rng, params: &WorldParams) -> Vec<Obstacle<f64>> {
    let scale = params.width.min(params.height);
    let mut out: Vec<Obstacle<f64>> = Vec::new();
    for _ in 0..params.obstacles * 50 {
        if out.len() == params.obstacles {
            break;
        }
        let r = round(rng.gen_range(0.04..=0.1) * scale, 0.01);
        let margin = r + 0.05 * scale;
        if 2.0 * margin >= params.width || 2.0 * margin >= params.height {
            continue;
        }
        let c = Point::new(
            round(rng.gen_range(margin..=params.width - margin), 0.01),
            round(rng.gen_range(margin..=params.height - margin), 0.01),
        );
        let apart = out.iter().all(|o| match o {
            Obstacle::Circle { center, radius } => center.distance(&c) > r + radius + 0.05 * scale,
            Obstacle::Rect { .. } => true,
        });
        if apart {
            out.push(Obstacle::Circle {
                center: c,
                radius: r,
            });
        }
    }
    out
}

/// Seeded random problem. Every requirement row is a scaled-down sum of the
/// traits of some random robot subset, so assigning each task its subset
/// is always a valid allocation.
pub fn generate_problem(
    seed: u64,
    n_robots: usize,
    n_tasks: usize,
    n_traits: usize,
    params: &WorldParams,
) -> Result<ProblemDomain<f64>> {
    if n_robots == 0 || n_tasks == 0 || n_traits == 0 {
        return Err(Error::Generation(
            "robot, task and trait counts must be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trait_names: Vec<String> = (0..n_traits).map(|u| format!("q{u}")).collect();
    let mut world = WorldModel {
        bounds: Aabb::new(
            Point::new(0.0, 0.0),
            Point::new(params.width, params.height),
        ),
        obstacles: obstacles(&mut rng, params),
        robot_starts: Vec::new(),
        robot_speeds: Vec::new(),
    };

    let mut team_rows = Vec::with_capacity(n_robots);
    for _ in 0..n_robots {
        let mut row: Vec<f64> = (0..n_traits)
            .map(|_| f64::from(rng.gen_range(0u8..=3)))
            .collect();
        if row.iter().all(|&v| v == 0.0) {
            row[rng.gen_range(0..n_traits)] = 1.0;
        }
        team_rows.push(row);
        world.robot_starts.push(free_point(&mut rng, &world)?);
        world
            .robot_speeds
            .push(round(rng.gen_range(0.5..=1.5), 0.1));
    }

    let mut tasks = Vec::with_capacity(n_tasks);
    let mut req_rows = Vec::with_capacity(n_tasks);
    for m in 0..n_tasks {
        let initial = free_point(&mut rng, &world)?;
        let terminal = if rng.gen_bool(params.spatial_fraction) {
            free_point(&mut rng, &world)?
        } else {
            initial
        };
        tasks.push(TaskSpec {
            id: format!("t{m}"),
            duration: round(rng.gen_range(1.0..=10.0), 0.1),
            initial,
            terminal,
        });
        req_rows.push(requirement_row(&mut rng, &team_rows)?);
    }

    let mut order: Vec<usize> = (0..n_tasks).collect();
    order.shuffle(&mut rng);
    let mut precedence = Vec::new();
    let mut mutex = Vec::new();
    for i in 0..n_tasks {
        for j in i + 1..n_tasks {
            if rng.gen_bool(PRECEDENCE_PROBABILITY) {
                precedence.push((order[i], order[j]));
            } else if rng.gen_bool(MUTEX_PROBABILITY) {
                mutex.push((order[i], order[j]));
            }
        }
    }

    let domain = ProblemDomain {
        iteration: 0,
        network: TaskNetwork::new(tasks, precedence, mutex),
        team: TeamTraitMatrix::new(
            (0..n_robots).map(|n| format!("r{n}")).collect(),
            trait_names,
            team_rows,
        )?,
        requirements: DesiredTraitMatrix::new(req_rows, n_traits)?,
        world,
    };
    let report = validate_problem(&domain);
    if !report.is_empty() {
        return Err(Error::Generation(report.to_string()));
    }
    Ok(domain)
}

fn requirement_row(rng: &mut ChaCha8Rng, team: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = team.len();
    let u = team[0].len();
    for _ in 0..RETRY_CAP {
        let size = rng.gen_range(1..=n.min(3));
        let subset: Vec<usize> = rand::seq::index::sample(rng, n, size).into_vec();
        let scale = rng.gen_range(0.5..=1.0);
        let row: Vec<f64> = (0..u)
            .map(|k| {
                let sum: f64 = subset.iter().map(|&r| team[r][k]).sum();
                // rounding down keeps the subset sufficient
                if rng.gen_bool(0.6) {
                    (sum * scale * 2.0).floor() / 2.0
                } else {
                    0.0
                }
            })
            .collect();
        if row.iter().any(|&v| v > 0.0) {
            return Ok(row);
        }
    }
    Err(Error::Generation(
        "could not draw a non-empty requirement row".into(),
    ))
}

/// Whether the whole team together meets every requirement.
pub fn is_satisfiable(domain: &ProblemDomain<f64>) -> bool {
    let u = domain.num_traits();
    let totals: Vec<f64> = (0..u)
        .map(|k| {
            (0..domain.num_robots())
                .map(|n| domain.team.entries.row(n)[k])
                .sum()
        })
        .collect();
    (0..domain.num_tasks()).all(|m| {
        domain
            .requirements
            .entries
            .row(m)
            .iter()
            .zip(&totals)
            .all(|(&need, &have)| have + 1e-9 >= need)
    })
}

/// What kind of events a generated scenario contains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// A single event of the named kind (one of the eight tags).
    Single(&'static str),
    /// Several events of random kinds.
    Sequence(usize),
    /// One trait update lowering some entries of a robot and raising others.
    MixedTraits,
}

impl ScenarioKind {
    pub fn label(&self) -> String {
        match self {
            ScenarioKind::Single(kind) => (*kind).to_owned(),
            ScenarioKind::Sequence(_) => "mixed_sequence".to_owned(),
            ScenarioKind::MixedTraits => "mixed_traits".to_owned(),
        }
    }

    /// The ten groups used for repair-versus-recompute comparisons.
    pub fn groups() -> Vec<ScenarioKind> {
        let mut groups: Vec<ScenarioKind> = EventKind::<f64>::NAMES
            .iter()
            .map(|k| ScenarioKind::Single(k))
            .collect();
        groups.push(ScenarioKind::Sequence(3));
        groups.push(ScenarioKind::MixedTraits);
        groups
    }

    pub fn parse(label: &str) -> Option<ScenarioKind> {
        if let Some(k) = EventKind::<f64>::NAMES.iter().find(|&&k| k == label) {
            return Some(ScenarioKind::Single(k));
        }
        match label {
            "mixed_sequence" => Some(ScenarioKind::Sequence(3)),
            "mixed_traits" => Some(ScenarioKind::MixedTraits),
            _ => None,
        }
    }
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, items: &'a [T]) -> Option<&'a T> {
    items.choose(rng)
}

/// One event of `kind` valid for `domain` that keeps the problem
/// satisfiable by the whole team, or `None` if no such event exists.
fn event_of_kind(
    rng: &mut ChaCha8Rng,
    domain: &ProblemDomain<f64>,
    kind: &str,
    time: f64,
) -> Result<Option<DynamicEvent<f64>>> {
    let (n, m, u) = (domain.num_robots(), domain.num_tasks(), domain.num_traits());
    let names = &domain.team.trait_names;
    let robot = |i: usize| domain.team.robot_ids[i].clone();
    let task = |i: usize| domain.network.tasks[i].id.clone();
    let cells = |rows: usize, ok: &dyn Fn(usize, usize) -> bool| -> Vec<(usize, usize)> {
        (0..rows)
            .flat_map(|r| (0..u).map(move |k| (r, k)))
            .filter(|&(r, k)| ok(r, k))
            .collect()
    };
    let mut candidates: Vec<EventKind<f64>> = Vec::new();
    match kind {
        "agent_lost" if n > 1 => {
            candidates.extend((0..n).map(|i| EventKind::AgentLost { agent: robot(i) }))
        }
        "task_lost" if m > 1 => {
            candidates.extend((0..m).map(|i| EventKind::TaskLost { task: task(i) }))
        }
        "traits_reduced" => {
            for (r, k) in cells(n, &|r, k| domain.team.entries.row(r)[k] > 0.0) {
                let v = (domain.team.entries.row(r)[k] * rng.gen_range(0.0..0.5)).floor();
                candidates.push(EventKind::TraitsReduced {
                    agent: robot(r),
                    traits: BTreeMap::from([(names[k].clone(), v)]),
                });
            }
        }
        "traits_increased" => {
            for (r, k) in cells(n, &|_, _| true) {
                let v = domain.team.entries.row(r)[k] + f64::from(rng.gen_range(1u8..=2));
                candidates.push(EventKind::TraitsIncreased {
                    agent: robot(r),
                    traits: BTreeMap::from([(names[k].clone(), v)]),
                });
            }
        }
        "requirements_increased" => {
            for (t, k) in cells(m, &|_, _| true) {
                let v = domain.requirements.entries.row(t)[k] + f64::from(rng.gen_range(1u8..=2));
                candidates.push(EventKind::RequirementsIncreased {
                    task: task(t),
                    requires: BTreeMap::from([(names[k].clone(), v)]),
                });
            }
        }
        "requirements_reduced" => {
            for (t, k) in cells(m, &|t, k| domain.requirements.entries.row(t)[k] > 0.0) {
                let v = (domain.requirements.entries.row(t)[k] * rng.gen_range(0.0..0.5) * 2.0)
                    .floor()
                    / 2.0;
                candidates.push(EventKind::RequirementsReduced {
                    task: task(t),
                    requires: BTreeMap::from([(names[k].clone(), v)]),
                });
            }
        }
        "duration_changed" => {
            for t in 0..m {
                let d = round(rng.gen_range(1.0..=10.0), 0.1);
                candidates.push(EventKind::DurationChanged {
                    task: task(t),
                    duration: d,
                });
            }
        }
        "new_agent" => {
            let mut traits: Vec<f64> = (0..u).map(|_| f64::from(rng.gen_range(0u8..=3))).collect();
            if traits.iter().all(|&v| v == 0.0) {
                traits[rng.gen_range(0..u)] = 1.0;
            }
            let mut id = format!("r{n}");
            let mut k = n;
            while domain.robot_index(&id).is_ok() {
                k += 1;
                id = format!("r{k}");
            }
            candidates.push(EventKind::NewAgent(RobotSpec {
                id,
                traits: names
                    .iter()
                    .cloned()
                    .zip(traits)
                    .filter(|(_, v)| *v > 0.0)
                    .collect(),
                start: free_point(rng, &domain.world)?,
                speed: round(rng.gen_range(0.5..=1.5), 0.1),
            }));
        }
        "agent_lost" | "task_lost" => {}
        other => return Err(Error::Generation(format!("unknown event kind `{other}`"))),
    }
    candidates.shuffle(rng);
    for kind in candidates {
        let event = DynamicEvent::new(time, kind);
        let next = apply_decomposed(domain, &event)?;
        if is_satisfiable(&next) {
            return Ok(Some(event));
        }
    }
    Ok(None)
}

/// A robot's trait row with at least one entry lowered and one raised.
fn mixed_traits_event(
    rng: &mut ChaCha8Rng,
    domain: &ProblemDomain<f64>,
    time: f64,
) -> Result<Option<DynamicEvent<f64>>> {
    let u = domain.num_traits();
    if u < 2 {
        return event_of_kind(rng, domain, "traits_reduced", time);
    }
    let mut robots: Vec<usize> = (0..domain.num_robots()).collect();
    robots.shuffle(rng);
    for r in robots {
        let row = domain.team.entries.row(r);
        let down: Vec<usize> = (0..u).filter(|&k| row[k] > 0.0).collect();
        let Some(&k_down) = pick(rng, &down) else {
            continue;
        };
        let up: Vec<usize> = (0..u).filter(|&k| k != k_down).collect();
        let &k_up = pick(rng, &up).expect("at least two traits");
        let names = &domain.team.trait_names;
        let traits = BTreeMap::from([
            (
                names[k_down].clone(),
                (row[k_down] * rng.gen_range(0.0..0.5)).floor(),
            ),
            (
                names[k_up].clone(),
                row[k_up] + f64::from(rng.gen_range(1u8..=2)),
            ),
        ]);
        let event = DynamicEvent::new(
            time,
            EventKind::TraitsIncreased {
                agent: domain.team.robot_ids[r].clone(),
                traits,
            },
        );
        if is_satisfiable(&apply_decomposed(domain, &event)?) {
            return Ok(Some(event));
        }
    }
    Ok(None)
}

/// Seeded event list for `domain`. Each event is valid for the domain left
/// by the ones before it and keeps the problem satisfiable.
pub fn generate_scenario(
    seed: u64,
    domain: &ProblemDomain<f64>,
    kind: ScenarioKind,
) -> Result<Vec<DynamicEvent<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = domain.clone();
    let mut events = Vec::new();
    let count = match kind {
        ScenarioKind::Sequence(k) => k,
        _ => 1,
    };
    for i in 0..count {
        let time = (i + 1) as f64 * 10.0;
        let event = match kind {
            ScenarioKind::Single(k) => event_of_kind(&mut rng, &current, k, time)?,
            ScenarioKind::MixedTraits => mixed_traits_event(&mut rng, &current, time)?,
            ScenarioKind::Sequence(_) => {
                let mut kinds = EventKind::<f64>::NAMES.to_vec();
                kinds.shuffle(&mut rng);
                let mut found = None;
                for k in kinds {
                    if let Some(e) = event_of_kind(&mut rng, &current, k, time)? {
                        found = Some(e);
                        break;
                    }
                }
                found
            }
        };
        let event = event
            .ok_or_else(|| Error::Generation(format!("no admissible {} event", kind.label())))?;
        current = apply_decomposed(&current, &event)?;
        events.push(event);
    }
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::brute_force_min_assignments;
    use crate::harness::io::problem_to_json;
    use crate::planner::EuclideanTravel;

    #[test]
    fn same_seed_same_file() {
        let p = WorldParams::default();
        let a = problem_to_json(&generate_problem(7, 4, 6, 3, &p).unwrap()).unwrap();
        let b = problem_to_json(&generate_problem(7, 4, 6, 3, &p).unwrap()).unwrap();
        assert_eq!(a, b);
        let c = problem_to_json(&generate_problem(8, 4, 6, 3, &p).unwrap()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn smallest_problem_is_solvable() {
        let d = generate_problem(1, 1, 1, 1, &WorldParams::default()).unwrap();
        assert_eq!(
            brute_force_min_assignments(&d, &EuclideanTravel).unwrap(),
            Some(1)
        );
    }

    #[test]
    fn rejects_empty_counts() {
        assert!(generate_problem(0, 0, 1, 1, &WorldParams::default()).is_err());
    }

    #[test]
    fn small_problems_are_valid_and_satisfiable() {
        for seed in 0..40 {
            let n = 1 + (seed as usize % 3);
            let m = 1 + (seed as usize % 4);
            let d = generate_problem(seed, n, m, 2, &WorldParams::default()).unwrap();
            assert!(validate_problem(&d).is_empty());
            assert!(is_satisfiable(&d));
            assert!(
                brute_force_min_assignments(&d, &EuclideanTravel)
                    .unwrap()
                    .is_some(),
                "seed {seed}"
            );
        }
    }

    #[test]
    fn scenarios_are_valid_for_their_domain() {
        let d = generate_problem(3, 5, 6, 3, &WorldParams::default()).unwrap();
        for (i, kind) in ScenarioKind::groups().into_iter().enumerate() {
            let events = generate_scenario(i as u64, &d, kind).unwrap();
            let mut current = d.clone();
            for e in &events {
                current = apply_decomposed(&current, e).unwrap();
                assert!(is_satisfiable(&current));
            }
            if let ScenarioKind::Single(k) = kind {
                assert_eq!(events[0].kind.name(), k);
            }
            assert_eq!(ScenarioKind::parse(&kind.label()), Some(kind));
        }
    }

    #[test]
    fn mixed_traits_move_both_ways() {
        let d = generate_problem(5, 4, 4, 3, &WorldParams::default()).unwrap();
        let events = generate_scenario(2, &d, ScenarioKind::MixedTraits).unwrap();
        let parts = crate::repair::decompose(&d, &events[0]).unwrap();
        assert_eq!(parts.len(), 2);
    }
}
