use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domain::{ProblemDomain, RobotSpec};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A change to the problem, occurring at `time` seconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DynamicEvent<T> {
    pub time: T,
    #[serde(flatten)]
    pub kind: EventKind<T>,
}

/// Trait and requirement payloads list only the entries that change; the
/// rest of the row keeps its current value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "kind",
    content = "payload",
    rename_all = "snake_case",
    bound = "T: Scalar"
)]
pub enum EventKind<T> {
    AgentLost {
        agent: String,
    },
    TaskLost {
        task: String,
    },
    TraitsReduced {
        agent: String,
        traits: BTreeMap<String, T>,
    },
    RequirementsIncreased {
        task: String,
        requires: BTreeMap<String, T>,
    },
    TraitsIncreased {
        agent: String,
        traits: BTreeMap<String, T>,
    },
    RequirementsReduced {
        task: String,
        requires: BTreeMap<String, T>,
    },
    DurationChanged {
        task: String,
        duration: T,
    },
    NewAgent(RobotSpec<T>),
}

impl<T> EventKind<T> {
    /// The snake_case tag used in scenario files.
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::AgentLost { .. } => "agent_lost",
            EventKind::TaskLost { .. } => "task_lost",
            EventKind::TraitsReduced { .. } => "traits_reduced",
            EventKind::RequirementsIncreased { .. } => "requirements_increased",
            EventKind::TraitsIncreased { .. } => "traits_increased",
            EventKind::RequirementsReduced { .. } => "requirements_reduced",
            EventKind::DurationChanged { .. } => "duration_changed",
            EventKind::NewAgent(_) => "new_agent",
        }
    }

    pub const NAMES: [&'static str; 8] = [
        "agent_lost",
        "task_lost",
        "traits_reduced",
        "requirements_increased",
        "traits_increased",
        "requirements_reduced",
        "duration_changed",
        "new_agent",
    ];
}

impl<T: Scalar> DynamicEvent<T> {
    pub fn new(time: T, kind: EventKind<T>) -> Self {
        Self { time, kind }
    }
}

/// Direction a payload entry moves its value in.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Direction {
    Down,
    Up,
}

fn split_by_direction<T: Scalar>(
    current: &[T],
    payload: &BTreeMap<String, T>,
    index: impl Fn(&str) -> Result<usize>,
) -> Result<[BTreeMap<String, T>; 2]> {
    let mut down = BTreeMap::new();
    let mut up = BTreeMap::new();
    for (name, &v) in payload {
        let old = current[index(name)?];
        if v < old {
            down.insert(name.clone(), v);
        } else if v > old {
            up.insert(name.clone(), v);
        }
    }
    Ok([down, up])
}

/// Splits a trait or requirement event whose entries move in both
/// directions into a sign-pure decreasing part followed by an increasing
/// part. Other events, and payloads that change nothing, come back as is.
pub fn decompose<T: Scalar>(
    domain: &ProblemDomain<T>,
    event: &DynamicEvent<T>,
) -> Result<Vec<DynamicEvent<T>>> {
    let part = |kind| DynamicEvent::new(event.time, kind);
    let parts = match &event.kind {
        EventKind::TraitsReduced { agent, traits }
        | EventKind::TraitsIncreased { agent, traits } => {
            let n = domain.robot_index(agent)?;
            let [down, up] = split_by_direction(domain.team.entries.row(n), traits, |t| {
                domain.trait_index(t)
            })?;
            let mut parts = Vec::new();
            if !down.is_empty() {
                parts.push(part(EventKind::TraitsReduced {
                    agent: agent.clone(),
                    traits: down,
                }));
            }
            if !up.is_empty() {
                parts.push(part(EventKind::TraitsIncreased {
                    agent: agent.clone(),
                    traits: up,
                }));
            }
            parts
        }
        EventKind::RequirementsIncreased { task, requires }
        | EventKind::RequirementsReduced { task, requires } => {
            let m = domain.task_index(task)?;
            let [down, up] =
                split_by_direction(domain.requirements.entries.row(m), requires, |t| {
                    domain.trait_index(t)
                })?;
            let mut parts = Vec::new();
            // a requirement rising is the tightening half
            if !up.is_empty() {
                parts.push(part(EventKind::RequirementsIncreased {
                    task: task.clone(),
                    requires: up,
                }));
            }
            if !down.is_empty() {
                parts.push(part(EventKind::RequirementsReduced {
                    task: task.clone(),
                    requires: down,
                }));
            }
            parts
        }
        _ => Vec::new(),
    };
    Ok(if parts.is_empty() {
        vec![event.clone()]
    } else {
        parts
    })
}

fn check_direction<T: Scalar>(
    kind: &str,
    current: &[T],
    payload: &BTreeMap<String, T>,
    index: impl Fn(&str) -> Result<usize>,
    want: Direction,
) -> Result<()> {
    for (name, &v) in payload {
        let old = current[index(name)?];
        if !(v >= T::zero()) {
            return Err(Error::InvalidEvent(format!(
                "{kind}: `{name}` set to negative value {v}"
            )));
        }
        let wrong = match want {
            Direction::Down => v > old,
            Direction::Up => v < old,
        };
        if wrong {
            return Err(Error::InvalidEvent(format!(
                "{kind}: `{name}` moves from {old} to {v}, against the event's direction"
            )));
        }
    }
    Ok(())
}

fn overwrite<T: Scalar>(
    row: &mut [T],
    payload: &BTreeMap<String, T>,
    index: impl Fn(&str) -> Result<usize>,
) -> Result<()> {
    for (name, &v) in payload {
        row[index(name)?] = v;
    }
    Ok(())
}

/// Returns domain `k + 1`: `domain` with exactly the event's mutation applied.
///
/// Trait and requirement payloads must move every listed entry in the
/// direction the kind names; use [`apply_decomposed`] for mixed payloads.
pub fn apply_event<T: Scalar>(
    domain: &ProblemDomain<T>,
    event: &DynamicEvent<T>,
) -> Result<ProblemDomain<T>> {
    let mut next = domain.clone();
    next.iteration += 1;
    let kind = event.kind.name();
    let trait_index = |t: &str| domain.trait_index(t);
    match &event.kind {
        EventKind::AgentLost { agent } => {
            let n = domain.robot_index(agent)?;
            next.team.entries.remove_row(n);
            next.team.robot_ids.remove(n);
            next.world.robot_starts.remove(n);
            next.world.robot_speeds.remove(n);
        }
        EventKind::TaskLost { task } => {
            let m = domain.task_index(task)?;
            next.network.remove_task(m);
            next.requirements.entries.remove_row(m);
        }
        EventKind::TraitsReduced { agent, traits }
        | EventKind::TraitsIncreased { agent, traits } => {
            let n = domain.robot_index(agent)?;
            let dir = if matches!(event.kind, EventKind::TraitsReduced { .. }) {
                Direction::Down
            } else {
                Direction::Up
            };
            check_direction(kind, domain.team.entries.row(n), traits, trait_index, dir)?;
            overwrite(next.team.entries.row_mut(n), traits, trait_index)?;
        }
        EventKind::RequirementsIncreased { task, requires }
        | EventKind::RequirementsReduced { task, requires } => {
            let m = domain.task_index(task)?;
            let dir = if matches!(event.kind, EventKind::RequirementsReduced { .. }) {
                Direction::Down
            } else {
                Direction::Up
            };
            check_direction(
                kind,
                domain.requirements.entries.row(m),
                requires,
                trait_index,
                dir,
            )?;
            overwrite(next.requirements.entries.row_mut(m), requires, trait_index)?;
        }
        EventKind::DurationChanged { task, duration } => {
            let m = domain.task_index(task)?;
            if !(*duration >= T::zero()) {
                return Err(Error::InvalidEvent(format!(
                    "{kind}: negative duration {duration}"
                )));
            }
            next.network.tasks[m].duration = *duration;
        }
        EventKind::NewAgent(spec) => {
            if domain.robot_index(&spec.id).is_ok() {
                return Err(Error::InvalidEvent(format!(
                    "{kind}: robot `{}` already exists",
                    spec.id
                )));
            }
            if !(spec.speed > T::zero()) {
                return Err(Error::InvalidEvent(format!(
                    "{kind}: speed must be positive"
                )));
            }
            if !domain.world.is_free(&spec.start) {
                return Err(Error::InvalidEvent(format!(
                    "{kind}: start ({}, {}) is not free space",
                    spec.start.x, spec.start.y
                )));
            }
            let row = domain.trait_row(&spec.traits)?;
            if row.iter().any(|&v| !(v >= T::zero())) {
                return Err(Error::InvalidEvent(format!("{kind}: negative trait value")));
            }
            next.team.entries.push_row(&row)?;
            next.team.robot_ids.push(spec.id.clone());
            next.world.robot_starts.push(spec.start);
            next.world.robot_speeds.push(spec.speed);
        }
    }
    Ok(next)
}

/// Applies an event of any sign pattern as one step `k → k + 1`.
pub fn apply_decomposed<T: Scalar>(
    domain: &ProblemDomain<T>,
    event: &DynamicEvent<T>,
) -> Result<ProblemDomain<T>> {
    let mut next = domain.clone();
    for part in decompose(domain, event)? {
        next = apply_event(&next, &part)?;
    }
    next.iteration = domain.iteration + 1;
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::testing::domain;

    fn d() -> ProblemDomain<f64> {
        domain(
            vec![vec![1.0, 2.0], vec![0.0, 1.0], vec![3.0, 0.0]],
            vec![vec![1.0, 1.0], vec![2.0, 0.0]],
            vec![5.0, 3.0],
        )
    }

    fn ev(kind: EventKind<f64>) -> DynamicEvent<f64> {
        DynamicEvent::new(1.0, kind)
    }

    fn map(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|&(k, v)| (k.to_owned(), v)).collect()
    }

    #[test]
    fn agent_lost_drops_row() {
        let before = d();
        let next = apply_event(&before, &ev(EventKind::AgentLost { agent: "r2".into() })).unwrap();
        assert_eq!(next.iteration, 1);
        assert_eq!(
            next.team.entries.to_rows(),
            vec![vec![1.0, 2.0], vec![0.0, 1.0]]
        );
        assert_eq!(next.team.robot_ids, vec!["r0", "r1"]);
        assert_eq!(next.world.robot_starts.len(), 2);
        assert_eq!(before, d());
    }

    #[test]
    fn task_lost_drops_task_and_requirements() {
        let next = apply_event(&d(), &ev(EventKind::TaskLost { task: "t0".into() })).unwrap();
        assert_eq!(next.num_tasks(), 1);
        assert_eq!(next.network.tasks[0].id, "t1");
        assert_eq!(next.requirements.entries.to_rows(), vec![vec![2.0, 0.0]]);
    }

    #[test]
    fn duration_changed_touches_only_duration() {
        let before = d();
        let next = apply_event(
            &before,
            &ev(EventKind::DurationChanged {
                task: "t0".into(),
                duration: 9.0,
            }),
        )
        .unwrap();
        let mut expected = before.clone();
        expected.iteration = 1;
        expected.network.tasks[0].duration = 9.0;
        assert_eq!(next, expected);
    }

    #[test]
    fn new_agent_appends_row() {
        let spec = RobotSpec {
            id: "r9".into(),
            traits: map(&[("u0", 1.0)]),
            start: Point::new(9.0, 9.0),
            speed: 2.0,
        };
        let next = apply_event(&d(), &ev(EventKind::NewAgent(spec))).unwrap();
        assert_eq!(next.num_robots(), 4);
        assert_eq!(next.team.entries.row(3), &[1.0, 0.0]);
        assert_eq!(next.world.robot_speeds[3], 2.0);
    }

    #[test]
    fn partial_payload_keeps_other_entries() {
        let next = apply_event(
            &d(),
            &ev(EventKind::TraitsReduced {
                agent: "r0".into(),
                traits: map(&[("u1", 0.5)]),
            }),
        )
        .unwrap();
        assert_eq!(next.team.entries.row(0), &[1.0, 0.5]);
        let next = apply_event(
            &d(),
            &ev(EventKind::RequirementsIncreased {
                task: "t1".into(),
                requires: map(&[("u1", 4.0)]),
            }),
        )
        .unwrap();
        assert_eq!(next.requirements.entries.row(1), &[2.0, 4.0]);
    }

    #[test]
    fn rejects_bad_payloads() {
        let base = d();
        let bad = [
            EventKind::AgentLost {
                agent: "nobody".into(),
            },
            EventKind::TaskLost {
                task: "nothing".into(),
            },
            EventKind::TraitsReduced {
                agent: "r0".into(),
                traits: map(&[("u0", 4.0)]),
            },
            EventKind::TraitsIncreased {
                agent: "r0".into(),
                traits: map(&[("u0", 0.0)]),
            },
            EventKind::RequirementsReduced {
                task: "t0".into(),
                requires: map(&[("u0", 2.0)]),
            },
            EventKind::TraitsIncreased {
                agent: "r0".into(),
                traits: map(&[("zz", 9.0)]),
            },
            EventKind::DurationChanged {
                task: "t0".into(),
                duration: -1.0,
            },
        ];
        for kind in bad {
            assert!(
                apply_event(&base, &ev(kind.clone())).is_err(),
                "{kind:?} accepted"
            );
        }
        let clash = RobotSpec {
            id: "r0".into(),
            traits: BTreeMap::new(),
            start: Point::new(1.0, 1.0),
            speed: 1.0,
        };
        assert!(apply_event(&base, &ev(EventKind::NewAgent(clash))).is_err());
    }

    #[test]
    fn mixed_payload_splits_down_then_up() {
        let base = d();
        let mixed = ev(EventKind::TraitsIncreased {
            agent: "r0".into(),
            traits: map(&[("u0", 0.0), ("u1", 5.0)]),
        });
        let parts = decompose(&base, &mixed).unwrap();
        assert_eq!(parts.len(), 2);
        assert!(matches!(parts[0].kind, EventKind::TraitsReduced { .. }));
        assert!(matches!(parts[1].kind, EventKind::TraitsIncreased { .. }));
        assert!(apply_event(&base, &mixed).is_err());
        let next = apply_decomposed(&base, &mixed).unwrap();
        assert_eq!(next.iteration, 1);
        assert_eq!(next.team.entries.row(0), &[0.0, 5.0]);

        let same = ev(EventKind::TraitsReduced {
            agent: "r0".into(),
            traits: map(&[("u0", 1.0)]),
        });
        assert_eq!(decompose(&base, &same).unwrap(), vec![same]);
    }

    #[test]
    fn scenario_json_shape() {
        let json = r#"{"time": 2.5, "kind": "duration_changed", "payload": {"task": "t1", "duration": 4}}"#;
        let e: DynamicEvent<f64> = serde_json::from_str(json).unwrap();
        assert_eq!(
            e.kind,
            EventKind::DurationChanged {
                task: "t1".into(),
                duration: 4.0
            }
        );
        let back = serde_json::to_value(&e).unwrap();
        assert_eq!(back["kind"], "duration_changed");
        let json = r#"{"time": 0, "kind": "new_agent", "payload": {"id": "x", "traits": {"u0": 1}, "start": [1, 2], "speed": 1}}"#;
        let e: DynamicEvent<f64> = serde_json::from_str(json).unwrap();
        assert_eq!(e.kind.name(), "new_agent");
        let unknown = r#"{"time": 0, "kind": "agent_found", "payload": {"agent": "r0"}}"#;
        assert!(serde_json::from_str::<DynamicEvent<f64>>(unknown).is_err());
        for name in EventKind::<f64>::NAMES {
            let json = format!(r#"{{"time": 0, "kind": "{name}", "payload": {{}}}}"#);
            // every tag is recognised; the empty payload is what fails
            let err = serde_json::from_str::<DynamicEvent<f64>>(&json)
                .unwrap_err()
                .to_string();
            assert!(err.contains("missing field"), "{name}: {err}");
        }
    }
}
