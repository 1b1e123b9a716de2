use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use super::ProblemDomain;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IssueCode {
    CyclicPrecedence,
    SelfLoop,
    EdgeOutOfRange,
    DimensionMismatch,
    StartInObstacle,
    StartOutOfBounds,
    TaskSiteBlocked,
    NegativeDuration,
    NegativeTrait,
    NegativeRequirement,
    NonPositiveSpeed,
    EmptyTeam,
    DegenerateBounds,
    DuplicateId,
}

impl fmt::Display for IssueCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).map_err(|_| fmt::Error)?;
        write!(f, "{}", s.as_str().unwrap_or_default())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationIssue {
    pub code: IssueCode,
    pub message: String,
}

/// Every invariant violation found in a domain; empty means well-formed.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn contains(&self, code: IssueCode) -> bool {
        self.issues.iter().any(|i| i.code == code)
    }

    fn push(&mut self, code: IssueCode, message: impl Into<String>) {
        self.issues.push(ValidationIssue {
            code,
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for issue in &self.issues {
            writeln!(f, "{}: {}", issue.code, issue.message)?;
        }
        Ok(())
    }
}

pub fn validate_problem<T: Scalar>(domain: &ProblemDomain<T>) -> ValidationReport {
    let mut report = ValidationReport::default();
    let net = &domain.network;
    let m = net.len();
    let n = domain.team.num_robots();

    if n == 0 {
        report.push(IssueCode::EmptyTeam, "team has no robots");
    }
    if domain.team.num_traits() == 0 {
        report.push(IssueCode::DimensionMismatch, "no traits defined");
    }
    if domain.team.robot_ids.len() != n {
        report.push(
            IssueCode::DimensionMismatch,
            "robot id count differs from team rows",
        );
    }
    if domain.requirements.entries.rows() != m {
        report.push(
            IssueCode::DimensionMismatch,
            format!(
                "{} requirement rows for {} tasks",
                domain.requirements.entries.rows(),
                m
            ),
        );
    }
    if domain.requirements.entries.cols() != domain.team.num_traits() {
        report.push(
            IssueCode::DimensionMismatch,
            format!(
                "requirements have {} trait columns, team has {}",
                domain.requirements.entries.cols(),
                domain.team.num_traits()
            ),
        );
    }
    if domain.world.robot_starts.len() != n || domain.world.robot_speeds.len() != n {
        report.push(
            IssueCode::DimensionMismatch,
            "robot start/speed lists differ from team size",
        );
    }

    let mut seen = HashSet::new();
    for id in &domain.team.robot_ids {
        if !seen.insert(id.as_str()) {
            report.push(IssueCode::DuplicateId, format!("robot id `{id}` repeated"));
        }
    }
    let mut seen = HashSet::new();
    for t in &net.tasks {
        if !seen.insert(t.id.as_str()) {
            report.push(
                IssueCode::DuplicateId,
                format!("task id `{}` repeated", t.id),
            );
        }
    }

    if domain.team.entries.iter().any(|&v| v < T::zero()) {
        report.push(
            IssueCode::NegativeTrait,
            "team trait matrix has a negative entry",
        );
    }
    if domain.requirements.entries.iter().any(|&v| v < T::zero()) {
        report.push(
            IssueCode::NegativeRequirement,
            "desired trait matrix has a negative entry",
        );
    }
    for t in &net.tasks {
        if !(t.duration >= T::zero()) {
            report.push(
                IssueCode::NegativeDuration,
                format!("task `{}` has duration {}", t.id, t.duration),
            );
        }
    }

    let mut edges_ok = true;
    for &(a, b) in net.precedence.iter().chain(&net.mutex) {
        if a >= m || b >= m {
            edges_ok = false;
            report.push(
                IssueCode::EdgeOutOfRange,
                format!("edge ({a}, {b}) with {m} tasks"),
            );
        } else if a == b {
            edges_ok = false;
            report.push(
                IssueCode::SelfLoop,
                format!("task {a} constrained against itself"),
            );
        }
    }
    if edges_ok {
        let closure = net.precedence_closure();
        if (0..m).any(|i| closure[i][i]) {
            report.push(
                IssueCode::CyclicPrecedence,
                "precedence edges contain a cycle",
            );
        }
    }

    let world = &domain.world;
    if world.bounds.is_degenerate() {
        report.push(IssueCode::DegenerateBounds, "world bounds have no area");
    }
    for (i, start) in world.robot_starts.iter().enumerate() {
        let id = domain.team.robot_ids.get(i).map_or("?", String::as_str);
        if !world.bounds.contains(start) {
            report.push(
                IssueCode::StartOutOfBounds,
                format!("robot `{id}` starts outside bounds"),
            );
        } else if world.obstacles.iter().any(|o| o.contains(start)) {
            report.push(
                IssueCode::StartInObstacle,
                format!("robot `{id}` starts inside an obstacle"),
            );
        }
    }
    for (i, &speed) in world.robot_speeds.iter().enumerate() {
        if !(speed > T::zero()) {
            let id = domain.team.robot_ids.get(i).map_or("?", String::as_str);
            report.push(
                IssueCode::NonPositiveSpeed,
                format!("robot `{id}` has speed {speed}"),
            );
        }
    }
    for t in &net.tasks {
        if !world.is_free(&t.initial) || !world.is_free(&t.terminal) {
            report.push(
                IssueCode::TaskSiteBlocked,
                format!("task `{}` has a site outside free space", t.id),
            );
        }
    }
    report
}
