//! Coalition formation, scheduling and motion planning for heterogeneous
//! robot teams, solved together by heuristic search over allocations, with
//! targeted repair of a retained search when the problem changes.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! at the crate root fix the common `f64` instantiations.

pub mod analysis;
pub mod domain;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod matrix;
pub mod planner;
pub mod repair;
pub mod scalar;
pub mod scheduler;
pub mod search;
#[cfg(test)]
mod testing;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type ProblemDomainF64 = domain::ProblemDomain<f64>;
pub type SolutionF64 = domain::Solution<f64>;
pub type ScheduleF64 = scheduler::Schedule<f64>;
pub type ScheduleF32 = scheduler::Schedule<f32>;
pub type SchedulingProblemF64 = scheduler::SchedulingProblem<f64>;
pub type SchedulingProblemF32 = scheduler::SchedulingProblem<f32>;
pub type RoadmapF64 = planner::Roadmap<f64>;
pub type PlannerF64 = planner::Planner<f64>;
pub type AllocatorF64 = search::Allocator<f64>;
