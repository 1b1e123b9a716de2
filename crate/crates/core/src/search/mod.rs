//! Greedy best-first search over allocations, one robot-task assignment per
//! edge, scored by unmet requirements and normalized makespan.

mod allocator;
mod heuristics;
mod state;

pub use allocator::{
    evaluate_allocation, Allocator, Evaluation, SearchConfig, SearchOutcome, SearchStats,
};
pub use heuristics::{apr, nsq, tetaq, NsqBounds};
pub use state::{AllocationNode, ExpansionRecord, NodeId, NodeStatus, SearchState};

use std::fmt;

/// Why a search stopped without a solution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exhausted {
    /// The open set ran empty: no valid, schedulable allocation exists.
    NoSolution,
    /// Expansion or wall-clock limit reached; the state is kept as is.
    Limits,
}

impl fmt::Display for Exhausted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exhausted::NoSolution => {
                f.write_str("open set empty, no valid allocation is schedulable")
            }
            Exhausted::Limits => f.write_str("search limits reached"),
        }
    }
}
