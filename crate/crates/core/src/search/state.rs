use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, HashMap};

use super::heuristics::{nsq, NsqBounds};
use crate::domain::Allocation;
use crate::planner::PlanRecord;
use crate::scalar::Scalar;
use crate::scheduler::Schedule;

pub type NodeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeStatus {
    Open,
    Closed,
    Pruned,
    /// Dropped by repair; the slot is kept so ids stay stable.
    Removed,
}

/// One allocation in the search graph with its cached evaluation.
#[derive(Clone, Debug)]
pub struct AllocationNode<T> {
    pub allocation: Allocation,
    pub parent: Option<NodeId>,
    /// Optimal schedule under the travel times last used; `None` when infeasible.
    pub schedule: Option<Schedule<T>>,
    pub apr: T,
    pub nsq: T,
    pub tetaq: T,
    pub status: NodeStatus,
    /// The schedule was solved with instantiated motion plans.
    pub refined: bool,
    pub plans: Vec<PlanRecord<T>>,
    heap_seq: u64,
}

impl<T: Scalar> AllocationNode<T> {
    pub fn makespan(&self) -> Option<T> {
        self.schedule.as_ref().map(|s| s.makespan)
    }

    pub fn assignments(&self) -> usize {
        self.allocation.count()
    }

    pub fn is_goal(&self) -> bool {
        self.apr == T::zero() && self.schedule.is_some()
    }
}

struct OpenEntry<T> {
    tetaq: T,
    assignments: usize,
    seq: u64,
    id: NodeId,
}

impl<T: Scalar> PartialEq for OpenEntry<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Scalar> Eq for OpenEntry<T> {}

impl<T: Scalar> PartialOrd for OpenEntry<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for OpenEntry<T> {
    // BinaryHeap is a max-heap: the "greatest" entry is the lowest tetaq,
    // then fewest assignments, then earliest insertion.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .tetaq
            .partial_cmp(&self.tetaq)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.assignments.cmp(&self.assignments))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl<T: Clone> Clone for OpenEntry<T> {
    fn clone(&self) -> Self {
        Self {
            tetaq: self.tetaq.clone(),
            assignments: self.assignments,
            seq: self.seq,
            id: self.id,
        }
    }
}

/// Parent and child heuristic values for one generated edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpansionRecord<T> {
    pub parent: NodeId,
    pub child: NodeId,
    pub parent_apr: T,
    pub child_apr: T,
    pub parent_nsq: T,
    pub child_nsq: T,
}

/// Open, closed and pruned node sets plus the allocation index.
#[derive(Clone)]
pub struct SearchState<T> {
    nodes: Vec<AllocationNode<T>>,
    heap: BinaryHeap<OpenEntry<T>>,
    open: BTreeSet<NodeId>,
    closed: BTreeSet<NodeId>,
    pruned: BTreeSet<NodeId>,
    index: HashMap<Allocation, NodeId>,
    alpha: T,
    bounds: NsqBounds<T>,
    seq: u64,
    pub(crate) expansions: Vec<ExpansionRecord<T>>,
}

impl<T: Scalar> SearchState<T> {
    pub(crate) fn new(alpha: T, bounds: NsqBounds<T>) -> Self {
        Self {
            nodes: Vec::new(),
            heap: BinaryHeap::new(),
            open: BTreeSet::new(),
            closed: BTreeSet::new(),
            pruned: BTreeSet::new(),
            index: HashMap::new(),
            alpha,
            bounds,
            seq: 0,
            expansions: Vec::new(),
        }
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn bounds(&self) -> &NsqBounds<T> {
        &self.bounds
    }

    pub fn node(&self, id: NodeId) -> &AllocationNode<T> {
        &self.nodes[id]
    }

    pub(crate) fn node_mut(&mut self, id: NodeId) -> &mut AllocationNode<T> {
        &mut self.nodes[id]
    }

    pub fn lookup(&self, alloc: &Allocation) -> Option<NodeId> {
        self.index.get(alloc).copied()
    }

    pub fn open_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.open.iter().copied()
    }

    pub fn closed_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.closed.iter().copied()
    }

    pub fn pruned_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.pruned.iter().copied()
    }

    pub fn open_len(&self) -> usize {
        self.open.len()
    }

    pub fn closed_len(&self) -> usize {
        self.closed.len()
    }

    pub fn pruned_len(&self) -> usize {
        self.pruned.len()
    }

    /// Nodes in any of the three sets.
    pub fn live_len(&self) -> usize {
        self.open.len() + self.closed.len() + self.pruned.len()
    }

    pub fn expansion_log(&self) -> &[ExpansionRecord<T>] {
        &self.expansions
    }

    /// Smallest APR among open nodes that still miss some requirement.
    pub fn min_open_apr(&self) -> Option<T> {
        self.open
            .iter()
            .map(|&id| self.nodes[id].apr)
            .filter(|&a| a > T::zero())
            .reduce(T::min)
    }

    /// Registers a new node in the index without placing it in a set.
    pub(crate) fn insert(&mut self, allocation: Allocation, parent: Option<NodeId>) -> NodeId {
        let id = self.nodes.len();
        self.index.insert(allocation.clone(), id);
        self.nodes.push(AllocationNode {
            allocation,
            parent,
            schedule: None,
            apr: T::one(),
            nsq: T::zero(),
            tetaq: T::one(),
            status: NodeStatus::Removed,
            refined: false,
            plans: Vec::new(),
            heap_seq: 0,
        });
        id
    }

    fn detach(&mut self, id: NodeId) {
        match self.nodes[id].status {
            NodeStatus::Open => {
                self.open.remove(&id);
            }
            NodeStatus::Closed => {
                self.closed.remove(&id);
            }
            NodeStatus::Pruned => {
                self.pruned.remove(&id);
            }
            NodeStatus::Removed => {}
        }
    }

    /// Recomputes nsq/tetaq from the stored makespan and (re)queues the node.
    pub(crate) fn open(&mut self, id: NodeId) {
        self.detach(id);
        self.rescore(id);
        self.seq += 1;
        let node = &mut self.nodes[id];
        node.status = NodeStatus::Open;
        node.heap_seq = self.seq;
        self.heap.push(OpenEntry {
            tetaq: node.tetaq,
            assignments: node.allocation.count(),
            seq: self.seq,
            id,
        });
        self.open.insert(id);
    }

    pub(crate) fn close(&mut self, id: NodeId) {
        self.detach(id);
        self.nodes[id].status = NodeStatus::Closed;
        self.closed.insert(id);
    }

    pub(crate) fn prune(&mut self, id: NodeId) {
        self.detach(id);
        self.nodes[id].status = NodeStatus::Pruned;
        self.pruned.insert(id);
    }

    pub(crate) fn remove(&mut self, id: NodeId) {
        self.detach(id);
        self.nodes[id].status = NodeStatus::Removed;
        let alloc = self.nodes[id].allocation.clone();
        if self.index.get(&alloc) == Some(&id) {
            self.index.remove(&alloc);
        }
    }

    fn rescore(&mut self, id: NodeId) {
        let (alpha, bounds) = (self.alpha, self.bounds);
        let node = &mut self.nodes[id];
        node.nsq = node.makespan().map_or(T::one(), |c| nsq(c, &bounds));
        node.tetaq = alpha * node.apr + (T::one() - alpha) * node.nsq;
    }

    /// Pops the open node with the lowest tetaq. The second value reports a
    /// tie with the next best open node.
    pub(crate) fn pop(&mut self) -> Option<(NodeId, bool)> {
        let entry = self.pop_valid()?;
        let tie = self
            .peek_valid()
            .is_some_and(|next| (next.tetaq - entry.tetaq).abs() <= T::epsilon() * T::lit(16.0));
        self.open.remove(&entry.id);
        // popped nodes sit outside every set until the caller files them
        self.nodes[entry.id].status = NodeStatus::Removed;
        Some((entry.id, tie))
    }

    fn is_current(&self, e: &OpenEntry<T>) -> bool {
        let n = &self.nodes[e.id];
        n.status == NodeStatus::Open && n.heap_seq == e.seq
    }

    fn pop_valid(&mut self) -> Option<OpenEntry<T>> {
        while let Some(e) = self.heap.pop() {
            if self.is_current(&e) {
                return Some(e);
            }
        }
        None
    }

    fn peek_valid(&mut self) -> Option<OpenEntry<T>> {
        while let Some(e) = self.heap.peek() {
            if self.is_current(e) {
                return Some(e.clone());
            }
            self.heap.pop();
        }
        None
    }

    /// Updates the normalization bounds; open nodes are rescored when they change.
    pub(crate) fn set_bounds(&mut self, bounds: NsqBounds<T>) -> bool {
        if bounds == self.bounds {
            return false;
        }
        self.bounds = bounds;
        self.rebuild_open();
        true
    }

    /// Rescores every open node and rebuilds the priority queue.
    pub(crate) fn rebuild_open(&mut self) {
        let ids: Vec<NodeId> = self.open.iter().copied().collect();
        self.heap.clear();
        for id in ids {
            self.open(id);
        }
    }

    /// Applies `reshape` to every live allocation and rebuilds the index.
    pub(crate) fn reshape_allocations(&mut self, mut reshape: impl FnMut(&mut Allocation)) {
        self.index.clear();
        for (id, node) in self.nodes.iter_mut().enumerate() {
            if node.status == NodeStatus::Removed {
                continue;
            }
            reshape(&mut node.allocation);
            self.index.insert(node.allocation.clone(), id);
        }
    }

    /// Every live node id, in creation order.
    pub(crate) fn live_ids(&self) -> Vec<NodeId> {
        (0..self.nodes.len())
            .filter(|&id| self.nodes[id].status != NodeStatus::Removed)
            .collect()
    }

    pub fn check_invariants(&self) -> Result<(), String> {
        if self.open.intersection(&self.closed).next().is_some()
            || self.open.intersection(&self.pruned).next().is_some()
            || self.closed.intersection(&self.pruned).next().is_some()
        {
            return Err("node sets overlap".into());
        }
        for (alloc, &id) in &self.index {
            if &self.nodes[id].allocation != alloc {
                return Err(format!("index entry for node {id} is stale"));
            }
        }
        let live = self.live_len();
        if self.index.len() < live {
            return Err("two live nodes share an allocation".into());
        }
        Ok(())
    }
}
