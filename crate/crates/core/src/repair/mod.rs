//! Targeted repair: adapts a retained search to a changed problem by
//! touching only the nodes an event can affect, then resumes the search.

mod events;

pub use events::{apply_decomposed, apply_event, decompose, DynamicEvent, EventKind};

use crate::domain::{Allocation, ProblemDomain, Solution};
use crate::error::Result;
use crate::scalar::Scalar;
use crate::search::{Allocator, NodeId, NodeStatus, SearchOutcome};

impl<T: Scalar> Allocator<T> {
    /// Applies `event` to the current domain, repairs the retained search
    /// state and resumes it. `solution` is the last solution this allocator
    /// returned, if the previous run found one; it is put back in the open
    /// set first and then treated like every other node.
    pub fn repair(
        &mut self,
        solution: Option<&Solution<T>>,
        event: &DynamicEvent<T>,
    ) -> Result<SearchOutcome<T>> {
        let iteration = self.domain.iteration;
        let parts = decompose(&self.domain, event)?;
        if let Some(s) = solution {
            self.requeue(&s.allocation)?;
        }
        for part in &parts {
            let next = apply_event(&self.domain, part)?;
            let before = std::mem::replace(&mut self.domain, next);
            self.handle(part, &before)?;
        }
        self.domain.iteration = iteration + 1;
        self.refresh_bounds();
        self.run()
    }

    fn requeue(&mut self, alloc: &Allocation) -> Result<()> {
        let id = match self.state.lookup(alloc) {
            Some(id) if self.state.node(id).status == NodeStatus::Open => return Ok(()),
            Some(id) => id,
            None => self.state.insert(alloc.clone(), None),
        };
        let eval = self.evaluate(alloc)?;
        self.file(id, eval);
        Ok(())
    }

    fn handle(&mut self, event: &DynamicEvent<T>, before: &ProblemDomain<T>) -> Result<()> {
        match &event.kind {
            EventKind::AgentLost { agent } => {
                let n = before.robot_index(agent)?;
                self.drop_nodes(|a| a.robot_is_used(n), |a| a.remove_robot(n));
            }
            EventKind::TaskLost { task } => {
                let m = before.task_index(task)?;
                self.drop_nodes(|a| a.task_is_staffed(m), |a| a.remove_task(m));
                self.rescan_after_task_loss()?;
            }
            EventKind::TraitsReduced { agent, .. } => {
                self.rescore_open_apr()?;
                self.replan_robot(before.robot_index(agent)?);
            }
            EventKind::RequirementsIncreased { .. } => {
                self.rescore_open_apr()?;
            }
            EventKind::TraitsIncreased { agent, .. } => {
                self.rescore_open_apr()?;
                self.revive_viable()?;
                self.replan_robot(before.robot_index(agent)?);
            }
            EventKind::RequirementsReduced { .. } => {
                self.rescore_open_apr()?;
                self.revive_viable()?;
            }
            EventKind::DurationChanged { .. } => {
                self.resolve_open()?;
            }
            EventKind::NewAgent(_) => {
                self.planner.ensure_sites(&self.domain);
                self.state.reshape_allocations(Allocation::push_robot);
                self.add_root_children()?;
            }
        }
        Ok(())
    }

    /// Removes every live node matching `lost`, then reshapes the survivors.
    fn drop_nodes(
        &mut self,
        lost: impl Fn(&Allocation) -> bool,
        reshape: impl FnMut(&mut Allocation),
    ) {
        for id in self.state.live_ids() {
            self.stats.retained_reads += 1;
            if lost(&self.state.node(id).allocation) {
                self.state.remove(id);
                self.stats.nodes_touched += 1;
            }
        }
        self.state.reshape_allocations(reshape);
    }

    /// Plans are shared by capability class, so a robot whose traits changed
    /// needs its plans recorded again before a goal using it is accepted.
    fn replan_robot(&mut self, n: usize) {
        let ids: Vec<NodeId> = self.state.open_ids().collect();
        for id in ids {
            let node = self.state.node_mut(id);
            if node.refined && node.allocation.robot_is_used(n) {
                node.refined = false;
            }
        }
    }

    fn open_and_closed(&self) -> Vec<NodeId> {
        self.state
            .open_ids()
            .chain(self.state.closed_ids())
            .collect()
    }

    /// Open nodes get fresh APR and schedules; closed nodes get fresh APR and
    /// any that now meet every requirement are re-solved and reopened.
    fn rescan_after_task_loss(&mut self) -> Result<()> {
        let ids = self.open_and_closed();
        for id in ids {
            self.stats.retained_reads += 1;
            let alloc = self.state.node(id).allocation.clone();
            if self.state.node(id).status == NodeStatus::Open {
                let eval = self.evaluate(&alloc)?;
                self.file(id, eval);
                continue;
            }
            let apr = crate::search::apr(&alloc, &self.domain.team, &self.domain.requirements)?;
            self.state.node_mut(id).apr = apr;
            if apr == T::zero() {
                let eval = self.evaluate(&alloc)?;
                self.file(id, eval);
            }
        }
        self.state.rebuild_open();
        Ok(())
    }

    fn rescore_open_apr(&mut self) -> Result<()> {
        let ids: Vec<NodeId> = self.state.open_ids().collect();
        for id in ids {
            self.stats.retained_reads += 1;
            self.stats.nodes_touched += 1;
            let apr = crate::search::apr(
                &self.state.node(id).allocation,
                &self.domain.team,
                &self.domain.requirements,
            )?;
            self.state.node_mut(id).apr = apr;
        }
        self.state.rebuild_open();
        Ok(())
    }

    /// Closed and pruned nodes that now meet every requirement are re-solved
    /// and filed again.
    fn revive_viable(&mut self) -> Result<()> {
        let ids: Vec<NodeId> = self
            .state
            .closed_ids()
            .chain(self.state.pruned_ids())
            .collect();
        for id in ids {
            self.stats.retained_reads += 1;
            let alloc = self.state.node(id).allocation.clone();
            let apr = crate::search::apr(&alloc, &self.domain.team, &self.domain.requirements)?;
            if apr == T::zero() {
                let eval = self.evaluate(&alloc)?;
                self.file(id, eval);
            }
        }
        Ok(())
    }

    fn resolve_open(&mut self) -> Result<()> {
        let ids: Vec<NodeId> = self.state.open_ids().collect();
        for id in ids {
            self.stats.retained_reads += 1;
            let alloc = self.state.node(id).allocation.clone();
            let eval = self.evaluate(&alloc)?;
            self.file(id, eval);
        }
        Ok(())
    }

    /// One child of the empty allocation per task, assigning the newest robot.
    fn add_root_children(&mut self) -> Result<()> {
        let root = Allocation::zeros(self.domain.num_tasks(), self.domain.num_robots());
        let parent = self.state.lookup(&root);
        let n = self.domain.num_robots() - 1;
        for m in 0..self.domain.num_tasks() {
            let child = root.with(m, n);
            if self.state.lookup(&child).is_some() {
                continue;
            }
            let id = self.state.insert(child.clone(), parent);
            let eval = self.evaluate(&child)?;
            self.stats.nodes_generated += 1;
            self.file(id, eval);
        }
        Ok(())
    }
}
