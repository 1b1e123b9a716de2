use std::cell::RefCell;
use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use super::cache::{CacheLookup, CapabilityClass, PlanCache};
use super::roadmap::{mandatory_points, PrmConfig, Roadmap};
use super::{MotionPlan, PlanRecord};
use crate::domain::ProblemDomain;
use crate::error::Result;
use crate::geometry::{Point, PointKey};
use crate::scalar::Scalar;

/// Source of robot travel times between two sites.
pub trait TravelTimes<T: Scalar> {
    /// Seconds for `robot` to move from `from` to `to`, or `None` if it cannot.
    fn travel_time(
        &self,
        domain: &ProblemDomain<T>,
        robot: usize,
        from: Point<T>,
        to: Point<T>,
    ) -> Option<T>;
}

/// Straight-line distance over speed; a lower bound on any planned duration.
pub fn estimate_travel_time<T: Scalar>(from: &Point<T>, to: &Point<T>, speed: T) -> T {
    from.distance(to) / speed
}

#[derive(Clone, Copy, Debug, Default)]
pub struct EuclideanTravel;

impl<T: Scalar> TravelTimes<T> for EuclideanTravel {
    fn travel_time(
        &self,
        domain: &ProblemDomain<T>,
        robot: usize,
        from: Point<T>,
        to: Point<T>,
    ) -> Option<T> {
        Some(estimate_travel_time(
            &from,
            &to,
            domain.world.robot_speeds[robot],
        ))
    }
}

/// Straight-line estimate, but `None` when the roadmap shows the two sites
/// cannot be joined at all.
#[derive(Clone, Copy)]
pub struct EstimatedTravel<'a, T> {
    roadmap: &'a Roadmap<T>,
}

impl<'a, T: Scalar> EstimatedTravel<'a, T> {
    pub fn new(roadmap: &'a Roadmap<T>) -> Self {
        Self { roadmap }
    }
}

impl<T: Scalar> TravelTimes<T> for EstimatedTravel<'_, T> {
    fn travel_time(
        &self,
        domain: &ProblemDomain<T>,
        robot: usize,
        from: Point<T>,
        to: Point<T>,
    ) -> Option<T> {
        if from != to && self.roadmap.connected(&from, &to) == Some(false) {
            return None;
        }
        EuclideanTravel.travel_time(domain, robot, from, to)
    }
}

/// Roadmap plus plan cache. Every cache miss counts as one planner call.
#[derive(Debug)]
pub struct Planner<T> {
    roadmap: Roadmap<T>,
    cache: PlanCache<T>,
    calls: AtomicUsize,
}

impl<T: Scalar> Clone for Planner<T> {
    fn clone(&self) -> Self {
        Self {
            roadmap: self.roadmap.clone(),
            cache: self.cache.clone(),
            calls: AtomicUsize::new(self.calls()),
        }
    }
}

impl<T: Scalar> Planner<T> {
    pub fn new(roadmap: Roadmap<T>) -> Self {
        Self {
            roadmap,
            cache: PlanCache::new(),
            calls: AtomicUsize::new(0),
        }
    }

    pub fn for_domain(domain: &ProblemDomain<T>, config: &PrmConfig) -> Result<Self> {
        Ok(Self::new(Roadmap::for_domain(domain, config)?))
    }

    pub fn roadmap(&self) -> &Roadmap<T> {
        &self.roadmap
    }

    pub fn cache(&self) -> &PlanCache<T> {
        &self.cache
    }

    /// Number of shortest-path searches actually run (cache misses).
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }

    /// Links any start or task site of `domain` missing from the roadmap.
    /// Cached plans stay valid: new vertices only add edges, and cached
    /// paths are kept verbatim.
    pub fn ensure_sites(&mut self, domain: &ProblemDomain<T>) {
        for p in mandatory_points(domain) {
            self.roadmap.ensure_vertex(&domain.world, p);
        }
    }

    /// Shortest roadmap path for a robot of `class`, memoized by
    /// `(class, from, to)`.
    pub fn plan(
        &self,
        class: &CapabilityClass<T>,
        from: Point<T>,
        to: Point<T>,
    ) -> Option<MotionPlan<T>> {
        match self.cache.lookup(class, &from, &to) {
            CacheLookup::Hit(plan) => return Some(plan),
            CacheLookup::Unreachable => return None,
            CacheLookup::Miss => {}
        }
        self.calls.fetch_add(1, Ordering::Relaxed);
        let plan = if from == to {
            Some(MotionPlan::from_waypoints(vec![from], class.speed))
        } else {
            self.roadmap
                .shortest_path(&from, &to)
                .map(|path| MotionPlan::from_waypoints(path, class.speed))
        };
        self.cache.insert(class, &from, &to, plan.clone());
        plan
    }
}

impl<T: Scalar> TravelTimes<T> for Planner<T> {
    fn travel_time(
        &self,
        domain: &ProblemDomain<T>,
        robot: usize,
        from: Point<T>,
        to: Point<T>,
    ) -> Option<T> {
        self.plan(&CapabilityClass::of(domain, robot), from, to)
            .map(|p| p.duration)
    }
}

/// Planner-backed travel times that remember every plan handed out.
pub struct RecordingTravel<'a, T> {
    planner: &'a Planner<T>,
    used: RefCell<BTreeMap<(Vec<u64>, PointKey, PointKey), PlanRecord<T>>>,
}

impl<'a, T: Scalar> RecordingTravel<'a, T> {
    pub fn new(planner: &'a Planner<T>) -> Self {
        Self {
            planner,
            used: RefCell::new(BTreeMap::new()),
        }
    }

    /// Plans used so far, in a deterministic order.
    pub fn into_records(self) -> Vec<PlanRecord<T>> {
        self.used.into_inner().into_values().collect()
    }
}

impl<T: Scalar> TravelTimes<T> for RecordingTravel<'_, T> {
    fn travel_time(
        &self,
        domain: &ProblemDomain<T>,
        robot: usize,
        from: Point<T>,
        to: Point<T>,
    ) -> Option<T> {
        let class = CapabilityClass::of(domain, robot);
        let plan = self.planner.plan(&class, from, to)?;
        let duration = plan.duration;
        self.used
            .borrow_mut()
            .entry((class.key(), from.key(), to.key()))
            .or_insert(PlanRecord {
                class,
                from,
                to,
                plan,
            });
        Some(duration)
    }
}
