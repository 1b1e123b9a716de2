use std::collections::{HashMap, HashSet};
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use super::MotionPlan;
use crate::domain::ProblemDomain;
use crate::geometry::{Point, PointKey};
use crate::scalar::Scalar;

/// Robots with exactly equal trait rows and speed form one class and share plans.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapabilityClass<T> {
    pub traits: Vec<T>,
    pub speed: T,
}

impl<T: Scalar> CapabilityClass<T> {
    pub fn of(domain: &ProblemDomain<T>, robot: usize) -> Self {
        Self {
            traits: domain.team.entries.row(robot).to_vec(),
            speed: domain.world.robot_speeds[robot],
        }
    }

    pub fn key(&self) -> Vec<u64> {
        self.traits
            .iter()
            .chain(std::iter::once(&self.speed))
            .map(|v| v.key_bits())
            .collect()
    }
}

pub type PlanKey = (Vec<u64>, PointKey, PointKey);

pub enum CacheLookup<T> {
    Hit(MotionPlan<T>),
    /// A previous query found no path.
    Unreachable,
    Miss,
}

/// Memoized plans keyed by `(class, from, to)`. Reads may run concurrently;
/// inserts are serialized.
#[derive(Debug, Default)]
pub struct PlanCache<T> {
    plans: RwLock<HashMap<PlanKey, MotionPlan<T>>>,
    unreachable: RwLock<HashSet<PlanKey>>,
}

impl<T: Scalar> PlanCache<T> {
    pub fn new() -> Self {
        Self {
            plans: RwLock::new(HashMap::new()),
            unreachable: RwLock::new(HashSet::new()),
        }
    }

    pub fn key(class: &CapabilityClass<T>, from: &Point<T>, to: &Point<T>) -> PlanKey {
        (class.key(), from.key(), to.key())
    }

    pub fn lookup(
        &self,
        class: &CapabilityClass<T>,
        from: &Point<T>,
        to: &Point<T>,
    ) -> CacheLookup<T> {
        let key = Self::key(class, from, to);
        if let Some(plan) = self.plans.read().expect("plan cache poisoned").get(&key) {
            return CacheLookup::Hit(plan.clone());
        }
        if self
            .unreachable
            .read()
            .expect("plan cache poisoned")
            .contains(&key)
        {
            return CacheLookup::Unreachable;
        }
        CacheLookup::Miss
    }

    /// Stores a planning result; the first stored value for a key wins.
    pub fn insert(
        &self,
        class: &CapabilityClass<T>,
        from: &Point<T>,
        to: &Point<T>,
        plan: Option<MotionPlan<T>>,
    ) {
        let key = Self::key(class, from, to);
        match plan {
            Some(p) => {
                self.plans
                    .write()
                    .expect("plan cache poisoned")
                    .entry(key)
                    .or_insert(p);
            }
            None => {
                self.unreachable
                    .write()
                    .expect("plan cache poisoned")
                    .insert(key);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.plans.read().expect("plan cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn clear(&self) {
        self.plans.write().expect("plan cache poisoned").clear();
        self.unreachable
            .write()
            .expect("plan cache poisoned")
            .clear();
    }
}

impl<T: Scalar> Clone for PlanCache<T> {
    fn clone(&self) -> Self {
        Self {
            plans: RwLock::new(self.plans.read().expect("plan cache poisoned").clone()),
            unreachable: RwLock::new(
                self.unreachable
                    .read()
                    .expect("plan cache poisoned")
                    .clone(),
            ),
        }
    }
}
