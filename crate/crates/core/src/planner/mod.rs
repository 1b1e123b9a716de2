//! Probabilistic-roadmap motion planning for point robots, with plan
//! memoization shared across robots of identical capability.

mod cache;
mod roadmap;
mod travel;

pub use cache::{CacheLookup, CapabilityClass, PlanCache, PlanKey};
pub use roadmap::{build_roadmap, mandatory_points, PrmConfig, Roadmap};
pub use travel::{
    estimate_travel_time, EstimatedTravel, EuclideanTravel, Planner, RecordingTravel, TravelTimes,
};

use serde::{Deserialize, Serialize};

use crate::geometry::Point;
use crate::scalar::Scalar;

/// Collision-free polyline with its length (m) and traversal time (s).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotionPlan<T> {
    pub waypoints: Vec<Point<T>>,
    pub length: T,
    pub duration: T,
}

impl<T: Scalar> MotionPlan<T> {
    pub fn from_waypoints(waypoints: Vec<Point<T>>, speed: T) -> Self {
        let length = waypoints.windows(2).map(|w| w[0].distance(&w[1])).sum();
        Self {
            waypoints,
            length,
            duration: length / speed,
        }
    }
}

/// One memoized plan backing a travel time in a solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanRecord<T> {
    pub class: CapabilityClass<T>,
    pub from: Point<T>,
    pub to: Point<T>,
    pub plan: MotionPlan<T>,
}
