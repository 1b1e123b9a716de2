use std::collections::HashMap;

use crate::domain::{is_valid_allocation, ProblemDomain, Solution};
use crate::error::{Error, Result};
use crate::geometry::{Point, PointKey};
use crate::planner::{CapabilityClass, PlanRecord, TravelTimes};
use crate::scalar::Scalar;
use crate::scheduler::build_scheduling_problem;

/// Travel times read only from a solution's own plan records.
struct RecordedTravel<T> {
    durations: HashMap<(Vec<u64>, PointKey, PointKey), T>,
}

impl<T: Scalar> RecordedTravel<T> {
    fn new(records: &[PlanRecord<T>]) -> Self {
        Self {
            durations: records
                .iter()
                .map(|r| ((r.class.key(), r.from.key(), r.to.key()), r.plan.duration))
                .collect(),
        }
    }
}

impl<T: Scalar> TravelTimes<T> for RecordedTravel<T> {
    fn travel_time(
        &self,
        domain: &ProblemDomain<T>,
        robot: usize,
        from: Point<T>,
        to: Point<T>,
    ) -> Option<T> {
        let key = (
            CapabilityClass::of(domain, robot).key(),
            from.key(),
            to.key(),
        );
        self.durations.get(&key).copied()
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidSolution(msg.into())
}

/// Samples every segment at a spacing far below any obstacle size and
/// rejects the plan if a sample leaves free space.
fn check_plan<T: Scalar>(domain: &ProblemDomain<T>, record: &PlanRecord<T>) -> Result<()> {
    let plan = &record.plan;
    let tol = T::tolerance().to_f64_lossy().max(1e-6);
    let (Some(first), Some(last)) = (plan.waypoints.first(), plan.waypoints.last()) else {
        return Err(invalid("plan without waypoints"));
    };
    if *first != record.from || *last != record.to {
        return Err(invalid("plan does not join its endpoints"));
    }
    let world = &domain.world;
    let scale = world
        .bounds
        .width()
        .max(world.bounds.height())
        .to_f64_lossy();
    let step = scale * 1e-3;
    let mut length = 0.0;
    for w in plan.waypoints.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = a.distance(&b).to_f64_lossy();
        length += len;
        let samples = (len / step).ceil().max(1.0) as usize;
        for s in 0..=samples {
            let p = a.lerp(&b, T::lit(s as f64 / samples as f64));
            if !world.is_free(&p) {
                return Err(invalid(format!(
                    "plan from {:?} to {:?} collides near ({}, {})",
                    record.from,
                    record.to,
                    p.x.to_f64_lossy(),
                    p.y.to_f64_lossy()
                )));
            }
        }
    }
    let rel = |a: f64, b: f64| (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0);
    if !rel(length, plan.length.to_f64_lossy()) {
        return Err(invalid("plan length disagrees with its waypoints"));
    }
    let speed = record.class.speed.to_f64_lossy();
    if !rel(length / speed, plan.duration.to_f64_lossy()) {
        return Err(invalid("plan duration disagrees with its length and speed"));
    }
    Ok(())
}

/// Independent check of a solution: requirements met, every travel time
/// backed by a collision-free plan, and the schedule satisfying the
/// constraints rebuilt from those plans.
pub fn verify_solution<T: Scalar>(domain: &ProblemDomain<T>, solution: &Solution<T>) -> Result<()> {
    let alloc = &solution.allocation;
    if alloc.tasks() != domain.num_tasks() || alloc.robots() != domain.num_robots() {
        return Err(invalid("allocation shape does not match the problem"));
    }
    if !is_valid_allocation(alloc, &domain.team, &domain.requirements)? {
        return Err(invalid("allocation leaves a requirement unmet"));
    }
    for record in &solution.motion_plans {
        check_plan(domain, record)?;
    }
    let problem =
        build_scheduling_problem(domain, alloc, &RecordedTravel::new(&solution.motion_plans))
            .ok_or_else(|| invalid("a required movement has no recorded plan"))?;
    solution.schedule.check(&problem).map_err(invalid)?;
    let s = &solution.schedule;
    let end = s
        .start_times
        .iter()
        .zip(&problem.durations)
        .map(|(&a, &d)| a + d)
        .fold(T::zero(), T::max);
    if (end - s.makespan).abs() > T::tolerance() * end.max(T::one()) {
        return Err(invalid("makespan is not the last completion time"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Obstacle;
    use crate::planner::MotionPlan;
    use crate::search::{Allocator, SearchConfig};
    use crate::testing::{domain, domain_in};

    fn solved(d: &ProblemDomain<f64>) -> Solution<f64> {
        let mut a = Allocator::new(d.clone(), SearchConfig::default()).unwrap();
        a.run().unwrap().into_result().unwrap()
    }

    fn walled() -> ProblemDomain<f64> {
        let wall = Obstacle::Rect {
            min: Point::new(0.0, 2.0),
            max: Point::new(8.0, 3.0),
        };
        domain_in(vec![vec![1.0]], vec![vec![1.0]], vec![1.0], vec![wall])
    }

    #[test]
    fn accepts_search_output() {
        let d = walled();
        let s = solved(&d);
        verify_solution(&d, &s).unwrap();
        assert!(!s.motion_plans.is_empty());
    }

    #[test]
    fn rejects_unmet_requirement() {
        let d = domain(vec![vec![1.0], vec![1.0]], vec![vec![2.0]], vec![1.0]);
        let mut s = solved(&d);
        s.allocation.set(0, 0, false);
        s.allocation.set(0, 1, false);
        s.allocation.set(0, 0, true);
        assert!(matches!(
            verify_solution(&d, &s),
            Err(Error::InvalidSolution(_))
        ));
    }

    #[test]
    fn rejects_plan_through_wall() {
        let d = walled();
        let mut s = solved(&d);
        let r = &mut s.motion_plans[0];
        r.plan = MotionPlan::from_waypoints(vec![r.from, r.to], r.class.speed);
        let err = verify_solution(&d, &s).unwrap_err().to_string();
        assert!(err.contains("collides"), "{err}");
    }

    #[test]
    fn rejects_early_start_and_missing_plan() {
        let d = walled();
        let mut s = solved(&d);
        s.schedule.start_times[0] = 0.0;
        s.schedule.makespan = 1.0;
        assert!(verify_solution(&d, &s).is_err());

        let mut s = solved(&d);
        s.motion_plans.clear();
        let err = verify_solution(&d, &s).unwrap_err().to_string();
        assert!(err.contains("no recorded plan"), "{err}");
    }

    #[test]
    fn rejects_wrong_duration() {
        let d = walled();
        let mut s = solved(&d);
        s.motion_plans[0].plan.duration *= 0.5;
        assert!(verify_solution(&d, &s).is_err());
    }
}
