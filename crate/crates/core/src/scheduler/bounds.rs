use crate::domain::{TaskSpec, WorldModel};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Worst-case makespan `2·M·z / w + Σ d`: every task reached twice over the
/// longest possible path `z` by the slowest robot (speed `w`), then run in
/// series.
///
/// `longest_path` is the roadmap's total edge length when one exists; without
/// it the bound falls back to `2·(width + height)·M` of the world bounds.
pub fn schedule_upper_bound<T: Scalar>(
    world: &WorldModel<T>,
    tasks: &[TaskSpec<T>],
    longest_path: Option<T>,
) -> Result<T> {
    let slowest = world.slowest_speed().ok_or(Error::NoRobots)?;
    let m = T::from_usize(tasks.len()).expect("task count fits scalar");
    let z = longest_path
        .unwrap_or_else(|| T::lit(2.0) * (world.bounds.width() + world.bounds.height()) * m);
    let work: T = tasks.iter().map(|t| t.duration).sum();
    Ok(T::lit(2.0) * m * z / slowest + work)
}

/// Duration of the longest task; zero without tasks.
pub fn schedule_lower_bound<T: Scalar>(tasks: &[TaskSpec<T>]) -> T {
    tasks.iter().map(|t| t.duration).fold(T::zero(), T::max)
}
