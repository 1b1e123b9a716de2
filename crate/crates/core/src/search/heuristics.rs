use crate::domain::{
    trait_mismatch, Allocation, DesiredTraitMatrix, ProblemDomain, TeamTraitMatrix,
};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::scheduler::{schedule_lower_bound, schedule_upper_bound};

/// Fraction of the total requirement mass still unmet by `alloc`, in `[0, 1]`.
///
/// Zero exactly when the allocation is valid. A problem with no requirements
/// at all scores zero.
pub fn apr<T: Scalar>(
    alloc: &Allocation,
    team: &TeamTraitMatrix<T>,
    req: &DesiredTraitMatrix<T>,
) -> Result<T> {
    let total = req.entries.l1();
    if total <= T::zero() {
        return Ok(T::zero());
    }
    let tol = T::tolerance();
    let unmet: T = trait_mismatch(alloc, team, req)?
        .iter()
        .map(|&e| if e > tol { e } else { T::zero() })
        .sum();
    Ok(unmet / total)
}

/// Makespan normalization range: longest single task up to the serial worst case.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NsqBounds<T> {
    pub lower: T,
    pub upper: T,
}

impl<T: Scalar> NsqBounds<T> {
    /// `longest_path` is the roadmap's total edge length, if one exists.
    pub fn for_domain(domain: &ProblemDomain<T>, longest_path: Option<T>) -> Self {
        let tasks = &domain.network.tasks;
        let lower = schedule_lower_bound(tasks);
        // without robots nothing beyond the empty problem is schedulable anyway
        let upper = schedule_upper_bound(&domain.world, tasks, longest_path).unwrap_or(lower);
        Self { lower, upper }
    }

    pub fn span(&self) -> T {
        self.upper - self.lower
    }
}

/// Relative makespan within `bounds`, clamped to `[0, 1]`; zero when the
/// bounds collapse.
pub fn nsq<T: Scalar>(makespan: T, bounds: &NsqBounds<T>) -> T {
    let span = bounds.span();
    if span <= T::zero() {
        return T::zero();
    }
    ((makespan - bounds.lower) / span)
        .max(T::zero())
        .min(T::one())
}

/// Convex combination `alpha·apr + (1 − alpha)·nsq`.
pub fn tetaq<T: Scalar>(apr: T, nsq: T, alpha: T) -> Result<T> {
    if !(alpha >= T::zero() && alpha <= T::one()) {
        return Err(Error::AlphaOutOfRange(alpha.to_f64_lossy()));
    }
    Ok(alpha * apr + (T::one() - alpha) * nsq)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn team(rows: Vec<Vec<f64>>) -> TeamTraitMatrix<f64> {
        let u = rows[0].len();
        TeamTraitMatrix::new(
            (0..rows.len()).map(|i| format!("r{i}")).collect(),
            (0..u).map(|i| format!("t{i}")).collect(),
            rows,
        )
        .unwrap()
    }

    /// Direct elementwise evaluation of the unmet-mass ratio.
    fn apr_oracle(a: &[Vec<u8>], q: &[Vec<f64>], y: &[Vec<f64>]) -> f64 {
        let mut unmet = 0.0;
        let mut total = 0.0;
        for (m, row) in y.iter().enumerate() {
            for (u, &need) in row.iter().enumerate() {
                let have: f64 = (0..q.len())
                    .filter(|&n| a[m][n] == 1)
                    .map(|n| q[n][u])
                    .sum();
                unmet += (need - have).max(0.0);
                total += need;
            }
        }
        unmet / total
    }

    #[test]
    fn apr_examples() {
        let q = vec![vec![1.0, 0.0], vec![0.0, 2.0]];
        let y = vec![vec![2.0, 0.0], vec![0.0, 3.0]];
        let t = team(q.clone());
        let r = DesiredTraitMatrix::new(y.clone(), 2).unwrap();
        assert_eq!(apr(&Allocation::zeros(2, 2), &t, &r).unwrap(), 1.0);
        let eye = vec![vec![1, 0], vec![0, 1]];
        let expected = apr_oracle(&eye, &q, &y);
        assert!((expected - 0.4).abs() < 1e-15);
        assert!((apr(&Allocation::from_rows(&eye), &t, &r).unwrap() - expected).abs() < 1e-15);

        let big = team(vec![vec![5.0, 5.0], vec![0.0, 0.0]]);
        let all = Allocation::from_rows(&[vec![1, 0], vec![1, 0]]);
        assert_eq!(apr(&all, &big, &r).unwrap(), 0.0);
    }

    #[test]
    fn apr_without_requirements_is_zero() {
        let t = team(vec![vec![1.0]]);
        let r = DesiredTraitMatrix::new(vec![vec![0.0]], 1).unwrap();
        assert_eq!(apr(&Allocation::zeros(1, 1), &t, &r).unwrap(), 0.0);
    }

    #[test]
    fn nsq_examples() {
        let b = NsqBounds {
            lower: 10.0,
            upper: 50.0,
        };
        assert_eq!(nsq(10.0, &b), 0.0);
        assert_eq!(nsq(50.0, &b), 1.0);
        assert_eq!(nsq(20.0, &b), 0.25);
        assert_eq!(nsq(70.0, &b), 1.0);
    }

    #[test]
    fn tetaq_examples() {
        assert_eq!(tetaq(0.4, 0.2, 1.0).unwrap(), 0.4);
        assert_eq!(tetaq(0.4, 0.2, 0.0).unwrap(), 0.2);
        assert!((tetaq(0.4f64, 0.2, 0.5).unwrap() - 0.3).abs() < 1e-15);
        assert!(matches!(
            tetaq(0.4, 0.2, 1.5),
            Err(Error::AlphaOutOfRange(_))
        ));
        assert!(tetaq(0.4, 0.2, -0.1).is_err());
    }
}
