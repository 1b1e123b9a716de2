use std::fs;
use std::path::Path;

use super::verify::verify_solution;
use crate::analysis::{evaluate_bound, BoundReport, BOUND_CSV_HEADER};
use crate::domain::ProblemDomain;
use crate::error::{Error, Result};
use crate::search::SearchConfig;

/// The alphas swept by default.
pub const DEFAULT_ALPHAS: [f64; 6] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.45];

/// One report per `(problem, alpha)`, problems outer. Every solution is
/// verified; the bounds themselves are judged by [`check_sweep`].
pub fn run_bounds_sweep(
    domains: &[ProblemDomain<f64>],
    alphas: &[f64],
    config: &SearchConfig,
) -> Result<Vec<BoundReport>> {
    if let Some(&a) = alphas.iter().find(|&&a| !(0.0..0.5).contains(&a)) {
        return Err(Error::BoundInsignificant(a));
    }
    let mut reports = Vec::with_capacity(domains.len() * alphas.len());
    for (p, domain) in domains.iter().enumerate() {
        for &alpha in alphas {
            let (report, solution, allocator) = evaluate_bound(domain, alpha, config)?;
            verify_solution(allocator.domain(), &solution)?;
            log::info!(
                "problem {p} alpha {alpha}: gap {:.4} of {:.4} (eq6 {:.4}, eq14 {:.4})",
                report.gap(),
                report.ub - report.lb,
                report.apriori_bound,
                report.posthoc_bound
            );
            reports.push(report);
        }
    }
    log_trend(&reports, alphas);
    Ok(reports)
}

/// Mean normalized gap per alpha; it should grow with alpha.
fn log_trend(reports: &[BoundReport], alphas: &[f64]) {
    for &alpha in alphas {
        let gaps: Vec<f64> = reports
            .iter()
            .filter(|r| r.alpha == alpha)
            .map(|r| r.normalized_gap)
            .collect();
        if !gaps.is_empty() {
            log::info!(
                "alpha {alpha}: mean normalized gap {:.4}",
                gaps.iter().sum::<f64>() / gaps.len() as f64
            );
        }
    }
}

/// Fails on the first row whose gap exceeds either bound.
pub fn check_sweep(reports: &[BoundReport]) -> Result<()> {
    let bad: Vec<&BoundReport> = reports
        .iter()
        .filter(|r| !r.respects_apriori() || !r.respects_posthoc())
        .collect();
    match bad.first() {
        None => Ok(()),
        Some(r) => Err(Error::BoundViolation(format!(
            "{} of {} rows; first at alpha {}: gap {} vs bounds {} and {}",
            bad.len(),
            reports.len(),
            r.alpha,
            r.gap(),
            r.apriori_bound,
            r.posthoc_bound
        ))),
    }
}

pub fn bounds_to_csv(reports: &[BoundReport]) -> Result<String> {
    if reports.is_empty() {
        return Ok(format!("{BOUND_CSV_HEADER}\n"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in reports {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn write_bounds(path: &Path, reports: &[BoundReport]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, bounds_to_csv(reports)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::generate::{generate_problem, WorldParams};

    fn config() -> SearchConfig {
        SearchConfig {
            threads: 1,
            ..SearchConfig::default()
        }
    }

    fn problems(k: u64) -> Vec<ProblemDomain<f64>> {
        (0..k)
            .map(|s| generate_problem(s, 2, 3, 2, &WorldParams::default()).unwrap())
            .collect()
    }

    #[test]
    fn alpha_zero_has_no_gap() {
        let reports = run_bounds_sweep(&problems(3), &[0.0], &config()).unwrap();
        assert_eq!(reports.len(), 3);
        assert!(reports.iter().all(|r| r.normalized_gap.abs() < 1e-9));
    }

    #[test]
    fn rejects_insignificant_alpha() {
        let err = run_bounds_sweep(&problems(1), &[0.2, 0.5], &config()).unwrap_err();
        assert!(matches!(err, Error::BoundInsignificant(a) if a == 0.5));
    }

    #[test]
    fn one_row_per_pair_and_header() {
        let reports = run_bounds_sweep(&problems(2), &DEFAULT_ALPHAS, &config()).unwrap();
        assert_eq!(reports.len(), 12);
        check_sweep(&reports).unwrap();
        let csv = bounds_to_csv(&reports).unwrap();
        assert_eq!(csv.lines().next().unwrap(), BOUND_CSV_HEADER);
        assert_eq!(csv.lines().count(), 13);
    }

    #[test]
    fn check_flags_violations() {
        let mut reports = run_bounds_sweep(&problems(1), &[0.3], &config()).unwrap();
        reports[0].achieved_makespan = reports[0].optimal_makespan + reports[0].apriori_bound + 1.0;
        assert!(matches!(
            check_sweep(&reports),
            Err(Error::BoundViolation(_))
        ));
    }
}
