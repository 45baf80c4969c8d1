use crate::error::{Error, Result};
use crate::numeric::KahanSum;

use super::engine::{Engine, SimulationRun};
use super::plan::ExperimentPlan;

/// Tails decaying faster than `n^-1` are read as summable.
pub const SLOPE_THRESHOLD: f64 = -1.0;
pub const MIN_SCHEDULE_POINTS: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub epsilon: f64,
    /// `sum_i est_i (n_i - n_{i-1})` with `n_0 = 0`; a proxy for the series.
    pub partial_sum: f64,
    pub last_term: f64,
    /// Log-log slope of the tail over the last half of the schedule.
    pub slope: f64,
    pub convergent: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrailingRow {
    pub n_start: usize,
    pub p95: f64,
}

/// Maximum-likelihood slope `beta` of `counts_i ~ Poisson(R exp(alpha + beta ln n_i))`.
///
/// Zero counts carry information, unlike a least-squares fit on log
/// estimates. Returns `-inf` when there are no hits or all hits sit at the
/// smallest `n`, and `+inf` when they all sit at the largest.
pub fn poisson_log_slope(ns: &[f64], counts: &[usize]) -> f64 {
    assert_eq!(ns.len(), counts.len());
    let x: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let total: f64 = counts.iter().map(|c| *c as f64).sum();
    if total == 0.0 {
        return f64::NEG_INFINITY;
    }
    let target = x.iter().zip(counts).map(|(x, c)| x * *c as f64).sum::<f64>() / total;
    let (lo_x, hi_x) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(*v), h.max(*v)));
    let tol = 1e-12 * hi_x.abs().max(1.0);
    if target <= lo_x + tol {
        return f64::NEG_INFINITY;
    }
    if target >= hi_x - tol {
        return f64::INFINITY;
    }
    // softmax mean of x under weights exp(beta x), increasing in beta
    let mean = |beta: f64| {
        let top = x.iter().map(|v| beta * v).fold(f64::NEG_INFINITY, f64::max);
        let (mut num, mut den) = (0.0, 0.0);
        for v in &x {
            let w = (beta * v - top).exp();
            num += w * v;
            den += w;
        }
        num / den
    };
    let (mut lo, mut hi) = (-1.0, 1.0);
    while mean(lo) > target {
        lo *= 2.0;
    }
    while mean(hi) < target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mean(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Convergence proxy per epsilon from an existing run.
pub fn convergence_rows(run: &SimulationRun, epsilons: &[f64]) -> Result<Vec<ConvergenceRow>> {
    let len = run.n_schedule.len();
    if len < MIN_SCHEDULE_POINTS {
        return Err(Error::Plan(format!(
            "convergence diagnostic needs at least {MIN_SCHEDULE_POINTS} schedule points, got {len}"
        )));
    }
    let half = len / 2;
    let ns: Vec<f64> = run.n_schedule[half..].iter().map(|n| *n as f64).collect();
    Ok(epsilons
        .iter()
        .map(|&eps| {
            let mut partial = KahanSum::new();
            let mut prev = 0usize;
            for (i, n) in run.n_schedule.iter().enumerate() {
                partial.add(run.estimate(i, eps).value * (n - prev) as f64);
                prev = *n;
            }
            let counts: Vec<usize> = (half..len).map(|i| run.hits(i, eps)).collect();
            let slope = poisson_log_slope(&ns, &counts);
            ConvergenceRow {
                epsilon: eps,
                partial_sum: partial.value(),
                last_term: run.estimate(len - 1, eps).value,
                slope,
                convergent: slope < SLOPE_THRESHOLD,
            }
        })
        .collect())
}

pub fn trailing_rows(run: &SimulationRun) -> Vec<TrailingRow> {
    run.trailing_sup_p95()
        .into_iter()
        .map(|(n_start, p95)| TrailingRow { n_start, p95 })
        .collect()
}

pub fn complete_convergence_diagnostic(plan: &ExperimentPlan) -> Result<Vec<ConvergenceRow>> {
    if plan.n_schedule.len() < MIN_SCHEDULE_POINTS {
        return Err(Error::Plan(format!(
            "convergence diagnostic needs at least {MIN_SCHEDULE_POINTS} schedule points"
        )));
    }
    convergence_rows(&Engine::new(plan)?.run()?, &plan.epsilons)
}

pub fn strong_law_path_diagnostic(plan: &ExperimentPlan) -> Result<Vec<TrailingRow>> {
    Ok(trailing_rows(&Engine::new(plan)?.run()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_recovers_power_law() {
        let ns: Vec<f64> = (4..=14).map(|k| 2f64.powi(k)).collect();
        // expected counts 1e6 * n^-1.5, rounded
        let counts: Vec<usize> = ns.iter().map(|n| (1e6 * n.powf(-1.5)).round() as usize).collect();
        let b = poisson_log_slope(&ns, &counts);
        assert!((b + 1.5).abs() < 0.01, "{b}");
    }

    #[test]
    fn flat_counts_have_zero_slope() {
        let ns = [16.0, 32.0, 64.0, 128.0];
        assert!(poisson_log_slope(&ns, &[40, 40, 40, 40]).abs() < 1e-9);
    }

    #[test]
    fn extreme_counts() {
        let ns = [16.0, 32.0, 64.0];
        assert_eq!(poisson_log_slope(&ns, &[0, 0, 0]), f64::NEG_INFINITY);
        assert_eq!(poisson_log_slope(&ns, &[5, 0, 0]), f64::NEG_INFINITY);
        assert_eq!(poisson_log_slope(&ns, &[0, 0, 5]), f64::INFINITY);
    }

    #[test]
    fn partial_sum_uses_gaps() {
        let run = SimulationRun {
            n_schedule: vec![1, 2, 4, 8, 16, 32],
            sums: vec![vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0], vec![0.0; 6]],
        };
        let rows = convergence_rows(&run, &[0.5]).unwrap();
        // 0.5 * (1 + 1 + 2)
        assert_eq!(rows[0].partial_sum, 2.0);
        assert_eq!(rows[0].last_term, 0.0);
        assert_eq!(rows[0].slope, f64::NEG_INFINITY);
        assert!(rows[0].convergent);
        let short = SimulationRun {
            n_schedule: vec![1, 2],
            sums: vec![vec![0.0, 0.0]],
        };
        assert!(convergence_rows(&short, &[0.5]).is_err());
    }
}
