use std::fmt::Write;

use crate::error::Result;
use crate::numeric::fmt_num;

use super::diagnostics::{convergence_rows, trailing_rows, ConvergenceRow, TrailingRow, SLOPE_THRESHOLD};
use super::engine::{centered_summand_laws, Engine, MonteCarloEstimate};
use super::plan::ExperimentPlan;
use super::sweep::row_bound;

pub const TAILS_HEADER: &str = "experiment,n,epsilon,estimate,half_width,bound,satisfied";
pub const TRAILING_HEADER: &str = "experiment,N,trailing_sup_p95";
pub const CONVERGENCE_HEADER: &str = "experiment,epsilon,partial_sum,last_term,slope,threshold,convergent";

#[derive(Debug, Clone, PartialEq)]
pub struct TailRow {
    pub n: usize,
    pub epsilon: f64,
    pub estimate: MonteCarloEstimate,
    /// Bound with the claimed `M_n`, when its preconditions hold.
    pub bound: Option<f64>,
    /// `estimate + 3 half-widths <= bound`.
    pub satisfied: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub experiment: String,
    pub tails: Vec<TailRow>,
    pub trailing: Vec<TrailingRow>,
    pub convergence: Vec<ConvergenceRow>,
}

/// Two-sided bound on `P{|S_n / b_n| > eps}` with the claimed `M_n`.
fn claimed_bound(plan: &ExperimentPlan, n: usize, eps: f64) -> Option<f64> {
    let nf = n as f64;
    let laws = centered_summand_laws(plan, n).ok()?;
    let m = plan.model.claimed_m(n).max(1.0);
    let b = plan.scheme.b.eval(nf);
    row_bound(
        plan.bound,
        eps * b,
        plan.scheme.a.eval(nf),
        plan.scheme.s.eval(nf),
        m,
        &laws,
        true,
    )
    .ok()?
    .ok()
}

/// Runs the plan once and derives every output table from that run.
pub fn run_plan(plan: &ExperimentPlan) -> Result<SimulationReport> {
    let engine = Engine::new(plan)?;
    let run = engine.run()?;
    let mut tails = Vec::new();
    for (i, &n) in plan.n_schedule.iter().enumerate() {
        for &eps in &plan.epsilons {
            let estimate = run.estimate(i, eps);
            let bound = claimed_bound(plan, n, eps);
            tails.push(TailRow {
                n,
                epsilon: eps,
                estimate,
                bound,
                satisfied: bound.map(|b| estimate.upper(3.0) <= b),
            });
        }
    }
    let convergence = if plan.n_schedule.len() >= super::diagnostics::MIN_SCHEDULE_POINTS {
        convergence_rows(&run, &plan.epsilons)?
    } else {
        Vec::new()
    };
    Ok(SimulationReport {
        experiment: plan.name.clone(),
        tails,
        trailing: trailing_rows(&run),
        convergence,
    })
}

fn opt_num(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

impl SimulationReport {
    pub fn tails_csv(&self) -> String {
        let mut out = format!("{TAILS_HEADER}\n");
        for r in &self.tails {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                self.experiment,
                r.n,
                fmt_num(r.epsilon),
                fmt_num(r.estimate.value),
                fmt_num(r.estimate.half_width),
                opt_num(r.bound),
                r.satisfied.map(|s| s.to_string()).unwrap_or_default()
            );
        }
        out
    }

    pub fn trailing_csv(&self) -> String {
        let mut out = format!("{TRAILING_HEADER}\n");
        for r in &self.trailing {
            let _ = writeln!(out, "{},{},{}", self.experiment, r.n_start, fmt_num(r.p95));
        }
        out
    }

    pub fn convergence_csv(&self) -> String {
        let mut out = format!("{CONVERGENCE_HEADER}\n");
        for r in &self.convergence {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                self.experiment,
                fmt_num(r.epsilon),
                fmt_num(r.partial_sum),
                fmt_num(r.last_term),
                fmt_num(r.slope),
                fmt_num(SLOPE_THRESHOLD),
                r.convergent
            );
        }
        out
    }

    pub fn trailing_at(&self, n_start: usize) -> Option<f64> {
        self.trailing.iter().find(|r| r.n_start == n_start).map(|r| r.p95)
    }

    pub fn convergence_at(&self, epsilon: f64) -> Option<&ConvergenceRow> {
        self.convergence.iter().find(|r| r.epsilon == epsilon)
    }
}
