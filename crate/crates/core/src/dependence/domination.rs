use crate::error::{domain, Result};
use crate::numeric::{fmt_num, stable_sum};

use super::marginal::MarginalSpec;
use super::model::TriangularArrayModel;

#[derive(Debug, Clone, PartialEq)]
pub enum DominationOutcome {
    /// Supremum of the tail ratio and where it was attained.
    Dominated { constant: f64, n: usize, t: f64 },
    /// The array has tail mass at `t` where the dominating law has none.
    Violated { n: usize, t: f64, tail: f64 },
}

impl DominationOutcome {
    pub fn constant(&self) -> f64 {
        match self {
            Self::Dominated { constant, .. } => *constant,
            Self::Violated { .. } => f64::INFINITY,
        }
    }

    pub fn summary(&self) -> String {
        match self {
            Self::Dominated { constant, n, t } => {
                format!("C={} at n={n} t={}", fmt_num(*constant), fmt_num(*t))
            }
            Self::Violated { n, t, tail } => {
                format!(
                    "tail {} > 0 at n={n} t={} where P{{|X|>t}}=0",
                    fmt_num(*tail),
                    fmt_num(*t)
                )
            }
        }
    }
}

struct Sup {
    best: f64,
    at: (usize, f64),
    violation: Option<(usize, f64, f64)>,
}

impl Sup {
    fn new() -> Self {
        Self {
            best: 0.0,
            at: (1, 0.0),
            violation: None,
        }
    }

    fn observe(&mut self, num: f64, den: f64, n: usize, t: f64) {
        if den > 0.0 {
            let r = num / den;
            if r > self.best {
                self.best = r;
                self.at = (n, t);
            }
        } else if num > 0.0 && self.violation.is_none() {
            self.violation = Some((n, t, num));
        }
    }

    fn finish(self) -> DominationOutcome {
        match self.violation {
            Some((n, t, tail)) => DominationOutcome::Violated { n, t, tail },
            None => DominationOutcome::Dominated {
                constant: self.best,
                n: self.at.0,
                t: self.at.1,
            },
        }
    }
}

fn check_inputs(dominating: &MarginalSpec, t_grid: &[f64], n_max: usize) -> Result<()> {
    dominating.validate()?;
    if n_max == 0 {
        return Err(domain("n_max must be >= 1"));
    }
    if t_grid.is_empty() || t_grid.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
        return Err(domain("t grid must be nonempty and positive"));
    }
    Ok(())
}

/// `sup_{n <= n_max, t} (1/n) sum_k P{|X_{n,k}| > t} / P{|X| > t}`.
pub fn check_weak_mean_domination(
    model: &TriangularArrayModel,
    dominating: &MarginalSpec,
    n_max: usize,
    t_grid: &[f64],
) -> Result<DominationOutcome> {
    check_inputs(dominating, t_grid, n_max)?;
    let mut sup = Sup::new();
    for n in model.rows_up_to(n_max) {
        let laws = model.row_laws(n)?;
        for &t in t_grid {
            let avg = stable_sum(laws.iter().map(|(m, c)| (*c as f64 / n as f64) * m.tail_abs(t)));
            sup.observe(avg, dominating.tail_abs(t), n, t);
        }
    }
    Ok(sup.finish())
}

/// `sup_{n <= n_max, k, t} P{|X_{n,k}| > t} / P{|X| > t}`.
pub fn check_stochastic_domination(
    model: &TriangularArrayModel,
    dominating: &MarginalSpec,
    n_max: usize,
    t_grid: &[f64],
) -> Result<DominationOutcome> {
    check_inputs(dominating, t_grid, n_max)?;
    let mut sup = Sup::new();
    for n in model.rows_up_to(n_max) {
        let laws = model.row_laws(n)?;
        for &t in t_grid {
            let worst = laws.iter().map(|(m, _)| m.tail_abs(t)).fold(0.0, f64::max);
            sup.observe(worst, dominating.tail_abs(t), n, t);
        }
    }
    Ok(sup.finish())
}
