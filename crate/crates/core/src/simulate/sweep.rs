use std::fmt;

use crate::bounds::{bennett_bound, bernstein_bound, fuk_nagaev_general, BoundInputs, FukNagaevInputs, TailFn};
use crate::dependence::{certify_end_row, CertMode, Dependence, JointTable, MarginalSpec};
use crate::error::{Error, Result};
use crate::numeric::KahanSum;

use super::engine::{centered_summand_laws, Engine, MonteCarloEstimate};
use super::exact::DiscreteSumLaw;
use super::plan::{BoundKind, Center, ExperimentPlan};

/// Relative slack on the support and variance preconditions.
const PRECONDITION_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    /// Enumerate the row law and certify `M_n`.
    Exact,
    /// Estimate the tail by simulation and use the model's claimed `M_n`.
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MSource {
    /// Product measure, `M_n = 1`.
    Independent,
    Certified,
    Claimed,
}

impl fmt::Display for MSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Independent => "independent",
            Self::Certified => "certified",
            Self::Claimed => "claimed",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub epsilon: f64,
    /// Exact tail, or the Monte Carlo estimate.
    pub tail: f64,
    /// Present in Monte Carlo mode.
    pub half_width: Option<f64>,
    /// `None` when the bound's preconditions fail on this row; see `note`.
    pub bound: Option<f64>,
    pub m: f64,
    pub m_source: MSource,
    pub satisfied: Option<bool>,
    pub note: String,
}

/// Bound value for the centered, weighted row, or the reason it does not
/// apply. `two_sided` doubles the Bennett and Bernstein bounds.
pub(crate) fn row_bound(
    kind: BoundKind,
    threshold: f64,
    a: f64,
    s: f64,
    m: f64,
    laws: &[(MarginalSpec, usize)],
    two_sided: bool,
) -> Result<std::result::Result<f64, String>> {
    if laws.iter().all(|(l, _)| l.max_abs() == 0.0) {
        return Ok(Ok(0.0));
    }
    match kind {
        BoundKind::Bennett | BoundKind::Bernstein => {
            for (law, _) in laws {
                let mean = law.mean()?;
                if mean.abs() > PRECONDITION_SLACK * law.max_abs().max(1.0) {
                    return Ok(Err(format!("summand mean {mean} is not zero")));
                }
                let (lo, hi) = law.support();
                let reach = if two_sided { hi.max(-lo) } else { hi };
                if reach > a * (1.0 + PRECONDITION_SLACK) {
                    return Ok(Err(format!("summand support reaches {reach} > a_n = {a}")));
                }
            }
            let var: KahanSum = laws
                .iter()
                .map(|(l, c)| l.second_moment().map(|v| v * *c as f64))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .collect();
            let var = var.value();
            if var > s * (1.0 + PRECONDITION_SLACK) {
                return Ok(Err(format!("second-moment sum {var} > s_n = {s}")));
            }
            let inputs = BoundInputs::new(threshold, a, s, m);
            let r = match kind {
                BoundKind::Bennett => bennett_bound(&inputs)?,
                _ => bernstein_bound(&inputs)?,
            };
            Ok(Ok(if two_sided { 2.0 * r.bound } else { r.bound }))
        }
        BoundKind::FukNagaev { lambda, p } => {
            let moment: KahanSum = laws
                .iter()
                .map(|(l, c)| l.abs_moment(p).map(|v| v * *c as f64))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .collect();
            let tails: Vec<TailFn<'_>> = laws
                .iter()
                .flat_map(|(l, c)| (0..*c).map(move |_| Box::new(move |t: f64| l.tail_abs(t)) as TailFn<'_>))
                .collect();
            let inputs = FukNagaevInputs {
                epsilon: threshold,
                lambda,
                p,
                m,
                abs_moment_sum: moment.value(),
                marginal_tails: tails,
            };
            Ok(Ok(fuk_nagaev_general(&inputs, threshold / lambda)?.bound))
        }
    }
}

fn transformed_table(table: &JointTable, weights: &[f64], centers: &[f64]) -> Result<JointTable> {
    let (atoms, probs): (Vec<Vec<f64>>, Vec<f64>) = table
        .atoms()
        .map(|(a, p)| {
            let y = a
                .iter()
                .zip(weights)
                .zip(centers)
                .map(|((x, c), mu)| c * (x - mu))
                .collect();
            (y, p)
        })
        .unzip();
    JointTable::new(atoms, probs)
}

fn is_enumerable(law: &MarginalSpec) -> bool {
    matches!(law, MarginalSpec::TwoPoint { .. } | MarginalSpec::Discrete { .. })
}

/// Compares tails against the bound of `kind` at every `(n, epsilon)` of the
/// plan. Bennett and Bernstein are compared with one-sided tails in exact
/// mode and doubled against two-sided estimates in Monte Carlo mode; the
/// Fuk–Nagaev bound is two-sided in both.
pub fn bound_validity_sweep(plan: &ExperimentPlan, kind: BoundKind, mode: SweepMode) -> Result<Vec<SweepRow>> {
    plan.validate()?;
    let one_sided = mode == SweepMode::Exact && !matches!(kind, BoundKind::FukNagaev { .. });
    let engine = Engine::new(plan)?;
    let mut rows = Vec::new();
    for &n in &plan.n_schedule {
        let nf = n as f64;
        let (a, b, s) = (plan.scheme.a.eval(nf), plan.scheme.b.eval(nf), plan.scheme.s.eval(nf));
        let laws = centered_summand_laws(plan, n)?;
        let (law, m, m_source, estimates) = match mode {
            SweepMode::Exact => {
                let (law, m, src) = match &plan.model.dependence {
                    Dependence::DiscreteJoint(tables) => {
                        let table = tables
                            .get(&n)
                            .ok_or_else(|| Error::Plan(format!("discrete_joint has no table for row {n}")))?;
                        let weights: Vec<f64> = (1..=n).map(|k| plan.model.weights.get(n, k)).collect();
                        let centers: Vec<f64> = match plan.center {
                            Center::None => vec![0.0; n],
                            Center::SubtractMean => (0..n).map(|k| table.marginal(k).mean()).collect::<Result<_>>()?,
                        };
                        let y = transformed_table(table, &weights, &centers)?;
                        let cert = certify_end_row(&y, CertMode::End)?;
                        let m = if one_sided { cert.m_uend } else { cert.m_end };
                        (
                            DiscreteSumLaw::from_table(table, &weights, &centers),
                            m.max(1.0),
                            MSource::Certified,
                        )
                    }
                    Dependence::Independent if laws.iter().all(|(l, _)| is_enumerable(l)) => {
                        let expanded: Vec<MarginalSpec> = laws
                            .iter()
                            .flat_map(|(l, c)| std::iter::repeat_n(l.clone(), *c))
                            .collect();
                        (DiscreteSumLaw::independent_sum(&expanded)?, 1.0, MSource::Independent)
                    }
                    other => {
                        return Err(Error::Unsupported(format!(
                            "row {n} of a {} model with these marginals cannot be enumerated",
                            other.name()
                        )))
                    }
                };
                (Some(law), m, src, None)
            }
            SweepMode::MonteCarlo => {
                let est: Vec<MonteCarloEstimate> = plan
                    .epsilons
                    .iter()
                    .map(|e| engine.estimate_tail(n, *e))
                    .collect::<Result<_>>()?;
                (None, plan.model.claimed_m(n).max(1.0), MSource::Claimed, Some(est))
            }
        };
        for (i, &eps) in plan.epsilons.iter().enumerate() {
            let threshold = eps * b;
            let (tail, half_width, compare) = match (&law, &estimates) {
                (Some(l), _) => {
                    let t = if one_sided {
                        l.upper_tail(threshold)
                    } else {
                        l.abs_tail(threshold)
                    };
                    (t, None, t)
                }
                (None, Some(est)) => (est[i].value, Some(est[i].half_width), est[i].upper(3.0)),
                _ => unreachable!(),
            };
            let bound = row_bound(kind, threshold, a, s, m, &laws, !one_sided)?;
            let (bound, satisfied, note) = match bound {
                Ok(v) => (Some(v), Some(compare <= v), String::new()),
                Err(why) => (None, None, why),
            };
            rows.push(SweepRow {
                n,
                epsilon: eps,
                tail,
                half_width,
                bound,
                m,
                m_source,
                satisfied,
                note,
            });
        }
    }
    Ok(rows)
}
