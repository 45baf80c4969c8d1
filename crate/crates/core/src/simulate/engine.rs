use rayon::prelude::*;

use crate::dependence::{Dependence, MarginalSpec};
use crate::error::{Error, Result};
use crate::numeric::KahanSum;
use crate::rng::{stream, Purpose};

use super::plan::{Center, ExperimentPlan, Semantics};

/// Estimated probability (or path statistic) with a 95% half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub value: f64,
    pub half_width: f64,
    pub replications: usize,
}

impl MonteCarloEstimate {
    pub fn from_hits(hits: usize, replications: usize) -> Self {
        let v = hits as f64 / replications as f64;
        Self {
            value: v,
            half_width: 1.96 * (v * (1.0 - v) / replications as f64).sqrt(),
            replications,
        }
    }

    /// `value + k * half_width`.
    pub fn upper(&self, k: f64) -> f64 {
        self.value + k * self.half_width
    }
}

/// Per-coordinate weights and centers of one row.
#[derive(Debug, Clone)]
struct RowTerms {
    weights: Vec<f64>,
    centers: Vec<f64>,
}

/// Row whose marginals describe coordinate `k` of a length-`n` prefix.
fn source_row(plan: &ExperimentPlan, n: usize) -> usize {
    match (plan.semantics, &plan.model.dependence) {
        (Semantics::Sequence, Dependence::DiscreteJoint(_)) => plan.n_max(),
        _ => n,
    }
}

fn coordinate_mean(law: &MarginalSpec) -> Result<f64> {
    law.mean()
        .map_err(|e| Error::NotComputable(format!("mean of {law} needed for centering: {e}")))
}

/// Means `E X_{row,k}` for `k = 1..=len`.
fn centers(plan: &ExperimentPlan, row: usize, len: usize) -> Result<Vec<f64>> {
    if plan.center == Center::None {
        return Ok(vec![0.0; len]);
    }
    let mut cache: Vec<(MarginalSpec, f64)> = Vec::new();
    (1..=len)
        .map(|k| {
            let law = plan.model.marginal(row, k)?;
            if let Some((_, mu)) = cache.iter().find(|(l, _)| *l == law) {
                return Ok(*mu);
            }
            let mu = coordinate_mean(&law)?;
            cache.push((law, mu));
            Ok(mu)
        })
        .collect()
}

/// Laws of the centered, weighted summands `c_{n,k} (X_k - E X_k)` of the
/// length-`n` sum, grouped with multiplicities.
pub fn centered_summand_laws(plan: &ExperimentPlan, n: usize) -> Result<Vec<(MarginalSpec, usize)>> {
    let row = source_row(plan, n);
    let weighted = if row == n {
        plan.model.weighted_row_laws(n)?
    } else {
        (1..=n)
            .map(|k| Ok((plan.model.marginal(row, k)?.scaled(plan.model.weights.get(n, k))?, 1)))
            .collect::<Result<Vec<_>>>()?
    };
    weighted
        .into_iter()
        .map(|(law, count)| {
            if plan.center == Center::None {
                return Ok((law, count));
            }
            let mu = coordinate_mean(&law)?;
            Ok((law.shifted(-mu)?, count))
        })
        .collect()
}

/// Sampling engine for one plan. Every replication draws from its own
/// stream, so results do not depend on how work is scheduled.
#[derive(Debug)]
pub struct Engine<'p> {
    plan: &'p ExperimentPlan,
    /// Sequence semantics: centers of the length-`n_max` draw.
    sequence_centers: Vec<f64>,
}

/// Normalized sums for every replication and schedule point.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRun {
    pub n_schedule: Vec<usize>,
    /// `sums[r][i]` is the normalized sum of replication `r` at
    /// `n_schedule[i]`.
    pub sums: Vec<Vec<f64>>,
}

impl SimulationRun {
    pub fn replications(&self) -> usize {
        self.sums.len()
    }

    pub fn hits(&self, index: usize, epsilon: f64) -> usize {
        self.sums.iter().filter(|path| path[index].abs() > epsilon).count()
    }

    pub fn estimate(&self, index: usize, epsilon: f64) -> MonteCarloEstimate {
        MonteCarloEstimate::from_hits(self.hits(index, epsilon), self.replications())
    }

    /// 95th percentile (nearest rank) over replications of
    /// `sup_{i >= j} |sum_i|`, for each start index `j`.
    pub fn trailing_sup_p95(&self) -> Vec<(usize, f64)> {
        let len = self.n_schedule.len();
        let mut trailing: Vec<Vec<f64>> = vec![Vec::with_capacity(self.replications()); len];
        for path in &self.sums {
            let mut sup = 0.0f64;
            for j in (0..len).rev() {
                sup = sup.max(path[j].abs());
                trailing[j].push(sup);
            }
        }
        trailing
            .into_iter()
            .zip(&self.n_schedule)
            .map(|(mut v, n)| (*n, nearest_rank(&mut v, 0.95)))
            .collect()
    }
}

/// Nearest-rank quantile; sorts `values` in place.
pub fn nearest_rank(values: &mut [f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let rank = ((q * values.len() as f64).ceil() as usize).clamp(1, values.len());
    values[rank - 1]
}

impl<'p> Engine<'p> {
    pub fn new(plan: &'p ExperimentPlan) -> Result<Self> {
        plan.validate()?;
        let sequence_centers = match plan.semantics {
            Semantics::Sequence => centers(plan, plan.n_max(), plan.n_max())?,
            Semantics::Triangular => Vec::new(),
        };
        Ok(Self { plan, sequence_centers })
    }

    pub fn plan(&self) -> &ExperimentPlan {
        self.plan
    }

    fn row_terms(&self, n: usize) -> Result<RowTerms> {
        Ok(RowTerms {
            weights: (1..=n).map(|k| self.plan.model.weights.get(n, k)).collect(),
            centers: centers(self.plan, n, n)?,
        })
    }

    fn weighted_sum(x: &[f64], terms: &RowTerms) -> f64 {
        let mut s = KahanSum::new();
        for ((x, c), mu) in x.iter().zip(&terms.weights).zip(&terms.centers) {
            s.add(c * (x - mu));
        }
        s.value()
    }

    fn row_sum_with(&self, n: usize, replication: usize, terms: &RowTerms) -> Result<f64> {
        let mut rng = stream(self.plan.seed, Purpose::Row, n as u64, replication as u64);
        let mut x = vec![0.0; n];
        self.plan.model.sample_row_into(&mut rng, &mut x)?;
        Ok(Self::weighted_sum(&x, terms) / self.plan.scheme.b.eval(n as f64))
    }

    /// `(1/b_n) sum_k c_{n,k} (X_{n,k} - E X_{n,k})` for a fresh row keyed
    /// by `(seed, n, replication)`.
    pub fn normalized_row_sum(&self, n: usize, replication: usize) -> Result<f64> {
        let terms = self.row_terms(n)?;
        self.row_sum_with(n, replication, &terms)
    }

    /// Fraction of replications with `|normalized sum| > epsilon` at row `n`
    /// (fresh rows regardless of the plan's semantics).
    pub fn estimate_tail(&self, n: usize, epsilon: f64) -> Result<MonteCarloEstimate> {
        let terms = self.row_terms(n)?;
        let sums: Vec<f64> = (0..self.plan.replications)
            .into_par_iter()
            .map(|r| self.row_sum_with(n, r, &terms))
            .collect::<Result<_>>()?;
        let hits = sums.iter().filter(|s| s.abs() > epsilon).count();
        Ok(MonteCarloEstimate::from_hits(hits, sums.len()))
    }

    /// Normalized prefix sums of one sampled sequence at each schedule point.
    pub fn sequence_path(&self, replication: usize) -> Result<Vec<f64>> {
        let plan = self.plan;
        let n_max = plan.n_max();
        let mut rng = stream(plan.seed, Purpose::Sequence, 0, replication as u64);
        let mut x = vec![0.0; n_max];
        plan.model.sample_row_into(&mut rng, &mut x)?;
        let mu = &self.sequence_centers;
        let weights = &plan.model.weights;
        let mut out = Vec::with_capacity(plan.n_schedule.len());
        if weights.depends_on_row() {
            for &n in &plan.n_schedule {
                let s: KahanSum = (0..n).map(|k| weights.get(n, k + 1) * (x[k] - mu[k])).collect();
                out.push(s.value() / plan.scheme.b.eval(n as f64));
            }
        } else {
            let mut s = KahanSum::new();
            let mut k = 0;
            for &n in &plan.n_schedule {
                while k < n {
                    s.add(weights.get(n_max, k + 1) * (x[k] - mu[k]));
                    k += 1;
                }
                out.push(s.value() / plan.scheme.b.eval(n as f64));
            }
        }
        Ok(out)
    }

    /// Runs every replication at every schedule point.
    pub fn run(&self) -> Result<SimulationRun> {
        let plan = self.plan;
        let r = plan.replications;
        let sums = match plan.semantics {
            Semantics::Sequence => (0..r)
                .into_par_iter()
                .map(|rep| self.sequence_path(rep))
                .collect::<Result<Vec<_>>>()?,
            Semantics::Triangular => {
                let mut sums = vec![Vec::with_capacity(plan.n_schedule.len()); r];
                for &n in &plan.n_schedule {
                    let terms = self.row_terms(n)?;
                    let column: Vec<f64> = (0..r)
                        .into_par_iter()
                        .map(|rep| self.row_sum_with(n, rep, &terms))
                        .collect::<Result<_>>()?;
                    for (path, v) in sums.iter_mut().zip(column) {
                        path.push(v);
                    }
                }
                sums
            }
        };
        Ok(SimulationRun {
            n_schedule: plan.n_schedule.clone(),
            sums,
        })
    }
}

/// Convenience wrapper around [`Engine::normalized_row_sum`].
pub fn normalized_row_sum(plan: &ExperimentPlan, n: usize, replication: usize) -> Result<f64> {
    Engine::new(plan)?.normalized_row_sum(n, replication)
}

/// Convenience wrapper around [`Engine::estimate_tail`].
pub fn estimate_tail(plan: &ExperimentPlan, n: usize, epsilon: f64) -> Result<MonteCarloEstimate> {
    Engine::new(plan)?.estimate_tail(n, epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dependence::{TriangularArrayModel, Weights};
    use crate::norming::{NormingScheme, Sequence};
    use crate::simulate::plan::BoundKind;

    fn plan(model: TriangularArrayModel, b: Sequence) -> ExperimentPlan {
        ExperimentPlan {
            name: "t".into(),
            model,
            scheme: NormingScheme::new(Sequence::pow(1.0, 1.0), b, Sequence::pow(1.0, 1.0)).unwrap(),
            epsilons: vec![0.5],
            n_schedule: vec![1, 2, 4, 8, 16, 32],
            replications: 400,
            seed: 7,
            center: Center::SubtractMean,
            semantics: Semantics::Triangular,
            bound: BoundKind::Bennett,
        }
    }

    #[test]
    fn degenerate_rows_center_to_zero() {
        let p = plan(
            TriangularArrayModel::independent(MarginalSpec::point(3.25)),
            Sequence::pow(1.0, 0.0),
        );
        for rep in 0..10 {
            assert_eq!(normalized_row_sum(&p, 8, rep).unwrap(), 0.0);
        }
        assert_eq!(estimate_tail(&p, 8, 1e-300).unwrap().value, 0.0);
    }

    #[test]
    fn zero_weights_give_zero() {
        let m =
            TriangularArrayModel::independent(MarginalSpec::uniform(-1.0, 3.0)).with_weights(Weights::Constant(0.0));
        let p = plan(m, Sequence::pow(1.0, 0.0));
        assert_eq!(normalized_row_sum(&p, 5, 3).unwrap(), 0.0);
    }

    #[test]
    fn single_two_point_is_balanced() {
        let m = TriangularArrayModel::independent(MarginalSpec::two_point(0.0, 2.0, 0.5, 0.5));
        let p = plan(m, Sequence::pow(1.0, 0.0));
        let e = Engine::new(&p).unwrap();
        let vals: Vec<f64> = (0..2000).map(|r| e.normalized_row_sum(1, r).unwrap()).collect();
        assert!(vals.iter().all(|v| v.abs() == 1.0));
        let plus = vals.iter().filter(|v| **v > 0.0).count() as f64;
        // chi-square with one degree of freedom, 0.999 quantile 10.83
        let chi2 = (plus - 1000.0).powi(2) / 1000.0 * 2.0;
        assert!(chi2 < 10.83, "chi2 = {chi2}");
    }

    #[test]
    fn sequence_prefixes_match_direct_sums() {
        let m = TriangularArrayModel::independent(MarginalSpec::uniform(0.0, 1.0));
        let mut p = plan(m, Sequence::pow(1.0, 1.0));
        p.semantics = Semantics::Sequence;
        let e = Engine::new(&p).unwrap();
        let path = e.sequence_path(3).unwrap();
        let mut rng = stream(p.seed, Purpose::Sequence, 0, 3);
        let x = p.model.sample_row(32, &mut rng).unwrap();
        for (i, n) in p.n_schedule.iter().enumerate() {
            let direct: f64 = x[..*n].iter().map(|v| v - 0.5).sum::<f64>() / *n as f64;
            assert!((path[i] - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn run_matches_single_calls() {
        let m = TriangularArrayModel::independent(MarginalSpec::uniform(-1.0, 1.0));
        let p = plan(m, Sequence::pow(1.0, 0.5));
        let e = Engine::new(&p).unwrap();
        let run = e.run().unwrap();
        assert_eq!(run.sums[17][3], e.normalized_row_sum(8, 17).unwrap());
        assert_eq!(run.estimate(3, 0.5), e.estimate_tail(8, 0.5).unwrap());
    }

    #[test]
    fn nearest_rank_values() {
        let mut v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(nearest_rank(&mut v, 0.95), 95.0);
        let mut w = vec![3.0, 1.0, 2.0];
        assert_eq!(nearest_rank(&mut w, 0.95), 3.0);
    }

    #[test]
    fn half_width_formula() {
        let e = MonteCarloEstimate::from_hits(25, 100);
        assert!((e.half_width - 1.96 * (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
    }
}
