use std::fmt;

use crate::dependence::{Dependence, TriangularArrayModel};
use crate::error::{Error, Result};
use crate::norming::NormingScheme;
use crate::numeric::fmt_num;
use crate::rng::RandomSeed;

/// Smallest replication count accepted for probability estimates.
pub const MIN_REPLICATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Center {
    #[default]
    SubtractMean,
    None,
}

impl fmt::Display for Center {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::SubtractMean => "subtract_mean",
            Self::None => "none",
        })
    }
}

/// Fresh row per `n`, or one sequence per replication with growing
/// prefix sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Semantics {
    #[default]
    Triangular,
    Sequence,
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Triangular => "triangular",
            Self::Sequence => "sequence",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum BoundKind {
    #[default]
    Bennett,
    Bernstein,
    FukNagaev {
        lambda: f64,
        p: f64,
    },
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Bennett => f.write_str("bennett"),
            Self::Bernstein => f.write_str("bernstein"),
            Self::FukNagaev { lambda, p } => write!(f, "fuk_nagaev(lambda={},p={})", fmt_num(*lambda), fmt_num(*p)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub name: String,
    pub model: TriangularArrayModel,
    pub scheme: NormingScheme,
    pub epsilons: Vec<f64>,
    pub n_schedule: Vec<usize>,
    pub replications: usize,
    pub seed: RandomSeed,
    pub center: Center,
    pub semantics: Semantics,
    pub bound: BoundKind,
}

/// `2^lo, 2^(lo+1), ..., 2^hi`.
pub fn dyadic_schedule(lo: u32, hi: u32) -> Vec<usize> {
    (lo..=hi).map(|k| 1usize << k).collect()
}

impl ExperimentPlan {
    pub fn n_max(&self) -> usize {
        self.n_schedule.last().copied().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_schedule.is_empty() {
            return Err(Error::Plan("n schedule is empty".into()));
        }
        if self.n_schedule[0] == 0 || self.n_schedule.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Plan(
                "n schedule must be strictly increasing and start at n >= 1".into(),
            ));
        }
        if self.n_max() >= 1 << 32 {
            return Err(Error::Plan("row length exceeds 2^32".into()));
        }
        if self.replications < MIN_REPLICATIONS {
            return Err(Error::Plan(format!(
                "{} replications; probability estimates need at least {MIN_REPLICATIONS}",
                self.replications
            )));
        }
        if self.epsilons.is_empty() || self.epsilons.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
            return Err(Error::Plan("epsilons must be nonempty, positive and finite".into()));
        }
        if let BoundKind::FukNagaev { lambda, p } = self.bound {
            if !(lambda > 0.0) || !(p > 0.0 && p <= 1.0) {
                return Err(Error::Plan(format!(
                    "fuk_nagaev needs lambda > 0 and p in (0, 1], got {lambda}, {p}"
                )));
            }
        }
        self.model.validate().map_err(|e| Error::Plan(e.to_string()))?;
        self.scheme.validate().map_err(|e| Error::Plan(e.to_string()))?;
        if let Dependence::DiscreteJoint(rows) = &self.model.dependence {
            let needed: Vec<usize> = match self.semantics {
                Semantics::Triangular => self.n_schedule.clone(),
                Semantics::Sequence => vec![self.n_max()],
            };
            if let Some(n) = needed.iter().find(|n| !rows.contains_key(n)) {
                return Err(Error::Plan(format!("discrete_joint has no table for row {n}")));
            }
        }
        Ok(())
    }
}
