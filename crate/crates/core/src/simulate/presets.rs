//! Named experiment configurations: `corollary1-p{p}` for `0 < p < 2` and
//! `theorem2-p{p}` for `1 < p < 2`.

use std::sync::Arc;

use crate::dependence::{Dependence, DominatingSequence, MarginalSpec, TriangularArrayModel};
use crate::error::{Error, Result};
use crate::norming::{AsymptoticOptions, CheckOptions, NormingScheme, Sequence, TruncMoment};
use crate::numeric::geomspace;
use crate::rng::RandomSeed;

use super::plan::{dyadic_schedule, BoundKind, Center, ExperimentPlan, Semantics};

/// Which set of conditions a preset is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckTarget {
    Theorem1,
    Lemma3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub plan: ExperimentPlan,
    /// Law dominating every summand.
    pub dominating: MarginalSpec,
    pub target: CheckTarget,
    pub check: CheckOptions,
}

pub const PRESET_EPSILONS: [f64; 3] = [0.1, 0.5, 1.0];

fn bounded_law() -> MarginalSpec {
    MarginalSpec::uniform(-0.2, 0.2)
}

/// Corollary-style scheme with `delta = 1` and weight bound `C = 1`.
pub fn corollary1_scheme(p: f64, law: &MarginalSpec) -> Result<(NormingScheme, BoundKind)> {
    if !(p > 0.0 && p < 2.0) {
        return Err(Error::Domain(format!("corollary1 presets need 0 < p < 2, got {p}")));
    }
    let delta = 1.0;
    let c = 1.0;
    let b = Sequence::pow(1.0, 1.0 / p);
    if p >= 1.0 {
        let a = Sequence::pow((2.0 - p) / (2.0 * delta * p), 1.0 / p);
        let s = Sequence::pow(c * law.second_moment()?, 1.0);
        return Ok((NormingScheme::new(a, b, s)?, BoundKind::Bennett));
    }
    let a = Sequence::pow(1.0 / (2.0 * delta), 1.0 / p);
    let s = Sequence::pow(
        c * law.abs_moment(2.0 * p)? * (2.0 * delta).powf(2.0 * p - 2.0),
        2.0 / p - 1.0,
    );
    let bound = if p > 0.5 {
        BoundKind::Bennett
    } else {
        BoundKind::FukNagaev {
            lambda: 2.0,
            p: 2.0 * p,
        }
    };
    Ok((NormingScheme::new(a, b, s)?, bound))
}

pub fn corollary1(p: f64, seed: RandomSeed) -> Result<Preset> {
    let law = bounded_law();
    let (scheme, bound) = corollary1_scheme(p, &law)?;
    let model = TriangularArrayModel::independent(law.clone());
    Ok(Preset {
        plan: ExperimentPlan {
            name: format!("corollary1-p{p}"),
            model,
            scheme,
            epsilons: PRESET_EPSILONS.to_vec(),
            n_schedule: dyadic_schedule(4, 14),
            replications: 2000,
            seed,
            center: Center::SubtractMean,
            semantics: Semantics::Triangular,
            bound,
        },
        dominating: law,
        target: CheckTarget::Theorem1,
        check: CheckOptions {
            asymptotic: AsymptoticOptions {
                deltas: vec![1.0],
                ..AsymptoticOptions::default()
            },
            ..CheckOptions::default()
        },
    })
}

pub fn theorem2_scheme(p: f64, law: &MarginalSpec) -> Result<NormingScheme> {
    if !(p > 1.0 && p < 2.0) {
        return Err(Error::Domain(format!("theorem2 presets need 1 < p < 2, got {p}")));
    }
    let a = Sequence::powlog(1.0, 1.0 / p, -1.0 / p);
    let b = Sequence::powlog(1.0, 1.0 / p, 1.0 - 1.0 / p);
    let s = Sequence::TruncSecondMoment(Arc::new(TruncMoment::new(4.0, law.clone(), a.clone())?));
    NormingScheme::new(a, b, s)
}

pub fn theorem2(p: f64, seed: RandomSeed) -> Result<Preset> {
    let law = bounded_law();
    let scheme = theorem2_scheme(p, &law)?;
    let model = TriangularArrayModel::independent(law.clone()).with_dependence(Dependence::FgmNegative { theta: -1.0 });
    debug_assert_eq!(model.claimed_m, DominatingSequence::Constant(1.0));
    Ok(Preset {
        plan: ExperimentPlan {
            name: format!("theorem2-p{p}"),
            model,
            scheme,
            epsilons: PRESET_EPSILONS.to_vec(),
            n_schedule: dyadic_schedule(6, 14),
            replications: 500,
            seed,
            center: Center::SubtractMean,
            semantics: Semantics::Sequence,
            bound: BoundKind::Bennett,
        },
        dominating: law,
        target: CheckTarget::Lemma3,
        check: CheckOptions {
            asymptotic: AsymptoticOptions {
                n_probe: geomspace(1e1, 1e200, 191),
                ..AsymptoticOptions::default()
            },
            ..CheckOptions::default()
        },
    })
}

/// Looks up `corollary1-p{p}` or `theorem2-p{p}`.
pub fn preset(name: &str, seed: RandomSeed) -> Result<Preset> {
    let parse = |rest: &str| {
        rest.parse::<f64>()
            .map_err(|_| Error::Plan(format!("unknown preset {name:?}")))
    };
    if let Some(rest) = name.strip_prefix("corollary1-p") {
        corollary1(parse(rest)?, seed)
    } else if let Some(rest) = name.strip_prefix("theorem2-p") {
        theorem2(parse(rest)?, seed)
    } else {
        Err(Error::Plan(format!(
            "unknown preset {name:?}; expected corollary1-p<p> or theorem2-p<p>"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_parse() {
        assert_eq!(preset("corollary1-p1.5", 1).unwrap().plan.name, "corollary1-p1.5");
        assert_eq!(preset("theorem2-p1.5", 1).unwrap().plan.semantics, Semantics::Sequence);
        assert!(preset("theorem2-p0.5", 1).is_err());
        assert!(preset("nope", 1).is_err());
        assert!(matches!(
            preset("corollary1-p0.25", 1).unwrap().plan.bound,
            BoundKind::FukNagaev { .. }
        ));
    }

    #[test]
    fn presets_validate() {
        for name in [
            "corollary1-p0.25",
            "corollary1-p0.75",
            "corollary1-p1",
            "corollary1-p1.5",
            "theorem2-p1.5",
        ] {
            preset(name, 42).unwrap().plan.validate().unwrap();
        }
    }

    #[test]
    fn p_at_least_one_scheme() {
        let (s, _) = corollary1_scheme(1.5, &bounded_law()).unwrap();
        let n = 1000.0;
        assert!((s.a.eval(n) - n.powf(2.0 / 3.0) / 6.0).abs() < 1e-9);
        assert!((s.s.eval(n) - n * 0.04 / 3.0).abs() < 1e-9);
    }
}
