use crate::dependence::{
    check_weak_mean_domination, Dependence, DominationOutcome, MarginalSpec, TriangularArrayModel,
};
use crate::error::Result;
use crate::numeric::{geomspace, integer_geomspace};

use super::conditions::{
    check_asymptotic_conditions, check_bounded_support, check_condition_a, check_dominating_growth,
    check_second_moment_sum, AsymptoticOptions,
};
use super::integrals::{check_integral_condition_e, check_integral_condition_f};
use super::report::{ConditionEntry, ConditionReport, Verdict};
use super::sequence::NormingScheme;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOptions {
    /// Rows on which the finite-n conditions are evaluated.
    pub n_list: Vec<usize>,
    pub asymptotic: AsymptoticOptions,
    /// Growth exponent for `M_n = O(n^alpha)`.
    pub alpha: f64,
    pub domination_n_max: usize,
    pub domination_t_grid: Vec<f64>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            n_list: integer_geomspace(1.0, 1e6, 25)
                .into_iter()
                .map(|n| n as usize)
                .collect(),
            asymptotic: AsymptoticOptions::default(),
            alpha: 1.0,
            domination_n_max: 64,
            domination_t_grid: geomspace(1e-6, 1e6, 121),
        }
    }
}

fn rows_for(model: &TriangularArrayModel, n_list: &[usize]) -> Vec<usize> {
    match &model.dependence {
        Dependence::DiscreteJoint(rows) => n_list.iter().copied().filter(|n| rows.contains_key(n)).collect(),
        _ => n_list.to_vec(),
    }
}

/// Conditions (a)-(g), plus weak mean domination of the array by `X`.
pub fn check_theorem1_conditions(
    model: &TriangularArrayModel,
    scheme: &NormingScheme,
    dominating: &MarginalSpec,
    opts: &CheckOptions,
) -> Result<ConditionReport> {
    let rows = rows_for(model, &opts.n_list);
    let mut entries = vec![check_condition_a(model, scheme, &rows)?];
    entries.extend(check_asymptotic_conditions(scheme, &["b", "c", "d"], &opts.asymptotic)?);
    entries.push(check_integral_condition_e(scheme, dominating)?);
    entries.push(check_integral_condition_f(scheme, dominating)?);
    entries.push(check_dominating_growth(
        &model.claimed_m,
        opts.alpha,
        &opts.asymptotic.n_probe,
    )?);
    let wmd = check_weak_mean_domination(model, dominating, opts.domination_n_max, &opts.domination_t_grid)?;
    let verdict = match wmd {
        DominationOutcome::Dominated { .. } => Verdict::Satisfied,
        DominationOutcome::Violated { .. } => Verdict::Violated,
    };
    entries.push(ConditionEntry::new("wmd", verdict, wmd.summary()));
    Ok(ConditionReport { entries })
}

/// Conditions (i)-(vi): bounded support, second moments, the asymptotics
/// shared with (b)-(d) and growth of `M_n`.
pub fn check_lemma3_conditions(
    model: &TriangularArrayModel,
    scheme: &NormingScheme,
    opts: &CheckOptions,
) -> Result<ConditionReport> {
    let mut support_rows: Vec<usize> = (1..=100).chain(opts.n_list.iter().copied()).collect();
    support_rows.sort_unstable();
    support_rows.dedup();
    let support_rows = rows_for(model, &support_rows);
    let rows = rows_for(model, &opts.n_list);
    let mut entries = vec![
        check_bounded_support(model, scheme, &support_rows)?,
        check_second_moment_sum(model, scheme, &rows)?,
    ];
    let asym = check_asymptotic_conditions(scheme, &["b", "c", "d"], &opts.asymptotic)?;
    for (entry, id) in asym.into_iter().zip(["iii", "iv", "v"]) {
        entries.push(entry.relabel(id));
    }
    entries.push(check_dominating_growth(&model.claimed_m, opts.alpha, &opts.asymptotic.n_probe)?.relabel("vi"));
    Ok(ConditionReport { entries })
}
