//! Norming sequences and numeric checks of the conditions behind the
//! complete-convergence results.

mod conditions;
mod integrals;
mod report;
mod sequence;
mod theorem;

pub use crate::numeric::log_plus;
pub use conditions::{
    check_asymptotic_conditions, check_bounded_support, check_condition_a, check_condition_a_integral_form,
    check_dominating_growth, check_second_moment_sum, condition_d_quantity, tail_moment_integral, AsymptoticOptions,
    CLOSED_FORM_SLACK, QUADRATURE_SLACK,
};
pub use integrals::{
    check_integral_condition_e, check_integral_condition_f, exp_integral_ei, integral_condition_e,
    integral_condition_f, log_integral_weight, IntegralValue,
};
pub use report::{ConditionEntry, ConditionReport, Verdict};
pub use sequence::{NormingScheme, Sequence, TruncMoment, EXACT_ROWS};
pub use theorem::{check_lemma3_conditions, check_theorem1_conditions, CheckOptions};
