use crate::dependence::{DominatingSequence, MarginalSpec, TriangularArrayModel};
use crate::error::{domain, Result};
use crate::numeric::{fmt_num, log_plus, stable_sum};
use crate::quadrature::{integrate_pieces, QuadOptions};

use super::report::{ConditionEntry, Verdict};
use super::sequence::NormingScheme;

/// Relative slack for `LHS <= s_n` in the closed-form comparison.
pub const CLOSED_FORM_SLACK: f64 = 1e-9;
/// Relative slack for the quadrature-based comparison.
pub const QUADRATURE_SLACK: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticOptions {
    pub n_probe: Vec<f64>,
    pub deltas: Vec<f64>,
    pub margin: f64,
}

impl Default for AsymptoticOptions {
    fn default() -> Self {
        Self {
            n_probe: crate::numeric::geomspace(1e1, 1e9, 73),
            deltas: vec![0.1, 1.0, 10.0],
            margin: 0.05,
        }
    }
}

fn worst_ratio(lhs: &[(usize, f64, f64)]) -> (usize, f64) {
    lhs.iter()
        .map(|(n, l, s)| (*n, l / s))
        .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc })
}

fn compare(id: &str, rows: Vec<(usize, f64, f64)>, slack: f64, form: &str) -> ConditionEntry {
    let (n, r) = worst_ratio(&rows);
    let ok = rows.iter().all(|(_, l, s)| *l <= s * (1.0 + slack));
    let verdict = if ok { Verdict::Satisfied } else { Verdict::Violated };
    ConditionEntry::new(
        id,
        verdict,
        format!("{form}: max LHS/RHS = {} at n={n} over {} rows", fmt_num(r), rows.len()),
    )
}

fn check_rows(model: &TriangularArrayModel, n_list: &[usize]) -> Result<()> {
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(domain("row list must be nonempty and contain only n >= 1"));
    }
    model.validate()
}

/// `sum_k E[min(|c_{n,k} X_{n,k}|, a_n)^2] <= s_n` on every listed row.
pub fn check_condition_a(
    model: &TriangularArrayModel,
    scheme: &NormingScheme,
    n_list: &[usize],
) -> Result<ConditionEntry> {
    check_rows(model, n_list)?;
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let a = scheme.a.eval(n as f64);
        let laws = model.weighted_row_laws(n)?;
        let lhs = stable_sum(laws.iter().map(|(m, c)| *c as f64 * m.truncated_second_moment(a)));
        rows.push((n, lhs, scheme.s.eval(n as f64)));
    }
    Ok(compare("a", rows, CLOSED_FORM_SLACK, "closed form"))
}

/// `sum_k int_0^{a_n} u P{|c_{n,k} X_{n,k}| > u} du <= s_n / 2`.
pub fn check_condition_a_integral_form(
    model: &TriangularArrayModel,
    scheme: &NormingScheme,
    n_list: &[usize],
) -> Result<ConditionEntry> {
    check_rows(model, n_list)?;
    let opts = QuadOptions::default();
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let a = scheme.a.eval(n as f64);
        let laws = model.weighted_row_laws(n)?;
        let mut terms = Vec::with_capacity(laws.len());
        for (m, c) in &laws {
            terms.push(*c as f64 * tail_moment_integral(m, a, &opts)?);
        }
        rows.push((n, stable_sum(terms), 0.5 * scheme.s.eval(n as f64)));
    }
    Ok(compare("a", rows, QUADRATURE_SLACK, "integral form"))
}

/// `int_0^a u P{|X| > u} du` by quadrature broken at the tail's kinks.
pub fn tail_moment_integral(law: &MarginalSpec, a: f64, opts: &QuadOptions) -> Result<f64> {
    let mut breaks = vec![0.0];
    breaks.extend(law.abs_tail_breakpoints().into_iter().filter(|b| *b < a));
    // decades beyond the last breakpoint, so long flat stretches are split
    let mut t = breaks.last().copied().filter(|b| *b > 0.0).unwrap_or(a.min(1.0)) * 10.0;
    while t < a {
        breaks.push(t);
        t *= 10.0;
    }
    breaks.push(a);
    Ok(integrate_pieces(&|u: f64| u * law.tail_abs(u), &breaks, opts)?.value)
}

fn last_half(v: &[f64]) -> &[f64] {
    &v[v.len() / 2..]
}

/// Rule for `o(1)` claims on a finite grid.
fn vanishing_verdict(values: &[f64]) -> Verdict {
    let first = values[0];
    let last = *values.last().unwrap();
    let tail = last_half(values);
    let nonincreasing = tail.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    let nondecreasing = tail.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12));
    if values.iter().any(|v| !v.is_finite()) {
        Verdict::Inconclusive
    } else if nonincreasing && last < 1e-2 * first {
        Verdict::Satisfied
    } else if nondecreasing && last >= first {
        Verdict::Violated
    } else {
        Verdict::Inconclusive
    }
}

/// Proxy of condition (d) at one `delta`.
pub fn condition_d_quantity(scheme: &NormingScheme, n: f64, delta: f64) -> f64 {
    let (a, b, s) = (scheme.a.eval(n), scheme.b.eval(n), scheme.s.eval(n));
    // Log x = max(ln x, 1), taken from logarithms so n^delta cannot overflow
    let log_from_ln = |l: f64| l.max(1.0);
    b * log_from_ln(a.ln() + b.ln() - s.ln()) / (a * log_from_ln(delta * n.ln()))
}

/// Finite-grid verdicts for (b) `s/(ab) -> 0`, (c) `s/(a^2 Log n) -> 0`
/// and (d) `liminf b Log(ab/s) / (a Log n^delta) > 1`.
pub fn check_asymptotic_conditions(
    scheme: &NormingScheme,
    ids: &[&str],
    opts: &AsymptoticOptions,
) -> Result<Vec<ConditionEntry>> {
    let grid = &opts.n_probe;
    if grid.len() < 4 || grid.iter().any(|n| !(*n >= 1.0)) {
        return Err(domain("probe grid needs at least 4 points >= 1"));
    }
    if opts.deltas.is_empty() || opts.deltas.iter().any(|d| !(*d > 0.0)) {
        return Err(domain("delta list must be nonempty and positive"));
    }
    let decades = (grid[grid.len() - 1] / grid[0]).log10();
    let span = format!("{:.1} decades", decades);
    let mut out = Vec::new();
    for id in ids {
        let entry = match *id {
            "b" | "c" => {
                let vals: Vec<f64> = grid
                    .iter()
                    .map(|&n| {
                        let (a, b, s) = (scheme.a.eval(n), scheme.b.eval(n), scheme.s.eval(n));
                        if *id == "b" {
                            s / (a * b)
                        } else {
                            s / (a * a * log_plus(n))
                        }
                    })
                    .collect();
                let v = vanishing_verdict(&vals);
                ConditionEntry::new(
                    *id,
                    v,
                    format!(
                        "first={} last={} over {span}",
                        fmt_num(vals[0]),
                        fmt_num(*vals.last().unwrap())
                    ),
                )
            }
            "d" => {
                let mut verdict = Verdict::Satisfied;
                let mut parts = Vec::new();
                for &delta in &opts.deltas {
                    let vals: Vec<f64> = grid.iter().map(|&n| condition_d_quantity(scheme, n, delta)).collect();
                    let tail = last_half(&vals);
                    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
                    let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let v = if vals.iter().any(|x| x.is_nan()) {
                        Verdict::Inconclusive
                    } else if lo > 1.0 + opts.margin {
                        Verdict::Satisfied
                    } else if hi < 1.0 - opts.margin {
                        Verdict::Violated
                    } else {
                        Verdict::Inconclusive
                    };
                    verdict = verdict.worst(v);
                    parts.push(format!("delta={}:min={}", fmt_num(delta), fmt_num(lo)));
                }
                ConditionEntry::new(
                    "d",
                    verdict,
                    format!("{} (margin {}, {span})", parts.join(" "), fmt_num(opts.margin)),
                )
            }
            other => return Err(domain(format!("unknown asymptotic condition {other:?}"))),
        };
        out.push(entry);
    }
    Ok(out)
}

/// `M_n = O(n^alpha)`: the ratio over the last decade of the grid may not
/// exceed twice its supremum over the earlier points.
pub fn check_dominating_growth(m_seq: &DominatingSequence, alpha: f64, n_probe: &[f64]) -> Result<ConditionEntry> {
    if !(alpha > 0.0) {
        return Err(domain(format!("alpha must be > 0, got {alpha}")));
    }
    if n_probe.len() < 2 {
        return Err(domain("probe grid needs at least 2 points"));
    }
    let top = n_probe[n_probe.len() - 1];
    let ratios: Vec<(f64, f64)> = n_probe.iter().map(|&n| (n, m_seq.value(n) / n.powf(alpha))).collect();
    let split = ratios
        .iter()
        .position(|(n, _)| *n > top / 10.0)
        .unwrap_or(ratios.len() - 1)
        .max(1);
    let early = ratios[..split].iter().map(|r| r.1).fold(0.0, f64::max);
    let late = ratios[split..].iter().map(|r| r.1).fold(0.0, f64::max);
    let finite = ratios.iter().all(|r| r.1.is_finite());
    let verdict = if finite && late <= 2.0 * early {
        Verdict::Satisfied
    } else {
        Verdict::Violated
    };
    Ok(ConditionEntry::new(
        "g",
        verdict,
        format!(
            "sup M_n/n^{} = {} early, {} in last decade",
            fmt_num(alpha),
            fmt_num(early),
            fmt_num(late)
        ),
    ))
}

/// `|c_{n,k} X_{n,k}| <= a_n` almost surely on every listed row.
pub fn check_bounded_support(
    model: &TriangularArrayModel,
    scheme: &NormingScheme,
    n_list: &[usize],
) -> Result<ConditionEntry> {
    check_rows(model, n_list)?;
    let mut worst = (0usize, f64::NEG_INFINITY);
    for &n in n_list {
        let a = scheme.a.eval(n as f64);
        let bound = model
            .weighted_row_laws(n)?
            .iter()
            .map(|(m, _)| m.max_abs())
            .fold(0.0, f64::max);
        if bound / a > worst.1 {
            worst = (n, bound / a);
        }
    }
    let verdict = if worst.1 <= 1.0 {
        Verdict::Satisfied
    } else {
        Verdict::Violated
    };
    Ok(ConditionEntry::new(
        "i",
        verdict,
        format!("max ess sup |X|/a_n = {} at n={}", fmt_num(worst.1), worst.0),
    ))
}

/// `sum_k E[(c_{n,k} X_{n,k})^2] <= s_n` on every listed row.
pub fn check_second_moment_sum(
    model: &TriangularArrayModel,
    scheme: &NormingScheme,
    n_list: &[usize],
) -> Result<ConditionEntry> {
    check_rows(model, n_list)?;
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let mut terms = Vec::new();
        for (m, c) in model.weighted_row_laws(n)? {
            terms.push(c as f64 * m.second_moment()?);
        }
        rows.push((n, stable_sum(terms), scheme.s.eval(n as f64)));
    }
    Ok(compare("ii", rows, CLOSED_FORM_SLACK, "second moments"))
}
