use crate::dependence::MarginalSpec;
use crate::error::{Error, Result};
use crate::numeric::{fmt_num, log_plus, KahanSum};
use crate::quadrature::{integrate, integrate_pieces, integrate_tail, QuadOptions, TailIntegral, TailOptions};

use super::report::{ConditionEntry, Verdict};
use super::sequence::{NormingScheme, Sequence, EXACT_ROWS};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
/// `Ei(1) = li(e)`.
const LI_E: f64 = 1.895_117_816_355_936_8;

/// Exponential integral `Ei(y)` for `y > 0`.
pub fn exp_integral_ei(y: f64) -> f64 {
    if y <= 40.0 {
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..200 {
            let kf = k as f64;
            term *= y / kf;
            let add = term / kf;
            sum += add;
            if add < 1e-17 * sum {
                break;
            }
        }
        EULER_GAMMA + y.ln() + sum
    } else {
        // asymptotic series, truncated before the terms start to grow
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..60 {
            let next = term * k as f64 / y;
            if next > term || next < 1e-17 * sum {
                break;
            }
            term = next;
            sum += term;
        }
        (y - y.ln()).exp() * sum
    }
}

/// `W(x) = int_0^x du / Log u`.
pub fn log_integral_weight(x: f64) -> f64 {
    let e = std::f64::consts::E;
    if x <= e {
        x.max(0.0)
    } else {
        e + exp_integral_ei(x.ln()) - LI_E
    }
}

/// Value of an improper integral with its truncation diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralValue {
    pub value: f64,
    pub tail_estimate: f64,
    pub last_panel: f64,
    pub recent_ratios: Vec<f64>,
    pub reached: f64,
}

impl IntegralValue {
    fn from_parts(head: f64, tail: Option<TailIntegral>) -> Self {
        match tail {
            None => Self {
                value: head,
                tail_estimate: 0.0,
                last_panel: 0.0,
                recent_ratios: Vec::new(),
                reached: f64::INFINITY,
            },
            Some(t) => Self {
                value: head + t.value,
                tail_estimate: t.tail_estimate,
                last_panel: t.last_panel,
                recent_ratios: t.recent_ratios,
                reached: t.reached,
            },
        }
    }

    /// Satisfied when the extrapolated remainder is under 1% of the value;
    /// violated when the last panels stopped shrinking and still carry at
    /// least 1% of the value.
    pub fn verdict(&self) -> Verdict {
        if !self.value.is_finite() {
            return Verdict::Violated;
        }
        if self.tail_estimate.is_finite() && self.tail_estimate <= 0.01 * self.value {
            return Verdict::Satisfied;
        }
        let growing = self.recent_ratios.len() >= 4 && self.recent_ratios.iter().all(|r| *r >= 1.0);
        if growing && self.last_panel >= 0.01 * self.value {
            Verdict::Violated
        } else {
            Verdict::Inconclusive
        }
    }

    pub fn entry(&self, id: &str) -> ConditionEntry {
        ConditionEntry::new(
            id,
            self.verdict(),
            format!(
                "integral={} tail_estimate={} last_panel={} reached={}",
                fmt_num(self.value),
                fmt_num(self.tail_estimate),
                fmt_num(self.last_panel),
                fmt_num(self.reached)
            ),
        )
    }
}

/// Values of `t` where `t -> P{|X| > a(t)}` jumps or stops being smooth.
fn tail_breaks_in_t(scheme: &NormingScheme, law: &MarginalSpec) -> Vec<f64> {
    law.abs_tail_breakpoints()
        .into_iter()
        .map(|y| scheme.a_inverse(y))
        .collect()
}

fn pieces_with_breaks(lo: f64, hi: f64, breaks: &[f64]) -> Vec<f64> {
    let mut v = vec![lo];
    v.extend(breaks.iter().copied().filter(|b| *b > lo && *b < hi));
    v.push(hi);
    v
}

fn check_law(law: &MarginalSpec) -> Result<()> {
    law.validate()
}

/// Condition (e): `int_0^inf (1/Log u) int_{floor u}^inf Log[a b / s](t)
/// P{a^{-1}(|X|) > t} dt du`, evaluated after exchanging the order of
/// integration as `int_0^inf g(t) W(floor(t) + 1) dt`.
pub fn integral_condition_e(scheme: &NormingScheme, dominating: &MarginalSpec) -> Result<IntegralValue> {
    check_law(dominating)?;
    let g = |t: f64| {
        let tail = dominating.tail_abs(scheme.a.eval(t));
        if tail == 0.0 {
            return 0.0;
        }
        let (a, b, s) = (scheme.a.eval(t), scheme.b.eval(t), scheme.s.eval(t));
        log_plus(a * b / s) * tail
    };
    let t_stop = scheme.a_inverse(dominating.max_abs());
    let breaks = tail_breaks_in_t(scheme, dominating);
    let opts = QuadOptions::default();
    let mut head = KahanSum::new();
    let exact_end = (EXACT_ROWS as f64).min(t_stop.ceil());
    let mut j = 0.0;
    while j < exact_end {
        let hi = (j + 1.0).min(t_stop);
        let q = integrate_pieces(&g, &pieces_with_breaks(j, hi, &breaks), &opts)?;
        head.add(log_integral_weight(j + 1.0) * q.value);
        j += 1.0;
    }
    if t_stop <= EXACT_ROWS as f64 {
        return Ok(IntegralValue::from_parts(head.value(), None));
    }
    // beyond the exact range the floor is smoothed to its midpoint
    let weighted = |t: f64| {
        let v = g(t);
        if v == 0.0 {
            0.0
        } else {
            v * log_integral_weight(t + 0.5)
        }
    };
    let tail = tail_integral(weighted, EXACT_ROWS as f64, t_stop, &breaks)?;
    Ok(IntegralValue::from_parts(head.value(), Some(tail)))
}

/// Doubling-panel tail integral that also honours a finite stop point and
/// interior breakpoints.
fn tail_integral<F: Fn(f64) -> f64>(f: F, start: f64, stop: f64, breaks: &[f64]) -> Result<TailIntegral> {
    let opts = TailOptions::default();
    if stop.is_finite() && stop < opts.upper_limit {
        let q = integrate_pieces(&f, &pieces_with_breaks(start, stop, breaks), &opts.quad)?;
        return Ok(TailIntegral {
            value: q.value,
            reached: stop,
            last_panel: 0.0,
            tail_estimate: 0.0,
            vanished: true,
            recent_ratios: Vec::new(),
        });
    }
    integrate_tail(f, start, &opts)
}

/// `F(m) = int_0^m u / b(u) du`, closed form for power `b`.
struct InnerIntegral<'a> {
    b: &'a Sequence,
    /// `F(0), F(1), ..., F(EXACT_ROWS)` for non-power `b`
    table: Vec<f64>,
}

impl<'a> InnerIntegral<'a> {
    fn new(b: &'a Sequence) -> Result<Self> {
        if let Sequence::Pow { exp, .. } = b {
            if *exp >= 2.0 {
                return Err(Error::NotComputable(format!(
                    "int_0 u/b(u) du diverges at 0 for b exponent {exp}"
                )));
            }
            return Ok(Self { b, table: Vec::new() });
        }
        let f = |u: f64| if u == 0.0 { 0.0 } else { u / b.eval(u) };
        let opts = QuadOptions::default();
        let mut table = vec![0.0];
        let mut acc = KahanSum::new();
        for m in 0..EXACT_ROWS {
            acc.add(integrate(f, m as f64, (m + 1) as f64, &opts)?.value);
            table.push(acc.value());
        }
        Ok(Self { b, table })
    }

    fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match self.b {
            Sequence::Pow { scale, exp } => x.powf(2.0 - exp) / ((2.0 - exp) * scale),
            _ => {
                let k = (x.floor() as usize).min(EXACT_ROWS);
                let rest = x - k as f64;
                if rest == 0.0 {
                    return self.table[k];
                }
                let f = |u: f64| u / self.b.eval(u);
                self.table[k]
                    + integrate(f, k as f64, x, &QuadOptions::default())
                        .map(|q| q.value)
                        .unwrap_or(f64::NAN)
            }
        }
    }
}

/// Condition (f): `int_0^inf P{|X| > t} F(floor(a^{-1}(t))) dt` with
/// `F(m) = int_0^m u / b(u) du`.
pub fn integral_condition_f(scheme: &NormingScheme, dominating: &MarginalSpec) -> Result<IntegralValue> {
    check_law(dominating)?;
    if let Sequence::Pow { exp, .. } = scheme.b {
        if exp >= 2.0 {
            // F(m) is infinite for every m >= 1, so the integral is zero or
            // infinite depending on whether |X| can exceed a(1).
            let mass = dominating.tail_abs(scheme.a.eval(1.0));
            let value = if mass > 0.0 { f64::INFINITY } else { 0.0 };
            return Ok(IntegralValue::from_parts(value, None));
        }
    }
    let inner = InnerIntegral::new(&scheme.b)?;
    let top = dominating.max_abs();
    let breaks = dominating.abs_tail_breakpoints();
    let tail = |t: f64| dominating.tail_abs(t);
    let opts = QuadOptions::default();
    let mut head = KahanSum::new();
    // floor(a^{-1}(t)) = m on (a(m), a(m+1)]
    for m in 1..EXACT_ROWS {
        let lo = scheme.a.eval(m as f64);
        if lo >= top {
            return Ok(IntegralValue::from_parts(head.value(), None));
        }
        let hi = scheme.a.eval((m + 1) as f64).min(top);
        let q = integrate_pieces(&tail, &pieces_with_breaks(lo, hi, &breaks), &opts)?;
        head.add(inner.eval(m as f64) * q.value);
    }
    let start = scheme.a.eval(EXACT_ROWS as f64);
    if start >= top {
        return Ok(IntegralValue::from_parts(head.value(), None));
    }
    let smoothed = |t: f64| {
        let p = tail(t);
        if p == 0.0 {
            0.0
        } else {
            p * inner.eval(scheme.a_inverse(t) - 0.5)
        }
    };
    let rest = tail_integral(smoothed, start, top, &breaks)?;
    Ok(IntegralValue::from_parts(head.value(), Some(rest)))
}

pub fn check_integral_condition_e(scheme: &NormingScheme, dominating: &MarginalSpec) -> Result<ConditionEntry> {
    Ok(integral_condition_e(scheme, dominating)?.entry("e"))
}

pub fn check_integral_condition_f(scheme: &NormingScheme, dominating: &MarginalSpec) -> Result<ConditionEntry> {
    Ok(integral_condition_f(scheme, dominating)?.entry("f"))
}
