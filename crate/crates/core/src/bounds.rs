//! Exponential tail bounds for row sums of END arrays.
//!
//! Every bound is evaluated in log-space. `log(1 + x)` always goes through
//! `ln_1p`, and the Bennett exponent is rewritten as
//! `-(s/a^2) * ((1 + x) ln(1 + x) - x)` with `x = eps * a / s` so it stays
//! finite for `x` up to the top of the `f64` range.

use crate::error::{domain, Result};
use crate::numeric::{bennett_phi, softplus};

/// Inputs shared by the Bennett- and Bernstein-type bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    /// Deviation threshold.
    pub epsilon: f64,
    /// Almost-sure upper bound on each summand.
    pub a: f64,
    /// Bound on the sum of second moments.
    pub s: f64,
    /// Dominating constant of the row, at least 1.
    pub m: f64,
    /// Row length. Carried for reporting; none of these two bounds use it.
    pub n_terms: u64,
}

impl BoundInputs {
    pub fn new(epsilon: f64, a: f64, s: f64, m: f64) -> Self {
        Self {
            epsilon,
            a,
            s,
            m,
            n_terms: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        // eps = 0 is the (trivial) closed end of the range; the bound is m there.
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(domain(format!("epsilon must be finite and >= 0, got {}", self.epsilon)));
        }
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(domain(format!("a must be finite and > 0, got {}", self.a)));
        }
        if !(self.s > 0.0 && self.s.is_finite()) {
            return Err(domain(format!("s must be finite and > 0, got {}", self.s)));
        }
        if !(self.m >= 1.0 && self.m.is_finite()) {
            return Err(domain(format!("m must be finite and >= 1, got {}", self.m)));
        }
        Ok(())
    }
}

/// A probability upper bound carried in log-space.
#[derive(Debug, Clone, PartialEq)]
pub struct TailBoundResult {
    pub log_bound: f64,
    /// `exp(log_bound)`, not clamped; may exceed 1.
    pub bound: f64,
    /// Additive pieces of the exponent (or of the bound, for Fuk–Nagaev).
    pub exponent_terms: Vec<(&'static str, f64)>,
}

impl TailBoundResult {
    /// `m * exp(exponent)`, with the product formed directly so that
    /// `exponent = 0` returns `m` exactly.
    fn from_exponent(m: f64, exponent: f64, exponent_terms: Vec<(&'static str, f64)>) -> Self {
        Self {
            log_bound: m.ln() + exponent,
            bound: m * exponent.exp(),
            exponent_terms,
        }
    }

    /// The bound as a probability, clamped to `[0, 1]`.
    pub fn probability(&self) -> f64 {
        self.bound.clamp(0.0, 1.0)
    }

    pub fn term(&self, label: &str) -> Option<f64> {
        self.exponent_terms.iter().find(|(l, _)| *l == label).map(|&(_, v)| v)
    }
}

/// One-sided Bennett-type bound on `P{sum X > eps}`:
/// `m * exp[eps/a - (eps/a + s/a^2) log(1 + eps a / s)]`.
pub fn bennett_bound(inputs: &BoundInputs) -> Result<TailBoundResult> {
    inputs.validate()?;
    let BoundInputs { epsilon, a, s, m, .. } = *inputs;
    let x = epsilon * a / s;
    let scale = (s / a) / a;
    let eps_over_a = epsilon / a;
    let log1p_x = if x.is_finite() {
        x.ln_1p()
    } else {
        epsilon.ln() + a.ln() - s.ln()
    };
    let log_term = -(eps_over_a + scale) * log1p_x;
    // phi form near zero, where the two pieces cancel; direct form for large
    // x, where s/a^2 may underflow against an infinite phi(x)
    let exponent = if x < 1e3 {
        -scale * bennett_phi(x)
    } else {
        eps_over_a + log_term
    };
    Ok(TailBoundResult::from_exponent(
        m,
        exponent,
        vec![
            ("eps_over_a", eps_over_a),
            ("log1p_term", log_term),
            ("exponent", exponent),
        ],
    ))
}

/// Bernstein-type bound `m * exp(-eps^2 / (2 (eps a + s)))`.
pub fn bernstein_bound(inputs: &BoundInputs) -> Result<TailBoundResult> {
    inputs.validate()?;
    let BoundInputs { epsilon, a, s, m, .. } = *inputs;
    let exponent = if epsilon == 0.0 {
        0.0
    } else {
        // eps^2 / (2 (eps a + s)) written to avoid squaring eps.
        -epsilon / (2.0 * (a + s / epsilon))
    };
    Ok(TailBoundResult::from_exponent(
        m,
        exponent,
        vec![("exponent", exponent)],
    ))
}

/// `h(x) = 2 + x/(1+x) - 2(1 - 1/x) log(1+x)`: negative and nonincreasing on
/// `[5, inf)`, where the Bennett bound beats the Bernstein bound.
pub fn comparison_gap(x: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(domain(format!("comparison_gap needs finite x > 0, got {x}")));
    }
    Ok(2.0 + x / (1.0 + x) - 2.0 * (1.0 - 1.0 / x) * x.ln_1p())
}

/// Tail function `t -> P{|X_k| > t}` of one summand.
pub type TailFn<'a> = Box<dyn Fn(f64) -> f64 + Send + Sync + 'a>;

/// Inputs of the Fuk–Nagaev-type bound.
pub struct FukNagaevInputs<'a> {
    pub epsilon: f64,
    pub lambda: f64,
    /// Moment order, in `(0, 1]`.
    pub p: f64,
    pub m: f64,
    /// `sum_k E|X_k|^p`.
    pub abs_moment_sum: f64,
    pub marginal_tails: Vec<TailFn<'a>>,
}

impl std::fmt::Debug for FukNagaevInputs<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FukNagaevInputs")
            .field("epsilon", &self.epsilon)
            .field("lambda", &self.lambda)
            .field("p", &self.p)
            .field("m", &self.m)
            .field("abs_moment_sum", &self.abs_moment_sum)
            .field("marginal_tails", &self.marginal_tails.len())
            .finish()
    }
}

impl FukNagaevInputs<'_> {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(domain(format!("epsilon must be finite and > 0, got {}", self.epsilon)));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(domain(format!("lambda must be finite and > 0, got {}", self.lambda)));
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(domain(format!("p must lie in (0, 1], got {}", self.p)));
        }
        if !(self.m >= 1.0 && self.m.is_finite()) {
            return Err(domain(format!("m must be finite and >= 1, got {}", self.m)));
        }
        if !(self.abs_moment_sum > 0.0 && self.abs_moment_sum.is_finite()) {
            return Err(domain(format!(
                "absolute moment sum must be finite and > 0, got {}",
                self.abs_moment_sum
            )));
        }
        Ok(())
    }

    fn tail_sum(&self, t: f64) -> Result<f64> {
        let mut acc = 0.0;
        for (k, tail) in self.marginal_tails.iter().enumerate() {
            let v = tail(t);
            if !(0.0..=1.0).contains(&v) {
                return Err(domain(format!("marginal tail {k} returned {v} at t = {t}")));
            }
            acc += v;
        }
        Ok(acc)
    }
}

/// Two-sided Fuk–Nagaev-type bound with truncation level `eps / lambda`.
pub fn fuk_nagaev_bound(inputs: &FukNagaevInputs<'_>) -> Result<TailBoundResult> {
    inputs.validate()?;
    fuk_nagaev_general(inputs, inputs.epsilon / inputs.lambda)
}

/// The bound before specialising the truncation level:
/// `sum_k P{|X_k| > delta} + 2 m exp[r - r log(1 + eps delta^(p-1) / S)]`
/// with `r = eps / delta`. The `lambda` field is ignored.
pub fn fuk_nagaev_general(inputs: &FukNagaevInputs<'_>, delta: f64) -> Result<TailBoundResult> {
    inputs.validate()?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(domain(format!("delta must be finite and > 0, got {delta}")));
    }
    let eps = inputs.epsilon;
    let ratio = eps / delta;
    // log(eps * delta^(p-1) / S), kept in log form
    let log_y = eps.ln() + (inputs.p - 1.0) * delta.ln() - inputs.abs_moment_sum.ln();
    let log_second = std::f64::consts::LN_2 + inputs.m.ln() + ratio - ratio * softplus(log_y);
    let tail_sum = inputs.tail_sum(delta)?;
    let second = log_second.exp();
    let total = tail_sum + second;
    let log_bound = if tail_sum > 0.0 {
        // log(tail_sum + e^log_second)
        let hi = tail_sum.ln().max(log_second);
        hi + ((tail_sum.ln() - hi).exp() + (log_second - hi).exp()).ln()
    } else {
        log_second
    };
    Ok(TailBoundResult {
        log_bound,
        bound: total,
        exponent_terms: vec![("tail_sum", tail_sum), ("log_second_term", log_second)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_tails<'a>(n: usize) -> Vec<TailFn<'a>> {
        (0..n).map(|_| Box::new(|_t: f64| 0.0) as TailFn<'a>).collect()
    }

    #[test]
    fn bennett_reference_value() {
        // exp(1 - 2 log 2) = e / 4
        let r = bennett_bound(&BoundInputs::new(1.0, 1.0, 1.0, 1.0)).unwrap();
        assert!((r.bound - 0.679_570_457_114_761_3).abs() < 1e-15);
        let r3 = bennett_bound(&BoundInputs::new(1.0, 1.0, 1.0, 3.0)).unwrap();
        assert!((r3.bound - 3.0 * r.bound).abs() < 1e-15);
    }

    #[test]
    fn bennett_exponent_terms_add_up() {
        let r = bennett_bound(&BoundInputs::new(2.5, 0.7, 3.1, 1.0)).unwrap();
        let sum = r.term("eps_over_a").unwrap() + r.term("log1p_term").unwrap();
        assert!((sum - r.log_bound).abs() < 1e-12);
    }

    #[test]
    fn bennett_tends_to_m_at_zero() {
        let r = bennett_bound(&BoundInputs::new(1e-12, 1.0, 1.0, 2.0)).unwrap();
        assert!((r.bound - 2.0).abs() < 1e-12);
        let r0 = bennett_bound(&BoundInputs::new(0.0, 1.0, 1.0, 2.0)).unwrap();
        assert_eq!(r0.bound, 2.0);
    }

    #[test]
    fn bennett_finite_for_huge_ratio() {
        let r = bennett_bound(&BoundInputs::new(1e300, 1.0, 1.0, 1.0)).unwrap();
        assert!(r.log_bound.is_finite() && r.log_bound < 0.0);
        let r = bennett_bound(&BoundInputs::new(1e150, 1e150, 1e-300, 1.0)).unwrap();
        assert!(!r.log_bound.is_nan());
    }

    #[test]
    fn bernstein_reference_values() {
        let r = bernstein_bound(&BoundInputs::new(1.0, 1.0, 1.0, 1.0)).unwrap();
        assert!((r.bound - (-0.25f64).exp()).abs() < 1e-15);
        let r0 = bernstein_bound(&BoundInputs::new(0.0, 1.0, 1.0, 4.0)).unwrap();
        assert_eq!(r0.bound, 4.0);
    }

    #[test]
    fn crossover_at_five() {
        let i = BoundInputs::new(5.0, 1.0, 1.0, 1.0);
        let bern = bernstein_bound(&i).unwrap();
        let benn = bennett_bound(&i).unwrap();
        assert!((bern.log_bound + 25.0 / 12.0).abs() < 1e-14);
        assert!((benn.log_bound - (5.0 - 6.0 * 6f64.ln())).abs() < 1e-13);
        assert!(benn.log_bound < bern.log_bound);
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(bennett_bound(&BoundInputs::new(-1.0, 1.0, 1.0, 1.0)).is_err());
        assert!(bennett_bound(&BoundInputs::new(1.0, 0.0, 1.0, 1.0)).is_err());
        assert!(bennett_bound(&BoundInputs::new(1.0, 1.0, -1.0, 1.0)).is_err());
        assert!(bernstein_bound(&BoundInputs::new(1.0, 1.0, 1.0, 0.5)).is_err());
        assert!(bennett_bound(&BoundInputs::new(f64::NAN, 1.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn comparison_gap_values() {
        // mpmath, 30 digits: h(5) = -0.03348181743155466...
        let h5 = comparison_gap(5.0).unwrap();
        assert!((h5 - (-0.033_481_817_431_554_67)).abs() < 1e-14, "{h5}");
        assert!(comparison_gap(6.0).unwrap() <= h5);
        let x = 1e6;
        let ratio = comparison_gap(x).unwrap() / (-2.0 * f64::ln(x));
        assert!((0.85..=1.0).contains(&ratio));
        assert!(comparison_gap(0.0).is_err());
        assert!(comparison_gap(-1.0).is_err());
        // still evaluated below 1 where 1 - 1/x < 0
        assert!(comparison_gap(0.5).unwrap().is_finite());
    }

    #[test]
    fn fuk_nagaev_reference_value() {
        // 2e (1 + 1)^-1 = e
        let inputs = FukNagaevInputs {
            epsilon: 1.0,
            lambda: 1.0,
            p: 1.0,
            m: 1.0,
            abs_moment_sum: 1.0,
            marginal_tails: zero_tails(3),
        };
        let r = fuk_nagaev_bound(&inputs).unwrap();
        assert!((r.bound - std::f64::consts::E).abs() < 1e-14);
        assert_eq!(r.probability(), 1.0);
    }

    #[test]
    fn fuk_nagaev_specialisation_is_exact() {
        let tails: Vec<TailFn> = vec![
            Box::new(|t: f64| (0.3 / (1.0 + t)).min(1.0)),
            Box::new(|t: f64| (-t).exp()),
        ];
        let inputs = FukNagaevInputs {
            epsilon: 2.7,
            lambda: 3.3,
            p: 0.6,
            m: 1.7,
            abs_moment_sum: 0.9,
            marginal_tails: tails,
        };
        let a = fuk_nagaev_bound(&inputs).unwrap();
        let b = fuk_nagaev_general(&inputs, inputs.epsilon / inputs.lambda).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fuk_nagaev_general_reference() {
        // p = 1, delta = eps, S = 1, m = 1: 2 exp[1 - log(1 + eps)]
        for eps in [0.5, 1.0, 4.0] {
            let inputs = FukNagaevInputs {
                epsilon: eps,
                lambda: 1.0,
                p: 1.0,
                m: 1.0,
                abs_moment_sum: 1.0,
                marginal_tails: zero_tails(2),
            };
            let r = fuk_nagaev_general(&inputs, eps).unwrap();
            let expected = 2.0 * (1.0 - f64::ln_1p(eps)).exp();
            assert!((r.bound - expected).abs() < 1e-14 * expected);
        }
    }

    #[test]
    fn fuk_nagaev_m_scales_second_term_only() {
        let mk = |m: f64| FukNagaevInputs {
            epsilon: 3.0,
            lambda: 2.0,
            p: 0.5,
            m,
            abs_moment_sum: 2.0,
            marginal_tails: vec![Box::new(|t: f64| if t < 2.0 { 0.1 } else { 0.0 })],
        };
        let r1 = fuk_nagaev_bound(&mk(1.0)).unwrap();
        let r2 = fuk_nagaev_bound(&mk(2.0)).unwrap();
        assert_eq!(r1.term("tail_sum"), r2.term("tail_sum"));
        let s1 = r1.term("log_second_term").unwrap().exp();
        let s2 = r2.term("log_second_term").unwrap().exp();
        assert!((s2 - 2.0 * s1).abs() < 1e-14);
    }

    #[test]
    fn fuk_nagaev_vanishes_for_large_eps() {
        let inputs = FukNagaevInputs {
            epsilon: 1e12,
            lambda: 3.0,
            p: 1.0,
            m: 1.0,
            abs_moment_sum: 1.0,
            marginal_tails: vec![Box::new(|t: f64| if t < 1.0 { 1.0 } else { 0.0 })],
        };
        assert!(fuk_nagaev_bound(&inputs).unwrap().bound < 1e-20);
    }

    #[test]
    fn fuk_nagaev_rejects_bad_p() {
        for p in [0.0, 1.5, -0.2] {
            let inputs = FukNagaevInputs {
                epsilon: 1.0,
                lambda: 1.0,
                p,
                m: 1.0,
                abs_moment_sum: 1.0,
                marginal_tails: zero_tails(1),
            };
            assert!(fuk_nagaev_bound(&inputs).is_err());
        }
    }
}
