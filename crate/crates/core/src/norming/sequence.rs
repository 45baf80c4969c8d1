use std::fmt;
use std::sync::Arc;

use crate::dependence::MarginalSpec;
use crate::error::{domain, Result};
use crate::numeric::{fmt_num, log_plus};
use crate::quadrature::{integrate, QuadOptions};

/// Rows summed exactly before switching to the integral approximation.
pub const EXACT_ROWS: usize = 4096;

/// Continuous monotone extension of a norming sequence.
#[derive(Debug, Clone, PartialEq)]
pub enum Sequence {
    /// `scale * t^exp`
    Pow { scale: f64, exp: f64 },
    /// `scale * t^exp * Log(t)^log_exp`
    PowLog { scale: f64, exp: f64, log_exp: f64 },
    /// `intercept + slope * t`
    Affine { intercept: f64, slope: f64 },
    /// `scale * sum_{k <= t} E[min(|X|, a(k))^2]`
    TruncSecondMoment(Arc<TruncMoment>),
}

impl Sequence {
    pub fn pow(scale: f64, exp: f64) -> Self {
        Self::Pow { scale, exp }
    }

    pub fn powlog(scale: f64, exp: f64, log_exp: f64) -> Self {
        Self::PowLog { scale, exp, log_exp }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Self::Pow { scale, exp } => scale * t.powf(*exp),
            Self::PowLog { scale, exp, log_exp } => scale * t.powf(*exp) * log_plus(t).powf(*log_exp),
            Self::Affine { intercept, slope } => intercept + slope * t,
            Self::TruncSecondMoment(m) => m.eval(t),
        }
    }

    fn check_params(&self) -> Result<()> {
        let ok = match self {
            Self::Pow { scale, exp } => *scale > 0.0 && exp.is_finite() && scale.is_finite(),
            Self::PowLog { scale, exp, log_exp } => {
                *scale > 0.0 && scale.is_finite() && exp.is_finite() && log_exp.is_finite()
            }
            Self::Affine { intercept, slope } => {
                intercept.is_finite() && slope.is_finite() && *slope >= 0.0 && intercept + slope > 0.0
            }
            Self::TruncSecondMoment(_) => true,
        };
        if ok {
            Ok(())
        } else {
            Err(domain(format!("invalid sequence parameters: {self}")))
        }
    }

    /// `inf{t >= 0 : self(t) >= y}` for an increasing sequence.
    pub fn inverse(&self, y: f64) -> f64 {
        match self {
            Self::Pow { scale, exp } if *exp > 0.0 => (y.max(0.0) / scale).powf(1.0 / exp),
            Self::Affine { intercept, slope } if *slope > 0.0 => ((y - intercept) / slope).max(0.0),
            _ => self.inverse_by_bisection(y),
        }
    }

    /// Generalized inverse by bisection on a geometrically grown bracket.
    pub fn inverse_by_bisection(&self, y: f64) -> f64 {
        if self.eval(0.0) >= y {
            return 0.0;
        }
        let mut hi = 1.0;
        while self.eval(hi) < y {
            hi *= 2.0;
            if hi > 1e300 {
                return f64::INFINITY;
            }
        }
        let mut lo = if hi > 1.0 { hi / 2.0 } else { 0.0 };
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval(mid) >= y {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Pow { scale, exp } => write!(f, "pow(exp={},scale={})", fmt_num(*exp), fmt_num(*scale)),
            Self::PowLog { scale, exp, log_exp } => write!(
                f,
                "powlog(exp={},log_exp={},scale={})",
                fmt_num(*exp),
                fmt_num(*log_exp),
                fmt_num(*scale)
            ),
            Self::Affine { intercept, slope } => {
                write!(f, "affine(intercept={},slope={})", fmt_num(*intercept), fmt_num(*slope))
            }
            Self::TruncSecondMoment(m) => write!(f, "trunc2(scale={})", fmt_num(m.scale)),
        }
    }
}

/// `s(t) = scale * sum_{k <= t} E[min(|X|, a(k))^2]`, summed exactly for
/// `k <= EXACT_ROWS` and continued by a midpoint-corrected integral.
#[derive(Debug)]
pub struct TruncMoment {
    scale: f64,
    law: MarginalSpec,
    a: Sequence,
    /// `prefix[k] = sum_{j <= k} f(j)`
    prefix: Vec<f64>,
    /// `(t_i, S(t_i))` for `t_i >= EXACT_ROWS`, geometric in `t_i`
    nodes: Vec<(f64, f64)>,
}

impl PartialEq for TruncMoment {
    fn eq(&self, other: &Self) -> bool {
        self.scale == other.scale && self.law == other.law && self.a == other.a
    }
}

impl TruncMoment {
    pub fn new(scale: f64, law: MarginalSpec, a: Sequence) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(domain(format!("trunc2 scale must be positive, got {scale}")));
        }
        law.validate()?;
        if matches!(a, Sequence::TruncSecondMoment(_)) {
            return Err(domain("trunc2 needs an explicit a sequence"));
        }
        let f = |t: f64| law.truncated_second_moment(a.eval(t));
        let mut prefix = Vec::with_capacity(EXACT_ROWS + 1);
        prefix.push(0.0);
        let mut acc = crate::numeric::KahanSum::new();
        for k in 1..=EXACT_ROWS {
            acc.add(f(k as f64));
            prefix.push(acc.value());
        }
        let k = EXACT_ROWS as f64;
        let mut nodes = vec![(k, acc.value())];
        let opts = QuadOptions::default();
        let (mut t, mut total) = (k, acc.value());
        while t < 1e300 {
            let next = 2.0 * t;
            let piece = match integrate(f, t + 0.5, next + 0.5, &opts) {
                Ok(q) if (total + q.value).is_finite() => q.value,
                // past this point s(t) is not representable
                _ => break,
            };
            total += piece;
            t = next;
            nodes.push((t, total));
        }
        Ok(Self {
            scale,
            law,
            a,
            prefix,
            nodes,
        })
    }

    pub fn law(&self) -> &MarginalSpec {
        &self.law
    }

    fn raw(&self, t: f64) -> f64 {
        if t <= 1.0 {
            return self.prefix[1];
        }
        let k = EXACT_ROWS as f64;
        if t <= k {
            let lo = t.floor() as usize;
            let frac = t - lo as f64;
            if frac == 0.0 {
                return self.prefix[lo];
            }
            return self.prefix[lo] + frac * (self.prefix[lo + 1] - self.prefix[lo]);
        }
        // geometric nodes: node i sits at k * 2^i
        let i = ((t / k).log2().floor() as usize).min(self.nodes.len() - 1);
        let (t0, s0) = self.nodes[i];
        if t == t0 {
            return s0;
        }
        let f = |u: f64| self.law.truncated_second_moment(self.a.eval(u));
        let piece = integrate(f, t0 + 0.5, t + 0.5, &QuadOptions::default()).map(|q| q.value);
        s0 + piece.unwrap_or(f64::NAN)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.scale * self.raw(t)
    }
}

/// The three norming sequences with their extensions.
#[derive(Debug, Clone, PartialEq)]
pub struct NormingScheme {
    pub a: Sequence,
    pub b: Sequence,
    pub s: Sequence,
}

impl NormingScheme {
    pub fn new(a: Sequence, b: Sequence, s: Sequence) -> Result<Self> {
        let scheme = Self { a, b, s };
        scheme.validate()?;
        Ok(scheme)
    }

    /// Positivity on `n >= 1`, `a` increasing and `b`, `s` nondecreasing,
    /// checked on a geometric probe grid.
    pub fn validate(&self) -> Result<()> {
        for (name, seq) in [("a", &self.a), ("b", &self.b), ("s", &self.s)] {
            seq.check_params()?;
            let grid = crate::numeric::geomspace(1.0, 1e12, 97);
            let mut prev = 0.0;
            for (i, t) in grid.iter().enumerate() {
                let v = seq.eval(*t);
                if !(v > 0.0) || !v.is_finite() {
                    return Err(domain(format!("{name}({t}) = {v} is not positive and finite")));
                }
                let decreasing = if name == "a" { v <= prev } else { v < prev };
                if i > 0 && decreasing {
                    return Err(domain(format!("{name} is not monotone near t = {t}")));
                }
                prev = v;
            }
        }
        Ok(())
    }

    pub fn a_inverse(&self, y: f64) -> f64 {
        self.a.inverse(y)
    }
}

impl fmt::Display for NormingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a={} b={} s={}", self.a, self.b, self.s)
    }
}
