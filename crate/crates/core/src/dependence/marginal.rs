use std::fmt;

use statrs::function::erf::erfc;
use statrs::function::gamma::gamma;

use crate::error::{domain, Error, Result};
use crate::numeric::{fmt_num, stable_sum};
use crate::quadrature::{integrate_pieces, integrate_tail, QuadOptions, TailOptions};

/// Law of a single array entry (or of the dominating variable `X`).
#[derive(Debug, Clone, PartialEq)]
pub enum MarginalSpec {
    TwoPoint {
        values: [f64; 2],
        probs: [f64; 2],
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// Support `[scale, inf)`, `P{X > t} = (scale / t)^shape`.
    Pareto {
        shape: f64,
        scale: f64,
    },
    Normal {
        mean: f64,
        sd: f64,
    },
    Discrete {
        atoms: Vec<f64>,
        probs: Vec<f64>,
    },
}

const PROB_TOL: f64 = 1e-12;

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Acklam's rational approximation refined by one Halley step.
fn std_normal_quantile(u: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    if u <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if u >= 1.0 {
        return f64::INFINITY;
    }
    let p_low = 0.024_25;
    let x = if u < p_low {
        let q = (-2.0 * u.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if u <= 1.0 - p_low {
        let q = u - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - u).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let e = std_normal_cdf(x) - u;
    let step = e * (2.0 * std::f64::consts::PI).sqrt() * (0.5 * x * x).exp();
    x - step / (1.0 + 0.5 * x * step)
}

/// `a^2 p`, zero whenever `p` is, even if `a^2` overflows.
fn square_times(a: f64, p: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        a * a * p
    }
}

pub(crate) fn normal_cdf(z: f64) -> f64 {
    std_normal_cdf(z)
}

impl MarginalSpec {
    pub fn two_point(x0: f64, x1: f64, p0: f64, p1: f64) -> Self {
        Self::TwoPoint {
            values: [x0, x1],
            probs: [p0, p1],
        }
    }

    pub fn uniform(lo: f64, hi: f64) -> Self {
        Self::Uniform { lo, hi }
    }

    pub fn validate(&self) -> Result<()> {
        let check_probs = |atoms: &[f64], probs: &[f64]| -> Result<()> {
            if atoms.len() != probs.len() || atoms.is_empty() {
                return Err(domain("atoms and probabilities must be nonempty and of equal length"));
            }
            if atoms.iter().any(|x| !x.is_finite()) {
                return Err(domain("atoms must be finite"));
            }
            if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(domain("probabilities must lie in [0, 1]"));
            }
            let total = stable_sum(probs.iter().copied());
            if (total - 1.0).abs() > PROB_TOL {
                return Err(domain(format!("probabilities sum to {total}, not 1")));
            }
            Ok(())
        };
        match self {
            Self::TwoPoint { values, probs } => check_probs(values, probs),
            Self::Discrete { atoms, probs } => check_probs(atoms, probs),
            Self::Uniform { lo, hi } => {
                if lo.is_finite() && hi.is_finite() && lo < hi {
                    Ok(())
                } else {
                    Err(domain(format!("uniform needs finite lo < hi, got [{lo}, {hi}]")))
                }
            }
            Self::Pareto { shape, scale } => {
                if *shape > 0.0 && *scale > 0.0 && shape.is_finite() && scale.is_finite() {
                    Ok(())
                } else {
                    Err(domain(format!(
                        "pareto needs shape > 0 and scale > 0, got {shape}, {scale}"
                    )))
                }
            }
            Self::Normal { mean, sd } => {
                if mean.is_finite() && *sd > 0.0 && sd.is_finite() {
                    Ok(())
                } else {
                    Err(domain(format!("normal needs finite mean and sd > 0, got {mean}, {sd}")))
                }
            }
        }
    }

    fn atoms(&self) -> Option<(&[f64], &[f64])> {
        match self {
            Self::TwoPoint { values, probs } => Some((values, probs)),
            Self::Discrete { atoms, probs } => Some((atoms, probs)),
            _ => None,
        }
    }

    /// Degenerate law at `c`.
    pub fn point(c: f64) -> Self {
        Self::Discrete {
            atoms: vec![c],
            probs: vec![1.0],
        }
    }

    /// Law of `c * X`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if c == 1.0 {
            return Ok(self.clone());
        }
        Ok(match self {
            Self::TwoPoint { values, probs } => Self::TwoPoint {
                values: [c * values[0], c * values[1]],
                probs: *probs,
            },
            Self::Discrete { atoms, probs } => Self::Discrete {
                atoms: atoms.iter().map(|x| c * x).collect(),
                probs: probs.clone(),
            },
            Self::Uniform { lo, hi } if c > 0.0 => Self::Uniform { lo: c * lo, hi: c * hi },
            Self::Uniform { lo, hi } if c < 0.0 => Self::Uniform { lo: c * hi, hi: c * lo },
            Self::Normal { mean, sd } if c != 0.0 => Self::Normal {
                mean: c * mean,
                sd: c.abs() * sd,
            },
            Self::Pareto { shape, scale } if c > 0.0 => Self::Pareto {
                shape: *shape,
                scale: c * scale,
            },
            _ if c == 0.0 => Self::point(0.0),
            _ => {
                return Err(Error::Unsupported(format!(
                    "negative weight {c} applied to a pareto marginal"
                )))
            }
        })
    }

    /// Law of `X + d`.
    pub fn shifted(&self, d: f64) -> Result<Self> {
        if d == 0.0 {
            return Ok(self.clone());
        }
        Ok(match self {
            Self::TwoPoint { values, probs } => Self::TwoPoint {
                values: [values[0] + d, values[1] + d],
                probs: *probs,
            },
            Self::Discrete { atoms, probs } => Self::Discrete {
                atoms: atoms.iter().map(|x| x + d).collect(),
                probs: probs.clone(),
            },
            Self::Uniform { lo, hi } => Self::Uniform { lo: lo + d, hi: hi + d },
            Self::Normal { mean, sd } => Self::Normal {
                mean: mean + d,
                sd: *sd,
            },
            Self::Pareto { .. } => return Err(Error::Unsupported("shifted pareto marginals are not supported".into())),
        })
    }

    /// Inverse distribution function, `u` in `(0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            Self::TwoPoint { values, probs } => {
                if u < probs[0] {
                    values[0]
                } else {
                    values[1]
                }
            }
            Self::Discrete { atoms, probs } => {
                let mut cum = 0.0;
                for (x, p) in atoms.iter().zip(probs) {
                    cum += p;
                    if u < cum {
                        return *x;
                    }
                }
                *atoms.last().unwrap()
            }
            Self::Uniform { lo, hi } => lo + u * (hi - lo),
            Self::Pareto { shape, scale } => scale * (1.0 - u).powf(-1.0 / shape),
            Self::Normal { mean, sd } => mean + sd * std_normal_quantile(u),
        }
    }

    /// `P{X <= x}`.
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Self::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Self::Pareto { shape, scale } => {
                if x <= *scale {
                    0.0
                } else {
                    1.0 - (scale / x).powf(*shape)
                }
            }
            Self::Normal { mean, sd } => std_normal_cdf((x - mean) / sd),
            _ => {
                let (atoms, probs) = self.atoms().unwrap();
                stable_sum(atoms.iter().zip(probs).filter(|(a, _)| **a <= x).map(|(_, p)| *p)).min(1.0)
            }
        }
    }

    /// `P{X > x}`.
    pub fn survival(&self, x: f64) -> f64 {
        match self {
            Self::Uniform { lo, hi } => ((hi - x) / (hi - lo)).clamp(0.0, 1.0),
            Self::Pareto { shape, scale } => {
                if x < *scale {
                    1.0
                } else {
                    (scale / x).powf(*shape)
                }
            }
            Self::Normal { mean, sd } => std_normal_cdf((mean - x) / sd),
            _ => {
                let (atoms, probs) = self.atoms().unwrap();
                stable_sum(atoms.iter().zip(probs).filter(|(a, _)| **a > x).map(|(_, p)| *p)).min(1.0)
            }
        }
    }

    /// `P{|X| > t}` for `t >= 0`.
    pub fn tail_abs(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 1.0;
        }
        match self {
            Self::Uniform { lo, hi } => {
                let w = hi - lo;
                let above = (hi - t.max(*lo)).max(0.0);
                let below = ((-t).min(*hi) - lo).max(0.0);
                ((above + below) / w).clamp(0.0, 1.0)
            }
            Self::Normal { mean, sd } => (std_normal_cdf((mean - t) / sd) + std_normal_cdf((-t - mean) / sd)).min(1.0),
            Self::Pareto { .. } => self.survival(t),
            _ => {
                let (atoms, probs) = self.atoms().unwrap();
                stable_sum(atoms.iter().zip(probs).filter(|(a, _)| a.abs() > t).map(|(_, p)| *p)).min(1.0)
            }
        }
    }

    /// Smallest and largest points of the support.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Uniform { lo, hi } => (*lo, *hi),
            Self::Pareto { scale, .. } => (*scale, f64::INFINITY),
            Self::Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            _ => {
                let (atoms, probs) = self.atoms().unwrap();
                atoms
                    .iter()
                    .zip(probs)
                    .filter(|(_, p)| **p > 0.0)
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (x, _)| {
                        (lo.min(*x), hi.max(*x))
                    })
            }
        }
    }

    /// Essential supremum of `|X|`.
    pub fn max_abs(&self) -> f64 {
        let (lo, hi) = self.support();
        lo.abs().max(hi.abs())
    }

    pub fn mean(&self) -> Result<f64> {
        match self {
            Self::Uniform { lo, hi } => Ok(0.5 * (lo + hi)),
            Self::Normal { mean, .. } => Ok(*mean),
            Self::Pareto { shape, scale } => {
                if *shape > 1.0 {
                    Ok(shape * scale / (shape - 1.0))
                } else {
                    Err(Error::NotComputable(format!(
                        "pareto mean is infinite for shape {shape} <= 1"
                    )))
                }
            }
            _ => {
                let (atoms, probs) = self.atoms().unwrap();
                Ok(stable_sum(atoms.iter().zip(probs).map(|(x, p)| x * p)))
            }
        }
    }

    pub fn second_moment(&self) -> Result<f64> {
        match self {
            Self::Pareto { shape, .. } if *shape <= 2.0 => Err(Error::NotComputable(format!(
                "pareto second moment is infinite for shape {shape} <= 2"
            ))),
            _ => self.abs_moment(2.0),
        }
    }

    /// `E[min(|X|, a)^2] = E[X^2 1{|X| <= a}] + a^2 P{|X| > a}`.
    pub fn truncated_second_moment(&self, a: f64) -> f64 {
        let a = a.abs();
        match self {
            Self::Uniform { lo, hi } => {
                let b = lo.max(-a);
                let c = hi.min(a);
                let inner = if c > b {
                    (c.powi(3) - b.powi(3)) / (3.0 * (hi - lo))
                } else {
                    0.0
                };
                inner + square_times(a, self.tail_abs(a))
            }
            Self::Normal { mean, sd } => {
                let alpha = (-a - mean) / sd;
                let beta = (a - mean) / sd;
                let mass = std_normal_cdf(beta) - std_normal_cdf(alpha);
                let (pa, pb) = (std_normal_pdf(alpha), std_normal_pdf(beta));
                let inner =
                    mean * mean * mass + 2.0 * mean * sd * (pa - pb) + sd * sd * (mass + alpha * pa - beta * pb);
                inner.max(0.0) + square_times(a, (1.0 - mass).max(0.0))
            }
            Self::Pareto { shape, scale } => {
                if a <= *scale {
                    return a * a;
                }
                let inner = if (shape - 2.0).abs() < 1e-12 {
                    2.0 * scale * scale * (a / scale).ln()
                } else {
                    shape * scale.powf(*shape) * (a.powf(2.0 - shape) - scale.powf(2.0 - shape)) / (2.0 - shape)
                };
                inner + scale.powf(*shape) * a.powf(2.0 - shape)
            }
            _ => {
                let (atoms, probs) = self.atoms().unwrap();
                stable_sum(atoms.iter().zip(probs).map(|(x, p)| {
                    let m = x.abs().min(a);
                    m * m * p
                }))
            }
        }
    }

    /// `E|X|^p`, `p > 0`.
    pub fn abs_moment(&self, p: f64) -> Result<f64> {
        if !(p > 0.0) {
            return Err(domain(format!("moment order must be > 0, got {p}")));
        }
        match self {
            Self::Uniform { lo, hi } => {
                let g = |x: f64| x.signum() * x.abs().powf(p + 1.0) / (p + 1.0);
                Ok((g(*hi) - g(*lo)) / (hi - lo))
            }
            Self::Pareto { shape, scale } => {
                if *shape > p {
                    Ok(shape * scale.powf(p) / (shape - p))
                } else {
                    Err(Error::NotComputable(format!(
                        "E|X|^{p} is infinite for pareto shape {shape}"
                    )))
                }
            }
            Self::Normal { mean, sd } if *mean == 0.0 => {
                Ok(sd.powf(p) * 2f64.powf(p / 2.0) * gamma((p + 1.0) / 2.0) / std::f64::consts::PI.sqrt())
            }
            Self::Normal { .. } => self.abs_moment_by_quadrature(p),
            _ => {
                let (atoms, probs) = self.atoms().unwrap();
                Ok(stable_sum(atoms.iter().zip(probs).map(|(x, q)| x.abs().powf(p) * q)))
            }
        }
    }

    /// `E|X|^p = int_0^inf p t^(p-1) P{|X| > t} dt` by quadrature.
    pub fn abs_moment_by_quadrature(&self, p: f64) -> Result<f64> {
        let f = |t: f64| {
            if t == 0.0 && p < 1.0 {
                0.0
            } else {
                p * t.powf(p - 1.0) * self.tail_abs(t)
            }
        };
        let mut breaks = vec![0.0];
        breaks.extend(self.abs_tail_breakpoints());
        let top = breaks.iter().copied().fold(1.0, f64::max);
        breaks.push(top);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let body = integrate_pieces(&f, &breaks, &QuadOptions::default())?;
        let tail = integrate_tail(f, top, &TailOptions::default())?;
        if !tail.tail_estimate.is_finite() {
            return Err(Error::NotComputable(format!("E|X|^{p} does not converge")));
        }
        Ok(body.value + tail.value + tail.tail_estimate)
    }

    /// Points where `t -> P{|X| > t}` is not smooth, plus the scale points
    /// of the normal law so that quadrature over long ranges sees its mass.
    pub fn abs_tail_breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = match self {
            Self::Uniform { lo, hi } => vec![lo.abs(), hi.abs()],
            Self::Pareto { scale, .. } => vec![*scale],
            // erfc underflows past ~38 sd
            Self::Normal { mean, sd } => [0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 40.0]
                .iter()
                .map(|k| mean.abs() + k * sd)
                .collect(),
            _ => self.atoms().unwrap().0.iter().map(|x| x.abs()).collect(),
        };
        pts.retain(|x| *x > 0.0 && x.is_finite());
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

impl fmt::Display for MarginalSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |xs: &[f64]| xs.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(" ");
        match self {
            Self::TwoPoint { values, probs } => write!(
                f,
                "two_point(x0={},x1={},p0={},p1={})",
                fmt_num(values[0]),
                fmt_num(values[1]),
                fmt_num(probs[0]),
                fmt_num(probs[1])
            ),
            Self::Uniform { lo, hi } => write!(f, "uniform(lo={},hi={})", fmt_num(*lo), fmt_num(*hi)),
            Self::Pareto { shape, scale } => {
                write!(f, "pareto(shape={},scale={})", fmt_num(*shape), fmt_num(*scale))
            }
            Self::Normal { mean, sd } => write!(f, "normal(mean={},sd={})", fmt_num(*mean), fmt_num(*sd)),
            Self::Discrete { atoms, probs } => {
                write!(f, "discrete(atoms={},probs={})", list(atoms), list(probs))
            }
        }
    }
}
