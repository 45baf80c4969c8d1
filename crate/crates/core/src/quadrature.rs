//! Adaptive Gauss–Kronrod quadrature with geometric panelling for
//! semi-infinite ranges.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of subintervals per finite integral.
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-8,
            max_panels: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Quad {
    pub value: f64,
    pub abs_error: f64,
    /// Largest |f| seen at a node.
    pub peak: f64,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    peak: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut peak = fc.abs();
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        peak = peak.max(f1.abs()).max(f2.abs());
        kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
        peak,
    }
}

/// Integrate `f` over `[a, b]` by adaptive bisection of the worst panel.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<Quad> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Quadrature(format!("non-finite limits [{a}, {b}]")));
    }
    if a == b {
        return Ok(Quad {
            value: 0.0,
            abs_error: 0.0,
            peak: 0.0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut segments = vec![gk15(&f, lo, hi)];
    loop {
        let total: f64 = segments.iter().map(|s| s.value).sum();
        let err: f64 = segments.iter().map(|s| s.error).sum();
        let peak = segments.iter().fold(0.0f64, |m, s| m.max(s.peak));
        if !total.is_finite() {
            return Err(Error::Quadrature(format!("non-finite integrand on [{lo}, {hi}]")));
        }
        if err <= opts.abs_tol.max(opts.rel_tol * total.abs()) {
            return Ok(Quad {
                value: sign * total,
                abs_error: err,
                peak,
            });
        }
        if segments.len() >= opts.max_panels {
            return Err(Error::Quadrature(format!(
                "panel budget {} exhausted on [{lo}, {hi}] (estimate {total}, error {err})",
                opts.max_panels
            )));
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, be), (i, s)| {
                if s.error > be {
                    (i, s.error)
                } else {
                    (bi, be)
                }
            });
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // Interval can no longer be split in floating point.
            return Ok(Quad {
                value: sign * total,
                abs_error: err,
                peak,
            });
        }
        segments.push(gk15(&f, seg.a, mid));
        segments.push(gk15(&f, mid, seg.b));
    }
}

/// Integrate over consecutive breakpoints, summing the pieces.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: &F, breaks: &[f64], opts: &QuadOptions) -> Result<Quad> {
    let mut value = 0.0;
    let mut abs_error = 0.0;
    let mut peak = 0.0f64;
    for w in breaks.windows(2) {
        let q = integrate(f, w[0], w[1], opts)?;
        value += q.value;
        abs_error += q.abs_error;
        peak = peak.max(q.peak);
    }
    Ok(Quad { value, abs_error, peak })
}

#[derive(Debug, Clone, Copy)]
pub struct TailOptions {
    pub quad: QuadOptions,
    /// Hard outer truncation point.
    pub upper_limit: f64,
    /// Stop once the integrand on a panel falls below this fraction of the
    /// running peak.
    pub peak_fraction: f64,
}

impl Default for TailOptions {
    fn default() -> Self {
        Self {
            quad: QuadOptions::default(),
            upper_limit: 1e15,
            peak_fraction: 1e-16,
        }
    }
}

/// Result of integrating a nonnegative function over `[start, inf)`.
#[derive(Debug, Clone)]
pub struct TailIntegral {
    /// Accumulated value up to `reached`.
    pub value: f64,
    pub reached: f64,
    /// Contribution of the final geometric panel.
    pub last_panel: f64,
    /// Extrapolated contribution beyond `reached`; infinite when panel
    /// contributions are not shrinking.
    pub tail_estimate: f64,
    /// True when the integrand dropped below the peak fraction.
    pub vanished: bool,
    /// Ratios of successive panel contributions, most recent last.
    pub recent_ratios: Vec<f64>,
}

/// Integrate over `[start, inf)` on doubling panels `[L, 2L]`, stopping when
/// the integrand falls below `peak_fraction` of its running peak or at
/// `upper_limit`.
pub fn integrate_tail<F: Fn(f64) -> f64>(f: F, start: f64, opts: &TailOptions) -> Result<TailIntegral> {
    let mut lo = start;
    let mut value = 0.0;
    let mut peak = 0.0f64;
    let mut contributions: Vec<f64> = Vec::new();
    let mut vanished = false;
    let mut quiet_panels = 0;
    while lo < opts.upper_limit {
        let hi = if lo <= 0.0 {
            1.0
        } else {
            (2.0 * lo).min(opts.upper_limit)
        };
        let q = integrate(&f, lo, hi, &opts.quad)?;
        value += q.value;
        contributions.push(q.value.abs());
        peak = peak.max(q.peak);
        lo = hi;
        if q.peak <= opts.peak_fraction * peak {
            quiet_panels += 1;
            if quiet_panels >= 2 {
                vanished = true;
                break;
            }
        } else {
            quiet_panels = 0;
        }
    }
    let last_panel = contributions.last().copied().unwrap_or(0.0);
    let recent_ratios: Vec<f64> = contributions
        .windows(2)
        .rev()
        .take(4)
        .map(|w| {
            if w[0] > 0.0 {
                w[1] / w[0]
            } else if w[1] > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .collect();
    let tail_estimate = if vanished || last_panel == 0.0 {
        last_panel
    } else {
        let r = recent_ratios.iter().copied().fold(0.0f64, f64::max);
        if r < 1.0 {
            last_panel * r / (1.0 - r)
        } else {
            f64::INFINITY
        }
    };
    Ok(TailIntegral {
        value,
        reached: lo,
        last_panel,
        tail_estimate,
        vanished,
        recent_ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let q = integrate(|x| x * x, 0.0, 3.0, &QuadOptions::default()).unwrap();
        assert!((q.value - 9.0).abs() < 1e-12);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let q = integrate(f64::sin, std::f64::consts::PI, 0.0, &QuadOptions::default()).unwrap();
        assert!((q.value + 2.0).abs() < 1e-12);
    }

    #[test]
    fn kink_needs_subdivision() {
        let q = integrate(|x: f64| x.abs().sqrt(), -1.0, 1.0, &QuadOptions::default()).unwrap();
        assert!((q.value - 4.0 / 3.0).abs() < 1e-7);
    }

    #[test]
    fn exponential_tail() {
        let t = integrate_tail(|x: f64| (-x).exp(), 0.0, &TailOptions::default()).unwrap();
        assert!((t.value - 1.0).abs() < 1e-9);
        assert!(t.vanished);
    }

    #[test]
    fn power_tail_extrapolates() {
        // int_1^inf x^-3 dx = 1/2
        let opts = TailOptions {
            upper_limit: 1024.0,
            ..TailOptions::default()
        };
        let t = integrate_tail(|x: f64| x.powi(-3), 1.0, &opts).unwrap();
        assert!(!t.vanished);
        assert!((t.value + t.tail_estimate - 0.5).abs() < 1e-8);
    }

    #[test]
    fn divergent_tail_flags_infinite() {
        let opts = TailOptions {
            upper_limit: 1e6,
            ..TailOptions::default()
        };
        let t = integrate_tail(|x: f64| 1.0 / (1.0 + x), 0.0, &opts).unwrap();
        assert!(t.tail_estimate.is_infinite());
    }
}
