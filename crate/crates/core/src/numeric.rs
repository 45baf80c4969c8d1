//! Small floating-point helpers shared by the bound evaluators and the
//! quadrature code.

/// `log(max(x, e))`, always at least 1.
pub fn log_plus(x: f64) -> f64 {
    if x > std::f64::consts::E {
        x.ln()
    } else {
        1.0
    }
}

/// `(1 + x) ln(1 + x) - x` for `x >= 0`, accurate near zero and free of
/// overflow for large `x` as long as the result is representable.
pub fn bennett_phi(x: f64) -> f64 {
    if x < 1e-3 {
        // sum_{k>=2} (-1)^k x^k / (k (k - 1))
        let mut term = x * x;
        let mut acc = 0.0;
        for k in 2..12 {
            let kf = k as f64;
            acc += term / (kf * (kf - 1.0));
            term *= -x;
        }
        acc
    } else {
        (1.0 + x) * x.ln_1p() - x
    }
}

/// `ln(1 + e^z)` without overflow.
pub fn softplus(z: f64) -> f64 {
    if z > 35.0 {
        z + (-z).exp()
    } else if z < -35.0 {
        z.exp()
    } else {
        z.exp().ln_1p()
    }
}

/// Neumaier compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn stable_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<KahanSum>().value()
}

/// Shortest round-trip decimal, switching to exponent notation outside
/// `[1e-5, 1e16)` so very large or small values stay compact.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let ax = x.abs();
    if (1e-5..1e16).contains(&ax) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Geometric grid of `points` values from `lo` to `hi` inclusive.
pub fn geomspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2 && lo > 0.0 && hi > lo);
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| {
            if i == points - 1 {
                hi
            } else {
                (llo + (lhi - llo) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect()
}

/// Geometric grid of distinct integers between `lo` and `hi`.
pub fn integer_geomspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let mut out: Vec<f64> = geomspace(lo, hi, points).into_iter().map(f64::round).collect();
    out.dedup();
    out
}
