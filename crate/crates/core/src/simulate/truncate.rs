/// `x = x' + x''` with `x'` clamped to `[-a, a]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationSplit {
    pub x_prime: f64,
    pub x_double_prime: f64,
}

pub fn truncate_split(x: f64, a: f64) -> TruncationSplit {
    assert!(a > 0.0, "truncation level must be positive");
    let x_prime = x.clamp(-a, a);
    // exact whenever x - x' is representable, e.g. |x| <= 2a (Sterbenz);
    // otherwise x'' is the correctly rounded difference
    TruncationSplit {
        x_prime,
        x_double_prime: x - x_prime,
    }
}
