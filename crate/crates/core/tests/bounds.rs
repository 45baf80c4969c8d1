use endlab_core::bounds::{
    bennett_bound, bernstein_bound, comparison_gap, fuk_nagaev_bound, fuk_nagaev_general, TailFn,
};
use endlab_core::simulate::DiscreteSumLaw;
use endlab_core::{BoundInputs, FukNagaevInputs, MarginalSpec};
use proptest::prelude::*;

fn log_bennett(eps: f64, a: f64, s: f64) -> f64 {
    bennett_bound(&BoundInputs::new(eps, a, s, 1.0)).unwrap().log_bound
}

fn scale() -> impl Strategy<Value = f64> {
    (-6.0f64..6.0).prop_map(|e| 10f64.powf(e))
}

proptest! {
    #[test]
    fn bennett_nonincreasing_in_epsilon(eps in scale(), k in 1.0f64..100.0, a in scale(), s in scale()) {
        prop_assert!(log_bennett(eps * k, a, s) <= log_bennett(eps, a, s) + 1e-12 * log_bennett(eps, a, s).abs());
    }

    #[test]
    fn bennett_nondecreasing_in_s(eps in scale(), k in 1.0f64..100.0, a in scale(), s in scale()) {
        let lo = log_bennett(eps, a, s);
        prop_assert!(log_bennett(eps, a, s * k) >= lo - 1e-12 * lo.abs());
    }

    #[test]
    fn bennett_never_exceeds_bernstein(eps in scale(), a in scale(), s in scale(), m in 1.0f64..50.0) {
        let inp = BoundInputs::new(eps, a, s, m);
        let b = bennett_bound(&inp).unwrap().log_bound;
        let r = bernstein_bound(&inp).unwrap().log_bound;
        prop_assert!(b <= r + 1e-12 * r.abs().max(1.0), "{b} > {r}");
    }

    #[test]
    fn m_enters_as_log_shift(eps in scale(), a in scale(), s in scale(), m in 1.0f64..1e6) {
        let one = bennett_bound(&BoundInputs::new(eps, a, s, 1.0)).unwrap().log_bound;
        let many = bennett_bound(&BoundInputs::new(eps, a, s, m)).unwrap().log_bound;
        prop_assert!((many - one - m.ln()).abs() <= 1e-12 * (1.0 + one.abs()));
    }

    #[test]
    fn bound_is_finite_or_underflows(eps in 0.0f64..1e300, a in 1e-300f64..1e300, s in 1e-300f64..1e300) {
        let r = bennett_bound(&BoundInputs::new(eps, a, s, 1.0)).unwrap();
        prop_assert!(r.log_bound <= 1e-12 && !r.log_bound.is_nan());
    }

    #[test]
    fn fuk_nagaev_specialises_general(eps in 0.01f64..100.0, lambda in 0.1f64..10.0, p in 0.05f64..=1.0, moments in 0.01f64..100.0) {
        let law = MarginalSpec::uniform(-1.0, 1.0);
        let tails = |n: usize| (0..n).map(|_| Box::new(|t: f64| law.tail_abs(t)) as TailFn<'_>).collect();
        let mk = || FukNagaevInputs { epsilon: eps, lambda, p, m: 1.0, abs_moment_sum: moments, marginal_tails: tails(3) };
        let a = fuk_nagaev_bound(&mk()).unwrap();
        let b = fuk_nagaev_general(&mk(), eps / lambda).unwrap();
        prop_assert_eq!(a.log_bound, b.log_bound);
        prop_assert!(a.bound >= 3.0 * law.tail_abs(eps / lambda));
    }

    #[test]
    fn comparison_gap_negative_beyond_five(x in 5.0f64..1e12) {
        prop_assert!(comparison_gap(x).unwrap() < 0.0);
    }
}

/// Centered two-point laws with dyadic probabilities.
fn two_point_rows(seed: u64) -> Vec<Vec<MarginalSpec>> {
    let mut state = seed;
    let mut next = move || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    (0..60)
        .map(|_| {
            let n = 1 + (next() * 10.0) as usize;
            (0..n)
                .map(|_| {
                    let p1 = (1.0 + (next() * 15.0).floor()) / 16.0;
                    let hi = 0.1 + 3.0 * next();
                    // mean zero: p0 x0 + p1 x1 = 0
                    let lo = -hi * p1 / (1.0 - p1);
                    MarginalSpec::two_point(lo, hi, 1.0 - p1, p1)
                })
                .collect()
        })
        .collect()
}

#[test]
fn exact_tails_below_bennett_and_fuk_nagaev() {
    for row in two_point_rows(11) {
        let law = DiscreteSumLaw::independent_sum(&row).unwrap();
        let a = row.iter().map(|m| m.max_abs()).fold(0.0, f64::max);
        let s: f64 = row.iter().map(|m| m.second_moment().unwrap()).sum();
        for i in 0..20 {
            let eps = 10f64.powf(-2.0 + 3.5 * i as f64 / 19.0);
            let bennett = bennett_bound(&BoundInputs::new(eps, a, s, 1.0)).unwrap().bound;
            assert!(law.upper_tail(eps) <= bennett * (1.0 + 1e-12));
            for lambda in [1.0, 2.0, 5.0] {
                for p in [0.5, 1.0] {
                    let moments: f64 = row.iter().map(|m| m.abs_moment(p).unwrap()).sum();
                    let fn_bound = fuk_nagaev_bound(&FukNagaevInputs {
                        epsilon: eps,
                        lambda,
                        p,
                        m: 1.0,
                        abs_moment_sum: moments,
                        marginal_tails: row
                            .iter()
                            .map(|m| Box::new(move |t: f64| m.tail_abs(t)) as TailFn<'_>)
                            .collect(),
                    })
                    .unwrap()
                    .bound;
                    assert!(law.abs_tail(eps) <= fn_bound * (1.0 + 1e-12));
                }
            }
        }
    }
}

#[test]
fn comparison_gap_matches_two_log_asymptote() {
    // h(x) / (-2 log x) -> 1
    let r = comparison_gap(1e6).unwrap() / (-2.0 * 1e6f64.ln());
    assert!((0.85..=1.0).contains(&r), "{r}");
}
