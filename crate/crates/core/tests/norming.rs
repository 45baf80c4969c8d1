use endlab_core::dependence::{MarginalSpec, TriangularArrayModel};
use endlab_core::norming::{
    check_condition_a, check_condition_a_integral_form, integral_condition_e, integral_condition_f, NormingScheme,
    Sequence,
};
use endlab_core::quadrature::{integrate, QuadOptions};
use endlab_core::simulate::corollary1_scheme;
use proptest::prelude::*;

fn law() -> impl Strategy<Value = MarginalSpec> {
    prop_oneof![
        (0.05f64..3.0).prop_map(|h| MarginalSpec::uniform(-h, h)),
        (1u32..16, 0.1f64..4.0).prop_map(|(k, x)| {
            let p = k as f64 / 16.0;
            MarginalSpec::two_point(-x, 2.0 * x, 1.0 - p, p)
        }),
        (0.0f64..2.0, 0.1f64..2.0).prop_map(|(mean, sd)| MarginalSpec::Normal { mean, sd }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn condition_a_forms_agree(law in law(), ae in 0.3f64..1.5, s_scale in 0.01f64..10.0, s_exp in 0.5f64..1.5) {
        let model = TriangularArrayModel::independent(law);
        let scheme = NormingScheme::new(
            Sequence::pow(1.0, ae),
            Sequence::pow(1.0, 1.0),
            Sequence::pow(s_scale, s_exp),
        ).unwrap();
        let rows = [1, 3, 10, 50, 300, 2000];
        let closed = check_condition_a(&model, &scheme, &rows).unwrap();
        let integral = check_condition_a_integral_form(&model, &scheme, &rows).unwrap();
        prop_assert_eq!(closed.verdict, integral.verdict, "{} / {}", closed.evidence, integral.evidence);
    }

    #[test]
    fn inverse_round_trips(scale in 0.01f64..100.0, exp in 0.2f64..3.0, log_exp in -1.0f64..1.0, y in 1e-3f64..1e6) {
        for seq in [Sequence::pow(scale, exp), Sequence::powlog(scale, exp, log_exp), Sequence::Affine { intercept: scale, slope: exp }] {
            let t = seq.inverse(y);
            if t > 0.0 && t.is_finite() && seq.eval(t) >= y * (1.0 - 1e-9) && t > 1.0 {
                // generalized inverse: smallest t with seq(t) >= y
                prop_assert!(seq.eval(t * (1.0 - 1e-6)) <= y * (1.0 + 1e-6), "{seq}: y={y}, t={t}");
            }
        }
    }
}

#[test]
fn condition_f_below_moment_majorant() {
    // b(t) = t^(1/p) gives f <= k^(2p-1) / (2 - 1/p) * int P{|X| > t} t^(2p-1) dt
    // with a^-1(t) = (k t)^p
    for p in [0.75, 1.0, 1.5] {
        for h in [0.2, 1.0, 3.0] {
            let x = MarginalSpec::uniform(-h, h);
            let (scheme, _) = corollary1_scheme(p, &x).unwrap();
            let f = integral_condition_f(&scheme, &x).unwrap();
            let k = if p >= 1.0 { 2.0 * p / (2.0 - p) } else { 2.0 };
            let moment = h.powf(2.0 * p) / (2.0 * p * (2.0 * p + 1.0));
            let majorant = k.powf(2.0 * p - 1.0) / (2.0 - 1.0 / p) * moment;
            assert!(
                f.value + f.tail_estimate <= majorant * (1.0 + 1e-6),
                "p={p} h={h}: {} > {majorant}",
                f.value
            );
        }
    }
}

#[test]
fn condition_e_below_crude_majorant() {
    // W(x) <= x turns (e) into int (t + 1) Log(a b / s)(t) P{|X| > a(t)} dt
    for p in [0.75, 1.0, 1.5] {
        let h = 0.2;
        let x = MarginalSpec::uniform(-h, h);
        let (scheme, _) = corollary1_scheme(p, &x).unwrap();
        let e = integral_condition_e(&scheme, &x).unwrap();
        let top = scheme.a_inverse(h);
        let g = |t: f64| {
            let r = scheme.a.eval(t) * scheme.b.eval(t) / scheme.s.eval(t);
            (t + 1.0) * endlab_core::norming::log_plus(r) * x.tail_abs(scheme.a.eval(t))
        };
        let opts = QuadOptions {
            max_panels: 20_000,
            ..QuadOptions::default()
        };
        let mut breaks = vec![1e-12];
        breaks.extend((1..=top.ceil() as usize).map(|k| k as f64).filter(|k| *k < top));
        breaks.push(top);
        let mut majorant = 0.0;
        for w in breaks.windows(2) {
            majorant += integrate(g, w[0], w[1], &opts).unwrap().value;
        }
        assert!(
            e.value <= majorant * (1.0 + 1e-6) + 1e-12,
            "p={p}: {} > {majorant}",
            e.value
        );
    }
}
