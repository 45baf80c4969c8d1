use endlab_core::dependence::{MarginalSpec, TriangularArrayModel, Weights};
use endlab_core::norming::{NormingScheme, Sequence};
use endlab_core::simulate::*;
use proptest::prelude::*;

fn plan(model: TriangularArrayModel, schedule: Vec<usize>, epsilons: Vec<f64>, seed: u64) -> ExperimentPlan {
    ExperimentPlan {
        name: "t".into(),
        model,
        scheme: NormingScheme::new(
            Sequence::Affine {
                intercept: 1.0,
                slope: 1e-9,
            },
            Sequence::pow(1.0, 0.0),
            Sequence::pow(1.0, 1.0),
        )
        .unwrap(),
        epsilons,
        n_schedule: schedule,
        replications: 1000,
        seed,
        center: Center::SubtractMean,
        semantics: Semantics::Triangular,
        bound: BoundKind::Bennett,
    }
}

proptest! {
    #[test]
    fn truncation_respects_level(x in -1e300f64..1e300, a in 1e-300f64..1e300) {
        let s = truncate_split(x, a);
        prop_assert!(s.x_prime.abs() <= a);
        prop_assert!(s.x_double_prime == 0.0 || s.x_prime.abs() == a);
    }
}

#[test]
fn truncation_reconstructs_on_common_grid() {
    // x and a on the grid 2^-20 Z below 2^30, where x - x' is exact
    let mut state = 0x1234_5678_9abc_def0u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    for _ in 0..1_000_000 {
        let x = ((next() >> 14) as i64 - (1 << 49)) as f64 * 2f64.powi(-20);
        let a = (1 + (next() >> 14)) as f64 * 2f64.powi(-20);
        let s = truncate_split(x, a);
        assert_eq!(s.x_prime + s.x_double_prime, x, "x={x} a={a}");
    }
}

#[test]
fn rademacher_tail_matches_binomial() {
    let pm = MarginalSpec::two_point(-1.0, 1.0, 0.5, 0.5);
    let law = DiscreteSumLaw::independent_sum(&vec![pm.clone(); 10]).unwrap();
    assert_eq!(law.abs_tail(9.0), 2.0 / 1024.0);
    let mut p = plan(TriangularArrayModel::independent(pm), vec![10], vec![9.0], 42);
    p.replications = 20_000;
    let est = estimate_tail(&p, 10, 9.0).unwrap();
    assert!((est.value - 2.0 / 1024.0).abs() <= 3.0 * est.half_width, "{est:?}");
}

#[test]
fn estimates_agree_with_enumeration() {
    let laws = [
        MarginalSpec::two_point(-1.0, 1.0, 0.5, 0.5),
        MarginalSpec::two_point(-0.25, 0.75, 0.75, 0.25),
        MarginalSpec::Discrete {
            atoms: vec![-1.0, 0.0, 2.0],
            probs: vec![0.375, 0.5, 0.125],
        },
    ];
    let mut cells = 0;
    let mut inside = 0;
    for (i, law) in laws.iter().enumerate() {
        for seed in 1..=4u64 {
            let p = plan(
                TriangularArrayModel::independent(law.clone()),
                (1..=10).collect(),
                vec![0.3, 1.0, 1.7, 2.5, 3.3],
                seed * 10 + i as u64,
            );
            let run = Engine::new(&p).unwrap().run().unwrap();
            for (j, n) in p.n_schedule.iter().enumerate() {
                let centered = law.shifted(-law.mean().unwrap()).unwrap();
                let exact = DiscreteSumLaw::independent_sum(&vec![centered; *n]).unwrap();
                for eps in &p.epsilons {
                    let e = run.estimate(j, *eps);
                    let truth = exact.abs_tail(*eps);
                    cells += 1;
                    if (e.value - truth).abs() <= 3.0 * e.half_width.max(1.0 / p.replications as f64) {
                        inside += 1;
                    }
                }
            }
        }
    }
    assert!(inside as f64 >= 0.99 * cells as f64, "{inside} / {cells}");
}

#[test]
fn centering_removes_the_mean() {
    let model = TriangularArrayModel::independent(MarginalSpec::uniform(1.0, 3.0));
    let p = plan(model, vec![5, 50], vec![1.0], 9);
    let e = Engine::new(&p).unwrap();
    for n in [5, 50] {
        let v: Vec<f64> = (0..p.replications)
            .map(|r| e.normalized_row_sum(n, r).unwrap())
            .collect();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt();
        assert!(
            mean.abs() <= 3.0 * sd / (v.len() as f64).sqrt(),
            "n={n}: {mean} vs {sd}"
        );
    }
}

#[test]
fn identical_across_thread_counts() {
    let mut plans = vec![
        preset("theorem2-p1.5", 42).unwrap().plan,
        preset("corollary1-p1.5", 42).unwrap().plan,
    ];
    for p in &mut plans {
        p.replications = 100;
        p.n_schedule.truncate(6);
    }
    let mut alt = plans[1].clone();
    alt.model = alt.model.with_weights(Weights::RowAlternating);
    plans.push(alt);
    for p in &plans {
        let run = |threads| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| run_plan(p).unwrap())
        };
        let (a, b) = (run(1), run(5));
        assert_eq!(a.tails_csv(), b.tails_csv());
        assert_eq!(a.trailing_csv(), b.trailing_csv());
        assert_eq!(a.convergence_csv(), b.convergence_csv());
    }
}

#[test]
fn exact_sweep_holds_for_discrete_presets() {
    let pm = MarginalSpec::two_point(-1.0, 1.0, 0.5, 0.5);
    for kind in [
        BoundKind::Bennett,
        BoundKind::Bernstein,
        BoundKind::FukNagaev { lambda: 2.0, p: 1.0 },
    ] {
        let mut p = plan(
            TriangularArrayModel::independent(pm.clone()),
            (1..=10).collect(),
            vec![0.5, 1.0, 2.0, 4.0, 8.0],
            1,
        );
        p.model = p.model.with_weights(Weights::Alternating);
        let rows = bound_validity_sweep(&p, kind, SweepMode::Exact).unwrap();
        assert!(rows.iter().all(|r| r.satisfied == Some(true)), "{kind}");
    }
}

#[test]
fn degenerate_model_has_zero_diagnostics() {
    let p = plan(
        TriangularArrayModel::independent(MarginalSpec::point(2.0)),
        (1..=6).collect(),
        vec![0.1],
        3,
    );
    let conv = complete_convergence_diagnostic(&p).unwrap();
    assert_eq!(conv[0].partial_sum, 0.0);
    assert!(strong_law_path_diagnostic(&p).unwrap().iter().all(|r| r.p95 == 0.0));
}

#[test]
fn tiny_plans_are_rejected() {
    let mut p = plan(
        TriangularArrayModel::independent(MarginalSpec::point(0.0)),
        vec![1, 2],
        vec![0.1],
        3,
    );
    p.replications = 0;
    assert!(matches!(p.validate(), Err(endlab_core::Error::Plan(_))));
    p.replications = 100;
    p.n_schedule = vec![4, 2];
    assert!(p.validate().is_err());
}
