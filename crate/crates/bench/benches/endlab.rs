use criterion::{criterion_group, criterion_main, Criterion};
use endlab_core::bounds::{bennett_bound, fuk_nagaev_bound, TailFn};
use endlab_core::dependence::{certify_end_row, certify_fgm_discretization, CertMode, JointTable};
use endlab_core::norming::{integral_condition_e, integral_condition_f};
use endlab_core::simulate::{corollary1, corollary1_scheme, estimate_tail};
use endlab_core::{BoundInputs, FukNagaevInputs, MarginalSpec};
use std::hint::black_box;

fn bounds(c: &mut Criterion) {
    c.bench_function("bennett", |b| {
        b.iter(|| bennett_bound(&BoundInputs::new(black_box(3.0), 0.5, 2.0, 1.0)).unwrap())
    });
    let law = MarginalSpec::uniform(-1.0, 1.0);
    c.bench_function("fuk_nagaev_10_terms", |b| {
        b.iter(|| {
            fuk_nagaev_bound(&FukNagaevInputs {
                epsilon: black_box(2.0),
                lambda: 2.0,
                p: 1.0,
                m: 1.0,
                abs_moment_sum: 5.0,
                marginal_tails: (0..10)
                    .map(|_| Box::new(|t: f64| law.tail_abs(t)) as TailFn<'_>)
                    .collect(),
            })
            .unwrap()
        })
    });
}

fn certification(c: &mut Criterion) {
    let coin = MarginalSpec::Discrete {
        atoms: vec![-1.0, 0.0, 1.0, 2.0],
        probs: vec![0.25; 4],
    };
    let table = JointTable::product(&[coin.clone(), coin.clone(), coin.clone(), coin]).unwrap();
    c.bench_function("certify_product_4x4", |b| {
        b.iter(|| certify_end_row(black_box(&table), CertMode::End).unwrap())
    });
    c.bench_function("certify_fgm_grid_9", |b| {
        b.iter(|| certify_fgm_discretization(-1.0, black_box(9)).unwrap())
    });
}

fn quadrature(c: &mut Criterion) {
    let x = MarginalSpec::uniform(-0.2, 0.2);
    let (scheme, _) = corollary1_scheme(1.5, &x).unwrap();
    c.bench_function("condition_e", |b| {
        b.iter(|| integral_condition_e(black_box(&scheme), &x).unwrap())
    });
    c.bench_function("condition_f", |b| {
        b.iter(|| integral_condition_f(black_box(&scheme), &x).unwrap())
    });
}

fn monte_carlo(c: &mut Criterion) {
    let mut plan = corollary1(1.5, 42).unwrap().plan;
    plan.replications = 500;
    let mut group = c.benchmark_group("monte_carlo");
    group.sample_size(10);
    group.bench_function("tail_n1024_r500", |b| {
        b.iter(|| estimate_tail(&plan, black_box(1024), 0.1).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bounds, certification, quadrature, monte_carlo);
criterion_main!(benches);
