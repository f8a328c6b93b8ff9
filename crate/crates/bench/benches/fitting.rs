use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use sortition_audit::estimation::{fit_mle, observed_information, FitOptions};
use sortition_audit::model::{log_likelihood, score, ModelSpec, ModelVariant, ParameterVector};
use sortition_audit_bench::{court, year_of_data};

fn bench_likelihood(c: &mut Criterion) {
    let config = court();
    let sample = year_of_data(&config);
    let spec = ModelSpec::new(ModelVariant::M1, &config).unwrap();
    let params = ParameterVector::from_values(
        &spec,
        (0..spec.param_count()).map(|i| (i % 7) as f64 * 0.05 - 0.15).collect(),
    )
    .unwrap();

    c.bench_function("log_likelihood_m1_year", |b| {
        b.iter(|| log_likelihood(black_box(&params), black_box(&sample), &spec).unwrap())
    });
    c.bench_function("score_m1_year", |b| {
        b.iter(|| score(black_box(&params), black_box(&sample), &spec).unwrap())
    });
    c.bench_function("information_m1_year", |b| {
        b.iter(|| observed_information(black_box(&params), black_box(&sample), &spec).unwrap())
    });
}

fn bench_fit(c: &mut Criterion) {
    let config = court();
    let sample = year_of_data(&config);
    let options = FitOptions::default();

    let mut group = c.benchmark_group("fit_year");
    group.sample_size(10);
    for variant in [ModelVariant::M6, ModelVariant::M4, ModelVariant::M1] {
        let spec = ModelSpec::new(variant, &config).unwrap();
        group.bench_function(variant.to_string(), |b| {
            b.iter(|| fit_mle(black_box(&sample), &spec, &options).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_likelihood, bench_fit);
criterion_main!(benches);
