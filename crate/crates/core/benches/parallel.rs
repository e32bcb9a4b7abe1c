use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rayon::ThreadPoolBuilder;

use voicescreen::cohort::{make_cohort, CohortSpec};
use voicescreen::ml::{cross_validate, subset_search, CvConfig, ModelSpec};
use voicescreen::pitch::{estimate_f0, F0Config};
use voicescreen::synth::{synth_voice, SynthSpec};

fn pools() -> Vec<(String, rayon::ThreadPool)> {
    let default = ThreadPoolBuilder::new().build().expect("default pool");
    let n = default.current_num_threads();
    vec![
        (
            "1-thread".to_string(),
            ThreadPoolBuilder::new()
                .num_threads(1)
                .build()
                .expect("pool"),
        ),
        (format!("{n}-threads"), default),
    ]
}

fn bench_f0(c: &mut Criterion) {
    let w = synth_voice(&SynthSpec {
        duration_s: 5.0,
        jitter_pct: 1.0,
        ..Default::default()
    })
    .expect("synth")
    .waveform;
    let cfg = F0Config::default();
    let mut g = c.benchmark_group("estimate_f0_5s");
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::from_parameter(&name), |b| {
            pool.install(|| b.iter(|| estimate_f0(&w, &cfg).expect("f0")))
        });
    }
    g.finish();
}

fn bench_cv(c: &mut Criterion) {
    let d = make_cohort(&CohortSpec::default(), 1).expect("cohort");
    let subset = d.parse_subset("S1,S3,S11,PVI").expect("subset");
    let cfg = CvConfig {
        seed: 1,
        ..Default::default()
    };
    let mut g = c.benchmark_group("cv_7x40");
    for (name, pool) in pools() {
        for model in [ModelSpec::lda(), ModelSpec::knn()] {
            let id = BenchmarkId::new(format!("{:?}", model.kind), &name);
            g.bench_function(id, |b| {
                pool.install(|| b.iter(|| cross_validate(&d, &model, &subset, &cfg).expect("cv")))
            });
        }
    }
    g.finish();
}

fn bench_search(c: &mut Criterion) {
    let d = make_cohort(&CohortSpec::default(), 1).expect("cohort");
    let cfg = CvConfig {
        seed: 1,
        ..Default::default()
    };
    let mut g = c.benchmark_group("subset_search_255");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::from_parameter(&name), |b| {
            pool.install(|| b.iter(|| subset_search(&d, &ModelSpec::lda(), &cfg).expect("search")))
        });
    }
    g.finish();
}

criterion_group!(benches, bench_f0, bench_cv, bench_search);
criterion_main!(benches);
