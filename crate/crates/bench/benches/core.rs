use chrono::{NaiveDate, NaiveDateTime};
use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thermocast_core::ar::{fit_ar, pacf, rolling_forecast};
use thermocast_core::control::candidate_features;
use thermocast_core::frame::engineer_time_features;
use thermocast_core::gbm::{fit_boosted, fit_tree, Dataset, GbmConfig, TreeParams};
use thermocast_core::synth::generate;
use thermocast_core::{Frame, HouseSpec};

fn dec(day: u32) -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2019, 12, day).unwrap().and_hms_opt(0, 0, 0).unwrap()
}

fn house() -> (Frame, Vec<String>) {
    let raw = generate(&HouseSpec::house_a(), dec(1), dec(8), 2019).unwrap();
    let f = engineer_time_features(&raw).unwrap();
    let names = candidate_features(&f, "1-15-TMP1");
    (f, names)
}

fn ar_series(n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut x = vec![0.0, 0.0];
    for _ in 0..n {
        let t = x.len();
        x.push(1.0 + 0.5 * x[t - 1] + 0.3 * x[t - 2] + rng.random::<f64>() - 0.5);
    }
    x
}

fn trees(c: &mut Criterion) {
    let (f, names) = house();
    let data = Dataset::from_frame(&f, &names).unwrap();
    let y = f.values("1-15-TMP1").unwrap();
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let grad: Vec<f64> = y.iter().map(|v| mean - v).collect();
    let hess = vec![1.0; y.len()];
    let rows: Vec<usize> = (0..y.len()).collect();
    let allowed: Vec<usize> = (0..names.len()).collect();
    let params = TreeParams {
        max_depth: 4,
        lambda: 1.0,
        gamma: 0.0,
        min_child_weight: 1.0,
        features_per_split: None,
    };
    c.bench_function("fit_tree depth 4, one week", |b| {
        b.iter(|| {
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            fit_tree(&data, &rows, &grad, &hess, &allowed, &params, &mut rng).unwrap()
        })
    });
    let cfg = GbmConfig {
        n_trees: 20,
        ..GbmConfig::default()
    };
    let mut group = c.benchmark_group("boosting");
    group.sample_size(10);
    group.bench_function("fit_boosted 20 trees, one week", |b| {
        b.iter(|| fit_boosted(&f, "1-15-TMP1", &names, black_box(&cfg)).unwrap())
    });
    group.finish();
}

fn autoregression(c: &mut Criterion) {
    let x = ar_series(40_000);
    c.bench_function("pacf 40 lags, 40k points", |b| b.iter(|| pacf(black_box(&x), 40).unwrap()));
    let model = fit_ar(&x, &[1, 2, 3, 7]).unwrap();
    c.bench_function("rolling_forecast 201 steps", |b| {
        b.iter(|| rolling_forecast(&model, black_box(&x), 201).unwrap())
    });
}

criterion_group!(benches, trees, autoregression);
criterion_main!(benches);
