use criterion::{criterion_group, criterion_main, Criterion};
use sideband_bench::bench_config;
use sideband_core::evaluation::{default_sweep_axes, sweep_with, SweepData};
use sideband_core::filters::{combined_filter, FilterParams};
use sideband_core::recovery::{cosine_fit, recover_phase};
use sideband_core::simulate::detector_intensity;
use sideband_core::target::TargetPreset;
use std::hint::black_box;

fn pipeline(c: &mut Criterion) {
    let cfg = bench_config(TargetPreset::SingleLine, 16);
    let params = FilterParams::for_config(&cfg);
    let grid = detector_intensity(&cfg).unwrap();
    let fit = cosine_fit(&combined_filter(&grid, &params).unwrap()).unwrap();
    let (t1s, t2s) = default_sweep_axes();

    let mut g = c.benchmark_group("single_line_16_scan");
    g.sample_size(10);
    g.bench_function("detector_intensity", |b| b.iter(|| detector_intensity(black_box(&cfg)).unwrap()));
    g.bench_function("combined_filter", |b| b.iter(|| combined_filter(black_box(&grid), &params).unwrap()));
    g.bench_function("cosine_fit", |b| {
        let fs = combined_filter(&grid, &params).unwrap();
        b.iter(|| cosine_fit(black_box(&fs)).unwrap())
    });
    g.bench_function("recover_phase", |b| b.iter(|| recover_phase(black_box(&fit), 15.0, 110.0).unwrap()));
    let data = SweepData::Phantasy(fit.clone());
    g.bench_function("sweep_default_axes", |b| b.iter(|| sweep_with(black_box(&data), &cfg.target, &t1s, &t2s, String::new())));
    g.finish();
}

criterion_group!(benches, pipeline);
criterion_main!(benches);
