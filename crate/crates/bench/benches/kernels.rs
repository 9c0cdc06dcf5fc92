use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use danse_core::danse::{distortion_taps, fused_sample, window_correlation, DistortionFilter};
use danse_core::mwf::{gevd, gevd_mwf_filter, CMatrix};
use danse_core::sro::{estimate_sro, SroSearch};
use danse_core::{Complex64, WolaConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: usize = 1024;

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0)
}

fn random_half(rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..=N / 2).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
}

fn wola(c: &mut Criterion) {
    let cfg = WolaConfig::sqrt_hann(N).unwrap();
    let mut rng = rng();
    let x: Vec<f64> = (0..N).map(|_| rng.random_range(-1.0..1.0)).collect();
    c.bench_function("wola_analyze_synthesize", |b| {
        b.iter(|| {
            let spec = cfg.analyze_half_at(black_box(&x), 0);
            cfg.synthesize_half(&spec).unwrap()
        })
    });
}

fn gevd_filter(c: &mut Criterion) {
    let mut rng = rng();
    // Eight channels: the largest stacked dimension in the reference layout.
    let mut spd = |shift: f64| {
        let a = CMatrix::from_fn(8, 8, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        &a * a.adjoint() + CMatrix::identity(8, 8) * Complex64::new(shift, 0.0)
    };
    let (ryy, rnn) = (spd(0.1), spd(0.5));
    c.bench_function("gevd_mwf_8ch", |b| b.iter(|| gevd_mwf_filter(&gevd(black_box(&ryy), black_box(&rnn), 0.0).unwrap(), 0).unwrap()));
}

fn distortion(c: &mut Criterion) {
    let cfg = WolaConfig::sqrt_hann(N).unwrap();
    let wc = window_correlation(&cfg);
    let mut rng = rng();
    let w = random_half(&mut rng);
    c.bench_function("distortion_taps", |b| b.iter(|| distortion_taps(black_box(&w), &cfg, &wc).unwrap()));

    let filter = DistortionFilter::from_filters(&[w.clone(), random_half(&mut rng), random_half(&mut rng)], &cfg, 30, 0).unwrap();
    let hist: Vec<Vec<f64>> = (0..3).map(|_| (0..2 * N).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let refs: Vec<&[f64]> = hist.iter().map(Vec::as_slice).collect();
    c.bench_function("fused_sample_3mic", |b| b.iter(|| fused_sample(black_box(&refs), &filter, N)));
}

fn sro(c: &mut Criterion) {
    let search = SroSearch { n: N, hop: N / 2, lag_frames: 10, half_width_ppm: 1000.0 };
    let eps = 150e-6;
    let lag = eps * (10 * N / 2) as f64;
    let avg: Vec<Complex64> = (0..=N / 2)
        .map(|nu| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * nu as f64 * lag / N as f64))
        .collect();
    c.bench_function("sro_estimate", |b| b.iter(|| estimate_sro(black_box(&avg), &search)));
}

criterion_group!(benches, wola, gevd_filter, distortion, sro);
criterion_main!(benches);
