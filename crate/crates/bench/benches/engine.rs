use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use pathmark_core::experiments::DETECT_WIRE;
use pathmark_core::{
    build_reference, propagate, render_spectrum, run_spectrum_scan, time_domain_propagate, two_state, DetuningGrid,
    EtalonSpec, PhotonState, ReferenceConfig, ReferenceParams, ScanConfig, SpectralEnvelope, TimeDomainConfig,
};

fn engine(c: &mut Criterion) {
    let circuit = build_reference(ReferenceConfig::A, &ReferenceParams::default()).unwrap();
    let input = PhotonState::on_wire(circuit.source());
    let env = SpectralEnvelope::default();

    c.bench_function("propagate_config_a", |b| b.iter(|| propagate(black_box(&circuit), &input).unwrap()));

    let prop = propagate(&circuit, &input).unwrap();
    let out = prop.at(DETECT_WIRE).unwrap().clone();
    let grid = DetuningGrid { start_ghz: -12.0, stop_ghz: 12.0, step_ghz: 0.005 };
    let freqs = circuit.eom_freqs();
    c.bench_function("render_config_a", |b| {
        b.iter(|| render_spectrum(black_box(&out), DETECT_WIRE, &env, &grid, &freqs).unwrap())
    });

    let cfg = ScanConfig::default();
    c.bench_function("scan_config_a", |b| {
        b.iter(|| run_spectrum_scan(black_box(&circuit), DETECT_WIRE, &EtalonSpec::default(), &env, &cfg).unwrap())
    });

    c.bench_function("two_state_config_a", |b| b.iter(|| two_state(black_box(&circuit), DETECT_WIRE).unwrap()));

    let td = TimeDomainConfig::for_envelope(env);
    let mut g = c.benchmark_group("oracle");
    g.sample_size(10);
    g.bench_function("gaussian_config_a", |b| b.iter(|| time_domain_propagate(black_box(&circuit), &td).unwrap()));
    g.finish();
}

criterion_group!(benches, engine);
criterion_main!(benches);
