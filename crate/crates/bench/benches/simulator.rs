use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use qprobe_core::harness::benchmark;
use qprobe_core::program::Invocation;
use qprobe_core::sim::{Gate, RandomStream, StateVector};

fn gates(c: &mut Criterion) {
    let h = Gate::builtin("H", None).unwrap();
    let x = Gate::builtin("X", None).unwrap();
    let mut group = c.benchmark_group("gate");
    for n in [6usize, 10, 14] {
        let mut state = StateVector::zero(n).unwrap();
        group.bench_with_input(BenchmarkId::new("h", n), &n, |b, &n| {
            b.iter(|| state.apply_unitary(&h, &[], &[n / 2]).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("controlled_x", n), &n, |b, &n| {
            b.iter(|| state.apply_unitary(&x, &[0], &[n - 1]).unwrap())
        });
    }
    group.finish();
}

fn qft(c: &mut Criterion) {
    let program = benchmark("QFT").unwrap().program().unwrap();
    let mut group = c.benchmark_group("qft_run");
    for n in [4i64, 8, 12] {
        let inv = Invocation::new("QFT").arg("n", n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &inv, |b, inv| {
            let mut rng = RandomStream::new(0);
            b.iter(|| program.run(inv, StateVector::basis(n as usize, 1).unwrap(), &mut rng).unwrap())
        });
    }
    group.finish();
}

fn sampling(c: &mut Criterion) {
    let n = 10;
    let amps = vec![qprobe_core::sim::Complex64::new(1.0, 0.0); 1 << n];
    let state = StateVector::from_amplitudes_normalized(amps).unwrap();
    let all: Vec<usize> = (0..n).collect();
    let mut rng = RandomStream::new(0);
    c.bench_function("sample_10_qubits", |b| b.iter(|| black_box(state.sample(&all, &mut rng).unwrap())));
}

criterion_group!(benches, gates, qft, sampling);
criterion_main!(benches);
