use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use omega_lab::fixtures;
use omega_lab::neural::{backward, forward, init_params, loss, Batch};
use omega_lab::sampling::Sampler;

fn step(c: &mut Criterion) {
    let d = fixtures::fig1();
    let s = Sampler::new(&d, 100).unwrap();
    let records = s.balanced_batch(64, 2..=32, 0.5, 4, 1).records;
    let batch = Batch::from_records(&records);
    let mut group = c.benchmark_group("rnn_batch_64");
    for hidden in [16, 64, 256] {
        let p = init_params(d.alphabet().size(), hidden, 0);
        group.bench_function(BenchmarkId::new("forward", hidden), |b| b.iter(|| forward(&p, &batch)));
        group.bench_function(BenchmarkId::new("forward_backward", hidden), |b| {
            b.iter(|| {
                let (logits, trace) = forward(&p, &batch);
                let (_, dl) = loss(&logits, &batch.labels);
                backward(&p, &trace, &dl, 5e-4)
            })
        });
    }
    group.finish();
}

criterion_group!(benches, step);
criterion_main!(benches);
