use criterion::{criterion_group, criterion_main, Criterion};
use rsg_bench::{episode, stochastic, Fixture};
use rsg_core::sim::run_episode;
use rsg_core::{MemoryModel, ResponseMode};

fn episodes(c: &mut Criterion) {
    let br = Fixture::reference(ResponseMode::Br);
    let spec = episode(ResponseMode::Br, MemoryModel::Memoryless, 50);
    c.bench_function("episode_br_h50", |b| {
        b.iter(|| run_episode(&br.game, &br.oracle, &spec, &stochastic(1), 1).unwrap())
    });

    let qr = Fixture::reference(ResponseMode::Qr);
    let spec = episode(ResponseMode::Qr, MemoryModel::FiniteMemory(10), 20);
    c.bench_function("episode_qr_fm10_h20", |b| {
        b.iter(|| run_episode(&qr.game, &qr.oracle, &spec, &stochastic(1), 1).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = episodes
}
criterion_main!(benches);
