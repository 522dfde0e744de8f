use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lrtrans::corpus::{corpus, random_generating};
use lrtrans::nielsen_engine::{GenMultiset, Setting};
use lrtrans::solvers::{solve_batch, solve_batch_sequential};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// Random generating multisets over every corpus pair, with `max_size` or one fewer elements.
fn instances(per_pair: usize, max_size: usize, skip: &[&str]) -> Vec<GenMultiset> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut out = Vec::new();
    for cg in corpus().into_iter().filter(|c| !skip.contains(&c.name.as_str())) {
        for h in &cg.subgroups {
            let st = Setting::new(cg.group.clone(), h.clone());
            let top = st.index().min(max_size);
            for i in 0..per_pair {
                if let Ok(v) = random_generating(&cg.group, top - i % top.min(2), &mut rng) {
                    out.push(GenMultiset::new(st.clone(), &v).expect("sizes fit the index"));
                }
            }
        }
    }
    out
}

fn batch(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_batch");
    group.sample_size(10);
    for (label, per_pair, skip) in [("small groups", 8, &["alternating:5"][..]), ("full corpus", 8, &[][..])] {
        let work = instances(per_pair, 4, skip);
        group.bench_with_input(BenchmarkId::new("parallel", label), &work, |b, w| b.iter(|| solve_batch(black_box(w))));
        group.bench_with_input(BenchmarkId::new("sequential", label), &work, |b, w| b.iter(|| solve_batch_sequential(black_box(w))));
    }
    group.finish();
}

criterion_group!(benches, batch);
criterion_main!(benches);
