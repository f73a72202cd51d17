//! Sequential against rayon execution for the bulk operations.
//!
//! On a single-core machine the two should be within noise of each other.

use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion, Throughput};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use oolex::compiler::{compile, LexiconSource};
use oolex::feature_graph::from_canonical_text;
use oolex::index_engine::Mode;
use oolex::lexicon::Lexicon;
use oolex::par::Exec;
use oolex::query_engine::{run_batch, Constraint, Query};
use oolex::synth;

const ENTRIES: usize = 2_000;
const QUERIES: usize = 500;
const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn source() -> LexiconSource {
    let (t, l, r) = synth::source_texts(ENTRIES, 1);
    LexiconSource::parse(("templates.lex", &t), ("lemmas.lex", &l), ("rules.lex", &r)).unwrap()
}

fn bench_compile(c: &mut Criterion) {
    let src = source();
    let mut g = c.benchmark_group("compile");
    g.sample_size(10).throughput(Throughput::Elements(ENTRIES as u64));
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| compile(&src, exec).unwrap()));
    }
    g.finish();
}

fn bench_build(c: &mut Criterion) {
    let entries = compile(&source(), Exec::Sequential).unwrap();
    let paths = synth::meta_paths();
    let mut g = c.benchmark_group("build_store");
    g.sample_size(10).throughput(Throughput::Elements(ENTRIES as u64));
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter_batched(
                || tempfile::tempdir().unwrap(),
                |dir| Lexicon::build(&entries, &paths, dir.path(), exec).unwrap(),
                BatchSize::PerIteration,
            )
        });
    }
    g.finish();
}

fn bench_queries(c: &mut Criterion) {
    let dir = tempfile::tempdir().unwrap();
    let entries = compile(&source(), Exec::Sequential).unwrap();
    let paths = synth::meta_paths();
    Lexicon::build(&entries, &paths, dir.path(), Exec::Sequential).unwrap();
    let lex = Lexicon::open(dir.path()).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let queries: Vec<Query> = (0..QUERIES)
        .map(|_| {
            let e = entries.choose(&mut rng).unwrap();
            let p = paths.choose(&mut rng).unwrap().clone();
            let mut cs = vec![Constraint::type_key(e.category().unwrap().key().as_str())];
            if let Some(v) = lex.meta().values(&p).choose(&mut rng) {
                cs.push(Constraint::meta(p, from_canonical_text(v).unwrap(), Mode::Liberal));
            }
            Query::new(cs)
        })
        .collect();

    let mut g = c.benchmark_group("run_batch");
    g.throughput(Throughput::Elements(QUERIES as u64));
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| run_batch(&lex, &queries, exec)));
    }
    g.finish();
}

criterion_group!(benches, bench_compile, bench_build, bench_queries);
criterion_main!(benches);
