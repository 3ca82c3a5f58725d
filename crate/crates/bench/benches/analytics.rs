use std::hint::black_box;

use cliox_bench::{masked_docs, raw_docs};
use cliox_core::analytics::kmeans::{kmeans, KMeansConfig};
use cliox_core::analytics::lda::{lda, LdaConfig};
use cliox_core::analytics::mask::{mask_corpus, NameDictionary};
use cliox_core::analytics::tfidf::tfidf;
use cliox_core::analytics::tokenize::terms;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

fn masking(c: &mut Criterion) {
    let mut g = c.benchmark_group("mask_corpus");
    for n in [100, 1_000] {
        let docs = raw_docs(n);
        g.throughput(Throughput::Elements(n as u64));
        g.bench_with_input(BenchmarkId::from_parameter(n), &docs, |b, docs| {
            b.iter(|| mask_corpus(black_box(docs), NameDictionary::builtin()))
        });
    }
    g.finish();
}

fn tfidf_matrix(c: &mut Criterion) {
    let mut g = c.benchmark_group("tfidf");
    for n in [100, 1_000] {
        let docs = masked_docs(n);
        g.throughput(Throughput::Elements(n as u64));
        g.bench_with_input(BenchmarkId::from_parameter(n), &docs, |b, docs| b.iter(|| tfidf(black_box(docs)).unwrap()));
    }
    g.finish();
}

fn clustering(c: &mut Criterion) {
    let matrix = tfidf(&masked_docs(1_000)).unwrap();
    let mut g = c.benchmark_group("kmeans_1000_docs");
    for k in [3, 8] {
        g.bench_with_input(BenchmarkId::from_parameter(k), &k, |b, &k| {
            b.iter(|| kmeans(black_box(&matrix.rows), matrix.n_terms(), &KMeansConfig::new(k, 7)).unwrap())
        });
    }
    g.finish();
}

fn topics(c: &mut Criterion) {
    let tokens: Vec<Vec<String>> = masked_docs(300).iter().map(|d| terms(&d.masked_body)).collect();
    let mut g = c.benchmark_group("lda_300_docs");
    g.sample_size(10);
    for n_topics in [3, 10] {
        let config = LdaConfig { iters: 50, ..LdaConfig::new(n_topics, 7) };
        g.bench_with_input(BenchmarkId::from_parameter(n_topics), &config, |b, config| {
            b.iter(|| lda(black_box(&tokens), config).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, masking, tfidf_matrix, clustering, topics);
criterion_main!(benches);
