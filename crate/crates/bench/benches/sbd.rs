use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sbd_bench::{golden_instances, planted};
use sbd_core::bench::{baseline_sbd, BaselineOptions};
use sbd_core::commutant::{assemble_problem, nullspace, DEFAULT_TOL_REL};
use sbd_core::partition::{build_indicators, coarsest_equitable_partition};
use sbd_core::pipeline::{run_pipeline, PipelineConfig};

fn goldens(c: &mut Criterion) {
    let mut g = c.benchmark_group("golden_pipeline");
    for inst in golden_instances() {
        g.bench_with_input(BenchmarkId::from_parameter(&inst.name), &inst, |b, inst| {
            b.iter(|| run_pipeline(black_box(&inst.net), &inst.part, &PipelineConfig::default()).unwrap())
        });
    }
    g.finish();
}

fn stages(c: &mut Criterion) {
    let inst = planted(&[200]).remove(0);
    let ind = build_indicators(&inst.net, &inst.part).unwrap();
    let mut g = c.benchmark_group("stages_n200");
    g.sample_size(10);
    g.bench_function("refine", |b| b.iter(|| coarsest_equitable_partition(black_box(&inst.net))));
    g.bench_function("assemble", |b| b.iter(|| assemble_problem(black_box(&ind))));
    let prob = assemble_problem(&ind);
    g.bench_function("nullspace", |b| b.iter(|| nullspace(black_box(&prob), DEFAULT_TOL_REL).unwrap()));
    g.finish();
}

fn canonical_vs_baseline(c: &mut Criterion) {
    let mut g = c.benchmark_group("canonical_vs_baseline");
    g.sample_size(10);
    for inst in planted(&[100, 200]) {
        let n = inst.net.n_nodes();
        g.bench_with_input(BenchmarkId::new("canonical", n), &inst, |b, inst| {
            b.iter(|| run_pipeline(&inst.net, &inst.part, &PipelineConfig::default()).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("baseline", n), &inst, |b, inst| {
            b.iter(|| {
                let ind = build_indicators(&inst.net, &inst.part).unwrap();
                baseline_sbd(&ind, &BaselineOptions::default()).unwrap()
            })
        });
    }
    g.finish();
}

criterion_group!(benches, goldens, stages, canonical_vs_baseline);
criterion_main!(benches);
