use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use justify_bench::{session_at, window_input};
use justify_core::engine::{answer_sets, ground, AssumptionSet, SolveOptions};
use justify_core::explain::{Explainer, DEFAULT_MAX_GRAPHS};
use justify_core::npp_kb::{KbConfig, NPP_KB};
use justify_core::replay::evaluate_window;
use justify_core::rulelang::parse_program;

fn parsing(c: &mut Criterion) {
    c.bench_function("parse npp.kb", |b| b.iter(|| parse_program(black_box(NPP_KB)).unwrap()));
}

fn windows(c: &mut Criterion) {
    let cfg = KbConfig::default();
    let mut g = c.benchmark_group("window");
    g.sample_size(20);
    for end in [60, 1260, 8521] {
        let (kb, slice) = window_input(&cfg, end);
        let program = slice.program(&kb);
        g.bench_function(format!("ground {end}"), |b| b.iter(|| ground(black_box(&program)).unwrap()));
        let gp = ground(&program).unwrap();
        let opts = SolveOptions { limit: 1, ..SolveOptions::default() };
        g.bench_function(format!("solve {end}"), |b| b.iter(|| answer_sets(black_box(&gp), &opts).unwrap()));
        g.bench_function(format!("evaluate {end}"), |b| b.iter(|| evaluate_window(&kb, black_box(&slice)).unwrap()));
    }
    g.finish();
}

fn explanation(c: &mut Criterion) {
    let mut g = c.benchmark_group("explain");
    g.sample_size(20);
    let cfg = KbConfig::short_suppression();
    let s = session_at(&cfg, 1260);
    let ev = s.evaluation(1260).unwrap();
    let u = AssumptionSet::default();
    let rec = "recommendation(open,auxiliary_feedwater_a_block_valve,1201)".parse().unwrap();
    g.bench_function("prepare explainer 1260", |b| {
        b.iter(|| Explainer::new(black_box(&ev.program), &ev.answer_set, &u).unwrap())
    });
    let ex = Explainer::unchecked(&ev.program, &ev.answer_set, &u);
    g.bench_function("open-valve recommendation 1201", |b| {
        b.iter(|| ex.explain(black_box(&rec), DEFAULT_MAX_GRAPHS).unwrap())
    });
    let atoms = ev.output.significant_atoms();
    g.bench_function(format!("significant atoms 1260 ({})", atoms.len()), |b| {
        b.iter(|| atoms.iter().map(|a| ex.explain(a, DEFAULT_MAX_GRAPHS).unwrap().graphs.len()).sum::<usize>())
    });
    g.finish();
}

criterion_group!(benches, parsing, windows, explanation);
criterion_main!(benches);
