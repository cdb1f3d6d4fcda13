use criterion::{criterion_group, criterion_main, Criterion};
use rv_core::model::examples::communication_game;
use rv_core::model::parse_ratio;
use rv_core::{e_nash, ltl_to_dpw, parse_ltl, RvOptions};

fn formula_pipeline(c: &mut Criterion) {
    c.bench_function("parse_ltl", |b| {
        b.iter(|| parse_ltl("G (req -> F grant) & !(lock U fail)").unwrap())
    });

    let response = parse_ltl("G (req -> F grant)").unwrap();
    c.bench_function("ltl_to_dpw/response", |b| {
        b.iter(|| ltl_to_dpw(&response, 1_000_000).unwrap())
    });

    let fairness = parse_ltl("(G F a -> G F b) & F c").unwrap();
    c.bench_function("ltl_to_dpw/fairness", |b| {
        b.iter(|| ltl_to_dpw(&fairness, 1_000_000).unwrap())
    });
}

fn query_pipeline(c: &mut Criterion) {
    let goal = parse_ltl("F psi").unwrap();
    let opts = RvOptions::default();
    for rounds in [3, 5] {
        let g = communication_game(rounds, &parse_ratio("1/2").unwrap());
        c.bench_function(&format!("e_nash/protocol_{rounds}"), |b| {
            b.iter(|| e_nash(&g, &goal, &opts).unwrap())
        });
    }
}

criterion_group!(benches, formula_pipeline, query_pipeline);
criterion_main!(benches);
