use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use frj_bench::corpus_source;
use frj_bench::frj::builtins::SensorScript;
use frj_bench::frj::check_source;
use frj_bench::frj::harness::enumerate_schedules;
use frj_bench::frj::parse::parse_program;
use frj_bench::frj::runtime::{Machine, Policy, RunOptions};

const PROGRAMS: &[&str] = &[
    "person_frp.frj",
    "fork_join.frj",
    "promotion.frj",
    "ac_controller.frj",
];

fn warm3() -> SensorScript {
    SensorScript {
        ticks: 3,
        temps: vec![30.0, 31.0, 29.0],
        humidities: vec![70.0; 3],
    }
}

fn front_end(c: &mut Criterion) {
    let mut g = c.benchmark_group("front_end");
    for file in PROGRAMS {
        let src = corpus_source(file);
        g.bench_function(format!("parse/{file}"), |b| {
            b.iter(|| parse_program(black_box(&src)).unwrap())
        });
        g.bench_function(format!("check/{file}"), |b| {
            b.iter(|| check_source(black_box(&src)).unwrap())
        });
    }
    g.finish();
}

fn interpreter(c: &mut Criterion) {
    let mut g = c.benchmark_group("run");
    for file in PROGRAMS {
        let checked = check_source(&corpus_source(file)).unwrap();
        let m = Machine::new(&checked.program, warm3());
        g.bench_function(format!("seeded/{file}"), |b| {
            b.iter(|| m.run(&RunOptions::default()).unwrap())
        });
        let par = RunOptions {
            policy: Policy::Parallel {
                workers: 4,
                seed: 0,
            },
            ..RunOptions::default()
        };
        g.bench_function(format!("parallel/{file}"), |b| {
            b.iter(|| m.run(&par).unwrap())
        });
    }
    g.finish();
}

fn enumeration(c: &mut Criterion) {
    let checked = check_source(&corpus_source("order_sensitive.frj")).unwrap();
    let m = Machine::new(&checked.program, SensorScript::default());
    c.bench_function("enumerate/order_sensitive", |b| {
        b.iter(|| enumerate_schedules(&m, 1000, 10_000, true))
    });
}

criterion_group!(benches, front_end, interpreter, enumeration);
criterion_main!(benches);
