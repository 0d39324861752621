mod common;

use common::*;
use frj::builtins::SensorScript;
use frj::parse::{parse_expression, parse_program};
use frj::runtime::{GcPolicy, Machine, Policy, RunOptions};
use frj::syntax::name;
use frj::typeck::{compose_modifier, meth_types, subtype};
use frj::{check_source, print, ClassTable, Expr, Modifier, Type};
use proptest::prelude::*;

const HIERARCHY: &str = "interface Shape { } interface Solid extends Shape { }
    class Cube implements Solid { } class Dot implements Shape { } class Other { }";

fn modifier() -> impl Strategy<Value = Modifier> {
    prop::sample::select(Modifier::ALL.to_vec())
}

fn ty() -> impl Strategy<Value = Type> {
    (
        0u32..3,
        modifier(),
        prop::sample::select(vec!["Shape", "Solid", "Cube", "Dot", "Other"]),
    )
        .prop_map(|(d, m, c)| Type::new(m, name(c)).signal_of(d))
}

fn ident() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["x", "y", "acc", "p2", "value"]).prop_map(str::to_string)
}

fn class_name() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["Person", "Box", "F"]).prop_map(str::to_string)
}

fn literal() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-1000i64..1000).prop_map(Expr::int),
        any::<bool>().prop_map(Expr::boolean),
        (-1.0e6f64..1.0e6).prop_map(Expr::float),
        "[a-z :\"\\\\]{0,6}".prop_map(|s| Expr::string(&s)),
    ]
}

/// Source-level expressions: no locations, labels or completed signals.
fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        literal(),
        ident().prop_map(|x| Expr::var(&x)),
        Just(Expr::EmptySignal)
    ];
    leaf.prop_recursive(4, 40, 3, |inner| {
        let args = prop::collection::vec(inner.clone(), 0..3);
        prop_oneof![
            (inner.clone(), ident(), args.clone()).prop_map(|(r, m, a)| Expr::call(r, &m, a)),
            (inner.clone(), ident(), args.clone()).prop_map(|(r, m, a)| Expr::lift(r, &m, a)),
            (inner.clone(), ident()).prop_map(|(r, f)| Expr::field(r, &f)),
            (inner.clone(), ident(), inner.clone()).prop_map(|(r, f, v)| Expr::Assign {
                recv: Box::new(r),
                field: name(&f),
                value: Box::new(v)
            }),
            (class_name(), args).prop_map(|(c, a)| Expr::new_object(&c, a)),
            (inner.clone(), inner.clone()).prop_map(|(h, t)| Expr::signal(h, t)),
            inner.clone().prop_map(Expr::head),
            inner.clone().prop_map(|e| Expr::Tail(Box::new(e))),
            (inner.clone(), inner.clone(), inner).prop_map(|(c, a, b)| Expr::Cond {
                cond: Box::new(c),
                then: Box::new(a),
                els: Box::new(b)
            }),
        ]
    })
}

proptest! {
    #[test]
    fn subtyping_is_a_partial_order(a in ty(), b in ty(), c in ty()) {
        let table = ClassTable::new(&parse_program(HIERARCHY).unwrap());
        let le = |x: &Type, y: &Type| subtype(&table, x, y).unwrap();
        prop_assert!(le(&a, &a));
        if le(&a, &b) && le(&b, &a) {
            prop_assert_eq!(&a, &b);
        }
        if le(&a, &b) && le(&b, &c) {
            prop_assert!(le(&a, &c));
        }
    }

    #[test]
    fn composing_under_imm_stays_imm(field_mut in any::<bool>(), depth in 0u32..3, recv in modifier()) {
        let field = Type::new(if field_mut { Modifier::Mut } else { Modifier::Imm }, name("C")).signal_of(depth);
        let once = compose_modifier(&field, Modifier::Imm);
        prop_assert_eq!(once.modifier, Modifier::Imm);
        let twice = compose_modifier(&once, recv);
        prop_assert_eq!(twice.modifier, Modifier::Imm);
        prop_assert_eq!(twice.depth, depth);
    }

    #[test]
    fn printed_expressions_parse_back(e in expr()) {
        let text = print::expr(&e);
        let back = parse_expression(&text).map_err(|d| TestCaseError::fail(format!("{text}: {}", d.message)))?;
        prop_assert_eq!(back, e, "{}", text);
    }

    #[test]
    fn gc_never_changes_the_result(file in prop::sample::select(POSITIVE.to_vec()), seed in 0u64..1000, k in 1u64..64) {
        let (_, m) = machine(file);
        let run = |gc| m.run(&RunOptions { policy: Policy::SeededRandom(seed), gc, ..RunOptions::default() }).unwrap();
        let (a, b, c) = (run(GcPolicy::Never), run(GcPolicy::Every(k)), run(GcPolicy::OnTerminal));
        prop_assert_eq!(&a.rendered, &b.rendered);
        prop_assert_eq!(&a.rendered, &c.rendered);
        prop_assert_eq!(&a.config.host.ac_log, &b.config.host.ac_log);
        prop_assert!(c.config.memory.len() <= a.config.memory.len());
    }

    #[test]
    fn ac_pipeline_matches_hysteresis_oracle(
        readings in prop::collection::vec((20.0f64..34.0, 40.0f64..90.0), 1..8),
        seed in 0u64..50,
    ) {
        let script = SensorScript {
            ticks: readings.len(),
            temps: readings.iter().map(|r| r.0).collect(),
            humidities: readings.iter().map(|r| r.1).collect(),
        };
        let c = checked("ac_controller.frj");
        let out = Machine::new(&c.program, script)
            .run(&RunOptions { policy: Policy::SeededRandom(seed), ..RunOptions::default() })
            .unwrap();
        let d: Vec<f64> = readings.iter().map(|&(t, h)| discomfort_oracle(t, h)).collect();
        // Readings within rounding distance of a threshold are skipped.
        prop_assume!(d.iter().all(|x| (x - 75.5).abs() > 1e-9 && (x - 74.5).abs() > 1e-9));
        prop_assert_eq!(out.config.host.ac_log, hysteresis_oracle(&d));
    }

    #[test]
    fn meth_types_only_strengthen(recv in modifier()) {
        let table = ClassTable::new(&parse_program(&source("promotion.frj")).unwrap());
        let recv_t = Type::new(recv, name("Box"));
        // `f` is a read method, so every receiver qualifies.
        let ts = meth_types(&table, &recv_t, "f").unwrap();
        prop_assert_eq!(ts.len(), 3);
        for t in &ts[1..] {
            prop_assert!(subtype(&table, &t.ret, &ts[0].ret).unwrap());
        }
    }
}

#[test]
fn corpus_round_trips_through_the_printer() {
    for file in POSITIVE {
        let p = parse_program(&source(file)).unwrap();
        let text = print::program(&p);
        let again = parse_program(&text).unwrap_or_else(|d| panic!("{file}: {d:?}\n{text}"));
        assert_eq!(again, p, "{file}");
        assert!(
            check_source(&text).is_ok(),
            "{file} reprinted no longer checks"
        );
    }
}

#[test]
fn hysteresis_holds_state_between_thresholds() {
    assert_eq!(
        hysteresis_oracle(&[75.0, 76.0, 75.0, 74.0, 75.0]),
        vec![false, true, true, false, false]
    );
    let script = SensorScript {
        ticks: 3,
        temps: vec![20.0, 20.0, 20.0],
        humidities: vec![50.0; 3],
    };
    let c = checked("ac_controller.frj");
    let out = Machine::new(&c.program, script)
        .run(&RunOptions::default())
        .unwrap();
    assert_eq!(out.config.host.ac_log, vec![false; 3]);
}
