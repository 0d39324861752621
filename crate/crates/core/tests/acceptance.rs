//! One line per acceptance criterion; exits non-zero if any fails.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use common::*;
use frj::builtins::SensorScript;
use frj::harness::{enumerate_schedules, race_check, replay_determinism, ReplayOptions, Verdict};
use frj::parse::parse_program;
use frj::runtime::{GcPolicy, Machine, Policy, RunOptions};
use frj::syntax::name;
use frj::typeck::{compose_modifier, meth_types, modifier_leq, subtype, MethodType};
use frj::{check_source, ClassTable, Modifier, Type};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(t: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let e = t.elapsed();
    ensure(e < limit, format!("{what} took {e:?}, limit {limit:?}"))
}

fn seeded(seed: u64) -> RunOptions {
    RunOptions {
        policy: Policy::SeededRandom(seed),
        ..RunOptions::default()
    }
}

fn positive_corpus() -> Outcome {
    let files = [
        ("person_call.frj", "\"Bob:24\""),
        ("person_frp.frj", "\"Bob:24\""),
        ("person_actor.frj", "\"Bob:24\""),
        ("fork_join.frj", "3"),
        ("promotion.frj", "F()"),
        ("ac_controller.frj", "[true; [true; [true; @[]]]]"),
    ];
    for (file, expected) in files {
        let t = Instant::now();
        let src = source(file);
        let c = check_source(&src).map_err(|d| {
            format!(
                "{file}: {} diagnostic(s), first {}",
                d.len(),
                d[0].render(file)
            )
        })?;
        let out = Machine::new(&c.program, script_for(file))
            .run(&seeded(0))
            .map_err(|e| format!("{file}: {e}"))?;
        ensure(
            out.rendered == expected,
            format!("{file}: got {}, want {expected}", out.rendered),
        )?;
        within(t, Duration::from_secs(1), file)?;
    }
    Ok(format!(
        "{} programs check clean and run under 1 s",
        files.len()
    ))
}

fn negative_corpus() -> Outcome {
    let codes = |file: &str| -> Vec<(u32, &'static str)> {
        match check_source(&source(file)) {
            Ok(_) => vec![],
            Err(d) => d.iter().map(|d| (d.span.line, d.code)).collect(),
        }
    };
    let refcaps = codes("refcaps_bad.frj");
    ensure(
        refcaps == vec![(12, "receiver-capability"), (13, "receiver-capability")],
        format!("refcaps_bad.frj: {refcaps:?}"),
    )?;
    for (file, code) in [
        ("bad_capability_in_read.frj", "capability-instantiation"),
        ("bad_signal_capture.frj", "non-imm-capture"),
        ("bad_mut_actor.frj", "invalid-actor"),
        ("bad_capsule_twice.frj", "wf-capsule-linearity"),
    ] {
        let got: Vec<&str> = codes(file).into_iter().map(|(_, c)| c).collect();
        ensure(
            got == vec![code],
            format!("{file}: got {got:?}, want [{code}]"),
        )?;
    }
    Ok("setAge on imm and read receivers: one receiver-capability each; capability-in-read, capture, actor rejected".into())
}

fn ac_pipeline() -> Outcome {
    let t = Instant::now();
    let (_, m) = machine("ac_controller.frj");
    let out = m.run(&seeded(0)).map_err(|e| e.to_string())?;
    within(t, Duration::from_secs(1), "AC pipeline")?;

    let script = warm3();
    let oracle: Vec<f64> = script
        .temps
        .iter()
        .zip(&script.humidities)
        .map(|(&t, &h)| discomfort_oracle(t, h))
        .collect();
    for (d, want) in oracle.iter().zip([81.38, 82.883, 79.877]) {
        ensure(
            (d - want).abs() < 1e-9,
            format!("oracle discomfort {d} is not {want}"),
        )?;
    }
    // The interpreter's own discomfort values, one direct call per reading.
    let ac_src = source("ac_controller.frj");
    let class_src = &ac_src
        [ac_src.find("class ComfortComputer").unwrap()..ac_src.find("capability class").unwrap()];
    for ((temp, hum), want) in script.temps.iter().zip(&script.humidities).zip(&oracle) {
        let src =
            format!("{class_src} main {{ new ComfortComputer().discomfort({temp:?}, {hum:?}) }}");
        let c = check_source(&src).map_err(|d| format!("{d:?}"))?;
        let v: f64 = Machine::new(&c.program, SensorScript::default())
            .run(&RunOptions::default())
            .map_err(|e| e.to_string())?
            .rendered
            .parse()
            .map_err(|_| "discomfort is not a float".to_string())?;
        ensure(
            (v - want).abs() < 1e-9,
            format!("interpreter discomfort {v}, oracle {want}"),
        )?;
    }
    let expected = hysteresis_oracle(&oracle);
    ensure(
        expected == vec![true; 3],
        format!("hysteresis oracle gives {expected:?}"),
    )?;
    ensure(
        out.config.host.ac_log == expected,
        format!("AC log {:?}", out.config.host.ac_log),
    )?;
    ensure(
        out.config.host.ac_log_text() == "on\non\non\n",
        "AC log text",
    )?;
    Ok(format!(
        "log on on on; discomfort {oracle:.2?} within 1e-9 of the oracle"
    ))
}

fn determinism_suite() -> Outcome {
    let t = Instant::now();
    let mut pure = 0;
    for file in POSITIVE {
        let (c, m) = machine(file);
        let impure = !c.report.expected_deterministic();
        ensure(
            impure == (*file == "order_sensitive.frj" || *file == "ac_controller.frj"),
            format!("{file}: purity {}", !impure),
        )?;
        if impure {
            continue;
        }
        pure += 1;
        let opts = ReplayOptions {
            seeds: (0..20).collect(),
            parallel_runs: 5,
            ..ReplayOptions::default()
        };
        let r = replay_determinism(file, &m, &opts);
        ensure(
            r.verdict == Verdict::Deterministic,
            format!("{file}: {:?} with {:?}", r.verdict, r.distinct),
        )?;
    }
    let (_, m) = machine("order_sensitive.frj");
    let opts = ReplayOptions {
        seeds: (0..50).collect(),
        parallel_runs: 0,
        ..ReplayOptions::default()
    };
    let r = replay_determinism("order_sensitive", &m, &opts);
    let values: BTreeSet<String> = r.distinct.iter().map(|o| o.value.clone()).collect();
    ensure(
        values.len() >= 2,
        format!("order-sensitive program gave only {values:?}"),
    )?;
    within(t, Duration::from_secs(30), "determinism suite")?;
    Ok(format!("{pure} pure programs have 1 outcome over 20 seeds + 5 parallel runs; order-sensitive gives {values:?} over 50 seeds"))
}

fn confluence() -> Outcome {
    let t = Instant::now();
    let mut notes = Vec::new();
    for (file, pure) in [
        ("micro_head.frj", true),
        ("micro_adder.frj", true),
        ("order_sensitive.frj", false),
    ] {
        let (c, m) = machine(file);
        ensure(
            c.report.expected_deterministic() == pure,
            format!("{file}: unexpected purity"),
        )?;
        let e = enumerate_schedules(&m, 10_000, 10_000, true);
        ensure(
            !e.partial && e.errors.is_empty(),
            format!("{file}: partial {} errors {:?}", e.partial, e.errors),
        )?;
        ensure(e.states <= 200, format!("{file}: {} states", e.states))?;
        ensure(
            (e.values.len() == 1) == pure,
            format!("{file}: values {:?}", e.values),
        )?;
        let values: Vec<&str> = e.values.iter().map(|o| o.value.as_str()).collect();
        notes.push(format!("{file} {} states {values:?}", e.states));
    }
    within(t, Duration::from_secs(60), "enumeration")?;
    Ok(notes.join("; "))
}

fn preservation() -> Outcome {
    let mut steps = 0;
    let mut runs = 0;
    let mut policies: Vec<Policy> = (0..40).map(Policy::SeededRandom).collect();
    policies.extend([
        Policy::RoundRobin,
        Policy::MainFirst,
        Policy::Parallel {
            workers: 4,
            seed: 0,
        },
    ]);
    for file in POSITIVE {
        let (_, m) = machine(file);
        for &policy in &policies {
            let opts = RunOptions {
                policy,
                debug_preserve: true,
                gc: GcPolicy::Every(7),
                ..RunOptions::default()
            };
            let out = m
                .run(&opts)
                .map_err(|e| format!("{file} under {policy:?}: {e}"))?;
            steps += out.stats.steps;
            runs += 1;
        }
    }
    ensure(steps >= 10_000, format!("only {steps} steps checked"))?;
    Ok(format!("{steps} steps over {runs} runs, zero violations"))
}

fn gc_transparency() -> Outcome {
    let mut runs = 0;
    for file in POSITIVE {
        let (_, m) = machine(file);
        for seed in 0..5 {
            let mut seen = BTreeSet::new();
            for gc in [GcPolicy::Never, GcPolicy::Every(1), GcPolicy::Every(1024)] {
                let out = m
                    .run(&RunOptions { gc, ..seeded(seed) })
                    .map_err(|e| format!("{file}: {e}"))?;
                seen.insert((out.rendered, out.config.host.ac_log));
                runs += 1;
            }
            ensure(seen.len() == 1, format!("{file} seed {seed}: {seen:?}"))?;
        }
    }
    Ok(format!(
        "{runs} runs; never, every-1 and every-1024 agree per seed"
    ))
}

fn race_log() -> Outcome {
    let mut updates = 0;
    for file in POSITIVE {
        let (_, m) = machine(file);
        let r = race_check(&m, 10, 4, &RunOptions::default());
        ensure(r.errors.is_empty(), format!("{file}: {:?}", r.errors))?;
        ensure(
            r.overlaps.is_empty(),
            format!("{file}: {} overlaps", r.overlaps.len()),
        )?;
        updates += r.updates.values().map(Vec::len).sum::<usize>();
    }
    Ok(format!(
        "10 parallel repetitions per program, {updates} field updates logged, no overlaps"
    ))
}

fn typing_algebra() -> Outcome {
    use Modifier::*;
    let t = |m, c: &str| Type::new(m, name(c));
    // Field modifiers are imm or mut.
    let bullets = [
        ((Imm, Imm), Imm),
        ((Mut, Imm), Imm),
        ((Imm, Mut), Imm),
        ((Mut, Mut), Mut),
        ((Imm, Capsule), Imm),
        ((Mut, Capsule), Mut),
        ((Mut, Read), Read),
        ((Imm, Read), Imm),
    ];
    for ((field, recv), want) in bullets {
        let got = compose_modifier(&t(field, "C").signal_of(1), recv);
        ensure(
            got == t(want, "C").signal_of(1),
            format!("{field} C + {recv} = {got}"),
        )?;
    }

    let expected_leq = |a: Modifier, b: Modifier| a == b || a == Capsule || b == Read;
    let table = ClassTable::new(&parse_program("class C { }").unwrap());
    for a in Modifier::ALL {
        for b in Modifier::ALL {
            ensure(
                modifier_leq(a, b) == expected_leq(a, b),
                format!("{a} <= {b}"),
            )?;
            ensure(
                subtype(&table, &t(a, "C"), &t(b, "C")) == Ok(expected_leq(a, b)),
                format!("{a} C <= {b} C"),
            )?;
            if a != b {
                ensure(
                    !(modifier_leq(a, b) && modifier_leq(b, a)),
                    format!("antisymmetry {a} {b}"),
                )?;
            }
            for c in Modifier::ALL {
                if modifier_leq(a, b) && modifier_leq(b, c) {
                    ensure(modifier_leq(a, c), format!("transitivity {a} {b} {c}"))?;
                }
            }
        }
        ensure(modifier_leq(a, a), format!("reflexivity {a}"))?;
    }
    ensure(
        !modifier_leq(Mut, Imm) && !modifier_leq(Imm, Mut),
        "mut and imm comparable",
    )?;

    let src = source("promotion.frj");
    let table = ClassTable::new(&parse_program(&src).unwrap());
    let of = meth_types(&table, &t(Imm, "MakeBox"), "of").map_err(|e| e.to_string())?;
    let want_of = vec![
        MethodType {
            params: vec![t(Imm, "MakeBox"), t(Mut, "F")],
            ret: t(Mut, "Box"),
        },
        MethodType {
            params: vec![t(Imm, "MakeBox"), t(Capsule, "F")],
            ret: t(Capsule, "Box"),
        },
        MethodType {
            params: vec![t(Imm, "MakeBox"), t(Capsule, "F")],
            ret: t(Capsule, "Box"),
        },
    ];
    ensure(
        of == want_of,
        format!("methTypes(imm MakeBox, of) = {of:?}"),
    )?;
    let f = meth_types(&table, &t(Imm, "Box"), "f").map_err(|e| e.to_string())?;
    let want_f = vec![
        MethodType {
            params: vec![t(Imm, "Box")],
            ret: t(Read, "F"),
        },
        MethodType {
            params: vec![t(Imm, "Box")],
            ret: t(Read, "F"),
        },
        MethodType {
            params: vec![t(Imm, "Box")],
            ret: t(Imm, "F"),
        },
    ];
    ensure(f == want_f, format!("methTypes(imm Box, f) = {f:?}"))?;
    Ok("8 composition cases over the 5 rules, 16 modifier pairs, both Box expansions exact".into())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("positive corpus", positive_corpus),
        ("negative corpus", negative_corpus),
        ("AC pipeline", ac_pipeline),
        ("determinism suite", determinism_suite),
        ("exhaustive confluence", confluence),
        ("preservation", preservation),
        ("GC transparency", gc_transparency),
        ("race log", race_log),
        ("typing algebra", typing_algebra),
    ];
    let mut failed = 0;
    for (i, (title, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let ms = t.elapsed().as_millis();
        match result {
            Ok(detail) => println!("criterion {}: PASS  {title} ({ms} ms): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {title} ({ms} ms): {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion/criteria failed");
        std::process::exit(1);
    }
}
