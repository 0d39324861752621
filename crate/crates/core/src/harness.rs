//! Determinism checks: multi-seed replay, parallel race logging and bounded
//! exhaustive schedule enumeration.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use serde::Serialize;

use crate::runtime::{
    overlapping_updates, Config, Machine, Policy, RunOptions, Stats, UpdateRecord,
};
use crate::syntax::*;

/// What a run produced, as compared across schedules: the final value and
/// the AC output log.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Observation {
    pub value: String,
    pub ac_log: Vec<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub mode: String,
    pub observation: Option<Observation>,
    pub steps: u64,
    pub error: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Deterministic,
    Nondeterministic,
    /// Some run failed.
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReplayReport {
    pub program: String,
    pub runs: Vec<RunRecord>,
    pub distinct: Vec<Observation>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug)]
pub struct ReplayOptions {
    pub seeds: Vec<u64>,
    pub parallel_runs: usize,
    pub workers: usize,
    pub base: RunOptions,
}

impl Default for ReplayOptions {
    fn default() -> ReplayOptions {
        ReplayOptions {
            seeds: (0..20).collect(),
            parallel_runs: 1,
            workers: 4,
            base: RunOptions::default(),
        }
    }
}

fn record(m: &Machine, mode: String, opts: &RunOptions) -> (RunRecord, Vec<UpdateRecord>) {
    match m.run(opts) {
        Ok(out) => (
            RunRecord {
                mode,
                observation: Some(Observation {
                    value: out.rendered,
                    ac_log: out.config.host.ac_log,
                }),
                steps: out.stats.steps,
                error: None,
            },
            out.updates,
        ),
        Err(e) => (
            RunRecord {
                mode,
                observation: None,
                steps: 0,
                error: Some(e.to_string()),
            },
            Vec::new(),
        ),
    }
}

/// Runs under every seed, then in parallel mode, and compares observations.
pub fn replay_determinism(program: &str, m: &Machine, opts: &ReplayOptions) -> ReplayReport {
    let mut runs = Vec::new();
    for &seed in &opts.seeds {
        let o = RunOptions {
            policy: Policy::SeededRandom(seed),
            ..opts.base.clone()
        };
        runs.push(record(m, format!("seed {seed}"), &o).0);
    }
    for i in 0..opts.parallel_runs {
        let o = RunOptions {
            policy: Policy::Parallel {
                workers: opts.workers,
                seed: i as u64,
            },
            ..opts.base.clone()
        };
        runs.push(record(m, format!("parallel {i}"), &o).0);
    }
    let distinct: Vec<Observation> = runs
        .iter()
        .filter_map(|r| r.observation.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let verdict = if runs.iter().any(|r| r.error.is_some()) {
        Verdict::Inconclusive
    } else if distinct.len() == 1 {
        Verdict::Deterministic
    } else {
        Verdict::Nondeterministic
    };
    ReplayReport {
        program: program.to_string(),
        runs,
        distinct,
        verdict,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RaceReport {
    pub runs: usize,
    pub errors: Vec<String>,
    /// Field updates per record, in commit order.
    pub updates: BTreeMap<String, Vec<UpdateRecord>>,
    pub overlaps: Vec<(UpdateRecord, UpdateRecord)>,
}

/// Repeats parallel runs and collects every field-update window.
pub fn race_check(
    m: &Machine,
    repetitions: usize,
    workers: usize,
    base: &RunOptions,
) -> RaceReport {
    let mut report = RaceReport {
        runs: repetitions,
        errors: Vec::new(),
        updates: BTreeMap::new(),
        overlaps: Vec::new(),
    };
    for rep in 0..repetitions {
        let o = RunOptions {
            policy: Policy::Parallel {
                workers,
                seed: rep as u64,
            },
            ..base.clone()
        };
        let (run, updates) = record(m, format!("parallel {rep}"), &o);
        if let Some(e) = run.error {
            report.errors.push(e);
        }
        report.overlaps.extend(overlapping_updates(&updates));
        for u in updates {
            report
                .updates
                .entry(format!("run {rep} {}", u.loc))
                .or_default()
                .push(u);
        }
    }
    report
}

#[derive(Clone, Debug, Serialize)]
pub struct Enumeration {
    pub values: BTreeSet<Observation>,
    pub errors: BTreeSet<String>,
    pub states: usize,
    /// The depth or state bound cut some path short.
    pub partial: bool,
}

/// Renames locations and labels in order of discovery from main, then
/// through record fields and mailboxes; unreachable records follow in
/// location order. Fresh-name counters restart just past the renamed ones.
pub fn canonicalize(cfg: &Config) -> Config {
    let owners: HashMap<Label, Loc> = cfg
        .memory
        .iter()
        .flat_map(|(l, r)| r.mailbox.iter().map(move |m| (m.label, *l)))
        .collect();
    let mut locs: HashMap<Loc, Loc> = HashMap::new();
    let mut labels: HashMap<Label, Label> = HashMap::new();
    let mut queue: VecDeque<Loc> = VecDeque::new();

    fn discover(
        e: &Expr,
        locs: &mut HashMap<Loc, Loc>,
        labels: &mut HashMap<Label, Label>,
        queue: &mut VecDeque<Loc>,
        owners: &HashMap<Label, Loc>,
    ) {
        e.visit(&mut |x| match x {
            Expr::Loc(l) => see_loc(*l, locs, queue),
            Expr::Label(s) => {
                let n = labels.len() as u32;
                labels.entry(*s).or_insert(Label(n));
                if let Some(o) = owners.get(s) {
                    see_loc(*o, locs, queue);
                }
            }
            _ => {}
        });
    }
    fn see_loc(l: Loc, locs: &mut HashMap<Loc, Loc>, queue: &mut VecDeque<Loc>) {
        if !locs.contains_key(&l) {
            locs.insert(l, Loc(locs.len() as u32));
            queue.push_back(l);
        }
    }

    discover(&cfg.main, &mut locs, &mut labels, &mut queue, &owners);
    let mut order: Vec<Loc> = Vec::new();
    loop {
        while let Some(l) = queue.pop_front() {
            order.push(l);
            let Some(rec) = cfg.memory.get(&l) else {
                continue;
            };
            for v in &rec.fields {
                discover(v, &mut locs, &mut labels, &mut queue, &owners);
            }
            for m in &rec.mailbox {
                let n = labels.len() as u32;
                labels.entry(m.label).or_insert(Label(n));
                discover(&m.head, &mut locs, &mut labels, &mut queue, &owners);
                discover(&m.tail, &mut locs, &mut labels, &mut queue, &owners);
            }
        }
        match cfg.memory.keys().find(|l| !locs.contains_key(l)) {
            Some(l) => see_loc(*l, &mut locs, &mut queue),
            None => break,
        }
    }

    let rename = |e: &Expr| {
        let mut e = e.clone();
        e.rewrite(&mut |x| match x {
            Expr::Loc(l) => *l = locs.get(l).copied().unwrap_or(*l),
            Expr::Label(s) => *s = labels.get(s).copied().unwrap_or(*s),
            _ => {}
        });
        e
    };
    let mut out = Config::new(rename(&cfg.main));
    for l in order {
        if let Some(rec) = cfg.memory.get(&l) {
            let mut r = Record::new(rec.class.clone(), rec.fields.iter().map(&rename).collect());
            r.mailbox = rec
                .mailbox
                .iter()
                .map(|m| Message {
                    label: labels[&m.label],
                    head: rename(&m.head),
                    tail: rename(&m.tail),
                })
                .collect();
            out.memory.insert(locs[&l], r);
        }
    }
    out.next_loc = locs.len() as u32;
    out.next_label = labels.len() as u32;
    out.host = cfg.host.clone();
    out.host.cursors = cfg
        .host
        .cursors
        .iter()
        .map(|((l, ch), c)| {
            (
                (locs.get(l).copied().unwrap_or(Loc(u32::MAX - l.0)), *ch),
                *c,
            )
        })
        .collect();
    out
}

/// Explores every choice of non-garbage redex, depth first, memoizing
/// canonical configurations.
pub fn enumerate_schedules(
    m: &Machine,
    depth_bound: usize,
    state_bound: usize,
    memoize: bool,
) -> Enumeration {
    let mut result = Enumeration {
        values: BTreeSet::new(),
        errors: BTreeSet::new(),
        states: 0,
        partial: false,
    };
    let Ok(init) = m.initial_config() else {
        result.errors.insert("program has no main block".into());
        return result;
    };
    let mut seen: HashSet<Config> = HashSet::new();
    let mut stack = vec![(canonicalize(&init), 0usize)];
    while let Some((cfg, depth)) = stack.pop() {
        if memoize && !seen.insert(cfg.clone()) {
            continue;
        }
        result.states += 1;
        if cfg.is_terminal() {
            let value = crate::runtime::render(&cfg.memory, &cfg.main);
            result.values.insert(Observation {
                value,
                ac_log: cfg.host.ac_log.clone(),
            });
            continue;
        }
        if depth >= depth_bound || result.states >= state_bound {
            result.partial = true;
            continue;
        }
        let redexes = m.redexes(&cfg);
        if redexes.is_empty() {
            result.errors.insert("stuck".into());
            continue;
        }
        for r in redexes.iter().rev() {
            let mut next = cfg.clone();
            match m.step(&mut next, &mut Stats::default(), r) {
                Ok(_) => stack.push((canonicalize(&next), depth + 1)),
                Err(e) => {
                    result.errors.insert(e.to_string());
                }
            }
        }
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins::SensorScript;
    use crate::parse::parse_program;

    fn machine(src: &str) -> Machine {
        Machine::new(&parse_program(src).unwrap(), SensorScript::default())
    }

    #[test]
    fn canonical_form_ignores_names() {
        let mut a = Config::new(Expr::Label(Label(7)));
        let mut rec = Record::new(name("Object"), vec![]);
        rec.mailbox.push_back(Message {
            label: Label(7),
            head: Expr::int(1),
            tail: Expr::EmptySignal,
        });
        a.memory.insert(Loc(4), rec.clone());
        a.next_loc = 5;
        let mut b = Config::new(Expr::Label(Label(2)));
        rec.mailbox[0].label = Label(2);
        b.memory.insert(Loc(9), rec);
        assert_eq!(canonicalize(&a), canonicalize(&b));
    }

    #[test]
    fn micro_program_is_confluent() {
        let m = machine("main { head(@[1; @[]]) + 1 }");
        let e = enumerate_schedules(&m, 1000, 10_000, true);
        assert_eq!(
            e.values
                .iter()
                .map(|o| o.value.as_str())
                .collect::<Vec<_>>(),
            vec!["2"]
        );
        assert!(!e.partial);
        let plain = enumerate_schedules(&m, 1000, 10_000, false);
        assert_eq!(plain.values, e.values);
    }

    #[test]
    fn literal_main_replays_deterministically() {
        let m = machine("main { 42 }");
        let r = replay_determinism("lit", &m, &ReplayOptions::default());
        assert_eq!(r.verdict, Verdict::Deterministic);
        assert_eq!(r.distinct.len(), 1);
    }
}
