//! Small-step reduction of configurations `μ | e`.
//!
//! Each record's mailbox is processed from its oldest message; only that
//! message's head (then tail) reduces, and new messages queue behind it.

mod parallel;
pub mod redex;
mod sched;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::builtins::{self, HostState, NativeError, PrimError, SensorScript};
use crate::syntax::*;
use crate::table::ClassTable;
use crate::wf;

pub use parallel::{overlapping_updates, run_parallel, UpdateRecord};
pub use redex::{focus, Focus, Redex, Rule, Site, SiteKey};
pub use sched::{GcPolicy, Policy, Scheduler};

pub const DEFAULT_MAX_STEPS: u64 = 1_000_000;

/// Memory, main expression, fresh-name counters and host-side device state.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Config {
    pub memory: Memory,
    pub main: Expr,
    pub next_loc: u32,
    pub next_label: u32,
    pub host: HostState,
}

impl Config {
    pub fn new(main: Expr) -> Config {
        Config {
            memory: Memory::new(),
            main,
            next_loc: 0,
            next_label: 0,
            host: HostState::default(),
        }
    }

    fn fresh_loc(&mut self) -> Loc {
        self.next_loc += 1;
        Loc(self.next_loc - 1)
    }

    fn fresh_label(&mut self) -> Label {
        self.next_label += 1;
        Label(self.next_label - 1)
    }

    fn message_mut(&mut self, l: Loc, s: Label) -> Option<&mut Message> {
        self.memory
            .get_mut(&l)?
            .mailbox
            .iter_mut()
            .find(|m| m.label == s)
    }

    fn site_expr_mut(&mut self, site: Site) -> Option<&mut Expr> {
        match site {
            Site::Main => Some(&mut self.main),
            Site::Head(l, s) => Some(&mut self.message_mut(l, s)?.head),
            Site::Tail(l, s) => Some(&mut self.message_mut(l, s)?.tail),
            _ => None,
        }
    }

    pub fn site_expr(&self, site: Site) -> Option<&Expr> {
        let msg = |l: Loc, s: Label| self.memory.get(&l)?.mailbox.iter().find(|m| m.label == s);
        match site {
            Site::Main => Some(&self.main),
            Site::Head(l, s) => Some(&msg(l, s)?.head),
            Site::Tail(l, s) => Some(&msg(l, s)?.tail),
            _ => None,
        }
    }

    /// Replaces every occurrence of label `s` in memory and main.
    fn substitute_label(&mut self, s: Label, by: &Expr) {
        let mut sub = |e: &mut Expr| {
            e.rewrite(&mut |x| {
                if *x == Expr::Label(s) {
                    *x = by.clone();
                }
            })
        };
        sub(&mut self.main);
        for rec in self.memory.values_mut() {
            rec.fields.iter_mut().for_each(&mut sub);
            for m in rec.mailbox.iter_mut() {
                sub(&mut m.head);
                sub(&mut m.tail);
            }
        }
    }

    /// Locations reachable from the main expression.
    pub fn reachable(&self) -> BTreeSet<Loc> {
        let owners: HashMap<Label, Loc> = self
            .memory
            .iter()
            .flat_map(|(l, r)| r.mailbox.iter().map(move |m| (m.label, *l)))
            .collect();
        let mut seen = BTreeSet::new();
        let mut work = Vec::new();
        let roots = |e: &Expr, work: &mut Vec<Loc>| {
            e.visit(&mut |x| match x {
                Expr::Loc(l) => work.push(*l),
                Expr::Label(s) => work.extend(owners.get(s)),
                _ => {}
            })
        };
        roots(&self.main, &mut work);
        while let Some(l) = work.pop() {
            if !seen.insert(l) {
                continue;
            }
            if let Some(rec) = self.memory.get(&l) {
                for v in &rec.fields {
                    roots(v, &mut work);
                }
                for m in &rec.mailbox {
                    roots(&m.head, &mut work);
                    roots(&m.tail, &mut work);
                }
            }
        }
        seen
    }

    /// Main is a value and no reachable record has a pending message.
    pub fn is_terminal(&self) -> bool {
        self.main.is_value()
            && self
                .reachable()
                .iter()
                .all(|l| self.memory.get(l).is_none_or(|r| r.mailbox.is_empty()))
    }

    /// Rule (garbage): drops unreachable records. Returns how many.
    pub fn collect_garbage(&mut self) -> usize {
        let live = self.reachable();
        let before = self.memory.len();
        self.memory.retain(|l, _| live.contains(l));
        before - self.memory.len()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub steps: u64,
    pub allocations: u64,
    pub messages_created: u64,
    pub messages_completed: u64,
    pub messages_emptied: u64,
    pub gc_collections: u64,
    pub gc_records_dropped: u64,
}

/// What a fired step touched.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StepInfo {
    pub rule: Rule,
    pub site: Site,
    pub detail: Option<String>,
    /// `(L, f)` for a field update.
    pub update: Option<(Loc, Name)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    pub index: u64,
    pub rule: Rule,
    pub site: Site,
    pub detail: Option<String>,
}

impl fmt::Display for TraceEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{} {} @{}", self.index, self.rule, self.site)?;
        if let Some(d) = &self.detail {
            write!(f, " [{d}]")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum RuntimeError {
    #[error("program has no main block")]
    NoMain,
    #[error("stuck configuration: no rule applies and the run has not finished")]
    Stuck(Box<Config>),
    #[error("step limit of {limit} exceeded")]
    StepLimit { limit: u64, config: Box<Config> },
    #[error("main expression reached head(@[])")]
    EmptySignalInMain(Box<Config>),
    #[error(transparent)]
    Prim(#[from] PrimError),
    #[error(transparent)]
    Native(#[from] NativeError),
    #[error("preservation violated after step {step}: {report}")]
    Preservation { step: u64, report: String },
    #[error("internal error: {0}")]
    Internal(String),
}

impl RuntimeError {
    pub fn config(&self) -> Option<&Config> {
        match self {
            RuntimeError::Stuck(c) | RuntimeError::EmptySignalInMain(c) => Some(c),
            RuntimeError::StepLimit { config, .. } => Some(config),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
enum Code {
    Source(Expr),
    Native(Native),
}

#[derive(Clone, Debug)]
struct MethodImpl {
    params: Vec<Name>,
    code: Code,
}

/// Program-wide data needed to reduce: class table, method bodies and the
/// sensor script.
#[derive(Clone, Debug)]
pub struct Machine {
    pub table: ClassTable,
    pub script: SensorScript,
    methods: HashMap<(Name, Name), MethodImpl>,
    main: Option<Expr>,
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub policy: Policy,
    pub max_steps: u64,
    pub gc: GcPolicy,
    pub trace: bool,
    pub debug_preserve: bool,
}

impl Default for RunOptions {
    fn default() -> RunOptions {
        RunOptions {
            policy: Policy::SeededRandom(0),
            max_steps: DEFAULT_MAX_STEPS,
            gc: GcPolicy::default(),
            trace: false,
            debug_preserve: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub value: Expr,
    pub rendered: String,
    pub config: Config,
    pub stats: Stats,
    pub trace: Vec<TraceEntry>,
    /// Field-update log; filled in parallel mode.
    pub updates: Vec<UpdateRecord>,
}

fn substitute_vars(e: &mut Expr, env: &HashMap<Name, Expr>) {
    match e {
        Expr::Var(x) => {
            if let Some(v) = env.get(x) {
                *e = v.clone();
            }
        }
        Expr::Let {
            name: Some(x),
            init,
            body,
            ..
        } if env.contains_key(x) => {
            substitute_vars(init, env);
            let mut inner = env.clone();
            inner.remove(x);
            substitute_vars(body, &inner);
        }
        _ => {
            for c in e.children_mut() {
                substitute_vars(c, env);
            }
        }
    }
}

impl Machine {
    pub fn new(program: &Program, script: SensorScript) -> Machine {
        let table = ClassTable::new(program);
        let mut methods = HashMap::new();
        for d in builtins::declarations().iter().chain(&program.decls) {
            let Decl::Class(c) = d else { continue };
            for m in &c.methods {
                let code = match &m.body {
                    MethodBody::Source(b) => Code::Source(b.to_expr()),
                    MethodBody::Native(n) => Code::Native(*n),
                };
                let params = m.header.params.iter().map(|p| p.name.clone()).collect();
                methods
                    .entry((c.name.clone(), m.header.name.clone()))
                    .or_insert(MethodImpl { params, code });
            }
        }
        Machine {
            table,
            script,
            methods,
            main: program.main.as_ref().map(Body::to_expr),
        }
    }

    pub fn initial_config(&self) -> Result<Config, RuntimeError> {
        self.main
            .clone()
            .map(Config::new)
            .ok_or(RuntimeError::NoMain)
    }

    /// Reduction redexes, excluding (garbage): main first, then mailboxes
    /// by ascending location.
    pub fn redexes(&self, cfg: &Config) -> Vec<Redex> {
        let mut out = Vec::new();
        if let Focus::Redex(path, rule) = focus(&cfg.main) {
            out.push(Redex {
                site: Site::Main,
                rule,
                path,
            });
        }
        for (l, rec) in &cfg.memory {
            let Some(msg) = rec.active() else { continue };
            let s = msg.label;
            let (expr, site) = if !msg.head.is_value() {
                (&msg.head, Site::Head(*l, s))
            } else if !msg.tail.is_value() {
                (&msg.tail, Site::Tail(*l, s))
            } else {
                if msg.tail.is_signal_value() {
                    out.push(Redex {
                        site: Site::Complete(*l, s),
                        rule: Rule::MsgComplete,
                        path: vec![],
                    });
                }
                continue;
            };
            match focus(expr) {
                Focus::Redex(path, rule) => out.push(Redex { site, rule, path }),
                Focus::EmptyHead(_) => out.push(Redex {
                    site: Site::Empty(*l, s),
                    rule: Rule::Empty,
                    path: vec![],
                }),
                Focus::Value | Focus::Blocked(_) | Focus::Wrong(_) => {}
            }
        }
        out
    }

    /// All fireable redexes, including (garbage) when memory holds
    /// unreachable records.
    pub fn enabled_redexes(&self, cfg: &Config) -> Vec<Redex> {
        let mut out = self.redexes(cfg);
        if cfg.reachable().len() < cfg.memory.len() {
            out.push(Redex {
                site: Site::Garbage,
                rule: Rule::Garbage,
                path: vec![],
            });
        }
        out
    }

    /// Fires one redex. The redex must be enabled in `cfg`.
    pub fn step(
        &self,
        cfg: &mut Config,
        stats: &mut Stats,
        r: &Redex,
    ) -> Result<StepInfo, RuntimeError> {
        let mut info = StepInfo {
            rule: r.rule,
            site: r.site,
            detail: None,
            update: None,
        };
        match r.site {
            Site::Garbage => {
                let dropped = cfg.collect_garbage();
                stats.gc_collections += 1;
                stats.gc_records_dropped += dropped as u64;
                info.detail = Some(format!("{dropped} records"));
                return Ok(info);
            }
            Site::Complete(l, s) | Site::Empty(l, s) => {
                let rec = cfg
                    .memory
                    .get_mut(&l)
                    .ok_or_else(|| internal("message site vanished"))?;
                let msg = match rec.mailbox.back() {
                    Some(m) if m.label == s => rec.mailbox.pop_back().unwrap(),
                    _ => return Err(internal("message is not the active one")),
                };
                let by = if r.rule == Rule::MsgComplete {
                    stats.messages_completed += 1;
                    Expr::done(msg.head, msg.tail)
                } else {
                    stats.messages_emptied += 1;
                    Expr::EmptySignal
                };
                cfg.substitute_label(s, &by);
                info.detail = Some(format!("{s}"));
                stats.steps += 1;
                return Ok(info);
            }
            _ => {}
        }
        let slot = cfg
            .site_expr_mut(r.site)
            .ok_or_else(|| internal("site vanished"))?;
        let mut site_expr = std::mem::replace(slot, Expr::EmptySignal);
        let target = redex::at_path_mut(&mut site_expr, &r.path);
        let result = self.contract(cfg, stats, target, r.rule, &mut info);
        *cfg.site_expr_mut(r.site).expect("site still present") = site_expr;
        result?;
        stats.steps += 1;
        Ok(info)
    }

    fn contract(
        &self,
        cfg: &mut Config,
        stats: &mut Stats,
        e: &mut Expr,
        rule: Rule,
        info: &mut StepInfo,
    ) -> Result<(), RuntimeError> {
        let old = std::mem::replace(e, Expr::EmptySignal);
        *e = match (rule, old) {
            (Rule::FAccess, Expr::Field { recv, field }) => {
                let (l, idx) = self.field_slot(cfg, &recv, &field)?;
                cfg.memory[&l].fields[idx].clone()
            }
            (Rule::FUpdate, Expr::Assign { recv, field, value }) => {
                let (l, idx) = self.field_slot(cfg, &recv, &field)?;
                cfg.memory.get_mut(&l).unwrap().fields[idx] = (*value).clone();
                info.update = Some((l, field));
                info.detail = Some(format!("{l}"));
                *value
            }
            (Rule::New, Expr::New { class, args }) => {
                let l = cfg.fresh_loc();
                cfg.memory.insert(l, Record::new(class, args));
                stats.allocations += 1;
                info.detail = Some(format!("{l}"));
                Expr::Loc(l)
            }
            (Rule::MCall, Expr::Call { recv, method, args }) => {
                let Expr::Loc(l) = *recv else {
                    return Err(internal("mCall on non-location"));
                };
                let class = &cfg
                    .memory
                    .get(&l)
                    .ok_or_else(|| internal("dangling location"))?
                    .class;
                let m = self
                    .methods
                    .get(&(class.clone(), method.clone()))
                    .ok_or_else(|| internal(format!("no method {class}.{method}")))?;
                info.detail = Some(format!("{l}"));
                match &m.code {
                    Code::Native(op) => {
                        builtins::call_native(*op, l, &args, &self.script, &mut cfg.host)?
                    }
                    Code::Source(body) => {
                        let mut env: HashMap<Name, Expr> =
                            m.params.iter().cloned().zip(args).collect();
                        env.insert(name("this"), Expr::Loc(l));
                        let mut body = body.clone();
                        substitute_vars(&mut body, &env);
                        body
                    }
                }
            }
            (Rule::Prim, Expr::Call { recv, method, args }) => {
                let Expr::Lit(p) = *recv else {
                    return Err(internal("prim on non-literal"));
                };
                let vals = args
                    .into_iter()
                    .map(|a| match a {
                        Expr::Lit(v) => Ok(v),
                        other => Err(internal(format!(
                            "primitive argument `{other}` is not a literal"
                        ))),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Expr::Lit(builtins::eval_prim(&p, &method, &vals)?)
            }
            (
                Rule::Let,
                Expr::Let {
                    name,
                    init,
                    mut body,
                    ..
                },
            ) => {
                if let Some(x) = name {
                    substitute_vars(&mut body, &HashMap::from([(x, *init)]));
                }
                *body
            }
            (Rule::Cond, Expr::Cond { cond, then, els }) => match *cond {
                Expr::Lit(Prim::Bool(true)) => *then,
                Expr::Lit(Prim::Bool(false)) => *els,
                _ => return Err(internal("non-Bool condition")),
            },
            (Rule::Head, Expr::Head(inner)) => match *inner {
                Expr::Done { head, .. } => *head,
                _ => return Err(internal("head of incomplete signal")),
            },
            (Rule::Tail, Expr::Tail(inner)) => match *inner {
                Expr::Done { tail, .. } => *tail,
                _ => return Err(internal("tail of incomplete signal")),
            },
            (Rule::TailEmpty, Expr::Tail(_)) => Expr::EmptySignal,
            (Rule::ExplicitS, Expr::Signal { head, tail }) => {
                let (l, s) = (cfg.fresh_loc(), cfg.fresh_label());
                let mut rec = Record::new(name("Object"), Vec::new());
                rec.mailbox.push_front(Message {
                    label: s,
                    head: *head,
                    tail: *tail,
                });
                cfg.memory.insert(l, rec);
                stats.allocations += 1;
                stats.messages_created += 1;
                info.detail = Some(format!("{l}/{s}"));
                Expr::Label(s)
            }
            (Rule::LiftS, Expr::Lift { recv, method, args }) => {
                let Expr::Loc(l) = *recv else {
                    return Err(internal("liftS on non-location"));
                };
                let heads = args.iter().map(|a| Expr::head(a.clone())).collect();
                let tails = args.iter().map(|a| Expr::tail(a.clone())).collect();
                let s = cfg.fresh_label();
                let msg = Message {
                    label: s,
                    head: Expr::Call {
                        recv: Box::new(Expr::Loc(l)),
                        method: method.clone(),
                        args: heads,
                    },
                    tail: Expr::Lift {
                        recv: Box::new(Expr::Loc(l)),
                        method,
                        args: tails,
                    },
                };
                cfg.memory
                    .get_mut(&l)
                    .ok_or_else(|| internal("dangling location"))?
                    .mailbox
                    .push_front(msg);
                stats.messages_created += 1;
                info.detail = Some(format!("{l}/{s}"));
                Expr::Label(s)
            }
            (rule, other) => {
                let msg = format!("rule {rule} does not apply to `{other}`");
                *e = other;
                return Err(internal(msg));
            }
        };
        Ok(())
    }

    fn field_slot(
        &self,
        cfg: &Config,
        recv: &Expr,
        field: &str,
    ) -> Result<(Loc, usize), RuntimeError> {
        let Expr::Loc(l) = recv else {
            return Err(internal("field access on non-location"));
        };
        let rec = cfg
            .memory
            .get(l)
            .ok_or_else(|| internal(format!("dangling location {l}")))?;
        let idx = self
            .table
            .class(&rec.class)
            .ok()
            .and_then(|c| c.field_index(field))
            .ok_or_else(|| internal(format!("{} has no field {field}", rec.class)))?;
        Ok((*l, idx))
    }

    /// Runs to completion under `opts`.
    pub fn run(&self, opts: &RunOptions) -> Result<Outcome, RuntimeError> {
        if let Policy::Parallel { workers, seed } = opts.policy {
            return run_parallel(self, workers, seed, opts);
        }
        let mut cfg = self.initial_config()?;
        let mut sched = Scheduler::new(opts.policy);
        let mut stats = Stats::default();
        let mut trace = Vec::new();
        loop {
            if let Focus::EmptyHead(_) = focus(&cfg.main) {
                return Err(RuntimeError::EmptySignalInMain(Box::new(cfg)));
            }
            if cfg.is_terminal() {
                break;
            }
            let redexes = self.redexes(&cfg);
            if redexes.is_empty() {
                return Err(RuntimeError::Stuck(Box::new(cfg)));
            }
            if stats.steps >= opts.max_steps {
                return Err(RuntimeError::StepLimit {
                    limit: opts.max_steps,
                    config: Box::new(cfg),
                });
            }
            let r = &redexes[sched.choose(&redexes)];
            let info = self.step(&mut cfg, &mut stats, r)?;
            self.after_step(&mut cfg, &mut stats, &mut trace, info, opts)?;
        }
        self.finish(cfg, stats, trace, Vec::new(), opts)
    }

    fn after_step(
        &self,
        cfg: &mut Config,
        stats: &mut Stats,
        trace: &mut Vec<TraceEntry>,
        info: StepInfo,
        opts: &RunOptions,
    ) -> Result<(), RuntimeError> {
        if opts.trace {
            trace.push(TraceEntry {
                index: stats.steps,
                rule: info.rule,
                site: info.site,
                detail: info.detail,
            });
        }
        if opts.debug_preserve {
            let report = wf::check_config(&cfg.memory, &cfg.main);
            if !report.is_ok() {
                return Err(RuntimeError::Preservation {
                    step: stats.steps,
                    report: report.to_string(),
                });
            }
        }
        if let GcPolicy::Every(k) = opts.gc {
            if k > 0 && stats.steps.is_multiple_of(k) {
                self.gc(cfg, stats, trace, opts);
            }
        }
        Ok(())
    }

    fn gc(
        &self,
        cfg: &mut Config,
        stats: &mut Stats,
        trace: &mut Vec<TraceEntry>,
        opts: &RunOptions,
    ) {
        let dropped = cfg.collect_garbage();
        if dropped > 0 {
            stats.gc_collections += 1;
            stats.gc_records_dropped += dropped as u64;
            if opts.trace {
                trace.push(TraceEntry {
                    index: stats.steps,
                    rule: Rule::Garbage,
                    site: Site::Garbage,
                    detail: Some(format!("{dropped} records")),
                });
            }
        }
    }

    fn finish(
        &self,
        mut cfg: Config,
        mut stats: Stats,
        mut trace: Vec<TraceEntry>,
        updates: Vec<UpdateRecord>,
        opts: &RunOptions,
    ) -> Result<Outcome, RuntimeError> {
        if opts.gc == GcPolicy::OnTerminal {
            self.gc(&mut cfg, &mut stats, &mut trace, opts);
        }
        let value = cfg.main.clone();
        let rendered = render(&cfg.memory, &value);
        Ok(Outcome {
            value,
            rendered,
            config: cfg,
            stats,
            trace,
            updates,
        })
    }
}

fn internal(msg: impl Into<String>) -> RuntimeError {
    RuntimeError::Internal(msg.into())
}

/// Renders a value for output. Objects print as `C(fields)` with a guard
/// against cycles; strings are quoted.
pub fn render(mem: &Memory, v: &Expr) -> String {
    let mut out = String::new();
    render_into(mem, v, &mut Vec::new(), &mut out);
    out
}

fn render_into(mem: &Memory, v: &Expr, open: &mut Vec<Loc>, out: &mut String) {
    match v {
        Expr::Lit(Prim::Str(s)) => out.push_str(&format!("{:?}", &**s)),
        Expr::Lit(p) => out.push_str(&builtins::display_prim(p)),
        Expr::EmptySignal => out.push_str("@[]"),
        Expr::Done { head, tail } => {
            out.push('[');
            render_into(mem, head, open, out);
            out.push_str("; ");
            render_into(mem, tail, open, out);
            out.push(']');
        }
        Expr::Loc(l) => match mem.get(l) {
            Some(rec) if !open.contains(l) => {
                open.push(*l);
                out.push_str(&rec.class);
                out.push('(');
                for (i, f) in rec.fields.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    render_into(mem, f, open, out);
                }
                out.push(')');
                open.pop();
            }
            Some(rec) => out.push_str(&format!("<cycle {}>", rec.class)),
            None => out.push_str(&l.to_string()),
        },
        other => out.push_str(&other.to_string()),
    }
}

/// Parses nothing: runs an already checked program.
pub fn run(
    program: &Program,
    script: &SensorScript,
    opts: &RunOptions,
) -> Result<Outcome, RuntimeError> {
    Machine::new(program, script.clone()).run(opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_program;

    fn run_src(src: &str, policy: Policy) -> Result<Outcome, RuntimeError> {
        let p = parse_program(src).unwrap();
        let opts = RunOptions {
            policy,
            debug_preserve: true,
            ..RunOptions::default()
        };
        run(&p, &SensorScript::default(), &opts)
    }

    #[test]
    fn single_head_redex() {
        let m = Machine::new(
            &parse_program("main { 0 }").unwrap(),
            SensorScript::default(),
        );
        let cfg = Config::new(Expr::head(Expr::done(Expr::int(1), Expr::EmptySignal)));
        let rs = m.enabled_redexes(&cfg);
        assert_eq!(
            rs,
            vec![Redex {
                site: Site::Main,
                rule: Rule::Head,
                path: vec![]
            }]
        );
        assert!(m.enabled_redexes(&Config::new(Expr::int(3))).is_empty());
    }

    #[test]
    fn tail_of_empty() {
        let out = run_src("main { tail(@[]) }", Policy::MainFirst).unwrap();
        assert_eq!(out.rendered, "@[]");
    }

    #[test]
    fn arithmetic_and_strings() {
        let out = run_src(r#"main { "Bob" + ":" + 24 }"#, Policy::MainFirst).unwrap();
        assert_eq!(out.rendered, "\"Bob:24\"");
        let out = run_src("main { head(@[1; @[]]) + 1 }", Policy::SeededRandom(3)).unwrap();
        assert_eq!(out.rendered, "2");
    }

    #[test]
    fn fork_join() {
        let src = "class Worker { method Int computePart1() { return 1; } method Int computePart2() { return 2; } }
            main { Worker x = new Worker(); @Int part1 = @[x.computePart1(); @[]];
                   Int part2 = x.computePart2(); head(part1) + part2 }";
        for seed in 0..10 {
            assert_eq!(
                run_src(src, Policy::SeededRandom(seed)).unwrap().rendered,
                "3"
            );
        }
        assert_eq!(run_src(src, Policy::RoundRobin).unwrap().rendered, "3");
    }

    #[test]
    fn msg_complete_removes_label() {
        let m = Machine::new(
            &parse_program("main { 0 }").unwrap(),
            SensorScript::default(),
        );
        let mut cfg = Config::new(Expr::head(Expr::signal(Expr::int(1), Expr::EmptySignal)));
        let mut stats = Stats::default();
        let r = m.redexes(&cfg)[0].clone();
        m.step(&mut cfg, &mut stats, &r).unwrap();
        let r = m.redexes(&cfg)[0].clone();
        assert_eq!(r.rule, Rule::MsgComplete);
        m.step(&mut cfg, &mut stats, &r).unwrap();
        assert!(wf::dom_s(&cfg.memory).is_empty());
        assert!(wf::used_s(&cfg.main).is_empty());
        assert_eq!(
            cfg.main,
            Expr::head(Expr::done(Expr::int(1), Expr::EmptySignal))
        );
    }

    #[test]
    fn empty_head_in_main_is_an_error() {
        assert!(matches!(
            run_src("main { head(@[]) + 1 }", Policy::MainFirst),
            Err(RuntimeError::EmptySignalInMain(_))
        ));
    }

    #[test]
    fn step_limit() {
        let src = "class P { method Int age() { return 24; } }
            main { P p = new P(); @Int a = p.@age(); a }";
        let p = parse_program(src).unwrap();
        let opts = RunOptions {
            max_steps: 200,
            ..RunOptions::default()
        };
        assert!(matches!(
            run(&p, &SensorScript::default(), &opts),
            Err(RuntimeError::StepLimit { .. })
        ));
    }

    #[test]
    fn garbage_is_dropped() {
        let mut cfg = Config::new(Expr::int(1));
        cfg.memory
            .insert(Loc(0), Record::new(name("Object"), vec![]));
        assert_eq!(cfg.collect_garbage(), 1);
        assert!(cfg.memory.is_empty());
    }

    #[test]
    fn pending_message_keeps_record_alive() {
        let mut cfg = Config::new(Expr::Label(Label(0)));
        let mut rec = Record::new(name("Object"), vec![]);
        rec.mailbox.push_back(Message {
            label: Label(0),
            head: Expr::int(1),
            tail: Expr::EmptySignal,
        });
        cfg.memory.insert(Loc(0), rec);
        assert_eq!(cfg.collect_garbage(), 0);
        assert!(!cfg.is_terminal());
    }
}
