//! Well-formedness of programs and of runtime configurations `μ | e`.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use crate::builtins;
use crate::diag::Diagnostic;
use crate::syntax::*;

/// The well-formedness condition a violation breaks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WfRule {
    UniqueDeclNames,
    UniqueMethodNames,
    UniqueFieldNames,
    UniqueParamNames,
    ParamNamedThis,
    CapsuleLinearity,
    FieldModifier,
    SignalTypeImm,
    ImplementsInterfaces,
    ExtendsInterfaces,
    ConstructorMirrorsFields,
    LocationsInMemory,
    LabelsPending,
    UniqueLabels,
}

impl WfRule {
    pub fn code(self) -> &'static str {
        match self {
            WfRule::UniqueDeclNames => "wf-unique-decl-names",
            WfRule::UniqueMethodNames => "wf-unique-method-names",
            WfRule::UniqueFieldNames => "wf-unique-field-names",
            WfRule::UniqueParamNames => "wf-unique-param-names",
            WfRule::ParamNamedThis => "wf-param-named-this",
            WfRule::CapsuleLinearity => "wf-capsule-linearity",
            WfRule::FieldModifier => "wf-field-modifier",
            WfRule::SignalTypeImm => "wf-signal-type-imm",
            WfRule::ImplementsInterfaces => "wf-implements-interfaces",
            WfRule::ExtendsInterfaces => "wf-extends-interfaces",
            WfRule::ConstructorMirrorsFields => "wf-constructor-mirrors-fields",
            WfRule::LocationsInMemory => "wf-locations-in-memory",
            WfRule::LabelsPending => "wf-labels-pending",
            WfRule::UniqueLabels => "wf-unique-labels",
        }
    }

    pub fn statement(self) -> &'static str {
        match self {
            WfRule::UniqueDeclNames => "classes and interfaces are uniquely named",
            WfRule::UniqueMethodNames => "methods in a class are uniquely named",
            WfRule::UniqueFieldNames => "fields in a class are uniquely named",
            WfRule::UniqueParamNames => "parameters of a method are uniquely named",
            WfRule::ParamNamedThis => "no parameter is called `this`",
            WfRule::CapsuleLinearity => "a capsule variable is used at most once",
            WfRule::FieldModifier => "fields have modifier imm or mut",
            WfRule::SignalTypeImm => "types containing @ have the imm modifier",
            WfRule::ImplementsInterfaces => "classes implement only interfaces",
            WfRule::ExtendsInterfaces => "interfaces extend only interfaces",
            WfRule::ConstructorMirrorsFields => {
                "the constructor takes exactly the fields, in order"
            }
            WfRule::LocationsInMemory => "every location is allocated in memory",
            WfRule::LabelsPending => "every used signal label labels a pending message",
            WfRule::UniqueLabels => "message labels are unique",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub rule: WfRule,
    pub message: String,
    pub span: Span,
}

/// Empty exactly when the checked entity is well formed.
#[derive(Clone, Debug, Default, Serialize)]
pub struct WfReport {
    pub violations: Vec<Violation>,
}

impl WfReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn breaks(&self, rule: WfRule) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }

    fn push(&mut self, rule: WfRule, span: Span, message: String) {
        self.violations.push(Violation {
            rule,
            message,
            span,
        });
    }

    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        self.violations
            .iter()
            .map(|v| {
                Diagnostic::error(
                    v.rule.code(),
                    v.span,
                    format!("{} ({})", v.message, v.rule.statement()),
                )
            })
            .collect()
    }
}

impl fmt::Display for WfReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{}: {}", v.rule.code(), v.message)?;
        }
        Ok(())
    }
}

fn duplicates<'a>(names: impl Iterator<Item = &'a Name>) -> Vec<&'a Name> {
    let mut seen = HashSet::new();
    let mut dups = Vec::new();
    for n in names {
        if !seen.insert(n) && !dups.contains(&n) {
            dups.push(n);
        }
    }
    dups
}

pub fn check_program(p: &Program) -> WfReport {
    let mut report = WfReport::default();
    let kinds: HashMap<&str, bool> = p
        .decls
        .iter()
        .map(|d| (&**d.name(), matches!(d, Decl::Interface(_))))
        .collect();
    let is_interface = |n: &str| kinds.get(n).copied().unwrap_or(false);

    for d in &p.decls {
        if builtins::is_builtin_name(d.name()) {
            report.push(
                WfRule::UniqueDeclNames,
                d.span(),
                format!("`{}` redeclares a predefined class", d.name()),
            );
        }
    }
    for dup in duplicates(p.decls.iter().map(|d| d.name())) {
        let span = p
            .decls
            .iter()
            .filter(|d| d.name() == dup)
            .nth(1)
            .unwrap()
            .span();
        report.push(
            WfRule::UniqueDeclNames,
            span,
            format!("`{dup}` is declared more than once"),
        );
    }

    for d in &p.decls {
        match d {
            Decl::Class(c) => check_class(c, &is_interface, &mut report),
            Decl::Interface(i) => {
                for sup in &i.extends {
                    if !is_interface(sup) {
                        report.push(
                            WfRule::ExtendsInterfaces,
                            i.span,
                            format!(
                                "interface `{}` extends `{sup}`, which is not an interface",
                                i.name
                            ),
                        );
                    }
                }
                for dup in duplicates(i.headers.iter().map(|h| &h.name)) {
                    report.push(
                        WfRule::UniqueMethodNames,
                        i.span,
                        format!("method `{dup}` is declared twice in `{}`", i.name),
                    );
                }
                for h in &i.headers {
                    check_header(h, &mut report);
                }
            }
        }
    }
    if let Some(main) = &p.main {
        check_body(main, &HashSet::new(), p.main_span, &mut report);
    }
    report
}

fn check_type(t: &Type, span: Span, what: &str, report: &mut WfReport) {
    if t.depth > 0 && t.modifier != Modifier::Imm {
        report.push(
            WfRule::SignalTypeImm,
            span,
            format!("{what} has type `{t}`"),
        );
    }
}

fn check_class(c: &ClassDecl, is_interface: &dyn Fn(&str) -> bool, report: &mut WfReport) {
    for i in &c.implements {
        if !is_interface(i) {
            report.push(
                WfRule::ImplementsInterfaces,
                c.span,
                format!(
                    "class `{}` implements `{i}`, which is not an interface",
                    c.name
                ),
            );
        }
    }
    for dup in duplicates(c.fields.iter().map(|f| &f.name)) {
        report.push(
            WfRule::UniqueFieldNames,
            c.span,
            format!("field `{dup}` is declared twice in `{}`", c.name),
        );
    }
    for dup in duplicates(c.methods.iter().map(|m| &m.header.name)) {
        report.push(
            WfRule::UniqueMethodNames,
            c.span,
            format!("method `{dup}` is declared twice in `{}`", c.name),
        );
    }
    for f in &c.fields {
        if !matches!(f.ty.modifier, Modifier::Imm | Modifier::Mut) {
            report.push(
                WfRule::FieldModifier,
                f.span,
                format!("field `{}` has modifier `{}`", f.name, f.ty.modifier),
            );
        }
        check_type(&f.ty, f.span, &format!("field `{}`", f.name), report);
    }
    if let Some(ctor) = &c.ctor {
        let mirrors = ctor.params.len() == c.fields.len()
            && ctor
                .params
                .iter()
                .zip(&c.fields)
                .all(|(p, f)| p.name == f.name && p.ty == f.ty);
        if !mirrors {
            report.push(
                WfRule::ConstructorMirrorsFields,
                ctor.span,
                format!("constructor of `{}` does not match its field list", c.name),
            );
        }
    }
    for m in &c.methods {
        check_header(&m.header, report);
        if let MethodBody::Source(body) = &m.body {
            let capsules: HashSet<Name> = m
                .header
                .params
                .iter()
                .filter(|p| p.ty.modifier == Modifier::Capsule && p.ty.depth == 0)
                .map(|p| p.name.clone())
                .collect();
            check_body(body, &capsules, m.header.span, report);
        }
    }
}

fn check_header(h: &MethodHeader, report: &mut WfReport) {
    for dup in duplicates(h.params.iter().map(|p| &p.name)) {
        report.push(
            WfRule::UniqueParamNames,
            h.span,
            format!("parameter `{dup}` appears twice in `{}`", h.name),
        );
    }
    if h.params.iter().any(|p| &*p.name == "this") {
        report.push(
            WfRule::ParamNamedThis,
            h.span,
            format!("method `{}` has a parameter named `this`", h.name),
        );
    }
    check_type(&h.ret, h.span, &format!("return of `{}`", h.name), report);
    for p in &h.params {
        check_type(&p.ty, h.span, &format!("parameter `{}`", p.name), report);
    }
}

/// Capsule linearity over a body. Parameters in `capsules` and every
/// `capsule` local must occur at most once; a conditional contributes the
/// larger of its two branches.
fn check_body(body: &Body, capsules: &HashSet<Name>, span: Span, report: &mut WfReport) {
    let mut pending: Vec<(Name, Span)> = capsules.iter().map(|c| (c.clone(), span)).collect();
    // Each entry counts occurrences after its binding point.
    for (i, stmt) in body.stmts.iter().enumerate() {
        if let StmtKind::Local { ty, name, .. } = &stmt.kind {
            check_type(ty, stmt.span, &format!("local `{name}`"), report);
            if ty.modifier == Modifier::Capsule && ty.depth == 0 {
                let uses = count_in_rest(body, i + 1, name);
                if uses > 1 {
                    report.push(
                        WfRule::CapsuleLinearity,
                        stmt.span,
                        format!("capsule local `{name}` is used {uses} times"),
                    );
                }
            }
        }
    }
    pending.sort_by(|a, b| a.0.cmp(&b.0));
    for (cap, span) in pending {
        let uses = count_in_rest(body, 0, &cap);
        if uses > 1 {
            report.push(
                WfRule::CapsuleLinearity,
                span,
                format!("capsule parameter `{cap}` is used {uses} times"),
            );
        }
    }
}

/// Occurrences of `x` in statements `from..` and the result, stopping at a
/// local that rebinds `x`.
fn count_in_rest(body: &Body, from: usize, x: &str) -> usize {
    let mut total = 0;
    for stmt in &body.stmts[from..] {
        match &stmt.kind {
            StmtKind::Local { name, init, .. } => {
                total += count_uses(init, x);
                if &**name == x {
                    return total;
                }
            }
            StmtKind::Expr(e) => total += count_uses(e, x),
        }
    }
    total + count_uses(&body.result, x)
}

/// Syntactic occurrences of variable `x`, taking the maximum over the
/// branches of a conditional.
pub fn count_uses(e: &Expr, x: &str) -> usize {
    match e {
        Expr::Var(y) => usize::from(&**y == x),
        Expr::Cond { cond, then, els } => {
            count_uses(cond, x) + count_uses(then, x).max(count_uses(els, x))
        }
        Expr::Let {
            name: Some(n),
            init,
            body,
            ..
        } => count_uses(init, x) + if &**n == x { 0 } else { count_uses(body, x) },
        _ => e.children().into_iter().map(|c| count_uses(c, x)).sum(),
    }
}

/// Labels occurring anywhere inside `e`.
pub fn used_s(e: &Expr) -> BTreeSet<Label> {
    let mut out = BTreeSet::new();
    collect_labels(e, &mut out);
    out
}

fn collect_labels(e: &Expr, out: &mut BTreeSet<Label>) {
    e.visit(&mut |sub| {
        if let Expr::Label(s) = sub {
            out.insert(*s);
        }
    });
}

/// Labels used by stored field values and by the bodies of pending
/// messages. A message's own label is not a use.
pub fn used_s_memory(mem: &Memory) -> BTreeSet<Label> {
    let mut out = BTreeSet::new();
    for rec in mem.values() {
        for v in &rec.fields {
            collect_labels(v, &mut out);
        }
        for msg in &rec.mailbox {
            collect_labels(&msg.head, &mut out);
            collect_labels(&msg.tail, &mut out);
        }
    }
    out
}

/// Labels of all pending messages.
pub fn dom_s(mem: &Memory) -> BTreeSet<Label> {
    mem.values()
        .flat_map(|r| r.mailbox.iter().map(|m| m.label))
        .collect()
}

fn locations(e: &Expr, out: &mut BTreeSet<Loc>) {
    e.visit(&mut |sub| {
        if let Expr::Loc(l) = sub {
            out.insert(*l);
        }
    });
}

/// Checks `μ | e`: locations allocated, used labels pending, labels unique.
/// `@[]` is a distinct expression form, never a label, so it cannot be in
/// `domS(μ)`.
pub fn check_config(mem: &Memory, e: &Expr) -> WfReport {
    let mut report = WfReport::default();
    let at = Span::default();

    let mut locs = BTreeSet::new();
    locations(e, &mut locs);
    for rec in mem.values() {
        for v in &rec.fields {
            locations(v, &mut locs);
        }
        for m in &rec.mailbox {
            locations(&m.head, &mut locs);
            locations(&m.tail, &mut locs);
        }
    }
    for l in locs.iter().filter(|l| !mem.contains_key(l)) {
        report.push(
            WfRule::LocationsInMemory,
            at,
            format!("{l} is not in dom(μ)"),
        );
    }

    let mut seen = HashSet::new();
    for rec in mem.values() {
        for m in &rec.mailbox {
            if !seen.insert(m.label) {
                report.push(
                    WfRule::UniqueLabels,
                    at,
                    format!("{} labels more than one message", m.label),
                );
            }
        }
    }

    let dom = dom_s(mem);
    let mut used = used_s(e);
    used.extend(used_s_memory(mem));
    for s in used.difference(&dom) {
        report.push(
            WfRule::LabelsPending,
            at,
            format!("{s} is used but labels no pending message"),
        );
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_program;

    fn wf(src: &str) -> WfReport {
        check_program(&parse_program(src).unwrap())
    }

    #[test]
    fn duplicate_fields() {
        let r = wf("class A { Int f; Int f; A(Int f, Int f) { this.f = f; this.f = f; } }");
        assert!(r.breaks(WfRule::UniqueFieldNames));
    }

    #[test]
    fn capsule_parameter_used_twice() {
        let r =
            wf("class F { } class A { method imm F m(capsule F x) { imm F a = x; return x; } }");
        assert!(r.breaks(WfRule::CapsuleLinearity), "{r}");
        let r = wf("class F { } class A { method imm F m(capsule F x) { return x; } }");
        assert!(r.is_ok(), "{r}");
    }

    #[test]
    fn capsule_in_both_branches_counts_once() {
        let r = wf("class F { } class A { method imm F m(Bool b, capsule F x, imm F y) { return b ? x : x; } }");
        assert!(r.is_ok(), "{r}");
    }

    #[test]
    fn header_rules() {
        let r = wf("class A { method Int m(Int x, Int x) { return x; } }");
        assert!(r.breaks(WfRule::UniqueParamNames));
        let r = wf("class A { method Int m(Int this) { return 1; } }");
        assert!(r.breaks(WfRule::ParamNamedThis));
        let r = wf("class A { method @mut A m() { return @[]; } }");
        assert!(r.breaks(WfRule::SignalTypeImm));
        let r = wf("class A { method Int m() { return 1; } method Int m() { return 2; } }");
        assert!(r.breaks(WfRule::UniqueMethodNames));
    }

    #[test]
    fn field_modifiers_and_hierarchy() {
        assert!(
            wf("class A { read A a; A(read A a) { this.a = a; } }").breaks(WfRule::FieldModifier)
        );
        assert!(wf("class A { } class B implements A { }").breaks(WfRule::ImplementsInterfaces));
        assert!(wf("class A { } interface I extends A { }").breaks(WfRule::ExtendsInterfaces));
        assert!(wf("class A { } interface A { }").breaks(WfRule::UniqueDeclNames));
        assert!(wf("class Object { }").breaks(WfRule::UniqueDeclNames));
        assert!(wf("class A { Int x; A(Str x) { this.x = x; } }")
            .breaks(WfRule::ConstructorMirrorsFields));
    }

    #[test]
    fn ac_controller_class_is_well_formed() {
        let r = wf("capability class ACController{
            Bool isOn;
            ACController(Bool isOn) {this.isOn=isOn;}
            read method Float hysteresis() { return this.isOn?-0.5:0.5;}
            mut method Bool powerSwitch(Float d) {
              this.isOn=d>=(75.0+this.hysteresis()); return this.isOn; }}");
        assert!(r.is_ok(), "{r}");
    }

    #[test]
    fn config_checks() {
        let mem = Memory::new();
        assert!(check_config(&mem, &Expr::EmptySignal).is_ok());
        assert!(dom_s(&mem).is_empty());

        let mut mem = Memory::new();
        let mut rec = Record::new(name("Object"), vec![]);
        rec.mailbox.push_back(Message {
            label: Label(0),
            head: Expr::int(1),
            tail: Expr::EmptySignal,
        });
        mem.insert(Loc(0), rec);
        assert!(check_config(&mem, &Expr::head(Expr::Label(Label(0)))).is_ok());
        assert!(!check_config(&mem, &Expr::Label(Label(7))).is_ok());
        assert!(!check_config(&mem, &Expr::Loc(Loc(3))).is_ok());

        let rec = mem.get_mut(&Loc(0)).unwrap();
        rec.mailbox.push_front(Message {
            label: Label(0),
            head: Expr::int(2),
            tail: Expr::EmptySignal,
        });
        assert!(check_config(&mem, &Expr::EmptySignal).breaks(WfRule::UniqueLabels));
    }

    #[test]
    fn used_labels() {
        let e = Expr::head(Expr::Label(Label(1)));
        assert_eq!(used_s(&e), BTreeSet::from([Label(1)]));
        let e = Expr::done(Expr::int(3), Expr::Label(Label(2)));
        assert_eq!(used_s(&e), BTreeSet::from([Label(2)]));
    }
}
