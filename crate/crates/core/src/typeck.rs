//! Reference-capability type checking: subtyping, modifier composition,
//! multiple method types, valid actors and the object-capability gate.
//!
//! Checking is bidirectional. `synth` computes the minimal type of an
//! expression; `check` pushes an expected type into the forms whose type
//! depends on context (`new`, conditionals, bindings, signal literals).

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::builtins;
use crate::diag::Diagnostic;
use crate::syntax::*;
use crate::table::{Cap, ClassTable, LookupError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorKind {
    ReceiverCapability,
    CapabilityInstantiation,
    InvalidActor,
    NonImmCapture,
    FieldUpdateOnNonMut,
    MethodNotFound,
    UnknownClass,
    UnknownVariable,
    UnknownField,
    UnknownLocation,
    ArgCount,
    Mismatch,
    CannotInfer,
    MissingInterfaceMethod,
    OverrideMismatch,
    NonImmSignalValue,
    PrimitiveActor,
}

impl ErrorKind {
    pub fn code(self) -> &'static str {
        match self {
            ErrorKind::ReceiverCapability => "receiver-capability",
            ErrorKind::CapabilityInstantiation => "capability-instantiation",
            ErrorKind::InvalidActor => "invalid-actor",
            ErrorKind::NonImmCapture => "non-imm-capture",
            ErrorKind::FieldUpdateOnNonMut => "field-update-on-non-mut",
            ErrorKind::MethodNotFound => "method-not-found",
            ErrorKind::UnknownClass => "unknown-class",
            ErrorKind::UnknownVariable => "unknown-variable",
            ErrorKind::UnknownField => "unknown-field",
            ErrorKind::UnknownLocation => "unknown-location",
            ErrorKind::ArgCount => "arg-count",
            ErrorKind::Mismatch => "type-mismatch",
            ErrorKind::CannotInfer => "cannot-infer",
            ErrorKind::MissingInterfaceMethod => "missing-interface-method",
            ErrorKind::OverrideMismatch => "override-mismatch",
            ErrorKind::NonImmSignalValue => "non-imm-signal-value",
            ErrorKind::PrimitiveActor => "primitive-actor",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{message}")]
pub struct TypeError {
    pub kind: ErrorKind,
    pub message: String,
}

impl TypeError {
    fn new(kind: ErrorKind, message: impl Into<String>) -> TypeError {
        TypeError {
            kind,
            message: message.into(),
        }
    }
}

impl From<LookupError> for TypeError {
    fn from(e: LookupError) -> TypeError {
        TypeError::new(ErrorKind::UnknownClass, e.to_string())
    }
}

type TResult<T> = Result<T, TypeError>;

/// A synthesized type. `Empty { depth }` is the type of expressions built
/// from `@[]` alone: it is a subtype of every type with at least `depth`
/// signal layers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Ty {
    Known(Type),
    Empty { depth: u32 },
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ty::Known(t) => t.fmt(f),
            Ty::Empty { depth } => {
                for _ in 0..*depth {
                    f.write_str("@")?;
                }
                f.write_str("_")
            }
        }
    }
}

impl From<Type> for Ty {
    fn from(t: Type) -> Ty {
        Ty::Known(t)
    }
}

/// `capsule ≤ m ≤ read` for every `m`; `mut` and `imm` are incomparable.
pub fn modifier_leq(a: Modifier, b: Modifier) -> bool {
    a == b || a == Modifier::Capsule || b == Modifier::Read
}

/// Structural subtyping: equal depth, modifier order, nominal class order.
pub fn subtype(table: &ClassTable, a: &Type, b: &Type) -> Result<bool, LookupError> {
    for c in [&a.class, &b.class] {
        if !table.contains(c) {
            return Err(LookupError::Unknown(c.clone()));
        }
    }
    Ok(a.depth == b.depth
        && modifier_leq(a.modifier, b.modifier)
        && table.is_subclass(&a.class, &b.class))
}

fn ty_leq(table: &ClassTable, a: &Ty, b: &Type) -> bool {
    match a {
        Ty::Known(a) => subtype(table, a, b).unwrap_or(false),
        Ty::Empty { depth } => b.depth >= *depth,
    }
}

/// Type of a field access `e.f` where `f : field` and `e : recv C`.
pub fn compose_modifier(field: &Type, recv: Modifier) -> Type {
    let modifier = match (field.modifier, recv) {
        (_, Modifier::Imm) => Modifier::Imm,
        (m, Modifier::Mut | Modifier::Capsule) => m,
        (Modifier::Mut, Modifier::Read) => Modifier::Read,
        (Modifier::Imm, Modifier::Read) => Modifier::Imm,
        // outside the precondition (fields are imm or mut); stay conservative
        (_, Modifier::Read) => Modifier::Read,
    };
    field.with_modifier(modifier)
}

/// `T₀…Tₙ ↦ T`, with the receiver at index 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct MethodType {
    pub params: Vec<Type>,
    pub ret: Type,
}

impl MethodType {
    fn substitute(&self, f: impl Fn(Modifier) -> Modifier) -> MethodType {
        let sub = |t: &Type| t.with_modifier(f(t.modifier));
        MethodType {
            params: self.params.iter().map(sub).collect(),
            ret: sub(&self.ret),
        }
    }
}

impl fmt::Display for MethodType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ps: Vec<String> = self.params.iter().map(|t| t.to_string()).collect();
        write!(f, "{} ↦ {}", ps.join(", "), self.ret)
    }
}

fn promote_capsule(m: Modifier) -> Modifier {
    if m == Modifier::Mut {
        Modifier::Capsule
    } else {
        m
    }
}

fn promote_capsule_imm(m: Modifier) -> Modifier {
    match m {
        Modifier::Mut => Modifier::Capsule,
        Modifier::Read => Modifier::Imm,
        other => other,
    }
}

/// The three method types of `m` on receiver `recv`: as declared, with
/// `mut := capsule`, and with `mut := capsule, read := imm`. The receiver
/// position holds `recv` itself.
pub fn meth_types(table: &ClassTable, recv: &Type, m: &str) -> TResult<Vec<MethodType>> {
    let header = lookup_method(table, recv, m)?;
    if !modifier_leq(recv.modifier, header.receiver) {
        return Err(receiver_error(recv, header));
    }
    let mut params = vec![recv.clone()];
    params.extend(header.params.iter().map(|p| p.ty.clone()));
    let declared = MethodType {
        params,
        ret: header.ret.clone(),
    };
    let second = declared.substitute(promote_capsule);
    let third = declared.substitute(promote_capsule_imm);
    Ok(vec![declared, second, third])
}

/// `meth_types` with duplicates removed, keeping the first occurrence.
pub fn meth_type_set(table: &ClassTable, recv: &Type, m: &str) -> TResult<Vec<MethodType>> {
    let mut out: Vec<MethodType> = Vec::new();
    for t in meth_types(table, recv, m)? {
        if !out.contains(&t) {
            out.push(t);
        }
    }
    Ok(out)
}

fn lookup_method<'t>(table: &'t ClassTable, recv: &Type, m: &str) -> TResult<&'t MethodHeader> {
    if recv.depth > 0 {
        return Err(TypeError::new(
            ErrorKind::MethodNotFound,
            format!("cannot call `{m}` on signal type `{recv}`; use a lifted call"),
        ));
    }
    if !table.contains(&recv.class) {
        return Err(LookupError::Unknown(recv.class.clone()).into());
    }
    table.method_header(&recv.class, m).ok_or_else(|| {
        TypeError::new(
            ErrorKind::MethodNotFound,
            format!("`{}` has no method `{m}`", recv.class),
        )
    })
}

fn receiver_error(recv: &Type, header: &MethodHeader) -> TypeError {
    TypeError::new(
        ErrorKind::ReceiverCapability,
        format!(
            "method `{}` needs a `{}` receiver but the receiver has type `{recv}`",
            header.name, header.receiver
        ),
    )
}

/// A lifted-call receiver is immutable, or an instance of a capability
/// class without `mut` fields.
pub fn valid_actor(table: &ClassTable, t: &Type) -> bool {
    if t.modifier == Modifier::Imm {
        return true;
    }
    matches!(table.cap_of(&t.class), Ok(Cap::Capability))
        && table
            .fields(&t.class)
            .map(|fs| fs.iter().all(|f| f.ty.modifier != Modifier::Mut))
            .unwrap_or(false)
}

/// Typing context: `Γ`, `Σ` and the capability flag.
#[derive(Clone, Debug, Default)]
pub struct TypeEnv {
    pub gamma: HashMap<Name, Type>,
    /// Variables removed from scope inside a signal literal.
    pub hidden: HashSet<Name>,
    pub sigma: HashMap<Loc, Type>,
    pub labels: HashMap<Label, Type>,
    pub capability: bool,
}

impl TypeEnv {
    pub fn main() -> TypeEnv {
        TypeEnv {
            capability: true,
            ..TypeEnv::default()
        }
    }

    fn bind(&self, x: &Name, t: Type) -> TypeEnv {
        let mut env = self.clone();
        env.hidden.remove(x);
        env.gamma.insert(x.clone(), t);
        env
    }

    /// `Γ[only imm, capsule]`.
    fn signal_scope(&self) -> TypeEnv {
        let mut env = self.clone();
        for (x, t) in &self.gamma {
            if !matches!(t.modifier, Modifier::Imm | Modifier::Capsule) {
                env.gamma.remove(x);
                env.hidden.insert(x.clone());
            }
        }
        env
    }
}

/// Per-expression checker over one class table. Lifted-call receiver types
/// are recorded for the purity classification used by the harness.
pub struct Checker<'t> {
    pub table: &'t ClassTable,
    pub lifted_receivers: Vec<Type>,
}

fn mismatch(found: &Ty, expected: &Type) -> TypeError {
    TypeError::new(
        ErrorKind::Mismatch,
        format!("expected `{expected}`, found `{found}`"),
    )
}

/// Expressions whose type depends on the expected type.
fn flexible(e: &Expr) -> bool {
    matches!(e, Expr::New { .. } | Expr::Cond { .. } | Expr::Let { .. })
}

impl<'t> Checker<'t> {
    pub fn new(table: &'t ClassTable) -> Checker<'t> {
        Checker {
            table,
            lifted_receivers: Vec::new(),
        }
    }

    fn known_type(&self, t: &Type) -> TResult<()> {
        if self.table.contains(&t.class) {
            Ok(())
        } else {
            Err(TypeError::new(
                ErrorKind::UnknownClass,
                format!("unknown class or interface `{}`", t.class),
            ))
        }
    }

    fn leq(&self, a: &Ty, b: &Type) -> bool {
        ty_leq(self.table, a, b)
    }

    fn imm_of(&self, p: PrimClass) -> Type {
        Type::imm(p.name())
    }

    /// Synthesizes the type, requiring a concrete class.
    fn synth_known(&mut self, env: &TypeEnv, e: &Expr) -> TResult<Type> {
        match self.synth(env, e)? {
            Ty::Known(t) => Ok(t),
            Ty::Empty { .. } => Err(TypeError::new(
                ErrorKind::CannotInfer,
                format!("cannot infer the element type of `{e}`"),
            )),
        }
    }

    pub fn check(&mut self, env: &TypeEnv, e: &Expr, expected: &Type) -> TResult<()> {
        match e {
            Expr::New { class, args } => self.check_new(env, class, args, expected),
            Expr::Cond { cond, then, els } => {
                self.check(env, cond, &Type::imm("Bool"))?;
                self.check(env, then, expected)?;
                self.check(env, els, expected)
            }
            Expr::Let {
                ty,
                name,
                init,
                body,
            } => {
                let env = self.bind_let(env, ty.as_ref(), name.as_ref(), init)?;
                self.check(&env, body, expected)
            }
            Expr::Signal { head, tail } => {
                let Some(elem) = expected.element() else {
                    return Err(mismatch(&Ty::Empty { depth: 1 }, expected));
                };
                let inner = env.signal_scope();
                self.check(&inner, head, &elem)?;
                self.check(&inner, tail, expected)
            }
            _ => {
                let t = self.synth(env, e)?;
                if self.leq(&t, expected) {
                    Ok(())
                } else {
                    Err(mismatch(&t, expected))
                }
            }
        }
    }

    fn bind_let(
        &mut self,
        env: &TypeEnv,
        ty: Option<&Type>,
        name: Option<&Name>,
        init: &Expr,
    ) -> TResult<TypeEnv> {
        match (ty, name) {
            (Some(ty), Some(x)) => {
                self.known_type(ty)?;
                self.check(env, init, ty)?;
                Ok(env.bind(x, ty.clone()))
            }
            _ => {
                self.synth(env, init)?;
                Ok(env.clone())
            }
        }
    }

    fn check_new(
        &mut self,
        env: &TypeEnv,
        class: &Name,
        args: &[Expr],
        expected: &Type,
    ) -> TResult<()> {
        if expected.depth == 0 && modifier_leq(Modifier::Imm, expected.modifier) {
            let imm = Type::new(Modifier::Imm, class.clone());
            if subtype(self.table, &imm, expected)?
                && self.new_args(env, class, args, Some(Modifier::Imm)).is_ok()
            {
                return Ok(());
            }
        }
        let t = Ty::Known(self.rule_new(env, class, args)?);
        if self.leq(&t, expected) {
            Ok(())
        } else {
            Err(mismatch(&t, expected))
        }
    }

    /// Checks constructor arguments against the field types, optionally
    /// with every modifier replaced.
    fn new_args(
        &mut self,
        env: &TypeEnv,
        class: &Name,
        args: &[Expr],
        mdf: Option<Modifier>,
    ) -> TResult<()> {
        let decl = self.table.class(class)?;
        if let ClassOrigin::Primitive(_) = decl.origin {
            return Err(TypeError::new(
                ErrorKind::UnknownClass,
                format!("primitive class `{class}` has no constructor"),
            ));
        }
        let fields: Vec<Type> = decl.fields.iter().map(|f| f.ty.clone()).collect();
        if fields.len() != args.len() {
            return Err(TypeError::new(
                ErrorKind::ArgCount,
                format!(
                    "`new {class}` takes {} arguments, {} given",
                    fields.len(),
                    args.len()
                ),
            ));
        }
        for (a, t) in args.iter().zip(&fields) {
            let t = match mdf {
                Some(m) => t.with_modifier(m),
                None => t.clone(),
            };
            self.check(env, a, &t)?;
        }
        Ok(())
    }

    /// Rule (new): `mut C`, gated by the capability flag.
    fn rule_new(&mut self, env: &TypeEnv, class: &Name, args: &[Expr]) -> TResult<Type> {
        self.new_args(env, class, args, None)?;
        if self.table.cap_of(class)? == Cap::Capability && !env.capability {
            return Err(TypeError::new(
                ErrorKind::CapabilityInstantiation,
                format!("capability class `{class}` can only be created as `mut` in main or in a mut method of a capability class"),
            ));
        }
        Ok(Type::new(Modifier::Mut, class.clone()))
    }

    pub fn synth(&mut self, env: &TypeEnv, e: &Expr) -> TResult<Ty> {
        Ok(match e {
            Expr::Var(x) => match env.gamma.get(x) {
                Some(t) => Ty::Known(t.clone()),
                None if env.hidden.contains(x) => {
                    return Err(TypeError::new(
                        ErrorKind::NonImmCapture,
                        format!(
                            "`{x}` is neither imm nor capsule and cannot be captured by a signal"
                        ),
                    ))
                }
                None => {
                    return Err(TypeError::new(
                        ErrorKind::UnknownVariable,
                        format!("unknown variable `{x}`"),
                    ))
                }
            },
            Expr::Lit(p) => Ty::Known(self.imm_of(p.class())),
            Expr::Loc(l) => match env.sigma.get(l) {
                Some(t) => Ty::Known(t.clone()),
                None => {
                    return Err(TypeError::new(
                        ErrorKind::UnknownLocation,
                        format!("no type for {l}"),
                    ))
                }
            },
            Expr::Label(s) => match env.labels.get(s) {
                Some(t) => Ty::Known(t.clone()),
                None => {
                    return Err(TypeError::new(
                        ErrorKind::UnknownLocation,
                        format!("no type for {s}"),
                    ))
                }
            },
            Expr::Field { recv, field } => {
                let (t, idx) = self.field_of(env, recv, field)?;
                let fty = self.table.fields(&t.class)?[idx].ty.clone();
                Ty::Known(compose_modifier(&fty, t.modifier))
            }
            Expr::Assign { recv, field, value } => {
                let (t, idx) = self.field_of(env, recv, field)?;
                if t.modifier != Modifier::Mut {
                    return Err(TypeError::new(
                        ErrorKind::FieldUpdateOnNonMut,
                        format!(
                            "cannot update field `{field}` through a `{}` reference",
                            t.modifier
                        ),
                    ));
                }
                let fty = self.table.fields(&t.class)?[idx].ty.clone();
                self.check(env, value, &fty)?;
                Ty::Known(fty)
            }
            Expr::New { class, args } => {
                if self.new_args(env, class, args, Some(Modifier::Imm)).is_ok() {
                    Ty::Known(Type::new(Modifier::Imm, class.clone()))
                } else {
                    Ty::Known(self.rule_new(env, class, args)?)
                }
            }
            Expr::Call { recv, method, args } => self.synth_call(env, recv, method, args)?,
            Expr::Lift { recv, method, args } => self.synth_lift(env, recv, method, args)?,
            Expr::Signal { head, tail } => {
                let inner = env.signal_scope();
                self.synth_signal(&inner, head, tail)?
            }
            Expr::Done { head, tail } => self.synth_signal(env, head, tail)?,
            Expr::EmptySignal => Ty::Empty { depth: 1 },
            Expr::Head(inner) => match self.synth(env, inner)? {
                Ty::Known(t) => Ty::Known(t.element().ok_or_else(|| {
                    TypeError::new(
                        ErrorKind::Mismatch,
                        format!("`head` expects a signal, found `{t}`"),
                    )
                })?),
                Ty::Empty { depth } => Ty::Empty {
                    depth: depth.saturating_sub(1),
                },
            },
            Expr::Tail(inner) => match self.synth(env, inner)? {
                Ty::Known(t) if t.depth > 0 => Ty::Known(t),
                Ty::Known(t) => {
                    return Err(TypeError::new(
                        ErrorKind::Mismatch,
                        format!("`tail` expects a signal, found `{t}`"),
                    ))
                }
                Ty::Empty { depth } => Ty::Empty {
                    depth: depth.max(1),
                },
            },
            Expr::Let {
                ty,
                name,
                init,
                body,
            } => {
                let env = self.bind_let(env, ty.as_ref(), name.as_ref(), init)?;
                self.synth(&env, body)?
            }
            Expr::Cond { cond, then, els } => {
                self.check(env, cond, &Type::imm("Bool"))?;
                let a = self.synth(env, then)?;
                let b = self.synth(env, els)?;
                self.join(&a, &b)?
            }
        })
    }

    fn join(&self, a: &Ty, b: &Ty) -> TResult<Ty> {
        match (a, b) {
            (Ty::Empty { depth: x }, Ty::Empty { depth: y }) => Ok(Ty::Empty {
                depth: (*x).max(*y),
            }),
            (Ty::Empty { .. }, Ty::Known(t)) | (Ty::Known(t), Ty::Empty { .. }) => {
                let (e, k) = if matches!(a, Ty::Empty { .. }) {
                    (a, b)
                } else {
                    (b, a)
                };
                if self.leq(e, t) {
                    Ok(k.clone())
                } else {
                    Err(mismatch(e, t))
                }
            }
            (Ty::Known(x), Ty::Known(y)) => {
                if self.leq(a, y) {
                    Ok(b.clone())
                } else if self.leq(b, x) {
                    Ok(a.clone())
                } else if x.depth == y.depth && x.class == y.class {
                    Ok(Ty::Known(x.with_modifier(Modifier::Read)))
                } else {
                    Err(TypeError::new(
                        ErrorKind::Mismatch,
                        format!("conditional branches have unrelated types `{x}` and `{y}`"),
                    ))
                }
            }
        }
    }

    fn synth_signal(&mut self, env: &TypeEnv, head: &Expr, tail: &Expr) -> TResult<Ty> {
        let h = self.synth(env, head)?;
        match h {
            Ty::Known(t) => {
                if !modifier_leq(t.modifier, Modifier::Imm) {
                    return Err(TypeError::new(
                        ErrorKind::NonImmSignalValue,
                        format!("signal values must be imm, found `{t}`"),
                    ));
                }
                let sig = t.with_modifier(Modifier::Imm).signal_of(1);
                self.check(env, tail, &sig)?;
                Ok(Ty::Known(sig))
            }
            Ty::Empty { depth } => match self.synth(env, tail)? {
                Ty::Known(t) if t.depth > depth => Ok(Ty::Known(t)),
                Ty::Known(t) => Err(mismatch(&Ty::Empty { depth: depth + 1 }, &t)),
                Ty::Empty { depth: d } => Ok(Ty::Empty {
                    depth: d.max(depth + 1),
                }),
            },
        }
    }

    fn field_of(&mut self, env: &TypeEnv, recv: &Expr, field: &Name) -> TResult<(Type, usize)> {
        let t = self.synth_known(env, recv)?;
        let unknown = || {
            TypeError::new(
                ErrorKind::UnknownField,
                format!("`{t}` has no field `{field}`"),
            )
        };
        if t.depth > 0 || self.table.is_interface(&t.class) {
            return Err(unknown());
        }
        let idx = self
            .table
            .class(&t.class)?
            .field_index(field)
            .ok_or_else(unknown)?;
        Ok((t, idx))
    }

    /// Receiver type for a call: the synthesized type, or for a receiver
    /// whose type depends on context, the declared receiver capability.
    fn receiver(&mut self, env: &TypeEnv, recv: &Expr, method: &str) -> TResult<Type> {
        let t = self.synth_known(env, recv)?;
        if t.depth > 0 || PrimClass::from_name(&t.class).is_some() {
            return Ok(t);
        }
        let header = lookup_method(self.table, &t, method)?;
        if modifier_leq(t.modifier, header.receiver) {
            return Ok(t);
        }
        let wanted = t.with_modifier(header.receiver);
        if flexible(recv) && self.check(env, recv, &wanted).is_ok() {
            return Ok(wanted);
        }
        Err(receiver_error(&t, header))
    }

    /// Types of the arguments once, so candidate selection does not
    /// re-check whole subtrees.
    fn arg_types(&mut self, env: &TypeEnv, args: &[Expr]) -> Vec<TResult<Ty>> {
        args.iter().map(|a| self.synth(env, a)).collect()
    }

    fn fits(&mut self, env: &TypeEnv, arg: &Expr, synth: &TResult<Ty>, t: &Type) -> TResult<()> {
        match synth {
            Ok(s) if self.leq(s, t) => Ok(()),
            Ok(s) if !flexible(arg) => Err(mismatch(s, t)),
            Err(e) if !flexible(arg) => Err(e.clone()),
            _ => self.check(env, arg, t),
        }
    }

    /// Chooses the most promoted applicable method type. The candidates form
    /// a chain, so this yields the least return type.
    fn select(
        &mut self,
        env: &TypeEnv,
        recv: &Type,
        candidates: &[MethodType],
        args: &[Expr],
        lifted: bool,
    ) -> TResult<MethodType> {
        let synths = self.arg_types(env, args);
        let mut first_err = None;
        for cand in candidates.iter().rev() {
            if !subtype(self.table, recv, &cand.params[0])? {
                continue;
            }
            let mut ok = true;
            for ((a, s), t) in args.iter().zip(&synths).zip(&cand.params[1..]) {
                let t = if lifted {
                    t.clone().signal_of(1)
                } else {
                    t.clone()
                };
                if let Err(e) = self.fits(env, a, s, &t) {
                    first_err.get_or_insert(e);
                    ok = false;
                    break;
                }
            }
            if ok {
                return Ok(cand.clone());
            }
        }
        Err(first_err
            .unwrap_or_else(|| TypeError::new(ErrorKind::Mismatch, "no applicable method type")))
    }

    fn arity(&self, method: &str, expected: usize, args: &[Expr]) -> TResult<()> {
        if expected == args.len() {
            Ok(())
        } else {
            Err(TypeError::new(
                ErrorKind::ArgCount,
                format!(
                    "`{method}` takes {expected} arguments, {} given",
                    args.len()
                ),
            ))
        }
    }

    fn synth_call(
        &mut self,
        env: &TypeEnv,
        recv: &Expr,
        method: &Name,
        args: &[Expr],
    ) -> TResult<Ty> {
        let t0 = self.receiver(env, recv, method)?;
        if let Some(p) = PrimClass::from_name(&t0.class).filter(|_| t0.depth == 0) {
            let mut classes = Vec::new();
            for a in args {
                let t = self.synth_known(env, a)?;
                match PrimClass::from_name(&t.class).filter(|_| t.depth == 0) {
                    Some(c) => classes.push(c),
                    None => {
                        return Err(TypeError::new(
                            ErrorKind::MethodNotFound,
                            format!(
                                "`{}.{method}` is not defined for an argument of type `{t}`",
                                p.name()
                            ),
                        ))
                    }
                }
            }
            return builtins::prim_method(p, method, &classes)
                .map(|c| Ty::Known(self.imm_of(c)))
                .ok_or_else(|| {
                    TypeError::new(
                        ErrorKind::MethodNotFound,
                        format!(
                            "`{}` has no method `{method}` for these arguments",
                            p.name()
                        ),
                    )
                });
        }
        let candidates = meth_types(self.table, &t0, method)?;
        self.arity(method, candidates[0].params.len() - 1, args)?;
        Ok(Ty::Known(
            self.select(env, &t0, &candidates, args, false)?.ret,
        ))
    }

    fn synth_lift(
        &mut self,
        env: &TypeEnv,
        recv: &Expr,
        method: &Name,
        args: &[Expr],
    ) -> TResult<Ty> {
        let t0 = self.receiver(env, recv, method)?;
        if PrimClass::from_name(&t0.class).is_some() && t0.depth == 0 {
            return Err(TypeError::new(
                ErrorKind::PrimitiveActor,
                format!("primitive values cannot receive lifted calls (`{t0}.@{method}`)"),
            ));
        }
        let candidates = meth_types(self.table, &t0, method)?;
        self.arity(method, candidates[0].params.len() - 1, args)?;
        if !valid_actor(self.table, &t0) {
            return Err(TypeError::new(
                ErrorKind::InvalidActor,
                format!("`{t0}` is not a valid actor: it must be imm, or a capability class without mut fields"),
            ));
        }
        let imm_returns: Vec<MethodType> = candidates
            .iter()
            .filter(|c| c.ret.modifier == Modifier::Imm)
            .cloned()
            .collect();
        if imm_returns.is_empty() {
            return Err(TypeError::new(
                ErrorKind::NonImmSignalValue,
                format!(
                    "lifted `{method}` returns `{}`, but signal values must be imm",
                    candidates[0].ret
                ),
            ));
        }
        let chosen = self.select(env, &t0, &imm_returns, args, true)?;
        self.lifted_receivers.push(t0);
        Ok(Ty::Known(chosen.ret.signal_of(1)))
    }

    /// Checks a body statement by statement; each statement contributes at
    /// most one diagnostic. Returns the environment after the statements
    /// and the result type.
    pub fn check_body(
        &mut self,
        env: &TypeEnv,
        body: &Body,
        expected: Option<&Type>,
        diags: &mut Vec<Diagnostic>,
    ) -> Option<Ty> {
        let mut env = env.clone();
        let report = |diags: &mut Vec<Diagnostic>, span: Span, e: TypeError| {
            diags.push(Diagnostic::error(e.kind.code(), span, e.message));
        };
        for stmt in &body.stmts {
            match &stmt.kind {
                StmtKind::Local { ty, name, init } => {
                    if let Err(e) = self.known_type(ty).and_then(|_| self.check(&env, init, ty)) {
                        report(diags, stmt.span, e);
                    }
                    env = env.bind(name, ty.clone());
                }
                StmtKind::Expr(e) => {
                    if let Err(err) = self.synth(&env, e) {
                        report(diags, stmt.span, err);
                    }
                }
            }
        }
        let result = match expected {
            Some(t) => self
                .check(&env, &body.result, t)
                .map(|_| Ty::Known(t.clone())),
            None => self.synth(&env, &body.result),
        };
        match result {
            Ok(t) => Some(t),
            Err(e) => {
                report(diags, body.result_span, e);
                None
            }
        }
    }
}

/// Outcome of checking a whole program.
#[derive(Clone, Debug, Default, Serialize)]
pub struct CheckReport {
    pub diagnostics: Vec<Diagnostic>,
    pub main_type: Option<Ty>,
    /// Receiver types of every lifted call, in checking order.
    pub lifted_receivers: Vec<Type>,
}

impl CheckReport {
    pub fn is_ok(&self) -> bool {
        self.diagnostics.is_empty()
    }

    /// Syntactic purity: no lifted call targets a `mut` receiver.
    pub fn expected_deterministic(&self) -> bool {
        self.lifted_receivers
            .iter()
            .all(|t| t.modifier != Modifier::Mut)
    }
}

fn header_type(h: &MethodHeader) -> (Modifier, Vec<&Type>, &Type) {
    (h.receiver, h.params.iter().map(|p| &p.ty).collect(), &h.ret)
}

fn override_ok(mine: &MethodHeader, theirs: &MethodHeader) -> bool {
    header_type(mine) == header_type(theirs)
}

/// Checks one method. The body is a capability context iff the class is a
/// capability class and the receiver is `mut`.
pub fn check_method(
    checker: &mut Checker<'_>,
    class: &ClassDecl,
    m: &MethodDecl,
    diags: &mut Vec<Diagnostic>,
) {
    let h = &m.header;
    let mut env = TypeEnv {
        capability: class.capability && h.receiver == Modifier::Mut,
        ..TypeEnv::default()
    };
    for t in std::iter::once(&h.ret).chain(h.params.iter().map(|p| &p.ty)) {
        if let Err(e) = checker.known_type(t) {
            diags.push(Diagnostic::error(e.kind.code(), h.span, e.message));
            return;
        }
    }
    env.gamma
        .insert(name("this"), Type::new(h.receiver, class.name.clone()));
    for p in &h.params {
        env.gamma.insert(p.name.clone(), p.ty.clone());
    }
    if let MethodBody::Source(body) = &m.body {
        checker.check_body(&env, body, Some(&h.ret), diags);
    }
}

/// Checks every class, interface and the main block.
pub fn check_program(program: &Program) -> CheckReport {
    let table = ClassTable::new(program);
    let mut checker = Checker::new(&table);
    let mut diags = Vec::new();

    for d in &program.decls {
        match d {
            Decl::Class(c) => {
                for f in &c.fields {
                    if let Err(e) = checker.known_type(&f.ty) {
                        diags.push(Diagnostic::error(e.kind.code(), f.span, e.message));
                    }
                }
                for iname in &c.implements {
                    let mut ifaces = vec![iname.clone()];
                    ifaces.extend(table.supertypes(iname));
                    for i in ifaces.iter().filter_map(|i| table.interface(i)) {
                        for h in &i.headers {
                            match c.method(&h.name) {
                                None => diags.push(Diagnostic::error(
                                    ErrorKind::MissingInterfaceMethod.code(),
                                    c.span,
                                    format!(
                                        "class `{}` does not implement `{}.{}`",
                                        c.name, i.name, h.name
                                    ),
                                )),
                                Some(m) if !override_ok(&m.header, h) => {
                                    diags.push(Diagnostic::error(
                                        ErrorKind::OverrideMismatch.code(),
                                        m.header.span,
                                        format!(
                                            "`{}.{}` must have the same type as `{}.{}`",
                                            c.name, h.name, i.name, h.name
                                        ),
                                    ))
                                }
                                Some(_) => {}
                            }
                        }
                    }
                }
                for m in &c.methods {
                    check_method(&mut checker, c, m, &mut diags);
                }
            }
            Decl::Interface(i) => {
                for sup in table.supertypes(&i.name) {
                    let Some(sup) = table.interface(&sup) else {
                        continue;
                    };
                    for h in &i.headers {
                        if let Some(other) = sup.headers.iter().find(|o| o.name == h.name) {
                            if !override_ok(h, other) {
                                diags.push(Diagnostic::error(
                                    ErrorKind::OverrideMismatch.code(),
                                    h.span,
                                    format!(
                                        "`{}.{}` must have the same type as `{}.{}`",
                                        i.name, h.name, sup.name, h.name
                                    ),
                                ));
                            }
                        }
                    }
                }
            }
        }
    }

    let main_type = program
        .main
        .as_ref()
        .and_then(|body| checker.check_body(&TypeEnv::main(), body, None, &mut diags));
    let lifted_receivers = std::mem::take(&mut checker.lifted_receivers);
    crate::diag::sort(&mut diags);
    CheckReport {
        diagnostics: diags,
        main_type,
        lifted_receivers,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_expression, parse_program};
    use Modifier::*;

    fn t(m: Modifier, c: &str) -> Type {
        Type::new(m, name(c))
    }

    fn report(src: &str) -> CheckReport {
        check_program(&parse_program(src).unwrap())
    }

    fn codes(src: &str) -> Vec<&'static str> {
        report(src).diagnostics.iter().map(|d| d.code).collect()
    }

    const BOX: &str = "class F { }
        class Box { mut F f; Box(mut F f) { this.f=f; }
          read method read F f() { return this.f; } }
        class MakeBox { method mut Box of(mut F f) { return new Box(f); } }
        class MakeF { method mut F make() { return new F(); } }";

    #[test]
    fn modifier_order() {
        assert!(modifier_leq(Capsule, Imm));
        assert!(modifier_leq(Imm, Read));
        assert!(!modifier_leq(Mut, Imm));
        assert!(!modifier_leq(Imm, Mut));
        assert!(!modifier_leq(Read, Capsule));
    }

    #[test]
    fn subtype_examples() {
        let table = ClassTable::new(&parse_program("class Person { }").unwrap());
        assert_eq!(
            subtype(&table, &t(Capsule, "Person"), &t(Imm, "Person")),
            Ok(true)
        );
        assert_eq!(
            subtype(&table, &t(Mut, "Person"), &t(Imm, "Person")),
            Ok(false)
        );
        assert_eq!(
            subtype(&table, &t(Imm, "Person"), &t(Read, "Person")),
            Ok(true)
        );
        assert!(subtype(&table, &t(Imm, "Ghost"), &t(Read, "Person")).is_err());
        assert_eq!(
            subtype(&table, &Type::imm("Person").signal_of(1), &t(Imm, "Person")),
            Ok(false)
        );
    }

    #[test]
    fn compose_examples() {
        assert_eq!(compose_modifier(&t(Mut, "C"), Read), t(Read, "C"));
        assert_eq!(compose_modifier(&t(Imm, "C"), Read), t(Imm, "C"));
        assert_eq!(compose_modifier(&t(Mut, "C"), Mut), t(Mut, "C"));
        assert_eq!(compose_modifier(&t(Mut, "C"), Imm), t(Imm, "C"));
        assert_eq!(compose_modifier(&t(Imm, "C"), Capsule), t(Imm, "C"));
        assert_eq!(compose_modifier(&Type::imm("C").signal_of(2), Mut).depth, 2);
    }

    #[test]
    fn meth_types_box() {
        let table = ClassTable::new(&parse_program(BOX).unwrap());
        let of = meth_types(&table, &t(Imm, "MakeBox"), "of").unwrap();
        assert!(of.contains(&MethodType {
            params: vec![t(Imm, "MakeBox"), t(Capsule, "F")],
            ret: t(Capsule, "Box")
        }));
        assert_eq!(
            meth_type_set(&table, &t(Imm, "MakeBox"), "of")
                .unwrap()
                .len(),
            2
        );
        let f = meth_types(&table, &t(Imm, "Box"), "f").unwrap();
        assert_eq!(
            f[2],
            MethodType {
                params: vec![t(Imm, "Box")],
                ret: t(Imm, "F")
            }
        );
        let err = meth_types(&table, &t(Imm, "Box"), "nope").unwrap_err();
        assert_eq!(err.kind, ErrorKind::MethodNotFound);
    }

    #[test]
    fn valid_actor_examples() {
        let table = ClassTable::new(
            &parse_program(
                "class F { } class ComfortComputer { }
                 capability class ACController { Bool isOn; ACController(Bool isOn) { this.isOn=isOn; } }
                 capability class Bad { mut F f; Bad(mut F f) { this.f=f; } }",
            )
            .unwrap(),
        );
        assert!(valid_actor(&table, &t(Imm, "ComfortComputer")));
        assert!(valid_actor(&table, &t(Mut, "ACController")));
        assert!(!valid_actor(&table, &t(Mut, "Bad")));
        assert!(!valid_actor(&table, &t(Mut, "ComfortComputer")));
        assert!(valid_actor(&table, &t(Mut, "Sensors")));
    }

    #[test]
    fn promotion_program_checks() {
        let src = format!(
            "{BOX} main {{ capsule F f = new MakeF().make(); capsule Box b = new MakeBox().of(f);
               imm Box immB = b; imm F immF = immB.f(); immF }}"
        );
        let r = report(&src);
        assert!(r.is_ok(), "{:?}", r.diagnostics);
        assert_eq!(r.main_type, Some(Ty::Known(t(Imm, "F"))));
    }

    #[test]
    fn receiver_capability_errors() {
        let src = "class Person { Int age; Person(Int age) { this.age = age; }
              mut method Int setAge(Int a) { this.age = a; return a; } }
            main { imm Person iP = new Person(24); iP.setAge(25); 0 }";
        assert_eq!(codes(src), vec!["receiver-capability"]);
    }

    #[test]
    fn capability_gate() {
        let ok = "capability class Cap { mut method mut Cap again() { return new Cap(); } }";
        assert!(codes(ok).is_empty());
        let bad = "capability class Cap { read method mut Cap again() { return new Cap(); } }";
        assert_eq!(codes(bad), vec!["capability-instantiation"]);
        let imm = "capability class Cap { read method imm Cap again() { return new Cap(); } }";
        assert!(codes(imm).is_empty());
    }

    #[test]
    fn signal_capture() {
        let src = "class P { method Int age() { return 1; } }
            main { mut P p = new P(); @Int s = @[p.age(); @[]]; 0 }";
        assert_eq!(codes(src), vec!["non-imm-capture"]);
        let src = "class P { method Int age() { return 1; } }
            main { P p = new P(); @Int s = @[p.age(); @[]]; head(s) }";
        assert!(codes(src).is_empty());
    }

    #[test]
    fn empty_signal_types() {
        let table = ClassTable::new(&Program {
            decls: vec![],
            main: None,
            main_span: Span::default(),
        });
        let mut c = Checker::new(&table);
        let env = TypeEnv::main();
        let e = parse_expression("tail(@[])").unwrap();
        assert_eq!(c.synth(&env, &e), Ok(Ty::Empty { depth: 1 }));
        let e = parse_expression("head(@[1; @[]]) + 1").unwrap();
        assert_eq!(c.synth(&env, &e), Ok(Ty::Known(Type::imm("Int"))));
        let e = parse_expression("head(@[]).foo()").unwrap();
        assert_eq!(c.synth(&env, &e).unwrap_err().kind, ErrorKind::CannotInfer);
        assert!(c
            .check(
                &env,
                &parse_expression("head(@[])").unwrap(),
                &Type::imm("Str")
            )
            .is_ok());
    }

    #[test]
    fn interface_rules() {
        let missing = "interface I { method Int m(); } class C implements I { }";
        assert_eq!(codes(missing), vec!["missing-interface-method"]);
        let differ = "interface I { method Int m(); } class C implements I { read method Int m() { return 1; } }";
        assert_eq!(codes(differ), vec!["override-mismatch"]);
        let fine =
            "interface I { method Int m(); } class C implements I { method Int m() { return 1; } }
            main { I i = new C(); i.m() }";
        assert!(codes(fine).is_empty());
    }

    #[test]
    fn lifted_calls() {
        let src = "class P { method Int inc(Int x) { return x + 1; } }
            main { @Int s = new P().@inc(@[1; @[]]); head(s) }";
        let r = report(src);
        assert!(r.is_ok(), "{:?}", r.diagnostics);
        assert!(r.expected_deterministic());
        let prim = "main { @Int s = 1.@plus(@[1; @[]]); 0 }";
        assert_eq!(codes(prim), vec!["primitive-actor"]);
    }

    #[test]
    fn field_update_requires_mut() {
        let src = "class C { Int x; C(Int x) { this.x = x; } read method Int bad() { return this.x = 2; } }";
        assert_eq!(codes(src), vec!["field-update-on-non-mut"]);
    }
}
