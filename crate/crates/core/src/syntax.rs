//! Abstract syntax shared by every other module: types, declarations,
//! expressions, and the runtime pieces (memory, mailboxes, messages).

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::Serialize;

/// Identifiers are shared, immutable strings; expressions are cloned a lot
/// during substitution so names must be cheap to copy.
pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

/// Source region. Spans never take part in structural equality or hashing,
/// so a program re-parsed from its printed form compares equal to the
/// original.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct Span {
    pub line: u32,
    pub col: u32,
    pub len: u32,
}

impl Span {
    pub fn new(line: u32, col: u32, len: u32) -> Span {
        Span { line, col, len }
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl Eq for Span {}

impl Hash for Span {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Modifier {
    Imm,
    Mut,
    Capsule,
    Read,
}

impl Modifier {
    pub const ALL: [Modifier; 4] = [
        Modifier::Imm,
        Modifier::Mut,
        Modifier::Capsule,
        Modifier::Read,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            Modifier::Imm => "imm",
            Modifier::Mut => "mut",
            Modifier::Capsule => "capsule",
            Modifier::Read => "read",
        }
    }
}

impl fmt::Display for Modifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// `@…@ mdf C`: a signal depth, a reference capability and a nominal class.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Type {
    pub depth: u32,
    pub modifier: Modifier,
    pub class: Name,
}

impl Type {
    pub fn new(modifier: Modifier, class: impl Into<Name>) -> Type {
        Type {
            depth: 0,
            modifier,
            class: class.into(),
        }
    }

    pub fn imm(class: &str) -> Type {
        Type::new(Modifier::Imm, name(class))
    }

    pub fn signal_of(mut self, depth: u32) -> Type {
        self.depth += depth;
        self
    }

    pub fn is_signal(&self) -> bool {
        self.depth > 0
    }

    /// The element type of a signal type.
    pub fn element(&self) -> Option<Type> {
        (self.depth > 0).then(|| Type {
            depth: self.depth - 1,
            ..self.clone()
        })
    }

    pub fn with_modifier(&self, modifier: Modifier) -> Type {
        Type {
            modifier,
            ..self.clone()
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for _ in 0..self.depth {
            f.write_str("@")?;
        }
        write!(f, "{} {}", self.modifier, self.class)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Param {
    pub ty: Type,
    pub name: Name,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldDecl {
    pub ty: Type,
    pub name: Name,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Constructor {
    pub params: Vec<Param>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MethodHeader {
    pub receiver: Modifier,
    pub ret: Type,
    pub name: Name,
    pub params: Vec<Param>,
    pub span: Span,
}

/// Host-implemented methods of the scripted capability classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Native {
    Clock,
    Temp,
    Humidity,
    SetPower,
    Print,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MethodBody {
    Source(Body),
    Native(Native),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MethodDecl {
    pub header: MethodHeader,
    pub body: MethodBody,
}

/// Primitive value classes. Their methods are built in (see `builtins`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PrimClass {
    Int,
    Float,
    Bool,
    Str,
}

impl PrimClass {
    pub fn name(self) -> &'static str {
        match self {
            PrimClass::Int => "Int",
            PrimClass::Float => "Float",
            PrimClass::Bool => "Bool",
            PrimClass::Str => "Str",
        }
    }

    pub fn from_name(s: &str) -> Option<PrimClass> {
        match s {
            "Int" => Some(PrimClass::Int),
            "Float" => Some(PrimClass::Float),
            "Bool" => Some(PrimClass::Bool),
            "Str" => Some(PrimClass::Str),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClassOrigin {
    User,
    /// Predefined class with FRJ-visible declarations (Object, Sensors, AC, Console).
    Builtin,
    Primitive(PrimClass),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ClassDecl {
    pub capability: bool,
    pub name: Name,
    pub implements: Vec<Name>,
    pub fields: Vec<FieldDecl>,
    /// `None` when the source omits the constructor; it then mirrors the fields.
    pub ctor: Option<Constructor>,
    pub methods: Vec<MethodDecl>,
    pub origin: ClassOrigin,
    pub span: Span,
}

impl ClassDecl {
    pub fn method(&self, name: &str) -> Option<&MethodDecl> {
        self.methods.iter().find(|m| &*m.header.name == name)
    }

    pub fn field_index(&self, name: &str) -> Option<usize> {
        self.fields.iter().position(|f| &*f.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InterfaceDecl {
    pub name: Name,
    pub extends: Vec<Name>,
    pub headers: Vec<MethodHeader>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Decl {
    Class(ClassDecl),
    Interface(InterfaceDecl),
}

impl Decl {
    pub fn name(&self) -> &Name {
        match self {
            Decl::Class(c) => &c.name,
            Decl::Interface(i) => &i.name,
        }
    }

    pub fn span(&self) -> Span {
        match self {
            Decl::Class(c) => c.span,
            Decl::Interface(i) => i.span,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum StmtKind {
    Local { ty: Type, name: Name, init: Expr },
    Expr(Expr),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

/// A method body or the main block: local bindings and expression
/// statements followed by a result expression.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Body {
    pub stmts: Vec<Stmt>,
    pub result: Expr,
    pub result_span: Span,
}

impl Body {
    pub fn of(result: Expr) -> Body {
        Body {
            stmts: Vec::new(),
            result,
            result_span: Span::default(),
        }
    }

    /// Desugar into nested `let` expressions, evaluated left to right.
    pub fn to_expr(&self) -> Expr {
        self.stmts
            .iter()
            .rev()
            .fold(self.result.clone(), |body, stmt| match &stmt.kind {
                StmtKind::Local { ty, name, init } => Expr::Let {
                    ty: Some(ty.clone()),
                    name: Some(name.clone()),
                    init: Box::new(init.clone()),
                    body: Box::new(body),
                },
                StmtKind::Expr(e) => Expr::Let {
                    ty: None,
                    name: None,
                    init: Box::new(e.clone()),
                    body: Box::new(body),
                },
            })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Program {
    pub decls: Vec<Decl>,
    pub main: Option<Body>,
    pub main_span: Span,
}

/// Object location.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Loc(pub u32);

/// Signal label naming a pending message.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Label(pub u32);

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{}", self.0)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}", self.0)
    }
}

/// Primitive literal values. Floats compare and hash by bit pattern so
/// expressions can be used as map keys.
#[derive(Clone, Debug)]
pub enum Prim {
    Int(i64),
    Float(f64),
    Bool(bool),
    Str(Name),
}

impl Prim {
    pub fn class(&self) -> PrimClass {
        match self {
            Prim::Int(_) => PrimClass::Int,
            Prim::Float(_) => PrimClass::Float,
            Prim::Bool(_) => PrimClass::Bool,
            Prim::Str(_) => PrimClass::Str,
        }
    }
}

impl PartialEq for Prim {
    fn eq(&self, other: &Prim) -> bool {
        match (self, other) {
            (Prim::Int(a), Prim::Int(b)) => a == b,
            (Prim::Float(a), Prim::Float(b)) => a.to_bits() == b.to_bits(),
            (Prim::Bool(a), Prim::Bool(b)) => a == b,
            (Prim::Str(a), Prim::Str(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Prim {}

impl Hash for Prim {
    fn hash<H: Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        match self {
            Prim::Int(i) => i.hash(state),
            Prim::Float(x) => x.to_bits().hash(state),
            Prim::Bool(b) => b.hash(state),
            Prim::Str(s) => s.hash(state),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Var(Name),
    Call {
        recv: Box<Expr>,
        method: Name,
        args: Vec<Expr>,
    },
    Lift {
        recv: Box<Expr>,
        method: Name,
        args: Vec<Expr>,
    },
    Field {
        recv: Box<Expr>,
        field: Name,
    },
    Assign {
        recv: Box<Expr>,
        field: Name,
        value: Box<Expr>,
    },
    New {
        class: Name,
        args: Vec<Expr>,
    },
    /// `@[head; tail]`
    Signal {
        head: Box<Expr>,
        tail: Box<Expr>,
    },
    /// `@[]`
    EmptySignal,
    Head(Box<Expr>),
    Tail(Box<Expr>),
    /// Local binding produced by desugaring a body; `name == None` discards
    /// the value of an expression statement.
    Let {
        ty: Option<Type>,
        name: Option<Name>,
        init: Box<Expr>,
        body: Box<Expr>,
    },
    /// `c ? a : b`; only the selected branch is evaluated.
    Cond {
        cond: Box<Expr>,
        then: Box<Expr>,
        els: Box<Expr>,
    },
    Lit(Prim),
    Loc(Loc),
    Label(Label),
    /// Completed signal `[v; S]`. The tail is a signal value: a label,
    /// `@[]`, or another completed signal after later substitutions.
    Done {
        head: Box<Expr>,
        tail: Box<Expr>,
    },
}

impl Expr {
    pub fn var(s: &str) -> Expr {
        Expr::Var(name(s))
    }

    pub fn int(i: i64) -> Expr {
        Expr::Lit(Prim::Int(i))
    }

    pub fn float(x: f64) -> Expr {
        Expr::Lit(Prim::Float(x))
    }

    pub fn boolean(b: bool) -> Expr {
        Expr::Lit(Prim::Bool(b))
    }

    pub fn string(s: &str) -> Expr {
        Expr::Lit(Prim::Str(name(s)))
    }

    pub fn call(recv: Expr, method: &str, args: Vec<Expr>) -> Expr {
        Expr::Call {
            recv: Box::new(recv),
            method: name(method),
            args,
        }
    }

    pub fn lift(recv: Expr, method: &str, args: Vec<Expr>) -> Expr {
        Expr::Lift {
            recv: Box::new(recv),
            method: name(method),
            args,
        }
    }

    pub fn field(recv: Expr, field: &str) -> Expr {
        Expr::Field {
            recv: Box::new(recv),
            field: name(field),
        }
    }

    pub fn new_object(class: &str, args: Vec<Expr>) -> Expr {
        Expr::New {
            class: name(class),
            args,
        }
    }

    pub fn signal(head: Expr, tail: Expr) -> Expr {
        Expr::Signal {
            head: Box::new(head),
            tail: Box::new(tail),
        }
    }

    pub fn head(e: Expr) -> Expr {
        Expr::Head(Box::new(e))
    }

    pub fn tail(e: Expr) -> Expr {
        Expr::Tail(Box::new(e))
    }

    pub fn done(head: Expr, tail: Expr) -> Expr {
        Expr::Done {
            head: Box::new(head),
            tail: Box::new(tail),
        }
    }

    pub fn is_value(&self) -> bool {
        matches!(
            self,
            Expr::Lit(_) | Expr::Loc(_) | Expr::Label(_) | Expr::EmptySignal | Expr::Done { .. }
        )
    }

    /// Values that can stand in tail position of a completed signal.
    pub fn is_signal_value(&self) -> bool {
        matches!(self, Expr::Label(_) | Expr::EmptySignal | Expr::Done { .. })
    }

    /// True when the expression contains a location, label or completed
    /// signal, which only arise during reduction.
    pub fn has_runtime_parts(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| {
            if matches!(e, Expr::Loc(_) | Expr::Label(_) | Expr::Done { .. }) {
                found = true;
            }
        });
        found
    }

    /// Pre-order traversal over every sub-expression.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        for child in self.children() {
            child.visit(f);
        }
    }

    /// Immediate sub-expressions, in evaluation order.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::New { args, .. } => args.iter().collect(),
            Expr::Call { recv, args, .. } | Expr::Lift { recv, args, .. } => {
                std::iter::once(&**recv).chain(args.iter()).collect()
            }
            Expr::Field { recv, .. } => vec![recv],
            Expr::Assign { recv, value, .. } => vec![recv, value],
            Expr::Signal { head, tail } | Expr::Done { head, tail } => vec![head, tail],
            Expr::Head(e) | Expr::Tail(e) => vec![e],
            Expr::Let { init, body, .. } => vec![init, body],
            Expr::Cond { cond, then, els } => vec![cond, then, els],
            Expr::Var(_) | Expr::EmptySignal | Expr::Lit(_) | Expr::Loc(_) | Expr::Label(_) => {
                Vec::new()
            }
        }
    }

    pub fn children_mut(&mut self) -> Vec<&mut Expr> {
        match self {
            Expr::New { args, .. } => args.iter_mut().collect(),
            Expr::Call { recv, args, .. } | Expr::Lift { recv, args, .. } => {
                std::iter::once(&mut **recv)
                    .chain(args.iter_mut())
                    .collect()
            }
            Expr::Field { recv, .. } => vec![recv],
            Expr::Assign { recv, value, .. } => vec![recv, value],
            Expr::Signal { head, tail } | Expr::Done { head, tail } => vec![head, tail],
            Expr::Head(e) | Expr::Tail(e) => vec![e],
            Expr::Let { init, body, .. } => vec![init, body],
            Expr::Cond { cond, then, els } => vec![cond, then, els],
            Expr::Var(_) | Expr::EmptySignal | Expr::Lit(_) | Expr::Loc(_) | Expr::Label(_) => {
                Vec::new()
            }
        }
    }

    /// Applies `f` bottom-up to every sub-expression.
    pub fn rewrite(&mut self, f: &mut impl FnMut(&mut Expr)) {
        for child in self.children_mut() {
            child.rewrite(f);
        }
        f(self);
    }
}

/// A pending computation `S[head; tail]` in an object's mailbox.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Message {
    pub label: Label,
    pub head: Expr,
    pub tail: Expr,
}

/// `L ↦ C(v̄) Msḡ`. The mailbox front holds the newest message; the back is
/// the one being processed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Record {
    pub class: Name,
    pub fields: Vec<Expr>,
    pub mailbox: VecDeque<Message>,
}

impl Record {
    pub fn new(class: Name, fields: Vec<Expr>) -> Record {
        Record {
            class,
            fields,
            mailbox: VecDeque::new(),
        }
    }

    pub fn active(&self) -> Option<&Message> {
        self.mailbox.back()
    }
}

pub type Memory = BTreeMap<Loc, Record>;
