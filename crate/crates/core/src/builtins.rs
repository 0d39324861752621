//! Predefined classes: `Object`, the primitive value classes with their
//! operator methods, and the scripted capability classes `Sensors`, `AC`
//! and `Console` that stand in for real devices.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::syntax::*;

const PRIMITIVES: [PrimClass; 4] = [
    PrimClass::Int,
    PrimClass::Float,
    PrimClass::Bool,
    PrimClass::Str,
];

fn builtin_class(capability: bool, cname: &str, methods: Vec<MethodDecl>) -> Decl {
    Decl::Class(ClassDecl {
        capability,
        name: name(cname),
        implements: Vec::new(),
        fields: Vec::new(),
        ctor: None,
        methods,
        origin: ClassOrigin::Builtin,
        span: Span::default(),
    })
}

fn native(
    receiver: Modifier,
    ret: Type,
    mname: &str,
    params: &[(&str, &str)],
    op: Native,
) -> MethodDecl {
    MethodDecl {
        header: MethodHeader {
            receiver,
            ret,
            name: name(mname),
            params: params
                .iter()
                .map(|(t, x)| Param {
                    ty: Type::imm(t),
                    name: name(x),
                })
                .collect(),
            span: Span::default(),
        },
        body: MethodBody::Native(op),
    }
}

/// Declarations present in every class table.
pub fn declarations() -> Vec<Decl> {
    let mut out = vec![builtin_class(false, "Object", Vec::new())];
    for p in PRIMITIVES {
        out.push(Decl::Class(ClassDecl {
            capability: false,
            name: name(p.name()),
            implements: Vec::new(),
            fields: Vec::new(),
            ctor: None,
            methods: Vec::new(),
            origin: ClassOrigin::Primitive(p),
            span: Span::default(),
        }));
    }
    let m = Modifier::Mut;
    out.push(builtin_class(
        true,
        "Sensors",
        vec![
            native(
                m,
                Type::imm("Bool").signal_of(1),
                "clock",
                &[],
                Native::Clock,
            ),
            native(
                m,
                Type::imm("Float"),
                "temp",
                &[("Bool", "tick")],
                Native::Temp,
            ),
            native(
                m,
                Type::imm("Float"),
                "humidity",
                &[("Bool", "tick")],
                Native::Humidity,
            ),
        ],
    ));
    out.push(builtin_class(
        true,
        "AC",
        vec![native(
            m,
            Type::imm("Bool"),
            "setPower",
            &[("Bool", "on")],
            Native::SetPower,
        )],
    ));
    out.push(builtin_class(
        true,
        "Console",
        vec![native(
            m,
            Type::imm("Str"),
            "print",
            &[("Str", "line")],
            Native::Print,
        )],
    ));
    out
}

pub fn is_builtin_name(n: &str) -> bool {
    matches!(n, "Object" | "Sensors" | "AC" | "Console") || PrimClass::from_name(n).is_some()
}

/// Result class of a primitive method, or `None` if no such method exists
/// for these argument classes. All primitive methods take an `imm`
/// receiver and `imm` arguments.
pub fn prim_method(recv: PrimClass, method: &str, args: &[PrimClass]) -> Option<PrimClass> {
    use PrimClass::*;
    let numeric = |c: PrimClass| matches!(c, Int | Float);
    match (recv, method, args) {
        (Int, "plus" | "minus" | "times" | "div" | "rem", [Int]) => Some(Int),
        (Int | Float, "plus" | "minus" | "times" | "div", [a]) if numeric(*a) => Some(Float),
        (Int | Float, "lt" | "leq" | "gt" | "geq", [a]) if numeric(*a) => Some(Bool),
        (Int | Float, "neg", []) => Some(recv),
        (Int, "toFloat", []) => Some(Float),
        (Bool, "and" | "or", [Bool]) => Some(Bool),
        (Bool, "not", []) => Some(Bool),
        (Str, "plus", [_]) => Some(Str),
        (Str, "size", []) => Some(Int),
        (_, "eq" | "neq", [a]) if *a == recv || (numeric(*a) && numeric(recv)) => Some(Bool),
        (_, "toStr", []) => Some(Str),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PrimError {
    #[error("no primitive method `{method}` on {recv} for these arguments")]
    NoMethod { recv: &'static str, method: String },
    #[error("integer division by zero")]
    DivisionByZero,
    #[error("integer overflow in `{0}`")]
    Overflow(String),
}

fn as_f64(p: &Prim) -> Option<f64> {
    match p {
        Prim::Int(i) => Some(*i as f64),
        Prim::Float(x) => Some(*x),
        _ => None,
    }
}

/// Text form used by string concatenation and final-value rendering.
/// Floats use the shortest decimal that round-trips.
pub fn display_prim(p: &Prim) -> String {
    match p {
        Prim::Int(i) => i.to_string(),
        Prim::Float(x) => format!("{x:?}"),
        Prim::Bool(b) => b.to_string(),
        Prim::Str(s) => s.to_string(),
    }
}

pub fn eval_prim(recv: &Prim, method: &str, args: &[Prim]) -> Result<Prim, PrimError> {
    use Prim::*;
    let no_method = || PrimError::NoMethod {
        recv: recv.class().name(),
        method: method.to_string(),
    };
    let overflow = || PrimError::Overflow(method.to_string());
    Ok(match (recv, method, args) {
        (Int(a), _, [Int(b)]) if matches!(method, "plus" | "minus" | "times" | "div" | "rem") => {
            let (a, b) = (*a, *b);
            Int(match method {
                "plus" => a.checked_add(b).ok_or_else(overflow)?,
                "minus" => a.checked_sub(b).ok_or_else(overflow)?,
                "times" => a.checked_mul(b).ok_or_else(overflow)?,
                _ if b == 0 => return Err(PrimError::DivisionByZero),
                "div" => a.checked_div(b).ok_or_else(overflow)?,
                _ => a.checked_rem(b).ok_or_else(overflow)?,
            })
        }
        (Int(_) | Float(_), "plus" | "minus" | "times" | "div", [b @ (Int(_) | Float(_))]) => {
            let (x, y) = (as_f64(recv).unwrap(), as_f64(b).unwrap());
            Float(match method {
                "plus" => x + y,
                "minus" => x - y,
                "times" => x * y,
                _ => x / y,
            })
        }
        (Int(_) | Float(_), "lt" | "leq" | "gt" | "geq", [b @ (Int(_) | Float(_))]) => {
            let (x, y) = (as_f64(recv).unwrap(), as_f64(b).unwrap());
            Bool(match method {
                "lt" => x < y,
                "leq" => x <= y,
                "gt" => x > y,
                _ => x >= y,
            })
        }
        (Int(a), "neg", []) => Int(a.checked_neg().ok_or_else(overflow)?),
        (Float(x), "neg", []) => Float(-x),
        (Int(a), "toFloat", []) => Float(*a as f64),
        (Bool(a), "and", [Bool(b)]) => Bool(*a && *b),
        (Bool(a), "or", [Bool(b)]) => Bool(*a || *b),
        (Bool(a), "not", []) => Bool(!a),
        (Str(a), "plus", [b]) => Str(name(&format!("{a}{}", display_prim(b)))),
        (Str(a), "size", []) => Int(a.chars().count() as i64),
        (_, "eq" | "neq", [b]) => {
            let same = match (recv, b) {
                (Int(_) | Float(_), Int(_) | Float(_)) if recv.class() != b.class() => {
                    as_f64(recv) == as_f64(b)
                }
                (Float(x), Float(y)) => x == y,
                _ if recv.class() == b.class() => recv == b,
                _ => return Err(no_method()),
            };
            Bool(if method == "eq" { same } else { !same })
        }
        (_, "toStr", []) => Str(name(&display_prim(recv))),
        _ => return Err(no_method()),
    })
}

#[derive(Debug, Error, PartialEq)]
pub enum ScriptError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

/// Scripted sensor readings: the clock emits `ticks` pulses, and each
/// `temp`/`humidity` call consumes the next scripted value.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SensorScript {
    pub ticks: usize,
    pub temps: Vec<f64>,
    pub humidities: Vec<f64>,
}

impl FromStr for SensorScript {
    type Err = ScriptError;

    /// Line-oriented: `ticks N`, `temps v1 v2 ...`, `humidities v1 v2 ...`.
    /// Blank lines and `#` comments are ignored.
    fn from_str(src: &str) -> Result<SensorScript, ScriptError> {
        let mut script = SensorScript::default();
        for (i, raw) in src.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| ScriptError::Syntax {
                line: i + 1,
                message,
            };
            let mut words = line.split_whitespace();
            let key = words.next().unwrap();
            let values: Vec<&str> = words.collect();
            let floats = || {
                values
                    .iter()
                    .map(|v| {
                        v.parse::<f64>()
                            .map_err(|_| err(format!("`{v}` is not a number")))
                    })
                    .collect::<Result<Vec<_>, _>>()
            };
            match key {
                "ticks" => match values.as_slice() {
                    [n] => {
                        script.ticks = n
                            .parse()
                            .map_err(|_| err(format!("`{n}` is not a count")))?
                    }
                    _ => return Err(err("`ticks` takes exactly one count".into())),
                },
                "temps" => script.temps = floats()?,
                "humidities" => script.humidities = floats()?,
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        Ok(script)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    Clock,
    Temp,
    Humidity,
}

/// Host-side state of the scripted capabilities. Cursors are keyed by the
/// capability object's location, so FRJ-visible objects keep no mutable
/// fields and remain valid actors.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct HostState {
    pub cursors: BTreeMap<(Loc, Channel), usize>,
    pub ac_log: Vec<bool>,
    pub console: Vec<String>,
}

impl HostState {
    fn advance(&mut self, loc: Loc, ch: Channel) -> usize {
        let c = self.cursors.entry((loc, ch)).or_insert(0);
        *c += 1;
        *c - 1
    }

    /// AC output log rendered one `on|off` per line.
    pub fn ac_log_text(&self) -> String {
        self.ac_log
            .iter()
            .map(|&b| if b { "on\n" } else { "off\n" })
            .collect()
    }
}

#[derive(Debug, Error, PartialEq)]
#[error("native `{method:?}` called with unexpected arguments")]
pub struct NativeError {
    pub method: Native,
}

/// Reduct of a native method call on `loc`. An exhausted sensor returns
/// `head(@[])`, which ends the calling message's signal by rule (Empty).
pub fn call_native(
    op: Native,
    loc: Loc,
    args: &[Expr],
    script: &SensorScript,
    host: &mut HostState,
) -> Result<Expr, NativeError> {
    let exhausted = || Expr::head(Expr::EmptySignal);
    match (op, args) {
        (Native::Clock, []) => {
            let c = host
                .cursors
                .get(&(loc, Channel::Clock))
                .copied()
                .unwrap_or(0);
            if c < script.ticks {
                host.advance(loc, Channel::Clock);
                Ok(Expr::signal(
                    Expr::boolean(true),
                    Expr::call(Expr::Loc(loc), "clock", vec![]),
                ))
            } else {
                Ok(Expr::EmptySignal)
            }
        }
        (Native::Temp | Native::Humidity, [Expr::Lit(Prim::Bool(_))]) => {
            let (ch, values) = if op == Native::Temp {
                (Channel::Temp, &script.temps)
            } else {
                (Channel::Humidity, &script.humidities)
            };
            let c = host.cursors.get(&(loc, ch)).copied().unwrap_or(0);
            match values.get(c) {
                Some(v) => {
                    host.advance(loc, ch);
                    Ok(Expr::float(*v))
                }
                None => Ok(exhausted()),
            }
        }
        (Native::SetPower, [Expr::Lit(Prim::Bool(b))]) => {
            host.ac_log.push(*b);
            Ok(Expr::boolean(*b))
        }
        (Native::Print, [Expr::Lit(Prim::Str(s))]) => {
            host.console.push(s.to_string());
            Ok(Expr::Lit(Prim::Str(s.clone())))
        }
        _ => Err(NativeError { method: op }),
    }
}

impl fmt::Display for SensorScript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x:?}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        writeln!(f, "ticks {}", self.ticks)?;
        writeln!(f, "temps {}", join(&self.temps))?;
        writeln!(f, "humidities {}", join(&self.humidities))
    }
}
