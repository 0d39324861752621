//! Concrete-syntax printer. Output re-parses to a structurally equal
//! program; runtime-only forms print in the notation used by traces.

use std::fmt::{self, Write};

use crate::syntax::*;

pub fn program(p: &Program) -> String {
    let mut out = String::new();
    for decl in &p.decls {
        match decl {
            Decl::Class(c) => class(&mut out, c),
            Decl::Interface(i) => interface(&mut out, i),
        }
        out.push('\n');
    }
    if let Some(main) = &p.main {
        out.push_str("main {\n");
        for stmt in &main.stmts {
            out.push_str("  ");
            statement(&mut out, stmt);
            out.push('\n');
        }
        let _ = writeln!(out, "  {}", expr(&main.result));
        out.push_str("}\n");
    }
    out
}

fn names(list: &[Name]) -> String {
    list.iter().map(|n| &**n).collect::<Vec<_>>().join(", ")
}

fn params(ps: &[Param]) -> String {
    ps.iter()
        .map(|p| format!("{} {}", p.ty, p.name))
        .collect::<Vec<_>>()
        .join(", ")
}

fn header(out: &mut String, h: &MethodHeader) {
    let _ = write!(
        out,
        "{} method {} {}({})",
        h.receiver,
        h.ret,
        h.name,
        params(&h.params)
    );
}

fn class(out: &mut String, c: &ClassDecl) {
    if c.capability {
        out.push_str("capability ");
    }
    let _ = write!(out, "class {}", c.name);
    if !c.implements.is_empty() {
        let _ = write!(out, " implements {}", names(&c.implements));
    }
    out.push_str(" {\n");
    for f in &c.fields {
        let _ = writeln!(out, "  {} {};", f.ty, f.name);
    }
    if let Some(ctor) = &c.ctor {
        let _ = write!(out, "  {}({}) {{", c.name, params(&ctor.params));
        for p in &ctor.params {
            let _ = write!(out, " this.{0} = {0};", p.name);
        }
        out.push_str(" }\n");
    }
    for m in &c.methods {
        out.push_str("  ");
        header(out, &m.header);
        match &m.body {
            MethodBody::Source(body) => {
                out.push_str(" {");
                for stmt in &body.stmts {
                    out.push(' ');
                    statement(out, stmt);
                }
                let _ = writeln!(out, " return {}; }}", expr(&body.result));
            }
            MethodBody::Native(n) => {
                let _ = writeln!(out, "; // native {n:?}");
            }
        }
    }
    out.push_str("}\n");
}

fn interface(out: &mut String, i: &InterfaceDecl) {
    let _ = write!(out, "interface {}", i.name);
    if !i.extends.is_empty() {
        let _ = write!(out, " extends {}", names(&i.extends));
    }
    out.push_str(" {\n");
    for h in &i.headers {
        out.push_str("  ");
        header(out, h);
        out.push_str(";\n");
    }
    out.push_str("}\n");
}

fn statement(out: &mut String, s: &Stmt) {
    match &s.kind {
        StmtKind::Local { ty, name, init } => {
            let _ = write!(out, "{ty} {name} = {};", expr(init));
        }
        StmtKind::Expr(e) => {
            let _ = write!(out, "{};", expr(e));
        }
    }
}

pub fn expr(e: &Expr) -> String {
    let mut out = String::new();
    let _ = write_expr(&mut out, e, false);
    out
}

fn literal(out: &mut String, p: &Prim) -> fmt::Result {
    match p {
        Prim::Int(i) if *i < 0 => write!(out, "({i})"),
        Prim::Int(i) => write!(out, "{i}"),
        Prim::Float(x) if x.is_sign_negative() => write!(out, "({x:?})"),
        Prim::Float(x) => write!(out, "{x:?}"),
        Prim::Bool(b) => write!(out, "{b}"),
        Prim::Str(s) => {
            out.push('"');
            for ch in s.chars() {
                match ch {
                    '"' => out.push_str("\\\""),
                    '\\' => out.push_str("\\\\"),
                    '\n' => out.push_str("\\n"),
                    '\t' => out.push_str("\\t"),
                    c => out.push(c),
                }
            }
            out.push('"');
            Ok(())
        }
    }
}

fn args(out: &mut String, list: &[Expr]) -> fmt::Result {
    out.push('(');
    for (i, a) in list.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(out, a, false)?;
    }
    out.push(')');
    Ok(())
}

/// `atomic` asks for parentheses around forms that would otherwise absorb
/// a following postfix or operator.
fn write_expr(out: &mut String, e: &Expr, atomic: bool) -> fmt::Result {
    match e {
        Expr::Var(x) => write!(out, "{x}"),
        Expr::Call {
            recv,
            method,
            args: a,
        } => {
            write_expr(out, recv, true)?;
            write!(out, ".{method}")?;
            args(out, a)
        }
        Expr::Lift {
            recv,
            method,
            args: a,
        } => {
            write_expr(out, recv, true)?;
            write!(out, ".@{method}")?;
            args(out, a)
        }
        Expr::Field { recv, field } => {
            write_expr(out, recv, true)?;
            write!(out, ".{field}")
        }
        Expr::Assign { recv, field, value } => {
            if atomic {
                out.push('(');
            }
            write_expr(out, recv, true)?;
            write!(out, ".{field} = ")?;
            write_expr(out, value, false)?;
            if atomic {
                out.push(')');
            }
            Ok(())
        }
        Expr::New { class, args: a } => {
            write!(out, "new {class}")?;
            args(out, a)
        }
        Expr::Signal { head, tail } => {
            out.push_str("@[");
            write_expr(out, head, false)?;
            out.push_str("; ");
            write_expr(out, tail, false)?;
            out.push(']');
            Ok(())
        }
        Expr::EmptySignal => write!(out, "@[]"),
        Expr::Head(x) => {
            out.push_str("head(");
            write_expr(out, x, false)?;
            out.push(')');
            Ok(())
        }
        Expr::Tail(x) => {
            out.push_str("tail(");
            write_expr(out, x, false)?;
            out.push(')');
            Ok(())
        }
        Expr::Let {
            ty,
            name,
            init,
            body,
        } => {
            out.push('(');
            match (ty, name) {
                (Some(t), Some(x)) => write!(out, "{t} {x} = ")?,
                (None, Some(x)) => write!(out, "{x} = ")?,
                _ => {}
            }
            write_expr(out, init, false)?;
            out.push_str("; ");
            write_expr(out, body, false)?;
            out.push(')');
            Ok(())
        }
        Expr::Cond { cond, then, els } => {
            out.push('(');
            write_expr(out, cond, true)?;
            out.push_str(" ? ");
            write_expr(out, then, true)?;
            out.push_str(" : ");
            write_expr(out, els, true)?;
            out.push(')');
            Ok(())
        }
        Expr::Lit(p) => literal(out, p),
        Expr::Loc(l) => write!(out, "{l}"),
        Expr::Label(s) => write!(out, "{s}"),
        Expr::Done { head, tail } => {
            out.push('[');
            write_expr(out, head, false)?;
            out.push_str("; ");
            write_expr(out, tail, false)?;
            out.push(']');
            Ok(())
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&expr(self))
    }
}
