//! Redex decomposition along evaluation contexts.

use std::fmt;

use serde::Serialize;

use crate::syntax::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Rule {
    FAccess,
    FUpdate,
    New,
    MCall,
    Prim,
    Let,
    Cond,
    Head,
    Tail,
    TailEmpty,
    ExplicitS,
    LiftS,
    MsgComplete,
    Empty,
    Garbage,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::FAccess => "fAccess",
            Rule::FUpdate => "fUpdate",
            Rule::New => "new",
            Rule::MCall => "mCall",
            Rule::Prim => "prim",
            Rule::Let => "let",
            Rule::Cond => "cond",
            Rule::Head => "head",
            Rule::Tail => "tail",
            Rule::TailEmpty => "tailEmpty",
            Rule::ExplicitS => "explicitS",
            Rule::LiftS => "liftS",
            Rule::MsgComplete => "msgComplete",
            Rule::Empty => "Empty",
            Rule::Garbage => "garbage",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where a redex lives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Site {
    /// Context `E` in the main expression.
    Main,
    /// `EHead`: inside the head of the last message of `L`.
    Head(Loc, Label),
    /// `ETail`: inside the tail, once the head is a value.
    Tail(Loc, Label),
    Complete(Loc, Label),
    Empty(Loc, Label),
    Garbage,
}

impl Site {
    /// The unit of exclusive ownership: main, or one record's mailbox.
    pub fn key(self) -> SiteKey {
        match self {
            Site::Main => SiteKey::Main,
            Site::Head(l, _) | Site::Tail(l, _) | Site::Complete(l, _) | Site::Empty(l, _) => {
                SiteKey::Mailbox(l)
            }
            Site::Garbage => SiteKey::Memory,
        }
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Site::Main => f.write_str("main"),
            Site::Head(l, s) => write!(f, "{l}.{s}.head"),
            Site::Tail(l, s) => write!(f, "{l}.{s}.tail"),
            Site::Complete(l, s) | Site::Empty(l, s) => write!(f, "{l}.{s}"),
            Site::Garbage => f.write_str("memory"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum SiteKey {
    Main,
    Mailbox(Loc),
    Memory,
}

/// One fireable rule application. `path` addresses the contracted
/// sub-expression below the site expression, by child index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Redex {
    pub site: Site,
    pub rule: Rule,
    pub path: Vec<usize>,
}

/// Result of decomposing an expression as `E[r]`.
#[derive(Clone, Debug, PartialEq)]
pub enum Focus {
    Value,
    Redex(Vec<usize>, Rule),
    /// `E[head(@[])]`.
    EmptyHead(Vec<usize>),
    /// Waiting on a pending message (`head(S)` or `tail(S)`).
    Blocked(Label),
    /// Ill-typed shape; cannot reduce.
    Wrong(String),
}

pub fn focus(e: &Expr) -> Focus {
    let mut path = Vec::new();
    focus_in(e, &mut path)
}

fn descend(children: &[&Expr], path: &mut Vec<usize>) -> Option<Focus> {
    let i = children.iter().position(|c| !c.is_value())?;
    path.push(i);
    Some(focus_in(children[i], path))
}

fn focus_in(e: &Expr, path: &mut Vec<usize>) -> Focus {
    let here = |path: &mut Vec<usize>, r| Focus::Redex(std::mem::take(path), r);
    match e {
        _ if e.is_value() => Focus::Value,
        Expr::Var(x) => Focus::Wrong(format!("free variable `{x}`")),
        Expr::Signal { .. } => here(path, Rule::ExplicitS),
        Expr::Call { .. }
        | Expr::Lift { .. }
        | Expr::Field { .. }
        | Expr::Assign { .. }
        | Expr::New { .. } => {
            let children = e.children();
            if let Some(f) = descend(&children, path) {
                return f;
            }
            match e {
                Expr::New { .. } => here(path, Rule::New),
                Expr::Call { recv, .. } => match **recv {
                    Expr::Loc(_) => here(path, Rule::MCall),
                    Expr::Lit(_) => here(path, Rule::Prim),
                    _ => Focus::Wrong(format!("call on non-object `{recv}`")),
                },
                Expr::Lift { recv, .. } => match **recv {
                    Expr::Loc(_) => here(path, Rule::LiftS),
                    _ => Focus::Wrong(format!("lifted call on non-object `{recv}`")),
                },
                Expr::Field { recv, .. } | Expr::Assign { recv, .. } => match **recv {
                    Expr::Loc(_) if matches!(e, Expr::Field { .. }) => here(path, Rule::FAccess),
                    Expr::Loc(_) => here(path, Rule::FUpdate),
                    _ => Focus::Wrong(format!("field access on non-object `{recv}`")),
                },
                _ => unreachable!(),
            }
        }
        Expr::Head(inner) | Expr::Tail(inner) => {
            if !inner.is_value() {
                path.push(0);
                return focus_in(inner, path);
            }
            let is_head = matches!(e, Expr::Head(_));
            match (&**inner, is_head) {
                (Expr::Done { .. }, true) => here(path, Rule::Head),
                (Expr::Done { .. }, false) => here(path, Rule::Tail),
                (Expr::EmptySignal, true) => Focus::EmptyHead(std::mem::take(path)),
                (Expr::EmptySignal, false) => here(path, Rule::TailEmpty),
                (Expr::Label(s), _) => Focus::Blocked(*s),
                (other, _) => Focus::Wrong(format!(
                    "`{}` of non-signal `{other}`",
                    if is_head { "head" } else { "tail" }
                )),
            }
        }
        Expr::Let { init, .. } => {
            if !init.is_value() {
                path.push(0);
                return focus_in(init, path);
            }
            here(path, Rule::Let)
        }
        Expr::Cond { cond, .. } => {
            if !cond.is_value() {
                path.push(0);
                return focus_in(cond, path);
            }
            match **cond {
                Expr::Lit(Prim::Bool(_)) => here(path, Rule::Cond),
                _ => Focus::Wrong(format!("condition `{cond}` is not a Bool")),
            }
        }
        _ => unreachable!("values handled above"),
    }
}

pub fn at_path<'a>(e: &'a Expr, path: &[usize]) -> &'a Expr {
    path.iter().fold(e, |e, &i| e.children()[i])
}

pub fn at_path_mut<'a>(e: &'a mut Expr, path: &[usize]) -> &'a mut Expr {
    let mut cur = e;
    for &i in path {
        cur = cur.children_mut().swap_remove(i);
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_expression;

    fn f(src: &str) -> Focus {
        focus(&parse_expression(src).unwrap())
    }

    #[test]
    fn head_of_completed_signal() {
        let e = Expr::head(Expr::done(Expr::int(1), Expr::Label(Label(0))));
        assert_eq!(focus(&e), Focus::Redex(vec![], Rule::Head));
    }

    #[test]
    fn left_to_right() {
        assert_eq!(f("1 + 2"), Focus::Redex(vec![], Rule::Prim));
        assert_eq!(f("(1 + 2) + (3 + 4)"), Focus::Redex(vec![0], Rule::Prim));
        assert_eq!(f("new A(1, 2 + 3)"), Focus::Redex(vec![1], Rule::Prim));
        assert_eq!(f("head(@[1; @[]])"), Focus::Redex(vec![0], Rule::ExplicitS));
        assert_eq!(f("tail(@[])"), Focus::Redex(vec![], Rule::TailEmpty));
        assert_eq!(f("1 + head(@[])"), Focus::EmptyHead(vec![1]));
        assert_eq!(f("true ? 1 : 2"), Focus::Redex(vec![], Rule::Cond));
        assert_eq!(f("@[]"), Focus::Value);
        assert!(matches!(f("x"), Focus::Wrong(_)));
    }

    #[test]
    fn blocked_on_label() {
        let e = Expr::call(
            Expr::head(Expr::Label(Label(4))),
            "plus",
            vec![Expr::int(1)],
        );
        assert_eq!(focus(&e), Focus::Blocked(Label(4)));
    }

    #[test]
    fn path_navigation() {
        let mut e = parse_expression("(1 + 2) + 3").unwrap();
        let Focus::Redex(path, _) = focus(&e) else {
            panic!()
        };
        assert_eq!(at_path(&e, &path), &parse_expression("1 + 2").unwrap());
        *at_path_mut(&mut e, &path) = Expr::int(3);
        assert_eq!(e, parse_expression("3 + 3").unwrap());
    }
}
