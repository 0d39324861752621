//! Recursive-descent parser from `.frj` text to [`Program`]s.
//!
//! Binary and unary operators are desugared to method calls on their left
//! operand (`a + b` is `a.plus(b)`); `c ? a : b` stays a conditional node so
//! only the selected branch runs. Errors resynchronise at statement and
//! declaration boundaries so one pass reports several problems.

mod lexer;

use crate::diag::{self, Diagnostic};
use crate::syntax::*;
use lexer::{lex, Tok, Token};

/// Parses a complete program: class table followed by an optional `main`.
pub fn parse_program(src: &str) -> Result<Program, Vec<Diagnostic>> {
    let (tokens, mut diags) = lex(src);
    let mut p = Parser::new(tokens);
    let program = p.program();
    diags.append(&mut p.diags);
    if diags.is_empty() {
        Ok(program)
    } else {
        diag::sort(&mut diags);
        Err(diags)
    }
}

/// Parses a single source-level expression.
pub fn parse_expression(src: &str) -> Result<Expr, Diagnostic> {
    let (tokens, mut diags) = lex(src);
    if !diags.is_empty() {
        return Err(diags.remove(0));
    }
    let mut p = Parser::new(tokens);
    let result = p.expr().and_then(|e| {
        p.expect(Tok::Eof, "end of expression")?;
        Ok(e)
    });
    match result {
        Ok(e) => Ok(e),
        Err(()) => Err(p.diags.remove(0)),
    }
}

/// Parses a single type such as `@imm Int` or `mut Person`.
pub fn parse_type(src: &str) -> Result<Type, Diagnostic> {
    let (tokens, mut diags) = lex(src);
    if !diags.is_empty() {
        return Err(diags.remove(0));
    }
    let mut p = Parser::new(tokens);
    match p
        .ty()
        .and_then(|t| p.expect(Tok::Eof, "end of type").map(|_| t))
    {
        Ok(t) => Ok(t),
        Err(()) => Err(p.diags.remove(0)),
    }
}

type PResult<T> = Result<T, ()>;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    depth: i32,
    diags: Vec<Diagnostic>,
}

fn binary_method(t: &Tok) -> Option<&'static str> {
    Some(match t {
        Tok::Plus => "plus",
        Tok::Minus => "minus",
        Tok::Star => "times",
        Tok::Slash => "div",
        Tok::Percent => "rem",
        Tok::Lt => "lt",
        Tok::Le => "leq",
        Tok::Gt => "gt",
        Tok::Ge => "geq",
        Tok::EqEq => "eq",
        Tok::NotEq => "neq",
        Tok::AndAnd => "and",
        Tok::OrOr => "or",
        _ => return None,
    })
}

impl Parser {
    fn new(tokens: Vec<Token>) -> Parser {
        Parser {
            tokens,
            pos: 0,
            depth: 0,
            diags: Vec::new(),
        }
    }

    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        match t.tok {
            Tok::LBrace => self.depth += 1,
            Tok::RBrace => self.depth -= 1,
            Tok::Eof => return t,
            _ => {}
        }
        self.pos += 1;
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error<T>(&mut self, msg: impl Into<String>) -> PResult<T> {
        let span = self.span();
        self.diags.push(Diagnostic::error("syntax", span, msg));
        Err(())
    }

    fn expect(&mut self, t: Tok, what: &str) -> PResult<Span> {
        if *self.peek() == t {
            Ok(self.bump().span)
        } else {
            let found = self.peek().describe();
            self.error(format!("expected {what}, found {found}"))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<Name> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(name(&s))
            }
            other => self.error(format!("expected {what}, found {}", other.describe())),
        }
    }

    /// Skips to the end of the current statement: past a `;` or up to a
    /// `}` closing the enclosing block.
    fn recover_stmt(&mut self, depth: i32) {
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::Semi if self.depth == depth => {
                    self.bump();
                    return;
                }
                Tok::RBrace if self.depth == depth => return,
                _ => {
                    self.bump();
                }
            }
            if self.depth < depth {
                return;
            }
        }
    }

    /// Skips to the next top-level declaration keyword.
    fn recover_decl(&mut self) {
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::Class | Tok::Interface | Tok::Capability | Tok::Main if self.depth <= 0 => {
                    self.depth = 0;
                    return;
                }
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn program(&mut self) -> Program {
        let mut decls = Vec::new();
        let mut main = None;
        let mut main_span = Span::default();
        loop {
            match self.peek() {
                Tok::Eof => break,
                Tok::Class | Tok::Capability => match self.class() {
                    Ok(c) => decls.push(Decl::Class(c)),
                    Err(()) => self.recover_decl(),
                },
                Tok::Interface => match self.interface() {
                    Ok(i) => decls.push(Decl::Interface(i)),
                    Err(()) => self.recover_decl(),
                },
                Tok::Main => {
                    main_span = self.bump().span;
                    if main.is_some() {
                        self.diags.push(Diagnostic::error(
                            "syntax",
                            main_span,
                            "duplicate main block",
                        ));
                    }
                    match self.main_body() {
                        Ok(b) => main = Some(b),
                        Err(()) => self.recover_decl(),
                    }
                }
                other => {
                    let msg = format!(
                        "expected `class`, `interface` or `main`, found {}",
                        other.describe()
                    );
                    let _ = self.error::<()>(msg);
                    self.bump();
                    self.recover_decl();
                }
            }
        }
        Program {
            decls,
            main,
            main_span,
        }
    }

    fn name_list(&mut self, keyword: &str) -> PResult<Vec<Name>> {
        let mut out = vec![self.ident(&format!("a name after `{keyword}`"))?];
        while self.eat(&Tok::Comma) {
            out.push(self.ident("a name")?);
        }
        Ok(out)
    }

    fn class(&mut self) -> PResult<ClassDecl> {
        let span = self.span();
        let capability = self.eat(&Tok::Capability);
        self.expect(Tok::Class, "`class`")?;
        let cname = self.ident("a class name")?;
        let implements = if self.eat(&Tok::Implements) {
            self.name_list("implements")?
        } else {
            Vec::new()
        };
        self.expect(Tok::LBrace, "`{`")?;
        let depth = self.depth;
        let mut fields = Vec::new();
        let mut ctor = None;
        let mut methods = Vec::new();
        while !matches!(self.peek(), Tok::RBrace | Tok::Eof) {
            let member = match (self.peek().clone(), self.peek_at(1).clone()) {
                (Tok::Ident(n), Tok::LParen) => {
                    if *n != *cname {
                        self.error(format!("constructor `{n}` does not match class `{cname}`"))
                    } else {
                        self.constructor().map(|c| {
                            if ctor.is_some() {
                                self.diags.push(Diagnostic::error(
                                    "syntax",
                                    c.span,
                                    "duplicate constructor",
                                ));
                            }
                            ctor = Some(c);
                        })
                    }
                }
                (Tok::Method, _)
                | (Tok::Mut | Tok::Imm | Tok::Read | Tok::Capsule, Tok::Method) => {
                    self.method().map(|m| methods.push(m))
                }
                _ => self.field().map(|f| fields.push(f)),
            };
            if member.is_err() {
                self.recover_stmt(depth);
                if self.depth < depth {
                    return Err(());
                }
            }
        }
        self.expect(Tok::RBrace, "`}`")?;
        Ok(ClassDecl {
            capability,
            name: cname,
            implements,
            fields,
            ctor,
            methods,
            origin: ClassOrigin::User,
            span,
        })
    }

    fn field(&mut self) -> PResult<FieldDecl> {
        let span = self.span();
        let ty = self.ty()?;
        let fname = self.ident("a field name")?;
        self.expect(Tok::Semi, "`;` after field")?;
        Ok(FieldDecl {
            ty,
            name: fname,
            span,
        })
    }

    fn constructor(&mut self) -> PResult<Constructor> {
        let span = self.span();
        self.bump();
        let params = self.params()?;
        self.expect(Tok::LBrace, "`{`")?;
        for (i, p) in params.iter().enumerate() {
            let ok = self.eat(&Tok::This)
                && self.eat(&Tok::Dot)
                && matches!(self.peek(), Tok::Ident(f) if **f == *p.name)
                && {
                    self.bump();
                    self.eat(&Tok::Assign)
                }
                && matches!(self.peek(), Tok::Ident(x) if **x == *p.name)
                && {
                    self.bump();
                    self.eat(&Tok::Semi)
                };
            if !ok {
                return self.error(format!(
                    "constructor body must assign `this.{0} = {0};` as statement {1}",
                    p.name,
                    i + 1
                ));
            }
        }
        self.expect(Tok::RBrace, "`}` closing the constructor")?;
        Ok(Constructor { params, span })
    }

    fn params(&mut self) -> PResult<Vec<Param>> {
        self.expect(Tok::LParen, "`(`")?;
        let mut params = Vec::new();
        if !self.eat(&Tok::RParen) {
            loop {
                let ty = self.ty()?;
                // `this` is accepted here so well-formedness can report it.
                let pname = if self.eat(&Tok::This) {
                    name("this")
                } else {
                    self.ident("a parameter name")?
                };
                params.push(Param { ty, name: pname });
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(Tok::Comma, "`,` or `)`")?;
            }
        }
        Ok(params)
    }

    fn modifier(&mut self) -> Option<Modifier> {
        let m = match self.peek() {
            Tok::Mut => Modifier::Mut,
            Tok::Imm => Modifier::Imm,
            Tok::Read => Modifier::Read,
            Tok::Capsule => Modifier::Capsule,
            _ => return None,
        };
        self.bump();
        Some(m)
    }

    fn header(&mut self) -> PResult<MethodHeader> {
        let span = self.span();
        let receiver = self.modifier().unwrap_or(Modifier::Imm);
        self.expect(Tok::Method, "`method`")?;
        let ret = self.ty()?;
        let mname = self.ident("a method name")?;
        let params = self.params()?;
        Ok(MethodHeader {
            receiver,
            ret,
            name: mname,
            params,
            span,
        })
    }

    fn method(&mut self) -> PResult<MethodDecl> {
        let header = self.header()?;
        self.expect(Tok::LBrace, "`{`")?;
        let body = self.block(true)?;
        Ok(MethodDecl {
            header,
            body: MethodBody::Source(body),
        })
    }

    fn interface(&mut self) -> PResult<InterfaceDecl> {
        let span = self.bump().span;
        let iname = self.ident("an interface name")?;
        let extends = if self.eat(&Tok::Extends) {
            self.name_list("extends")?
        } else {
            Vec::new()
        };
        self.expect(Tok::LBrace, "`{`")?;
        let depth = self.depth;
        let mut headers = Vec::new();
        while !matches!(self.peek(), Tok::RBrace | Tok::Eof) {
            match self
                .header()
                .and_then(|h| self.expect(Tok::Semi, "`;` after method header").map(|_| h))
            {
                Ok(h) => headers.push(h),
                Err(()) => {
                    self.recover_stmt(depth);
                    if self.depth < depth {
                        return Err(());
                    }
                }
            }
        }
        self.expect(Tok::RBrace, "`}`")?;
        Ok(InterfaceDecl {
            name: iname,
            extends,
            headers,
            span,
        })
    }

    fn main_body(&mut self) -> PResult<Body> {
        self.expect(Tok::LBrace, "`{` after main")?;
        self.block(false)
    }

    fn ty(&mut self) -> PResult<Type> {
        if self.eat(&Tok::At) {
            return Ok(self.ty()?.signal_of(1));
        }
        let modifier = self.modifier().unwrap_or(Modifier::Imm);
        let class = self.ident("a class name")?;
        Ok(Type {
            depth: 0,
            modifier,
            class,
        })
    }

    /// Does the upcoming statement start with a type (a local declaration)?
    fn at_local_decl(&self) -> bool {
        match self.peek() {
            Tok::At => *self.peek_at(1) != Tok::LBracket,
            Tok::Mut | Tok::Imm | Tok::Read | Tok::Capsule => true,
            Tok::Ident(_) => matches!(self.peek_at(1), Tok::Ident(_)),
            _ => false,
        }
    }

    /// Parses statements up to and including the closing `}`. Method
    /// bodies must end in `return e;`; main may end with a bare expression,
    /// or with an expression statement whose value is the result.
    fn block(&mut self, is_method: bool) -> PResult<Body> {
        let depth = self.depth;
        let mut stmts: Vec<Stmt> = Vec::new();
        let mut result: Option<(Expr, Span)> = None;
        let mut failed = false;
        while !matches!(self.peek(), Tok::RBrace | Tok::Eof) {
            if let Some((_, span)) = &result {
                let span = *span;
                self.diags.push(Diagnostic::error(
                    "syntax",
                    span,
                    "the result expression must come last",
                ));
                failed = true;
                result = None;
            }
            let span = self.span();
            let outcome = if self.eat(&Tok::Return) {
                self.expr().and_then(|e| {
                    self.expect(Tok::Semi, "`;` after return")?;
                    result = Some((e, span));
                    Ok(())
                })
            } else if self.at_local_decl() {
                (|| {
                    let ty = self.ty()?;
                    let x = self.ident("a variable name")?;
                    self.expect(Tok::Assign, "`=` in local declaration")?;
                    let init = self.expr()?;
                    self.expect(Tok::Semi, "`;` after declaration")?;
                    stmts.push(Stmt {
                        kind: StmtKind::Local { ty, name: x, init },
                        span,
                    });
                    Ok(())
                })()
            } else {
                self.expr().and_then(|e| {
                    if self.eat(&Tok::Semi) {
                        stmts.push(Stmt {
                            kind: StmtKind::Expr(e),
                            span,
                        });
                        Ok(())
                    } else if !is_method && *self.peek() == Tok::RBrace {
                        result = Some((e, span));
                        Ok(())
                    } else {
                        let found = self.peek().describe();
                        self.error(format!("expected `;`, found {found}"))
                    }
                })
            };
            if outcome.is_err() {
                failed = true;
                self.recover_stmt(depth);
            }
        }
        let close = self.span();
        self.expect(Tok::RBrace, "`}`")?;
        if failed {
            return Err(());
        }
        let (result, result_span) = match result {
            Some(r) => r,
            None if !is_method
                && matches!(
                    stmts.last(),
                    Some(Stmt {
                        kind: StmtKind::Expr(_),
                        ..
                    })
                ) =>
            {
                let last = stmts.pop().unwrap();
                let StmtKind::Expr(e) = last.kind else {
                    unreachable!()
                };
                (e, last.span)
            }
            None => {
                let msg = if is_method {
                    "method body must end with `return e;`"
                } else {
                    "main block must end with an expression"
                };
                self.diags.push(Diagnostic::error("syntax", close, msg));
                return Err(());
            }
        };
        Ok(Body {
            stmts,
            result,
            result_span,
        })
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        let lhs = self.ternary()?;
        if *self.peek() == Tok::Assign {
            let span = self.span();
            self.bump();
            let value = self.expr()?;
            return match lhs {
                Expr::Field { recv, field } => Ok(Expr::Assign {
                    recv,
                    field,
                    value: Box::new(value),
                }),
                _ => {
                    self.diags.push(Diagnostic::error(
                        "syntax",
                        span,
                        "only a field `e.f` can be assigned",
                    ));
                    Err(())
                }
            };
        }
        Ok(lhs)
    }

    fn ternary(&mut self) -> PResult<Expr> {
        let cond = self.binary(0)?;
        if self.eat(&Tok::Question) {
            let then = self.expr()?;
            self.expect(Tok::Colon, "`:` in conditional")?;
            let els = self.ternary()?;
            return Ok(Expr::Cond {
                cond: Box::new(cond),
                then: Box::new(then),
                els: Box::new(els),
            });
        }
        Ok(cond)
    }

    fn binary(&mut self, level: usize) -> PResult<Expr> {
        const LEVELS: [&[Tok]; 6] = [
            &[Tok::OrOr],
            &[Tok::AndAnd],
            &[Tok::EqEq, Tok::NotEq],
            &[Tok::Lt, Tok::Le, Tok::Gt, Tok::Ge],
            &[Tok::Plus, Tok::Minus],
            &[Tok::Star, Tok::Slash, Tok::Percent],
        ];
        if level == LEVELS.len() {
            return self.unary();
        }
        let mut lhs = self.binary(level + 1)?;
        while LEVELS[level].contains(self.peek()) {
            let op = binary_method(&self.bump().tok).expect("operator");
            let rhs = self.binary(level + 1)?;
            lhs = Expr::call(lhs, op, vec![rhs]);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat(&Tok::Minus) {
            return Ok(match self.unary()? {
                Expr::Lit(Prim::Int(i)) => Expr::Lit(Prim::Int(i.wrapping_neg())),
                Expr::Lit(Prim::Float(x)) => Expr::Lit(Prim::Float(-x)),
                e => Expr::call(e, "neg", vec![]),
            });
        }
        if self.eat(&Tok::Bang) {
            let e = self.unary()?;
            return Ok(Expr::call(e, "not", vec![]));
        }
        self.postfix()
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        self.expect(Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        if self.eat(&Tok::RParen) {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if self.eat(&Tok::RParen) {
                return Ok(args);
            }
            self.expect(Tok::Comma, "`,` or `)`")?;
        }
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        while self.eat(&Tok::Dot) {
            if self.eat(&Tok::At) {
                let m = self.ident("a method name after `.@`")?;
                let args = self.args()?;
                e = Expr::Lift {
                    recv: Box::new(e),
                    method: m,
                    args,
                };
            } else {
                let m = self.ident("a field or method name")?;
                if *self.peek() == Tok::LParen {
                    let args = self.args()?;
                    e = Expr::Call {
                        recv: Box::new(e),
                        method: m,
                        args,
                    };
                } else {
                    e = Expr::Field {
                        recv: Box::new(e),
                        field: m,
                    };
                }
            }
        }
        Ok(e)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let tok = self.peek().clone();
        match tok {
            Tok::Ident(x) => {
                self.bump();
                Ok(Expr::Var(name(&x)))
            }
            Tok::This => {
                self.bump();
                Ok(Expr::var("this"))
            }
            Tok::Int(i) => {
                self.bump();
                Ok(Expr::int(i))
            }
            Tok::Float(x) => {
                self.bump();
                Ok(Expr::float(x))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Expr::string(&s))
            }
            Tok::True | Tok::False => {
                self.bump();
                Ok(Expr::boolean(tok == Tok::True))
            }
            Tok::New => {
                self.bump();
                let class = self.ident("a class name after `new`")?;
                let args = self.args()?;
                Ok(Expr::New { class, args })
            }
            Tok::At => {
                self.bump();
                self.expect(Tok::LBracket, "`[` after `@`")?;
                if self.eat(&Tok::RBracket) {
                    return Ok(Expr::EmptySignal);
                }
                let head = self.expr()?;
                self.expect(Tok::Semi, "`;` between signal head and tail")?;
                let tail = self.expr()?;
                self.expect(Tok::RBracket, "`]` closing the signal")?;
                Ok(Expr::signal(head, tail))
            }
            Tok::Head | Tok::Tail => {
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(if tok == Tok::Head {
                    Expr::head(e)
                } else {
                    Expr::tail(e)
                })
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            other => self.error(format!(
                "expected an expression, found {}",
                other.describe()
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_implements_list_is_rejected() {
        let errs = parse_program("class A implements  { A(){} }").unwrap_err();
        assert!(!errs.is_empty());
        assert_eq!(errs[0].code, "syntax");
        assert_eq!(errs[0].span.line, 1);
    }

    #[test]
    fn person_listing() {
        let src = r#"
class Person {
  method Int age() {return 24;} method Str name() {return "Bob";}
  method Str format(Str name,Int age) { return name+":"+age; }}
"#;
        let p = parse_program(src).unwrap();
        assert_eq!(p.decls.len(), 1);
        let Decl::Class(c) = &p.decls[0] else {
            panic!()
        };
        assert_eq!(c.methods.len(), 3);
        assert!(p.main.is_none());
        let MethodBody::Source(b) = &c.methods[2].body else {
            panic!()
        };
        assert_eq!(
            b.result,
            Expr::call(
                Expr::call(Expr::var("name"), "plus", vec![Expr::string(":")]),
                "plus",
                vec![Expr::var("age")]
            )
        );
    }

    #[test]
    fn main_with_empty_signal() {
        let p = parse_program("main { @[] }").unwrap();
        assert!(p.decls.is_empty());
        assert_eq!(p.main.unwrap().result, Expr::EmptySignal);
    }

    #[test]
    fn expression_examples() {
        assert_eq!(
            parse_expression("head(tail(x))").unwrap(),
            Expr::head(Expr::tail(Expr::var("x")))
        );
        assert_eq!(
            parse_expression("p.@format(p.@name(), ages)").unwrap(),
            Expr::lift(
                Expr::var("p"),
                "format",
                vec![
                    Expr::lift(Expr::var("p"), "name", vec![]),
                    Expr::var("ages")
                ]
            )
        );
        assert_eq!(
            parse_expression("@[p.age(); @[]]").unwrap(),
            Expr::signal(Expr::call(Expr::var("p"), "age", vec![]), Expr::EmptySignal)
        );
    }

    #[test]
    fn operators_desugar_with_precedence() {
        let e = parse_expression("0.81 * temp + 0.01 * hum").unwrap();
        assert_eq!(
            e,
            Expr::call(
                Expr::call(Expr::float(0.81), "times", vec![Expr::var("temp")]),
                "plus",
                vec![Expr::call(
                    Expr::float(0.01),
                    "times",
                    vec![Expr::var("hum")]
                )]
            )
        );
        let e = parse_expression("this.isOn?-0.5:0.5").unwrap();
        assert_eq!(
            e,
            Expr::Cond {
                cond: Box::new(Expr::field(Expr::var("this"), "isOn")),
                then: Box::new(Expr::float(-0.5)),
                els: Box::new(Expr::float(0.5)),
            }
        );
        let e = parse_expression("this.isOn=d>=(75.0+this.hysteresis())").unwrap();
        assert!(matches!(e, Expr::Assign { .. }));
    }

    #[test]
    fn assignment_target_must_be_a_field() {
        let err = parse_expression("x = 3").unwrap_err();
        assert!(err.message.contains("field"));
    }

    #[test]
    fn multiple_errors_are_reported() {
        let src = "main { Int x = ; Int y = 3 +; x }";
        let errs = parse_program(src).unwrap_err();
        assert_eq!(errs.len(), 2, "{errs:?}");
    }

    #[test]
    fn lexical_errors_have_spans() {
        let errs = parse_program("main {\n  #\n 1 }").unwrap_err();
        assert_eq!(errs[0].code, "lexical");
        assert_eq!((errs[0].span.line, errs[0].span.col), (2, 3));
    }

    #[test]
    fn constructor_shape_is_fixed() {
        let src = "class A { Int x; A(Int x) { this.x = 3; } }";
        assert!(parse_program(src).is_err());
        let src = "class A { Int x; A(Int x) { this.x = x; } }";
        assert!(parse_program(src).is_ok());
    }

    #[test]
    fn signal_types_and_default_modifier() {
        assert_eq!(parse_type("@@Int").unwrap(), Type::imm("Int").signal_of(2));
        assert_eq!(
            parse_type("capsule Box").unwrap(),
            Type::new(Modifier::Capsule, name("Box"))
        );
    }

    #[test]
    fn method_body_requires_return() {
        assert!(parse_program("class A { method Int m() { 3; } }").is_err());
    }
}
