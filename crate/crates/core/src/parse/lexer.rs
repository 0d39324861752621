use crate::diag::Diagnostic;
use crate::syntax::Span;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Float(f64),
    Str(String),
    // keywords
    Class,
    Interface,
    Implements,
    Extends,
    Method,
    Capability,
    Return,
    New,
    Head,
    Tail,
    Main,
    Mut,
    Imm,
    Read,
    Capsule,
    This,
    True,
    False,
    // punctuation
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Dot,
    At,
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    AndAnd,
    OrOr,
    Bang,
    Question,
    Colon,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(i) => format!("integer `{i}`"),
            Tok::Float(x) => format!("float `{x:?}`"),
            Tok::Str(_) => "string literal".to_string(),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Class => "class",
            Tok::Interface => "interface",
            Tok::Implements => "implements",
            Tok::Extends => "extends",
            Tok::Method => "method",
            Tok::Capability => "capability",
            Tok::Return => "return",
            Tok::New => "new",
            Tok::Head => "head",
            Tok::Tail => "tail",
            Tok::Main => "main",
            Tok::Mut => "mut",
            Tok::Imm => "imm",
            Tok::Read => "read",
            Tok::Capsule => "capsule",
            Tok::This => "this",
            Tok::True => "true",
            Tok::False => "false",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Semi => ";",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::At => "@",
            Tok::Assign => "=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Percent => "%",
            Tok::EqEq => "==",
            Tok::NotEq => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::AndAnd => "&&",
            Tok::OrOr => "||",
            Tok::Bang => "!",
            Tok::Question => "?",
            Tok::Colon => ":",
            Tok::Ident(_) | Tok::Int(_) | Tok::Float(_) | Tok::Str(_) | Tok::Eof => "",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

fn keyword(word: &str) -> Option<Tok> {
    Some(match word {
        "class" => Tok::Class,
        "interface" => Tok::Interface,
        "implements" => Tok::Implements,
        "extends" => Tok::Extends,
        "method" => Tok::Method,
        "capability" => Tok::Capability,
        "return" => Tok::Return,
        "new" => Tok::New,
        "head" => Tok::Head,
        "tail" => Tok::Tail,
        "main" => Tok::Main,
        "mut" => Tok::Mut,
        "imm" => Tok::Imm,
        "read" => Tok::Read,
        "capsule" => Tok::Capsule,
        "this" => Tok::This,
        "true" => Tok::True,
        "false" => Tok::False,
        _ => return None,
    })
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    src: &'a str,
    line: u32,
    col: u32,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next().map(|(_, c)| c)
    }

    fn offset(&mut self) -> usize {
        self.chars.peek().map(|&(i, _)| i).unwrap_or(self.src.len())
    }

    fn bump(&mut self) -> Option<char> {
        let (_, c) = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }
}

/// Splits source text into tokens. Lexical errors are reported and the
/// offending character skipped, so lexing always reaches the end.
pub fn lex(src: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut cur = Cursor {
        chars: src.char_indices().peekable(),
        src,
        line: 1,
        col: 1,
    };
    let mut tokens = Vec::new();
    let mut diags = Vec::new();

    loop {
        // whitespace and `//` comments
        loop {
            match cur.peek() {
                Some(c) if c.is_whitespace() => {
                    cur.bump();
                }
                Some('/') if cur.peek2() == Some('/') => {
                    while let Some(c) = cur.peek() {
                        if c == '\n' {
                            break;
                        }
                        cur.bump();
                    }
                }
                _ => break,
            }
        }
        let (line, col) = (cur.line, cur.col);
        let start = cur.offset();
        let Some(c) = cur.bump() else {
            tokens.push(Token {
                tok: Tok::Eof,
                span: Span::new(line, col, 0),
            });
            break;
        };
        let tok = match c {
            c if c.is_ascii_alphabetic() || c == '_' => {
                while matches!(cur.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
                    cur.bump();
                }
                let word = &src[start..cur.offset()];
                keyword(word).unwrap_or_else(|| Tok::Ident(word.to_string()))
            }
            c if c.is_ascii_digit() => lex_number(&mut cur, start, line, col, &mut diags),
            '"' => {
                let mut s = String::new();
                let mut closed = false;
                while let Some(c) = cur.bump() {
                    match c {
                        '"' => {
                            closed = true;
                            break;
                        }
                        '\\' => match cur.bump() {
                            Some('n') => s.push('\n'),
                            Some('t') => s.push('\t'),
                            Some('"') => s.push('"'),
                            Some('\\') => s.push('\\'),
                            other => {
                                diags.push(Diagnostic::error(
                                    "lexical",
                                    Span::new(cur.line, cur.col.saturating_sub(2), 2),
                                    format!("unknown escape sequence `\\{}`", other.unwrap_or(' ')),
                                ));
                            }
                        },
                        '\n' => break,
                        c => s.push(c),
                    }
                }
                if !closed {
                    diags.push(Diagnostic::error(
                        "lexical",
                        Span::new(line, col, 1),
                        "unterminated string literal",
                    ));
                }
                Tok::Str(s)
            }
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ';' => Tok::Semi,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            '@' => Tok::At,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '%' => Tok::Percent,
            '?' => Tok::Question,
            ':' => Tok::Colon,
            '=' | '!' | '<' | '>' if cur.peek() == Some('=') => {
                cur.bump();
                match c {
                    '=' => Tok::EqEq,
                    '!' => Tok::NotEq,
                    '<' => Tok::Le,
                    _ => Tok::Ge,
                }
            }
            '=' => Tok::Assign,
            '!' => Tok::Bang,
            '<' => Tok::Lt,
            '>' => Tok::Gt,
            '&' if cur.peek() == Some('&') => {
                cur.bump();
                Tok::AndAnd
            }
            '|' if cur.peek() == Some('|') => {
                cur.bump();
                Tok::OrOr
            }
            other => {
                diags.push(Diagnostic::error(
                    "lexical",
                    Span::new(line, col, 1),
                    format!("unexpected character `{other}`"),
                ));
                continue;
            }
        };
        let len = (cur.offset() - start) as u32;
        tokens.push(Token {
            tok,
            span: Span::new(line, col, len),
        });
    }
    (tokens, diags)
}

fn lex_number(
    cur: &mut Cursor<'_>,
    start: usize,
    line: u32,
    col: u32,
    diags: &mut Vec<Diagnostic>,
) -> Tok {
    let mut is_float = false;
    while matches!(cur.peek(), Some(c) if c.is_ascii_digit()) {
        cur.bump();
    }
    // `1.5` is a float, `1.foo()` is a call on an integer
    if cur.peek() == Some('.') && matches!(cur.peek2(), Some(c) if c.is_ascii_digit()) {
        is_float = true;
        cur.bump();
        while matches!(cur.peek(), Some(c) if c.is_ascii_digit()) {
            cur.bump();
        }
    }
    if matches!(cur.peek(), Some('e' | 'E')) {
        let mut look = cur.chars.clone();
        look.next();
        let mut next = look.next().map(|(_, c)| c);
        if matches!(next, Some('+' | '-')) {
            next = look.next().map(|(_, c)| c);
        }
        if matches!(next, Some(c) if c.is_ascii_digit()) {
            is_float = true;
            cur.bump();
            if matches!(cur.peek(), Some('+' | '-')) {
                cur.bump();
            }
            while matches!(cur.peek(), Some(c) if c.is_ascii_digit()) {
                cur.bump();
            }
        }
    }
    let text = &cur.src[start..cur.offset()];
    let len = text.len() as u32;
    if is_float {
        Tok::Float(text.parse().unwrap_or(0.0))
    } else {
        match text.parse() {
            Ok(i) => Tok::Int(i),
            Err(_) => {
                diags.push(Diagnostic::error(
                    "lexical",
                    Span::new(line, col, len),
                    format!("integer literal `{text}` out of range"),
                ));
                Tok::Int(0)
            }
        }
    }
}
