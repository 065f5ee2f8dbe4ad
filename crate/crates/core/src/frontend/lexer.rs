//! Tokenizer for `.gl` sources. `--` starts a line comment.

use crate::diagnostics::Diagnostic;
use crate::lang::Span;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Tok {
    Ident(String),
    Int(i64),
    // keywords
    Sig,
    Assume,
    Def,
    Template,
    Measure,
    Let,
    In,
    If,
    Then,
    Else,
    Match,
    True,
    False,
    Not,
    // punctuation
    ColonColon,
    Colon,
    Arrow,
    FatArrow,
    Iff,
    Assign,
    EqEq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Slash,
    AndAnd,
    OrOr,
    Backslash,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Bar,
    Hole,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Sig => "sig",
            Tok::Assume => "assume",
            Tok::Def => "def",
            Tok::Template => "template",
            Tok::Measure => "measure",
            Tok::Let => "let",
            Tok::In => "in",
            Tok::If => "if",
            Tok::Then => "then",
            Tok::Else => "else",
            Tok::Match => "match",
            Tok::True => "true",
            Tok::False => "false",
            Tok::Not => "not",
            Tok::ColonColon => "::",
            Tok::Colon => ":",
            Tok::Arrow => "->",
            Tok::FatArrow => "=>",
            Tok::Iff => "<=>",
            Tok::Assign => "=",
            Tok::EqEq => "==",
            Tok::Ne => "/=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::AndAnd => "&&",
            Tok::OrOr => "||",
            Tok::Backslash => "\\",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Bar => "|",
            Tok::Hole => "?",
            Tok::Ident(_) | Tok::Int(_) | Tok::Eof => "",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

fn keyword(s: &str) -> Option<Tok> {
    Some(match s {
        "sig" => Tok::Sig,
        "assume" => Tok::Assume,
        "def" => Tok::Def,
        "template" => Tok::Template,
        "measure" => Tok::Measure,
        "let" => Tok::Let,
        "in" => Tok::In,
        "if" => Tok::If,
        "then" => Tok::Then,
        "else" => Tok::Else,
        "match" => Tok::Match,
        "true" => Tok::True,
        "false" => Tok::False,
        "not" => Tok::Not,
        _ => return None,
    })
}

// Longest match first.
const PUNCT: &[(&str, Tok)] = &[
    ("<=>", Tok::Iff),
    ("::", Tok::ColonColon),
    ("->", Tok::Arrow),
    ("=>", Tok::FatArrow),
    ("==", Tok::EqEq),
    ("/=", Tok::Ne),
    ("!=", Tok::Ne),
    ("<=", Tok::Le),
    (">=", Tok::Ge),
    ("&&", Tok::AndAnd),
    ("||", Tok::OrOr),
    ("??", Tok::Hole),
    (":", Tok::Colon),
    ("=", Tok::Assign),
    ("<", Tok::Lt),
    (">", Tok::Gt),
    ("+", Tok::Plus),
    ("-", Tok::Minus),
    ("*", Tok::Star),
    ("/", Tok::Slash),
    ("\\", Tok::Backslash),
    ("(", Tok::LParen),
    (")", Tok::RParen),
    ("{", Tok::LBrace),
    ("}", Tok::RBrace),
    ("[", Tok::LBracket),
    ("]", Tok::RBracket),
    (",", Tok::Comma),
    (";", Tok::Semi),
    ("|", Tok::Bar),
    ("?", Tok::Hole),
];

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
    line: u32,
    col: u32,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn mark(&self) -> (usize, u32, u32) {
        (self.pos, self.line, self.col)
    }

    fn span_from(&self, m: (usize, u32, u32)) -> Span {
        Span { start: m.0, end: self.pos, start_line: m.1, start_col: m.2, end_line: self.line, end_col: self.col }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

pub fn lex(text: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut cur = Cursor { text, pos: 0, line: 1, col: 1 };
    let mut out = Vec::new();
    loop {
        // skip whitespace and comments
        loop {
            match cur.peek() {
                Some(c) if c.is_whitespace() => {
                    cur.bump();
                }
                Some('-') if cur.text[cur.pos..].starts_with("--") => {
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
        let m = cur.mark();
        let Some(c) = cur.peek() else {
            out.push(Token { tok: Tok::Eof, span: cur.span_from(m) });
            return Ok(out);
        };
        let tok = if is_ident_start(c) {
            while cur.peek().is_some_and(is_ident_char) {
                cur.bump();
            }
            let s = &text[m.0..cur.pos];
            keyword(s).unwrap_or_else(|| Tok::Ident(s.to_string()))
        } else if c.is_ascii_digit() {
            while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
                cur.bump();
            }
            let s = &text[m.0..cur.pos];
            let n = s
                .parse::<i64>()
                .map_err(|_| Diagnostic::error(cur.span_from(m), format!("integer literal `{s}` is too large")))?;
            Tok::Int(n)
        } else {
            let rest = &text[cur.pos..];
            let Some((p, t)) = PUNCT.iter().find(|(p, _)| rest.starts_with(p)) else {
                cur.bump();
                return Err(Diagnostic::error(cur.span_from(m), format!("unexpected character `{c}`")));
            };
            for _ in p.chars() {
                cur.bump();
            }
            t.clone()
        };
        out.push(Token { tok, span: cur.span_from(m) });
    }
}
