//! Recursive-descent parser for programs, refinement types and predicates.

use crate::diagnostics::Diagnostic;
use crate::lang::{ArithOp, Measure, Name, Pred, Prim, Rel, Sort, Span};

use super::lexer::{lex, Tok, Token};
use super::surface::*;

/// Placeholder variable the predicate parser uses for `?`.
pub(crate) const HOLE_MARK: &str = "?";

pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    pub fn new(text: &str) -> PResult<Self> {
        Ok(Parser { toks: lex(text)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
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

    fn expect(&mut self, t: &Tok, what: &str) -> PResult<Span> {
        if self.peek() == t {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(what))
        }
    }

    fn unexpected(&self, what: &str) -> Diagnostic {
        Diagnostic::error(self.span(), format!("expected {what}, found {}", self.peek().describe()))
    }

    fn ident(&mut self, what: &str) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let sp = self.bump().span;
                Ok((s, sp))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub fn expect_eof(&self) -> PResult<()> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }

    // ---- programs -------------------------------------------------------

    pub fn program(&mut self) -> PResult<SourceProgram> {
        let mut items = Vec::new();
        while !self.at_eof() {
            items.push(self.item()?);
        }
        Ok(SourceProgram { items })
    }

    fn item(&mut self) -> PResult<Item> {
        let start = self.span();
        let kind_tok = self.bump().tok;
        let (kind, name_span) = match kind_tok {
            Tok::Sig | Tok::Assume => {
                let (name, ns) = self.ident("a function name")?;
                self.expect(&Tok::ColonColon, "`::`")?;
                let ty = self.rtype()?;
                if kind_tok == Tok::Sig {
                    (ItemKind::Sig { name, ty }, ns)
                } else {
                    (ItemKind::Assume { name, ty }, ns)
                }
            }
            Tok::Def => {
                let (name, ns) = self.ident("a function name")?;
                let mut params = Vec::new();
                while let Tok::Ident(_) = self.peek() {
                    params.push(self.ident("a parameter")?);
                }
                self.expect(&Tok::Assign, "`=`")?;
                let body = self.expr()?;
                (ItemKind::Def { name, params, body }, ns)
            }
            Tok::Template => {
                let mut binders = Vec::new();
                while self.eat(&Tok::LParen) {
                    let (x, _) = self.ident("a template variable")?;
                    self.expect(&Tok::Colon, "`:`")?;
                    let s = self.sort()?;
                    self.expect(&Tok::RParen, "`)`")?;
                    binders.push((x, s));
                }
                if binders.is_empty() {
                    return Err(self.unexpected("`(v : Sort)`"));
                }
                self.expect(&Tok::FatArrow, "`=>`")?;
                let pred = self.pred()?;
                let binder = binders.remove(0);
                (ItemKind::Template { binder, slots: binders, pred }, start)
            }
            Tok::Measure => {
                let (name, ns) = self.ident("a measure name")?;
                self.expect(&Tok::Colon, "`:`")?;
                let a = self.sort()?;
                self.expect(&Tok::Arrow, "`->`")?;
                let r = self.sort()?;
                if a != Sort::List || r != Sort::Int {
                    return Err(Diagnostic::error(ns, "measures must have sort `List Int -> Int`"));
                }
                (ItemKind::Measure { name }, ns)
            }
            other => {
                return Err(Diagnostic::error(
                    start,
                    format!("expected `sig`, `assume`, `def`, `template` or `measure`, found {}", other.describe()),
                ))
            }
        };
        Ok(Item { span: start.join(self.prev_span()), name_span, kind })
    }

    // ---- types ----------------------------------------------------------

    fn sort(&mut self) -> PResult<Sort> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "Int" => {
                self.bump();
                Ok(Sort::Int)
            }
            Tok::Ident(s) if s == "Bool" => {
                self.bump();
                Ok(Sort::Bool)
            }
            Tok::Ident(s) if s == "List" => {
                self.bump();
                match self.peek().clone() {
                    Tok::Ident(s) if s == "Int" => {
                        self.bump();
                        Ok(Sort::List)
                    }
                    _ => Err(self.unexpected("`Int` (only `List Int` is supported)")),
                }
            }
            Tok::LBracket => {
                self.bump();
                match self.peek().clone() {
                    Tok::Ident(s) if s == "Int" => {
                        self.bump();
                    }
                    _ => return Err(self.unexpected("`Int` (only `[Int]` is supported)")),
                }
                self.expect(&Tok::RBracket, "`]`")?;
                Ok(Sort::List)
            }
            _ => Err(self.unexpected("a base type (`Int`, `Bool`, `List Int`)")),
        }
    }

    pub fn rtype(&mut self) -> PResult<SType> {
        let param = match (self.peek().clone(), self.peek_at(1)) {
            (Tok::Ident(x), Tok::Colon) if !matches!(x.as_str(), "Int" | "Bool" | "List") => {
                self.bump();
                self.bump();
                Some(x)
            }
            _ => None,
        };
        let arg = self.rbase()?;
        if self.eat(&Tok::Arrow) {
            let ret = self.rtype()?;
            Ok(SType::Fun { param, arg: Box::new(arg), ret: Box::new(ret) })
        } else if let Some(p) = param {
            // `x:T` without an arrow: the name is the refinement binder.
            match arg {
                SType::Base { binder: None, sort, refinement, span } => {
                    Ok(SType::Base { binder: Some(p), sort, refinement, span })
                }
                other => Ok(other),
            }
        } else {
            Ok(arg)
        }
    }

    fn rbase(&mut self) -> PResult<SType> {
        let start = self.span();
        match self.peek() {
            Tok::LBrace => {
                self.bump();
                let binder = match (self.peek().clone(), self.peek_at(1)) {
                    (Tok::Ident(x), Tok::Colon) => {
                        self.bump();
                        self.bump();
                        Some(x)
                    }
                    _ => None,
                };
                let sort = self.sort()?;
                self.expect(&Tok::Bar, "`|`")?;
                let refinement = self.grefinement()?;
                self.expect(&Tok::RBrace, "`}`")?;
                Ok(SType::Base { binder, sort, refinement: Some(refinement), span: start.join(self.prev_span()) })
            }
            Tok::LParen if !self.looks_like_sort_in_parens() => {
                self.bump();
                let t = self.rtype()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(t)
            }
            _ => {
                let paren = self.eat(&Tok::LParen);
                let sort = self.sort()?;
                if paren {
                    self.expect(&Tok::RParen, "`)`")?;
                }
                Ok(SType::Base { binder: None, sort, refinement: None, span: start.join(self.prev_span()) })
            }
        }
    }

    fn looks_like_sort_in_parens(&self) -> bool {
        matches!(self.peek_at(1), Tok::Ident(s) if s == "List")
            && matches!(self.peek_at(2), Tok::Ident(s) if s == "Int")
            && matches!(self.peek_at(3), Tok::RParen)
    }

    fn grefinement(&mut self) -> PResult<SRefinement> {
        let start = self.span();
        let p = self.pred()?;
        let span = start.join(self.prev_span());
        let mut hole = None;
        let mut rest = Vec::new();
        for c in flatten_and(p) {
            if c == Pred::var(HOLE_MARK) {
                if hole.is_some() {
                    return Err(Diagnostic::error(span, "a refinement may contain at most one `?`"));
                }
                hole = Some(self.find_hole_span(start, span));
            } else {
                if c.mentions(&Name::new(HOLE_MARK)) {
                    return Err(Diagnostic::error(span, "`?` may only appear as a top-level conjunct"));
                }
                rest.push(c);
            }
        }
        Ok(SRefinement { pred: Pred::and(rest), hole, span })
    }

    fn find_hole_span(&self, from: Span, within: Span) -> Span {
        self.toks
            .iter()
            .find(|t| t.tok == Tok::Hole && t.span.start >= from.start && t.span.end <= within.end)
            .map(|t| t.span)
            .unwrap_or(within)
    }

    // ---- predicates -----------------------------------------------------

    pub fn pred(&mut self) -> PResult<Pred> {
        let lhs = self.pred_or()?;
        match self.peek() {
            Tok::FatArrow => {
                self.bump();
                Ok(Pred::imp(lhs, self.pred()?))
            }
            Tok::Iff => {
                self.bump();
                Ok(Pred::iff(lhs, self.pred()?))
            }
            _ => Ok(lhs),
        }
    }

    fn pred_or(&mut self) -> PResult<Pred> {
        let mut ps = vec![self.pred_and()?];
        while self.eat(&Tok::OrOr) {
            ps.push(self.pred_and()?);
        }
        Ok(if ps.len() == 1 { ps.pop().unwrap() } else { Pred::Or(ps) })
    }

    fn pred_and(&mut self) -> PResult<Pred> {
        let mut ps = vec![self.pred_not()?];
        while self.eat(&Tok::AndAnd) {
            ps.push(self.pred_not()?);
        }
        Ok(if ps.len() == 1 { ps.pop().unwrap() } else { Pred::And(ps) })
    }

    fn pred_not(&mut self) -> PResult<Pred> {
        if self.eat(&Tok::Not) {
            Ok(Pred::Not(Box::new(self.pred_not()?)))
        } else {
            self.pred_rel()
        }
    }

    fn pred_rel(&mut self) -> PResult<Pred> {
        let a = self.pred_arith()?;
        let rel = match self.peek() {
            Tok::Lt => Rel::Lt,
            Tok::Le => Rel::Le,
            Tok::Gt => Rel::Gt,
            Tok::Ge => Rel::Ge,
            Tok::EqEq | Tok::Assign => Rel::Eq,
            Tok::Ne => Rel::Ne,
            _ => return Ok(a),
        };
        self.bump();
        let b = self.pred_arith()?;
        Ok(Pred::rel(rel, a, b))
    }

    fn pred_arith(&mut self) -> PResult<Pred> {
        let mut a = self.pred_term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(a),
            };
            self.bump();
            let b = self.pred_term()?;
            a = Pred::arith(op, a, b);
        }
    }

    fn pred_term(&mut self) -> PResult<Pred> {
        let mut a = self.pred_app()?;
        while self.eat(&Tok::Star) {
            let b = self.pred_app()?;
            a = Pred::arith(ArithOp::Mul, a, b);
        }
        Ok(a)
    }

    fn pred_app(&mut self) -> PResult<Pred> {
        if let (Tok::Ident(f), next) = (self.peek().clone(), self.peek_at(1)) {
            if matches!(next, Tok::Ident(_) | Tok::Int(_) | Tok::LParen) {
                self.bump();
                let arg = self.pred_atom()?;
                let m = Measure { name: Name::new(&f), arg: Sort::List, ret: Sort::Int };
                return Ok(Pred::App(m, Box::new(arg)));
            }
        }
        self.pred_atom()
    }

    fn pred_atom(&mut self) -> PResult<Pred> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Pred::Int(n))
            }
            Tok::Minus if matches!(self.peek_at(1), Tok::Int(_)) => {
                self.bump();
                let Tok::Int(n) = self.bump().tok else { unreachable!() };
                Ok(Pred::Int(-n))
            }
            Tok::True => {
                self.bump();
                Ok(Pred::tt())
            }
            Tok::False => {
                self.bump();
                Ok(Pred::ff())
            }
            Tok::Ident(x) => {
                self.bump();
                Ok(Pred::var(x.as_str()))
            }
            Tok::Hole => {
                self.bump();
                Ok(Pred::var(HOLE_MARK))
            }
            Tok::LParen => {
                self.bump();
                let p = self.pred()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(p)
            }
            _ => Err(self.unexpected("a predicate")),
        }
    }

    // ---- expressions ----------------------------------------------------

    pub fn expr(&mut self) -> PResult<SExpr> {
        let start = self.span();
        match self.peek() {
            Tok::Let => {
                self.bump();
                let (x, xs) = self.ident("a variable")?;
                let ann = if self.eat(&Tok::ColonColon) { Some(self.rtype()?) } else { None };
                self.expect(&Tok::Assign, "`=`")?;
                let e1 = self.expr()?;
                self.expect(&Tok::In, "`in`")?;
                let e2 = self.expr()?;
                Ok(self.node(start, SExprKind::Let(x, xs, ann, Box::new(e1), Box::new(e2))))
            }
            Tok::If => {
                self.bump();
                let c = self.expr()?;
                self.expect(&Tok::Then, "`then`")?;
                let t = self.expr()?;
                self.expect(&Tok::Else, "`else`")?;
                let e = self.expr()?;
                Ok(self.node(start, SExprKind::If(Box::new(c), Box::new(t), Box::new(e))))
            }
            Tok::Match => {
                self.bump();
                let scrut = self.expr()?;
                self.expect(&Tok::LBrace, "`{`")?;
                self.expect(&Tok::LBracket, "`[]`")?;
                self.expect(&Tok::RBracket, "`]`")?;
                self.expect(&Tok::Arrow, "`->`")?;
                let nil = self.expr()?;
                self.expect(&Tok::Semi, "`;`")?;
                self.expect(&Tok::LParen, "`(`")?;
                let head = self.ident("a variable")?;
                self.expect(&Tok::Colon, "`:`")?;
                let tail = self.ident("a variable")?;
                self.expect(&Tok::RParen, "`)`")?;
                self.expect(&Tok::Arrow, "`->`")?;
                let cons = self.expr()?;
                self.eat(&Tok::Semi);
                self.expect(&Tok::RBrace, "`}`")?;
                Ok(self.node(
                    start,
                    SExprKind::Match { scrut: Box::new(scrut), nil: Box::new(nil), head, tail, cons: Box::new(cons) },
                ))
            }
            Tok::Backslash => {
                self.bump();
                let mut params = Vec::new();
                loop {
                    match self.peek() {
                        Tok::Ident(_) => {
                            let (x, xs) = self.ident("a parameter")?;
                            params.push((x, xs, None));
                        }
                        Tok::LParen => {
                            self.bump();
                            let (x, xs) = self.ident("a parameter")?;
                            self.expect(&Tok::Colon, "`:`")?;
                            let t = self.rtype()?;
                            self.expect(&Tok::RParen, "`)`")?;
                            params.push((x, xs, Some(t)));
                        }
                        _ => break,
                    }
                }
                if params.is_empty() {
                    return Err(self.unexpected("a lambda parameter"));
                }
                self.expect(&Tok::Arrow, "`->`")?;
                let mut body = self.expr()?;
                for (x, xs, t) in params.into_iter().rev() {
                    body = self.node(start, SExprKind::Lam(x, xs, t, Box::new(body)));
                }
                Ok(body)
            }
            _ => self.expr_or(),
        }
    }

    fn node(&self, start: Span, kind: SExprKind) -> SExpr {
        SExpr { span: start.join(self.prev_span()), kind }
    }

    fn binop(&self, op: Prim, a: SExpr, b: SExpr) -> SExpr {
        let span = a.span.join(b.span);
        let f = SExpr { span, kind: SExprKind::Prim(op) };
        let fa = SExpr { span, kind: SExprKind::App(Box::new(f), Box::new(a)) };
        SExpr { span, kind: SExprKind::App(Box::new(fa), Box::new(b)) }
    }

    fn expr_or(&mut self) -> PResult<SExpr> {
        let mut a = self.expr_and()?;
        while self.eat(&Tok::OrOr) {
            let b = self.expr_and()?;
            a = self.binop(Prim::Or, a, b);
        }
        Ok(a)
    }

    fn expr_and(&mut self) -> PResult<SExpr> {
        let mut a = self.expr_cmp()?;
        while self.eat(&Tok::AndAnd) {
            let b = self.expr_cmp()?;
            a = self.binop(Prim::And, a, b);
        }
        Ok(a)
    }

    fn expr_cmp(&mut self) -> PResult<SExpr> {
        let a = self.expr_add()?;
        let op = match self.peek() {
            Tok::Lt => Prim::Lt,
            Tok::Le => Prim::Le,
            Tok::Gt => Prim::Gt,
            Tok::Ge => Prim::Ge,
            Tok::EqEq => Prim::Eq,
            Tok::Ne => Prim::Ne,
            _ => return Ok(a),
        };
        self.bump();
        let b = self.expr_add()?;
        Ok(self.binop(op, a, b))
    }

    fn expr_add(&mut self) -> PResult<SExpr> {
        let start = self.span();
        let mut a = if self.peek() == &Tok::Minus {
            self.bump();
            match self.peek().clone() {
                Tok::Int(n) => {
                    self.bump();
                    self.node(start, SExprKind::Int(-n))
                }
                _ => {
                    let e = self.expr_mul()?;
                    let zero = SExpr { span: start, kind: SExprKind::Int(0) };
                    self.binop(Prim::Sub, zero, e)
                }
            }
        } else {
            self.expr_mul()?
        };
        loop {
            let op = match self.peek() {
                Tok::Plus => Prim::Add,
                Tok::Minus => Prim::Sub,
                _ => return Ok(a),
            };
            self.bump();
            let b = self.expr_mul()?;
            a = self.binop(op, a, b);
        }
    }

    fn expr_mul(&mut self) -> PResult<SExpr> {
        let mut a = self.expr_app()?;
        loop {
            let op = match self.peek() {
                Tok::Star => Prim::Mul,
                Tok::Slash => Prim::Div,
                _ => return Ok(a),
            };
            self.bump();
            let b = self.expr_app()?;
            a = self.binop(op, a, b);
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Int(_) | Tok::True | Tok::False | Tok::Ident(_) | Tok::Not | Tok::LParen | Tok::LBracket
        )
    }

    fn expr_app(&mut self) -> PResult<SExpr> {
        let mut f = self.expr_atom()?;
        while self.starts_atom() {
            let a = self.expr_atom()?;
            let span = f.span.join(a.span);
            f = SExpr { span, kind: SExprKind::App(Box::new(f), Box::new(a)) };
        }
        Ok(f)
    }

    fn expr_atom(&mut self) -> PResult<SExpr> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(self.node(start, SExprKind::Int(n)))
            }
            Tok::True | Tok::False => {
                let b = self.bump().tok == Tok::True;
                Ok(self.node(start, SExprKind::Bool(b)))
            }
            Tok::Not => {
                self.bump();
                Ok(self.node(start, SExprKind::Prim(Prim::Not)))
            }
            Tok::Ident(x) => {
                self.bump();
                let kind = match x.as_str() {
                    "cons" => SExprKind::Prim(Prim::Cons),
                    "length" => SExprKind::Prim(Prim::Length),
                    _ => SExprKind::Var(x),
                };
                Ok(self.node(start, kind))
            }
            Tok::LBracket => {
                self.bump();
                let mut elems = Vec::new();
                if !self.eat(&Tok::RBracket) {
                    loop {
                        elems.push(self.expr()?);
                        if self.eat(&Tok::RBracket) {
                            break;
                        }
                        self.expect(&Tok::Comma, "`,` or `]`")?;
                    }
                }
                Ok(self.node(start, SExprKind::List(elems)))
            }
            Tok::LParen => {
                self.bump();
                let section = match self.peek() {
                    Tok::Plus => Some(Prim::Add),
                    Tok::Minus => Some(Prim::Sub),
                    Tok::Star => Some(Prim::Mul),
                    Tok::Slash => Some(Prim::Div),
                    Tok::EqEq => Some(Prim::Eq),
                    Tok::Ne => Some(Prim::Ne),
                    Tok::Lt => Some(Prim::Lt),
                    Tok::Le => Some(Prim::Le),
                    Tok::Gt => Some(Prim::Gt),
                    Tok::Ge => Some(Prim::Ge),
                    Tok::AndAnd => Some(Prim::And),
                    Tok::OrOr => Some(Prim::Or),
                    _ => None,
                };
                if let Some(p) = section {
                    if self.peek_at(1) == &Tok::RParen {
                        self.bump();
                        self.bump();
                        return Ok(self.node(start, SExprKind::Prim(p)));
                    }
                }
                let e = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(SExpr { span: start.join(self.prev_span()), kind: e.kind })
            }
            _ => Err(self.unexpected("an expression")),
        }
    }
}

fn flatten_and(p: Pred) -> Vec<Pred> {
    match p {
        Pred::And(ps) => ps.into_iter().flat_map(flatten_and).collect(),
        p => vec![p],
    }
}
