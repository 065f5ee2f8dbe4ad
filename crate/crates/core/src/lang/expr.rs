//! Core ANF expressions with source spans.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::pred::Name;
use super::types::RType;

/// Source region. Lines and columns are 1-based; `start`/`end` are byte
/// offsets (start inclusive, end exclusive).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl Span {
    /// Smallest span covering both.
    pub fn join(self, other: Span) -> Span {
        let (first, last) = if self.start <= other.start { (self, other) } else { (other, self) };
        let end = if first.end >= last.end { first } else { last };
        Span {
            start: first.start,
            end: end.end,
            start_line: first.start_line,
            start_col: first.start_col,
            end_line: end.end_line,
            end_col: end.end_col,
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}-{}:{}", self.start_line, self.start_col, self.end_line, self.end_col)
    }
}

/// Interpreted operators and list constructors.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Prim {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Not,
    Nil,
    Cons,
    Length,
}

impl Prim {
    /// Surface spelling. Infix operators are written in section form.
    pub fn spelling(self) -> &'static str {
        match self {
            Prim::Add => "(+)",
            Prim::Sub => "(-)",
            Prim::Mul => "(*)",
            Prim::Div => "(/)",
            Prim::Eq => "(==)",
            Prim::Ne => "(/=)",
            Prim::Lt => "(<)",
            Prim::Le => "(<=)",
            Prim::Gt => "(>)",
            Prim::Ge => "(>=)",
            Prim::And => "(&&)",
            Prim::Or => "(||)",
            Prim::Not => "not",
            Prim::Nil => "[]",
            Prim::Cons => "cons",
            Prim::Length => "length",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Const {
    Int(i64),
    Bool(bool),
    Prim(Prim),
}

/// A variable in argument or guard position, with the span of the surface
/// expression it names.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Atom {
    pub name: Name,
    pub span: Span,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum ExprKind {
    Const(Const),
    Var(Name),
    Lam { param: Name, ann: Option<RType>, body: Box<Expr> },
    App { func: Box<Expr>, arg: Atom },
    If { cond: Atom, then_branch: Box<Expr>, else_branch: Box<Expr> },
    Let { name: Name, ann: Option<RType>, bound: Box<Expr>, body: Box<Expr> },
    Match { scrut: Atom, nil: Box<Expr>, head: Name, tail: Name, cons: Box<Expr> },
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Expr {
    pub id: u32,
    pub span: Span,
    pub kind: ExprKind,
}

impl Expr {
    /// Every binder in the tree, in pre-order.
    pub fn binders(&self) -> Vec<Name> {
        let mut out = Vec::new();
        self.collect_binders(&mut out);
        out
    }

    fn collect_binders(&self, out: &mut Vec<Name>) {
        match &self.kind {
            ExprKind::Const(_) | ExprKind::Var(_) => {}
            ExprKind::Lam { param, body, .. } => {
                out.push(param.clone());
                body.collect_binders(out);
            }
            ExprKind::App { func, .. } => func.collect_binders(out),
            ExprKind::If { then_branch, else_branch, .. } => {
                then_branch.collect_binders(out);
                else_branch.collect_binders(out);
            }
            ExprKind::Let { name, bound, body, .. } => {
                out.push(name.clone());
                bound.collect_binders(out);
                body.collect_binders(out);
            }
            ExprKind::Match { nil, head, tail, cons, .. } => {
                nil.collect_binders(out);
                out.push(head.clone());
                out.push(tail.clone());
                cons.collect_binders(out);
            }
        }
    }

    /// Free variables (names referenced but not bound inside).
    pub fn free_vars(&self) -> Vec<Name> {
        let mut out = Vec::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut Vec<Name>) {
        let mut note = |x: &Name, bound: &Vec<Name>| {
            if !bound.contains(x) && !out.contains(x) {
                out.push(x.clone());
            }
        };
        match &self.kind {
            ExprKind::Const(_) => {}
            ExprKind::Var(x) => note(x, bound),
            ExprKind::Lam { param, body, .. } => {
                bound.push(param.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            ExprKind::App { func, arg } => {
                note(&arg.name, bound);
                func.collect_free(bound, out);
            }
            ExprKind::If { cond, then_branch, else_branch } => {
                note(&cond.name, bound);
                then_branch.collect_free(bound, out);
                else_branch.collect_free(bound, out);
            }
            ExprKind::Let { name, bound: e1, body, .. } => {
                e1.collect_free(bound, out);
                bound.push(name.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            ExprKind::Match { scrut, nil, head, tail, cons } => {
                note(&scrut.name, bound);
                nil.collect_free(bound, out);
                bound.push(head.clone());
                bound.push(tail.clone());
                cons.collect_free(bound, out);
                bound.pop();
                bound.pop();
            }
        }
    }

    pub fn size(&self) -> usize {
        1 + match &self.kind {
            ExprKind::Const(_) | ExprKind::Var(_) => 0,
            ExprKind::Lam { body, .. } => body.size(),
            ExprKind::App { func, .. } => func.size() + 1,
            ExprKind::If { then_branch, else_branch, .. } => 1 + then_branch.size() + else_branch.size(),
            ExprKind::Let { bound, body, .. } => bound.size() + body.size(),
            ExprKind::Match { nil, cons, .. } => 1 + nil.size() + cons.size(),
        }
    }
}

/// Re-parseable surface rendering of a core expression.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Const(Const::Int(n)) if *n < 0 => write!(f, "({n})"),
            ExprKind::Const(Const::Int(n)) => write!(f, "{n}"),
            ExprKind::Const(Const::Bool(b)) => write!(f, "{b}"),
            ExprKind::Const(Const::Prim(p)) => f.write_str(p.spelling()),
            ExprKind::Var(x) => write!(f, "{x}"),
            ExprKind::Lam { param, ann: None, body } => write!(f, "(\\{param} -> {body})"),
            ExprKind::Lam { param, ann: Some(t), body } => write!(f, "(\\({param} : {t}) -> {body})"),
            ExprKind::App { func, arg } => match func.kind {
                ExprKind::Lam { .. } | ExprKind::Let { .. } | ExprKind::If { .. } | ExprKind::Match { .. } => {
                    write!(f, "({func}) {}", arg.name)
                }
                _ => write!(f, "{func} {}", arg.name),
            },
            ExprKind::If { cond, then_branch, else_branch } => {
                write!(f, "(if {} then {then_branch} else {else_branch})", cond.name)
            }
            ExprKind::Let { name, ann: None, bound, body } => write!(f, "(let {name} = {bound} in {body})"),
            ExprKind::Let { name, ann: Some(t), bound, body } => {
                write!(f, "(let {name} :: {t} = {bound} in {body})")
            }
            ExprKind::Match { scrut, nil, head, tail, cons } => {
                write!(f, "(match {} {{ [] -> {nil} ; ({head}:{tail}) -> {cons} }})", scrut.name)
            }
        }
    }
}
