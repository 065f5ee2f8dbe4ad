//! Surface syntax tree, as produced by the parser.

use crate::lang::{Pred, Prim, Sort, Span};

#[derive(Clone, PartialEq, Debug)]
pub struct SExpr {
    pub span: Span,
    pub kind: SExprKind,
}

#[derive(Clone, PartialEq, Debug)]
pub enum SExprKind {
    Int(i64),
    Bool(bool),
    Var(String),
    /// Operator or built-in used as a value, e.g. `(+)` or `not`.
    Prim(Prim),
    List(Vec<SExpr>),
    App(Box<SExpr>, Box<SExpr>),
    Lam(String, Span, Option<SType>, Box<SExpr>),
    If(Box<SExpr>, Box<SExpr>, Box<SExpr>),
    Let(String, Span, Option<SType>, Box<SExpr>, Box<SExpr>),
    Match {
        scrut: Box<SExpr>,
        nil: Box<SExpr>,
        head: (String, Span),
        tail: (String, Span),
        cons: Box<SExpr>,
    },
}

/// Refinement as written: predicate over surface names plus an optional hole.
#[derive(Clone, PartialEq, Debug)]
pub struct SRefinement {
    pub pred: Pred,
    /// Span of the `?` token, when present.
    pub hole: Option<Span>,
    pub span: Span,
}

#[derive(Clone, PartialEq, Debug)]
pub enum SType {
    Base { binder: Option<String>, sort: Sort, refinement: Option<SRefinement>, span: Span },
    Fun { param: Option<String>, arg: Box<SType>, ret: Box<SType> },
}

impl SType {
    /// Name the argument binds: the explicit `x:` or the refinement binder.
    pub fn param_name(param: &Option<String>, arg: &SType) -> Option<String> {
        param.clone().or_else(|| match arg {
            SType::Base { binder, .. } => binder.clone(),
            SType::Fun { .. } => None,
        })
    }

    pub fn arity(&self) -> usize {
        match self {
            SType::Base { .. } => 0,
            SType::Fun { ret, .. } => 1 + ret.arity(),
        }
    }
}

#[derive(Clone, PartialEq, Debug)]
pub enum ItemKind {
    Sig { name: String, ty: SType },
    Assume { name: String, ty: SType },
    Def { name: String, params: Vec<(String, Span)>, body: SExpr },
    Template { binder: (String, Sort), slots: Vec<(String, Sort)>, pred: Pred },
    Measure { name: String },
}

#[derive(Clone, PartialEq, Debug)]
pub struct Item {
    pub span: Span,
    pub name_span: Span,
    pub kind: ItemKind,
}

#[derive(Clone, PartialEq, Debug, Default)]
pub struct SourceProgram {
    pub items: Vec<Item>,
}
