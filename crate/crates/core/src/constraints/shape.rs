//! Simple-type (shape) inference by unification, run before constraint
//! generation so that fresh templates know the shape they refine.

use std::collections::HashMap;

use crate::diagnostics::Diagnostic;
use crate::lang::{Const, Expr, ExprKind, Name, Shape, Sort, Span};

use super::builtins::prim_type;

#[derive(Clone, Debug, PartialEq)]
enum Ty {
    Var(usize),
    Base(Sort),
    Fun(Box<Ty>, Box<Ty>),
}

impl Ty {
    fn of(s: &Shape) -> Ty {
        match s {
            Shape::Base(b) => Ty::Base(*b),
            Shape::Fun(a, r) => Ty::Fun(Box::new(Ty::of(a)), Box::new(Ty::of(r))),
        }
    }
}

/// Shapes of every expression (by id) and every local binder of a definition.
#[derive(Clone, Debug, Default)]
pub struct Shapes {
    pub exprs: HashMap<u32, Shape>,
    pub binders: HashMap<Name, Shape>,
}

impl Shapes {
    pub fn expr(&self, e: &Expr) -> &Shape {
        &self.exprs[&e.id]
    }

    pub fn binder(&self, x: &Name) -> &Shape {
        &self.binders[x]
    }
}

#[derive(Default)]
struct Unifier {
    slots: Vec<Option<Ty>>,
    exprs: HashMap<u32, Ty>,
    binders: HashMap<Name, Ty>,
}

impl Unifier {
    fn fresh(&mut self) -> Ty {
        self.slots.push(None);
        Ty::Var(self.slots.len() - 1)
    }

    fn resolve(&self, t: &Ty) -> Ty {
        match t {
            Ty::Var(v) => match &self.slots[*v] {
                Some(u) => self.resolve(u),
                None => t.clone(),
            },
            Ty::Fun(a, r) => Ty::Fun(Box::new(self.resolve(a)), Box::new(self.resolve(r))),
            b => b.clone(),
        }
    }

    fn occurs(&self, v: usize, t: &Ty) -> bool {
        match self.resolve(t) {
            Ty::Var(w) => v == w,
            Ty::Fun(a, r) => self.occurs(v, &a) || self.occurs(v, &r),
            Ty::Base(_) => false,
        }
    }

    fn unify(&mut self, a: &Ty, b: &Ty, span: Span) -> Result<(), Diagnostic> {
        let (a, b) = (self.resolve(a), self.resolve(b));
        match (&a, &b) {
            (Ty::Var(v), Ty::Var(w)) if v == w => Ok(()),
            (Ty::Var(v), t) | (t, Ty::Var(v)) => {
                if self.occurs(*v, t) {
                    return Err(Diagnostic::error(span, "cannot construct an infinite type"));
                }
                self.slots[*v] = Some(t.clone());
                Ok(())
            }
            (Ty::Base(s), Ty::Base(t)) if s == t => Ok(()),
            (Ty::Fun(a1, r1), Ty::Fun(a2, r2)) => {
                self.unify(a1, a2, span)?;
                self.unify(r1, r2, span)
            }
            _ => Err(Diagnostic::error(
                span,
                format!("type mismatch: expected {}, found {}", self.show(&a), self.show(&b)),
            )),
        }
    }

    fn show(&self, t: &Ty) -> String {
        self.finish(t).to_string()
    }

    /// Unresolved shape variables default to `Int`.
    fn finish(&self, t: &Ty) -> Shape {
        match self.resolve(t) {
            Ty::Var(_) => Shape::Base(Sort::Int),
            Ty::Base(s) => Shape::Base(s),
            Ty::Fun(a, r) => Shape::Fun(Box::new(self.finish(&a)), Box::new(self.finish(&r))),
        }
    }

    fn bind(&mut self, x: &Name, t: Ty) {
        self.binders.insert(x.clone(), t);
    }

    fn var(&self, x: &Name, globals: &HashMap<Name, Shape>, span: Span) -> Result<Ty, Diagnostic> {
        if let Some(t) = self.binders.get(x) {
            return Ok(t.clone());
        }
        globals.get(x).map(Ty::of).ok_or_else(|| Diagnostic::error(span, format!("unknown variable `{x}`")))
    }

    fn walk(&mut self, e: &Expr, globals: &HashMap<Name, Shape>) -> Result<Ty, Diagnostic> {
        let t = match &e.kind {
            ExprKind::Const(Const::Int(_)) => Ty::Base(Sort::Int),
            ExprKind::Const(Const::Bool(_)) => Ty::Base(Sort::Bool),
            ExprKind::Const(Const::Prim(p)) => Ty::of(&prim_type(*p).shape()),
            ExprKind::Var(x) => self.var(x, globals, e.span)?,
            ExprKind::Lam { param, ann, body } => {
                let p = match ann {
                    Some(t) => Ty::of(&t.shape()),
                    None => self.fresh(),
                };
                self.bind(param, p.clone());
                let r = self.walk(body, globals)?;
                Ty::Fun(Box::new(p), Box::new(r))
            }
            ExprKind::App { func, arg } => {
                let f = self.walk(func, globals)?;
                let a = self.var(&arg.name, globals, arg.span)?;
                let r = self.fresh();
                let want = Ty::Fun(Box::new(a.clone()), Box::new(r.clone()));
                // Report a bad argument at the argument, a non-function at the head.
                if let Ty::Fun(pa, _) = self.resolve(&f) {
                    self.unify(&pa, &a, arg.span)?;
                }
                self.unify(&f, &want, func.span)?;
                r
            }
            ExprKind::If { cond, then_branch, else_branch } => {
                let c = self.var(&cond.name, globals, cond.span)?;
                self.unify(&Ty::Base(Sort::Bool), &c, cond.span)?;
                let t = self.walk(then_branch, globals)?;
                let f = self.walk(else_branch, globals)?;
                self.unify(&t, &f, else_branch.span)?;
                t
            }
            ExprKind::Let { name, ann, bound, body } => {
                let b = self.walk(bound, globals)?;
                if let Some(t) = ann {
                    self.unify(&Ty::of(&t.shape()), &b, bound.span)?;
                }
                self.bind(name, b);
                self.walk(body, globals)?
            }
            ExprKind::Match { scrut, nil, head, tail, cons } => {
                let s = self.var(&scrut.name, globals, scrut.span)?;
                self.unify(&Ty::Base(Sort::List), &s, scrut.span)?;
                self.bind(head, Ty::Base(Sort::Int));
                self.bind(tail, Ty::Base(Sort::List));
                let n = self.walk(nil, globals)?;
                let c = self.walk(cons, globals)?;
                self.unify(&n, &c, cons.span)?;
                n
            }
        };
        self.exprs.insert(e.id, t.clone());
        Ok(t)
    }
}

/// Infer shapes for a definition body. `expected` is the erased signature.
pub fn infer(body: &Expr, expected: Option<&Shape>, globals: &HashMap<Name, Shape>) -> Result<Shapes, Diagnostic> {
    let mut u = Unifier::default();
    let t = u.walk(body, globals)?;
    if let Some(s) = expected {
        u.unify(&Ty::of(s), &t, body.span)?;
    }
    Ok(Shapes {
        exprs: u.exprs.iter().map(|(k, t)| (*k, u.finish(t))).collect(),
        binders: u.binders.iter().map(|(k, t)| (k.clone(), u.finish(t))).collect(),
    })
}
