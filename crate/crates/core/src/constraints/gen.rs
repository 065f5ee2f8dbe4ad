//! Syntax-directed constraint generation.
//!
//! Generation is bidirectional: when an expected type is known (a `sig`, an
//! annotation, or a branch of a checked conditional) it is pushed inwards,
//! otherwise a type is synthesized, introducing fresh liquid variables where
//! a type must not mention locally bound names.

use std::collections::{BTreeSet, HashMap};

use crate::diagnostics::Diagnostic;
use crate::frontend::{is_temp, Program, SourceInfo};
use crate::lang::*;

use super::builtins::prim_type;
use super::shape::{self, Shapes};
use super::KVarInfo;

pub(super) struct Generator<'a> {
    program: &'a Program,
    globals: HashMap<Name, RType>,
    global_shapes: HashMap<Name, Shape>,
    base_env: Env,
    shapes: Shapes,
    owner: String,
    next_param: u32,
    pub kvars: Vec<KVarInfo>,
    pub raw: Vec<Constraint>,
    pub sources: Vec<SourceInfo>,
    registered: BTreeSet<SourceId>,
    pub def_types: Vec<(Name, RType)>,
    pub errors: Vec<Diagnostic>,
}

fn guard_name() -> Name {
    Name::new("_guard")
}

/// Variables a qualifier for a fresh liquid variable may mention.
fn scope_of(env: &Env) -> Vec<(Name, Sort)> {
    env.base_scope().into_iter().filter(|(x, _)| !is_temp(x)).collect()
}

impl<'a> Generator<'a> {
    pub fn new(program: &'a Program) -> Self {
        let mut g = Generator {
            program,
            globals: HashMap::new(),
            global_shapes: HashMap::new(),
            base_env: Env::new(),
            shapes: Shapes::default(),
            owner: String::new(),
            next_param: 0,
            kvars: Vec::new(),
            raw: Vec::new(),
            sources: program.sources.clone(),
            registered: BTreeSet::new(),
            def_types: Vec::new(),
            errors: Vec::new(),
        };
        for a in &program.assumes {
            g.declare(&a.name, a.ty.clone());
        }
        for d in &program.defs {
            if let Some(t) = &d.sig {
                g.declare(&d.name, t.clone());
            }
        }
        g
    }

    fn declare(&mut self, name: &Name, ty: RType) {
        self.global_shapes.insert(name.clone(), ty.shape());
        if ty.sort().is_some() {
            self.base_env = self.base_env.extended(name.clone(), ty);
        } else {
            self.globals.insert(name.clone(), ty);
        }
    }

    /// Generate constraints for every definition, in order.
    pub fn run(&mut self) -> Result<(), Diagnostic> {
        let program = self.program;
        for d in &program.defs {
            self.owner = d.name.to_string();
            self.shapes = shape::infer(&d.body, d.sig.as_ref().map(|t| t.shape()).as_ref(), &self.global_shapes)?;
            let env = self.base_env.clone();
            let ty = match &d.sig {
                Some(sig) => {
                    self.check(&env, &d.body, sig);
                    sig.clone()
                }
                None => {
                    let t = self.synth(&env, &d.body);
                    self.declare(&d.name, t.clone());
                    t
                }
            };
            self.def_types.push((d.name.clone(), ty));
        }
        Ok(())
    }

    // ---- helpers --------------------------------------------------------

    fn new_kvar(&mut self, env: &Env, sort: Sort, span: Span, origin: &str) -> RType {
        let id = KVarId(self.kvars.len() as u32);
        self.kvars.push(KVarInfo {
            id,
            sort,
            scope: scope_of(env),
            span,
            origin: origin.to_string(),
            owner: self.owner.clone(),
        });
        RType::base(sort, Pred::KVar(id, Subst::new()))
    }

    /// A template of the given shape with a fresh liquid variable in every
    /// refinement position, plus its well-formedness constraint.
    fn fresh(&mut self, env: &Env, shape: &Shape, span: Span, origin: &str) -> RType {
        let t = self.fresh_type(env, shape, span, origin);
        self.emit(span, ConstraintKind::Wf { env: env.clone(), ty: t.clone() });
        t
    }

    fn fresh_type(&mut self, env: &Env, shape: &Shape, span: Span, origin: &str) -> RType {
        match shape {
            Shape::Base(s) => self.new_kvar(env, *s, span, origin),
            Shape::Fun(a, r) => {
                let x = Name::new(format!("_a{}", self.next_param));
                self.next_param += 1;
                let ta = self.fresh_type(env, a, span, origin);
                let inner = if ta.sort().is_some() { env.extended(x.clone(), ta.clone()) } else { env.clone() };
                let tr = self.fresh_type(&inner, r, span, origin);
                RType::fun(x, ta, tr)
            }
        }
    }

    fn emit(&mut self, span: Span, kind: ConstraintKind) {
        let id = ConstraintId(self.raw.len() as u32);
        self.raw.push(Constraint { id, span, kind });
    }

    fn sub(&mut self, env: &Env, lhs: RType, rhs: RType, span: Span) {
        self.emit(span, ConstraintKind::Sub { env: env.clone(), lhs, rhs });
    }

    /// Complete the scope of holes written in annotations inside a body.
    fn register(&mut self, env: &Env, ty: &RType, span: Span) {
        if let Err(e) = super::wf_type(env, ty) {
            self.errors.push(Diagnostic::error(span, format!("ill-sorted annotation: {e}")));
        }
        for s in ty.sources() {
            let info = &mut self.sources[s.0 as usize];
            if info.local && self.registered.insert(s) {
                let mut scope = scope_of(env);
                scope.retain(|(x, _)| !info.scope.iter().any(|(y, _)| y == x));
                scope.extend(info.scope.iter().cloned());
                info.scope = scope;
            }
        }
    }

    fn selfify(x: &Name, t: &RType) -> RType {
        match t.sort() {
            Some(Sort::Bool) => RType::base(Sort::Bool, Pred::iff(Pred::nu(), Pred::Var(x.clone()))),
            Some(s) => RType::base(s, Pred::rel(Rel::Eq, Pred::nu(), Pred::Var(x.clone()))),
            None => t.clone(),
        }
    }

    fn var_type(&self, env: &Env, x: &Name) -> RType {
        if let Some(t) = env.lookup(x) {
            return Self::selfify(x, t);
        }
        self.globals.get(x).cloned().unwrap_or_else(|| panic!("unbound variable `{x}` after resolution"))
    }

    /// Whether `x` may occur in the meaning of `t`, including through the
    /// scopes of liquid variables and holes.
    fn mentions(&self, t: &RType, x: &Name) -> bool {
        t.refinements().iter().any(|r| {
            let mut hit = false;
            r.pred.visit(&mut |p| match p {
                Pred::Var(y) if y == x => hit = true,
                Pred::KVar(k, theta) => {
                    let scope = &self.kvars[k.0 as usize].scope;
                    if scope.iter().any(|(y, _)| y == x) && !theta.contains_key(x) {
                        hit = true;
                    }
                }
                _ => {}
            });
            if let Some(h) = &r.hole {
                let info = &self.sources[h.source.0 as usize];
                hit |= info.scope.iter().any(|(y, _)| y == x) && !h.subst.contains_key(x);
                hit |= h.subst.values().any(|p| p.mentions(x));
            }
            hit
        })
    }

    fn bool_guard(c: &Atom, positive: bool) -> Pred {
        let p = Pred::Var(c.name.clone());
        if positive {
            p
        } else {
            Pred::not(p)
        }
    }

    fn match_envs(env: &Env, scrut: &Atom, head: &Name, tail: &Name) -> (Env, Env) {
        let len_x = || Pred::len(Pred::Var(scrut.name.clone()));
        let nil = env.guarded(guard_name(), Pred::rel(Rel::Eq, len_x(), Pred::Int(0)));
        let cons = env
            .extended(head.clone(), RType::trivial(Sort::Int))
            .extended(tail.clone(), RType::trivial(Sort::List))
            .guarded(
                guard_name(),
                Pred::and([
                    Pred::rel(
                        Rel::Eq,
                        len_x(),
                        Pred::arith(ArithOp::Add, Pred::Int(1), Pred::len(Pred::Var(tail.clone()))),
                    ),
                    Pred::rel(Rel::Lt, Pred::Int(0), len_x()),
                ]),
            );
        (nil, cons)
    }

    // ---- synthesis ------------------------------------------------------

    fn synth(&mut self, env: &Env, e: &Expr) -> RType {
        match &e.kind {
            ExprKind::Const(Const::Int(n)) => RType::base(Sort::Int, Pred::rel(Rel::Eq, Pred::nu(), Pred::Int(*n))),
            ExprKind::Const(Const::Bool(b)) => {
                RType::base(Sort::Bool, if *b { Pred::nu() } else { Pred::not(Pred::nu()) })
            }
            ExprKind::Const(Const::Prim(p)) => prim_type(*p),
            ExprKind::Var(x) => self.var_type(env, x),
            ExprKind::Lam { param, ann, body } => {
                let tx = match ann {
                    Some(t) => {
                        self.register(env, t, e.span);
                        t.clone()
                    }
                    None => {
                        let shape = self.shapes.binder(param).clone();
                        self.fresh(env, &shape, e.span, &format!("parameter `{param}`"))
                    }
                };
                let inner = env.extended(param.clone(), tx.clone());
                let tb = self.synth(&inner, body);
                RType::fun(param.clone(), tx, tb)
            }
            ExprKind::App { func, arg } => {
                let tf = self.synth(env, func);
                let RType::Fun { param, arg: tx, ret } = tf else {
                    panic!("application of a non-function after shape inference")
                };
                let ty = self.var_type(env, &arg.name);
                self.sub(env, ty, (*tx).clone(), arg.span);
                if tx.sort().is_some() {
                    ret.subst1(&param, Pred::Var(arg.name.clone()))
                } else {
                    *ret
                }
            }
            ExprKind::If { cond, then_branch, else_branch } => {
                let shape = self.shapes.expr(e).clone();
                let t = self.fresh(env, &shape, e.span, "conditional");
                self.check(&env.guarded(guard_name(), Self::bool_guard(cond, true)), then_branch, &t);
                self.check(&env.guarded(guard_name(), Self::bool_guard(cond, false)), else_branch, &t);
                t
            }
            ExprKind::Let { name, ann, bound, body } => {
                let t1 = self.bound_type(env, ann, bound);
                let inner = env.extended(name.clone(), t1);
                let t2 = self.synth(&inner, body);
                if self.mentions(&t2, name) {
                    let shape = self.shapes.expr(e).clone();
                    let t = self.fresh(env, &shape, e.span, &format!("body of `let {name}`"));
                    self.sub(&inner, t2, t.clone(), body.span);
                    t
                } else {
                    t2
                }
            }
            ExprKind::Match { scrut, nil, head, tail, cons } => {
                let shape = self.shapes.expr(e).clone();
                let t = self.fresh(env, &shape, e.span, "match");
                let (nil_env, cons_env) = Self::match_envs(env, scrut, head, tail);
                self.check(&nil_env, nil, &t);
                self.check(&cons_env, cons, &t);
                t
            }
        }
    }

    fn bound_type(&mut self, env: &Env, ann: &Option<RType>, bound: &Expr) -> RType {
        match ann {
            Some(t) => {
                self.register(env, t, bound.span);
                self.check(env, bound, t);
                t.clone()
            }
            None => self.synth(env, bound),
        }
    }

    // ---- checking -------------------------------------------------------

    fn check(&mut self, env: &Env, e: &Expr, t: &RType) {
        match (&e.kind, t) {
            (ExprKind::Lam { param, ann, body }, RType::Fun { param: x, arg, ret }) => {
                let tx = match ann {
                    Some(a) => {
                        self.register(env, a, e.span);
                        self.sub(env, (**arg).clone(), a.clone(), e.span);
                        a.clone()
                    }
                    None => (**arg).clone(),
                };
                let ret = if tx.sort().is_some() { ret.subst1(x, Pred::Var(param.clone())) } else { (**ret).clone() };
                let inner = env.extended(param.clone(), tx);
                self.check(&inner, body, &ret);
            }
            (ExprKind::If { cond, then_branch, else_branch }, _) => {
                self.check(&env.guarded(guard_name(), Self::bool_guard(cond, true)), then_branch, t);
                self.check(&env.guarded(guard_name(), Self::bool_guard(cond, false)), else_branch, t);
            }
            (ExprKind::Let { name, ann, bound, body }, _) => {
                let t1 = self.bound_type(env, ann, bound);
                let inner = env.extended(name.clone(), t1);
                self.check(&inner, body, t);
            }
            (ExprKind::Match { scrut, nil, head, tail, cons }, _) => {
                let (nil_env, cons_env) = Self::match_envs(env, scrut, head, tail);
                self.check(&nil_env, nil, t);
                self.check(&cons_env, cons, t);
            }
            _ => {
                let te = self.synth(env, e);
                self.sub(env, te, t.clone(), e.span);
            }
        }
    }
}
