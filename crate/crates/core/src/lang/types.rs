//! Refinement types, gradual refinements and typing environments.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::atomic::{AtomicU32, Ordering};

use serde::{Deserialize, Serialize};

use super::pred::{compose, KVarId, Name, Pred, Sort, Subst};

/// Identity of one syntactic `?` in the program.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SourceId(pub u32);

impl fmt::Display for SourceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

/// The unknown part of an imprecise refinement. Qualifiers chosen for the
/// hole are written over the declaration scope of its source; `subst` maps
/// that scope to the terms visible at the current position.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Hole {
    pub source: SourceId,
    pub subst: Subst,
}

/// `p` (precise) or `p && ?` (imprecise).
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Refinement {
    pub pred: Pred,
    pub hole: Option<Hole>,
}

impl Refinement {
    pub fn precise(pred: Pred) -> Self {
        Refinement { pred, hole: None }
    }

    pub fn gradual(pred: Pred, source: SourceId) -> Self {
        Refinement { pred, hole: Some(Hole { source, subst: Subst::new() }) }
    }

    pub fn tt() -> Self {
        Refinement::precise(Pred::tt())
    }

    pub fn is_precise(&self) -> bool {
        self.hole.is_none()
    }

    pub fn subst(&self, sigma: &Subst) -> Self {
        Refinement {
            pred: self.pred.subst(sigma),
            hole: self.hole.as_ref().map(|h| Hole { source: h.source, subst: compose(&h.subst, sigma) }),
        }
    }

    /// Replace the hole, if any, by `chosen` (a qualifier over the source's
    /// declaration scope). The result is precise.
    pub fn fill(&self, chosen: &Pred) -> Refinement {
        match &self.hole {
            None => self.clone(),
            Some(h) => Refinement::precise(Pred::and([self.pred.clone(), chosen.subst(&h.subst)])),
        }
    }
}

impl fmt::Display for Refinement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.hole, self.pred.is_true()) {
            (None, _) => write!(f, "{}", self.pred),
            (Some(_), true) => f.write_str("?"),
            (Some(_), false) => {
                if matches!(self.pred, Pred::Or(_) | Pred::Iff(..) | Pred::Imp(..)) {
                    write!(f, "({}) && ?", self.pred)
                } else {
                    write!(f, "{} && ?", self.pred)
                }
            }
        }
    }
}

/// Erasure of a refinement type.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Shape {
    Base(Sort),
    Fun(Box<Shape>, Box<Shape>),
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Base(s) => write!(f, "{s}"),
            Shape::Fun(a, r) if matches!(**a, Shape::Fun(..)) => write!(f, "({a}) -> {r}"),
            Shape::Fun(a, r) => write!(f, "{a} -> {r}"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum RType {
    /// `{ν:sort | refinement}`; the binder is always [`Name::nu`].
    Base { sort: Sort, refinement: Refinement },
    /// `param:arg -> ret`; `param` scopes over `ret`.
    Fun { param: Name, arg: Box<RType>, ret: Box<RType> },
}

static FRESH_BINDER: AtomicU32 = AtomicU32::new(0);

fn fresh_binder(base: &Name) -> Name {
    let n = FRESH_BINDER.fetch_add(1, Ordering::Relaxed);
    let stem = base.as_str().split('\'').next().unwrap_or("x");
    Name::new(format!("{stem}'{n}"))
}

impl RType {
    pub fn base(sort: Sort, pred: Pred) -> Self {
        RType::Base { sort, refinement: Refinement::precise(pred) }
    }

    pub fn trivial(sort: Sort) -> Self {
        RType::Base { sort, refinement: Refinement::tt() }
    }

    pub fn fun(param: impl Into<Name>, arg: RType, ret: RType) -> Self {
        RType::Fun { param: param.into(), arg: Box::new(arg), ret: Box::new(ret) }
    }

    /// Unrefined type of the given shape.
    pub fn of_shape(shape: &Shape) -> Self {
        match shape {
            Shape::Base(s) => RType::trivial(*s),
            Shape::Fun(a, r) => RType::fun(fresh_binder(&Name::new("a")), RType::of_shape(a), RType::of_shape(r)),
        }
    }

    pub fn shape(&self) -> Shape {
        match self {
            RType::Base { sort, .. } => Shape::Base(*sort),
            RType::Fun { arg, ret, .. } => Shape::Fun(Box::new(arg.shape()), Box::new(ret.shape())),
        }
    }

    pub fn sort(&self) -> Option<Sort> {
        match self {
            RType::Base { sort, .. } => Some(*sort),
            RType::Fun { .. } => None,
        }
    }

    pub fn refinement(&self) -> Option<&Refinement> {
        match self {
            RType::Base { refinement, .. } => Some(refinement),
            RType::Fun { .. } => None,
        }
    }

    /// Capture-avoiding substitution of program variables.
    pub fn subst(&self, sigma: &Subst) -> RType {
        if sigma.is_empty() {
            return self.clone();
        }
        match self {
            RType::Base { sort, refinement } => RType::Base { sort: *sort, refinement: refinement.subst(sigma) },
            RType::Fun { param, arg, ret } => {
                let arg = arg.subst(sigma);
                let mut inner = sigma.clone();
                inner.remove(param);
                let captured = inner.values().any(|t| t.mentions(param));
                let (param, ret) = if captured {
                    let fresh = fresh_binder(param);
                    let renamed = ret.subst1(param, Pred::Var(fresh.clone()));
                    (fresh, renamed)
                } else {
                    (param.clone(), (**ret).clone())
                };
                RType::Fun { param, arg: Box::new(arg), ret: Box::new(ret.subst(&inner)) }
            }
        }
    }

    pub fn subst1(&self, x: &Name, t: Pred) -> RType {
        let mut s = Subst::new();
        s.insert(x.clone(), t);
        self.subst(&s)
    }

    /// Apply `f` to every base refinement, outermost-first, left to right.
    pub fn map_refinements(&self, f: &mut impl FnMut(&Refinement) -> Refinement) -> RType {
        match self {
            RType::Base { sort, refinement } => RType::Base { sort: *sort, refinement: f(refinement) },
            RType::Fun { param, arg, ret } => {
                let arg = arg.map_refinements(f);
                let ret = ret.map_refinements(f);
                RType::Fun { param: param.clone(), arg: Box::new(arg), ret: Box::new(ret) }
            }
        }
    }

    pub fn refinements(&self) -> Vec<&Refinement> {
        match self {
            RType::Base { refinement, .. } => vec![refinement],
            RType::Fun { arg, ret, .. } => {
                let mut v = arg.refinements();
                v.extend(ret.refinements());
                v
            }
        }
    }

    pub fn kvars(&self) -> BTreeSet<KVarId> {
        self.refinements().iter().flat_map(|r| r.pred.kvars()).collect()
    }

    pub fn sources(&self) -> BTreeSet<SourceId> {
        self.refinements().iter().filter_map(|r| r.hole.as_ref().map(|h| h.source)).collect()
    }

    pub fn is_gradual(&self) -> bool {
        self.refinements().iter().any(|r| r.hole.is_some())
    }
}

impl fmt::Display for RType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RType::Base { sort, refinement } => {
                if refinement.is_precise() && refinement.pred.is_true() {
                    write!(f, "{sort}")
                } else {
                    let shown = refinement.subst(&nu_to_v());
                    write!(f, "{{v:{sort} | {shown}}}")
                }
            }
            RType::Fun { param, arg, ret } => {
                // Surface syntax: the argument's own binder is the parameter.
                match &**arg {
                    RType::Base { sort, refinement } => {
                        if refinement.is_precise() && refinement.pred.is_true() {
                            write!(f, "{param}:{sort}")?;
                        } else {
                            let mut s = Subst::new();
                            s.insert(Name::nu(), Pred::Var(param.clone()));
                            write!(f, "{param}:{{{sort} | {}}}", refinement.subst(&s))?;
                        }
                    }
                    fun => write!(f, "{param}:({fun})")?,
                }
                write!(f, " -> {ret}")
            }
        }
    }
}

fn nu_to_v() -> Subst {
    let mut s = Subst::new();
    s.insert(Name::nu(), Pred::var("v"));
    s
}

/// One environment entry. Guard entries record branch conditions; their
/// refinement does not mention the binder.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Binding {
    pub name: Name,
    pub ty: RType,
    pub guard: bool,
}

/// Ordered typing environment.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default, Serialize, Deserialize)]
pub struct Env {
    pub bindings: Vec<Binding>,
}

impl Env {
    pub fn new() -> Self {
        Env::default()
    }

    pub fn extended(&self, name: Name, ty: RType) -> Env {
        let mut e = self.clone();
        e.bindings.push(Binding { name, ty, guard: false });
        e
    }

    pub fn guarded(&self, name: Name, cond: Pred) -> Env {
        let mut e = self.clone();
        e.bindings.push(Binding { name, ty: RType::base(Sort::Bool, cond), guard: true });
        e
    }

    pub fn lookup(&self, x: &Name) -> Option<&RType> {
        self.bindings.iter().rev().find(|b| !b.guard && &b.name == x).map(|b| &b.ty)
    }

    /// Base-typed program variables in scope, in binding order.
    pub fn base_scope(&self) -> Vec<(Name, Sort)> {
        self.bindings.iter().filter(|b| !b.guard).filter_map(|b| b.ty.sort().map(|s| (b.name.clone(), s))).collect()
    }

    pub fn kvars(&self) -> BTreeSet<KVarId> {
        self.bindings.iter().flat_map(|b| b.ty.kvars()).collect()
    }

    pub fn sources(&self) -> BTreeSet<SourceId> {
        self.bindings.iter().flat_map(|b| b.ty.sources()).collect()
    }

    pub fn map_types(&self, f: &mut impl FnMut(&RType) -> RType) -> Env {
        Env {
            bindings: self
                .bindings
                .iter()
                .map(|b| Binding { name: b.name.clone(), ty: f(&b.ty), guard: b.guard })
                .collect(),
        }
    }
}
