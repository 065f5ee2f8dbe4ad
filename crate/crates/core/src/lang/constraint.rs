//! Well-formedness and subtyping constraints, and liquid solutions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::expr::Span;
use super::pred::{KVarId, Pred};
use super::types::{Env, RType, Refinement, SourceId};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConstraintId(pub u32);

impl fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum ConstraintKind {
    Wf { env: Env, ty: RType },
    Sub { env: Env, lhs: RType, rhs: RType },
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Constraint {
    pub id: ConstraintId,
    /// Blame location: for subtyping, the expression whose type is on the left.
    pub span: Span,
    pub kind: ConstraintKind,
}

impl Constraint {
    pub fn env(&self) -> &Env {
        match &self.kind {
            ConstraintKind::Wf { env, .. } | ConstraintKind::Sub { env, .. } => env,
        }
    }

    /// The refinement being constrained: the right-hand side of a subtyping,
    /// or the type of a well-formedness constraint.
    pub fn head(&self) -> Option<&Refinement> {
        match &self.kind {
            ConstraintKind::Wf { ty, .. } => ty.refinement(),
            ConstraintKind::Sub { rhs, .. } => rhs.refinement(),
        }
    }

    /// The liquid variable heading the constraint, if its head is exactly `κθ`.
    pub fn head_kvar(&self) -> Option<KVarId> {
        match self.head().map(|r| &r.pred) {
            Some(Pred::KVar(k, _)) => Some(*k),
            _ => None,
        }
    }

    /// Liquid variables read by the constraint (environment and left-hand side).
    pub fn body_kvars(&self) -> BTreeSet<KVarId> {
        let mut ks = self.env().kvars();
        if let ConstraintKind::Sub { lhs, .. } = &self.kind {
            ks.extend(lhs.kvars());
        }
        ks
    }

    pub fn kvars(&self) -> BTreeSet<KVarId> {
        let mut ks = self.body_kvars();
        if let Some(k) = self.head().map(|r| r.pred.kvars()) {
            ks.extend(k);
        }
        ks
    }

    pub fn sources(&self) -> BTreeSet<SourceId> {
        let mut s = self.env().sources();
        match &self.kind {
            ConstraintKind::Wf { ty, .. } => s.extend(ty.sources()),
            ConstraintKind::Sub { lhs, rhs, .. } => {
                s.extend(lhs.sources());
                s.extend(rhs.sources());
            }
        }
        s
    }

    pub fn is_sub(&self) -> bool {
        matches!(self.kind, ConstraintKind::Sub { .. })
    }

    /// Apply `f` to every refinement (environment, both sides).
    pub fn map_refinements(&self, f: &mut impl FnMut(&Refinement) -> Refinement) -> Constraint {
        let kind = match &self.kind {
            ConstraintKind::Wf { env, ty } => {
                ConstraintKind::Wf { env: env.map_types(&mut |t| t.map_refinements(f)), ty: ty.map_refinements(f) }
            }
            ConstraintKind::Sub { env, lhs, rhs } => ConstraintKind::Sub {
                env: env.map_types(&mut |t| t.map_refinements(f)),
                lhs: lhs.map_refinements(f),
                rhs: rhs.map_refinements(f),
            },
        };
        Constraint { id: self.id, span: self.span, kind }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let env = self.env();
        let mut first = true;
        for b in &env.bindings {
            if b.ty.sort().is_none() {
                continue;
            }
            let r = b.ty.refinement().unwrap();
            if r.is_precise() && r.pred.is_true() {
                continue;
            }
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            let shown = r.subst(&[(super::Name::nu(), Pred::Var(b.name.clone()))].into_iter().collect());
            if b.guard {
                write!(f, "{{{shown}}}")?;
            } else {
                write!(f, "{}:{{{shown}}}", b.name)?;
            }
        }
        if !first {
            f.write_str(" ")?;
        }
        match &self.kind {
            ConstraintKind::Wf { ty, .. } => write!(f, "|- {ty}"),
            ConstraintKind::Sub { lhs, rhs, .. } => {
                let l = lhs.refinement().map(|r| r.to_string()).unwrap_or_else(|| lhs.to_string());
                let r = rhs.refinement().map(|r| r.to_string()).unwrap_or_else(|| rhs.to_string());
                write!(f, "|- {{ν | {l}}} <: {{ν | {r}}}")
            }
        }
    }
}

/// Map from liquid variables to the qualifiers they are currently solved to.
/// The empty set denotes `true`.
pub type Solution = BTreeMap<KVarId, Vec<Pred>>;

/// Replace every `κθ` by the conjunction of `A(κ)` under `θ`.
///
/// Panics on a liquid variable missing from the solution, which can only be
/// a constraint-generation bug.
pub fn apply_pred(sol: &Solution, p: &Pred) -> Pred {
    if !p.has_kvars() {
        return p.clone();
    }
    match p {
        Pred::KVar(k, theta) => {
            let quals = sol.get(k).unwrap_or_else(|| panic!("liquid variable {k} has no solution"));
            Pred::and(quals.iter().map(|q| q.subst(theta)))
        }
        Pred::Not(a) => Pred::not(apply_pred(sol, a)),
        Pred::And(ps) => Pred::and(ps.iter().map(|q| apply_pred(sol, q))),
        Pred::Or(ps) => Pred::or(ps.iter().map(|q| apply_pred(sol, q))),
        Pred::Iff(a, b) => Pred::iff(apply_pred(sol, a), apply_pred(sol, b)),
        Pred::Imp(a, b) => Pred::imp(apply_pred(sol, a), apply_pred(sol, b)),
        other => other.clone(),
    }
}

/// Apply a solution to one refinement; holes are kept.
pub fn apply_refinement(sol: &Solution, r: &Refinement) -> Refinement {
    Refinement { pred: apply_pred(sol, &r.pred), hole: r.hole.clone() }
}

pub fn apply_type(sol: &Solution, t: &RType) -> RType {
    t.map_refinements(&mut |r| apply_refinement(sol, r))
}

pub fn apply_env(sol: &Solution, env: &Env) -> Env {
    env.map_types(&mut |t| apply_type(sol, t))
}

pub fn apply_constraint(sol: &Solution, c: &Constraint) -> Constraint {
    c.map_refinements(&mut |r| apply_refinement(sol, r))
}
