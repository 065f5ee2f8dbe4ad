//! Constraint generation: shape inference, fresh templates, syntax-directed
//! generation and splitting into base constraints.

mod builtins;
mod gen;
pub mod shape;
mod split;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{Diagnostic, Diagnostics};
use crate::frontend::{Program, SourceInfo};
use crate::lang::*;
use crate::smt::sort::{check_formula, SortError};

pub use builtins::prim_type;
pub use split::split;

/// A liquid variable together with the scope its qualifiers range over.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KVarInfo {
    pub id: KVarId,
    pub sort: Sort,
    pub scope: Vec<(Name, Sort)>,
    pub span: Span,
    /// What the variable stands for, e.g. "conditional" or "parameter `x`".
    pub origin: String,
    /// The definition it was created in.
    pub owner: String,
}

/// One appearance of a hole in one base constraint. All mentions of the
/// same hole within a constraint share the occurrence.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OccurrenceId(pub u32);

impl fmt::Display for OccurrenceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "o{}", self.0)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Occurrence {
    pub id: OccurrenceId,
    pub source: SourceId,
    pub constraint: ConstraintId,
}

/// The split constraints of a whole program.
#[derive(Clone, Debug, Default)]
pub struct ConstraintSystem {
    pub constraints: Vec<Constraint>,
    pub kvars: Vec<KVarInfo>,
    pub occurrences: Vec<Occurrence>,
    /// Hole descriptions, with the scopes of body annotations completed.
    pub sources: Vec<SourceInfo>,
    /// Declared or synthesized type of every definition, in checking order.
    pub def_types: Vec<(Name, RType)>,
}

impl ConstraintSystem {
    pub fn constraint(&self, id: ConstraintId) -> &Constraint {
        &self.constraints[id.0 as usize]
    }

    pub fn kvar(&self, k: KVarId) -> &KVarInfo {
        &self.kvars[k.0 as usize]
    }

    pub fn source(&self, s: SourceId) -> &SourceInfo {
        &self.sources[s.0 as usize]
    }

    pub fn occurrence(&self, o: OccurrenceId) -> &Occurrence {
        &self.occurrences[o.0 as usize]
    }

    /// Occurrences in a constraint, by source.
    pub fn occurrences_in(&self, c: ConstraintId) -> impl Iterator<Item = &Occurrence> {
        self.occurrences.iter().filter(move |o| o.constraint == c)
    }

    pub fn occurrences_of(&self, s: SourceId) -> impl Iterator<Item = &Occurrence> {
        self.occurrences.iter().filter(move |o| o.source == s)
    }
}

/// Check that the refinements of `ty` are well-sorted formulas in `env`.
pub fn wf_type(env: &Env, ty: &RType) -> Result<(), SortError> {
    match ty {
        RType::Base { sort, refinement } => {
            let lookup = |x: &Name| if x.is_nu() { Some(*sort) } else { env.lookup(x).and_then(RType::sort) };
            check_formula(&refinement.pred, &lookup)
        }
        RType::Fun { param, arg, ret } => {
            wf_type(env, arg)?;
            let inner = if arg.sort().is_some() { env.extended(param.clone(), (**arg).clone()) } else { env.clone() };
            wf_type(&inner, ret)
        }
    }
}

/// Generate and split the constraints of a program.
pub fn generate(program: &Program) -> Result<ConstraintSystem, Diagnostics> {
    let mut errors = Vec::new();
    for a in &program.assumes {
        if let Err(e) = wf_type(&Env::new(), &a.ty) {
            errors.push(Diagnostic::error(a.span, format!("ill-sorted specification for `{}`: {e}", a.name)));
        }
    }
    for d in &program.defs {
        if let Some(sig) = &d.sig {
            if let Err(e) = wf_type(&Env::new(), sig) {
                errors.push(Diagnostic::error(d.span, format!("ill-sorted signature for `{}`: {e}", d.name)));
            }
        }
    }
    if !errors.is_empty() {
        return Err(Diagnostics(errors));
    }
    let mut g = gen::Generator::new(program);
    g.run()?;
    if !g.errors.is_empty() {
        return Err(Diagnostics(g.errors));
    }
    let mut constraints = Vec::new();
    for c in &g.raw {
        for mut part in split(c) {
            part.id = ConstraintId(constraints.len() as u32);
            constraints.push(part);
        }
    }
    let mut occurrences = Vec::new();
    for c in &constraints {
        for s in c.sources() {
            let id = OccurrenceId(occurrences.len() as u32);
            occurrences.push(Occurrence { id, source: s, constraint: c.id });
        }
    }
    Ok(ConstraintSystem { constraints, kvars: g.kvars, occurrences, sources: g.sources, def_types: g.def_types })
}
