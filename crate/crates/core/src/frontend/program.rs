//! The core program handed to the checker.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::lang::{Expr, Measure, Name, Pred, RType, Sort, SourceId, Span};
use crate::templates::Template;

/// A trusted imported specification.
#[derive(Clone, Debug, PartialEq)]
pub struct Assume {
    pub name: Name,
    pub span: Span,
    pub ty: RType,
}

/// A top-level definition; `body` is the curried lambda over its parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Def {
    pub name: Name,
    pub span: Span,
    pub sig: Option<RType>,
    pub body: Expr,
}

/// One syntactic `?`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceInfo {
    pub id: SourceId,
    pub span: Span,
    /// Name shown for the refinement binder when printing concretizations.
    pub binder: String,
    pub sort: Sort,
    pub static_part: Pred,
    /// Variables qualifiers for this hole may mention, in binding order.
    pub scope: Vec<(Name, Sort)>,
    /// Whether the hole sits in an annotation inside a body, whose scope
    /// also includes the local environment (filled during generation).
    pub local: bool,
    /// The declaration (sig, assume or def) the hole belongs to.
    pub owner: String,
}

/// A refinement written in a `sig` or `assume`, kept for template abstraction.
#[derive(Clone, Debug, PartialEq)]
pub struct SpecRefinement {
    pub pred: Pred,
    pub binder: Sort,
    pub sorts: BTreeMap<Name, Sort>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Program {
    pub file: String,
    pub text: String,
    /// User-declared measures (`len` is always available).
    pub measures: Vec<Measure>,
    pub user_templates: Vec<Template>,
    pub spec_refinements: Vec<SpecRefinement>,
    pub assumes: Vec<Assume>,
    /// Definitions in checking order (dependencies first).
    pub defs: Vec<Def>,
    pub sources: Vec<SourceInfo>,
}

impl Program {
    pub fn source(&self, id: SourceId) -> &SourceInfo {
        &self.sources[id.0 as usize]
    }

    pub fn def(&self, name: &str) -> Option<&Def> {
        self.defs.iter().find(|d| d.name.as_str() == name)
    }
}
