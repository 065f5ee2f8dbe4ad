//! Candidate concretizations of a hole, filtered stage by stage.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::frontend::SourceInfo;
use crate::lang::{Name, Pred, Sort};
use crate::smt::{Smt, SmtError};
use crate::templates::{conjunctions, sensible, TemplateSet};

/// The last filter a candidate passed. Ordered by pipeline position.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    All,
    Sensible,
    Local,
    Specific,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Candidate {
    /// Indices into the qualifier list; empty for `true`.
    pub conj: Vec<usize>,
    pub pred: Pred,
    pub stage: Stage,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounts {
    pub all: usize,
    pub sensible: usize,
    pub local: usize,
    pub specific: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CandidateSet {
    pub qualifiers: Vec<Pred>,
    pub candidates: Vec<Candidate>,
}

impl CandidateSet {
    pub fn counts(&self) -> StageCounts {
        let at_least = |s: Stage| self.candidates.iter().filter(|c| c.stage >= s).count();
        StageCounts {
            all: self.candidates.len(),
            sensible: at_least(Stage::Sensible),
            local: at_least(Stage::Local),
            specific: at_least(Stage::Specific),
        }
    }

    /// Indices of the candidates that survive every filter.
    pub fn surviving(&self) -> Vec<usize> {
        (0..self.candidates.len()).filter(|&i| self.candidates[i].stage == Stage::Specific).collect()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CandidateOptions {
    pub depth: usize,
    pub sensibility: bool,
    /// Offer `true` (the empty conjunction) as a candidate.
    pub with_true: bool,
}

/// Enumerate and filter the candidates for one hole. A candidate `q` is kept
/// when `static && q` is sensible and local on the binder, and `q` on its own
/// implies the static part.
pub fn candidates(
    smt: &Smt,
    templates: &TemplateSet,
    source: &SourceInfo,
    opts: CandidateOptions,
) -> Result<CandidateSet, SmtError> {
    candidates_for(smt, templates, source.sort, &source.static_part, &source.scope, opts)
}

/// [`candidates`] for a refinement `static_part && ?` on a binder of sort
/// `sort` declared over `scope`.
pub fn candidates_for(
    smt: &Smt,
    templates: &TemplateSet,
    sort: Sort,
    static_part: &Pred,
    scope: &[(Name, Sort)],
    opts: CandidateOptions,
) -> Result<CandidateSet, SmtError> {
    let qualifiers = templates.instantiate(sort, scope);
    let mut sorts: BTreeMap<Name, Sort> = scope.iter().cloned().collect();
    sorts.insert(Name::nu(), sort);
    let mut out = Vec::new();
    for conj in conjunctions(qualifiers.len(), opts.depth, opts.with_true) {
        let pred = Pred::and(conj.iter().map(|&i| qualifiers[i].clone()));
        let filled = Pred::and([static_part.clone(), pred.clone()]);
        let mut stage = Stage::All;
        if !opts.sensibility || sensible(&filled, &sorts) {
            stage = Stage::Sensible;
            if smt.is_local(&filled, sort, scope)? {
                stage = Stage::Local;
                if static_part.is_true() || smt.implies(&sorts, std::slice::from_ref(&pred), static_part)? {
                    stage = Stage::Specific;
                }
            }
        }
        out.push(Candidate { conj, pred, stage });
    }
    Ok(CandidateSet { qualifiers, candidates: out })
}
