//! Liquid inference: iterative weakening of a solution until every
//! constraint headed by a liquid variable holds, followed by a check of the
//! constraints with concrete heads.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::constraints::KVarInfo;
use crate::lang::*;
use crate::smt::{Smt, SmtError};
use crate::templates::TemplateSet;

/// The initial solution: every liquid variable maps to all qualifiers
/// instantiated over its scope.
pub fn initial_solution<'a>(kvars: impl IntoIterator<Item = &'a KVarInfo>, templates: &TemplateSet) -> Solution {
    kvars.into_iter().map(|k| (k.id, templates.instantiate(k.sort, &k.scope))).collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SolveStats {
    /// Weakening steps that removed at least one qualifier.
    pub weakenings: usize,
    /// Qualifiers removed in total.
    pub removed: usize,
    /// Constraints examined by the worklist.
    pub visits: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub solution: Solution,
    /// Constraints with concrete heads that do not hold under `solution`.
    pub failing: Vec<ConstraintId>,
    pub stats: SolveStats,
}

impl SolveResult {
    pub fn ok(&self) -> bool {
        self.failing.is_empty()
    }
}

/// Whether a base subtyping or well-formedness constraint holds under `sol`.
/// Holes must have been filled.
pub fn holds(smt: &Smt, sol: &Solution, c: &Constraint) -> Result<bool, SmtError> {
    match &c.kind {
        ConstraintKind::Wf { .. } => Ok(true),
        ConstraintKind::Sub { env, lhs, rhs } => {
            let sort = lhs.sort().expect("split constraints are over base types");
            let env = apply_env(sol, env);
            let l = apply_pred(sol, &lhs.refinement().unwrap().pred);
            let r = apply_pred(sol, &rhs.refinement().unwrap().pred);
            smt.check_sub(&env, sort, &l, &r)
        }
    }
}

/// One `Weaken` step: keep the qualifiers of the head variable that the
/// constraint implies. Returns `None` when the head is not a liquid variable.
pub fn weaken(smt: &Smt, sol: &Solution, c: &Constraint) -> Result<Option<Vec<Pred>>, SmtError> {
    let ConstraintKind::Sub { env, lhs, rhs } = &c.kind else { return Ok(None) };
    let Some(Pred::KVar(k, theta)) = rhs.refinement().map(|r| &r.pred) else { return Ok(None) };
    let sort = lhs.sort().expect("split constraints are over base types");
    let env = apply_env(sol, env);
    let l = apply_pred(sol, &lhs.refinement().unwrap().pred);
    let mut kept = Vec::new();
    for q in &sol[k] {
        if smt.check_sub(&env, sort, &l, &q.subst(theta))? {
            kept.push(q.clone());
        }
    }
    Ok(Some(kept))
}

/// Weaken `initial` to the greatest fixpoint for the κ-headed constraints,
/// then check the remaining ones. All holes must have been filled.
pub fn solve(smt: &Smt, constraints: &[Constraint], initial: Solution) -> Result<SolveResult, SmtError> {
    let mut sol = initial;
    let mut stats = SolveStats::default();
    // Constraints to revisit when a liquid variable changes.
    let mut readers: BTreeMap<KVarId, Vec<usize>> = BTreeMap::new();
    for (i, c) in constraints.iter().enumerate() {
        for k in c.body_kvars() {
            readers.entry(k).or_default().push(i);
        }
    }
    let headed: Vec<usize> = (0..constraints.len()).filter(|&i| constraints[i].head_kvar().is_some()).collect();
    let mut queue: VecDeque<usize> = headed.iter().copied().collect();
    let mut queued: BTreeSet<usize> = queue.iter().copied().collect();
    while let Some(i) = queue.pop_front() {
        queued.remove(&i);
        stats.visits += 1;
        let c = &constraints[i];
        let Some(kept) = weaken(smt, &sol, c)? else { continue };
        let k = c.head_kvar().unwrap();
        if kept.len() == sol[&k].len() {
            continue;
        }
        stats.weakenings += 1;
        stats.removed += sol[&k].len() - kept.len();
        sol.insert(k, kept);
        for &j in readers.get(&k).into_iter().flatten() {
            if constraints[j].head_kvar().is_some() && queued.insert(j) {
                queue.push_back(j);
            }
        }
    }
    let mut failing = Vec::new();
    for c in constraints {
        if c.head_kvar().is_none() && !holds(smt, &sol, c)? {
            failing.push(c.id);
        }
    }
    Ok(SolveResult { solution: sol, failing, stats })
}
