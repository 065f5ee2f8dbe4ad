//! Precision of gradual types, decided through their concretizations.

use crate::lang::{Name, Pred, RType, Refinement, Sort};
use crate::smt::{Smt, SmtError};
use crate::templates::TemplateSet;

use super::candidates::{candidates_for, CandidateOptions};

/// The concretizations of a refinement over `scope`: the refinement itself
/// when precise, otherwise `p && q` for every surviving candidate `q`.
pub fn gamma(
    smt: &Smt,
    templates: &TemplateSet,
    opts: CandidateOptions,
    sort: Sort,
    r: &Refinement,
    scope: &[(Name, Sort)],
) -> Result<Vec<Pred>, SmtError> {
    if r.is_precise() {
        return Ok(vec![r.pred.clone()]);
    }
    let set = candidates_for(smt, templates, sort, &r.pred, scope, opts)?;
    Ok(set.surviving().into_iter().map(|i| Pred::and([r.pred.clone(), set.candidates[i].pred.clone()])).collect())
}

/// Whether `t1` is at least as precise as `t2`: every concretization of
/// `t1` is (up to logical equivalence) a concretization of `t2`. Function
/// types are compared component by component; differing shapes are
/// unrelated.
pub fn type_precision(
    smt: &Smt,
    templates: &TemplateSet,
    opts: CandidateOptions,
    t1: &RType,
    t2: &RType,
) -> Result<bool, SmtError> {
    precise_in(smt, templates, opts, t1, t2, &mut Vec::new())
}

fn precise_in(
    smt: &Smt,
    templates: &TemplateSet,
    opts: CandidateOptions,
    t1: &RType,
    t2: &RType,
    scope: &mut Vec<(Name, Sort)>,
) -> Result<bool, SmtError> {
    match (t1, t2) {
        (RType::Base { sort: s1, refinement: r1 }, RType::Base { sort: s2, refinement: r2 }) => {
            if s1 != s2 {
                return Ok(false);
            }
            let g1 = gamma(smt, templates, opts, *s1, r1, scope)?;
            let g2 = gamma(smt, templates, opts, *s2, r2, scope)?;
            let mut vars: std::collections::BTreeMap<Name, Sort> = scope.iter().cloned().collect();
            vars.insert(Name::nu(), *s1);
            for p in &g1 {
                let mut found = false;
                for q in &g2 {
                    if smt.implies(&vars, std::slice::from_ref(p), q)?
                        && smt.implies(&vars, std::slice::from_ref(q), p)?
                    {
                        found = true;
                        break;
                    }
                }
                if !found {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        (RType::Fun { param: x1, arg: a1, ret: r1 }, RType::Fun { param: x2, arg: a2, ret: r2 }) => {
            if a1.shape() != a2.shape() || !precise_in(smt, templates, opts, a1, a2, scope)? {
                return Ok(false);
            }
            let r2 = r2.subst1(x2, Pred::Var(x1.clone()));
            let pushed = a1.sort().map(|s| scope.push((x1.clone(), s))).is_some();
            let res = precise_in(smt, templates, opts, r1, &r2, scope);
            if pushed {
                scope.pop();
            }
            res
        }
        _ => Ok(false),
    }
}
