//! Sort checking of predicates.

use thiserror::Error;

use crate::lang::{Name, Pred, Rel, Sort};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SortError {
    #[error("unbound variable `{0}`")]
    Unbound(Name),
    #[error("`{term}` has sort {found}, expected {expected}")]
    Mismatch { term: String, found: Sort, expected: Sort },
    #[error("cannot compare {0} with {1}")]
    Incomparable(Sort, Sort),
}

/// The sort of `p`, with variable sorts given by `lookup`. Liquid variables
/// are formulas; their pending substitutions are checked as terms.
pub fn sort_of(p: &Pred, lookup: &dyn Fn(&Name) -> Option<Sort>) -> Result<Sort, SortError> {
    let expect = |q: &Pred, s: Sort| -> Result<(), SortError> {
        let found = sort_of(q, lookup)?;
        if found == s {
            Ok(())
        } else {
            Err(SortError::Mismatch { term: q.to_string(), found, expected: s })
        }
    };
    match p {
        Pred::Bool(_) => Ok(Sort::Bool),
        Pred::Int(_) => Ok(Sort::Int),
        Pred::Var(x) => lookup(x).ok_or_else(|| SortError::Unbound(x.clone())),
        Pred::App(m, a) => {
            expect(a, m.arg)?;
            Ok(m.ret)
        }
        Pred::Arith(_, a, b) => {
            expect(a, Sort::Int)?;
            expect(b, Sort::Int)?;
            Ok(Sort::Int)
        }
        Pred::Rel(r, a, b) => {
            if matches!(r, Rel::Eq | Rel::Ne) {
                let (sa, sb) = (sort_of(a, lookup)?, sort_of(b, lookup)?);
                if sa != sb {
                    return Err(SortError::Incomparable(sa, sb));
                }
            } else {
                expect(a, Sort::Int)?;
                expect(b, Sort::Int)?;
            }
            Ok(Sort::Bool)
        }
        Pred::Not(a) => {
            expect(a, Sort::Bool)?;
            Ok(Sort::Bool)
        }
        Pred::And(ps) | Pred::Or(ps) => {
            for q in ps {
                expect(q, Sort::Bool)?;
            }
            Ok(Sort::Bool)
        }
        Pred::Iff(a, b) | Pred::Imp(a, b) => {
            expect(a, Sort::Bool)?;
            expect(b, Sort::Bool)?;
            Ok(Sort::Bool)
        }
        Pred::KVar(_, theta) => {
            for t in theta.values() {
                sort_of(t, lookup)?;
            }
            Ok(Sort::Bool)
        }
    }
}

/// Check that `p` is a well-sorted formula.
pub fn check_formula(p: &Pred, lookup: &dyn Fn(&Name) -> Option<Sort>) -> Result<(), SortError> {
    match sort_of(p, lookup)? {
        Sort::Bool => Ok(()),
        found => Err(SortError::Mismatch { term: p.to_string(), found, expected: Sort::Bool }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(x: &Name) -> Option<Sort> {
        match x.as_str() {
            "xs" => Some(Sort::List),
            "b" => Some(Sort::Bool),
            "ν" | "i" => Some(Sort::Int),
            _ => None,
        }
    }

    #[test]
    fn length_comparisons_are_well_sorted() {
        let p = Pred::rel(Rel::Lt, Pred::nu(), Pred::len(Pred::var("xs")));
        assert_eq!(check_formula(&p, &env), Ok(()));
    }

    #[test]
    fn ordering_on_lists_is_rejected() {
        let p = Pred::rel(Rel::Lt, Pred::var("xs"), Pred::nu());
        assert!(check_formula(&p, &env).is_err());
        let q = Pred::rel(Rel::Eq, Pred::var("b"), Pred::var("i"));
        assert!(check_formula(&q, &env).is_err());
        assert!(check_formula(&Pred::var("i"), &env).is_err());
        assert!(check_formula(&Pred::var("zz"), &env).is_err());
    }
}
