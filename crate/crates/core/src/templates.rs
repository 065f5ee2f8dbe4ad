//! Qualifier templates, their instantiation, the sensibility filter and
//! depth-bounded candidate enumeration.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::frontend::SpecRefinement;
use crate::lang::{ArithOp, Name, Pred, Rel, Sort};
use crate::smt::sort::check_formula;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Builtin,
    Abstracted,
    User,
}

/// A predicate over `ν` and wildcard slots `*0`, `*1`, ...
#[derive(Clone, PartialEq, Debug)]
pub struct Template {
    pub pred: Pred,
    pub binder: Sort,
    pub slots: Vec<Sort>,
    pub origin: Origin,
}

impl Template {
    pub fn slot(i: usize) -> Name {
        Name::new(format!("*{i}"))
    }

    fn new(pred: Pred, binder: Sort, slots: Vec<Sort>) -> Self {
        Template { pred, binder, slots, origin: Origin::Builtin }
    }

    fn key(&self) -> (String, Sort, Vec<Sort>) {
        (self.pred.normalize().to_string(), self.binder, self.slots.clone())
    }

    fn well_sorted(&self) -> bool {
        let lookup = |x: &Name| {
            if x.is_nu() {
                return Some(self.binder);
            }
            let i: usize = x.as_str().strip_prefix('*')?.parse().ok()?;
            self.slots.get(i).copied()
        };
        check_formula(&self.pred, &lookup).is_ok()
    }
}

impl std::fmt::Display for Template {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut s = self.pred.to_string();
        for i in (0..self.slots.len()).rev() {
            let star = if self.slots.len() == 1 { "⋆".to_string() } else { format!("⋆{i}") };
            s = s.replace(&format!("*{i}"), &star);
        }
        f.write_str(&s)
    }
}

const COMPARISONS: [Rel; 6] = [Rel::Lt, Rel::Le, Rel::Gt, Rel::Ge, Rel::Eq, Rel::Ne];

/// The built-in template set. `minimal` selects the ordering-only set used in
/// small worked examples.
pub fn builtin(minimal: bool) -> Vec<Template> {
    let nu = Pred::nu;
    let s0 = || Pred::Var(Template::slot(0));
    let int = Sort::Int;
    if minimal {
        let z = || Pred::Int(0);
        return vec![
            Template::new(Pred::rel(Rel::Lt, z(), nu()), int, vec![]),
            Template::new(Pred::rel(Rel::Le, z(), nu()), int, vec![]),
            Template::new(Pred::rel(Rel::Lt, nu(), z()), int, vec![]),
            Template::new(Pred::rel(Rel::Le, nu(), z()), int, vec![]),
            Template::new(Pred::rel(Rel::Lt, nu(), s0()), int, vec![int]),
            Template::new(Pred::rel(Rel::Lt, s0(), nu()), int, vec![int]),
            Template::new(Pred::rel(Rel::Le, nu(), s0()), int, vec![int]),
            Template::new(Pred::rel(Rel::Le, s0(), nu()), int, vec![int]),
        ];
    }
    let mut out = Vec::new();
    for r in COMPARISONS {
        out.push(Template::new(Pred::rel(r, nu(), s0()), int, vec![int]));
    }
    for r in COMPARISONS {
        out.push(Template::new(Pred::rel(r, nu(), Pred::Int(0)), int, vec![]));
    }
    let len = Pred::len;
    out.push(Template::new(Pred::rel(Rel::Ge, len(nu()), Pred::Int(0)), Sort::List, vec![]));
    out.push(Template::new(Pred::rel(Rel::Gt, len(nu()), Pred::Int(0)), Sort::List, vec![]));
    out.push(Template::new(Pred::rel(Rel::Eq, len(nu()), len(s0())), Sort::List, vec![Sort::List]));
    out.push(Template::new(Pred::rel(Rel::Eq, nu(), len(s0())), int, vec![Sort::List]));
    out.push(Template::new(
        Pred::rel(Rel::Eq, nu(), Pred::arith(ArithOp::Add, len(s0()), Pred::Int(1))),
        int,
        vec![Sort::List],
    ));
    out
}

/// Generalize every atomic conjunct of the given specification refinements:
/// the binder stays `ν` and every other variable becomes a slot.
pub fn abstract_from_specs(specs: &[SpecRefinement]) -> Vec<Template> {
    let mut out = Vec::new();
    for spec in specs {
        for atom in spec.pred.conjuncts() {
            if matches!(atom, Pred::Bool(_)) || !atom.mentions(&Name::nu()) || atom.has_kvars() {
                continue;
            }
            let mut order: Vec<Name> = Vec::new();
            atom.visit(&mut |q| {
                if let Pred::Var(x) = q {
                    if !x.is_nu() && !order.contains(x) {
                        order.push(x.clone());
                    }
                }
            });
            let Some(slots) = order.iter().map(|x| spec.sorts.get(x).copied()).collect::<Option<Vec<_>>>() else {
                continue;
            };
            let sigma = order.iter().enumerate().map(|(i, x)| (x.clone(), Pred::Var(Template::slot(i)))).collect();
            out.push(Template { pred: atom.subst(&sigma), binder: spec.binder, slots, origin: Origin::Abstracted });
        }
    }
    out
}

/// The active template set Q★.
#[derive(Clone, Debug, Default)]
pub struct TemplateSet {
    pub templates: Vec<Template>,
}

impl TemplateSet {
    /// Builtins, then templates abstracted from specifications, then user
    /// declarations; duplicates and ill-sorted templates are dropped.
    pub fn new(minimal: bool, specs: &[SpecRefinement], user: &[Template]) -> Self {
        let mut seen = HashSet::new();
        let mut templates = Vec::new();
        for t in builtin(minimal).into_iter().chain(abstract_from_specs(specs)).chain(user.iter().cloned()) {
            if t.well_sorted() && seen.insert(t.key()) {
                templates.push(t);
            }
        }
        TemplateSet { templates }
    }

    /// All well-sorted instances for a binder of sort `binder` over `scope`.
    /// Int slots take Int variables and `len` of List variables. Order:
    /// template order, then scope order; normalized duplicates are dropped.
    pub fn instantiate(&self, binder: Sort, scope: &[(Name, Sort)]) -> Vec<Pred> {
        let fillers = |s: Sort| -> Vec<Pred> {
            let mut v = Vec::new();
            for (x, xs) in scope {
                if x.is_nu() {
                    continue;
                }
                if *xs == s {
                    v.push(Pred::Var(x.clone()));
                } else if s == Sort::Int && *xs == Sort::List {
                    v.push(Pred::len(Pred::Var(x.clone())));
                }
            }
            v
        };
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for t in self.templates.iter().filter(|t| t.binder == binder) {
            let choices: Vec<Vec<Pred>> = t.slots.iter().map(|s| fillers(*s)).collect();
            for combo in cartesian(&choices) {
                let sigma = combo.iter().enumerate().map(|(i, p)| (Template::slot(i), p.clone())).collect();
                let q = t.pred.subst(&sigma);
                if seen.insert(q.normalize()) {
                    out.push(q);
                }
            }
        }
        out
    }
}

fn cartesian(choices: &[Vec<Pred>]) -> Vec<Vec<Pred>> {
    let mut acc: Vec<Vec<Pred>> = vec![vec![]];
    for c in choices {
        acc = acc
            .into_iter()
            .flat_map(|prefix| {
                c.iter().map(move |p| {
                    let mut v = prefix.clone();
                    v.push(p.clone());
                    v
                })
            })
            .collect();
    }
    acc
}

/// Index sets of all conjunctions of at most `depth` distinct qualifiers out
/// of `n`, by increasing size then lexicographically. The empty conjunction
/// (`true`) comes first when `with_true` is set.
pub fn conjunctions(n: usize, depth: usize, with_true: bool) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if with_true {
        out.push(vec![]);
    }
    for k in 1..=depth.min(n) {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            out.push(idx.clone());
            let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else { break };
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    out
}

/// Syntactic sensibility filter. A candidate is rejected when
/// (a) it contains `a < a`, `a > a` or `a /= a`;
/// (b) two of its comparisons relate the same pair of terms with orderings
///     that cannot hold together (e.g. `a < b` and `b <= a`);
/// (c) it orders or does arithmetic on Bool or List operands.
pub fn sensible(q: &Pred, sorts: &BTreeMap<Name, Sort>) -> bool {
    let atoms = q.conjuncts();
    let mut cmp: Vec<(Pred, Pred, u8)> = Vec::new();
    for a in &atoms {
        if !types_sensible(a, sorts) {
            return false;
        }
        if let Pred::Rel(r, x, y) = a {
            if x == y && matches!(r, Rel::Lt | Rel::Gt | Rel::Ne) {
                return false;
            }
            // Orient so that the pair is compared in a fixed order.
            let (x, y, ord) = if x <= y { (x, y, r.orderings()) } else { (y, x, r.flip().orderings()) };
            cmp.push(((**x).clone(), (**y).clone(), ord));
        }
    }
    for (i, (x1, y1, o1)) in cmp.iter().enumerate() {
        for (x2, y2, o2) in &cmp[i + 1..] {
            if x1 == x2 && y1 == y2 && o1 & o2 == 0 {
                return false;
            }
        }
    }
    true
}

fn types_sensible(p: &Pred, sorts: &BTreeMap<Name, Sort>) -> bool {
    let non_int = |t: &Pred| match t {
        Pred::Bool(_) | Pred::Rel(..) | Pred::Not(_) | Pred::And(_) | Pred::Or(_) | Pred::Iff(..) | Pred::Imp(..) => {
            true
        }
        Pred::Var(x) => matches!(sorts.get(x), Some(Sort::Bool | Sort::List)),
        _ => false,
    };
    let mut ok = true;
    p.visit(&mut |q| match q {
        Pred::Arith(_, a, b) => ok &= !non_int(a) && !non_int(b),
        Pred::Rel(r, a, b) if r.is_ordering() => ok &= !non_int(a) && !non_int(b),
        _ => {}
    });
    ok
}
