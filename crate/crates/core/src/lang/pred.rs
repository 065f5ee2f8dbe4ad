//! Refinement predicates: the logic shared by types, qualifiers and
//! verification conditions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// An interned-ish identifier. Cheap to clone and safe to send across workers.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(s: impl AsRef<str>) -> Self {
        Name(Arc::from(s.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The refinement binder shared by every base refinement.
    pub fn nu() -> Self {
        Name::new(NU)
    }

    pub fn is_nu(&self) -> bool {
        &*self.0 == NU
    }
}

/// Internal spelling of the refinement binder. Not a valid surface identifier.
pub const NU: &str = "ν";

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

/// Logical sorts of refinement terms.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Sort {
    Int,
    Bool,
    List,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Int => f.write_str("Int"),
            Sort::Bool => f.write_str("Bool"),
            Sort::List => f.write_str("List Int"),
        }
    }
}

/// An uninterpreted measure such as `len : List -> Int`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct Measure {
    pub name: Name,
    pub arg: Sort,
    pub ret: Sort,
}

impl Measure {
    pub fn len() -> Self {
        Measure { name: Name::new("len"), arg: Sort::List, ret: Sort::Int }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
        }
    }
}

/// Binary comparison. Each relation allows a subset of the three orderings of
/// its operands, which is what the sensibility filter reasons about.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Rel {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl Rel {
    pub const ALL: [Rel; 6] = [Rel::Lt, Rel::Le, Rel::Gt, Rel::Ge, Rel::Eq, Rel::Ne];

    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Gt => ">",
            Rel::Ge => ">=",
            Rel::Eq => "==",
            Rel::Ne => "/=",
        }
    }

    /// Relation obtained by swapping the operands.
    pub fn flip(self) -> Rel {
        match self {
            Rel::Lt => Rel::Gt,
            Rel::Le => Rel::Ge,
            Rel::Gt => Rel::Lt,
            Rel::Ge => Rel::Le,
            Rel::Eq => Rel::Eq,
            Rel::Ne => Rel::Ne,
        }
    }

    /// Bitmask over {lt = 1, eq = 2, gt = 4}.
    pub fn orderings(self) -> u8 {
        match self {
            Rel::Lt => 0b001,
            Rel::Le => 0b011,
            Rel::Gt => 0b100,
            Rel::Ge => 0b110,
            Rel::Eq => 0b010,
            Rel::Ne => 0b101,
        }
    }

    pub fn is_ordering(self) -> bool {
        matches!(self, Rel::Lt | Rel::Le | Rel::Gt | Rel::Ge)
    }

    pub fn eval(self, a: i64, b: i64) -> bool {
        match self {
            Rel::Lt => a < b,
            Rel::Le => a <= b,
            Rel::Gt => a > b,
            Rel::Ge => a >= b,
            Rel::Eq => a == b,
            Rel::Ne => a != b,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct KVarId(pub u32);

impl fmt::Display for KVarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k{}", self.0)
    }
}

/// Simultaneous substitution of program variables by terms.
pub type Subst = BTreeMap<Name, Pred>;

/// Refinement formula. Terms and formulas share one tree; [`crate::smt::sort`]
/// decides which is which.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pred {
    Bool(bool),
    Int(i64),
    Var(Name),
    App(Measure, Box<Pred>),
    Arith(ArithOp, Box<Pred>, Box<Pred>),
    Rel(Rel, Box<Pred>, Box<Pred>),
    Not(Box<Pred>),
    And(Vec<Pred>),
    Or(Vec<Pred>),
    Iff(Box<Pred>, Box<Pred>),
    Imp(Box<Pred>, Box<Pred>),
    /// Liquid variable with its pending substitution.
    KVar(KVarId, Subst),
}

impl Pred {
    pub fn tt() -> Pred {
        Pred::Bool(true)
    }

    pub fn ff() -> Pred {
        Pred::Bool(false)
    }

    pub fn var(n: impl Into<Name>) -> Pred {
        Pred::Var(n.into())
    }

    pub fn nu() -> Pred {
        Pred::Var(Name::nu())
    }

    pub fn rel(r: Rel, a: Pred, b: Pred) -> Pred {
        Pred::Rel(r, Box::new(a), Box::new(b))
    }

    pub fn arith(op: ArithOp, a: Pred, b: Pred) -> Pred {
        Pred::Arith(op, Box::new(a), Box::new(b))
    }

    pub fn len(t: Pred) -> Pred {
        Pred::App(Measure::len(), Box::new(t))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(p: Pred) -> Pred {
        match p {
            Pred::Bool(b) => Pred::Bool(!b),
            Pred::Not(inner) => *inner,
            p => Pred::Not(Box::new(p)),
        }
    }

    pub fn iff(a: Pred, b: Pred) -> Pred {
        Pred::Iff(Box::new(a), Box::new(b))
    }

    pub fn imp(a: Pred, b: Pred) -> Pred {
        Pred::Imp(Box::new(a), Box::new(b))
    }

    /// Conjunction that flattens nested conjunctions and drops `true`.
    pub fn and(ps: impl IntoIterator<Item = Pred>) -> Pred {
        let mut out = Vec::new();
        for p in ps {
            match p {
                Pred::Bool(true) => {}
                Pred::And(inner) => out.extend(inner),
                p => out.push(p),
            }
        }
        match out.len() {
            0 => Pred::tt(),
            1 => out.pop().unwrap(),
            _ => Pred::And(out),
        }
    }

    pub fn or(ps: impl IntoIterator<Item = Pred>) -> Pred {
        let mut out: Vec<Pred> = Vec::new();
        for p in ps {
            match p {
                Pred::Bool(false) => {}
                Pred::Or(inner) => out.extend(inner),
                p => out.push(p),
            }
        }
        match out.len() {
            0 => Pred::ff(),
            1 => out.pop().unwrap(),
            _ => Pred::Or(out),
        }
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Pred::Bool(true)) || matches!(self, Pred::And(v) if v.is_empty())
    }

    /// Top-level conjuncts.
    pub fn conjuncts(&self) -> Vec<Pred> {
        match self {
            Pred::And(ps) => ps.iter().flat_map(|p| p.conjuncts()).collect(),
            Pred::Bool(true) => vec![],
            p => vec![p.clone()],
        }
    }

    pub fn has_kvars(&self) -> bool {
        let mut found = false;
        self.visit(&mut |p| {
            if matches!(p, Pred::KVar(..)) {
                found = true;
            }
        });
        found
    }

    pub fn kvars(&self) -> BTreeSet<KVarId> {
        let mut out = BTreeSet::new();
        self.visit(&mut |p| {
            if let Pred::KVar(k, _) = p {
                out.insert(*k);
            }
        });
        out
    }

    /// Free program variables, including those inside pending substitutions.
    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.visit(&mut |p| {
            if let Pred::Var(x) = p {
                out.insert(x.clone());
            }
        });
        out
    }

    pub fn mentions(&self, x: &Name) -> bool {
        let mut found = false;
        self.visit(&mut |p| {
            if let Pred::Var(y) = p {
                if y == x {
                    found = true;
                }
            }
        });
        found
    }

    /// Pre-order traversal, descending into pending substitutions.
    pub fn visit(&self, f: &mut impl FnMut(&Pred)) {
        f(self);
        match self {
            Pred::Bool(_) | Pred::Int(_) | Pred::Var(_) => {}
            Pred::App(_, a) | Pred::Not(a) => a.visit(f),
            Pred::Arith(_, a, b) | Pred::Rel(_, a, b) | Pred::Iff(a, b) | Pred::Imp(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Pred::And(ps) | Pred::Or(ps) => ps.iter().for_each(|p| p.visit(f)),
            Pred::KVar(_, theta) => theta.values().for_each(|p| p.visit(f)),
        }
    }

    /// Capture-avoiding simultaneous substitution. Predicates have no binders,
    /// so capture cannot happen; pending substitutions on liquid variables are
    /// composed (`k[theta]` becomes `k[theta ; sigma]`).
    pub fn subst(&self, sigma: &Subst) -> Pred {
        if sigma.is_empty() {
            return self.clone();
        }
        match self {
            Pred::Bool(_) | Pred::Int(_) => self.clone(),
            Pred::Var(x) => sigma.get(x).cloned().unwrap_or_else(|| self.clone()),
            Pred::App(m, a) => Pred::App(m.clone(), Box::new(a.subst(sigma))),
            Pred::Arith(op, a, b) => Pred::arith(*op, a.subst(sigma), b.subst(sigma)),
            Pred::Rel(r, a, b) => Pred::rel(*r, a.subst(sigma), b.subst(sigma)),
            Pred::Not(a) => Pred::Not(Box::new(a.subst(sigma))),
            Pred::And(ps) => Pred::And(ps.iter().map(|p| p.subst(sigma)).collect()),
            Pred::Or(ps) => Pred::Or(ps.iter().map(|p| p.subst(sigma)).collect()),
            Pred::Iff(a, b) => Pred::iff(a.subst(sigma), b.subst(sigma)),
            Pred::Imp(a, b) => Pred::imp(a.subst(sigma), b.subst(sigma)),
            Pred::KVar(k, theta) => Pred::KVar(*k, compose(theta, sigma)),
        }
    }

    pub fn subst1(&self, x: &Name, t: Pred) -> Pred {
        let mut s = Subst::new();
        s.insert(x.clone(), t);
        self.subst(&s)
    }

    /// Rename a variable to another variable.
    pub fn rename(&self, from: &Name, to: &Name) -> Pred {
        self.subst1(from, Pred::Var(to.clone()))
    }

    /// Canonical orientation of comparisons: `a > b` becomes `b < a` and
    /// `a >= b` becomes `b <= a`. Used to merge syntactically different but
    /// identical qualifiers.
    pub fn normalize(&self) -> Pred {
        match self {
            Pred::Rel(Rel::Gt, a, b) => Pred::rel(Rel::Lt, b.normalize(), a.normalize()),
            Pred::Rel(Rel::Ge, a, b) => Pred::rel(Rel::Le, b.normalize(), a.normalize()),
            Pred::Rel(r, a, b) => Pred::rel(*r, a.normalize(), b.normalize()),
            Pred::App(m, a) => Pred::App(m.clone(), Box::new(a.normalize())),
            Pred::Arith(op, a, b) => Pred::arith(*op, a.normalize(), b.normalize()),
            Pred::Not(a) => Pred::Not(Box::new(a.normalize())),
            Pred::And(ps) => Pred::And(ps.iter().map(Pred::normalize).collect()),
            Pred::Or(ps) => Pred::Or(ps.iter().map(Pred::normalize).collect()),
            Pred::Iff(a, b) => Pred::iff(a.normalize(), b.normalize()),
            Pred::Imp(a, b) => Pred::imp(a.normalize(), b.normalize()),
            p => p.clone(),
        }
    }
}

/// `theta ; sigma`: apply `theta` first, then `sigma`.
pub fn compose(theta: &Subst, sigma: &Subst) -> Subst {
    let mut out: Subst = theta.iter().map(|(x, t)| (x.clone(), t.subst(sigma))).collect();
    for (y, t) in sigma {
        out.entry(y.clone()).or_insert_with(|| t.clone());
    }
    out
}

// Precedence levels used by the printer; higher binds tighter.
fn prec(p: &Pred) -> u8 {
    match p {
        Pred::Imp(..) | Pred::Iff(..) => 1,
        Pred::Or(_) => 2,
        Pred::And(_) => 3,
        Pred::Not(_) => 4,
        Pred::Rel(..) => 5,
        Pred::Arith(ArithOp::Add | ArithOp::Sub, ..) => 6,
        Pred::Arith(ArithOp::Mul, ..) => 7,
        Pred::App(..) => 8,
        Pred::Int(n) if *n < 0 => 8,
        _ => 9,
    }
}

struct Paren<'a>(&'a Pred, u8);

impl fmt::Display for Paren<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if prec(self.0) < self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Surface syntax; the output re-parses with [`crate::frontend::parse_pred`].
impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pred::Bool(true) => f.write_str("true"),
            Pred::Bool(false) => f.write_str("false"),
            Pred::Int(n) => write!(f, "{n}"),
            Pred::Var(x) => write!(f, "{x}"),
            Pred::App(m, a) => write!(f, "{} {}", m.name, Paren(a, 9)),
            Pred::Arith(op, a, b) => {
                let p = prec(self);
                write!(f, "{} {} {}", Paren(a, p), op.symbol(), Paren(b, p + 1))
            }
            Pred::Rel(r, a, b) => write!(f, "{} {} {}", Paren(a, 6), r.symbol(), Paren(b, 6)),
            Pred::Not(a) => write!(f, "not {}", Paren(a, 5)),
            Pred::And(ps) if ps.is_empty() => f.write_str("true"),
            Pred::Or(ps) if ps.is_empty() => f.write_str("false"),
            Pred::And(ps) | Pred::Or(ps) => {
                let sep = if matches!(self, Pred::And(_)) { " && " } else { " || " };
                let p = prec(self);
                for (i, q) in ps.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    write!(f, "{}", Paren(q, p + 1))?;
                }
                Ok(())
            }
            Pred::Iff(a, b) => write!(f, "{} <=> {}", Paren(a, 2), Paren(b, 2)),
            Pred::Imp(a, b) => write!(f, "{} => {}", Paren(a, 2), Paren(b, 2)),
            Pred::KVar(k, theta) => {
                write!(f, "${k}")?;
                let shown: Vec<_> = theta.iter().filter(|(x, t)| !matches!(t, Pred::Var(y) if y == *x)).collect();
                if !shown.is_empty() {
                    f.write_str("[")?;
                    for (i, (x, t)) in shown.iter().enumerate() {
                        if i > 0 {
                            f.write_str(", ")?;
                        }
                        write!(f, "{x} := {t}")?;
                    }
                    f.write_str("]")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Debug for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
