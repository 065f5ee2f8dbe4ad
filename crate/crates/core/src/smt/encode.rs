//! SMT-LIB rendering of predicates and queries.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use crate::lang::{ArithOp, Measure, Name, Pred, Rel, Sort};

/// A validity query: the conjunction of `hyps` implies `goal`, for all values
/// of `vars`. `exists` variables are bound existentially inside the goal.
#[derive(Clone, Debug, PartialEq)]
pub struct Query {
    pub vars: BTreeMap<Name, Sort>,
    pub hyps: Vec<Pred>,
    pub goal: Pred,
    pub exists: Vec<(Name, Sort)>,
}

impl Query {
    pub fn implication(vars: BTreeMap<Name, Sort>, hyps: Vec<Pred>, goal: Pred) -> Self {
        Query { vars, hyps, goal, exists: Vec::new() }
    }

    /// A semantically equivalent query with hypotheses sorted and variables
    /// renamed in order of first occurrence, so equal queries share a key.
    pub fn canonical(&self) -> Query {
        let mut hyps: Vec<Pred> = self.hyps.iter().filter(|h| !h.is_true()).cloned().collect();
        hyps.sort_by_cached_key(|h| h.to_string());
        hyps.dedup();
        let mut order: Vec<Name> = Vec::new();
        let mut note = |p: &Pred| {
            p.visit(&mut |q| {
                if let Pred::Var(x) = q {
                    if !order.contains(x) {
                        order.push(x.clone());
                    }
                }
            })
        };
        for h in &hyps {
            note(h);
        }
        note(&self.goal);
        let mut sigma = BTreeMap::new();
        let mut rename = BTreeMap::new();
        for (i, x) in order.iter().enumerate() {
            let y = Name::new(format!("x{i}"));
            sigma.insert(x.clone(), Pred::Var(y.clone()));
            rename.insert(x.clone(), y);
        }
        let vars = self.vars.iter().filter_map(|(x, s)| rename.get(x).map(|y| (y.clone(), *s))).collect();
        let exists = self.exists.iter().filter_map(|(x, s)| rename.get(x).map(|y| (y.clone(), *s))).collect();
        Query { vars, hyps: hyps.iter().map(|h| h.subst(&sigma)).collect(), goal: self.goal.subst(&sigma), exists }
    }

    /// Text uniquely identifying the (canonical) query.
    pub fn key(&self) -> String {
        let mut s = String::new();
        for (x, t) in &self.vars {
            let _ = write!(s, "{x}:{t};");
        }
        s.push('|');
        for (x, t) in &self.exists {
            let _ = write!(s, "{x}:{t};");
        }
        s.push('|');
        for h in &self.hyps {
            let _ = write!(s, "{h};");
        }
        let _ = write!(s, "|{}", self.goal);
        s
    }

    fn measures(&self) -> BTreeSet<Name> {
        let mut ms = BTreeSet::new();
        for p in self.hyps.iter().chain([&self.goal]) {
            p.visit(&mut |q| {
                if let Pred::App(m, _) = q {
                    if m.name.as_str() != "len" {
                        ms.insert(m.name.clone());
                    }
                }
            });
        }
        ms
    }

    /// Declarations and assertions whose satisfiability refutes the query.
    pub fn script(&self) -> String {
        let mut s = String::new();
        for m in self.measures() {
            let _ = writeln!(s, "(declare-fun {} (List) Int)", symbol(&m));
        }
        for (x, t) in &self.vars {
            let _ = writeln!(s, "(declare-const {} {})", symbol(x), sort(*t));
            if *t == Sort::List {
                let _ = writeln!(s, "(assert (>= (len {}) 0))", symbol(x));
            }
        }
        for h in &self.hyps {
            let _ = writeln!(s, "(assert {})", formula(h));
        }
        let goal = formula(&self.goal);
        if self.exists.is_empty() {
            let _ = writeln!(s, "(assert (not {goal}))");
        } else {
            let binders: Vec<String> =
                self.exists.iter().map(|(x, t)| format!("({} {})", symbol(x), sort(*t))).collect();
            let _ = writeln!(s, "(assert (not (exists ({}) {goal})))", binders.join(" "));
        }
        s
    }
}

pub fn sort(s: Sort) -> &'static str {
    match s {
        Sort::Int => "Int",
        Sort::Bool => "Bool",
        Sort::List => "List",
    }
}

/// Quoted SMT symbol for a name; non-ASCII characters are escaped.
pub fn symbol(x: &Name) -> String {
    let mut s = String::from("|");
    for c in x.as_str().chars() {
        if c.is_ascii_graphic() && c != '|' && c != '\\' {
            s.push(c);
        } else {
            let _ = write!(s, "#u{:x}", c as u32);
        }
    }
    s.push('|');
    s
}

fn measure(m: &Measure) -> String {
    if m.name.as_str() == "len" {
        "len".to_string()
    } else {
        symbol(&m.name)
    }
}

pub fn formula(p: &Pred) -> String {
    let mut s = String::new();
    render(p, &mut s);
    s
}

fn render(p: &Pred, s: &mut String) {
    let nary = |op: &str, ps: &[Pred], unit: &str, s: &mut String| match ps.len() {
        0 => s.push_str(unit),
        1 => render(&ps[0], s),
        _ => {
            let _ = write!(s, "({op}");
            for q in ps {
                s.push(' ');
                render(q, s);
            }
            s.push(')');
        }
    };
    let bin = |op: &str, a: &Pred, b: &Pred, s: &mut String| {
        let _ = write!(s, "({op} ");
        render(a, s);
        s.push(' ');
        render(b, s);
        s.push(')');
    };
    match p {
        Pred::Bool(b) => s.push_str(if *b { "true" } else { "false" }),
        Pred::Int(n) if *n < 0 => {
            let _ = write!(s, "(- {})", n.unsigned_abs());
        }
        Pred::Int(n) => {
            let _ = write!(s, "{n}");
        }
        Pred::Var(x) => s.push_str(&symbol(x)),
        Pred::App(m, a) => {
            let _ = write!(s, "({} ", measure(m));
            render(a, s);
            s.push(')');
        }
        Pred::Arith(op, a, b) => {
            let name = match op {
                ArithOp::Add => "+",
                ArithOp::Sub => "-",
                // Nonlinear products stay uninterpreted.
                ArithOp::Mul if matches!(**a, Pred::Int(_)) || matches!(**b, Pred::Int(_)) => "*",
                ArithOp::Mul => "mul",
            };
            bin(name, a, b, s);
        }
        Pred::Rel(r, a, b) => {
            let op = match r {
                Rel::Eq => "=",
                Rel::Ne => "distinct",
                Rel::Lt => "<",
                Rel::Le => "<=",
                Rel::Gt => ">",
                Rel::Ge => ">=",
            };
            bin(op, a, b, s);
        }
        Pred::Not(a) => {
            s.push_str("(not ");
            render(a, s);
            s.push(')');
        }
        Pred::And(ps) => nary("and", ps, "true", s),
        Pred::Or(ps) => nary("or", ps, "false", s),
        Pred::Iff(a, b) => bin("=", a, b, s),
        Pred::Imp(a, b) => bin("=>", a, b, s),
        Pred::KVar(k, _) => panic!("liquid variable {k} reached the SMT encoder"),
    }
}

/// Replace every measure application by a fresh integer variable, returning
/// the rewritten predicate and the introduced variables.
pub fn abstract_applications(p: &Pred) -> (Pred, Vec<(Name, Pred)>) {
    fn go(p: &Pred, seen: &mut Vec<(Name, Pred)>) -> Pred {
        match p {
            Pred::App(..) => {
                if let Some((x, _)) = seen.iter().find(|(_, q)| q == p) {
                    return Pred::Var(x.clone());
                }
                let x = Name::new(format!("app!{}", seen.len()));
                seen.push((x.clone(), p.clone()));
                Pred::Var(x)
            }
            Pred::Arith(op, a, b) => Pred::arith(*op, go(a, seen), go(b, seen)),
            Pred::Rel(r, a, b) => Pred::rel(*r, go(a, seen), go(b, seen)),
            Pred::Not(a) => Pred::Not(Box::new(go(a, seen))),
            Pred::And(ps) => Pred::And(ps.iter().map(|q| go(q, seen)).collect()),
            Pred::Or(ps) => Pred::Or(ps.iter().map(|q| go(q, seen)).collect()),
            Pred::Iff(a, b) => Pred::iff(go(a, seen), go(b, seen)),
            Pred::Imp(a, b) => Pred::imp(go(a, seen), go(b, seen)),
            other => other.clone(),
        }
    }
    let mut seen = Vec::new();
    let q = go(p, &mut seen);
    (q, seen)
}
