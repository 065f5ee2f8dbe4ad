//! Shared test support: fixtures, a brute-force finite-domain evaluator that
//! is independent of the SMT backend, a random program generator, and the
//! property checks run both by the property tests and the acceptance target.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gliq_core::check::{Checked, Checker};
use gliq_core::constraints::{generate, ConstraintSystem, OccurrenceId};
use gliq_core::frontend::load;
use gliq_core::frontend::parse_pred_in;
use gliq_core::gradual::{self, GradualOptions, GradualResult};
use gliq_core::lang::*;
use gliq_core::smt::{Smt, SmtConfig};
use gliq_core::solver::{initial_solution, solve};
use gliq_core::templates::{Origin, Template, TemplateSet};

pub fn fixture(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name].iter().collect();
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// One solver process shared by every test in a binary.
pub fn smt() -> &'static Smt {
    static SMT: OnceLock<Smt> = OnceLock::new();
    SMT.get_or_init(|| Smt::new(SmtConfig::default()).expect("z3 on PATH"))
}

/// The occurrence whose constraint is blamed on the first `snippet` after
/// the first match of `after`.
pub fn occurrence(c: &Checked, text: &str, after: &str, snippet: &str) -> OccurrenceId {
    let from = text.find(after).expect("anchor present") + after.len();
    let at = from + text[from..].find(snippet).expect("snippet present");
    c.system
        .occurrences
        .iter()
        .find(|o| c.system.constraint(o.constraint).span.start == at)
        .unwrap_or_else(|| panic!("no occurrence at `{snippet}`"))
        .id
}

/// Whether some safe concretization of `o` is logically equivalent to `pred`.
pub fn has_equivalent(checker: &Checker, c: &Checked, o: OccurrenceId, pred: &str) -> bool {
    let src = c.system.source(c.system.occurrence(o).source);
    let want = parse_pred_in(pred, &src.binder, &src.scope).expect("predicate parses");
    let mut vars: BTreeMap<Name, Sort> = src.scope.iter().cloned().collect();
    vars.insert(Name::nu(), src.sort);
    c.result.sc_preds(&c.system, o).iter().any(|p| {
        checker.smt.implies(&vars, &[(*p).clone()], &want).unwrap()
            && checker.smt.implies(&vars, std::slice::from_ref(&want), p).unwrap()
    })
}

// ---- brute-force evaluation -------------------------------------------------

/// Integer variables range over this interval; list variables are
/// represented by their length in `0..=LEN_MAX`.
pub const LO: i64 = -3;
pub const HI: i64 = 3;
pub const LEN_MAX: i64 = 3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Val {
    I(i64),
    B(bool),
    /// A list, known only through its length.
    L(i64),
}

pub type Model = BTreeMap<Name, Val>;

fn int(v: Option<Val>) -> Option<i64> {
    match v? {
        Val::I(n) | Val::L(n) => Some(n),
        Val::B(_) => None,
    }
}

fn boolean(v: Option<Val>) -> Option<bool> {
    match v? {
        Val::B(b) => Some(b),
        _ => None,
    }
}

/// Evaluate a formula or term; `None` when a variable is unassigned.
/// Nonlinear products are evaluated exactly, which only adds models the
/// solver's uninterpreted encoding also admits.
pub fn eval(p: &Pred, m: &Model) -> Option<Val> {
    Some(match p {
        Pred::Bool(b) => Val::B(*b),
        Pred::Int(n) => Val::I(*n),
        Pred::Var(x) => *m.get(x)?,
        Pred::App(_, a) => Val::I(int(eval(a, m))?),
        Pred::Arith(op, a, b) => {
            let (a, b) = (int(eval(a, m))?, int(eval(b, m))?);
            Val::I(match op {
                ArithOp::Add => a + b,
                ArithOp::Sub => a - b,
                ArithOp::Mul => a * b,
            })
        }
        Pred::Rel(r, a, b) => {
            let (a, b) = (eval(a, m)?, eval(b, m)?);
            match (a, b) {
                (Val::B(x), Val::B(y)) => match r {
                    Rel::Eq => Val::B(x == y),
                    Rel::Ne => Val::B(x != y),
                    _ => return None,
                },
                (Val::L(x), Val::L(y)) if matches!(r, Rel::Eq | Rel::Ne) => {
                    // Distinct lists may share a length; only disequal
                    // lengths decide.
                    if x != y {
                        Val::B(*r == Rel::Ne)
                    } else {
                        return None;
                    }
                }
                (a, b) => Val::B(r.eval(int(Some(a))?, int(Some(b))?)),
            }
        }
        Pred::Not(a) => Val::B(!boolean(eval(a, m))?),
        Pred::And(ps) => {
            let mut all = true;
            for q in ps {
                all &= boolean(eval(q, m))?;
            }
            Val::B(all)
        }
        Pred::Or(ps) => {
            let mut any = false;
            for q in ps {
                any |= boolean(eval(q, m))?;
            }
            Val::B(any)
        }
        Pred::Iff(a, b) => Val::B(boolean(eval(a, m))? == boolean(eval(b, m))?),
        Pred::Imp(a, b) => Val::B(!boolean(eval(a, m))? || boolean(eval(b, m))?),
        Pred::KVar(..) => panic!("liquid variables must be solved before evaluation"),
    })
}

fn domain(s: Sort) -> Vec<Val> {
    match s {
        Sort::Int => (LO..=HI).map(Val::I).collect(),
        Sort::Bool => vec![Val::B(false), Val::B(true)],
        Sort::List => (0..=LEN_MAX).map(Val::L).collect(),
    }
}

/// If some hypothesis defines `x` from already assigned variables
/// (`x == e`, `x <=> e`, `len x == e`), the value it forces.
fn forced(x: &Name, sort: Sort, hyps: &[Pred], m: &Model) -> Option<Val> {
    for h in hyps {
        for c in h.conjuncts() {
            let (lhs, rhs) = match &c {
                Pred::Rel(Rel::Eq, a, b) | Pred::Iff(a, b) => (a.as_ref(), b.as_ref()),
                _ => continue,
            };
            for (a, b) in [(lhs, rhs), (rhs, lhs)] {
                let hit = match (a, sort) {
                    (Pred::Var(y), Sort::Int | Sort::Bool) => y == x,
                    (Pred::App(_, t), Sort::List) => matches!(t.as_ref(), Pred::Var(y) if y == x),
                    _ => false,
                };
                if !hit || b.mentions(x) {
                    continue;
                }
                if let Some(v) = eval(b, m) {
                    return Some(match (sort, v) {
                        (Sort::List, Val::I(n)) => Val::L(n),
                        (_, v) => v,
                    });
                }
            }
        }
    }
    None
}

/// Search for an assignment over the finite domain that satisfies every
/// hypothesis and falsifies the goal.
pub fn countermodel(vars: &[(Name, Sort)], hyps: &[Pred], goal: &Pred) -> Option<Model> {
    fn go(i: usize, vars: &[(Name, Sort)], hyps: &[Pred], goal: &Pred, m: &mut Model) -> bool {
        // Prune on fully assigned hypotheses that already fail.
        for h in hyps {
            if let Some(Val::B(false)) = eval(h, m) {
                return false;
            }
        }
        if i == vars.len() {
            let hyps_hold = hyps.iter().all(|h| eval(h, m) == Some(Val::B(true)));
            return hyps_hold && eval(goal, m) == Some(Val::B(false));
        }
        let (x, s) = &vars[i];
        let values = match forced(x, *s, hyps, m) {
            // Lists have no negative lengths.
            Some(Val::L(n)) if n < 0 => vec![],
            Some(v) => vec![v],
            None => domain(*s),
        };
        for v in values {
            m.insert(x.clone(), v);
            if go(i + 1, vars, hyps, goal, m) {
                return true;
            }
        }
        m.remove(x);
        false
    }
    let mut m = Model::new();
    go(0, vars, hyps, goal, &mut m).then_some(m)
}

/// Variables with their sorts, hypotheses, goal.
pub type Vc = (Vec<(Name, Sort)>, Vec<Pred>, Pred);

/// The verification condition of a filled, solved base subtyping, built
/// independently of the library's own embedding.
pub fn vc_of(c: &Constraint) -> Option<Vc> {
    let ConstraintKind::Sub { env, lhs, rhs } = &c.kind else { return None };
    let mut vars = Vec::new();
    let mut hyps = Vec::new();
    for b in &env.bindings {
        let Some(s) = b.ty.sort() else { continue };
        let p = &b.ty.refinement().unwrap().pred;
        if b.guard {
            hyps.push(p.clone());
        } else {
            vars.push((b.name.clone(), s));
            hyps.push(p.subst1(&Name::nu(), Pred::Var(b.name.clone())));
        }
    }
    vars.push((Name::nu(), lhs.sort().unwrap()));
    hyps.push(lhs.refinement().unwrap().pred.clone());
    Some((vars, hyps, rhs.refinement().unwrap().pred.clone()))
}

// ---- running the engine -----------------------------------------------------

/// A small qualifier set keeping |Q| <= 6 for scopes of up to three
/// integer variables.
pub fn small_templates() -> TemplateSet {
    let t = |pred: Pred, slots: Vec<Sort>| Template { pred, binder: Sort::Int, slots, origin: Origin::User };
    let nu = Pred::nu;
    TemplateSet {
        templates: vec![
            t(Pred::rel(Rel::Lt, Pred::Int(0), nu()), vec![]),
            t(Pred::rel(Rel::Lt, nu(), Pred::Int(0)), vec![]),
            t(Pred::rel(Rel::Eq, nu(), Pred::Int(0)), vec![]),
            t(Pred::rel(Rel::Le, nu(), Pred::Var(Template::slot(0))), vec![Sort::Int]),
        ],
    }
}

pub fn engine_options(partition: bool, jobs: usize) -> GradualOptions {
    GradualOptions {
        depth: 1,
        partition,
        sensibility: partition,
        with_true: true,
        jobs,
        max_assignments: 20_000,
        keep_solutions: usize::MAX,
    }
}

pub struct Run {
    pub system: ConstraintSystem,
    pub result: GradualResult,
}

pub fn run(smt: &Smt, text: &str, opts: &GradualOptions) -> Run {
    let program = load("gen.gl", text).unwrap_or_else(|d| panic!("generated program rejected:\n{text}\n{d}"));
    let system = generate(&program).unwrap_or_else(|d| panic!("generated program rejected:\n{text}\n{d}"));
    let result = gradual::infer(smt, &system, &small_templates(), opts, &|_| {}).expect("inference runs");
    Run { system, result }
}

/// Size of the joint product the oracle would enumerate.
pub fn oracle_size(smt: &Smt, text: &str) -> u64 {
    let opts = GradualOptions { max_assignments: 1, ..engine_options(false, 1) };
    run(smt, text, &opts).result.outcomes.iter().map(|o| o.total).product()
}

// ---- random programs ----------------------------------------------------------

/// Refinement slot of a generated signature.
#[derive(Clone, Debug, PartialEq)]
pub enum Ann {
    Plain,
    Precise(String),
    Hole,
    Weakened(String),
}

impl Ann {
    fn holes(&self) -> usize {
        matches!(self, Ann::Hole | Ann::Weakened(_)) as usize
    }

    fn render(&self, binder: &str) -> String {
        match self {
            Ann::Plain => "Int".into(),
            Ann::Precise(p) => format!("{{{binder}:Int | {p}}}"),
            Ann::Hole => format!("{{{binder}:Int | ?}}"),
            Ann::Weakened(p) => format!("{{{binder}:Int | {p} && ?}}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct GenProgram {
    /// Annotations of `g`'s two parameters and result.
    pub anns: [Ann; 3],
    pub helper: Option<String>,
    pub body: String,
    pub client: Option<(i64, i64)>,
    pub uses_refined_prims: bool,
}

impl GenProgram {
    pub fn holes(&self) -> usize {
        self.anns.iter().map(Ann::holes).sum()
    }

    pub fn render(&self) -> String {
        let mut s = String::from("assume pos :: {a:Int | 0 < a} -> {r:Int | r == a}\n");
        if let Some(h) = &self.helper {
            s.push_str(&format!("def h z = {h}\n"));
        }
        s.push_str(&format!(
            "sig g :: {} -> {} -> {}\ndef g x y = {}\n",
            self.anns[0].render("x"),
            self.anns[1].render("y"),
            self.anns[2].render("v"),
            self.body
        ));
        if let Some((a, b)) = self.client {
            s.push_str(&format!("def client = g {} {}\n", lit(a), lit(b)));
        }
        s
    }

    /// Every annotation replaced by `?`.
    pub fn embedded(&self) -> GenProgram {
        GenProgram { anns: [Ann::Hole, Ann::Hole, Ann::Hole], ..self.clone() }
    }
}

fn lit(n: i64) -> String {
    if n < 0 {
        format!("(0 - {})", -n)
    } else {
        n.to_string()
    }
}

/// Qualifier instances (of [`small_templates`]) over the given variables,
/// written with `b` as the refined value.
fn qualifier_texts(b: &str, scope: &[&str]) -> Vec<String> {
    let mut v = vec![format!("0 < {b}"), format!("{b} < 0"), format!("{b} == 0")];
    v.extend(scope.iter().map(|x| format!("{b} <= {x}")));
    v
}

struct ExprGen<'a> {
    rng: &'a mut ChaCha8Rng,
    nodes: usize,
    budget: usize,
    refined_prims: bool,
    helper: bool,
    refined_used: bool,
}

impl ExprGen<'_> {
    fn atom(&mut self, vars: &[String]) -> String {
        self.nodes += 1;
        if self.rng.gen_bool(0.7) {
            vars.choose(self.rng).unwrap().clone()
        } else {
            lit(self.rng.gen_range(-2..=2))
        }
    }

    fn expr(&mut self, vars: &mut Vec<String>, depth: usize) -> String {
        if depth == 0 || self.nodes + 4 >= self.budget {
            return self.atom(vars);
        }
        self.nodes += 1;
        match self.rng.gen_range(0..9) {
            0 | 1 => self.atom(vars),
            2 => format!("({} + {})", self.expr(vars, depth - 1), self.expr(vars, depth - 1)),
            3 => format!("({} - {})", self.expr(vars, depth - 1), self.expr(vars, depth - 1)),
            4 | 5 => {
                let op = ["<", "<=", "=="].choose(self.rng).unwrap();
                let (a, b) = (self.atom(vars), self.atom(vars));
                let t = self.expr(vars, depth - 1);
                let e = self.expr(vars, depth - 1);
                format!("(if {a} {op} {b} then {t} else {e})")
            }
            6 if !vars.iter().any(|v| v == "z") => {
                let bound = self.expr(vars, depth - 1);
                vars.push("z".into());
                let body = self.expr(vars, depth - 1);
                vars.pop();
                format!("(let z = {bound} in {body})")
            }
            7 if self.refined_prims => {
                self.refined_used = true;
                if self.rng.gen_bool(0.5) {
                    format!("(1 / {})", self.expr(vars, depth - 1))
                } else {
                    format!("(pos {})", self.expr(vars, depth - 1))
                }
            }
            8 if self.helper => format!("(h {})", self.expr(vars, depth - 1)),
            _ => self.atom(vars),
        }
    }
}

/// Generate a random program: a helper without signature (inferred), a
/// function `g` with a two-argument signature carrying at most `max_holes`
/// holes, and optionally a client call. At most 25 expression nodes.
pub fn gen_program(seed: u64, max_holes: usize, refined_prims: bool) -> GenProgram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let helper_on = rng.gen_bool(0.4);
    let mut helper = None;
    let mut nodes = 0;
    let mut refined_used = false;
    if helper_on {
        let mut g =
            ExprGen { rng: &mut rng, nodes: 0, budget: 6, refined_prims: false, helper: false, refined_used: false };
        helper = Some(g.expr(&mut vec!["z".to_string()], 2));
        nodes = g.nodes;
    }
    let mut g = ExprGen { rng: &mut rng, nodes, budget: 25, refined_prims, helper: helper_on, refined_used: false };
    let body = g.expr(&mut vec!["x".to_string(), "y".to_string()], 4);
    refined_used |= g.refined_used;
    let scopes: [&[&str]; 3] = [&[], &["x"], &["x", "y"]];
    let mut anns = [Ann::Plain, Ann::Plain, Ann::Plain];
    let mut holes = 0;
    for (i, ann) in anns.iter_mut().enumerate() {
        let b = ["x", "y", "v"][i];
        let quals = qualifier_texts(b, scopes[i]);
        *ann = match rng.gen_range(0..4) {
            0 => Ann::Plain,
            1 => Ann::Precise(quals.choose(&mut rng).unwrap().clone()),
            2 if holes < max_holes => {
                holes += 1;
                Ann::Hole
            }
            3 if holes < max_holes => {
                holes += 1;
                Ann::Weakened(quals.choose(&mut rng).unwrap().clone())
            }
            _ => Ann::Plain,
        };
    }
    let client = rng.gen_bool(0.5).then(|| (rng.gen_range(-2..=2), rng.gen_range(-2..=2)));
    GenProgram { anns, helper, body, client, uses_refined_prims: refined_used }
}

// ---- property checks ------------------------------------------------------------

/// Every safe concretization, together with its liquid solution, makes all
/// constraints of its partition valid: the solver agrees and the brute-force
/// evaluator finds no countermodel.
pub fn check_soundness(smt: &Smt, r: &Run) -> Result<(), String> {
    for (part, out) in r.result.partitions.iter().zip(&r.result.outcomes) {
        for a in &out.valid {
            let sol = a.solution.as_ref().ok_or("solution not kept")?;
            let fill: BTreeMap<(ConstraintId, SourceId), Pred> = part
                .occurrences
                .iter()
                .zip(&a.choice)
                .map(|(&o, &i)| {
                    let occ = r.system.occurrence(o);
                    ((occ.constraint, occ.source), r.result.candidates[&occ.source].candidates[i].pred.clone())
                })
                .collect();
            for &cid in &part.constraints {
                let c = r.system.constraint(cid).map_refinements(&mut |rf| match &rf.hole {
                    Some(h) => rf.fill(&fill[&(cid, h.source)]),
                    None => rf.clone(),
                });
                let c = apply_constraint(sol, &c);
                let Some((vars, hyps, goal)) = vc_of(&c) else { continue };
                let ConstraintKind::Sub { env, lhs, rhs } = &c.kind else { unreachable!() };
                let ok = smt
                    .check_sub(
                        env,
                        lhs.sort().unwrap(),
                        &lhs.refinement().unwrap().pred,
                        &rhs.refinement().unwrap().pred,
                    )
                    .map_err(|e| e.to_string())?;
                if !ok {
                    return Err(format!("re-check of {c} failed"));
                }
                if let Some(m) = countermodel(&vars, &hyps, &goal) {
                    return Err(format!("brute force refutes {c}: {m:?}"));
                }
            }
        }
    }
    Ok(())
}

/// Per-occurrence safe concretizations of a run, as predicates.
pub fn sc_sets(r: &Run) -> BTreeMap<u32, Vec<Pred>> {
    r.system
        .occurrences
        .iter()
        .map(|o| (o.id.0, r.result.sc_preds(&r.system, o.id).into_iter().cloned().collect()))
        .collect()
}

/// Plain liquid inference over the whole system: the result and the
/// definition types under its solution.
pub fn plain_infer(smt: &Smt, r: &Run) -> (bool, Vec<(Name, RType)>) {
    let a0 = initial_solution(&r.system.kvars, &small_templates());
    let res = solve(smt, &r.system.constraints, a0).expect("solver runs");
    let types = r.system.def_types.iter().map(|(n, t)| (n.clone(), apply_type(&res.solution, t))).collect();
    (res.ok(), types)
}

/// Definition types under the first valid assignment of every partition.
pub fn gradual_types(r: &Run) -> Option<Vec<(Name, RType)>> {
    let mut sol = Solution::new();
    for out in &r.result.outcomes {
        sol.extend(out.valid.first()?.solution.clone()?);
    }
    Some(r.system.def_types.iter().map(|(n, t)| (n.clone(), apply_type(&sol, t))).collect())
}

// ---- properties over generated programs -------------------------------------

/// Upper bound on the assignments a property may enumerate; larger programs
/// are skipped (and counted) rather than truncated.
pub const ENUM_CAP: u64 = 3000;

#[derive(Debug, PartialEq)]
pub enum Outcome {
    Pass,
    Skip,
    Fail(String),
}

impl From<Result<(), String>> for Outcome {
    fn from(r: Result<(), String>) -> Self {
        r.map_or_else(Outcome::Fail, |()| Outcome::Pass)
    }
}

fn fail(text: &str, msg: impl std::fmt::Display) -> Outcome {
    Outcome::Fail(format!("{msg}\nprogram:\n{text}"))
}

/// Assignments the partitioned engine would check.
pub fn engine_size(smt: &Smt, text: &str) -> u64 {
    let opts = GradualOptions { max_assignments: 1, ..engine_options(true, 1) };
    run(smt, text, &opts).result.outcomes.iter().map(|o| o.total).sum()
}

pub fn prop_soundness(smt: &Smt, seed: u64) -> Outcome {
    let text = gen_program(seed, 2, true).render();
    if engine_size(smt, &text) > ENUM_CAP {
        return Outcome::Skip;
    }
    let r = run(smt, &text, &engine_options(true, 0));
    check_soundness(smt, &r).map_err(|e| format!("{e}\nprogram:\n{text}")).into()
}

/// The engine finds no safe concretization exactly when the oracle finds none.
pub fn prop_completeness(smt: &Smt, seed: u64) -> Outcome {
    let text = gen_program(seed, 2, true).render();
    if oracle_size(smt, &text) > ENUM_CAP {
        return Outcome::Skip;
    }
    let engine = run(smt, &text, &engine_options(true, 0)).result.ok();
    let oracle = run(smt, &text, &engine_options(false, 0)).result.ok();
    if engine == oracle {
        Outcome::Pass
    } else {
        fail(&text, format!("engine ok = {engine}, oracle ok = {oracle}"))
    }
}

/// Per-occurrence safe concretizations and static solutions agree with the
/// single joint enumeration whenever the latter has any valid assignment.
pub fn prop_partition_equivalence(smt: &Smt, seed: u64) -> Outcome {
    let text = gen_program(seed, 2, true).render();
    if oracle_size(smt, &text) > ENUM_CAP {
        return Outcome::Skip;
    }
    let engine = run(smt, &text, &engine_options(true, 0));
    let oracle = run(smt, &text, &engine_options(false, 0));
    if !oracle.result.ok() {
        return Outcome::Pass;
    }
    let (a, b) = (sc_sets(&engine), sc_sets(&oracle));
    if a != b {
        return fail(&text, format!("partitioned {a:?}\noracle {b:?}"));
    }
    if engine.result.static_solutions != oracle.result.static_solutions {
        return fail(&text, "static solutions differ");
    }
    Outcome::Pass
}

/// On hole-free programs gradual inference is plain liquid inference.
pub fn prop_conservative_extension(smt: &Smt, seed: u64) -> Outcome {
    let text = gen_program(seed, 0, true).render();
    let r = run(smt, &text, &engine_options(true, 0));
    let (ok, types) = plain_infer(smt, &r);
    if r.result.ok() != ok {
        return fail(&text, format!("gradual ok = {}, plain ok = {ok}", r.result.ok()));
    }
    if ok && gradual_types(&r).as_ref() != Some(&types) {
        return fail(&text, format!("types differ: {:?} vs {types:?}", gradual_types(&r)));
    }
    Outcome::Pass
}

/// Replacing every refinement of a program without refined primitives by
/// `?` always yields a safe concretization.
pub fn prop_embedding(smt: &Smt, seed: u64) -> Outcome {
    let text = gen_program(seed, 0, false).embedded().render();
    if engine_size(smt, &text) > ENUM_CAP {
        return Outcome::Skip;
    }
    if run(smt, &text, &engine_options(true, 0)).result.ok() {
        Outcome::Pass
    } else {
        fail(&text, "no safe concretization")
    }
}

/// Weakening a precise refinement `p` to `p && ?` keeps a checking program
/// checking.
pub fn prop_gradual_guarantee(smt: &Smt, seed: u64) -> Outcome {
    let g = gen_program(seed, 1, true);
    let Some(i) = g.anns.iter().position(|a| matches!(a, Ann::Precise(_))) else { return Outcome::Skip };
    let text = g.render();
    if engine_size(smt, &text) > ENUM_CAP || !run(smt, &text, &engine_options(true, 0)).result.ok() {
        return Outcome::Skip;
    }
    let mut weaker = g.clone();
    let Ann::Precise(p) = &g.anns[i] else { unreachable!() };
    weaker.anns[i] = Ann::Weakened(p.clone());
    let wtext = weaker.render();
    if engine_size(smt, &wtext) > ENUM_CAP {
        return Outcome::Skip;
    }
    if run(smt, &wtext, &engine_options(true, 0)).result.ok() {
        Outcome::Pass
    } else {
        fail(&wtext, format!("weakening `{p}` broke a checking program:\n{text}"))
    }
}

/// The worker count does not change any result.
pub fn prop_determinism(smt: &Smt, seed: u64) -> Outcome {
    let text = gen_program(seed, 2, true).render();
    if engine_size(smt, &text) > ENUM_CAP {
        return Outcome::Skip;
    }
    let key = |r: &Run| {
        let valid: Vec<Vec<Vec<usize>>> =
            r.result.outcomes.iter().map(|o| o.valid.iter().map(|a| a.choice.clone()).collect()).collect();
        (valid, sc_sets(r), r.result.static_solutions.clone())
    };
    let one = key(&run(smt, &text, &engine_options(true, 1)));
    let four = key(&run(smt, &text, &engine_options(true, 4)));
    if one == four {
        Outcome::Pass
    } else {
        fail(&text, "results depend on the worker count")
    }
}

pub type Property = fn(&Smt, u64) -> Outcome;

pub const PROPERTIES: [(&str, Property); 7] = [
    ("soundness", prop_soundness),
    ("completeness", prop_completeness),
    ("conservative extension", prop_conservative_extension),
    ("partition equivalence", prop_partition_equivalence),
    ("embedding", prop_embedding),
    ("static gradual guarantee", prop_gradual_guarantee),
    ("determinism across workers", prop_determinism),
];

/// Run `prop` on consecutive seeds from `first` until `want` programs were
/// evaluated (skips do not count). Returns (evaluated, skipped, failures).
pub fn run_property(smt: &Smt, prop: Property, first: u64, want: usize) -> (usize, usize, Vec<String>) {
    let (mut done, mut skipped, mut failures) = (0, 0, Vec::new());
    let mut seed = first;
    while done < want && skipped < 20 * want {
        match prop(smt, seed) {
            Outcome::Pass => done += 1,
            Outcome::Skip => skipped += 1,
            Outcome::Fail(m) => {
                done += 1;
                failures.push(format!("seed {seed}: {m}"));
            }
        }
        seed += 1;
    }
    (done, skipped, failures)
}

// ---- solver properties ----------------------------------------------------------

/// Pointwise `small ⊆ big`, both drawn from `a0`: `big` keeps each
/// qualifier with probability 1/2 and `small` keeps half of those again.
fn nested_subsets(rng: &mut ChaCha8Rng, a0: &Solution) -> (Solution, Solution) {
    let (mut small, mut big) = (Solution::new(), Solution::new());
    for (k, qs) in a0 {
        let b: Vec<Pred> = qs.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
        let s: Vec<Pred> = b.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
        big.insert(*k, b);
        small.insert(*k, s);
    }
    (small, big)
}

/// `Weaken` only drops qualifiers and is monotone in the solution it reads;
/// `Solve` stops within the total number of initial qualifiers and returns
/// a fixpoint.
pub fn prop_solver(smt: &Smt, seed: u64) -> Outcome {
    use gliq_core::solver::weaken;
    let text = gen_program(seed, 0, true).render();
    let r = run(smt, &text, &GradualOptions { max_assignments: 1, ..engine_options(true, 1) });
    let cs = &r.system.constraints;
    if !cs.iter().any(|c| c.is_sub() && c.head_kvar().is_some()) {
        return Outcome::Skip;
    }
    let a0 = initial_solution(&r.system.kvars, &small_templates());
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let (small, big) = nested_subsets(&mut rng, &a0);
    for c in cs.iter().filter(|c| c.is_sub()) {
        let Some(k) = c.head_kvar() else { continue };
        let w_small = match weaken(smt, &small, c) {
            Ok(w) => w.unwrap(),
            Err(e) => return fail(&text, format!("{e} at {c} under {small:?}")),
        };
        let w_big = weaken(smt, &big, c).unwrap().unwrap();
        if !w_small.iter().all(|q| small[&k].contains(q)) {
            return fail(&text, format!("weaken added a qualifier at {c}"));
        }
        if !w_small.iter().all(|q| w_big.contains(q)) {
            return fail(&text, format!("weaken is not monotone at {c}: {w_small:?} vs {w_big:?}"));
        }
    }
    let bound: usize = a0.values().map(Vec::len).sum();
    let res = solve(smt, cs, a0).unwrap();
    if res.stats.weakenings > bound || res.stats.removed > bound {
        return fail(&text, format!("{:?} exceeds the bound {bound}", res.stats));
    }
    for c in cs.iter().filter(|c| c.is_sub()) {
        let Some(k) = c.head_kvar() else { continue };
        if weaken(smt, &res.solution, c).unwrap().unwrap() != res.solution[&k] {
            return fail(&text, format!("solution is not a fixpoint at {c}"));
        }
    }
    Outcome::Pass
}

fn random_term(rng: &mut ChaCha8Rng) -> Pred {
    match rng.gen_range(0..6) {
        0 => Pred::var("x"),
        1 => Pred::var("y"),
        2 => Pred::len(Pred::var("l")),
        3 => Pred::Int(rng.gen_range(-2..=2)),
        4 => Pred::arith(ArithOp::Add, Pred::var("x"), Pred::var("y")),
        _ => Pred::arith(ArithOp::Sub, Pred::var("x"), Pred::Int(1)),
    }
}

fn random_formula(rng: &mut ChaCha8Rng, depth: usize) -> Pred {
    let atom = |rng: &mut ChaCha8Rng| match rng.gen_range(0..8) {
        0 => Pred::var("b"),
        _ => {
            let r = *[Rel::Lt, Rel::Le, Rel::Eq, Rel::Ne, Rel::Gt, Rel::Ge].choose(rng).unwrap();
            Pred::rel(r, random_term(rng), random_term(rng))
        }
    };
    if depth == 0 {
        return atom(rng);
    }
    match rng.gen_range(0..6) {
        0 => Pred::not(random_formula(rng, depth - 1)),
        1 => Pred::And(vec![random_formula(rng, depth - 1), random_formula(rng, depth - 1)]),
        2 => Pred::Or(vec![random_formula(rng, depth - 1), random_formula(rng, depth - 1)]),
        3 => Pred::imp(random_formula(rng, depth - 1), random_formula(rng, depth - 1)),
        _ => atom(rng),
    }
}

/// A random implication over `x, y: Int`, `b: Bool`, `l: List`.
pub fn random_vc(seed: u64) -> Vc {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vars = vec![
        (Name::new("x"), Sort::Int),
        (Name::new("y"), Sort::Int),
        (Name::new("b"), Sort::Bool),
        (Name::new("l"), Sort::List),
    ];
    let n = rng.gen_range(0..=3);
    let hyps = (0..n).map(|_| random_formula(&mut rng, 1)).collect();
    (vars, hyps, random_formula(&mut rng, 2))
}

/// Whenever brute force finds a countermodel the solver reports the VC
/// invalid. Returns whether a countermodel was found.
pub fn prop_vc(smt: &Smt, seed: u64) -> Result<bool, String> {
    let (vars, hyps, goal) = random_vc(seed);
    let found = countermodel(&vars, &hyps, &goal);
    let sorts: BTreeMap<Name, Sort> = vars.iter().cloned().collect();
    let valid = smt.implies(&sorts, &hyps, &goal).map_err(|e| e.to_string())?;
    match found {
        Some(m) if valid => Err(format!("solver proves {hyps:?} => {goal} but {m:?} refutes it")),
        _ => Ok(found.is_some()),
    }
}
