//! Validity checking through an external SMT solver.
//!
//! Queries are canonicalized and cached; solver processes are pooled so that
//! worker threads each talk to their own session.

pub mod encode;
mod session;
pub mod sort;

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use serde::Serialize;
use thiserror::Error;

use crate::lang::{Env, Name, Pred, Rel, Sort};

pub use encode::Query;
use session::{Answer, Session};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SmtError {
    #[error("could not start solver `{0}`: {1}")]
    Launch(String, String),
    #[error("solver I/O failed: {0}")]
    Io(String),
    #[error("solver reported {0}")]
    Solver(String),
    #[error("ill-sorted query: {0}")]
    Sort(#[from] sort::SortError),
}

#[derive(Clone, Debug)]
pub struct SmtConfig {
    /// Command line of a solver reading SMT-LIB from stdin.
    pub cmd: String,
    pub timeout_ms: u64,
}

impl Default for SmtConfig {
    fn default() -> Self {
        SmtConfig { cmd: "z3 -in".to_string(), timeout_ms: 2000 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SmtStats {
    pub queries: u64,
    pub cache_hits: u64,
    pub unknowns: u64,
    pub restarts: u64,
}

pub struct Smt {
    config: SmtConfig,
    pool: Mutex<Vec<Session>>,
    cache: Mutex<HashMap<String, bool>>,
    queries: AtomicU64,
    cache_hits: AtomicU64,
    unknowns: AtomicU64,
    restarts: AtomicU64,
}

impl Smt {
    /// Start the solver once to make sure the command works.
    pub fn new(config: SmtConfig) -> Result<Self, SmtError> {
        let first = Session::start(&config.cmd, config.timeout_ms)?;
        Ok(Smt {
            config,
            pool: Mutex::new(vec![first]),
            cache: Mutex::new(HashMap::new()),
            queries: AtomicU64::new(0),
            cache_hits: AtomicU64::new(0),
            unknowns: AtomicU64::new(0),
            restarts: AtomicU64::new(0),
        })
    }

    pub fn stats(&self) -> SmtStats {
        SmtStats {
            queries: self.queries.load(Ordering::Relaxed),
            cache_hits: self.cache_hits.load(Ordering::Relaxed),
            unknowns: self.unknowns.load(Ordering::Relaxed),
            restarts: self.restarts.load(Ordering::Relaxed),
        }
    }

    /// Whether the query is valid. An `unknown` answer counts as invalid.
    pub fn valid(&self, q: &Query) -> Result<bool, SmtError> {
        let lookup = |x: &Name| q.vars.get(x).copied().or_else(|| q.exists.iter().find(|(y, _)| y == x).map(|p| p.1));
        for h in &q.hyps {
            sort::check_formula(h, &lookup)?;
        }
        sort::check_formula(&q.goal, &lookup)?;
        let canon = q.canonical();
        let key = canon.key();
        if let Some(&v) = self.cache.lock().unwrap().get(&key) {
            self.cache_hits.fetch_add(1, Ordering::Relaxed);
            return Ok(v);
        }
        self.queries.fetch_add(1, Ordering::Relaxed);
        let answer = self.run(&canon.script())?;
        if answer == Answer::Unknown {
            self.unknowns.fetch_add(1, Ordering::Relaxed);
            log::warn!("solver returned unknown; treating as invalid: {key}");
        }
        let valid = answer == Answer::Unsat;
        self.cache.lock().unwrap().insert(key, valid);
        Ok(valid)
    }

    fn run(&self, script: &str) -> Result<Answer, SmtError> {
        let popped = self.pool.lock().unwrap().pop();
        let mut session = match popped {
            Some(s) => s,
            None => Session::start(&self.config.cmd, self.config.timeout_ms)?,
        };
        let answer = match session.check(script) {
            Err(SmtError::Io(e)) => {
                // The process died; restart it once.
                log::warn!("solver session failed ({e}); restarting");
                self.restarts.fetch_add(1, Ordering::Relaxed);
                session = Session::start(&self.config.cmd, self.config.timeout_ms)?;
                session.check(script)?
            }
            other => other?,
        };
        self.pool.lock().unwrap().push(session);
        Ok(answer)
    }

    /// `hyps ⇒ goal` for all values of `vars`.
    pub fn implies(&self, vars: &BTreeMap<Name, Sort>, hyps: &[Pred], goal: &Pred) -> Result<bool, SmtError> {
        self.valid(&Query::implication(vars.clone(), hyps.to_vec(), goal.clone()))
    }

    /// Locality of `p` on `ν`: for every value of the scope variables some
    /// `ν` satisfies `p`. Measure applications are replaced by fresh
    /// existentially bound integers (lengths are non-negative).
    pub fn is_local(&self, p: &Pred, binder: Sort, scope: &[(Name, Sort)]) -> Result<bool, SmtError> {
        let (body, apps) = encode::abstract_applications(p);
        let mut exists = vec![(Name::nu(), binder)];
        let mut conj = Vec::new();
        for (x, app) in &apps {
            exists.push((x.clone(), Sort::Int));
            if matches!(app, Pred::App(m, _) if m.name.as_str() == "len") {
                conj.push(Pred::rel(Rel::Le, Pred::Int(0), Pred::Var(x.clone())));
            }
        }
        conj.push(body);
        let vars = scope.iter().filter(|(x, _)| !x.is_nu()).cloned().collect();
        self.valid(&Query { vars, hyps: Vec::new(), goal: Pred::and(conj), exists })
    }

    /// Validity of the subtyping `env ⊢ {ν | lhs} <: {ν | rhs}` at base sort
    /// `sort`. All refinements must be free of liquid variables and holes.
    pub fn check_sub(&self, env: &Env, sort: Sort, lhs: &Pred, rhs: &Pred) -> Result<bool, SmtError> {
        self.valid(&embed(env, sort, lhs, rhs))
    }
}

/// Build the verification condition of a base subtyping.
pub fn embed(env: &Env, sort: Sort, lhs: &Pred, rhs: &Pred) -> Query {
    let mut vars = BTreeMap::new();
    let mut hyps = Vec::new();
    for b in &env.bindings {
        let Some(s) = b.ty.sort() else { continue };
        let r = b.ty.refinement().expect("base type has a refinement");
        debug_assert!(r.is_precise(), "holes must be filled before embedding");
        if b.guard {
            hyps.push(r.pred.clone());
        } else {
            vars.insert(b.name.clone(), s);
            hyps.push(r.pred.subst1(&Name::nu(), Pred::Var(b.name.clone())));
        }
    }
    vars.insert(Name::nu(), sort);
    hyps.push(lhs.clone());
    Query::implication(vars, hyps, rhs.clone())
}
