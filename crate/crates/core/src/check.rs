//! Whole-program checking: frontend, constraint generation, gradual
//! inference, diagnostics and metrics, plus rechecking a program with chosen
//! replacements for its holes.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constraints::{generate, ConstraintSystem, OccurrenceId};
use crate::diagnostics::{Diagnostic, Diagnostics, Severity};
use crate::frontend::{load, parse_pred_in, Program, SourceInfo};
use crate::gradual::{self, Event, GradualOptions, GradualResult, Stage};
use crate::lang::*;
use crate::smt::{Smt, SmtConfig, SmtError, SmtStats};
use crate::solver::{initial_solution, solve};
use crate::templates::TemplateSet;

#[derive(Clone, Debug)]
pub struct CheckOptions {
    pub depth: usize,
    pub partition: bool,
    pub sensibility: bool,
    /// Use the small ordering-only template set (and no `true` candidate).
    pub minimal_templates: bool,
    pub jobs: usize,
    pub max_assignments: u64,
    /// Cap on the combined inferred types listed in the report.
    pub max_types: usize,
    pub smt: SmtConfig,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            depth: 1,
            partition: true,
            sensibility: true,
            minimal_templates: false,
            jobs: 0,
            max_assignments: 1_000_000,
            max_types: 50,
            smt: SmtConfig::default(),
        }
    }
}

impl CheckOptions {
    pub fn gradual(&self) -> GradualOptions {
        GradualOptions {
            depth: self.depth,
            partition: self.partition,
            sensibility: self.sensibility,
            with_true: !self.minimal_templates,
            jobs: self.jobs,
            max_assignments: self.max_assignments,
            keep_solutions: self.max_types.max(1),
        }
    }
}

#[derive(Debug, Error)]
pub enum CheckError {
    /// Parse, scope, shape or sort errors: the program is rejected before
    /// inference.
    #[error("{0}")]
    Program(Diagnostics),
    #[error(transparent)]
    Smt(#[from] SmtError),
}

/// The Table-1 style summary of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Conjunction depth.
    pub nd: usize,
    /// Number of holes in the source.
    pub grad: usize,
    /// Number of hole occurrences in the constraints.
    pub occs: usize,
    pub cands: usize,
    pub sens: usize,
    pub local: usize,
    pub precise: usize,
    pub parts_gradual: usize,
    pub parts_total: usize,
    /// Assignments enumerated over all gradual partitions.
    pub instan: u64,
    /// Safe concretizations per occurrence.
    pub sols: Vec<usize>,
    #[serde(rename = "static")]
    pub static_solutions: usize,
    /// Wall-clock seconds spent in inference, two decimals.
    pub time: f64,
}

impl Metrics {
    pub fn compute(cs: &ConstraintSystem, res: &GradualResult, depth: usize, seconds: f64) -> Metrics {
        let counts: Vec<_> = res.candidates.values().map(|c| c.counts()).collect();
        let gradual: Vec<_> = res.gradual_partitions().collect();
        Metrics {
            nd: depth,
            grad: cs.sources.len(),
            occs: cs.occurrences.len(),
            cands: counts.iter().map(|c| c.all).sum(),
            sens: counts.iter().map(|c| c.sensible).sum(),
            local: counts.iter().map(|c| c.local).sum(),
            precise: counts.iter().map(|c| c.specific).sum(),
            parts_gradual: gradual.len(),
            parts_total: res.partitions.len(),
            instan: gradual.iter().map(|(_, o)| o.total).sum(),
            sols: cs.occurrences.iter().map(|o| res.sc[&o.id].len()).collect(),
            static_solutions: res.static_solutions.values().map(Vec::len).sum(),
            time: (seconds * 100.0).round() / 100.0,
        }
    }
}

/// Result of checking one program.
#[derive(Clone, Debug)]
pub struct Checked {
    pub program: Program,
    pub system: ConstraintSystem,
    pub templates: TemplateSet,
    pub result: GradualResult,
    pub diagnostics: Vec<Diagnostic>,
    pub metrics: Metrics,
    /// Definition types under combined per-partition solutions.
    pub inferred: Vec<Vec<(Name, RType)>>,
    pub smt_stats: SmtStats,
}

impl Checked {
    /// Gradually well-typed: every partition has a safe concretization.
    pub fn ok(&self) -> bool {
        self.result.ok()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Error)
    }
}

/// A predicate over a hole's declaration scope, shown with the hole's binder.
pub fn show_pred(source: &SourceInfo, p: &Pred) -> String {
    p.rename(&Name::nu(), &Name::new(&source.binder)).to_string()
}

/// Checker with a live solver connection.
pub struct Checker {
    pub smt: Smt,
    pub options: CheckOptions,
}

impl Checker {
    pub fn new(options: CheckOptions) -> Result<Self, SmtError> {
        Ok(Checker { smt: Smt::new(options.smt.clone())?, options })
    }

    pub fn check(&self, file: &str, text: &str, on_event: &(dyn Fn(Event) + Sync)) -> Result<Checked, CheckError> {
        let program = load(file, text).map_err(CheckError::Program)?;
        self.check_program(program, on_event)
    }

    pub fn check_program(&self, program: Program, on_event: &(dyn Fn(Event) + Sync)) -> Result<Checked, CheckError> {
        let system = generate(&program).map_err(CheckError::Program)?;
        let templates =
            TemplateSet::new(self.options.minimal_templates, &program.spec_refinements, &program.user_templates);
        let start = Instant::now();
        let result = gradual::infer(&self.smt, &system, &templates, &self.options.gradual(), on_event)?;
        let seconds = start.elapsed().as_secs_f64();
        let metrics = Metrics::compute(&system, &result, self.options.depth, seconds);
        let mut diagnostics = explain(&system, &result);
        diagnostics.extend(self.dead_code(&system, &result)?);
        let inferred = inferred_types(&system, &result, self.options.max_types);
        Ok(Checked { program, system, templates, result, diagnostics, metrics, inferred, smt_stats: self.smt.stats() })
    }

    /// Warn about parameters whose inferred refinement is unsatisfiable in
    /// every kept solution: such a function can never be called.
    fn dead_code(&self, cs: &ConstraintSystem, res: &GradualResult) -> Result<Vec<Diagnostic>, SmtError> {
        let mut out = Vec::new();
        for (part, outcome) in res.partitions.iter().zip(&res.outcomes) {
            let sols: Vec<&Solution> = outcome.valid.iter().filter_map(|a| a.solution.as_ref()).collect();
            if sols.is_empty() {
                continue;
            }
            for &k in &part.kvars {
                let info = cs.kvar(k);
                if !info.origin.starts_with("parameter") {
                    continue;
                }
                let mut vars: BTreeMap<Name, Sort> = info.scope.iter().cloned().collect();
                vars.insert(Name::nu(), info.sort);
                let mut dead = true;
                for sol in &sols {
                    if !self.smt.implies(&vars, &sol[&k], &Pred::ff())? {
                        dead = false;
                        break;
                    }
                }
                if dead {
                    out.push(Diagnostic::warning(
                        info.span,
                        format!(
                            "argument refinement of {} in `{}` is unsatisfiable (dead code)",
                            info.origin, info.owner
                        ),
                    ));
                }
            }
        }
        Ok(out)
    }

    /// Check the program with the holes replaced by the given predicates.
    pub fn recheck(&self, checked: &Checked, req: &RecheckRequest) -> Result<RecheckResponse, RecheckError> {
        let cs = &checked.system;
        let mut by_source: BTreeMap<SourceId, Pred> = BTreeMap::new();
        let mut by_occ: BTreeMap<OccurrenceId, Pred> = BTreeMap::new();
        for (key, text) in &req.substitutions {
            let target = parse_target(key)?;
            let source = match target {
                Target::Source(s) if (s.0 as usize) < cs.sources.len() => cs.source(s),
                Target::Occurrence(o) if (o.0 as usize) < cs.occurrences.len() => cs.source(cs.occurrence(o).source),
                _ => return Err(RecheckError::UnknownTarget(key.clone())),
            };
            let pred = parse_pred_in(text, &source.binder, &source.scope)
                .map_err(|d| RecheckError::Parse { target: key.clone(), message: d.message })?;
            let lookup = |x: &Name| {
                if x.is_nu() {
                    Some(source.sort)
                } else {
                    source.scope.iter().find(|(y, _)| y == x).map(|p| p.1)
                }
            };
            crate::smt::sort::check_formula(&pred, &lookup)
                .map_err(|e| RecheckError::Parse { target: key.clone(), message: e.to_string() })?;
            match target {
                Target::Source(s) => by_source.insert(s, pred),
                Target::Occurrence(o) => by_occ.insert(o, pred),
            };
        }
        let chosen = |o: OccurrenceId| -> Pred {
            let src = cs.occurrence(o).source;
            if let Some(p) = by_occ.get(&o).or_else(|| by_source.get(&src)) {
                return p.clone();
            }
            // Unspecified occurrences take their first safe concretization.
            match checked.result.sc[&o].first() {
                Some(&i) => checked.result.candidates[&src].candidates[i].pred.clone(),
                None => Pred::tt(),
            }
        };
        let mut errors = Vec::new();
        let mut rechecked = Vec::new();
        for part in &checked.result.partitions {
            let affected = part
                .occurrences
                .iter()
                .any(|&o| by_occ.contains_key(&o) || by_source.contains_key(&cs.occurrence(o).source));
            if !affected {
                continue;
            }
            rechecked.push(part.id);
            let fill: BTreeMap<(ConstraintId, SourceId), Pred> = part
                .occurrences
                .iter()
                .map(|&o| {
                    let occ = cs.occurrence(o);
                    ((occ.constraint, occ.source), chosen(o))
                })
                .collect();
            let concrete: Vec<Constraint> = part
                .constraints
                .iter()
                .map(|&c| {
                    cs.constraint(c).map_refinements(&mut |r| match &r.hole {
                        Some(h) => r.fill(&fill[&(c, h.source)]),
                        None => r.clone(),
                    })
                })
                .collect();
            let initial = initial_solution(part.kvars.iter().map(|&k| cs.kvar(k)), &checked.templates);
            let res = solve(&self.smt, &concrete, initial)?;
            for id in res.failing {
                let c = concrete.iter().find(|c| c.id == id).expect("failing constraint is in the partition");
                let vc = apply_constraint(&res.solution, c);
                errors.push(TypeError {
                    span: c.span,
                    constraint: id,
                    vc: vc.to_string(),
                    message: "refinement type error: the subtyping does not hold".to_string(),
                });
            }
        }
        errors.sort_by_key(|e| (e.span.start, e.constraint));
        let verdict = if errors.is_empty() { Verdict::Safe } else { Verdict::Unsafe };
        Ok(RecheckResponse { errors, verdict, partitions: rechecked })
    }
}

enum Target {
    Source(SourceId),
    Occurrence(OccurrenceId),
}

/// `?N` or `sN` names a hole, `oN` an occurrence.
fn parse_target(key: &str) -> Result<Target, RecheckError> {
    let bad = || RecheckError::UnknownTarget(key.to_string());
    let (kind, num) = key.split_at(key.find(|c: char| c.is_ascii_digit()).ok_or_else(bad)?);
    let n: u32 = num.parse().map_err(|_| bad())?;
    match kind {
        "?" | "s" => Ok(Target::Source(SourceId(n))),
        "o" => Ok(Target::Occurrence(OccurrenceId(n))),
        _ => Err(bad()),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RecheckRequest {
    /// Hole (`?N`) or occurrence (`oN`) to the predicate replacing it.
    pub substitutions: BTreeMap<String, String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Safe,
    Unsafe,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeError {
    pub span: Span,
    pub constraint: ConstraintId,
    /// The failing constraint with the substitution and solution applied.
    pub vc: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecheckResponse {
    pub errors: Vec<TypeError>,
    pub verdict: Verdict,
    /// Partitions that were re-solved.
    pub partitions: Vec<usize>,
}

#[derive(Debug, Error)]
pub enum RecheckError {
    #[error("unknown hole or occurrence `{0}`")]
    UnknownTarget(String),
    #[error("bad predicate for `{target}`: {message}")]
    Parse { target: String, message: String },
    #[error(transparent)]
    Smt(#[from] SmtError),
}

/// Errors explaining why inference failed.
fn explain(cs: &ConstraintSystem, res: &GradualResult) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (part, outcome) in res.partitions.iter().zip(&res.outcomes) {
        if !outcome.valid.is_empty() {
            continue;
        }
        if outcome.skipped > 0 {
            out.push(Diagnostic::error(
                None,
                format!(
                    "partition {} could not be decided: the solver failed on {} assignments",
                    part.id, outcome.skipped
                ),
            ));
        }
        if !part.is_gradual() {
            for &c in &outcome.failing {
                let c = cs.constraint(c);
                out.push(Diagnostic::error(c.span, format!("refinement type error: {c}")));
            }
            continue;
        }
        let mut reported = BTreeSet::new();
        for &o in &part.occurrences {
            let occ = cs.occurrence(o);
            let src = cs.source(occ.source);
            let set = &res.candidates[&occ.source];
            let counts = set.counts();
            let why = if counts.specific == 0 {
                let stage = [
                    (Stage::Sensible, counts.sensible),
                    (Stage::Local, counts.local),
                    (Stage::Specific, counts.specific),
                ]
                .into_iter()
                .find(|(_, n)| *n == 0)
                .map(|(s, _)| s)
                .unwrap_or(Stage::All);
                if !reported.insert(occ.source) {
                    continue;
                }
                format!(
                    "no candidate for `{}` at {} survives the {} stage (all {}, sensible {}, local {}, specific {})",
                    src.id,
                    src.span,
                    stage_name(stage),
                    counts.all,
                    counts.sensible,
                    counts.local,
                    counts.specific
                )
            } else {
                format!(
                    "no safe concretization for occurrence {o} of `{}`: the validity stage rejected all {} specific candidates",
                    src.id, counts.specific
                )
            };
            out.push(Diagnostic::error(cs.constraint(occ.constraint).span, why));
        }
    }
    out
}

pub fn stage_name(s: Stage) -> &'static str {
    match s {
        Stage::All => "enumeration",
        Stage::Sensible => "sensibility",
        Stage::Local => "locality",
        Stage::Specific => "specificity",
    }
}

/// Definition types under the cross product of per-partition solutions,
/// capped at `cap` combinations. Holes in signatures are kept.
fn inferred_types(cs: &ConstraintSystem, res: &GradualResult, cap: usize) -> Vec<Vec<(Name, RType)>> {
    let choices: Vec<Vec<&Solution>> = res
        .partitions
        .iter()
        .zip(&res.outcomes)
        .filter(|(p, _)| !p.kvars.is_empty())
        .map(|(_, o)| o.valid.iter().filter_map(|a| a.solution.as_ref()).collect())
        .collect();
    if !res.ok() || choices.iter().any(Vec::is_empty) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut digits = vec![0usize; choices.len()];
    loop {
        let mut sol = Solution::new();
        for (c, &d) in choices.iter().zip(&digits) {
            sol.extend(c[d].iter().map(|(k, v)| (*k, v.clone())));
        }
        out.push(cs.def_types.iter().map(|(n, t)| (n.clone(), apply_type(&sol, t))).collect());
        if out.len() >= cap {
            break;
        }
        // Advance the mixed-radix counter, last digit fastest.
        let mut i = digits.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < choices[i].len() {
                break;
            }
            digits[i] = 0;
        }
    }
    out
}
