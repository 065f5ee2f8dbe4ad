//! The report document: a schema-versioned, self-describing record of one
//! run, serialized as JSON and embedded in the HTML export.

mod html;

use serde::{Deserialize, Serialize};

use crate::check::{show_pred, stage_name, CheckOptions, Checked, Metrics, Verdict};
use crate::diagnostics::Diagnostic;
use crate::gradual::{Stage, StageCounts};
use crate::lang::{Sort, Span};

pub use html::to_html;

pub const SCHEMA_VERSION: u32 = 1;

/// Stored valid assignments per partition are capped at this many.
pub const MAX_LISTED_CONCRETIZATIONS: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub file: String,
    /// Full program text; spans index into it.
    pub source: String,
    pub options: ReportOptions,
    pub verdict: Verdict,
    pub holes: Vec<HoleRecord>,
    pub occurrences: Vec<OccurrenceRecord>,
    pub partitions: Vec<PartitionRecord>,
    pub constraints: Vec<ConstraintRecord>,
    pub metrics: Metrics,
    /// Definition types under combined solutions, capped.
    pub inferred: Vec<Vec<DefType>>,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub depth: usize,
    pub partition: bool,
    pub sensibility: bool,
    pub minimal_templates: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoleRecord {
    /// `?N`.
    pub id: String,
    pub span: Span,
    pub owner: String,
    /// Name of the refined value; predicate strings use it.
    pub binder: String,
    pub sort: Sort,
    pub static_part: String,
    pub scope: Vec<(String, Sort)>,
    pub occurrences: Vec<String>,
    pub counts: StageCounts,
    /// Candidates that survive every filter, in enumeration order.
    pub candidates: Vec<String>,
    /// Candidates safe for every occurrence at once.
    pub static_solutions: Vec<String>,
    /// When no candidate survives: the filter that removed the last ones.
    pub emptied_at: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OccurrenceRecord {
    /// `oN`.
    pub id: String,
    pub hole: String,
    pub constraint: u32,
    pub span: Span,
    pub partition: usize,
    pub counts: StageCounts,
    /// Safe concretizations, in enumeration order.
    pub scs: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionRecord {
    pub id: usize,
    pub gradual: bool,
    pub constraints: Vec<u32>,
    pub occurrences: Vec<String>,
    pub total: u64,
    pub checked: u64,
    pub truncated: bool,
    pub valid: usize,
    /// Valid joint assignments, one predicate per occurrence (capped).
    pub concretizations: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintRecord {
    pub id: u32,
    pub span: Span,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefType {
    pub name: String,
    pub ty: String,
}

impl ReportDocument {
    pub fn new(c: &Checked, opts: &CheckOptions) -> ReportDocument {
        let cs = &c.system;
        let res = &c.result;
        let part_of =
            |o| res.partitions.iter().position(|p| p.occurrences.contains(&o)).expect("occurrence in a partition");
        let holes = cs
            .sources
            .iter()
            .map(|s| {
                let set = &res.candidates[&s.id];
                let counts = set.counts();
                let emptied_at = (counts.specific == 0).then(|| {
                    let stage = if counts.sensible == 0 {
                        Stage::Sensible
                    } else if counts.local == 0 {
                        Stage::Local
                    } else {
                        Stage::Specific
                    };
                    stage_name(stage).to_string()
                });
                HoleRecord {
                    id: s.id.to_string(),
                    span: s.span,
                    owner: s.owner.clone(),
                    binder: s.binder.clone(),
                    sort: s.sort,
                    static_part: show_pred(s, &s.static_part),
                    scope: s.scope.iter().map(|(x, t)| (x.to_string(), *t)).collect(),
                    occurrences: cs.occurrences_of(s.id).map(|o| o.id.to_string()).collect(),
                    counts,
                    candidates: set.surviving().iter().map(|&i| show_pred(s, &set.candidates[i].pred)).collect(),
                    static_solutions: res.static_solutions[&s.id]
                        .iter()
                        .map(|&i| show_pred(s, &set.candidates[i].pred))
                        .collect(),
                    emptied_at,
                }
            })
            .collect();
        let occurrences = cs
            .occurrences
            .iter()
            .map(|o| {
                let s = cs.source(o.source);
                OccurrenceRecord {
                    id: o.id.to_string(),
                    hole: o.source.to_string(),
                    constraint: o.constraint.0,
                    span: cs.constraint(o.constraint).span,
                    partition: part_of(o.id),
                    counts: res.candidates[&o.source].counts(),
                    scs: res.sc_preds(cs, o.id).into_iter().map(|p| show_pred(s, p)).collect(),
                }
            })
            .collect();
        let partitions = res
            .partitions
            .iter()
            .zip(&res.outcomes)
            .map(|(p, out)| PartitionRecord {
                id: p.id,
                gradual: p.is_gradual(),
                constraints: p.constraints.iter().map(|c| c.0).collect(),
                occurrences: p.occurrences.iter().map(|o| o.to_string()).collect(),
                total: out.total,
                checked: out.checked,
                truncated: out.truncated,
                valid: out.valid.len(),
                concretizations: out
                    .valid
                    .iter()
                    .take(MAX_LISTED_CONCRETIZATIONS)
                    .map(|a| {
                        p.occurrences
                            .iter()
                            .zip(&a.choice)
                            .map(|(&o, &i)| {
                                let src = cs.occurrence(o).source;
                                show_pred(cs.source(src), &res.candidates[&src].candidates[i].pred)
                            })
                            .collect()
                    })
                    .collect(),
            })
            .collect();
        let constraints =
            cs.constraints.iter().map(|k| ConstraintRecord { id: k.id.0, span: k.span, text: k.to_string() }).collect();
        ReportDocument {
            schema_version: SCHEMA_VERSION,
            file: c.program.file.clone(),
            source: c.program.text.clone(),
            options: ReportOptions {
                depth: opts.depth,
                partition: opts.partition,
                sensibility: opts.sensibility,
                minimal_templates: opts.minimal_templates,
            },
            verdict: if c.ok() { Verdict::Safe } else { Verdict::Unsafe },
            holes,
            occurrences,
            partitions,
            constraints,
            metrics: c.metrics.clone(),
            inferred: c
                .inferred
                .iter()
                .map(|defs| defs.iter().map(|(n, t)| DefType { name: n.to_string(), ty: t.to_string() }).collect())
                .collect(),
            diagnostics: c.diagnostics.clone(),
        }
    }

    /// Recompute the metrics from the per-hole and per-occurrence records.
    /// Returns the first mismatching field.
    pub fn check_metrics(&self) -> Result<(), String> {
        let m = &self.metrics;
        let sum = |f: fn(&StageCounts) -> usize| self.holes.iter().map(|h| f(&h.counts)).sum::<usize>();
        let gradual: Vec<&PartitionRecord> = self.partitions.iter().filter(|p| p.gradual).collect();
        let checks: [(&str, bool); 11] = [
            ("grad", m.grad == self.holes.len()),
            ("occs", m.occs == self.occurrences.len()),
            ("cands", m.cands == sum(|c| c.all)),
            ("sens", m.sens == sum(|c| c.sensible)),
            ("local", m.local == sum(|c| c.local)),
            ("precise", m.precise == sum(|c| c.specific)),
            ("parts_gradual", m.parts_gradual == gradual.len()),
            ("parts_total", m.parts_total == self.partitions.len()),
            ("instan", m.instan == gradual.iter().map(|p| p.total).sum::<u64>()),
            ("sols", m.sols == self.occurrences.iter().map(|o| o.scs.len()).collect::<Vec<_>>()),
            ("static", m.static_solutions == self.holes.iter().map(|h| h.static_solutions.len()).sum::<usize>()),
        ];
        match checks.iter().find(|(_, ok)| !ok) {
            Some((name, _)) => Err(format!("metric `{name}` does not match the report data")),
            None => Ok(()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<ReportDocument, serde_json::Error> {
        serde_json::from_str(text)
    }
}
