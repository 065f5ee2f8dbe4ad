//! Gradual liquid inference: every hole occurrence is concretized with each
//! surviving candidate, and each combination is handed to the liquid solver.
//! Valid combinations are the safe concretizations of the program.

mod candidates;
mod partition;
mod precision;

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use serde::Serialize;

use crate::constraints::{ConstraintSystem, OccurrenceId};
use crate::lang::{Constraint, ConstraintId, Pred, Solution, SourceId};
use crate::smt::{Smt, SmtError};
use crate::solver::{initial_solution, solve};
use crate::templates::TemplateSet;

pub use candidates::{candidates, candidates_for, Candidate, CandidateOptions, CandidateSet, Stage, StageCounts};
pub use partition::{partition, Partition};
pub use precision::{gamma, type_precision};

#[derive(Clone, Copy, Debug)]
pub struct GradualOptions {
    /// Maximum number of qualifiers conjoined in one candidate.
    pub depth: usize,
    /// Solve independent groups of constraints separately.
    pub partition: bool,
    pub sensibility: bool,
    /// Offer `true` as a candidate.
    pub with_true: bool,
    /// Worker threads; 0 picks the available parallelism.
    pub jobs: usize,
    /// Per-partition limit on the assignments checked.
    pub max_assignments: u64,
    /// Per-partition limit on the stored solutions of valid assignments.
    pub keep_solutions: usize,
}

impl Default for GradualOptions {
    fn default() -> Self {
        GradualOptions {
            depth: 1,
            partition: true,
            sensibility: true,
            with_true: true,
            jobs: 0,
            max_assignments: 1_000_000,
            keep_solutions: 64,
        }
    }
}

impl GradualOptions {
    /// Settings of the brute-force reference: one joint product over all
    /// occurrences and no syntactic filtering.
    pub fn oracle(self) -> Self {
        GradualOptions { partition: false, sensibility: false, ..self }
    }

    fn workers(&self) -> usize {
        match self.jobs {
            0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
            n => n,
        }
    }
}

/// Progress notifications emitted while inference runs.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Event {
    Candidates { source: SourceId, counts: StageCounts },
    PartitionStarted { partition: usize, gradual: bool, total: u64 },
    Checked { partition: usize, index: u64, valid: bool },
    PartitionFinished { partition: usize, valid: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assignment {
    /// Position in the mixed-radix enumeration of the partition.
    pub index: u64,
    /// Candidate index (into the source's candidate set) per occurrence of
    /// the partition, in partition order.
    pub choice: Vec<usize>,
    /// The liquid solution found for this concretization, if kept.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solution: Option<Solution>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartitionOutcome {
    /// Size of the assignment space.
    pub total: u64,
    pub checked: u64,
    pub truncated: bool,
    /// Assignments skipped because the solver failed on them.
    pub skipped: u64,
    /// Valid assignments in enumeration order. A partition without holes
    /// has a single, empty assignment when it solves.
    pub valid: Vec<Assignment>,
    /// For a partition without holes: the constraints that fail.
    pub failing: Vec<ConstraintId>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradualResult {
    pub candidates: BTreeMap<SourceId, CandidateSet>,
    pub partitions: Vec<Partition>,
    pub outcomes: Vec<PartitionOutcome>,
    /// Safe concretizations per occurrence, as candidate indices.
    pub sc: BTreeMap<OccurrenceId, Vec<usize>>,
    /// Candidates that work for every occurrence of a source at once.
    pub static_solutions: BTreeMap<SourceId, Vec<usize>>,
}

impl GradualResult {
    /// Every partition has at least one valid assignment.
    pub fn ok(&self) -> bool {
        self.outcomes.iter().all(|o| !o.valid.is_empty())
    }

    pub fn gradual_partitions(&self) -> impl Iterator<Item = (&Partition, &PartitionOutcome)> {
        self.partitions.iter().zip(&self.outcomes).filter(|(p, _)| p.is_gradual())
    }

    /// The safe concretizations of an occurrence as predicates over the
    /// source's declaration scope.
    pub fn sc_preds(&self, cs: &ConstraintSystem, o: OccurrenceId) -> Vec<&Pred> {
        let set = &self.candidates[&cs.occurrence(o).source];
        self.sc[&o].iter().map(|&i| &set.candidates[i].pred).collect()
    }
}

/// Candidate sets for every source of the system.
pub fn all_candidates(
    smt: &Smt,
    cs: &ConstraintSystem,
    templates: &TemplateSet,
    opts: &GradualOptions,
    on_event: &(dyn Fn(Event) + Sync),
) -> Result<BTreeMap<SourceId, CandidateSet>, SmtError> {
    let copts = CandidateOptions { depth: opts.depth, sensibility: opts.sensibility, with_true: opts.with_true };
    let mut out = BTreeMap::new();
    for s in &cs.sources {
        let set = candidates(smt, templates, s, copts)?;
        on_event(Event::Candidates { source: s.id, counts: set.counts() });
        out.insert(s.id, set);
    }
    Ok(out)
}

/// Per-partition data needed to check one assignment.
struct Space<'a> {
    part: &'a Partition,
    constraints: Vec<&'a Constraint>,
    /// (constraint, source) of each occurrence, in partition order.
    slots: Vec<(ConstraintId, SourceId)>,
    /// Surviving candidate indices per occurrence.
    radix: Vec<Vec<usize>>,
    total: u64,
    limit: u64,
    initial: Solution,
}

impl Space<'_> {
    /// Mixed-radix decoding; the first occurrence is the most significant digit.
    fn decode(&self, mut index: u64) -> Vec<usize> {
        let mut choice = vec![0; self.radix.len()];
        for (j, r) in self.radix.iter().enumerate().rev() {
            let n = r.len() as u64;
            choice[j] = r[(index % n) as usize];
            index /= n;
        }
        choice
    }

    fn check(
        &self,
        smt: &Smt,
        sets: &BTreeMap<SourceId, CandidateSet>,
        choice: &[usize],
    ) -> Result<(bool, Vec<ConstraintId>, Solution), SmtError> {
        let fill: HashMap<(ConstraintId, SourceId), &Pred> =
            self.slots.iter().zip(choice).map(|(&(c, s), &i)| ((c, s), &sets[&s].candidates[i].pred)).collect();
        let concrete: Vec<Constraint> = self
            .constraints
            .iter()
            .map(|c| {
                c.map_refinements(&mut |r| match &r.hole {
                    Some(h) => r.fill(fill[&(c.id, h.source)]),
                    None => r.clone(),
                })
            })
            .collect();
        let res = solve(smt, &concrete, self.initial.clone())?;
        Ok((res.ok(), res.failing, res.solution))
    }
}

/// Run gradual inference over a constraint system.
pub fn infer(
    smt: &Smt,
    cs: &ConstraintSystem,
    templates: &TemplateSet,
    opts: &GradualOptions,
    on_event: &(dyn Fn(Event) + Sync),
) -> Result<GradualResult, SmtError> {
    let sets = all_candidates(smt, cs, templates, opts, on_event)?;
    let partitions = partition(cs, opts.partition);
    let spaces: Vec<Space> = partitions
        .iter()
        .map(|part| {
            let slots: Vec<_> = part
                .occurrences
                .iter()
                .map(|&o| {
                    let occ = cs.occurrence(o);
                    (occ.constraint, occ.source)
                })
                .collect();
            let radix: Vec<Vec<usize>> = slots.iter().map(|(_, s)| sets[s].surviving()).collect();
            let total = radix.iter().fold(1u64, |acc, r| acc.saturating_mul(r.len() as u64));
            Space {
                part,
                constraints: part.constraints.iter().map(|&c| cs.constraint(c)).collect(),
                slots,
                radix,
                total,
                limit: total.min(opts.max_assignments.max(1)),
                initial: initial_solution(part.kvars.iter().map(|&k| cs.kvar(k)), templates),
            }
        })
        .collect();
    for sp in &spaces {
        on_event(Event::PartitionStarted { partition: sp.part.id, gradual: sp.part.is_gradual(), total: sp.total });
        if sp.limit < sp.total {
            log::warn!("partition {} has {} assignments; checking the first {}", sp.part.id, sp.total, sp.limit);
        }
    }

    // One global job counter over the concatenated assignment spaces.
    let offsets: Vec<u64> = spaces
        .iter()
        .scan(0u64, |acc, sp| {
            let start = *acc;
            *acc += sp.limit;
            Some(start)
        })
        .collect();
    let grand_total: u64 = spaces.iter().map(|sp| sp.limit).sum();
    let next = AtomicU64::new(0);
    let skipped: Mutex<Vec<usize>> = Mutex::new(Vec::new());
    type Found = (usize, u64, Vec<usize>, bool, Vec<ConstraintId>, Solution);
    let found: Mutex<Vec<Found>> = Mutex::new(Vec::new());
    let workers = opts.workers().min(grand_total.max(1) as usize);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| {
                let mut local = Vec::new();
                loop {
                    let g = next.fetch_add(1, Ordering::Relaxed);
                    if g >= grand_total {
                        break;
                    }
                    let p = offsets.partition_point(|&o| o <= g) - 1;
                    let index = g - offsets[p];
                    let sp = &spaces[p];
                    let choice = sp.decode(index);
                    match sp.check(smt, &sets, &choice) {
                        Ok((valid, failing, sol)) => {
                            on_event(Event::Checked { partition: p, index, valid });
                            if valid || !sp.part.is_gradual() {
                                local.push((p, index, choice, valid, failing, sol));
                            }
                        }
                        Err(e) => {
                            // Conservatively treat the concretization as invalid.
                            log::warn!("skipping assignment {index} of partition {p}: {e}");
                            on_event(Event::Checked { partition: p, index, valid: false });
                            skipped.lock().unwrap().push(p);
                        }
                    }
                }
                found.lock().unwrap().extend(local);
            });
        }
    });
    let mut found = found.into_inner().unwrap();
    found.sort_by_key(|f| (f.0, f.1));
    let mut outcomes: Vec<PartitionOutcome> = spaces
        .iter()
        .map(|sp| PartitionOutcome {
            total: sp.total,
            checked: sp.limit,
            truncated: sp.limit < sp.total,
            skipped: 0,
            valid: Vec::new(),
            failing: Vec::new(),
        })
        .collect();
    for p in skipped.into_inner().unwrap() {
        outcomes[p].skipped += 1;
    }
    for (p, index, choice, valid, failing, sol) in found {
        let out = &mut outcomes[p];
        if valid {
            let keep = out.valid.len() < opts.keep_solutions.max(1);
            out.valid.push(Assignment { index, choice, solution: keep.then_some(sol) });
        } else {
            out.failing = failing;
        }
    }
    for (sp, out) in spaces.iter().zip(&outcomes) {
        on_event(Event::PartitionFinished { partition: sp.part.id, valid: out.valid.len() });
    }

    let mut sc: BTreeMap<OccurrenceId, Vec<usize>> = BTreeMap::new();
    for (part, out) in partitions.iter().zip(&outcomes) {
        for (j, &o) in part.occurrences.iter().enumerate() {
            let mut seen: Vec<usize> = out.valid.iter().map(|a| a.choice[j]).collect();
            seen.sort_unstable();
            seen.dedup();
            sc.insert(o, seen);
        }
    }

    let mut static_solutions = BTreeMap::new();
    for s in &cs.sources {
        let keep = sets[&s.id]
            .surviving()
            .into_iter()
            .filter(|&q| {
                partitions.iter().zip(&outcomes).all(|(part, out)| {
                    let mine: Vec<usize> = (0..part.occurrences.len())
                        .filter(|&j| cs.occurrence(part.occurrences[j]).source == s.id)
                        .collect();
                    mine.is_empty() || out.valid.iter().any(|a| mine.iter().all(|&j| a.choice[j] == q))
                })
            })
            .collect();
        static_solutions.insert(s.id, keep);
    }

    Ok(GradualResult { candidates: sets, partitions, outcomes, sc, static_solutions })
}
