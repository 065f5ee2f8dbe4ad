//! Fixed facts about the example programs: safe concretizations, failure
//! explanations, rechecking, reports and precision.

mod common;

use std::collections::BTreeMap;

use gliq_core::check::*;
use gliq_core::constraints::OccurrenceId;
use gliq_core::gradual::{type_precision, CandidateOptions};
use gliq_core::lang::*;
use gliq_core::report::{to_html, ReportDocument};
use gliq_core::templates::TemplateSet;

fn check(file: &str, opts: CheckOptions) -> (Checker, Checked, String) {
    let text = common::fixture(file);
    let checker = Checker::new(opts).expect("solver starts");
    let checked = checker.check(file, &text, &|_| {}).expect("program checks");
    (checker, checked, text)
}

fn minimal() -> CheckOptions {
    CheckOptions { minimal_templates: true, ..CheckOptions::default() }
}

fn shown(c: &Checked, o: OccurrenceId) -> Vec<String> {
    let src = c.system.source(c.system.occurrence(o).source);
    let mut v: Vec<String> = c.result.sc_preds(&c.system, o).iter().map(|p| show_pred(src, p)).collect();
    v.sort();
    v
}

#[test]
fn divif_safe_concretizations_per_branch() {
    let (_, c, text) = check("divif.gl", minimal());
    let then = common::occurrence(&c, &text, "def divIf", "x else");
    let els = common::occurrence(&c, &text, "def divIf", "(1 - x)");
    assert_eq!(shown(&c, then), ["0 < x"]);
    assert_eq!(shown(&c, els), ["x < 0", "x <= 0"]);
    assert!(c.ok());
}

#[test]
fn divif_oracle_has_two_valid_joint_assignments() {
    let opts = CheckOptions { partition: false, sensibility: false, ..minimal() };
    let (_, c, _) = check("divif.gl", opts);
    assert_eq!(c.result.outcomes.len(), 1);
    assert_eq!(c.result.outcomes[0].total, 16);
    assert_eq!(c.result.outcomes[0].valid.len(), 2);
}

#[test]
fn divif_without_annotation_solves_parameter_to_false() {
    let (checker, c, _) = check("divif_static.gl", CheckOptions::default());
    assert!(c.ok());
    let k = c.system.kvars.iter().find(|k| k.origin.starts_with("parameter")).expect("parameter liquid variable");
    let mut vars: BTreeMap<Name, Sort> = k.scope.iter().cloned().collect();
    vars.insert(Name::nu(), k.sort);
    for out in &c.result.outcomes {
        for a in &out.valid {
            let sol = a.solution.as_ref().unwrap();
            assert!(checker.smt.implies(&vars, &sol[&k.id], &Pred::ff()).unwrap(), "{:?}", sol[&k.id]);
        }
    }
    assert!(c.diagnostics.iter().any(|d| d.message.contains("dead code")));
}

#[test]
fn divif_with_precise_test_checks_statically() {
    let (_, c, _) = check("divif_precise.gl", CheckOptions::default());
    assert!(c.ok());
    assert_eq!(c.errors().count(), 0);
    assert_eq!(c.metrics.grad, 0);
}

#[test]
fn only_pos_has_no_safe_concretization() {
    let (_, c, _) = check("only_pos.gl", CheckOptions::default());
    assert!(!c.ok());
    assert!(c.result.sc.values().all(Vec::is_empty));
    let errors: Vec<_> = c.errors().collect();
    assert_eq!(errors.len(), 1);
    assert!(errors[0].message.contains("validity stage"), "{}", errors[0].message);
}

#[test]
fn idx_depth_one_partitions() {
    let (_, c, _) = check("idx.gl", CheckOptions::default());
    assert_eq!(c.metrics.parts_gradual, 3);
    assert_eq!(c.metrics.static_solutions, 0);
}

#[test]
fn idx_depth_two_incompatible_preconditions() {
    let (checker, c, text) = check("idx.gl", CheckOptions { depth: 2, ..CheckOptions::default() });
    let rec = common::occurrence(&c, &text, "idx t", "(i - 1)");
    let client = common::occurrence(&c, &text, "3] ", "3");
    assert_eq!(c.metrics.static_solutions, 0);
    assert!(common::has_equivalent(&checker, &c, rec, "0 <= i && i < len xs"));
    assert!(common::has_equivalent(&checker, &c, client, "0 < i && i <= len xs"));
    assert!(!common::has_equivalent(&checker, &c, client, "0 <= i && i < len xs"));
    assert!(!common::has_equivalent(&checker, &c, rec, "0 < i && i <= len xs"));
}

fn recheck_idx(pred: &str) -> (RecheckResponse, String) {
    let (checker, c, text) = check("idx.gl", CheckOptions::default());
    let req = RecheckRequest { substitutions: [("?0".to_string(), pred.to_string())].into_iter().collect() };
    (checker.recheck(&c, &req).expect("recheck runs"), text)
}

#[test]
fn recheck_blames_the_client_for_the_strict_bound() {
    let (resp, text) = recheck_idx("0 <= i && i < len xs");
    assert_eq!(resp.verdict, Verdict::Unsafe);
    assert_eq!(resp.errors.len(), 1);
    let span = resp.errors[0].span;
    assert!(text[..span.start].contains("def client"));
    assert_eq!(&text[span.start..span.end], "3");
}

#[test]
fn recheck_blames_the_recursive_call_for_the_shifted_bound() {
    let (resp, text) = recheck_idx("0 < i && i <= len xs");
    assert_eq!(resp.verdict, Verdict::Unsafe);
    assert_eq!(resp.errors.len(), 1);
    let span = resp.errors[0].span;
    assert_eq!(&text[span.start..span.end], "(i - 1)");
}

#[test]
fn recheck_rejects_bad_requests() {
    let (checker, c, _) = check("idx.gl", CheckOptions::default());
    let req =
        |k: &str, p: &str| RecheckRequest { substitutions: [(k.to_string(), p.to_string())].into_iter().collect() };
    assert!(matches!(checker.recheck(&c, &req("?7", "true")), Err(RecheckError::UnknownTarget(_))));
    assert!(matches!(checker.recheck(&c, &req("x1", "true")), Err(RecheckError::UnknownTarget(_))));
    assert!(matches!(checker.recheck(&c, &req("?0", "0 <")), Err(RecheckError::Parse { .. })));
    assert!(matches!(checker.recheck(&c, &req("?0", "zz < i")), Err(RecheckError::Parse { .. })));
    assert!(matches!(checker.recheck(&c, &req("?0", "xs < 0")), Err(RecheckError::Parse { .. })));
    let ok = checker.recheck(&c, &req("o2", "0 < i")).unwrap();
    assert_eq!(ok.partitions.len(), 1);
}

#[test]
fn report_round_trips_and_metrics_recompute() {
    let opts = CheckOptions { depth: 2, ..CheckOptions::default() };
    let (_, c, _) = check("idx.gl", opts.clone());
    let doc = ReportDocument::new(&c, &opts);
    doc.check_metrics().unwrap();
    let back = ReportDocument::from_json(&doc.to_json()).unwrap();
    assert_eq!(back.to_json(), doc.to_json());
    assert_eq!(back.metrics, c.metrics);
    assert_eq!(back.occurrences.len(), 3);
}

#[test]
fn html_of_static_program_states_there_is_nothing_gradual() {
    let opts = CheckOptions::default();
    let (_, c, _) = check("divif_precise.gl", opts.clone());
    let html = to_html(&ReportDocument::new(&c, &opts));
    assert!(html.contains("no gradual refinements"));
    assert!(html.contains("id=\"gliq-report\""));
}

#[test]
fn html_embeds_the_report_without_closing_script() {
    let opts = CheckOptions::default();
    let (_, c, _) = check("idx.gl", opts.clone());
    let doc = ReportDocument::new(&c, &opts);
    let html = to_html(&doc);
    let start = html.find("id=\"gliq-report\">").unwrap() + "id=\"gliq-report\">".len();
    let end = start + html[start..].find("</script>").unwrap();
    let embedded = ReportDocument::from_json(&html[start..end]).unwrap();
    assert_eq!(embedded.to_json(), doc.to_json());
}

mod precision {
    use super::*;

    fn int(p: Pred) -> RType {
        RType::base(Sort::Int, p)
    }

    fn hole(p: Pred) -> RType {
        RType::Base { sort: Sort::Int, refinement: Refinement::gradual(p, SourceId(0)) }
    }

    fn precise(t1: &RType, t2: &RType) -> bool {
        let templates = TemplateSet::new(false, &[], &[]);
        let opts = CandidateOptions { depth: 1, sensibility: true, with_true: true };
        type_precision(common::smt(), &templates, opts, t1, t2).unwrap()
    }

    fn pos() -> Pred {
        Pred::rel(Rel::Lt, Pred::Int(0), Pred::nu())
    }

    #[test]
    fn static_type_is_more_precise_than_unknown() {
        assert!(precise(&int(pos()), &hole(Pred::tt())));
        assert!(!precise(&hole(Pred::tt()), &int(pos())));
    }

    #[test]
    fn bounded_hole_is_more_precise_than_unknown() {
        let nonneg = Pred::rel(Rel::Le, Pred::Int(0), Pred::nu());
        assert!(precise(&hole(nonneg.clone()), &hole(Pred::tt())));
        assert!(!precise(&hole(Pred::tt()), &hole(nonneg)));
    }

    #[test]
    fn precision_is_reflexive() {
        for t in [int(pos()), hole(Pred::tt()), RType::fun("x", hole(Pred::tt()), int(pos()))] {
            assert!(precise(&t, &t));
        }
    }

    #[test]
    fn functions_compare_componentwise() {
        let f = RType::fun("x", int(pos()), int(pos()));
        let g = RType::fun("y", hole(Pred::tt()), hole(Pred::tt()));
        assert!(precise(&f, &g));
        assert!(!precise(&g, &f));
        assert!(!precise(&f, &int(pos())));
    }
}

#[test]
fn tampered_metrics_are_detected() {
    let opts = CheckOptions::default();
    let (_, c, _) = check("idx.gl", opts.clone());
    let mut doc = ReportDocument::new(&c, &opts);
    doc.metrics.sols[0] += 1;
    assert!(doc.check_metrics().is_err());
}
