//! Human-readable summary printed by `gliq check`.

use std::fmt::Write;

use gliq_core::check::Verdict;
use gliq_core::report::ReportDocument;

pub fn render(doc: &ReportDocument) -> String {
    let mut out = String::new();
    let w = &mut out;
    if doc.holes.is_empty() {
        let _ = writeln!(w, "{}: no gradual refinements", doc.file);
    }
    for h in &doc.holes {
        let _ = writeln!(
            w,
            "{} at {} in `{}`: {{{}:{} | {}?}}",
            h.id,
            h.span,
            h.owner,
            h.binder,
            h.sort,
            if h.static_part == "true" { String::new() } else { format!("{} && ", h.static_part) }
        );
        let c = &h.counts;
        let _ = writeln!(
            w,
            "  candidates: all {}, sensible {}, local {}, specific {}",
            c.all, c.sensible, c.local, c.specific
        );
        for oid in &h.occurrences {
            let o = doc.occurrences.iter().find(|o| &o.id == oid).expect("occurrence record");
            if o.scs.is_empty() {
                let _ = writeln!(w, "  {} at {}: no safe concretization", o.id, o.span);
            } else {
                let _ = writeln!(w, "  {} at {}: {} safe: {}", o.id, o.span, o.scs.len(), o.scs.join(" | "));
            }
        }
        let statics = if h.static_solutions.is_empty() { "none".to_string() } else { h.static_solutions.join(" | ") };
        let _ = writeln!(w, "  static solutions: {statics}");
    }
    for defs in doc.inferred.iter().take(1) {
        for d in defs {
            let _ = writeln!(w, "{} :: {}", d.name, d.ty);
        }
    }
    if doc.inferred.len() > 1 {
        let _ = writeln!(w, "({} combined typings, first shown)", doc.inferred.len());
    }
    for d in &doc.diagnostics {
        let _ = writeln!(w, "{d}");
    }
    let m = &doc.metrics;
    let sols: Vec<String> = m.sols.iter().map(|n| n.to_string()).collect();
    let _ = writeln!(
        w,
        "ND {} GRAD {} OCCS {} CANDS {} SENS {} LOCAL {} PRECISE {} PARTS {}/{} INSTAN {} SOLS [{}] STATIC {} TIME {:.2}s",
        m.nd,
        m.grad,
        m.occs,
        m.cands,
        m.sens,
        m.local,
        m.precise,
        m.parts_gradual,
        m.parts_total,
        m.instan,
        sols.join(","),
        m.static_solutions,
        m.time
    );
    let _ = writeln!(
        w,
        "{}",
        match doc.verdict {
            Verdict::Safe => "gradually well-typed",
            Verdict::Unsafe => "not gradually well-typed",
        }
    );
    out
}
