//! Static HTML export. The page embeds the report as JSON and renders it
//! client-side; rechecking is only enabled when served by `gliq serve`.

use super::ReportDocument;

const PAGE: &str = include_str!("page.html");

/// Escape a string for inclusion in HTML text.
fn escape_html(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// A self-contained HTML document for the report.
pub fn to_html(doc: &ReportDocument) -> String {
    // `<` is escaped so that the data can never close the script element.
    let json = serde_json::to_string(doc).expect("report serializes").replace('<', "\\u003c");
    let summary = if doc.holes.is_empty() {
        "no gradual refinements".to_string()
    } else {
        format!("{} gradual refinements, {} occurrences", doc.holes.len(), doc.occurrences.len())
    };
    PAGE.replace("{{TITLE}}", &escape_html(&doc.file))
        .replace("{{SUMMARY}}", &escape_html(&summary))
        .replace("{{REPORT}}", &json)
}
