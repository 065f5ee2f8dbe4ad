//! Parsing and normalization of `.gl` sources into the core program.

mod lexer;
mod normalize;
mod parser;
mod program;
mod surface;

pub use normalize::{is_anf, is_temp, TEMP_PREFIX};
pub use program::*;
pub use surface::*;

use crate::diagnostics::{Diagnostic, Diagnostics};
use crate::lang::{Name, Pred, Sort, Subst};

/// Parse the surface syntax of a program.
pub fn parse(text: &str) -> Result<SourceProgram, Diagnostic> {
    parser::Parser::new(text)?.program()
}

/// Parse and normalize a program.
pub fn load(file: &str, text: &str) -> Result<Program, Diagnostics> {
    let sp = parse(text)?;
    normalize::normalize(file, text, &sp)
}

/// Parse a closed predicate (used in tests and tooling).
pub fn parse_pred(text: &str) -> Result<Pred, Diagnostic> {
    let mut p = parser::Parser::new(text)?;
    let pred = p.pred()?;
    p.expect_eof()?;
    Ok(pred)
}

/// Parse a predicate where `binder` (and `v`) denote the refined value and
/// the other names resolve against `scope` by surface or core spelling.
pub fn parse_pred_in(text: &str, binder: &str, scope: &[(Name, Sort)]) -> Result<Pred, Diagnostic> {
    let pred = parse_pred(text)?;
    if pred.mentions(&Name::new(parser::HOLE_MARK)) {
        return Err(Diagnostic::error(None, "`?` is not allowed here"));
    }
    let mut sigma = Subst::new();
    for x in pred.free_vars() {
        if x.is_nu() || x.as_str() == binder || x.as_str() == "v" {
            sigma.insert(x, Pred::nu());
        } else if !scope.iter().any(|(y, _)| *y == x) {
            return Err(Diagnostic::error(None, format!("unknown variable `{x}`")));
        }
    }
    Ok(pred.subst(&sigma))
}
