//! Shared vocabulary: predicates, refinement types, environments,
//! expressions, constraints and solutions.

mod constraint;
mod expr;
mod pred;
mod types;

pub use constraint::*;
pub use expr::*;
pub use pred::*;
pub use types::*;
