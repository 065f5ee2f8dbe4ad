//! Gradual liquid type inference for a small ANF functional language.
//!
//! The pipeline: [`frontend`] parses and normalizes a program,
//! [`constraints`] generates and splits subtyping constraints,
//! [`solver`] infers liquid refinements by fixpoint weakening, and
//! [`gradual`] enumerates safe concretizations of imprecise refinements.
//! [`check`] drives a whole program and [`report`] renders the results.

pub mod check;
pub mod constraints;
pub mod diagnostics;
pub mod frontend;
pub mod gradual;
pub mod lang;
pub mod report;
pub mod smt;
pub mod solver;
pub mod templates;
