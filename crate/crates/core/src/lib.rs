//! Definability workbench for the two-sorted first-order theory of points
//! and intervals over linear orders.
//!
//! Modules:
//! - [`relations`]: the 26 relation symbols, R+, reverses and duals.
//! - [`structures`]: finite chains and region semantics.
//! - [`formulas`]: formula AST, parser, printer, dual transform, finite evaluation.
//! - [`decide`]: endpoint translation, quantifier elimination, test-point oracles.
//! - [`rulebase`]: definability rules and their verification.
//! - [`closure`]: closure, spectra, harvest tables and table diffs.
//! - [`zeta`]: truth-preserving relation catalog and verifier.
//! - [`cli`]: command-line front end.

pub mod cli;
pub mod closure;
pub mod decide;
pub mod formulas;
pub mod relations;
pub mod rulebase;
pub mod structures;
pub mod zeta;
