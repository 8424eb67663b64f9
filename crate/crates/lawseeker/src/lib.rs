//! lawseeker discovers equational and conditional laws about a user-written
//! theory: datatypes, recursive function definitions, and a staged
//! signature. It enumerates terms bottom-up by size, keeps only the ones
//! irreducible under the laws found so far, groups them by their behavior
//! on a random test suite, confirms candidate equations on fresh cases, and
//! prints what survives.
//!
//! The crate is organized around the pipeline:
//!
//! - [`frontend`] parses and checks the theory file format;
//! - [`term`] and [`rewrite`] provide terms, the term order, and the
//!   rewrite-based pruning store;
//! - [`eval`] interprets definitions, generates test data, and computes
//!   term fingerprints, with observational equality where declared;
//! - [`explore`] runs the staged discovery loop and conditional-law pass;
//! - [`oracle`] re-checks emitted laws exhaustively over finite universes;
//! - [`report`] renders text and JSON output;
//! - [`theories`] bundles the example corpus.

pub mod eval;
pub mod explore;
pub mod frontend;
pub mod oracle;
pub mod report;
pub mod rewrite;
pub mod rng;
pub mod term;
pub mod theories;
pub mod theory;

pub use explore::{explore, ExplorationReport};
pub use frontend::{check_theory, load_theory, parse_theory};
pub use theory::{Config, Theory};
