//! Grounded disambiguation of structurally ambiguous sentences.
//!
//! The crate generates a corpus of ambiguous sentences with every candidate
//! interpretation, renders each interpretation into a synthetic detection
//! trace, and picks the interpretation that best explains a trace by joint
//! Viterbi decoding over predicate HMMs and per-variable tracker lattices.
//!
//! Modules, bottom up:
//!
//! - [`logic`]: formulas, validation, name mapping, DNF branches.
//! - [`corpus`]: lexicon, templates, chart parser, compositional semantics.
//! - [`perception`]: detections, traces, the scene simulator.
//! - [`recognition`]: the predicate HMM library.
//! - [`inference`]: exact, brute-force and beam MAP decoding.
//! - [`task`]: disambiguation, evaluation and the chance baseline.

pub mod corpus;
pub mod error;
pub mod inference;
pub mod logic;
pub mod perception;
pub mod recognition;
pub mod task;

pub use error::{Error, Result};
