use std::path::PathBuf;

use thiserror::Error;

use crate::logic::{ParseFormulaError, ValidationError};

#[derive(Debug, Error)]
pub enum LogicError {
    #[error("formula {formula} expands to {size} branches (cap {cap})")]
    BranchExplosion { formula: String, size: usize, cap: usize },
    #[error("proper name `{0}` must be mapped to a person variable before scoring")]
    UnmappedName(String),
    #[error("atom `{atom}` has an unsupported arity")]
    UnsupportedArity { atom: String },
    #[error(transparent)]
    Syntax(#[from] ParseFormulaError),
    #[error("invalid formula: {}", join(.0))]
    Invalid(Vec<ValidationError>),
}

fn join(errors: &[ValidationError]) -> String {
    errors.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("corpus config: {0}")]
    Config(String),
    #[error("duplicate lexicon entry `{surface}` ({pos})")]
    DuplicateEntry { surface: String, pos: String },
    #[error("unknown visual category `{0}`")]
    UnknownCategory(String),
    #[error("unknown POS tag `{0}`")]
    UnknownPos(String),
    #[error("template `{template}`: {message}")]
    Template { template: String, message: String },
    #[error("count reconciliation failed: {0}")]
    Reconciliation(String),
    #[error("`{sentence}` is not in the grammar's language")]
    NotInLanguage { sentence: String },
    #[error("unknown word `{0}`")]
    UnknownWord(String),
    #[error("grammar: {0}")]
    Grammar(String),
    #[error("no semantics rule for `{0}`")]
    NoSemantics(String),
    #[error("`{sentence}` does not match a {expected} template")]
    WrongTemplate { sentence: String, expected: &'static str },
    #[error("record {id}: {message}")]
    InvalidRecord { id: String, message: String },
    #[error("corpus line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("corpus schema `{found}` is not supported (expected `{expected}`)")]
    Schema { found: String, expected: String },
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("trace has no frames")]
    Empty,
    #[error("trace must have at least 2 frames, found {0}")]
    TooShort(usize),
    #[error("frame {0} has no detections")]
    EmptyFrame(usize),
    #[error("trace schema `{found}` is not supported (expected `{expected}`)")]
    Schema { found: String, expected: String },
    #[error("no visual-setup recipe for {0}")]
    NoRecipe(String),
    #[error("invalid scene script: {0}")]
    Script(String),
    #[error("invalid noise model: {0}")]
    Noise(String),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Error)]
pub enum RecognitionError {
    #[error("library config: {0}")]
    Config(String),
    #[error("missing threshold `{0}`")]
    MissingThreshold(&'static str),
    #[error("predicate `{predicate}`: {message}")]
    Transition { predicate: String, message: String },
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("`{predicate}` takes {expected} detection(s), got {got}")]
    Arity {
        predicate: String,
        expected: usize,
        got: usize,
    },
    #[error("`{predicate}` has no state {state}")]
    State { predicate: String, state: usize },
    #[error("tracks differ in length: {0} and {1} frames")]
    TrackLength(usize, usize),
}

#[derive(Debug, Error)]
pub enum InferenceError {
    #[error("joint state space of {size} per frame exceeds the cap of {cap}; use beam_score")]
    StateSpaceTooLarge { size: u128, cap: u128 },
    #[error("instance has {size} assignment sequences, above the brute-force limit {limit}")]
    InstanceTooLarge { size: u128, limit: u128 },
    #[error("trace must have at least 2 frames, found {0}")]
    TooShort(usize),
    #[error("frame {0} has no detections")]
    EmptyFrame(usize),
    #[error("beam width must be at least 1")]
    ZeroBeam,
    #[error("interpretations share no atoms")]
    NothingShared,
    #[error("need at least 2 interpretations, got {0}")]
    TooFewInterpretations(usize),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Recognition(#[from] RecognitionError),
}

/// Crate-level error.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Recognition(#[from] RecognitionError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error("{0}")]
    Task(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
