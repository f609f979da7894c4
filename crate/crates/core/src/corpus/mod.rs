//! Ambiguous-sentence corpus: lexicon, templates, grammar, and the
//! enumeration of every sentence's candidate interpretations.

pub mod grammar;
pub mod lexicon;
pub mod semantics;
pub mod templates;

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CorpusError;
use crate::logic::{normalize, validate, Formula, DEFAULT_BRANCH_CAP};

pub use grammar::{parse_all, Grammar, Tree};
pub use lexicon::{Lexicon, LexiconEntry, Pos, VisualCategory};
pub use semantics::{gloss, interpret, quantified_interpretations};
pub use templates::{default_templates, load_templates, Template};

pub const CORPUS_SCHEMA: &str = "lava-corpus/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AmbiguityClass {
    PP,
    VP,
    Conjunction,
    LogicalForm,
    Anaphora,
    Ellipsis,
}

impl AmbiguityClass {
    pub const ALL: [AmbiguityClass; 6] = [
        AmbiguityClass::PP,
        AmbiguityClass::VP,
        AmbiguityClass::Conjunction,
        AmbiguityClass::LogicalForm,
        AmbiguityClass::Anaphora,
        AmbiguityClass::Ellipsis,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AmbiguityClass::PP => "PP",
            AmbiguityClass::VP => "VP",
            AmbiguityClass::Conjunction => "Conjunction",
            AmbiguityClass::LogicalForm => "LogicalForm",
            AmbiguityClass::Anaphora => "Anaphora",
            AmbiguityClass::Ellipsis => "Ellipsis",
        }
    }

    /// Record-id prefix.
    pub fn prefix(self) -> &'static str {
        match self {
            AmbiguityClass::PP => "pp",
            AmbiguityClass::VP => "vp",
            AmbiguityClass::Conjunction => "conj",
            AmbiguityClass::LogicalForm => "lf",
            AmbiguityClass::Anaphora => "ana",
            AmbiguityClass::Ellipsis => "ell",
        }
    }

    pub fn family(self) -> &'static str {
        match self {
            AmbiguityClass::PP | AmbiguityClass::VP | AmbiguityClass::Conjunction => "syntax",
            AmbiguityClass::LogicalForm => "semantics",
            AmbiguityClass::Anaphora | AmbiguityClass::Ellipsis => "discourse",
        }
    }
}

impl fmt::Display for AmbiguityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for AmbiguityClass {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AmbiguityClass::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| CorpusError::Config(format!("unknown ambiguity class `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpretationRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parse: Option<String>,
    pub formula: Formula,
    pub gloss: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub id: String,
    #[serde(rename = "class")]
    pub ambiguity_class: AmbiguityClass,
    pub text: String,
    pub interpretations: Vec<InterpretationRecord>,
}

impl SentenceRecord {
    /// Checks the record invariants: 2–3 pairwise distinct interpretations
    /// whose formulas validate and normalize.
    pub fn check(&self) -> Result<(), CorpusError> {
        let bad = |message: String| CorpusError::InvalidRecord {
            id: self.id.clone(),
            message,
        };
        let n = self.interpretations.len();
        if !(2..=3).contains(&n) {
            return Err(bad(format!("{n} interpretations (expected 2 or 3)")));
        }
        for (i, a) in self.interpretations.iter().enumerate() {
            if let Err(errs) = validate(&a.formula) {
                let msgs: Vec<String> = errs.iter().map(ToString::to_string).collect();
                return Err(bad(format!("{}: {}", a.id, msgs.join("; "))));
            }
            for b in normalize(&a.formula, DEFAULT_BRANCH_CAP)? {
                if let Err(errs) = validate(&b.to_formula()) {
                    return Err(bad(format!("{} branch: {}", a.id, errs[0])));
                }
            }
            if self.interpretations[..i].iter().any(|b| b.formula == a.formula) {
                return Err(bad(format!("{} repeats an earlier formula", a.id)));
            }
        }
        Ok(())
    }
}

/// Candidate readings of one sentence, dispatched on its class.
pub fn readings(
    class: AmbiguityClass,
    text: &str,
    grammar: &Grammar,
    lexicon: &Lexicon,
) -> Result<Vec<semantics::Reading>, CorpusError> {
    match class {
        AmbiguityClass::PP | AmbiguityClass::VP | AmbiguityClass::Conjunction => {
            semantics::syntactic(text, grammar, lexicon)
        }
        AmbiguityClass::LogicalForm => semantics::quantified(text, lexicon),
        AmbiguityClass::Anaphora => semantics::anaphora(text, grammar, lexicon),
        AmbiguityClass::Ellipsis => semantics::ellipsis(text, grammar, lexicon),
    }
}

fn to_records(readings: &[semantics::Reading], sentence_id: &str) -> Vec<InterpretationRecord> {
    readings
        .iter()
        .enumerate()
        .map(|(i, r)| InterpretationRecord {
            id: format!("{sentence_id}.{i}"),
            parse: r.parse.as_ref().map(ToString::to_string),
            formula: r.formula(),
            gloss: r.gloss.clone(),
        })
        .collect()
}

/// One interpretation per antecedent of the pronoun in "S. It is JJ.".
pub fn resolve_anaphora(
    discourse: &str,
    grammar: &Grammar,
    lexicon: &Lexicon,
) -> Result<Vec<InterpretationRecord>, CorpusError> {
    Ok(to_records(
        &semantics::anaphora(discourse, grammar, lexicon)?,
        "anaphora",
    ))
}

/// Object-join and subject-join readings of "NNP V NNP. Also NNP.".
pub fn expand_ellipsis(
    discourse: &str,
    grammar: &Grammar,
    lexicon: &Lexicon,
) -> Result<Vec<InterpretationRecord>, CorpusError> {
    Ok(to_records(
        &semantics::ellipsis(discourse, grammar, lexicon)?,
        "ellipsis",
    ))
}

/// Instantiates every template and attaches each sentence's readings.
/// Fails if any template misses its target count or a record is invalid.
pub fn expand_templates(
    templates: &[Template],
    lexicon: &Lexicon,
    grammar: &Grammar,
) -> Result<Vec<SentenceRecord>, CorpusError> {
    let mut records = Vec::new();
    let mut deltas = Vec::new();
    let mut per_class: std::collections::BTreeMap<AmbiguityClass, usize> = Default::default();
    for t in templates {
        let texts = t.expand(lexicon)?;
        if texts.len() != t.target_count {
            deltas.push(format!(
                "{} `{}`: generated {}, expected {} ({:+})",
                t.ambiguity_class,
                t.pos_sequence,
                texts.len(),
                t.target_count,
                texts.len() as i64 - t.target_count as i64
            ));
        }
        for text in texts {
            let n = per_class.entry(t.ambiguity_class).or_default();
            *n += 1;
            let id = format!("{}-{:03}", t.ambiguity_class.prefix(), n);
            let rs = readings(t.ambiguity_class, &text, grammar, lexicon)?;
            let record = SentenceRecord {
                interpretations: to_records(&rs, &id),
                id,
                ambiguity_class: t.ambiguity_class,
                text,
            };
            record.check()?;
            records.push(record);
        }
    }
    if !deltas.is_empty() {
        return Err(CorpusError::Reconciliation(deltas.join("; ")));
    }
    Ok(records)
}

/// The full corpus from the bundled lexicon, grammar and templates.
pub fn generate_corpus() -> Result<Vec<SentenceRecord>, CorpusError> {
    expand_templates(
        &default_templates(),
        &Lexicon::default_lexicon(),
        &Grammar::default_grammar(),
    )
}

#[derive(Serialize)]
struct LineOut<'a> {
    schema: &'static str,
    #[serde(flatten)]
    record: &'a SentenceRecord,
}

#[derive(Deserialize)]
struct LineIn {
    #[serde(default)]
    schema: Option<String>,
    #[serde(flatten)]
    record: SentenceRecord,
}

pub fn write_corpus<W: Write>(records: &[SentenceRecord], mut out: W) -> Result<(), CorpusError> {
    let io = |e: std::io::Error| CorpusError::Io {
        path: "<stream>".into(),
        source: e,
    };
    for r in records {
        let line = serde_json::to_string(&LineOut {
            schema: CORPUS_SCHEMA,
            record: r,
        })
        .expect("records serialize");
        writeln!(out, "{line}").map_err(io)?;
    }
    Ok(())
}

pub fn read_corpus<R: BufRead>(input: R) -> Result<Vec<SentenceRecord>, CorpusError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| CorpusError::Malformed {
            line: i + 1,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: LineIn = serde_json::from_str(&line).map_err(|e| CorpusError::Malformed {
            line: i + 1,
            message: e.to_string(),
        })?;
        if let Some(s) = parsed.schema {
            if s != CORPUS_SCHEMA {
                return Err(CorpusError::Schema {
                    found: s,
                    expected: CORPUS_SCHEMA.into(),
                });
            }
        }
        out.push(parsed.record);
    }
    Ok(out)
}

pub fn save_corpus(records: &[SentenceRecord], path: &Path) -> Result<(), CorpusError> {
    let io = |e| CorpusError::Io {
        path: path.to_path_buf(),
        source: e,
    };
    let file = std::fs::File::create(path).map_err(io)?;
    let mut w = std::io::BufWriter::new(file);
    write_corpus(records, &mut w)?;
    w.flush().map_err(io)
}

pub fn load_corpus(path: &Path) -> Result<Vec<SentenceRecord>, CorpusError> {
    let file = std::fs::File::open(path).map_err(|e| CorpusError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    read_corpus(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_corpus_round_trips() {
        let mut buf = Vec::new();
        write_corpus(&[], &mut buf).unwrap();
        assert!(buf.is_empty());
        assert!(read_corpus(&buf[..]).unwrap().is_empty());
    }

    #[test]
    fn unknown_class_is_rejected() {
        let line = r#"{"id":"x-1","class":"Metaphor","text":"t","interpretations":[]}"#;
        assert!(matches!(
            read_corpus(line.as_bytes()),
            Err(CorpusError::Malformed { line: 1, .. })
        ));
    }

    #[test]
    fn foreign_schema_is_rejected() {
        let line = r#"{"schema":"other/9","id":"x-1","class":"PP","text":"t","interpretations":[]}"#;
        assert!(matches!(read_corpus(line.as_bytes()), Err(CorpusError::Schema { .. })));
    }
}
