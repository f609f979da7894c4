use std::collections::BTreeMap;

use serde::Deserialize;

use super::lexicon::{Lexicon, Pos};
use super::AmbiguityClass;
use crate::error::CorpusError;

pub const DEFAULT_TEMPLATES: &str = include_str!("../../data/templates.toml");

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintKind {
    /// No two listed slots hold the same word.
    Distinct,
    /// Listed slots follow the order of their candidate lists, giving
    /// unordered combinations.
    Ascending,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct Constraint {
    pub kind: ConstraintKind,
    pub slots: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum Axis {
    Tuple {
        slots: Vec<String>,
        values: Vec<Vec<String>>,
    },
    Listed {
        slot: String,
        values: Vec<String>,
    },
    Query {
        slot: String,
        #[serde(default)]
        require: Vec<String>,
        #[serde(default)]
        exclude: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct Template {
    #[serde(rename = "class")]
    pub ambiguity_class: AmbiguityClass,
    #[serde(rename = "pattern")]
    pub pos_sequence: String,
    #[serde(rename = "target")]
    pub target_count: usize,
    #[serde(default)]
    pub forms: BTreeMap<String, String>,
    #[serde(default)]
    pub constraints: Vec<Constraint>,
    #[serde(default)]
    pub axis: Vec<Axis>,
}

#[derive(Deserialize)]
struct RawTemplates {
    template: Vec<Template>,
}

pub fn load_templates(text: &str) -> Result<Vec<Template>, CorpusError> {
    let raw: RawTemplates = toml::from_str(text).map_err(|e| CorpusError::Config(e.to_string()))?;
    Ok(raw.template)
}

pub fn default_templates() -> Vec<Template> {
    load_templates(DEFAULT_TEMPLATES).expect("bundled templates are valid")
}

/// POS of a slot name: the name without its index digits.
fn slot_pos(slot: &str) -> Option<Pos> {
    Pos::parse(slot.trim_end_matches(|c: char| c.is_ascii_digit()))
}

#[derive(Debug, Clone, PartialEq)]
enum Piece {
    Slot(String),
    Word(String),
    Group(Vec<Piece>),
}

fn parse_pattern(pattern: &str) -> Result<Vec<Piece>, String> {
    let mut out = Vec::new();
    let mut group: Option<Vec<Piece>> = None;
    for raw in pattern.split_whitespace() {
        let mut tok = raw;
        let opens = tok.starts_with('[');
        if opens {
            if group.is_some() {
                return Err("nested optional group".into());
            }
            group = Some(Vec::new());
            tok = &tok[1..];
        }
        let closes = tok.ends_with(']');
        if closes {
            tok = &tok[..tok.len() - 1];
        }
        let piece = if slot_pos(tok).is_some() {
            Piece::Slot(tok.to_string())
        } else {
            Piece::Word(tok.to_string())
        };
        match group.as_mut() {
            Some(g) => g.push(piece),
            None => out.push(piece),
        }
        if closes {
            let g = group.take().ok_or("unbalanced `]`")?;
            out.push(Piece::Group(g));
        }
    }
    if group.is_some() {
        return Err("unterminated optional group".into());
    }
    Ok(out)
}

fn slots_of(pieces: &[Piece], optional: bool, out: &mut Vec<(String, bool)>) {
    for p in pieces {
        match p {
            Piece::Slot(s) => out.push((s.clone(), optional)),
            Piece::Word(_) => {}
            Piece::Group(g) => slots_of(g, true, out),
        }
    }
}

impl Template {
    fn err(&self, message: impl Into<String>) -> CorpusError {
        CorpusError::Template {
            template: self.pos_sequence.clone(),
            message: message.into(),
        }
    }

    /// Candidate (slot, word) columns for each axis.
    fn axis_values(&self, axis: &Axis, lexicon: &Lexicon) -> Result<(Vec<String>, Vec<Vec<String>>), CorpusError> {
        match axis {
            Axis::Tuple { slots, values } => {
                if let Some(bad) = values.iter().find(|v| v.len() != slots.len()) {
                    return Err(self.err(format!("tuple {bad:?} does not match slots {slots:?}")));
                }
                Ok((slots.clone(), values.clone()))
            }
            Axis::Listed { slot, values } => Ok((vec![slot.clone()], values.iter().map(|v| vec![v.clone()]).collect())),
            Axis::Query { slot, require, exclude } => {
                let pos = slot_pos(slot).ok_or_else(|| self.err(format!("`{slot}` is not a slot")))?;
                let (lookup, plural) = if pos == Pos::Nns { (Pos::Nn, true) } else { (pos, false) };
                let words: Vec<Vec<String>> = lexicon
                    .entries_with_pos(lookup)
                    .filter(|e| !plural || e.plural.is_some())
                    .filter(|e| require.iter().all(|f| e.has_flag(f)))
                    .filter(|e| !exclude.iter().any(|f| e.has_flag(f)))
                    .map(|e| vec![e.surface.clone()])
                    .collect();
                if words.is_empty() {
                    return Err(self.err(format!("no lexicon entry can fill `{slot}`")));
                }
                Ok((vec![slot.clone()], words))
            }
        }
    }

    fn render_word(&self, slot: &str, word: &str, lexicon: &Lexicon) -> Result<String, CorpusError> {
        let pos = slot_pos(slot).expect("slot names are checked");
        let missing = || self.err(format!("`{word}` cannot fill `{slot}`"));
        match pos {
            Pos::V => {
                let e = lexicon.find(word, Pos::V).ok_or_else(missing)?;
                let v = e.verb.as_ref().ok_or_else(missing)?;
                Ok(match self.forms.get(slot).map(String::as_str).unwrap_or("past") {
                    "past" => v.past.clone(),
                    "present" => v.present.clone(),
                    "gerund" => v.gerund.clone(),
                    "base" => e.surface.clone(),
                    other => return Err(self.err(format!("unknown verb form `{other}`"))),
                })
            }
            Pos::Nns => lexicon
                .find(word, Pos::Nn)
                .and_then(|e| e.plural.clone())
                .ok_or_else(missing),
            Pos::Dt | Pos::Cc => {
                let known = lexicon
                    .function_words
                    .get(&pos)
                    .is_some_and(|ws| ws.iter().any(|w| w == word));
                if known {
                    Ok(word.to_string())
                } else {
                    Err(missing())
                }
            }
            _ => Ok(lexicon.find(word, pos).ok_or_else(missing)?.surface.clone()),
        }
    }

    /// Position of `word` among the candidates of the axis filling `slot`.
    fn order_of(&self, slot: &str, word: &str, lexicon: &Lexicon) -> usize {
        for a in &self.axis {
            if let Ok((names, values)) = self.axis_values(a, lexicon) {
                if let Some(k) = names.iter().position(|n| n == slot) {
                    return values.iter().position(|v| v[k] == word).unwrap_or(usize::MAX);
                }
            }
        }
        usize::MAX
    }

    /// Instantiates the template; sentences come out in axis order.
    pub fn expand(&self, lexicon: &Lexicon) -> Result<Vec<String>, CorpusError> {
        let pieces = parse_pattern(&self.pos_sequence).map_err(|m| self.err(m))?;
        let mut slots = Vec::new();
        slots_of(&pieces, false, &mut slots);
        let mut columns: Vec<(Vec<String>, Vec<Vec<String>>)> = Vec::new();
        for a in &self.axis {
            columns.push(self.axis_values(a, lexicon)?);
        }
        let mut covered: BTreeMap<&str, usize> = BTreeMap::new();
        for (names, _) in &columns {
            for n in names {
                *covered.entry(n).or_default() += 1;
            }
        }
        for (s, _) in &slots {
            match covered.get(s.as_str()) {
                Some(1) => {}
                Some(_) => return Err(self.err(format!("slot `{s}` is filled by several axes"))),
                None => return Err(self.err(format!("slot `{s}` has no axis"))),
            }
        }
        if let Some(extra) = covered.keys().find(|k| !slots.iter().any(|(s, _)| s == *k)) {
            return Err(self.err(format!("axis names unknown slot `{extra}`")));
        }
        for c in &self.constraints {
            if let Some(s) = c.slots.iter().find(|s| !covered.contains_key(s.as_str())) {
                return Err(self.err(format!("constraint names unknown slot `{s}`")));
            }
        }

        let mut out = Vec::new();
        let mut idx = vec![0usize; columns.len()];
        if columns.iter().any(|(_, v)| v.is_empty()) {
            return Err(self.err("an axis has no values"));
        }
        loop {
            let mut fill: BTreeMap<String, String> = BTreeMap::new();
            for (k, (names, values)) in columns.iter().enumerate() {
                for (n, v) in names.iter().zip(&values[idx[k]]) {
                    fill.insert(n.clone(), v.clone());
                }
            }
            if self.admits(&fill, lexicon) {
                for (s, optional) in &slots {
                    if !optional && fill[s].is_empty() {
                        return Err(self.err(format!("required slot `{s}` left empty")));
                    }
                }
                out.push(self.render(&pieces, &fill, lexicon)?);
            }
            // Odometer, last axis fastest.
            let mut k = columns.len();
            loop {
                if k == 0 {
                    return Ok(out);
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < columns[k].1.len() {
                    break;
                }
                idx[k] = 0;
            }
        }
    }

    fn admits(&self, fill: &BTreeMap<String, String>, lexicon: &Lexicon) -> bool {
        self.constraints.iter().all(|c| {
            let words: Vec<&String> = c.slots.iter().map(|s| &fill[s]).collect();
            match c.kind {
                ConstraintKind::Distinct => words
                    .iter()
                    .enumerate()
                    .all(|(i, w)| w.is_empty() || !words[..i].contains(w)),
                ConstraintKind::Ascending => c
                    .slots
                    .windows(2)
                    .all(|w| self.order_of(&w[0], &fill[&w[0]], lexicon) < self.order_of(&w[1], &fill[&w[1]], lexicon)),
            }
        })
    }

    fn render(
        &self,
        pieces: &[Piece],
        fill: &BTreeMap<String, String>,
        lexicon: &Lexicon,
    ) -> Result<String, CorpusError> {
        let mut words: Vec<String> = Vec::new();
        for p in pieces {
            match p {
                Piece::Slot(s) => words.push(self.render_word(s, &fill[s], lexicon)?),
                Piece::Word(w) => words.push(w.clone()),
                Piece::Group(g) => {
                    let present = g.iter().all(|q| match q {
                        Piece::Slot(s) => !fill[s].is_empty(),
                        _ => true,
                    });
                    if present {
                        words.push(self.render(g, fill, lexicon)?);
                    }
                }
            }
        }
        let mut text = String::new();
        for w in words {
            if w == "." || w.is_empty() {
                text.push_str(&w);
            } else {
                if !text.is_empty() {
                    text.push(' ');
                }
                text.push_str(&w);
            }
        }
        Ok(text)
    }
}
