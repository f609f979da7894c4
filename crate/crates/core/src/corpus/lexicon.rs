use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Deserialize;

use crate::error::CorpusError;

pub const DEFAULT_LEXICON: &str = include_str!("../../data/lexicon.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pos {
    Nnp,
    Nn,
    Nns,
    V,
    In,
    Jj,
    Dt,
    Cc,
}

impl Pos {
    pub fn parse(tag: &str) -> Option<Pos> {
        Some(match tag {
            "NNP" => Pos::Nnp,
            "NN" => Pos::Nn,
            "NNS" => Pos::Nns,
            "V" => Pos::V,
            "IN" => Pos::In,
            "JJ" => Pos::Jj,
            "DT" => Pos::Dt,
            "CC" => Pos::Cc,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Pos::Nnp => "NNP",
            Pos::Nn => "NN",
            Pos::Nns => "NNS",
            Pos::V => "V",
            Pos::In => "IN",
            Pos::Jj => "JJ",
            Pos::Dt => "DT",
            Pos::Cc => "CC",
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VisualCategory {
    Object,
    Person,
    Action,
    SpatialRelation,
    Property,
}

impl VisualCategory {
    fn parse(s: &str) -> Result<Self, CorpusError> {
        Ok(match s {
            "object" => VisualCategory::Object,
            "person" => VisualCategory::Person,
            "action" => VisualCategory::Action,
            "spatial-relation" => VisualCategory::SpatialRelation,
            "property" => VisualCategory::Property,
            other => return Err(CorpusError::UnknownCategory(other.to_string())),
        })
    }
}

/// Inflected verb forms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerbForms {
    pub past: String,
    pub present: String,
    pub gerund: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    pub surface: String,
    pub pos: Pos,
    pub visual_category: VisualCategory,
    pub applicability: BTreeSet<String>,
    /// Logic predicate this word contributes, if any.
    pub predicate: Option<String>,
    pub plural: Option<String>,
    pub verb: Option<VerbForms>,
}

impl LexiconEntry {
    pub fn has_flag(&self, flag: &str) -> bool {
        self.applicability.contains(flag)
    }
}

#[derive(Deserialize)]
struct RawLexicon {
    #[serde(default)]
    function_words: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    entry: Vec<RawEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    surface: String,
    pos: String,
    category: String,
    #[serde(default)]
    predicate: Option<String>,
    #[serde(default)]
    plural: Option<String>,
    #[serde(default)]
    past: Option<String>,
    #[serde(default)]
    present: Option<String>,
    #[serde(default)]
    gerund: Option<String>,
    #[serde(default)]
    flags: Vec<String>,
}

/// Terminal tags produced by the tagger. Verb entries surface as VB / VBD /
/// VBZ / VBG depending on inflection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tagging {
    pub tag: &'static str,
    /// Index into [`Lexicon::entries`]; `None` for function words.
    pub entry: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub text: String,
    pub tags: Vec<Tagging>,
}

impl Token {
    pub fn has_tag(&self, tag: &str) -> bool {
        self.tags.iter().any(|t| t.tag == tag)
    }
}

#[derive(Debug, Clone)]
pub struct Lexicon {
    pub entries: Vec<LexiconEntry>,
    pub function_words: BTreeMap<Pos, Vec<String>>,
    forms: HashMap<String, Vec<Tagging>>,
    max_form_words: usize,
}

impl Lexicon {
    pub fn default_lexicon() -> Self {
        Self::from_toml(DEFAULT_LEXICON).expect("bundled lexicon is valid")
    }

    pub fn from_toml(text: &str) -> Result<Self, CorpusError> {
        let raw: RawLexicon = toml::from_str(text).map_err(|e| CorpusError::Config(e.to_string()))?;
        let mut entries: Vec<LexiconEntry> = Vec::with_capacity(raw.entry.len());
        for r in raw.entry {
            let pos = Pos::parse(&r.pos).ok_or_else(|| CorpusError::UnknownPos(r.pos.clone()))?;
            if matches!(pos, Pos::Dt | Pos::Cc | Pos::Nns) {
                return Err(CorpusError::Config(format!(
                    "`{}`: {pos} words are not lexicon entries",
                    r.surface
                )));
            }
            let visual_category = VisualCategory::parse(&r.category)?;
            if entries.iter().any(|e| e.surface == r.surface && e.pos == pos) {
                return Err(CorpusError::DuplicateEntry {
                    surface: r.surface,
                    pos: pos.to_string(),
                });
            }
            let verb = if pos == Pos::V {
                match (r.past, r.present, r.gerund) {
                    (Some(past), Some(present), Some(gerund)) => Some(VerbForms { past, present, gerund }),
                    _ => {
                        return Err(CorpusError::Config(format!(
                            "verb `{}` needs past, present and gerund forms",
                            r.surface
                        )))
                    }
                }
            } else {
                None
            };
            entries.push(LexiconEntry {
                surface: r.surface,
                pos,
                visual_category,
                applicability: r.flags.into_iter().collect(),
                predicate: r.predicate,
                plural: r.plural,
                verb,
            });
        }
        let mut function_words = BTreeMap::new();
        for (tag, words) in raw.function_words {
            let pos = Pos::parse(&tag).ok_or_else(|| CorpusError::UnknownPos(tag.clone()))?;
            function_words.insert(pos, words);
        }
        Ok(Self::index(entries, function_words))
    }

    fn index(entries: Vec<LexiconEntry>, function_words: BTreeMap<Pos, Vec<String>>) -> Self {
        let mut forms: HashMap<String, Vec<Tagging>> = HashMap::new();
        let mut add = |form: &str, tag: &'static str, entry: Option<usize>| {
            let slot = forms.entry(form.to_lowercase()).or_default();
            let t = Tagging { tag, entry };
            if !slot.contains(&t) {
                slot.push(t);
            }
        };
        for (i, e) in entries.iter().enumerate() {
            match e.pos {
                Pos::Nnp => add(&e.surface, "NNP", Some(i)),
                Pos::Nn => {
                    add(&e.surface, "NN", Some(i));
                    if let Some(p) = &e.plural {
                        add(p, "NNS", Some(i));
                    }
                }
                Pos::V => {
                    let v = e.verb.as_ref().expect("verbs carry forms");
                    add(&e.surface, "VB", Some(i));
                    add(&v.past, "VBD", Some(i));
                    add(&v.present, "VBZ", Some(i));
                    add(&v.gerund, "VBG", Some(i));
                }
                Pos::In => add(&e.surface, "IN", Some(i)),
                Pos::Jj => add(&e.surface, "JJ", Some(i)),
                Pos::Dt | Pos::Cc | Pos::Nns => {}
            }
        }
        for (pos, words) in &function_words {
            let tag = match pos {
                Pos::Dt => "DT",
                Pos::Cc => "CC",
                _ => continue,
            };
            for w in words {
                add(w, tag, None);
            }
        }
        let max_form_words = forms.keys().map(|k| k.split_whitespace().count()).max().unwrap_or(1);
        Lexicon {
            entries,
            function_words,
            forms,
            max_form_words,
        }
    }

    pub fn entries_with_pos(&self, pos: Pos) -> impl Iterator<Item = &LexiconEntry> {
        self.entries.iter().filter(move |e| e.pos == pos)
    }

    pub fn find(&self, surface: &str, pos: Pos) -> Option<&LexiconEntry> {
        self.entries
            .iter()
            .find(|e| e.pos == pos && e.surface.eq_ignore_ascii_case(surface))
    }

    /// Entry whose surface or any inflected form equals `form`.
    pub fn lookup_form(&self, form: &str) -> Option<&LexiconEntry> {
        self.forms
            .get(&form.to_lowercase())?
            .iter()
            .find_map(|t| t.entry.map(|i| &self.entries[i]))
    }

    /// Splits one sentence into tokens, merging multiword forms greedily
    /// (longest match first). Trailing sentence punctuation is dropped.
    pub fn tokenize(&self, sentence: &str) -> Result<Vec<Token>, CorpusError> {
        let words: Vec<&str> = sentence
            .split_whitespace()
            .map(|w| w.trim_end_matches(['.', ',']))
            .filter(|w| !w.is_empty())
            .collect();
        let mut out = Vec::new();
        let mut i = 0;
        while i < words.len() {
            let mut matched = None;
            for n in (1..=self.max_form_words.min(words.len() - i)).rev() {
                let form = words[i..i + n].join(" ");
                if let Some(tags) = self.forms.get(&form.to_lowercase()) {
                    matched = Some((n, form, tags.clone()));
                    break;
                }
            }
            let (n, text, tags) = matched.ok_or_else(|| CorpusError::UnknownWord(words[i].to_string()))?;
            out.push(Token { text, tags });
            i += n;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_lexicon_has_four_prepositions() {
        let lex = Lexicon::default_lexicon();
        let preps: Vec<&str> = lex.entries_with_pos(Pos::In).map(|e| e.surface.as_str()).collect();
        assert_eq!(preps, vec!["with", "left of", "right of", "on"]);
    }

    #[test]
    fn telescope_is_an_object() {
        let lex = Lexicon::default_lexicon();
        assert_eq!(
            lex.find("telescope", Pos::Nn).unwrap().visual_category,
            VisualCategory::Object
        );
    }

    #[test]
    fn word_classes_match_inventory() {
        let lex = Lexicon::default_lexicon();
        let surfaces = |pos| lex.entries_with_pos(pos).map(|e| e.surface.clone()).collect::<Vec<_>>();
        assert_eq!(surfaces(Pos::Nn), ["chair", "bag", "telescope", "someone"]);
        assert_eq!(surfaces(Pos::Nnp), ["Sam", "Bill", "Claire", "Clark"]);
        assert_eq!(
            surfaces(Pos::V),
            ["pick up", "put down", "hold", "move", "look at", "approach", "leave"]
        );
        assert_eq!(surfaces(Pos::Jj), ["yellow", "green"]);
    }

    #[test]
    fn duplicate_noun_is_rejected() {
        let text = format!("{DEFAULT_LEXICON}\n[[entry]]\nsurface = \"chair\"\npos = \"NN\"\ncategory = \"object\"\n");
        assert!(matches!(
            Lexicon::from_toml(&text),
            Err(CorpusError::DuplicateEntry { surface, .. }) if surface == "chair"
        ));
    }

    #[test]
    fn unknown_category_is_rejected() {
        let text = "[[entry]]\nsurface = \"lamp\"\npos = \"NN\"\ncategory = \"furniture\"\n";
        assert!(matches!(
            Lexicon::from_toml(text),
            Err(CorpusError::UnknownCategory(c)) if c == "furniture"
        ));
    }

    #[test]
    fn tokenizer_merges_multiword_forms() {
        let lex = Lexicon::default_lexicon();
        let toks = lex.tokenize("Claire looked at Bill picking up a chair.").unwrap();
        let texts: Vec<&str> = toks.iter().map(|t| t.text.as_str()).collect();
        assert_eq!(texts, ["Claire", "looked at", "Bill", "picking up", "a", "chair"]);
        assert!(toks[1].has_tag("VBD"));
        assert!(toks[3].has_tag("VBG"));
        let toks = lex.tokenize("Sam left the chair left of the bag").unwrap();
        assert!(toks[1].has_tag("VBD"));
        assert_eq!(toks[4].text, "left of");
        assert!(lex.tokenize("Sam kicked the chair").is_err());
    }
}
