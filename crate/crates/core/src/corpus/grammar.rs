use std::collections::{HashMap, HashSet};
use std::fmt;
use std::rc::Rc;

use serde::Deserialize;

use super::lexicon::{Lexicon, Token};
use crate::error::CorpusError;

pub const DEFAULT_GRAMMAR: &str = include_str!("../../data/grammar.toml");

/// A constituency tree; leaves carry the tag the parser chose for the token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tree {
    Leaf { tag: String, word: String },
    Node { label: String, children: Vec<Tree> },
}

impl Tree {
    pub fn label(&self) -> &str {
        match self {
            Tree::Leaf { tag, .. } => tag,
            Tree::Node { label, .. } => label,
        }
    }

    pub fn children(&self) -> &[Tree] {
        match self {
            Tree::Leaf { .. } => &[],
            Tree::Node { children, .. } => children,
        }
    }

    /// Space-joined surface words.
    pub fn yield_text(&self) -> String {
        let mut words = Vec::new();
        self.collect_words(&mut words);
        words.join(" ")
    }

    fn collect_words<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Tree::Leaf { word, .. } => out.push(word),
            Tree::Node { children, .. } => children.iter().for_each(|c| c.collect_words(out)),
        }
    }

    /// Reads the bracketed form produced by `Display`.
    pub fn parse_bracketed(text: &str) -> Result<Tree, CorpusError> {
        let toks = bracket_tokens(text);
        let mut pos = 0;
        let tree = read_tree(&toks, &mut pos)?;
        if pos != toks.len() {
            return Err(CorpusError::Grammar(format!("trailing input in tree `{text}`")));
        }
        Ok(tree)
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tree::Leaf { tag, word } => write!(f, "({tag} {word})"),
            Tree::Node { label, children } => {
                write!(f, "({label}")?;
                for c in children {
                    write!(f, " {c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

fn bracket_tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        match c {
            '(' | ')' => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                out.push(c.to_string());
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn read_tree(toks: &[String], pos: &mut usize) -> Result<Tree, CorpusError> {
    let bad = |m: &str| CorpusError::Grammar(format!("malformed tree: {m}"));
    if toks.get(*pos).map(String::as_str) != Some("(") {
        return Err(bad("expected `(`"));
    }
    *pos += 1;
    let label = toks.get(*pos).ok_or_else(|| bad("missing label"))?.clone();
    *pos += 1;
    if toks.get(*pos).map(String::as_str) != Some("(") {
        // Leaf: words up to the closing bracket (multiword forms allowed).
        let mut words = Vec::new();
        while let Some(t) = toks.get(*pos) {
            if t == ")" {
                break;
            }
            words.push(t.as_str());
            *pos += 1;
        }
        if words.is_empty() || toks.get(*pos).is_none() {
            return Err(bad("unterminated leaf"));
        }
        *pos += 1;
        return Ok(Tree::Leaf {
            tag: label,
            word: words.join(" "),
        });
    }
    let mut children = Vec::new();
    while toks.get(*pos).map(String::as_str) == Some("(") {
        children.push(read_tree(toks, pos)?);
    }
    if toks.get(*pos).map(String::as_str) != Some(")") {
        return Err(bad("expected `)`"));
    }
    *pos += 1;
    Ok(Tree::Node { label, children })
}

#[derive(Deserialize)]
struct RawGrammar {
    start: String,
    terminals: Vec<String>,
    rules: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub lhs: String,
    pub rhs: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Grammar {
    pub start: String,
    pub terminals: HashSet<String>,
    pub rules: Vec<Rule>,
}

impl Grammar {
    pub fn default_grammar() -> Self {
        Self::from_toml(DEFAULT_GRAMMAR).expect("bundled grammar is valid")
    }

    pub fn from_toml(text: &str) -> Result<Self, CorpusError> {
        let raw: RawGrammar = toml::from_str(text).map_err(|e| CorpusError::Grammar(e.to_string()))?;
        let mut rules = Vec::with_capacity(raw.rules.len());
        for r in &raw.rules {
            let (lhs, rhs) = r
                .split_once("->")
                .ok_or_else(|| CorpusError::Grammar(format!("rule `{r}` lacks `->`")))?;
            let lhs = lhs.trim().to_string();
            let rhs: Vec<String> = rhs.split_whitespace().map(str::to_string).collect();
            if lhs.is_empty() || rhs.is_empty() {
                return Err(CorpusError::Grammar(format!("rule `{r}` is empty on one side")));
            }
            rules.push(Rule { lhs, rhs });
        }
        let g = Grammar {
            start: raw.start,
            terminals: raw.terminals.into_iter().collect(),
            rules,
        };
        g.check()?;
        Ok(g)
    }

    fn is_nonterminal(&self, sym: &str) -> bool {
        self.rules.iter().any(|r| r.lhs == sym)
    }

    fn check(&self) -> Result<(), CorpusError> {
        for r in &self.rules {
            if self.terminals.contains(&r.lhs) {
                return Err(CorpusError::Grammar(format!(
                    "terminal `{}` used as a rule head",
                    r.lhs
                )));
            }
            for s in &r.rhs {
                if !self.terminals.contains(s) && !self.is_nonterminal(s) {
                    return Err(CorpusError::Grammar(format!("symbol `{s}` has no rules")));
                }
            }
        }
        if !self.is_nonterminal(&self.start) {
            return Err(CorpusError::Grammar(format!(
                "start symbol `{}` has no rules",
                self.start
            )));
        }
        // Unit chains between nonterminals must not loop, or a span would
        // have infinitely many parses.
        for start in self.rules.iter().map(|r| r.lhs.as_str()) {
            let mut stack = vec![start];
            let mut seen = HashSet::new();
            while let Some(sym) = stack.pop() {
                for r in self.rules.iter().filter(|r| r.lhs == sym && r.rhs.len() == 1) {
                    let next = r.rhs[0].as_str();
                    if next == start {
                        return Err(CorpusError::Grammar(format!("unit-rule cycle through `{start}`")));
                    }
                    if self.is_nonterminal(next) && seen.insert(next) {
                        stack.push(next);
                    }
                }
            }
        }
        Ok(())
    }
}

type Memo = HashMap<(String, usize, usize), Rc<Vec<Tree>>>;

struct Chart<'a> {
    grammar: &'a Grammar,
    tokens: &'a [Token],
    memo: Memo,
}

impl Chart<'_> {
    fn parses(&mut self, sym: &str, i: usize, j: usize) -> Rc<Vec<Tree>> {
        let key = (sym.to_string(), i, j);
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }
        let mut out = Vec::new();
        if self.grammar.terminals.contains(sym) {
            if j == i + 1 && self.tokens[i].has_tag(sym) {
                out.push(Tree::Leaf {
                    tag: sym.to_string(),
                    word: self.tokens[i].text.clone(),
                });
            }
        } else {
            let grammar = self.grammar;
            for rule in grammar.rules.iter().filter(|r| r.lhs == sym) {
                for children in self.sequences(&rule.rhs, i, j) {
                    out.push(Tree::Node {
                        label: sym.to_string(),
                        children,
                    });
                }
            }
        }
        let out = Rc::new(out);
        self.memo.insert(key, out.clone());
        out
    }

    fn sequences(&mut self, rhs: &[String], i: usize, j: usize) -> Vec<Vec<Tree>> {
        if rhs.len() == 1 {
            return self.parses(&rhs[0], i, j).iter().map(|t| vec![t.clone()]).collect();
        }
        let mut out = Vec::new();
        if j < i + rhs.len() {
            return out;
        }
        for k in (i + 1)..=(j - (rhs.len() - 1)) {
            let heads = self.parses(&rhs[0], i, k);
            if heads.is_empty() {
                continue;
            }
            let tails = self.sequences(&rhs[1..], k, j);
            for h in heads.iter() {
                for t in &tails {
                    let mut seq = Vec::with_capacity(rhs.len());
                    seq.push(h.clone());
                    seq.extend(t.iter().cloned());
                    out.push(seq);
                }
            }
        }
        out
    }
}

/// Every parse of `tokens` from the start symbol, in canonical order.
pub fn parse_tokens(tokens: &[Token], grammar: &Grammar) -> Vec<Tree> {
    if tokens.is_empty() {
        return Vec::new();
    }
    let mut chart = Chart {
        grammar,
        tokens,
        memo: HashMap::new(),
    };
    let trees = chart.parses(&grammar.start, 0, tokens.len());
    let mut out: Vec<Tree> = Vec::with_capacity(trees.len());
    for t in trees.iter() {
        if !out.contains(t) {
            out.push(t.clone());
        }
    }
    out
}

/// Every distinct parse of one sentence, canonical order.
pub fn parse_all(sentence: &str, grammar: &Grammar, lexicon: &Lexicon) -> Result<Vec<Tree>, CorpusError> {
    let tokens = lexicon.tokenize(sentence)?;
    let trees = parse_tokens(&tokens, grammar);
    if trees.is_empty() {
        return Err(CorpusError::NotInLanguage {
            sentence: sentence.to_string(),
        });
    }
    Ok(trees)
}
