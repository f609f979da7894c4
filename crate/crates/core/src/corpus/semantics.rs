//! Compositional mapping from parse trees to formulas.
//!
//! Noun phrases denote entities or coordinations of entities. A verb or
//! preposition applied to a coordination distributes over it, keeping the
//! connective. Object entities get fresh variables; proper names stay as
//! constants until [`finish`] maps them to person variables.

use std::collections::BTreeMap;

use super::grammar::{parse_all, Grammar, Tree};
use super::lexicon::{Lexicon, LexiconEntry, Pos, VisualCategory};
use crate::error::CorpusError;
use crate::logic::{canonical_variables, name_to_person, Atom, Formula, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Conn {
    And,
    Or,
}

impl Conn {
    fn join(self, parts: Vec<Formula>) -> Formula {
        match self {
            Conn::And => Formula::and(parts),
            Conn::Or => Formula::or(parts),
        }
    }
}

#[derive(Debug, Clone)]
enum Np {
    Ent(usize),
    Coord(Conn, Vec<Np>),
}

#[derive(Debug, Clone)]
enum Nom {
    Noun {
        entry: LexiconEntry,
        adjectives: Vec<String>,
        plural: bool,
    },
    Coord(Conn, Vec<Nom>),
}

/// An individual introduced while interpreting a sentence.
#[derive(Debug, Clone)]
pub struct Entity {
    pub term: Term,
    /// Lexical head, e.g. "chair" or "Claire".
    pub head: String,
    pub is_person: bool,
    desc: Vec<Formula>,
}

/// Raw interpretation of one sentence, before name mapping.
#[derive(Debug, Clone)]
pub struct Meaning {
    pub formula: Formula,
    pub entities: Vec<Entity>,
}

struct Interp<'a> {
    lexicon: &'a Lexicon,
    entities: Vec<Entity>,
    objects: usize,
    persons: usize,
}

fn no_rule(tree: &Tree) -> CorpusError {
    let rhs: Vec<&str> = tree.children().iter().map(Tree::label).collect();
    CorpusError::NoSemantics(format!("{} -> {}", tree.label(), rhs.join(" ")))
}

fn shape(tree: &Tree) -> Vec<&str> {
    tree.children().iter().map(Tree::label).collect()
}

fn leaf_word(tree: &Tree) -> Option<&str> {
    match tree {
        Tree::Leaf { word, .. } => Some(word),
        Tree::Node { children, .. } if children.len() == 1 => leaf_word(&children[0]),
        _ => None,
    }
}

impl<'a> Interp<'a> {
    fn new(lexicon: &'a Lexicon) -> Self {
        Interp {
            lexicon,
            entities: Vec::new(),
            objects: 0,
            persons: 0,
        }
    }

    fn entry(&self, tree: &Tree) -> Result<&'a LexiconEntry, CorpusError> {
        let word = leaf_word(tree).ok_or_else(|| no_rule(tree))?;
        self.lexicon
            .lookup_form(word)
            .ok_or_else(|| CorpusError::UnknownWord(word.to_string()))
    }

    fn predicate(&self, tree: &Tree) -> Result<String, CorpusError> {
        let e = self.entry(tree)?;
        e.predicate
            .clone()
            .ok_or_else(|| CorpusError::NoSemantics(format!("word `{}` has no predicate", e.surface)))
    }

    fn new_entity(&mut self, head: &str, is_person: bool, desc: Vec<Formula>) -> usize {
        let term = if is_person {
            self.persons += 1;
            Term::var(format!("s{}", self.persons))
        } else {
            self.objects += 1;
            Term::var(format!("e{}", self.objects))
        };
        self.entities.push(Entity {
            term,
            head: head.to_string(),
            is_person,
            desc,
        });
        self.entities.len() - 1
    }

    fn name_entity(&mut self, name: &str) -> usize {
        if let Some(i) = self.entities.iter().position(|e| e.term == Term::name(name)) {
            return i;
        }
        self.entities.push(Entity {
            term: Term::name(name),
            head: name.to_string(),
            is_person: true,
            desc: Vec::new(),
        });
        self.entities.len() - 1
    }

    /// `f` applied to every entity of `np`, each conjoined with the
    /// entity's description and combined by the coordination's connective.
    fn apply(&self, np: &Np, f: &mut dyn FnMut(&Term) -> Formula) -> Formula {
        match np {
            Np::Ent(i) => {
                let e = &self.entities[*i];
                let mut parts = e.desc.clone();
                parts.push(f(&e.term));
                Formula::and(parts)
            }
            Np::Coord(c, items) => c.join(items.iter().map(|n| self.apply(n, f)).collect()),
        }
    }

    fn leaves(np: &Np, out: &mut Vec<usize>) {
        match np {
            Np::Ent(i) => out.push(*i),
            Np::Coord(_, items) => items.iter().for_each(|n| Self::leaves(n, out)),
        }
    }

    fn sentence(&mut self, tree: &Tree) -> Result<Formula, CorpusError> {
        match (tree.label(), shape(tree).as_slice()) {
            ("S", ["NP", "VP"]) => {
                let subj = self.np(&tree.children()[0])?;
                let vp = self.vp(&tree.children()[1])?;
                Ok(self.apply(&subj, &mut |s| self.vp_formula(&vp, s)))
            }
            _ => Err(no_rule(tree)),
        }
    }

    fn vp_formula(&self, vp: &[(String, Np)], subject: &Term) -> Formula {
        Formula::and(
            vp.iter()
                .map(|(pred, obj)| {
                    self.apply(obj, &mut |o| {
                        Formula::Atom(Atom::binary(pred, subject.clone(), o.clone()))
                    })
                })
                .collect(),
        )
    }

    /// A verb phrase is a list of (predicate, argument) pieces whose first
    /// slot is the yet-unknown subject.
    fn vp(&mut self, tree: &Tree) -> Result<Vec<(String, Np)>, CorpusError> {
        let c = tree.children();
        match shape(tree).as_slice() {
            ["V", "NP"] => {
                let p = self.predicate(&c[0])?;
                Ok(vec![(p, self.np(&c[1])?)])
            }
            ["VP", "PP"] | ["VP", "GP"] => {
                let mut head = self.vp(&c[0])?;
                head.push(self.adjunct(&c[1])?);
                Ok(head)
            }
            _ => Err(no_rule(tree)),
        }
    }

    fn adjunct(&mut self, tree: &Tree) -> Result<(String, Np), CorpusError> {
        match (tree.label(), shape(tree).as_slice()) {
            ("PP", ["IN", "NP"]) | ("GP", ["VBG", "NP"]) => {
                let p = self.predicate(&tree.children()[0])?;
                Ok((p, self.np(&tree.children()[1])?))
            }
            _ => Err(no_rule(tree)),
        }
    }

    fn np(&mut self, tree: &Tree) -> Result<Np, CorpusError> {
        let c = tree.children();
        match shape(tree).as_slice() {
            ["NNP"] => {
                let e = self.entry(&c[0])?;
                Ok(Np::Ent(self.name_entity(&e.surface)))
            }
            ["DT", "NOM"] => {
                let nom = self.nom(&c[1])?;
                Ok(self.realize(&nom))
            }
            ["NP", "PP"] => {
                let head = self.np(&c[0])?;
                let (pred, obj) = self.adjunct(&c[1])?;
                let mut ids = Vec::new();
                Self::leaves(&head, &mut ids);
                for i in ids {
                    let h = self.entities[i].term.clone();
                    let is_person = self.entities[i].is_person;
                    let rel = self.apply(&obj, &mut |o| {
                        // An object "with" another rests on it; a person
                        // "with" an object has it.
                        if pred == "with" && !is_person {
                            Formula::Atom(Atom::binary("on", o.clone(), h.clone()))
                        } else {
                            Formula::Atom(Atom::binary(&pred, h.clone(), o.clone()))
                        }
                    });
                    self.entities[i].desc.push(rel);
                }
                Ok(head)
            }
            ["NP", "GP"] => {
                let head = self.np(&c[0])?;
                let (pred, obj) = self.adjunct(&c[1])?;
                let mut ids = Vec::new();
                Self::leaves(&head, &mut ids);
                for i in ids {
                    let agent = self.entities[i].term.clone();
                    let ev = self.apply(&obj, &mut |o| {
                        Formula::Atom(Atom::binary(&pred, agent.clone(), o.clone()))
                    });
                    self.entities[i].desc.push(ev);
                }
                Ok(head)
            }
            ["NP", "CC", "NP"] => {
                let conn = self.conn(&c[1])?;
                let l = self.np(&c[0])?;
                let r = self.np(&c[2])?;
                Ok(Np::Coord(conn, vec![l, r]))
            }
            // A flat three-way list reads every item as included.
            ["NP", "CC", "NP", "CC", "NP"] => {
                let items = vec![self.np(&c[0])?, self.np(&c[2])?, self.np(&c[4])?];
                Ok(Np::Coord(Conn::And, items))
            }
            _ => Err(no_rule(tree)),
        }
    }

    fn conn(&self, tree: &Tree) -> Result<Conn, CorpusError> {
        match leaf_word(tree).map(str::to_lowercase).as_deref() {
            Some("and") => Ok(Conn::And),
            Some("or") => Ok(Conn::Or),
            _ => Err(no_rule(tree)),
        }
    }

    fn nom(&mut self, tree: &Tree) -> Result<Nom, CorpusError> {
        let c = tree.children();
        match shape(tree).as_slice() {
            ["NN"] | ["NNS"] => Ok(Nom::Noun {
                entry: self.entry(&c[0])?.clone(),
                adjectives: Vec::new(),
                plural: c[0].label() == "NNS",
            }),
            ["JJ", "NOM"] => {
                let adj = self.predicate(&c[0])?;
                let mut inner = self.nom(&c[1])?;
                add_adjective(&mut inner, &adj);
                Ok(inner)
            }
            ["NOM", "CC", "NOM"] => {
                let conn = self.conn(&c[1])?;
                Ok(Nom::Coord(conn, vec![self.nom(&c[0])?, self.nom(&c[2])?]))
            }
            _ => Err(no_rule(tree)),
        }
    }

    fn realize(&mut self, nom: &Nom) -> Np {
        match nom {
            Nom::Coord(conn, items) => Np::Coord(*conn, items.iter().map(|n| self.realize(n)).collect()),
            Nom::Noun {
                entry,
                adjectives,
                plural,
            } => {
                let is_person = entry.visual_category == VisualCategory::Person;
                let pred = entry.predicate.clone().unwrap_or_else(|| entry.surface.clone());
                let make = |this: &mut Self| {
                    let id = this.new_entity(&entry.surface, is_person, Vec::new());
                    let t = this.entities[id].term.clone();
                    let mut desc = vec![Formula::Atom(Atom::unary(&pred, t.clone()))];
                    desc.extend(adjectives.iter().map(|a| Formula::Atom(Atom::unary(a, t.clone()))));
                    this.entities[id].desc = desc;
                    id
                };
                if *plural {
                    // A definite plural denotes two distinct individuals.
                    let a = make(self);
                    let b = make(self);
                    let neq = Formula::Atom(Atom::neq(self.entities[a].term.clone(), self.entities[b].term.clone()));
                    self.entities[b].desc.push(neq);
                    Np::Coord(Conn::And, vec![Np::Ent(a), Np::Ent(b)])
                } else {
                    Np::Ent(make(self))
                }
            }
        }
    }
}

fn add_adjective(nom: &mut Nom, adj: &str) {
    match nom {
        Nom::Noun { adjectives, .. } => adjectives.insert(0, adj.to_string()),
        Nom::Coord(_, items) => items.iter_mut().for_each(|n| add_adjective(n, adj)),
    }
}

/// Removes repeated children of every connective, keeping first occurrences.
pub fn dedup(formula: &Formula) -> Formula {
    match formula {
        Formula::Atom(_) => formula.clone(),
        Formula::And(cs) | Formula::Or(cs) => {
            let mut out: Vec<Formula> = Vec::with_capacity(cs.len());
            for c in cs.iter().map(dedup) {
                if !out.contains(&c) {
                    out.push(c);
                }
            }
            if matches!(formula, Formula::And(_)) {
                Formula::and(out)
            } else {
                Formula::or(out)
            }
        }
    }
}

/// Maps names to person variables and renames variables canonically.
pub fn finish(raw: &Formula) -> Formula {
    canonical_variables(&name_to_person(&dedup(raw)))
}

/// Raw meaning of a parse tree together with the entities it introduced.
pub fn meaning(tree: &Tree, lexicon: &Lexicon) -> Result<Meaning, CorpusError> {
    let mut it = Interp::new(lexicon);
    let formula = dedup(&it.sentence(tree)?);
    Ok(Meaning {
        formula,
        entities: it.entities,
    })
}

/// Deterministic formula for one parse tree, names mapped to persons.
pub fn interpret(tree: &Tree, lexicon: &Lexicon) -> Result<Formula, CorpusError> {
    Ok(finish(&meaning(tree, lexicon)?.formula))
}

/// One candidate reading before ids are assigned.
#[derive(Debug, Clone, PartialEq)]
pub struct Reading {
    pub parse: Option<Tree>,
    /// Formula with proper names still in place.
    pub raw: Formula,
    pub gloss: String,
}

impl Reading {
    pub fn formula(&self) -> Formula {
        finish(&self.raw)
    }
}

fn words(sentence: &str) -> Vec<String> {
    sentence
        .split_whitespace()
        .map(|w| w.trim_end_matches(['.', ',']).to_string())
        .filter(|w| !w.is_empty())
        .collect()
}

fn verb_entry<'a>(lexicon: &'a Lexicon, form: &str) -> Option<&'a LexiconEntry> {
    lexicon.lookup_form(form).filter(|e| e.pos == Pos::V)
}

fn bin(p: &str, a: Term, b: Term) -> Formula {
    Formula::Atom(Atom::binary(p, a, b))
}

fn un(p: &str, a: Term) -> Formula {
    Formula::Atom(Atom::unary(p, a))
}

fn quantified_readings(sentence: &str, lexicon: &Lexicon) -> Result<Vec<Formula>, CorpusError> {
    let wrong = || CorpusError::WrongTemplate {
        sentence: sentence.to_string(),
        expected: "quantificational",
    };
    let mut ws = words(sentence);
    // "Someone V the (two) NNS": the numeral is optional.
    if ws.len() == 5 && ws[3].eq_ignore_ascii_case("two") {
        ws.remove(3);
    }
    let toks = lexicon.tokenize(&ws.join(" ")).map_err(|_| wrong())?;
    let tagged = |i: usize, tag: &str| toks.get(i).is_some_and(|t| t.has_tag(tag));
    let text = |i: usize| toks[i].text.to_lowercase();
    let (x, y) = (Term::var("x"), Term::var("y"));
    if toks.len() == 6
        && tagged(0, "NNP")
        && text(1) == "and"
        && tagged(2, "NNP")
        && tagged(3, "VBD")
        && text(4) == "a"
        && tagged(5, "NN")
    {
        let name = |i: usize| {
            lexicon
                .lookup_form(&toks[i].text)
                .map(|e| Term::name(e.surface.clone()))
                .ok_or_else(wrong)
        };
        let (a, b) = (name(0)?, name(2)?);
        if a == b {
            return Err(wrong());
        }
        let verb = verb_entry(lexicon, &toks[3].text)
            .and_then(|e| e.predicate.clone())
            .ok_or_else(wrong)?;
        let noun = lexicon
            .lookup_form(&toks[5].text)
            .filter(|e| e.visual_category == VisualCategory::Object)
            .and_then(|e| e.predicate.clone())
            .ok_or_else(wrong)?;
        let shared = Formula::and(vec![
            un(&noun, x.clone()),
            bin(&verb, a.clone(), x.clone()),
            bin(&verb, b.clone(), x.clone()),
        ]);
        let distinct = Formula::and(vec![
            un(&noun, x.clone()),
            un(&noun, y.clone()),
            bin(&verb, a, x.clone()),
            bin(&verb, b, y.clone()),
            Formula::Atom(Atom::neq(x, y)),
        ]);
        return Ok(vec![shared, distinct]);
    }
    if toks.len() == 4
        && tagged(0, "NN")
        && text(0) == "someone"
        && tagged(1, "VBD")
        && text(2) == "the"
        && tagged(3, "NNS")
    {
        let verb = verb_entry(lexicon, &toks[1].text)
            .and_then(|e| e.predicate.clone())
            .ok_or_else(wrong)?;
        let noun = lexicon
            .lookup_form(&toks[3].text)
            .and_then(|e| e.predicate.clone())
            .ok_or_else(wrong)?;
        let (u, v) = (Term::var("u"), Term::var("v"));
        let objects = vec![
            un(&noun, x.clone()),
            un(&noun, y.clone()),
            Formula::Atom(Atom::neq(x.clone(), y.clone())),
        ];
        let mut one = objects.clone();
        one.extend([
            un("person", u.clone()),
            bin(&verb, u.clone(), x.clone()),
            bin(&verb, u.clone(), y.clone()),
        ]);
        let mut two = objects;
        two.extend([
            un("person", u.clone()),
            un("person", v.clone()),
            Formula::Atom(Atom::neq(u.clone(), v.clone())),
            bin(&verb, u, x),
            bin(&verb, v, y),
        ]);
        return Ok(vec![Formula::and(one), Formula::and(two)]);
    }
    Err(wrong())
}

/// Both scope readings of a quantificational sentence: shared object
/// first, then distinct objects (or one actor, then two actors).
pub fn quantified_interpretations(sentence: &str, lexicon: &Lexicon) -> Result<Vec<Formula>, CorpusError> {
    Ok(quantified_readings(sentence, lexicon)?.iter().map(finish).collect())
}

pub(crate) fn quantified(sentence: &str, lexicon: &Lexicon) -> Result<Vec<Reading>, CorpusError> {
    Ok(quantified_readings(sentence, lexicon)?
        .into_iter()
        .map(|raw| Reading {
            parse: None,
            gloss: gloss(&raw, lexicon),
            raw,
        })
        .collect())
}

/// Splits a two-sentence discourse on its first full stop.
fn split_discourse(discourse: &str) -> Option<(&str, &str)> {
    let (a, b) = discourse.split_once('.')?;
    let (a, b) = (a.trim(), b.trim());
    (!a.is_empty() && !b.is_empty()).then_some((a, b))
}

/// One reading per object antecedent of "It" in "S. It is JJ.", in textual
/// order of the antecedents.
pub(crate) fn anaphora(discourse: &str, grammar: &Grammar, lexicon: &Lexicon) -> Result<Vec<Reading>, CorpusError> {
    let wrong = || CorpusError::WrongTemplate {
        sentence: discourse.to_string(),
        expected: "anaphora",
    };
    let (first, second) = split_discourse(discourse).ok_or_else(wrong)?;
    let sw = words(second);
    if sw.len() != 3 || !sw[0].eq_ignore_ascii_case("it") || !sw[1].eq_ignore_ascii_case("is") {
        return Err(wrong());
    }
    let adj = lexicon
        .find(&sw[2], Pos::Jj)
        .and_then(|e| e.predicate.clone())
        .ok_or_else(wrong)?;
    let tree = parse_all(first, grammar, lexicon)?.remove(0);
    let m = meaning(&tree, lexicon)?;
    let candidates: Vec<&Entity> = m.entities.iter().filter(|e| !e.is_person).collect();
    if candidates.is_empty() {
        return Err(wrong());
    }
    Ok(candidates
        .iter()
        .map(|e| {
            let raw = Formula::and(vec![m.formula.clone(), un(&adj, e.term.clone())]);
            Reading {
                parse: Some(tree.clone()),
                gloss: format!("It = {}. {}", e.head, gloss(&raw, lexicon)),
                raw,
            }
        })
        .collect())
}

/// Object-join reading first, then subject-join, for "NNP V NNP. Also NNP.".
pub(crate) fn ellipsis(discourse: &str, grammar: &Grammar, lexicon: &Lexicon) -> Result<Vec<Reading>, CorpusError> {
    let wrong = || CorpusError::WrongTemplate {
        sentence: discourse.to_string(),
        expected: "ellipsis",
    };
    let (first, second) = split_discourse(discourse).ok_or_else(wrong)?;
    let sw = words(second);
    if sw.len() != 2 || !sw[0].eq_ignore_ascii_case("also") {
        return Err(wrong());
    }
    let extra = lexicon.find(&sw[1], Pos::Nnp).ok_or_else(wrong)?.surface.clone();
    let toks = lexicon.tokenize(first)?;
    let is = |i: usize, tag: &str| toks.get(i).is_some_and(|t| t.has_tag(tag));
    if toks.len() != 3 || !is(0, "NNP") || !is(1, "VBD") || !is(2, "NNP") {
        return Err(wrong());
    }
    let (subj, verb, obj) = (&toks[0].text, &toks[1].text, &toks[2].text);
    let sentences = [
        format!("{subj} {verb} {obj} and {extra}"),
        format!("{subj} and {extra} {verb} {obj}"),
    ];
    sentences
        .iter()
        .map(|s| {
            let tree = parse_all(s, grammar, lexicon)?.remove(0);
            let raw = meaning(&tree, lexicon)?.formula;
            Ok(Reading {
                gloss: format!("{s}."),
                parse: Some(tree),
                raw,
            })
        })
        .collect()
}

/// One reading per parse, in canonical parse order.
pub(crate) fn syntactic(sentence: &str, grammar: &Grammar, lexicon: &Lexicon) -> Result<Vec<Reading>, CorpusError> {
    parse_all(sentence, grammar, lexicon)?
        .into_iter()
        .map(|tree| {
            let raw = meaning(&tree, lexicon)?.formula;
            Ok(Reading {
                gloss: gloss(&raw, lexicon),
                parse: Some(tree),
                raw,
            })
        })
        .collect()
}

/// English description of a raw formula's visual content.
pub fn gloss(raw: &Formula, lexicon: &Lexicon) -> String {
    let mut class: BTreeMap<String, String> = BTreeMap::new();
    let mut color: BTreeMap<String, String> = BTreeMap::new();
    for a in raw.atoms() {
        if a.args.len() != 1 {
            continue;
        }
        let t = a.args[0].to_string();
        match a.predicate.as_str() {
            "yellow" | "green" => {
                color.insert(t, a.predicate.clone());
            }
            p => {
                class.entry(t).or_insert_with(|| p.to_string());
            }
        }
    }
    // Number repeated descriptions: "the chair", "the other chair".
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    let mut order: Vec<String> = Vec::new();
    for a in raw.atoms() {
        for t in &a.args {
            let s = t.to_string();
            if !order.contains(&s) {
                order.push(s);
            }
        }
    }
    let mut names: BTreeMap<String, String> = BTreeMap::new();
    for t in order {
        if t.starts_with(|c: char| c.is_ascii_uppercase()) {
            names.insert(t.clone(), t);
            continue;
        }
        let noun = match class.get(&t).map(String::as_str) {
            Some("person") => "person".to_string(),
            Some(p) => p.to_string(),
            None => "thing".to_string(),
        };
        let phrase = match color.get(&t) {
            Some(c) => format!("{c} {noun}"),
            None => noun.clone(),
        };
        let n = seen.entry(phrase.clone()).or_insert(0);
        *n += 1;
        let np = match (*n, noun.as_str()) {
            (1, "person") => "someone".to_string(),
            (_, "person") => "someone else".to_string(),
            (1, _) => format!("the {phrase}"),
            _ => format!("the other {phrase}"),
        };
        names.insert(t, np);
    }
    let text = describe(raw, &names, lexicon);
    let mut out = String::new();
    let mut chars = text.chars();
    if let Some(c) = chars.next() {
        out.extend(c.to_uppercase());
        out.push_str(chars.as_str());
    }
    out.push('.');
    out
}

fn describe(f: &Formula, names: &BTreeMap<String, String>, lexicon: &Lexicon) -> String {
    match f {
        Formula::Atom(a) => {
            let arg = |i: usize| names[&a.args[i].to_string()].clone();
            if a.args.len() == 1 {
                return match a.predicate.as_str() {
                    "yellow" | "green" => format!("{} is {}", arg(0), a.predicate),
                    _ => String::new(),
                };
            }
            let present = lexicon
                .entries
                .iter()
                .find(|e| e.predicate.as_deref() == Some(a.predicate.as_str()))
                .and_then(|e| e.verb.as_ref().map(|v| v.present.clone()));
            match (a.predicate.as_str(), present) {
                ("neq", _) => String::new(),
                ("left_of", _) => format!("{} is left of {}", arg(0), arg(1)),
                ("right_of", _) => format!("{} is right of {}", arg(0), arg(1)),
                ("with", _) => format!("{} is with {}", arg(1), arg(0)),
                ("on", _) => format!("{} is on {}", arg(0), arg(1)),
                (_, Some(v)) => format!("{} {v} {}", arg(0), arg(1)),
                (p, None) => format!("{p}({}, {})", arg(0), arg(1)),
            }
        }
        Formula::And(cs) => cs
            .iter()
            .map(|c| describe(c, names, lexicon))
            .filter(|s| !s.is_empty())
            .collect::<Vec<_>>()
            .join("; "),
        Formula::Or(cs) => {
            let parts: Vec<String> = cs
                .iter()
                .map(|c| format!("({})", describe(c, names, lexicon)))
                .collect();
            format!("either {}", parts.join(" or "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lex() -> Lexicon {
        Lexicon::default_lexicon()
    }

    fn readings(s: &str) -> Vec<String> {
        syntactic(s, &Grammar::default_grammar(), &lex())
            .unwrap()
            .iter()
            .map(|r| r.formula().to_string())
            .collect()
    }

    #[test]
    fn simple_sentence_composes_directly() {
        assert_eq!(readings("Sam held the chair"), ["and(person(u), chair(x), hold(u,x))"]);
    }

    #[test]
    fn pp_attachment_readings() {
        let r = readings("Sam approached the chair with a bag");
        assert_eq!(
            r,
            [
                "and(person(u), chair(x), approach(u,x), bag(y), with(u,y))",
                "and(person(u), chair(x), bag(y), on(y,x), approach(u,x))",
            ]
        );
    }

    #[test]
    fn vp_attachment_readings() {
        let r = readings("Claire looked at Bill picking up a chair");
        assert_eq!(
            r,
            [
                "and(person(u), person(v), neq(u,v), chair(x), pick_up(u,x), look_at(v,u))",
                "and(person(u), person(v), neq(u,v), look_at(u,v), chair(x), pick_up(u,x))",
            ]
        );
    }

    #[test]
    fn adjective_scope_readings() {
        let r = readings("Claire held a green bag and chair");
        assert_eq!(
            r,
            [
                "and(person(u), bag(x), green(x), hold(u,x), chair(y), green(y), hold(u,y))",
                "and(person(u), bag(x), green(x), hold(u,x), chair(y), hold(u,y))",
            ]
        );
    }

    #[test]
    fn or_and_readings() {
        let r = readings("Claire held the chair or the bag and the telescope");
        assert_eq!(
            r,
            [
                "and(person(u), or(and(chair(x), hold(u,x)), and(bag(y), hold(u,y), telescope(z), hold(u,z))))",
                "and(person(u), or(and(chair(x), hold(u,x)), and(bag(y), hold(u,y))), telescope(z), hold(u,z))",
                "and(person(u), chair(x), hold(u,x), bag(y), hold(u,y), telescope(z), hold(u,z))",
            ]
        );
    }

    #[test]
    fn subject_coordination_shares_the_object() {
        let r = readings("Sam and Bill held the chair");
        assert_eq!(
            r,
            ["and(person(u), person(v), neq(u,v), chair(x), hold(u,x), hold(v,x))"]
        );
    }

    #[test]
    fn quantified_named_readings() {
        let r = quantified_interpretations("Claire and Bill moved a chair", &lex()).unwrap();
        assert_eq!(
            r.iter().map(ToString::to_string).collect::<Vec<_>>(),
            [
                "and(person(u), person(v), neq(u,v), chair(x), move(u,x), move(v,x))",
                "and(person(u), person(v), neq(u,v), chair(x), chair(y), move(u,x), move(v,y), neq(x,y))",
            ]
        );
    }

    #[test]
    fn quantified_someone_readings() {
        let r = quantified_interpretations("Someone moved the two chairs", &lex()).unwrap();
        assert_eq!(
            r.iter().map(ToString::to_string).collect::<Vec<_>>(),
            [
                "and(chair(x), chair(y), neq(x,y), person(u), move(u,x), move(u,y))",
                "and(chair(x), chair(y), neq(x,y), person(u), person(v), neq(u,v), move(u,x), move(v,y))",
            ]
        );
    }

    #[test]
    fn quantified_rejects_plain_sentence() {
        assert!(matches!(
            quantified_interpretations("Sam held the chair", &lex()),
            Err(CorpusError::WrongTemplate { .. })
        ));
    }

    #[test]
    fn anaphora_resolves_each_antecedent() {
        let r = anaphora(
            "Claire held the bag and the chair. It is yellow.",
            &Grammar::default_grammar(),
            &lex(),
        )
        .unwrap();
        assert_eq!(r.len(), 2);
        assert!(r[0].gloss.starts_with("It = bag"));
        assert!(r[0].formula().to_string().ends_with("yellow(x))"));
        assert!(r[1].formula().to_string().ends_with("yellow(y))"));
        let single = anaphora("Sam held the bag. It is yellow.", &Grammar::default_grammar(), &lex()).unwrap();
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn ellipsis_joins_object_then_subject() {
        let r = ellipsis("Claire looked at Bill. Also Sam.", &Grammar::default_grammar(), &lex()).unwrap();
        assert_eq!(r[0].gloss, "Claire looked at Bill and Sam.");
        assert_eq!(r[1].gloss, "Claire and Sam looked at Bill.");
        assert_ne!(r[0].formula(), r[1].formula());
        assert!(ellipsis("Also Sam.", &Grammar::default_grammar(), &lex()).is_err());
        assert_eq!(
            ellipsis("Sam left Bill. Also Clark.", &Grammar::default_grammar(), &lex())
                .unwrap()
                .len(),
            2
        );
    }

    #[test]
    fn glosses_read_naturally() {
        let r = syntactic(
            "Sam approached the chair with a bag",
            &Grammar::default_grammar(),
            &lex(),
        )
        .unwrap();
        assert_eq!(r[0].gloss, "Sam approaches the chair; the bag is with Sam.");
        assert_eq!(r[1].gloss, "The bag is on the chair; Sam approaches the chair.");
    }
}
