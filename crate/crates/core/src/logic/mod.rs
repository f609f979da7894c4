//! First-order meaning representation for sentence interpretations.
//!
//! Formulas are existentially closed trees of atoms joined by `and` / `or`.
//! Variables are declared implicitly by a class atom (`person(u)`,
//! `chair(x)`, ...) in an enclosing conjunction; proper names are constants
//! until [`name_to_person`] replaces them with person-sorted variables.
//!
//! The textual form is a prefix notation, for example
//! `and(chair(x), move(Claire,x), move(Bill,x))`. See [`Formula::parse`].

mod normalize;
mod signature;
mod syntax;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use normalize::{normalize, theta_of, ArgMap, ConjunctiveBranch, DEFAULT_BRANCH_CAP};
pub use signature::{signature, ArgSort, PredicateSig, PREDICATES};
pub use syntax::ParseFormulaError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sort {
    Person,
    Object,
}

/// An atom argument: a variable or a proper-name constant.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Name(String),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn name(name: impl Into<String>) -> Self {
        Term::Name(name.into())
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            Term::Name(_) => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) | Term::Name(v) => f.write_str(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }

    pub fn unary(predicate: &str, arg: Term) -> Self {
        Atom::new(predicate, vec![arg])
    }

    pub fn binary(predicate: &str, a: Term, b: Term) -> Self {
        Atom::new(predicate, vec![a, b])
    }

    pub fn neq(a: Term, b: Term) -> Self {
        Atom::new("neq", vec![a, b])
    }

    /// True for the `neq` (not-equal) atom.
    pub fn is_neq(&self) -> bool {
        self.predicate == "neq"
    }

    /// Sort declared by this atom when it is a class predicate.
    pub fn declared_sort(&self) -> Option<Sort> {
        signature(&self.predicate).and_then(|s| s.declares)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.predicate)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(Atom),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    pub fn atom(a: Atom) -> Self {
        Formula::Atom(a)
    }

    /// Conjunction with nested conjunctions spliced in. A single child is
    /// returned as-is.
    pub fn and(children: Vec<Formula>) -> Self {
        let mut flat = Vec::with_capacity(children.len());
        for c in children {
            match c {
                Formula::And(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        if flat.len() == 1 {
            flat.pop().unwrap()
        } else {
            Formula::And(flat)
        }
    }

    /// Disjunction with nested disjunctions spliced in.
    pub fn or(children: Vec<Formula>) -> Self {
        let mut flat = Vec::with_capacity(children.len());
        for c in children {
            match c {
                Formula::Or(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        if flat.len() == 1 {
            flat.pop().unwrap()
        } else {
            Formula::Or(flat)
        }
    }

    pub fn parse(text: &str) -> Result<Self, ParseFormulaError> {
        syntax::parse(text)
    }

    /// All atoms in textual order.
    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Atom>) {
        match self {
            Formula::Atom(a) => out.push(a),
            Formula::And(cs) | Formula::Or(cs) => cs.iter().for_each(|c| c.collect_atoms(out)),
        }
    }

    /// Proper names in order of first occurrence.
    pub fn names(&self) -> Vec<String> {
        let mut seen = Vec::new();
        for a in self.atoms() {
            for t in &a.args {
                if let Term::Name(n) = t {
                    if !seen.contains(n) {
                        seen.push(n.clone());
                    }
                }
            }
        }
        seen
    }

    /// Variables in order of first occurrence.
    pub fn variables(&self) -> Vec<String> {
        let mut seen = Vec::new();
        for a in self.atoms() {
            for t in &a.args {
                if let Term::Var(v) = t {
                    if !seen.contains(v) {
                        seen.push(v.clone());
                    }
                }
            }
        }
        seen
    }

    pub fn has_disjunction(&self) -> bool {
        match self {
            Formula::Atom(_) => false,
            Formula::Or(_) => true,
            Formula::And(cs) => cs.iter().any(Formula::has_disjunction),
        }
    }

    /// Applies `f` to every term, rebuilding the tree.
    pub fn map_terms(&self, f: &mut impl FnMut(&Term) -> Term) -> Formula {
        match self {
            Formula::Atom(a) => Formula::Atom(Atom {
                predicate: a.predicate.clone(),
                args: a.args.iter().map(f).collect(),
            }),
            Formula::And(cs) => Formula::And(cs.iter().map(|c| c.map_terms(f)).collect()),
            Formula::Or(cs) => Formula::Or(cs.iter().map(|c| c.map_terms(f)).collect()),
        }
    }

    /// Sort of each variable as declared by class atoms anywhere in the
    /// formula. Conflicting declarations keep the first one seen.
    pub fn variable_sorts(&self) -> BTreeMap<String, Sort> {
        let mut sorts = BTreeMap::new();
        for a in self.atoms() {
            if let (Some(sort), Some(Term::Var(v))) = (a.declared_sort(), a.args.first()) {
                sorts.entry(v.clone()).or_insert(sort);
            }
        }
        sorts
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::And(cs) | Formula::Or(cs) => {
                f.write_str(if matches!(self, Formula::And(_)) { "and(" } else { "or(" })?;
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl std::str::FromStr for Formula {
    type Err = ParseFormulaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Formula::parse(s)
    }
}

impl Serialize for Formula {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Formula {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Formula::parse(&text).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("`{predicate}` takes {expected} argument(s), got {got}")]
    Arity {
        predicate: String,
        expected: usize,
        got: usize,
    },
    #[error("variable `{var}` in `{atom}` is not declared by a class atom in scope")]
    Unbound { var: String, atom: String },
    #[error("variable `{var}` declared both {first:?} and {second:?}")]
    SortConflict { var: String, first: Sort, second: Sort },
    #[error("argument {slot} of `{atom}` must be a {expected:?}")]
    SortMismatch { atom: String, slot: usize, expected: Sort },
    #[error("`{0}` must relate two distinct terms")]
    DegenerateNeq(String),
    #[error("empty {0}")]
    EmptyConnective(&'static str),
}

/// Checks arity, variable binding and sort agreement. Returns every
/// violation found rather than stopping at the first.
pub fn validate(formula: &Formula) -> Result<(), Vec<ValidationError>> {
    let mut errors = Vec::new();
    let sorts = declared_sorts(formula, &mut errors);
    check_scopes(formula, &HashSet::new(), &sorts, &mut errors);
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

fn declared_sorts(formula: &Formula, errors: &mut Vec<ValidationError>) -> BTreeMap<String, Sort> {
    let mut sorts: BTreeMap<String, Sort> = BTreeMap::new();
    for a in formula.atoms() {
        if let (Some(sort), Some(Term::Var(v))) = (a.declared_sort(), a.args.first()) {
            match sorts.get(v) {
                Some(&first) if first != sort => errors.push(ValidationError::SortConflict {
                    var: v.clone(),
                    first,
                    second: sort,
                }),
                Some(_) => {}
                None => {
                    sorts.insert(v.clone(), sort);
                }
            }
        }
    }
    sorts
}

/// Variables guaranteed declared whenever `formula` holds.
fn declared_here(formula: &Formula) -> HashSet<String> {
    match formula {
        Formula::Atom(a) => match (a.declared_sort(), a.args.first()) {
            (Some(_), Some(Term::Var(v))) => HashSet::from([v.clone()]),
            _ => HashSet::new(),
        },
        Formula::And(cs) => cs.iter().flat_map(declared_here).collect(),
        Formula::Or(cs) => {
            let mut iter = cs.iter().map(declared_here);
            let first = iter.next().unwrap_or_default();
            iter.fold(first, |acc, s| acc.intersection(&s).cloned().collect())
        }
    }
}

fn check_scopes(
    formula: &Formula,
    outer: &HashSet<String>,
    sorts: &BTreeMap<String, Sort>,
    errors: &mut Vec<ValidationError>,
) {
    match formula {
        Formula::Atom(a) => {
            let own = declared_here(formula);
            check_atom(a, outer, &own, sorts, errors);
        }
        Formula::And(cs) => {
            if cs.is_empty() {
                errors.push(ValidationError::EmptyConnective("and"));
            }
            let mut scope = outer.clone();
            scope.extend(declared_here(formula));
            for c in cs {
                check_scopes(c, &scope, sorts, errors);
            }
        }
        Formula::Or(cs) => {
            if cs.is_empty() {
                errors.push(ValidationError::EmptyConnective("or"));
            }
            for c in cs {
                check_scopes(c, outer, sorts, errors);
            }
        }
    }
}

fn check_atom(
    atom: &Atom,
    outer: &HashSet<String>,
    own: &HashSet<String>,
    sorts: &BTreeMap<String, Sort>,
    errors: &mut Vec<ValidationError>,
) {
    let Some(sig) = signature(&atom.predicate) else {
        errors.push(ValidationError::UnknownPredicate(atom.predicate.clone()));
        return;
    };
    if atom.args.len() != sig.arity {
        errors.push(ValidationError::Arity {
            predicate: atom.predicate.clone(),
            expected: sig.arity,
            got: atom.args.len(),
        });
        return;
    }
    let term_sort = |t: &Term| match t {
        Term::Name(_) => Some(Sort::Person),
        Term::Var(v) => sorts.get(v).copied(),
    };
    for (slot, t) in atom.args.iter().enumerate() {
        if let Term::Var(v) = t {
            if !outer.contains(v) && !own.contains(v) {
                errors.push(ValidationError::Unbound {
                    var: v.clone(),
                    atom: atom.to_string(),
                });
            }
        }
        let expected = match sig.args[slot] {
            ArgSort::Person => Some(Sort::Person),
            ArgSort::Object => Some(Sort::Object),
            ArgSort::Any => None,
        };
        if let (Some(expected), Some(actual)) = (expected, term_sort(t)) {
            if expected != actual {
                errors.push(ValidationError::SortMismatch {
                    atom: atom.to_string(),
                    slot,
                    expected,
                });
            }
        }
    }
    if atom.is_neq() {
        if atom.args[0] == atom.args[1] {
            errors.push(ValidationError::DegenerateNeq(atom.to_string()));
        } else if let (Some(a), Some(b)) = (term_sort(&atom.args[0]), term_sort(&atom.args[1])) {
            if a != b {
                errors.push(ValidationError::SortMismatch {
                    atom: atom.to_string(),
                    slot: 1,
                    expected: a,
                });
            }
        }
    }
}

const PERSON_VARS: [&str; 3] = ["u", "v", "w"];
const OBJECT_VARS: [&str; 3] = ["x", "y", "z"];

fn fresh_name(pool: &[&str], prefix: &str, index: usize, used: &HashSet<String>) -> String {
    let mut i = index;
    loop {
        let candidate = match pool.get(i) {
            Some(s) => s.to_string(),
            None => format!("{prefix}{i}"),
        };
        if !used.contains(&candidate) {
            return candidate;
        }
        i += 1;
    }
}

/// Replaces every distinct proper name with a fresh person variable,
/// declares it with `person(·)` and adds pairwise `neq` atoms between the
/// replacements. Repeated names share one variable.
pub fn name_to_person(formula: &Formula) -> Formula {
    let names = formula.names();
    if names.is_empty() {
        return formula.clone();
    }
    let mut used: HashSet<String> = formula.variables().into_iter().collect();
    let mut mapping = BTreeMap::new();
    for (i, n) in names.iter().enumerate() {
        let fresh = fresh_name(&PERSON_VARS, "p", i, &used);
        used.insert(fresh.clone());
        mapping.insert(n.clone(), fresh);
    }
    let vars: Vec<&String> = names.iter().map(|n| &mapping[n]).collect();
    let mut prefix: Vec<Formula> = vars
        .iter()
        .map(|v| Formula::Atom(Atom::unary("person", Term::var(*v))))
        .collect();
    for i in 0..vars.len() {
        for j in i + 1..vars.len() {
            prefix.push(Formula::Atom(Atom::neq(Term::var(vars[i]), Term::var(vars[j]))));
        }
    }
    let body = formula.map_terms(&mut |t| match t {
        Term::Name(n) => Term::Var(mapping[n].clone()),
        other => other.clone(),
    });
    prefix.push(body);
    Formula::and(prefix)
}

/// Renames variables to `u, v, w, ...` (persons) and `x, y, z, ...`
/// (objects) in order of first occurrence.
pub fn canonical_variables(formula: &Formula) -> Formula {
    let sorts = formula.variable_sorts();
    let mut mapping: BTreeMap<String, String> = BTreeMap::new();
    let (mut persons, mut objects) = (0usize, 0usize);
    let none = HashSet::new();
    for v in formula.variables() {
        let fresh = if sorts.get(&v) == Some(&Sort::Person) {
            persons += 1;
            fresh_name(&PERSON_VARS, "p", persons - 1, &none)
        } else {
            objects += 1;
            fresh_name(&OBJECT_VARS, "o", objects - 1, &none)
        };
        mapping.insert(v, fresh);
    }
    formula.map_terms(&mut |t| match t {
        Term::Var(v) => Term::Var(mapping[v].clone()),
        other => other.clone(),
    })
}

/// Distinct atoms used anywhere in the formula, for diagnostics.
pub fn atom_set(formula: &Formula) -> BTreeSet<Atom> {
    formula.atoms().into_iter().cloned().collect()
}
