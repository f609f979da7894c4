//! Joint MAP decoding of a conjunctive branch against a detection trace.
//!
//! The objective sums, over frames, detection scores `f` and motion
//! coherence `g` for every variable's chosen detection, plus observation
//! `h` and transition `a` log-scores for every predicate HMM. The exact
//! decoder runs Viterbi over the cross product of all variables'
//! detections and all predicates' states. Because the transition term
//! factors by coordinate, each frame costs about `S · ΣD` rather than `S²`
//! for `S` joint states.

mod decode;
mod lattice;
pub mod oracle;

use std::collections::{BTreeMap, BTreeSet};

pub use lattice::{Breakdown, JointState, MapResult};

use crate::error::{InferenceError, RecognitionError};
use crate::logic::{normalize, Atom, ConjunctiveBranch, Formula, Sort, Term, DEFAULT_BRANCH_CAP};
use crate::perception::{motion_coherence, VideoTrace};
use crate::recognition::PredicateLibrary;
use lattice::{Lattice, PredLattice, NEG_INF};

/// Joint states per frame above which exact decoding refuses to run.
pub const DEFAULT_STATE_CAP: u128 = 2_000_000;
/// Assignment sequences above which exhaustive search refuses to run.
pub const BRUTE_FORCE_LIMIT: u128 = 10_000_000;

fn build(branch: &ConjunctiveBranch, trace: &VideoTrace, lib: &PredicateLibrary) -> Result<Lattice, InferenceError> {
    let frames = &trace.frames;
    if frames.len() < 2 {
        return Err(InferenceError::TooShort(frames.len()));
    }
    if let Some(t) = frames.iter().position(Vec::is_empty) {
        return Err(InferenceError::EmptyFrame(t));
    }
    let counts: Vec<usize> = frames.iter().map(Vec::len).collect();
    let f = frames
        .iter()
        .map(|fr| fr.iter().map(|d| d.confidence).collect())
        .collect();
    let bw = lib.thresholds.motion_bandwidth;
    let g = (0..frames.len())
        .map(|t| {
            if t == 0 {
                return Vec::new();
            }
            let mut out = Vec::with_capacity(counts[t - 1] * counts[t]);
            for p in &frames[t - 1] {
                for c in &frames[t] {
                    out.push(motion_coherence(p, c, bw));
                }
            }
            out
        })
        .collect();
    let mut preds = Vec::with_capacity(branch.atoms.len());
    for (atom, map) in branch.atoms.iter().zip(&branch.theta) {
        let hmm = lib.get(&atom.predicate)?;
        let got = 1 + map.second.is_some() as usize;
        if got != hmm.arity {
            return Err(RecognitionError::Arity {
                predicate: atom.predicate.clone(),
                expected: hmm.arity,
                got,
            }
            .into());
        }
        let k = hmm.state_count();
        let h = frames
            .iter()
            .map(|fr| {
                let mut out = Vec::with_capacity(k * fr.len() * fr.len());
                for state in 0..k {
                    for d1 in fr {
                        match map.second {
                            Some(_) => {
                                for d2 in fr {
                                    out.push(lib.observe_unchecked(hmm, state, d1, d2));
                                }
                            }
                            None => out.push(lib.observe_unchecked(hmm, state, d1, d1)),
                        }
                    }
                }
                out
            })
            .collect();
        let mask = |m: &[bool]| m.iter().map(|&b| if b { 0.0 } else { NEG_INF }).collect();
        preds.push(PredLattice {
            states: k,
            first: map.first,
            second: map.second,
            h,
            a: hmm.log_transition.iter().flatten().copied().collect(),
            init: mask(&hmm.initial),
            accept: mask(&hmm.accepting),
        });
    }
    Ok(Lattice {
        counts,
        vars: branch.variables.len(),
        f,
        g,
        preds,
    })
}

/// Exact MAP score of one conjunctive branch.
pub fn score_branch(
    branch: &ConjunctiveBranch,
    trace: &VideoTrace,
    lib: &PredicateLibrary,
) -> Result<MapResult, InferenceError> {
    score_branch_capped(branch, trace, lib, DEFAULT_STATE_CAP)
}

/// [`score_branch`] with an explicit per-frame joint-state cap.
pub fn score_branch_capped(
    branch: &ConjunctiveBranch,
    trace: &VideoTrace,
    lib: &PredicateLibrary,
    cap: u128,
) -> Result<MapResult, InferenceError> {
    decode::exact(&build(branch, trace, lib)?, cap)
}

/// Exhaustive-search oracle for [`score_branch`].
pub fn brute_force_score(
    branch: &ConjunctiveBranch,
    trace: &VideoTrace,
    lib: &PredicateLibrary,
) -> Result<MapResult, InferenceError> {
    decode::brute(&build(branch, trace, lib)?, BRUTE_FORCE_LIMIT)
}

/// Number of assignment sequences [`brute_force_score`] would enumerate.
pub fn brute_force_paths(
    branch: &ConjunctiveBranch,
    trace: &VideoTrace,
    lib: &PredicateLibrary,
) -> Result<u128, InferenceError> {
    Ok(decode::path_count(&build(branch, trace, lib)?))
}

/// Largest per-frame joint state count; a beam this wide is exact.
pub fn state_space(
    branch: &ConjunctiveBranch,
    trace: &VideoTrace,
    lib: &PredicateLibrary,
) -> Result<u128, InferenceError> {
    let l = build(branch, trace, lib)?;
    Ok((0..trace.frame_count()).map(|t| l.state_count(t)).max().unwrap_or(0))
}

/// Beam-limited Viterbi keeping `width` joint states per frame.
pub fn beam_score(
    branch: &ConjunctiveBranch,
    trace: &VideoTrace,
    lib: &PredicateLibrary,
    width: usize,
) -> Result<MapResult, InferenceError> {
    if width == 0 {
        return Err(InferenceError::ZeroBeam);
    }
    decode::beam(&build(branch, trace, lib)?, width)
}

/// Best branch of a formula's disjunctive normal form, with its index
/// (lowest index on ties).
pub fn score_formula(
    formula: &Formula,
    trace: &VideoTrace,
    lib: &PredicateLibrary,
) -> Result<(MapResult, usize), InferenceError> {
    score_formula_with(formula, |b| score_branch(b, trace, lib))
}

/// [`score_formula`] with a caller-chosen branch scorer (for example a beam).
pub fn score_formula_with(
    formula: &Formula,
    mut score: impl FnMut(&ConjunctiveBranch) -> Result<MapResult, InferenceError>,
) -> Result<(MapResult, usize), InferenceError> {
    let branches = normalize(formula, DEFAULT_BRANCH_CAP)?;
    let mut best: Option<(MapResult, usize)> = None;
    for (i, b) in branches.iter().enumerate() {
        let r = score(b)?;
        if best.as_ref().is_none_or(|(m, _)| r.total > m.total) {
            best = Some((r, i));
        }
    }
    best.ok_or(InferenceError::NothingShared)
}

/// Atoms that hold in every branch of a formula.
fn entailed_atoms(formula: &Formula) -> Result<Vec<Atom>, InferenceError> {
    let branches = normalize(formula, DEFAULT_BRANCH_CAP)?;
    let mut out: Vec<Atom> = branches.first().map(|b| b.atoms.clone()).unwrap_or_default();
    for b in &branches[1..] {
        out.retain(|a| b.atoms.contains(a));
    }
    Ok(out)
}

fn rename(atom: &Atom, map: &BTreeMap<String, String>) -> Atom {
    Atom::new(
        atom.predicate.clone(),
        atom.args
            .iter()
            .map(|t| match t {
                Term::Var(v) => Term::Var(map.get(v).cloned().unwrap_or_else(|| v.clone())),
                other => other.clone(),
            })
            .collect(),
    )
}

/// Renaming of `other`'s variables onto `base`'s (same sort, injective)
/// that shares the most atoms; identity preferred on ties.
fn best_overlap(base: &[Atom], other: &[Atom], sorts: &BTreeMap<String, Sort>) -> Vec<Atom> {
    let vars = |atoms: &[Atom]| -> Vec<String> {
        let mut vs: Vec<String> = Vec::new();
        for a in atoms {
            for t in &a.args {
                if let Some(v) = t.as_var() {
                    if !vs.iter().any(|x| x == v) {
                        vs.push(v.to_string());
                    }
                }
            }
        }
        vs
    };
    let (bv, ov) = (vars(base), vars(other));
    let base_set: BTreeSet<&Atom> = base.iter().collect();
    let mut best: (usize, BTreeMap<String, String>) = (0, BTreeMap::new());
    let mut found = false;

    fn search(
        i: usize,
        ov: &[String],
        bv: &[String],
        sorts: &BTreeMap<String, Sort>,
        map: &mut BTreeMap<String, String>,
        used: &mut BTreeSet<String>,
        visit: &mut dyn FnMut(&BTreeMap<String, String>),
    ) {
        if i == ov.len() {
            visit(map);
            return;
        }
        let v = &ov[i];
        let mut targets: Vec<String> = Vec::new();
        if bv.contains(v) {
            targets.push(v.clone());
        }
        for b in bv {
            if b != v && sorts.get(b) == sorts.get(v) {
                targets.push(b.clone());
            }
        }
        // Mapping to a fresh name shares nothing through this variable.
        targets.push(format!("{v}'"));
        for tgt in targets {
            if used.contains(&tgt) {
                continue;
            }
            used.insert(tgt.clone());
            map.insert(v.clone(), tgt.clone());
            search(i + 1, ov, bv, sorts, map, used, visit);
            map.remove(v);
            used.remove(&tgt);
        }
    }

    let mut visit = |map: &BTreeMap<String, String>| {
        let n = other.iter().filter(|a| base_set.contains(&rename(a, map))).count();
        if !found || n > best.0 {
            best = (n, map.clone());
            found = true;
        }
    };
    search(
        0,
        &ov,
        &bv,
        sorts,
        &mut BTreeMap::new(),
        &mut BTreeSet::new(),
        &mut visit,
    );
    let renamed: BTreeSet<Atom> = other.iter().map(|a| rename(a, &best.1)).collect();
    base.iter().filter(|a| renamed.contains(a)).cloned().collect()
}

/// The atoms every interpretation agrees on, up to variable renaming,
/// as one conjunctive branch.
pub fn common_branch(interpretations: &[Formula]) -> Result<ConjunctiveBranch, InferenceError> {
    if interpretations.len() < 2 {
        return Err(InferenceError::TooFewInterpretations(interpretations.len()));
    }
    let mut shared = entailed_atoms(&interpretations[0])?;
    for f in &interpretations[1..] {
        let mut sorts = interpretations[0].variable_sorts();
        sorts.extend(f.variable_sorts());
        shared = best_overlap(&shared, &entailed_atoms(f)?, &sorts);
    }
    if shared.is_empty() {
        return Err(InferenceError::NothingShared);
    }
    Ok(ConjunctiveBranch::from_atoms(shared)?)
}

/// Scores only what the interpretations have in common: the generic model
/// that accepts any of them.
pub fn score_common(
    interpretations: &[Formula],
    trace: &VideoTrace,
    lib: &PredicateLibrary,
) -> Result<MapResult, InferenceError> {
    score_branch(&common_branch(interpretations)?, trace, lib)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> Formula {
        Formula::parse(s).unwrap()
    }

    #[test]
    fn common_part_of_attachment_readings() {
        let b = common_branch(&[
            f("and(person(u), chair(x), approach(u,x), bag(y), with(u,y))"),
            f("and(person(u), chair(x), bag(y), on(y,x), approach(u,x))"),
        ])
        .unwrap();
        let names: Vec<String> = b.atoms.iter().map(|a| a.to_string()).collect();
        assert_eq!(names, ["person(u)", "chair(x)", "approach(u,x)", "bag(y)"]);
    }

    #[test]
    fn common_part_survives_renaming() {
        let b = common_branch(&[
            f("and(person(u), chair(x), hold(u,x))"),
            f("and(person(v), chair(y), hold(v,y), bag(z))"),
        ])
        .unwrap();
        assert_eq!(b.atoms.len(), 3);
    }

    #[test]
    fn disjoint_interpretations_share_nothing() {
        let r = common_branch(&[f("chair(x)"), f("person(u)")]);
        assert!(matches!(r, Err(InferenceError::NothingShared)));
    }

    #[test]
    fn disjunctions_contribute_only_entailed_atoms() {
        let b = common_branch(&[
            f("and(person(u), or(and(chair(x), hold(u,x)), and(bag(y), hold(u,y))))"),
            f("and(person(u), chair(x), hold(u,x))"),
        ])
        .unwrap();
        assert_eq!(b.atoms.len(), 1);
    }
}
