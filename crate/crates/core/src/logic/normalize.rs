use super::{Atom, Formula, Term};
use crate::error::LogicError;

/// Maximum number of disjunctive-normal-form branches `normalize` will build.
pub const DEFAULT_BRANCH_CAP: usize = 64;

/// Variable indices filling an atom's argument slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ArgMap {
    pub first: usize,
    pub second: Option<usize>,
}

/// One disjunct of a formula's DNF: a pure conjunction of atoms over a
/// fixed variable list. Variable `i` is the `i`-th tracker; atom `p` is the
/// `p`-th predicate HMM, wired to its trackers by `theta[p]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjunctiveBranch {
    pub variables: Vec<String>,
    pub atoms: Vec<Atom>,
    pub theta: Vec<ArgMap>,
}

impl ConjunctiveBranch {
    /// Builds a branch from atoms over variables only, in first-occurrence
    /// order. Duplicate atoms are dropped.
    pub fn from_atoms(atoms: Vec<Atom>) -> Result<Self, LogicError> {
        let mut unique: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            if !unique.contains(&a) {
                unique.push(a);
            }
        }
        let mut variables: Vec<String> = Vec::new();
        let mut theta = Vec::with_capacity(unique.len());
        for a in &unique {
            let mut idx = [0usize; 2];
            if a.args.is_empty() || a.args.len() > 2 {
                return Err(LogicError::UnsupportedArity { atom: a.to_string() });
            }
            for (slot, t) in a.args.iter().enumerate() {
                let v = match t {
                    Term::Var(v) => v,
                    Term::Name(n) => {
                        return Err(LogicError::UnmappedName(n.clone()));
                    }
                };
                idx[slot] = match variables.iter().position(|x| x == v) {
                    Some(i) => i,
                    None => {
                        variables.push(v.clone());
                        variables.len() - 1
                    }
                };
            }
            theta.push(ArgMap {
                first: idx[0],
                second: (a.args.len() == 2).then_some(idx[1]),
            });
        }
        Ok(ConjunctiveBranch {
            variables,
            atoms: unique,
            theta,
        })
    }

    /// The argument map; one entry per atom.
    pub fn theta(&self) -> &[ArgMap] {
        &self.theta
    }

    /// Reconstructs the atoms from predicate symbols and `theta`.
    pub fn rebuild_atoms(&self) -> Vec<Atom> {
        self.atoms
            .iter()
            .zip(&self.theta)
            .map(|(a, m)| {
                let mut args = vec![Term::Var(self.variables[m.first].clone())];
                if let Some(s) = m.second {
                    args.push(Term::Var(self.variables[s].clone()));
                }
                Atom::new(a.predicate.clone(), args)
            })
            .collect()
    }

    pub fn to_formula(&self) -> Formula {
        Formula::and(self.atoms.iter().cloned().map(Formula::Atom).collect())
    }
}

/// Convenience alias matching the operation name used by callers.
pub fn theta_of(branch: &ConjunctiveBranch) -> &[ArgMap] {
    branch.theta()
}

fn expand(formula: &Formula, cap: usize) -> Result<Vec<Vec<Atom>>, usize> {
    match formula {
        Formula::Atom(a) => Ok(vec![vec![a.clone()]]),
        Formula::Or(cs) => {
            let mut out = Vec::new();
            for c in cs {
                out.extend(expand(c, cap)?);
                if out.len() > cap {
                    return Err(out.len());
                }
            }
            Ok(out)
        }
        Formula::And(cs) => {
            let mut acc: Vec<Vec<Atom>> = vec![Vec::new()];
            for c in cs {
                let parts = expand(c, cap)?;
                let size = acc.len() * parts.len();
                if size > cap {
                    return Err(size);
                }
                let mut next = Vec::with_capacity(size);
                for prefix in &acc {
                    for part in &parts {
                        let mut b = prefix.clone();
                        b.extend(part.iter().cloned());
                        next.push(b);
                    }
                }
                acc = next;
            }
            Ok(acc)
        }
    }
}

/// Distributes conjunction over disjunction. Branches appear in textual
/// order of the disjuncts, the leftmost disjunction varying slowest.
pub fn normalize(formula: &Formula, cap: usize) -> Result<Vec<ConjunctiveBranch>, LogicError> {
    let branches = expand(formula, cap).map_err(|size| LogicError::BranchExplosion {
        formula: formula.to_string(),
        size,
        cap,
    })?;
    branches.into_iter().map(ConjunctiveBranch::from_atoms).collect()
}
