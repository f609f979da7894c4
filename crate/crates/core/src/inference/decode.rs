use std::cmp::Ordering;

use super::lattice::{decode, Lattice, MapResult, Odometer, NEG_INF};
use crate::error::InferenceError;

/// Replaces coordinate `c` of `arr` (current radix `dims[c]`) by a
/// coordinate of radix `new`, maximizing over the old values with weights
/// `w[new_value * old + old_value]`.
fn eliminate(arr: &[f64], dims: &mut [usize], c: usize, new: usize, w: &[f64]) -> Vec<f64> {
    let outer: usize = dims[..c].iter().product();
    let old = dims[c];
    let inner: usize = dims[c + 1..].iter().product();
    let mut out = vec![NEG_INF; outer * new * inner];
    for o in 0..outer {
        for n in 0..new {
            let dst = (o * new + n) * inner;
            for k in 0..old {
                let wt = w[n * old + k];
                if wt == NEG_INF {
                    continue;
                }
                let src = (o * old + k) * inner;
                let (to, from) = (&mut out[dst..dst + inner], &arr[src..src + inner]);
                for (x, &y) in to.iter_mut().zip(from) {
                    let v = y + wt;
                    if v > *x {
                        *x = v;
                    }
                }
            }
        }
    }
    dims[c] = new;
    out
}

/// For every joint state of frame t−1, the best edge-plus-suffix value
/// into frame t. Transition potentials factor by coordinate, so the max
/// is taken one coordinate at a time.
fn backward_message(l: &Lattice, t: usize, next: &[f64]) -> Vec<f64> {
    let mut dims = l.dims(t);
    let prev = l.dims(t - 1);
    let mut arr = next.to_vec();
    for c in 0..dims.len() {
        let (new, old) = (prev[c], dims[c]);
        let w: Vec<f64> = if c < l.vars {
            l.g[t].clone()
        } else {
            l.preds[c - l.vars].a.clone()
        };
        debug_assert_eq!(w.len(), new * old);
        arr = eliminate(&arr, &mut dims, c, new, &w);
    }
    arr
}

fn frame_potentials(l: &Lattice, t: usize) -> Vec<f64> {
    let dims = l.dims(t);
    let mut out = Vec::with_capacity(dims.iter().product());
    let mut od = Odometer::new(dims);
    loop {
        out.push(l.node(t, &od.coords) + l.mask(t, &od.coords));
        if !od.step() {
            break;
        }
    }
    out
}

/// Exact MAP by dynamic programming. Returns the lexicographically
/// smallest optimal joint-state sequence.
pub(crate) fn exact(l: &Lattice, cap: u128) -> Result<MapResult, InferenceError> {
    l.check()?;
    let n = l.frames();
    for t in 0..n {
        let size = l.state_count(t);
        if size > cap {
            return Err(InferenceError::StateSpaceTooLarge { size, cap });
        }
    }
    // beta[t][s]: best score of frames t.. given state s at t.
    let mut beta: Vec<Vec<f64>> = vec![Vec::new(); n];
    for t in (0..n).rev() {
        let mut cur = frame_potentials(l, t);
        if t + 1 < n {
            let msg = backward_message(l, t + 1, &beta[t + 1]);
            for (c, m) in cur.iter_mut().zip(msg) {
                *c += m;
            }
        }
        beta[t] = cur;
    }
    // Forward pass picks the smallest optimal state frame by frame.
    let mut path: Vec<Vec<usize>> = Vec::with_capacity(n);
    let first = argmax(&beta[0]);
    if beta[0][first] == NEG_INF {
        // Every sequence is impossible; all tie, so the smallest wins.
        let zeros = (0..n).map(|t| vec![0; l.dims(t).len()]).collect();
        return Ok(l.result(zeros));
    }
    path.push(decode(first, &l.dims(0)));
    for t in 1..n {
        let prev = path[t - 1].clone();
        let mut od = Odometer::new(l.dims(t));
        let mut best = (NEG_INF, od.coords.clone());
        let mut i = 0;
        loop {
            let v = l.edge(t, &prev, &od.coords) + beta[t][i];
            if v > best.0 {
                best = (v, od.coords.clone());
            }
            i += 1;
            if !od.step() {
                break;
            }
        }
        path.push(best.1);
    }
    Ok(l.result(path))
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Number of assignment sequences exhaustive search would visit.
pub(crate) fn path_count(l: &Lattice) -> u128 {
    (0..l.frames()).fold(1u128, |acc, t| acc.saturating_mul(l.state_count(t)))
}

/// Exhaustive search over every sequence; same objective and tie-break
/// as [`exact`].
pub(crate) fn brute(l: &Lattice, limit: u128) -> Result<MapResult, InferenceError> {
    l.check()?;
    let size = path_count(l);
    if size > limit {
        return Err(InferenceError::InstanceTooLarge { size, limit });
    }
    let n = l.frames();
    let states: Vec<Vec<Vec<usize>>> = (0..n)
        .map(|t| {
            let dims = l.dims(t);
            let count = dims.iter().product();
            (0..count).map(|i| decode(i, &dims)).collect()
        })
        .collect();
    let mut digits = Odometer::new(states.iter().map(Vec::len).collect());
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        let path: Vec<Vec<usize>> = (0..n).map(|t| states[t][digits.coords[t]].clone()).collect();
        let total = l.breakdown(&path).total();
        if best.as_ref().is_none_or(|(b, _)| total > *b) {
            best = Some((total, digits.coords.clone()));
        }
        if !digits.step() {
            break;
        }
    }
    let (_, idx) = best.expect("at least one path");
    Ok(l.result((0..n).map(|t| states[t][idx[t]].clone()).collect()))
}

fn by_score(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1))
}

/// Viterbi keeping only the `width` best joint states per frame.
pub(crate) fn beam(l: &Lattice, width: usize) -> Result<MapResult, InferenceError> {
    if width == 0 {
        return Err(InferenceError::ZeroBeam);
    }
    l.check()?;
    let n = l.frames();
    // Per frame: kept (score, state index), and for each kept state the
    // position of its predecessor in the previous frame's kept list.
    let mut kept: Vec<Vec<(f64, usize)>> = Vec::with_capacity(n);
    let mut back: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut first: Vec<(f64, usize)> = frame_potentials(l, 0)
        .into_iter()
        .enumerate()
        .map(|(i, v)| (v, i))
        .collect();
    first.sort_by(by_score);
    first.truncate(width);
    back.push(vec![0; first.len()]);
    kept.push(first);
    for t in 1..n {
        let pdims = l.dims(t - 1);
        let prev: Vec<(f64, Vec<usize>)> = kept[t - 1].iter().map(|&(v, i)| (v, decode(i, &pdims))).collect();
        let pot = frame_potentials(l, t);
        let mut od = Odometer::new(l.dims(t));
        let mut cand: Vec<(f64, usize, usize)> = Vec::with_capacity(pot.len());
        let mut i = 0;
        loop {
            let mut best = (NEG_INF, 0usize);
            for (pi, (pv, pc)) in prev.iter().enumerate() {
                let v = pv + l.edge(t, pc, &od.coords);
                if pi == 0 || v > best.0 {
                    best = (v, pi);
                }
            }
            cand.push((best.0 + pot[i], i, best.1));
            i += 1;
            if !od.step() {
                break;
            }
        }
        cand.sort_by(|a, b| by_score(&(a.0, a.1), &(b.0, b.1)));
        cand.truncate(width);
        back.push(cand.iter().map(|c| c.2).collect());
        kept.push(cand.iter().map(|c| (c.0, c.1)).collect());
    }
    if kept[n - 1][0].0 == NEG_INF {
        // Nothing survived; report the same path as the exact decoder.
        let zeros = (0..n).map(|t| vec![0; l.dims(t).len()]).collect();
        return Ok(l.result(zeros));
    }
    let mut pos = 0;
    let mut path = vec![Vec::new(); n];
    for t in (0..n).rev() {
        path[t] = decode(kept[t][pos].1, &l.dims(t));
        pos = back[t][pos];
    }
    Ok(l.result(path))
}

#[cfg(test)]
mod tests {
    use super::super::lattice::PredLattice;
    use super::*;
    use proptest::prelude::*;

    /// Dyadic values so that sums are exact and ties are real ties.
    fn value() -> impl Strategy<Value = f64> {
        prop_oneof![
            8 => (-64i32..=0).prop_map(|v| v as f64 / 16.0),
            1 => Just(NEG_INF),
        ]
    }

    fn lattice() -> impl Strategy<Value = Lattice> {
        (2usize..=4, 1usize..=2, 0usize..=3).prop_flat_map(|(frames, vars, npreds)| {
            let counts = proptest::collection::vec(1usize..=3, frames);
            let preds = proptest::collection::vec((1usize..=2, 0..vars, proptest::option::of(0..vars)), npreds);
            (counts, preds).prop_flat_map(move |(counts, preds)| {
                let f = counts
                    .iter()
                    .map(|&d| proptest::collection::vec(value(), d))
                    .collect::<Vec<_>>();
                let g = (0..counts.len())
                    .map(|t| {
                        let n = if t == 0 { 0 } else { counts[t - 1] * counts[t] };
                        proptest::collection::vec(value(), n)
                    })
                    .collect::<Vec<_>>();
                let pl = preds
                    .iter()
                    .map(|&(k, first, second)| {
                        let second = second.filter(|&s| s != first);
                        let h = counts
                            .iter()
                            .map(|&d| {
                                let n = k * d * if second.is_some() { d } else { 1 };
                                proptest::collection::vec(value(), n)
                            })
                            .collect::<Vec<_>>();
                        let a = proptest::collection::vec(value(), k * k);
                        let init = proptest::collection::vec(prop_oneof![Just(0.0), Just(NEG_INF)], k);
                        let accept = proptest::collection::vec(prop_oneof![Just(0.0), Just(NEG_INF)], k);
                        (h, a, init, accept).prop_map(move |(h, a, init, accept)| PredLattice {
                            states: k,
                            first,
                            second,
                            h,
                            a,
                            init,
                            accept,
                        })
                    })
                    .collect::<Vec<_>>();
                let counts = counts.clone();
                (f, g, pl).prop_map(move |(f, g, preds)| Lattice {
                    counts: counts.clone(),
                    vars,
                    f,
                    g,
                    preds,
                })
            })
        })
    }

    fn same_score(a: f64, b: f64) -> bool {
        a == b || (a - b).abs() <= 1e-9
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn dynamic_programming_matches_exhaustive_search(l in lattice()) {
            let e = exact(&l, u128::MAX).unwrap();
            let b = brute(&l, u128::MAX).unwrap();
            prop_assert!(same_score(e.total, b.total), "{} vs {}", e.total, b.total);
            prop_assert_eq!(e.path, b.path);
        }

        #[test]
        fn breakdown_adds_up(l in lattice()) {
            let e = exact(&l, u128::MAX).unwrap();
            prop_assert!(same_score(e.total, e.breakdown.total()));
            prop_assert_eq!(e.path.len(), l.frames());
        }

        #[test]
        fn beam_never_beats_exact_and_is_exact_when_wide(l in lattice()) {
            let e = exact(&l, u128::MAX).unwrap();
            let widest = (0..l.frames()).map(|t| l.state_count(t)).max().unwrap() as usize;
            for w in [1, 2, 3, 5, 8] {
                let b = beam(&l, w).unwrap();
                prop_assert!(b.total <= e.total || same_score(b.total, e.total));
            }
            let full = beam(&l, widest).unwrap();
            prop_assert!(same_score(full.total, e.total));
        }
    }

    #[test]
    fn wider_beams_rarely_score_lower() {
        // Plain beam search is not monotone in its width on every lattice;
        // a wider beam can keep a state whose successors later crowd out
        // the path a narrower beam found.
        use proptest::strategy::ValueTree;
        use proptest::test_runner::TestRunner;
        let mut runner = TestRunner::deterministic();
        let mut violations = 0;
        for _ in 0..2000 {
            let l = lattice().new_tree(&mut runner).unwrap().current();
            let scores: Vec<f64> = [1, 2, 4, 8, 16].iter().map(|&w| beam(&l, w).unwrap().total).collect();
            if scores.windows(2).any(|w| w[1] < w[0] && !same_score(w[0], w[1])) {
                violations += 1;
            }
        }
        assert!(violations <= 20, "{violations} of 2000 lattices");
    }

    #[test]
    fn unary_argmax_passes_through() {
        let l = Lattice {
            counts: vec![2, 2],
            vars: 1,
            f: vec![vec![-1.0, -3.0], vec![-1.0, -3.0]],
            g: vec![vec![], vec![0.0; 4]],
            preds: vec![PredLattice {
                states: 1,
                first: 0,
                second: None,
                h: vec![vec![0.0, 0.0], vec![0.0, 0.0]],
                a: vec![0.0],
                init: vec![0.0],
                accept: vec![0.0],
            }],
        };
        let r = exact(&l, u128::MAX).unwrap();
        assert_eq!(r.total, -2.0);
        assert!(r.path.iter().all(|s| s.detections == vec![0]));
    }

    #[test]
    fn counts_sixteen_paths() {
        let l = Lattice {
            counts: vec![2, 2],
            vars: 1,
            f: vec![vec![0.0; 2]; 2],
            g: vec![vec![], vec![0.0; 4]],
            preds: vec![PredLattice {
                states: 2,
                first: 0,
                second: None,
                h: vec![vec![0.0; 4]; 2],
                a: vec![0.0; 4],
                init: vec![0.0; 2],
                accept: vec![0.0; 2],
            }],
        };
        assert_eq!(path_count(&l), 16);
    }
}
