//! Differential check of the exact decoder against exhaustive search on
//! random tiny instances, plus the beam's admissibility on the same set.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{beam_score, brute_force_paths, brute_force_score, score_branch, state_space, MapResult};
use crate::error::InferenceError;
use crate::logic::{Atom, ConjunctiveBranch, Term, PREDICATES};
use crate::perception::noise::log_softmax;
use crate::perception::{BBox, Detection, VideoTrace, IMAGE_HEIGHT, IMAGE_WIDTH};
use crate::recognition::{Mode, PredicateLibrary};

/// Instances above this many assignment sequences are redrawn, keeping
/// each exhaustive search well under a second.
pub const ORACLE_PATH_LIMIT: u128 = 1_000_000;
/// Score agreement required between decoder and oracle.
pub const ORACLE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct OracleInstance {
    pub branch: ConjunctiveBranch,
    pub trace: VideoTrace,
    pub library: PredicateLibrary,
}

fn random_detection(rng: &mut ChaCha8Rng) -> Detection {
    let (w, h) = (rng.gen_range(30.0..200.0), rng.gen_range(30.0..300.0));
    let class_scores = log_softmax(std::array::from_fn(|_| rng.gen_range(-3.0..3.0)), 1.0);
    let color_scores = log_softmax(std::array::from_fn(|_| rng.gen_range(-3.0..3.0)), 1.0);
    let angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    Detection {
        bbox: BBox {
            x: rng.gen_range(0.0..IMAGE_WIDTH - w),
            y: rng.gen_range(0.0..IMAGE_HEIGHT - h),
            w,
            h,
        },
        confidence: class_scores.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        class_scores,
        color_scores,
        velocity: [rng.gen_range(-8.0..8.0), rng.gen_range(-8.0..8.0)],
        heading: Some([angle.cos(), angle.sin()]),
    }
}

fn random_branch(rng: &mut ChaCha8Rng) -> ConjunctiveBranch {
    loop {
        let vars = rng.gen_range(1..=2usize);
        let names = ["u", "x"];
        let atoms: Vec<Atom> = (0..rng.gen_range(1..=3))
            .map(|_| {
                let sig = PREDICATES
                    .iter()
                    .filter(|p| p.arity <= vars)
                    .collect::<Vec<_>>()
                    .choose(rng)
                    .copied()
                    .expect("unary predicates exist");
                let args = (0..sig.arity)
                    .map(|_| Term::var(names[rng.gen_range(0..vars)]))
                    .collect();
                Atom::new(sig.name, args)
            })
            .collect();
        if let Ok(b) = ConjunctiveBranch::from_atoms(atoms) {
            return b;
        }
    }
}

/// One random instance with T ≤ 4 frames, at most 3 detections per frame,
/// at most 2 variables and 3 atoms, scored in soft or (one time in four)
/// hard mode.
pub fn random_instance(rng: &mut ChaCha8Rng, base: &PredicateLibrary) -> OracleInstance {
    loop {
        let branch = random_branch(rng);
        let frames = (0..rng.gen_range(2..=4))
            .map(|_| (0..rng.gen_range(1..=3)).map(|_| random_detection(rng)).collect())
            .collect();
        let trace = VideoTrace {
            frames,
            width: IMAGE_WIDTH,
            height: IMAGE_HEIGHT,
            metadata: None,
        };
        let library = if rng.gen_bool(0.25) {
            base.with_mode(Mode::Hard)
        } else {
            base.clone()
        };
        match brute_force_paths(&branch, &trace, &library) {
            Ok(n) if n <= ORACLE_PATH_LIMIT => return OracleInstance { branch, trace, library },
            _ => continue,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct OracleReport {
    pub instances: usize,
    /// Same score (within tolerance, or both −∞) and same path.
    pub matched: usize,
    pub max_score_gap: f64,
    /// Beams of width 1, 2 and 4 never beat the exact score.
    pub beam_admissible: usize,
    /// A beam as wide as the state space reproduces the exact score.
    pub beam_exact_at_full_width: usize,
    /// Indices of instances failing any check.
    pub failures: Vec<usize>,
}

impl OracleReport {
    pub fn all_passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn same_score(a: &MapResult, b: &MapResult) -> bool {
    a.total == b.total || (a.total - b.total).abs() <= ORACLE_TOLERANCE
}

/// Runs `n` seeded random instances through the exact decoder, the
/// exhaustive oracle and the beam.
pub fn oracle_check(n: usize, seed: u64, base: &PredicateLibrary) -> Result<OracleReport, InferenceError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = OracleReport {
        instances: n,
        ..OracleReport::default()
    };
    for i in 0..n {
        let OracleInstance { branch, trace, library } = random_instance(&mut rng, base);
        let exact = score_branch(&branch, &trace, &library)?;
        let brute = brute_force_score(&branch, &trace, &library)?;
        let matched = same_score(&exact, &brute) && exact.path == brute.path;
        if exact.total.is_finite() && brute.total.is_finite() {
            report.max_score_gap = report.max_score_gap.max((exact.total - brute.total).abs());
        }
        let mut admissible = true;
        for width in [1, 2, 4] {
            let b = beam_score(&branch, &trace, &library, width)?;
            admissible &= b.total <= exact.total + ORACLE_TOLERANCE || b.total == exact.total;
        }
        let full = state_space(&branch, &trace, &library)? as usize;
        let wide = beam_score(&branch, &trace, &library, full)?;
        let full_ok = same_score(&wide, &exact);
        report.matched += matched as usize;
        report.beam_admissible += admissible as usize;
        report.beam_exact_at_full_width += full_ok as usize;
        if !(matched && admissible && full_ok) {
            report.failures.push(i);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_stay_tiny() {
        let lib = PredicateLibrary::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let inst = random_instance(&mut rng, &lib);
            assert!((2..=4).contains(&inst.trace.frame_count()));
            assert!(inst.trace.frames.iter().all(|f| (1..=3).contains(&f.len())));
            assert!(inst.branch.variables.len() <= 2);
            assert!(inst.branch.atoms.len() <= 3);
        }
    }

    #[test]
    fn a_small_run_agrees() {
        let r = oracle_check(20, 5, &PredicateLibrary::default()).unwrap();
        assert!(r.all_passed(), "{r:?}");
        assert_eq!(r.matched, 20);
    }
}
