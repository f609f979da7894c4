use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::script::{simulate, Direction, Variation};
use super::{script_for, NoiseModel, VideoTrace};
use crate::corpus::SentenceRecord;
use crate::error::TraceError;

/// How the evaluation suite is filmed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub noise: NoiseModel,
    pub master_seed: u64,
    /// Mean and spread of clip length, frames.
    pub frames_mean: f64,
    pub frames_sd: f64,
    pub frames_min: usize,
    pub frames_max: usize,
    /// Film both actor sets (otherwise only the first).
    pub both_actor_sets: bool,
    /// Film both directions for sentences involving motion.
    pub both_directions: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            noise: NoiseModel::none(),
            master_seed: 2012,
            frames_mean: 90.78,
            frames_sd: 8.0,
            frames_min: 61,
            frames_max: 121,
            both_actor_sets: true,
            both_directions: true,
        }
    }
}

impl SuiteConfig {
    pub fn with_noise(noise: NoiseModel) -> Self {
        SuiteConfig {
            noise,
            ..SuiteConfig::default()
        }
    }
}

/// One filmed clip of one interpretation.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteTrace {
    pub sentence: usize,
    pub interpretation: usize,
    pub trace: VideoTrace,
}

const DIRECTIONAL: [&str; 3] = ["approach", "leave", "move"];

/// Variations filmed for one interpretation.
pub fn variations(record: &SentenceRecord, config: &SuiteConfig) -> Vec<Variation> {
    let moves = record.interpretations.iter().any(|i| {
        i.formula
            .atoms()
            .iter()
            .any(|a| DIRECTIONAL.contains(&a.predicate.as_str()))
    });
    let actors: &[u8] = if config.both_actor_sets { &[0, 1] } else { &[0] };
    let dirs: Vec<Option<Direction>> = if moves && config.both_directions {
        vec![Some(Direction::Right), Some(Direction::Left)]
    } else if moves {
        vec![Some(Direction::Right)]
    } else {
        vec![None]
    };
    let mut out = Vec::new();
    for &actor_set in actors {
        for &direction in &dirs {
            out.push(Variation {
                actor_set,
                direction,
                mirror: false,
            });
        }
    }
    out
}

/// FNV-1a, used to give each clip a seed that does not depend on the
/// order clips are generated in.
fn stable_hash(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Clip length and simulation seed for one clip.
pub fn clip_params(config: &SuiteConfig, trace_id: &str) -> (usize, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(config.master_seed ^ stable_hash(trace_id));
    let len = Normal::new(config.frames_mean, config.frames_sd.max(0.0))
        .map(|n| n.sample(&mut rng))
        .unwrap_or(config.frames_mean);
    let frames = (len.round().max(0.0) as usize).clamp(config.frames_min.max(2), config.frames_max.max(2));
    (frames, rng.gen())
}

fn film(
    corpus: &[SentenceRecord],
    s: usize,
    i: usize,
    v: Variation,
    config: &SuiteConfig,
) -> Result<SuiteTrace, TraceError> {
    let rec = &corpus[s];
    let id = format!("{}@{v}", rec.interpretations[i].id);
    let (frames, seed) = clip_params(config, &id);
    let script = script_for(rec, i, v, frames)?;
    let (trace, _) = simulate(&script, &config.noise, seed)?;
    Ok(SuiteTrace {
        sentence: s,
        interpretation: i,
        trace,
    })
}

/// Films every interpretation of every sentence under every variation.
/// Output order is corpus order, then interpretation, then variation.
pub fn generate_suite(corpus: &[SentenceRecord], config: &SuiteConfig) -> Result<Vec<SuiteTrace>, TraceError> {
    let mut jobs = Vec::new();
    for (s, rec) in corpus.iter().enumerate() {
        let vs = variations(rec, config);
        for i in 0..rec.interpretations.len() {
            for &v in &vs {
                jobs.push((s, i, v));
            }
        }
    }
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        jobs.par_iter()
            .map(|&(s, i, v)| film(corpus, s, i, v, config))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        jobs.iter().map(|&(s, i, v)| film(corpus, s, i, v, config)).collect()
    }
}
