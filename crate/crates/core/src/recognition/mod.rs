//! Predicate HMM library.
//!
//! Every predicate the corpus can produce is a small HMM over one or two
//! detections: log transition scores between named states and a per-state
//! observation score. Class and color predicates pass the detector's
//! log-scores through; not-equal penalizes heavily overlapping boxes; all
//! other predicates are chains of states built from hand-set geometric
//! and motion tests (see `data/library.toml`). These tests are a
//! reconstruction from the meaning of each word, not learned models.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::RecognitionError;
use crate::logic::{signature, PREDICATES};
use crate::perception::{Color, Detection, ObjectClass};

const DEFAULT_LIBRARY: &str = include_str!("../../data/library.toml");

/// How feature tests turn margins into log-scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum Mode {
    /// 0 when a test passes, −∞ when it fails.
    Hard,
    /// `log σ(margin / (scale · temperature))`.
    Soft { temperature: f64 },
}

/// Geometric and motion thresholds shared by all tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub near_radius: f64,
    pub with_radius: f64,
    pub contact_tolerance: f64,
    pub overlap_min: f64,
    pub lift_margin: f64,
    pub still_speed: f64,
    pub move_speed: f64,
    pub rise_speed: f64,
    pub comove_speed: f64,
    pub close_speed: f64,
    pub look_tolerance_deg: f64,
    pub iou_threshold: f64,
    pub neq_floor: f64,
    pub self_loop: f64,
    pub motion_bandwidth: f64,
}

/// Margin units for the soft mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scales {
    pub distance: f64,
    pub speed: f64,
    pub angle_deg: f64,
    pub contact: f64,
    pub overlap: f64,
    pub iou: f64,
}

/// A named feature test on (first, second) detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Test {
    /// Centers within the proximity radius.
    Near,
    /// Centers beyond the proximity radius.
    Apart,
    /// Centers within the (tighter) accompaniment radius.
    Close,
    /// First detection's own motion shrinks the center distance.
    Closing,
    /// First detection's own motion grows the center distance.
    Receding,
    /// Second detection stationary.
    Still,
    /// Second detection displacing.
    Moving,
    /// Second detection moving up the image.
    Rising,
    /// Second detection moving down the image.
    Falling,
    /// Second detection's bottom raised above the first's.
    Lifted,
    /// Second detection's bottom level with the first's.
    Grounded,
    /// Both detections share a velocity.
    Comoving,
    /// First detection's heading points at the second.
    Facing,
    /// First detection's bottom rests on the second's top.
    Touching,
    /// Horizontal overlap of the two boxes.
    Overlapping,
    LeftOf,
    RightOf,
}

impl Test {
    fn name(self) -> &'static str {
        match self {
            Test::Near => "near",
            Test::Apart => "apart",
            Test::Close => "close",
            Test::Closing => "closing",
            Test::Receding => "receding",
            Test::Still => "still",
            Test::Moving => "moving",
            Test::Rising => "rising",
            Test::Falling => "falling",
            Test::Lifted => "lifted",
            Test::Grounded => "grounded",
            Test::Comoving => "comoving",
            Test::Facing => "facing",
            Test::Touching => "touching",
            Test::Overlapping => "overlapping",
            Test::LeftOf => "left_of",
            Test::RightOf => "right_of",
        }
    }
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

/// `log σ(x)`, stable for large |x|.
fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    log_sigmoid(x).exp()
}

/// Signed margin (positive means the test holds) and its soft-mode scale.
fn margin(test: Test, th: &Thresholds, sc: &Scales, a: &Detection, b: &Detection) -> (f64, f64) {
    let (ca, cb) = (a.center(), b.center());
    let dist = norm(sub(cb, ca));
    match test {
        Test::Near => (th.near_radius - dist, sc.distance),
        Test::Apart => (dist - th.near_radius, sc.distance),
        Test::Close => (th.with_radius - dist, sc.distance),
        Test::Closing | Test::Receding => {
            // Only the first argument's own motion counts, so being
            // approached is not approaching.
            let next = norm(sub(cb, [ca[0] + a.velocity[0], ca[1] + a.velocity[1]]));
            let delta = next - dist;
            let m = if test == Test::Closing { -delta } else { delta };
            (m - th.close_speed, sc.speed)
        }
        Test::Still => (th.still_speed - norm(b.velocity), sc.speed),
        Test::Moving => (norm(b.velocity) - th.move_speed, sc.speed),
        Test::Rising => (-b.velocity[1] - th.rise_speed, sc.speed),
        Test::Falling => (b.velocity[1] - th.rise_speed, sc.speed),
        Test::Lifted => (a.bbox.bottom() - b.bbox.bottom() - th.lift_margin, sc.contact),
        Test::Grounded => (th.lift_margin - (a.bbox.bottom() - b.bbox.bottom()), sc.contact),
        Test::Comoving => (th.comove_speed - norm(sub(b.velocity, a.velocity)), sc.speed),
        Test::Facing => {
            let m = match a.heading {
                Some(h) if dist > 0.0 && norm(h) > 0.0 => {
                    let to = sub(cb, ca);
                    let cos = ((h[0] * to[0] + h[1] * to[1]) / (norm(h) * dist)).clamp(-1.0, 1.0);
                    th.look_tolerance_deg - cos.acos().to_degrees()
                }
                _ => -180.0,
            };
            (m, sc.angle_deg)
        }
        Test::Touching => (th.contact_tolerance - (a.bbox.bottom() - b.bbox.y).abs(), sc.contact),
        Test::Overlapping => {
            let lo = a.bbox.x.max(b.bbox.x);
            let hi = (a.bbox.x + a.bbox.w).min(b.bbox.x + b.bbox.w);
            let frac = (hi - lo).max(0.0) / a.bbox.w.min(b.bbox.w);
            (frac - th.overlap_min, sc.overlap)
        }
        Test::LeftOf => (cb[0] - ca[0], sc.distance),
        Test::RightOf => (ca[0] - cb[0], sc.distance),
    }
}

/// What a predicate observes.
#[derive(Debug, Clone, PartialEq)]
pub enum Observation {
    Class(ObjectClass),
    Color(Color),
    Distinct,
    /// One conjunction of tests per state.
    Tests(Vec<Vec<Test>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredicateHmm {
    pub name: String,
    pub arity: usize,
    pub states: Vec<String>,
    pub observation: Observation,
    /// `log_transition[from][to]`, −∞ where forbidden.
    pub log_transition: Vec<Vec<f64>>,
    pub initial: Vec<bool>,
    pub accepting: Vec<bool>,
}

impl PredicateHmm {
    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    fn check(&self) -> Result<(), RecognitionError> {
        let bad = |message: String| RecognitionError::Transition {
            predicate: self.name.clone(),
            message,
        };
        let k = self.states.len();
        if k == 0 || k > 4 {
            return Err(bad(format!("{k} states (need 1 to 4)")));
        }
        if self.log_transition.len() != k || self.log_transition.iter().any(|r| r.len() != k) {
            return Err(bad(format!("transition matrix must be {k}×{k}")));
        }
        if self.initial.len() != k || self.accepting.len() != k {
            return Err(bad("state masks have the wrong length".into()));
        }
        if !self.initial.iter().any(|&b| b) || !self.accepting.iter().any(|&b| b) {
            return Err(bad("needs an initial and an accepting state".into()));
        }
        for (i, row) in self.log_transition.iter().enumerate() {
            if row.iter().any(|v| v.is_nan() || *v > 1e-12) {
                return Err(bad(format!("row {i} has an entry above log 1")));
            }
            let total: f64 = row.iter().map(|v| v.exp()).sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(bad(format!("row {i} sums to {total}, not 1")));
            }
        }
        Ok(())
    }

    fn single(name: &str, arity: usize, observation: Observation) -> Self {
        PredicateHmm {
            name: name.to_string(),
            arity,
            states: vec![name.to_string()],
            observation,
            log_transition: vec![vec![0.0]],
            initial: vec![true],
            accepting: vec![true],
        }
    }
}

/// Chain transitions: stay with `self_loop`, otherwise advance; the last
/// state is absorbing.
fn chain(k: usize, self_loop: f64) -> Vec<Vec<f64>> {
    (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    if i + 1 == k {
                        if j == i {
                            0.0
                        } else {
                            f64::NEG_INFINITY
                        }
                    } else if j == i {
                        self_loop.ln()
                    } else if j == i + 1 {
                        (1.0 - self_loop).ln()
                    } else {
                        f64::NEG_INFINITY
                    }
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredicateLibrary {
    pub mode: Mode,
    pub thresholds: Thresholds,
    pub scales: Scales,
    pub predicates: BTreeMap<String, PredicateHmm>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StateConfig {
    name: String,
    tests: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PredicateConfig {
    name: String,
    states: Vec<StateConfig>,
    #[serde(default)]
    transitions: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    initial: Option<Vec<bool>>,
    #[serde(default)]
    accepting: Option<Vec<bool>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LibraryConfig {
    #[serde(default = "default_mode")]
    mode: String,
    #[serde(default = "default_temperature")]
    temperature: f64,
    thresholds: BTreeMap<String, f64>,
    scales: BTreeMap<String, f64>,
    #[serde(default)]
    predicate: Vec<PredicateConfig>,
}

fn default_mode() -> String {
    "soft".into()
}

fn default_temperature() -> f64 {
    1.0
}

fn get(map: &BTreeMap<String, f64>, key: &'static str) -> Result<f64, RecognitionError> {
    let v = *map.get(key).ok_or(RecognitionError::MissingThreshold(key))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(RecognitionError::Config(format!("`{key}` must be finite")))
    }
}

fn parse_test(name: &str) -> Result<Test, RecognitionError> {
    serde_json::from_value(serde_json::Value::String(name.to_string()))
        .map_err(|_| RecognitionError::Config(format!("unknown feature test `{name}`")))
}

/// Builds a library from TOML configuration text.
pub fn build_library(config: &str) -> Result<PredicateLibrary, RecognitionError> {
    let cfg: LibraryConfig = toml::from_str(config).map_err(|e| RecognitionError::Config(e.to_string()))?;
    let t = &cfg.thresholds;
    let thresholds = Thresholds {
        near_radius: get(t, "near_radius")?,
        with_radius: get(t, "with_radius")?,
        contact_tolerance: get(t, "contact_tolerance")?,
        overlap_min: get(t, "overlap_min")?,
        lift_margin: get(t, "lift_margin")?,
        still_speed: get(t, "still_speed")?,
        move_speed: get(t, "move_speed")?,
        rise_speed: get(t, "rise_speed")?,
        comove_speed: get(t, "comove_speed")?,
        close_speed: get(t, "close_speed")?,
        look_tolerance_deg: get(t, "look_tolerance_deg")?,
        iou_threshold: get(t, "iou_threshold")?,
        neq_floor: get(t, "neq_floor")?,
        self_loop: get(t, "self_loop")?,
        motion_bandwidth: get(t, "motion_bandwidth")?,
    };
    if !(thresholds.self_loop > 0.0 && thresholds.self_loop < 1.0) {
        return Err(RecognitionError::Config("`self_loop` must lie in (0, 1)".into()));
    }
    if thresholds.motion_bandwidth <= 0.0 {
        return Err(RecognitionError::Config("`motion_bandwidth` must be positive".into()));
    }
    let s = &cfg.scales;
    let scales = Scales {
        distance: get(s, "distance")?,
        speed: get(s, "speed")?,
        angle_deg: get(s, "angle_deg")?,
        contact: get(s, "contact")?,
        overlap: get(s, "overlap")?,
        iou: get(s, "iou")?,
    };
    for v in [
        scales.distance,
        scales.speed,
        scales.angle_deg,
        scales.contact,
        scales.overlap,
        scales.iou,
    ] {
        if v <= 0.0 {
            return Err(RecognitionError::Config("scales must be positive".into()));
        }
    }
    let mode = match cfg.mode.as_str() {
        "hard" => Mode::Hard,
        "soft" if cfg.temperature > 0.0 => Mode::Soft {
            temperature: cfg.temperature,
        },
        "soft" => return Err(RecognitionError::Config("temperature must be positive".into())),
        other => return Err(RecognitionError::Config(format!("unknown mode `{other}`"))),
    };

    let mut predicates = BTreeMap::new();
    for class in ObjectClass::ALL {
        predicates.insert(
            class.name().to_string(),
            PredicateHmm::single(class.name(), 1, Observation::Class(class)),
        );
    }
    for color in [Color::Yellow, Color::Green] {
        predicates.insert(
            color.name().to_string(),
            PredicateHmm::single(color.name(), 1, Observation::Color(color)),
        );
    }
    predicates.insert("neq".into(), PredicateHmm::single("neq", 2, Observation::Distinct));
    for p in cfg.predicate {
        let sig = signature(&p.name).ok_or_else(|| RecognitionError::UnknownPredicate(p.name.clone()))?;
        let k = p.states.len();
        let mut tests = Vec::with_capacity(k);
        for st in &p.states {
            tests.push(st.tests.iter().map(|t| parse_test(t)).collect::<Result<Vec<_>, _>>()?);
        }
        let log_transition = match p.transitions {
            Some(rows) => rows.into_iter().map(|r| r.into_iter().map(f64::ln).collect()).collect(),
            None => chain(k, thresholds.self_loop),
        };
        let hmm = PredicateHmm {
            arity: sig.arity,
            states: p.states.iter().map(|s| s.name.clone()).collect(),
            observation: Observation::Tests(tests),
            log_transition,
            initial: p.initial.unwrap_or_else(|| (0..k).map(|i| i == 0).collect()),
            accepting: p.accepting.unwrap_or_else(|| (0..k).map(|i| i + 1 == k).collect()),
            name: p.name.clone(),
        };
        if predicates.insert(p.name.clone(), hmm).is_some() {
            return Err(RecognitionError::Config(format!(
                "predicate `{}` defined twice",
                p.name
            )));
        }
    }
    for sig in PREDICATES.iter() {
        let hmm = predicates
            .get(sig.name)
            .ok_or_else(|| RecognitionError::Config(format!("no model for predicate `{}`", sig.name)))?;
        hmm.check()?;
    }
    Ok(PredicateLibrary {
        mode,
        thresholds,
        scales,
        predicates,
    })
}

impl PredicateLibrary {
    pub fn load(path: &Path) -> Result<Self, RecognitionError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| RecognitionError::Config(format!("{}: {e}", path.display())))?;
        build_library(&text)
    }

    /// A copy scoring in a different mode.
    pub fn with_mode(&self, mode: Mode) -> Self {
        PredicateLibrary { mode, ..self.clone() }
    }

    pub fn get(&self, predicate: &str) -> Result<&PredicateHmm, RecognitionError> {
        self.predicates
            .get(predicate)
            .ok_or_else(|| RecognitionError::UnknownPredicate(predicate.to_string()))
    }

    fn soften(&self, margin: f64, scale: f64) -> f64 {
        match self.mode {
            Mode::Hard => {
                if margin > 0.0 {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            // Zero once the test holds, falling off like a log-sigmoid on
            // the failing side: log 2σ(min(z, 0)).
            Mode::Soft { temperature } => LN_2 + log_sigmoid((margin / (scale * temperature)).min(0.0)),
        }
    }

    /// Observation log-score of `predicate` in `state` on one or two
    /// detections.
    pub fn observe(
        &self,
        predicate: &str,
        state: usize,
        first: &Detection,
        second: Option<&Detection>,
    ) -> Result<f64, RecognitionError> {
        let hmm = self.get(predicate)?;
        let got = 1 + second.is_some() as usize;
        if got != hmm.arity {
            return Err(RecognitionError::Arity {
                predicate: predicate.to_string(),
                expected: hmm.arity,
                got,
            });
        }
        if state >= hmm.state_count() {
            return Err(RecognitionError::State {
                predicate: predicate.to_string(),
                state,
            });
        }
        Ok(self.observe_unchecked(hmm, state, first, second.unwrap_or(first)))
    }

    /// [`observe`](Self::observe) without argument checks; unary predicates
    /// ignore `second`.
    pub fn observe_unchecked(&self, hmm: &PredicateHmm, state: usize, first: &Detection, second: &Detection) -> f64 {
        match &hmm.observation {
            Observation::Class(c) => first.class_score(*c),
            Observation::Color(c) => first.color_score(*c),
            Observation::Distinct => self.distinct(first.bbox.iou(&second.bbox)),
            Observation::Tests(states) => states[state]
                .iter()
                .map(|&t| {
                    let (m, scale) = margin(t, &self.thresholds, &self.scales, first, second);
                    self.soften(m, scale)
                })
                .sum(),
        }
    }

    /// Not-equal score as a function of box overlap.
    pub fn distinct(&self, iou: f64) -> f64 {
        let th = &self.thresholds;
        match self.mode {
            Mode::Hard => {
                if iou < th.iou_threshold {
                    0.0
                } else {
                    th.neq_floor
                }
            }
            Mode::Soft { temperature } => {
                th.neq_floor * sigmoid((iou - th.iou_threshold) / (self.scales.iou * temperature))
            }
        }
    }

    pub fn transition(&self, predicate: &str, from: usize, to: usize) -> Result<f64, RecognitionError> {
        let hmm = self.get(predicate)?;
        for s in [from, to] {
            if s >= hmm.state_count() {
                return Err(RecognitionError::State {
                    predicate: predicate.to_string(),
                    state: s,
                });
            }
        }
        Ok(hmm.log_transition[from][to])
    }

    /// Best state-path score of `predicate` over fixed tracks, one
    /// detection per frame for each argument; −∞ if no path is accepted.
    pub fn score_tracks(
        &self,
        predicate: &str,
        first: &[Detection],
        second: Option<&[Detection]>,
    ) -> Result<f64, RecognitionError> {
        let hmm = self.get(predicate)?;
        let got = 1 + second.is_some() as usize;
        if got != hmm.arity {
            return Err(RecognitionError::Arity {
                predicate: predicate.to_string(),
                expected: hmm.arity,
                got,
            });
        }
        if let Some(b) = second {
            if b.len() != first.len() {
                return Err(RecognitionError::TrackLength(first.len(), b.len()));
            }
        }
        let n = hmm.state_count();
        let h = |k: usize, t: usize| {
            let a = &first[t];
            self.observe_unchecked(hmm, k, a, second.map_or(a, |b| &b[t]))
        };
        let mut delta: Vec<f64> = (0..n)
            .map(|k| {
                if hmm.initial[k] && !first.is_empty() {
                    h(k, 0)
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        for t in 1..first.len() {
            delta = (0..n)
                .map(|k| {
                    let best = (0..n)
                        .map(|j| delta[j] + hmm.log_transition[j][k])
                        .fold(f64::NEG_INFINITY, f64::max);
                    best + h(k, t)
                })
                .collect();
        }
        Ok((0..n)
            .filter(|&k| hmm.accepting[k])
            .map(|k| delta[k])
            .fold(f64::NEG_INFINITY, f64::max))
    }

    /// Human-readable listing of every HMM.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "mode: {:?}", self.mode);
        let _ = writeln!(out, "thresholds: {:?}", self.thresholds);
        let _ = writeln!(out, "scales: {:?}", self.scales);
        for hmm in self.predicates.values() {
            let _ = writeln!(
                out,
                "\n{}/{} ({} state{})",
                hmm.name,
                hmm.arity,
                hmm.states.len(),
                if hmm.states.len() == 1 { "" } else { "s" }
            );
            for (i, s) in hmm.states.iter().enumerate() {
                let obs = match &hmm.observation {
                    Observation::Class(c) => format!("class log-score `{}`", c.name()),
                    Observation::Color(c) => format!("color log-score `{}`", c.name()),
                    Observation::Distinct => "0 if IoU below threshold, else down to the floor".to_string(),
                    Observation::Tests(t) => t[i].iter().map(|t| t.name()).collect::<Vec<_>>().join(" ∧ "),
                };
                let flags = format!(
                    "{}{}",
                    if hmm.initial[i] { " initial" } else { "" },
                    if hmm.accepting[i] { " accepting" } else { "" }
                );
                let row: Vec<String> = hmm.log_transition[i]
                    .iter()
                    .map(|v| format!("{:.3}", v.exp()))
                    .collect();
                let _ = writeln!(out, "  [{i}] {s}:{flags}  h = {obs}  P(next) = [{}]", row.join(", "));
            }
        }
        out
    }
}

impl Default for PredicateLibrary {
    fn default() -> Self {
        build_library(DEFAULT_LIBRARY).expect("bundled library config is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perception::BBox;

    fn det(x: f64, y: f64, w: f64, h: f64) -> Detection {
        Detection {
            bbox: BBox { x, y, w, h },
            class_scores: [-0.2, -3.0, -3.0, -3.0],
            color_scores: [-2.0, -0.1, -2.0],
            velocity: [0.0, 0.0],
            heading: Some([0.0, 1.0]),
            confidence: -0.2,
        }
    }

    fn hard() -> PredicateLibrary {
        PredicateLibrary::default().with_mode(Mode::Hard)
    }

    #[test]
    fn covers_every_corpus_predicate() {
        let lib = PredicateLibrary::default();
        assert_eq!(lib.predicates.len(), 18);
        for sig in PREDICATES.iter() {
            assert_eq!(lib.get(sig.name).unwrap().arity, sig.arity);
        }
    }

    #[test]
    fn class_scores_pass_through() {
        let lib = PredicateLibrary::default();
        let d = det(0.0, 0.0, 10.0, 10.0);
        assert_eq!(lib.observe("person", 0, &d, None).unwrap(), -0.2);
        assert_eq!(lib.observe("green", 0, &d, None).unwrap(), -0.1);
    }

    #[test]
    fn identical_boxes_hit_the_floor() {
        let lib = hard();
        let d = det(0.0, 0.0, 10.0, 10.0);
        assert_eq!(lib.observe("neq", 0, &d, Some(&d)).unwrap(), lib.thresholds.neq_floor);
    }

    #[test]
    fn left_of_passes_when_first_is_left() {
        let lib = hard();
        let (a, b) = (det(0.0, 0.0, 10.0, 10.0), det(50.0, 0.0, 10.0, 10.0));
        assert_eq!(lib.observe("left_of", 0, &a, Some(&b)).unwrap(), 0.0);
        assert_eq!(lib.observe("right_of", 0, &a, Some(&b)).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn closing_distance_scores_zero() {
        let lib = hard();
        let mut a = det(0.0, 0.0, 10.0, 10.0);
        a.velocity = [4.0, 0.0];
        let b = det(300.0, 0.0, 10.0, 10.0);
        assert_eq!(lib.observe("approach", 0, &a, Some(&b)).unwrap(), 0.0);
    }

    #[test]
    fn orthogonal_heading_fails_look_at() {
        let lib = hard();
        let a = det(0.0, 0.0, 10.0, 10.0);
        let b = det(300.0, 0.0, 10.0, 10.0);
        assert_eq!(lib.observe("look_at", 0, &a, Some(&b)).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn transitions_follow_the_chain() {
        let lib = PredicateLibrary::default();
        assert!(lib.transition("approach", 0, 1).unwrap().is_finite());
        assert_eq!(lib.transition("approach", 1, 0).unwrap(), f64::NEG_INFINITY);
        assert_eq!(lib.transition("hold", 0, 0).unwrap(), 0.0);
    }

    #[test]
    fn arity_and_state_are_checked() {
        let lib = PredicateLibrary::default();
        let d = det(0.0, 0.0, 10.0, 10.0);
        assert!(matches!(
            lib.observe("approach", 0, &d, None),
            Err(RecognitionError::Arity { .. })
        ));
        assert!(matches!(
            lib.observe("approach", 5, &d, Some(&d)),
            Err(RecognitionError::State { .. })
        ));
    }

    #[test]
    fn missing_threshold_is_reported() {
        let cfg = DEFAULT_LIBRARY.replace("near_radius = 240.0\n", "");
        assert!(matches!(
            build_library(&cfg),
            Err(RecognitionError::MissingThreshold("near_radius"))
        ));
    }

    #[test]
    fn malformed_transitions_are_rejected() {
        let cfg = DEFAULT_LIBRARY.replace(
            "name = \"leave\"\n",
            "name = \"leave\"\ntransitions = [[0.5, 0.4], [0.0, 1.0]]\n",
        );
        assert!(matches!(build_library(&cfg), Err(RecognitionError::Transition { .. })));
    }

    #[test]
    fn dump_lists_every_predicate() {
        let text = PredicateLibrary::default().dump();
        for sig in PREDICATES.iter() {
            assert!(text.contains(&format!("\n{}/", sig.name)), "{}", sig.name);
        }
    }
}
