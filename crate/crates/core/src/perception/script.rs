use std::collections::HashMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::noise::{appearance_scores, false_positive, perturb, NoiseModel};
use super::{BBox, Color, Detection, ObjectClass, TraceMeta, VideoTrace, IMAGE_HEIGHT, IMAGE_WIDTH};
use crate::error::TraceError;

/// Floor line (bottom edge of standing entities), pixels.
pub const FLOOR: f64 = 640.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Left,
    Right,
}

/// Filming variation: which actors, which way the motion runs, and whether
/// the camera sees the scene mirrored.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Variation {
    pub actor_set: u8,
    #[serde(default)]
    pub direction: Option<Direction>,
    #[serde(default)]
    pub mirror: bool,
}

impl fmt::Display for Variation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}", self.actor_set)?;
        match self.direction {
            Some(Direction::Left) => f.write_str("-left")?,
            Some(Direction::Right) => f.write_str("-right")?,
            None => {}
        }
        if self.mirror {
            f.write_str("-mirror")?;
        }
        Ok(())
    }
}

/// Where an entity is at a keyframe: absolute floor coordinates, or an
/// offset from another entity (both measured at the bottom center).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    At { x: f64, bottom: f64 },
    Attached { anchor: String, dx: f64, dy: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Key {
    pub frame: usize,
    pub place: Placement,
}

/// A span during which a person faces another entity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gaze {
    pub from: usize,
    pub to: usize,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptEntity {
    pub id: String,
    pub class: ObjectClass,
    pub color: Color,
    pub size: [f64; 2],
    /// Keyframes in frame order; positions between keys are linear blends
    /// of the two resolved placements.
    pub keys: Vec<Key>,
    #[serde(default)]
    pub gaze: Vec<Gaze>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub verb: String,
    pub agent: String,
    pub patient: String,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneScript {
    pub frame_count: usize,
    pub entities: Vec<ScriptEntity>,
    pub timeline: Vec<Event>,
    pub variation: Variation,
    /// Sentence and interpretation this scene depicts, if any.
    #[serde(default)]
    pub depicts: Option<(String, String, usize)>,
}

/// Ground-truth track of one scripted entity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Track {
    pub entity: String,
    pub class: ObjectClass,
    pub color: Color,
    pub boxes: Vec<BBox>,
}

impl SceneScript {
    pub fn check(&self) -> Result<(), TraceError> {
        let bad = |m: String| Err(TraceError::Script(m));
        if self.frame_count < 2 {
            return bad(format!("{} frames (need at least 2)", self.frame_count));
        }
        let ids: HashMap<&str, usize> = self
            .entities
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id.as_str(), i))
            .collect();
        if ids.len() != self.entities.len() {
            return bad("duplicate entity id".into());
        }
        for e in &self.entities {
            if e.keys.is_empty() {
                return bad(format!("`{}` has no keyframes", e.id));
            }
            if !(e.size[0] > 0.0 && e.size[1] > 0.0) {
                return bad(format!("`{}` has no area", e.id));
            }
            for k in &e.keys {
                if k.frame >= self.frame_count {
                    return bad(format!("`{}` keyframe {} is past the end", e.id, k.frame));
                }
                if let Placement::Attached { anchor, .. } = &k.place {
                    if !ids.contains_key(anchor.as_str()) {
                        return bad(format!("`{}` is attached to unknown `{anchor}`", e.id));
                    }
                }
            }
            if e.keys.windows(2).any(|w| w[0].frame > w[1].frame) {
                return bad(format!("`{}` keyframes are out of order", e.id));
            }
            for g in &e.gaze {
                if !ids.contains_key(g.target.as_str()) || g.to >= self.frame_count || g.from > g.to {
                    return bad(format!("`{}` has an invalid gaze span", e.id));
                }
            }
        }
        for ev in &self.timeline {
            if !ids.contains_key(ev.agent.as_str()) || !ids.contains_key(ev.patient.as_str()) {
                return bad(format!("event `{}` names an undeclared entity", ev.verb));
            }
            if ev.start > ev.end || ev.end >= self.frame_count {
                return bad(format!("event `{}` lies outside the clip", ev.verb));
            }
        }
        Ok(())
    }

    /// Bottom-center positions of every entity in every frame.
    fn positions(&self) -> Result<Vec<Vec<[f64; 2]>>, TraceError> {
        let n = self.entities.len();
        let index: HashMap<&str, usize> = self
            .entities
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id.as_str(), i))
            .collect();
        let mut done: Vec<Option<Vec<[f64; 2]>>> = vec![None; n];
        let mut visiting = vec![false; n];

        fn resolve(
            s: &SceneScript,
            i: usize,
            index: &HashMap<&str, usize>,
            done: &mut Vec<Option<Vec<[f64; 2]>>>,
            visiting: &mut Vec<bool>,
        ) -> Result<(), TraceError> {
            if done[i].is_some() {
                return Ok(());
            }
            if visiting[i] {
                return Err(TraceError::Script(format!(
                    "attachment cycle through `{}`",
                    s.entities[i].id
                )));
            }
            visiting[i] = true;
            let e = &s.entities[i];
            for k in &e.keys {
                if let Placement::Attached { anchor, .. } = &k.place {
                    resolve(s, index[anchor.as_str()], index, done, visiting)?;
                }
            }
            let place = |k: &Key, t: usize| -> [f64; 2] {
                match &k.place {
                    Placement::At { x, bottom } => [*x, *bottom],
                    Placement::Attached { anchor, dx, dy } => {
                        let a = done[index[anchor.as_str()]].as_ref().expect("resolved")[t];
                        [a[0] + dx, a[1] + dy]
                    }
                }
            };
            let mut out = Vec::with_capacity(s.frame_count);
            for t in 0..s.frame_count {
                let after = e.keys.iter().position(|k| k.frame > t);
                let p = match after {
                    None => place(e.keys.last().expect("checked"), t),
                    Some(0) => place(&e.keys[0], t),
                    Some(j) => {
                        let (k0, k1) = (&e.keys[j - 1], &e.keys[j]);
                        let (p0, p1) = (place(k0, t), place(k1, t));
                        let a = (t - k0.frame) as f64 / (k1.frame - k0.frame) as f64;
                        [p0[0] + a * (p1[0] - p0[0]), p0[1] + a * (p1[1] - p0[1])]
                    }
                };
                out.push(p);
            }
            done[i] = Some(out);
            visiting[i] = false;
            Ok(())
        }

        for i in 0..n {
            resolve(self, i, &index, &mut done, &mut visiting)?;
        }
        Ok(done.into_iter().map(|p| p.expect("resolved")).collect())
    }

    /// Ground-truth boxes, clamped to the image and mirrored if the
    /// variation asks for it.
    pub fn tracks(&self) -> Result<Vec<Track>, TraceError> {
        self.check()?;
        let pos = self.positions()?;
        Ok(self
            .entities
            .iter()
            .zip(pos)
            .map(|(e, ps)| {
                let [w, h] = e.size;
                let boxes = ps
                    .iter()
                    .map(|&[x, bottom]| {
                        let x = x.clamp(w / 2.0, IMAGE_WIDTH - w / 2.0);
                        let bottom = bottom.clamp(h, IMAGE_HEIGHT);
                        let b = BBox::from_bottom_center(x, bottom, w, h);
                        if self.variation.mirror {
                            b.mirrored(IMAGE_WIDTH)
                        } else {
                            b
                        }
                    })
                    .collect();
                Track {
                    entity: e.id.clone(),
                    class: e.class,
                    color: e.color,
                    boxes,
                }
            })
            .collect())
    }
}

fn unit(v: [f64; 2]) -> [f64; 2] {
    let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
    if n == 0.0 {
        [0.0, 1.0]
    } else {
        [v[0] / n, v[1] / n]
    }
}

/// Renders a script into a detection trace plus its ground-truth tracks.
/// Deterministic in (script, noise, seed).
pub fn simulate(script: &SceneScript, noise: &NoiseModel, seed: u64) -> Result<(VideoTrace, Vec<Track>), TraceError> {
    noise.check()?;
    let tracks = script.tracks()?;
    let t_len = script.frame_count;
    let index: HashMap<&str, usize> = tracks.iter().enumerate().map(|(i, t)| (t.entity.as_str(), i)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ noise.seed.rotate_left(32));
    let mut frames: Vec<Vec<Detection>> = vec![Vec::new(); t_len];
    for (track, ent) in tracks.iter().zip(&script.entities) {
        #[allow(clippy::needless_range_loop)]
        for t in 0..t_len {
            let c = track.boxes[t].center();
            let next = if t + 1 < t_len {
                track.boxes[t + 1].center()
            } else if t > 0 {
                let p = track.boxes[t - 1].center();
                [2.0 * c[0] - p[0], 2.0 * c[1] - p[1]]
            } else {
                c
            };
            let velocity = [next[0] - c[0], next[1] - c[1]];
            let heading = (track.class == ObjectClass::Person).then(|| {
                let target = ent
                    .gaze
                    .iter()
                    .find(|g| g.from <= t && t <= g.to)
                    .map(|g| tracks[index[g.target.as_str()]].boxes[t].center());
                match target {
                    Some(p) => unit([p[0] - c[0], p[1] - c[1]]),
                    None => [0.0, 1.0],
                }
            });
            let (class_scores, color_scores) = appearance_scores(track.class, track.color, noise, &mut rng);
            let confidence = class_scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            frames[t].push(Detection {
                bbox: track.boxes[t],
                class_scores,
                color_scores,
                velocity,
                heading,
                confidence,
            });
        }
    }
    if !noise.is_noise_free() {
        for (t, frame) in frames.iter_mut().enumerate() {
            let mut observed: Vec<Detection> = Vec::with_capacity(frame.len() + 1);
            for d in frame.iter() {
                if rng.gen::<f64>() < noise.miss_rate {
                    continue;
                }
                observed.push(perturb(d, noise, &mut rng));
            }
            if rng.gen::<f64>() < noise.false_positive_rate {
                observed.push(false_positive(noise, &mut rng));
            }
            if observed.is_empty() {
                log::debug!("frame {t} lost every detection; adding clutter to keep it non-empty");
                observed.push(false_positive(noise, &mut rng));
            }
            observed.shuffle(&mut rng);
            *frame = observed;
        }
    }
    let metadata = script.depicts.as_ref().map(|(sid, iid, idx)| TraceMeta {
        sentence_id: sid.clone(),
        interpretation_id: iid.clone(),
        interpretation_index: *idx,
        variation: script.variation,
        seed,
        noise: noise.name.clone(),
    });
    let trace = VideoTrace {
        frames,
        width: IMAGE_WIDTH,
        height: IMAGE_HEIGHT,
        metadata,
    };
    trace.check()?;
    Ok((trace, tracks))
}

/// Incremental construction of a scene in normalized time, with motion
/// laid out left to right; `build` mirrors it for leftward variations.
pub struct ScriptBuilder {
    frame_count: usize,
    variation: Variation,
    entities: Vec<ScriptEntity>,
    timeline: Vec<Event>,
    x_offset: f64,
}

impl ScriptBuilder {
    pub fn new(frame_count: usize, variation: Variation) -> Self {
        ScriptBuilder {
            frame_count: frame_count.max(2),
            variation,
            entities: Vec::new(),
            timeline: Vec::new(),
            x_offset: 0.0,
        }
    }

    /// Shifts every later absolute x coordinate by `dx`.
    pub fn set_offset(&mut self, dx: f64) {
        self.x_offset = dx;
    }

    pub fn variation(&self) -> Variation {
        self.variation
    }

    /// Frame index of a time fraction in [0, 1].
    pub fn frame(&self, phase: f64) -> usize {
        let f = (phase.clamp(0.0, 1.0) * (self.frame_count - 1) as f64).round() as usize;
        f.min(self.frame_count - 1)
    }

    pub fn add(&mut self, id: &str, class: ObjectClass, color: Color) {
        let (mut w, mut h) = class.size();
        if class == ObjectClass::Person && self.variation.actor_set % 2 == 1 {
            w *= 1.2;
            h *= 200.0 / 180.0;
        }
        self.entities.push(ScriptEntity {
            id: id.to_string(),
            class,
            color,
            size: [w, h],
            keys: Vec::new(),
            gaze: Vec::new(),
        });
    }

    fn entity(&mut self, id: &str) -> &mut ScriptEntity {
        self.entities
            .iter_mut()
            .find(|e| e.id == id)
            .unwrap_or_else(|| panic!("entity `{id}` was not added"))
    }

    fn key(&mut self, id: &str, phase: f64, place: Placement) {
        let frame = self.frame(phase);
        let e = self.entity(id);
        // A later key at the same frame replaces the earlier one.
        e.keys.retain(|k| k.frame != frame);
        let at = e.keys.partition_point(|k| k.frame < frame);
        e.keys.insert(at, Key { frame, place });
    }

    /// Standing at `x` with bottom edge at `bottom`.
    pub fn at(&mut self, id: &str, phase: f64, x: f64, bottom: f64) {
        let x = x + self.x_offset;
        self.key(id, phase, Placement::At { x, bottom });
    }

    /// Held at an offset from `anchor`'s bottom center.
    pub fn attach(&mut self, id: &str, phase: f64, anchor: &str, dx: f64, dy: f64) {
        self.key(
            id,
            phase,
            Placement::Attached {
                anchor: anchor.to_string(),
                dx,
                dy,
            },
        );
    }

    pub fn gaze(&mut self, id: &str, from: f64, to: f64, target: &str) {
        let (from, to) = (self.frame(from), self.frame(to));
        self.entity(id).gaze.push(Gaze {
            from,
            to,
            target: target.to_string(),
        });
    }

    pub fn event(&mut self, verb: &str, agent: &str, patient: &str, from: f64, to: f64) {
        let (start, end) = (self.frame(from), self.frame(to));
        self.timeline.push(Event {
            verb: verb.to_string(),
            agent: agent.to_string(),
            patient: patient.to_string(),
            start,
            end,
        });
    }

    /// Absolute x of an entity at a time fraction, following its keys
    /// (attachments resolved recursively).
    pub fn x_at(&self, id: &str, phase: f64) -> f64 {
        let t = self.frame(phase);
        let e = self
            .entities
            .iter()
            .find(|e| e.id == id)
            .unwrap_or_else(|| panic!("entity `{id}` was not added"));
        let place = |k: &Key| match &k.place {
            Placement::At { x, .. } => *x,
            Placement::Attached { anchor, dx, .. } => self.x_at(anchor, phase) + dx,
        };
        match e.keys.iter().position(|k| k.frame > t) {
            None => place(e.keys.last().expect("entity has keys")),
            Some(0) => place(&e.keys[0]),
            Some(j) => {
                let (k0, k1) = (&e.keys[j - 1], &e.keys[j]);
                let a = (t - k0.frame) as f64 / (k1.frame - k0.frame) as f64;
                place(k0) + a * (place(k1) - place(k0))
            }
        }
    }

    pub fn build(mut self, depicts: Option<(String, String, usize)>) -> SceneScript {
        if self.variation.direction == Some(Direction::Left) {
            for e in &mut self.entities {
                for k in &mut e.keys {
                    match &mut k.place {
                        Placement::At { x, .. } => *x = IMAGE_WIDTH - *x,
                        Placement::Attached { dx, .. } => *dx = -*dx,
                    }
                }
            }
        }
        SceneScript {
            frame_count: self.frame_count,
            entities: self.entities,
            timeline: self.timeline,
            variation: self.variation,
            depicts,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn walker(noise_free: bool) -> (VideoTrace, Vec<Track>) {
        let mut b = ScriptBuilder::new(20, Variation::default());
        b.add("p", ObjectClass::Person, Color::Other);
        b.add("bag", ObjectClass::Bag, Color::Yellow);
        b.at("p", 0.0, 200.0, FLOOR);
        b.at("p", 1.0, 600.0, FLOOR);
        b.attach("bag", 0.0, "p", 45.0, -60.0);
        let s = b.build(None);
        let noise = if noise_free {
            NoiseModel::none()
        } else {
            NoiseModel::preset("moderate").unwrap()
        };
        simulate(&s, &noise, 7).unwrap()
    }

    #[test]
    fn noise_free_detections_equal_ground_truth() {
        let (trace, tracks) = walker(true);
        for (t, frame) in trace.frames.iter().enumerate() {
            assert_eq!(frame.len(), tracks.len());
            for (d, tr) in frame.iter().zip(&tracks) {
                assert_eq!(d.bbox, tr.boxes[t]);
            }
        }
    }

    #[test]
    fn attached_entities_follow_their_anchor() {
        let (_, tracks) = walker(true);
        for t in 0..20 {
            let (p, bag) = (tracks[0].boxes[t], tracks[1].boxes[t]);
            assert!((bag.center()[0] - p.center()[0] - 45.0).abs() < 1e-9);
        }
    }

    #[test]
    fn velocity_is_forward_displacement() {
        let (trace, _) = walker(true);
        let (a, b) = (trace.frames[3][0].center(), trace.frames[4][0].center());
        assert!((trace.frames[3][0].velocity[0] - (b[0] - a[0])).abs() < 1e-9);
    }

    #[test]
    fn simulation_is_deterministic() {
        assert_eq!(walker(false), walker(false));
    }

    #[test]
    fn leftward_variation_mirrors_layout() {
        let v = Variation {
            direction: Some(Direction::Left),
            ..Variation::default()
        };
        let mut b = ScriptBuilder::new(10, v);
        b.add("p", ObjectClass::Person, Color::Other);
        b.at("p", 0.0, 200.0, FLOOR);
        let s = b.build(None);
        let tr = s.tracks().unwrap();
        assert!((tr[0].boxes[0].center()[0] - (IMAGE_WIDTH - 200.0)).abs() < 1e-9);
    }

    #[test]
    fn attachment_cycle_is_rejected() {
        let mut b = ScriptBuilder::new(10, Variation::default());
        b.add("a", ObjectClass::Bag, Color::Other);
        b.add("b", ObjectClass::Bag, Color::Other);
        b.attach("a", 0.0, "b", 0.0, 0.0);
        b.attach("b", 0.0, "a", 0.0, 0.0);
        assert!(b.build(None).tracks().is_err());
    }

    #[test]
    fn tracks_stay_inside_the_image() {
        let mut b = ScriptBuilder::new(10, Variation::default());
        b.add("p", ObjectClass::Person, Color::Other);
        b.at("p", 0.0, -500.0, FLOOR);
        b.at("p", 1.0, 5000.0, 2000.0);
        for bx in &b.build(None).tracks().unwrap()[0].boxes {
            assert!(bx.x >= 0.0 && bx.x + bx.w <= IMAGE_WIDTH);
            assert!(bx.y >= 0.0 && bx.y + bx.h <= IMAGE_HEIGHT);
        }
    }
}
