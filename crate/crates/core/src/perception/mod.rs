//! Detection traces and the synthetic scene simulator that produces them.

pub mod gaps;
pub mod noise;
pub mod recipes;
pub mod script;
pub mod suite;

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::TraceError;

pub use gaps::bridge_gaps;
pub use noise::NoiseModel;
pub use recipes::script_for;
pub use script::{simulate, SceneScript, Track, Variation};
pub use suite::{generate_suite, SuiteConfig};

pub const TRACE_SCHEMA: &str = "lava-trace/1";
pub const IMAGE_WIDTH: f64 = 1280.0;
pub const IMAGE_HEIGHT: f64 = 720.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectClass {
    Person,
    Chair,
    Bag,
    Telescope,
}

impl ObjectClass {
    pub const ALL: [ObjectClass; 4] = [
        ObjectClass::Person,
        ObjectClass::Chair,
        ObjectClass::Bag,
        ObjectClass::Telescope,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            ObjectClass::Person => "person",
            ObjectClass::Chair => "chair",
            ObjectClass::Bag => "bag",
            ObjectClass::Telescope => "telescope",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }

    /// Ground-truth box size (width, height) in pixels.
    pub fn size(self) -> (f64, f64) {
        match self {
            ObjectClass::Person => (70.0, 180.0),
            ObjectClass::Chair => (110.0, 110.0),
            ObjectClass::Bag => (60.0, 50.0),
            ObjectClass::Telescope => (90.0, 30.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Yellow,
    Green,
    Other,
}

impl Color {
    pub const ALL: [Color; 3] = [Color::Yellow, Color::Green, Color::Other];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Color::Yellow => "yellow",
            Color::Green => "green",
            Color::Other => "other",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }

    /// The other named color.
    pub fn contrast(self) -> Color {
        match self {
            Color::Yellow => Color::Green,
            Color::Green => Color::Yellow,
            Color::Other => Color::Other,
        }
    }
}

/// Axis-aligned rectangle, top-left corner plus size, y pointing down.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    /// Box with horizontal center `cx` whose bottom edge sits at `bottom`.
    pub fn from_bottom_center(cx: f64, bottom: f64, w: f64, h: f64) -> Self {
        BBox {
            x: cx - w / 2.0,
            y: bottom - h,
            w,
            h,
        }
    }

    pub fn center(&self) -> [f64; 2] {
        [self.x + self.w / 2.0, self.y + self.h / 2.0]
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn iou(&self, other: &BBox) -> f64 {
        let ix = (self.x + self.w).min(other.x + other.w) - self.x.max(other.x);
        let iy = (self.y + self.h).min(other.y + other.h) - self.y.max(other.y);
        if ix <= 0.0 || iy <= 0.0 {
            return 0.0;
        }
        let inter = ix * iy;
        inter / (self.area() + other.area() - inter)
    }

    /// Horizontal mirror image within an image of width `width`.
    pub fn mirrored(&self, width: f64) -> BBox {
        BBox {
            x: width - self.x - self.w,
            ..*self
        }
    }
}

impl Serialize for BBox {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.x, self.y, self.w, self.h].serialize(s)
    }
}

impl<'de> Deserialize<'de> for BBox {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [x, y, w, h] = <[f64; 4]>::deserialize(d)?;
        Ok(BBox { x, y, w, h })
    }
}

/// Per-class or per-color log-scores, keyed by name in files.
mod named_scores {
    use std::collections::BTreeMap;

    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer, const N: usize>(
        scores: &[f64; N],
        names: [&'static str; N],
        s: S,
    ) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(N))?;
        for (n, v) in names.iter().zip(scores) {
            m.serialize_entry(n, v)?;
        }
        m.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>, const N: usize>(
        names: [&'static str; N],
        d: D,
    ) -> Result<[f64; N], D::Error> {
        let m = BTreeMap::<String, f64>::deserialize(d)?;
        let mut out = [0.0; N];
        for (i, n) in names.iter().enumerate() {
            out[i] = *m
                .get(*n)
                .ok_or_else(|| D::Error::custom(format!("missing score `{n}`")))?;
        }
        if m.len() != N {
            return Err(D::Error::custom("unexpected score name"));
        }
        Ok(out)
    }
}

const CLASS_NAMES: [&str; 4] = ["person", "chair", "bag", "telescope"];
const COLOR_NAMES: [&str; 3] = ["yellow", "green", "other"];

fn ser_class<S: serde::Serializer>(v: &[f64; 4], s: S) -> Result<S::Ok, S::Error> {
    named_scores::serialize(v, CLASS_NAMES, s)
}
fn de_class<'de, D: serde::Deserializer<'de>>(d: D) -> Result<[f64; 4], D::Error> {
    named_scores::deserialize(CLASS_NAMES, d)
}
fn ser_color<S: serde::Serializer>(v: &[f64; 3], s: S) -> Result<S::Ok, S::Error> {
    named_scores::serialize(v, COLOR_NAMES, s)
}
fn de_color<'de, D: serde::Deserializer<'de>>(d: D) -> Result<[f64; 3], D::Error> {
    named_scores::deserialize(COLOR_NAMES, d)
}

/// One candidate object in one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    #[serde(rename = "box")]
    pub bbox: BBox,
    #[serde(serialize_with = "ser_class", deserialize_with = "de_class")]
    pub class_scores: [f64; 4],
    #[serde(serialize_with = "ser_color", deserialize_with = "de_color")]
    pub color_scores: [f64; 3],
    /// Displacement to the next frame, standing in for local optical flow.
    pub velocity: [f64; 2],
    /// Unit facing direction; persons only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heading: Option<[f64; 2]>,
    /// Detector log-confidence `f`.
    pub confidence: f64,
}

impl Detection {
    pub fn class_score(&self, c: ObjectClass) -> f64 {
        self.class_scores[c.index()]
    }

    pub fn color_score(&self, c: Color) -> f64 {
        self.color_scores[c.index()]
    }

    pub fn center(&self) -> [f64; 2] {
        self.bbox.center()
    }

    /// Mirror image, velocity and heading included.
    pub fn mirrored(&self, width: f64) -> Detection {
        Detection {
            bbox: self.bbox.mirrored(width),
            velocity: [-self.velocity[0], self.velocity[1]],
            heading: self.heading.map(|[x, y]| [-x, y]),
            ..self.clone()
        }
    }
}

/// Where a trace came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub sentence_id: String,
    pub interpretation_id: String,
    pub interpretation_index: usize,
    pub variation: Variation,
    pub seed: u64,
    #[serde(default)]
    pub noise: String,
}

impl TraceMeta {
    /// Stable identifier of the trace within a suite.
    pub fn trace_id(&self) -> String {
        format!("{}@{}", self.interpretation_id, self.variation)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VideoTrace {
    pub frames: Vec<Vec<Detection>>,
    pub width: f64,
    pub height: f64,
    pub metadata: Option<TraceMeta>,
}

impl VideoTrace {
    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    /// Checks the trace invariants: T ≥ 2 and no empty frame.
    pub fn check(&self) -> Result<(), TraceError> {
        if self.frames.is_empty() {
            return Err(TraceError::Empty);
        }
        if self.frames.len() < 2 {
            return Err(TraceError::TooShort(self.frames.len()));
        }
        if let Some(t) = self.frames.iter().position(Vec::is_empty) {
            return Err(TraceError::EmptyFrame(t));
        }
        Ok(())
    }

    /// The trace played backwards. Detection `j` must denote the same
    /// object in every frame; velocities are recomputed as displacements
    /// in the new direction of time.
    pub fn reversed(&self) -> Result<VideoTrace, TraceError> {
        self.check()?;
        let d = self.frames[0].len();
        if self.frames.iter().any(|f| f.len() != d) {
            return Err(TraceError::Script(
                "reversal needs the same detection count in every frame".into(),
            ));
        }
        let mut frames: Vec<Vec<Detection>> = self.frames.iter().rev().cloned().collect();
        let t = frames.len();
        for r in 0..t {
            #[allow(clippy::needless_range_loop)]
            for j in 0..d {
                let v = if r + 1 < t {
                    let (a, b) = (frames[r][j].center(), frames[r + 1][j].center());
                    [b[0] - a[0], b[1] - a[1]]
                } else {
                    frames[r - 1][j].velocity
                };
                frames[r][j].velocity = v;
            }
        }
        Ok(VideoTrace { frames, ..self.clone() })
    }

    /// Horizontal mirror image of the whole trace.
    pub fn mirrored(&self) -> VideoTrace {
        VideoTrace {
            frames: self
                .frames
                .iter()
                .map(|f| f.iter().map(|d| d.mirrored(self.width)).collect())
                .collect(),
            ..self.clone()
        }
    }
}

impl fmt::Display for VideoTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let max = self.frames.iter().map(Vec::len).max().unwrap_or(0);
        write!(f, "{} frames, up to {max} detections", self.frame_count())?;
        if let Some(m) = &self.metadata {
            write!(f, " ({})", m.trace_id())?;
        }
        Ok(())
    }
}

/// Motion coherence `g`: log-score of the displacement between two
/// consecutive detections given the earlier detection's velocity. Zero
/// when they agree, decreasing in the squared discrepancy; a Lorentzian
/// (Cauchy) falloff keeps single outliers from dominating.
pub fn motion_coherence(prev: &Detection, cur: &Detection, bandwidth: f64) -> f64 {
    let (a, b) = (prev.center(), cur.center());
    let dx = b[0] - a[0] - prev.velocity[0];
    let dy = b[1] - a[1] - prev.velocity[1];
    let r2 = dx * dx + dy * dy;
    if r2 == 0.0 {
        return 0.0;
    }
    -(r2 / (2.0 * bandwidth * bandwidth)).ln_1p()
}

#[derive(Serialize, Deserialize)]
struct Header {
    schema: String,
    #[serde(rename = "T")]
    frame_count: usize,
    width: f64,
    height: f64,
    #[serde(default)]
    metadata: Option<TraceMeta>,
}

pub fn write_trace<W: Write>(trace: &VideoTrace, mut out: W) -> Result<(), TraceError> {
    let io = |e| TraceError::Io {
        path: "<stream>".into(),
        source: e,
    };
    let header = Header {
        schema: TRACE_SCHEMA.into(),
        frame_count: trace.frame_count(),
        width: trace.width,
        height: trace.height,
        metadata: trace.metadata.clone(),
    };
    writeln!(out, "{}", serde_json::to_string(&header).expect("header serializes")).map_err(io)?;
    for frame in &trace.frames {
        writeln!(out, "{}", serde_json::to_string(frame).expect("frame serializes")).map_err(io)?;
    }
    Ok(())
}

pub fn read_trace<R: BufRead>(input: R) -> Result<VideoTrace, TraceError> {
    let mut lines = input.lines().enumerate();
    let malformed = |line: usize, message: String| TraceError::Malformed { line, message };
    let (_, first) = lines.next().ok_or(TraceError::Empty)?;
    let first = first.map_err(|e| malformed(1, e.to_string()))?;
    let header: serde_json::Value = serde_json::from_str(&first).map_err(|e| malformed(1, e.to_string()))?;
    let schema = header.get("schema").and_then(|s| s.as_str()).unwrap_or("");
    if schema != TRACE_SCHEMA {
        return Err(TraceError::Schema {
            found: schema.into(),
            expected: TRACE_SCHEMA.into(),
        });
    }
    if header.get("metadata").is_none_or(|m| m.is_null()) {
        log::warn!("trace has no metadata");
    }
    let header: Header = serde_json::from_value(header).map_err(|e| malformed(1, e.to_string()))?;
    if header.frame_count == 0 {
        return Err(TraceError::Empty);
    }
    let mut frames = Vec::with_capacity(header.frame_count);
    for (i, line) in lines {
        let line = line.map_err(|e| malformed(i + 1, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let frame: Vec<Detection> = serde_json::from_str(&line).map_err(|e| malformed(i + 1, e.to_string()))?;
        if let Some(bad) = frame.iter().find(|d| !(d.bbox.w > 0.0 && d.bbox.h > 0.0)) {
            return Err(malformed(i + 1, format!("box {:?} has no area", bad.bbox)));
        }
        frames.push(frame);
    }
    if frames.len() != header.frame_count {
        return Err(malformed(
            0,
            format!("header says T={} but found {} frames", header.frame_count, frames.len()),
        ));
    }
    let trace = VideoTrace {
        frames,
        width: header.width,
        height: header.height,
        metadata: header.metadata,
    };
    trace.check()?;
    Ok(trace)
}

pub fn save_trace(trace: &VideoTrace, path: &Path) -> Result<(), TraceError> {
    let io = |e| TraceError::Io {
        path: path.to_path_buf(),
        source: e,
    };
    let mut w = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    write_trace(trace, &mut w)?;
    w.flush().map_err(io)
}

pub fn load_trace(path: &Path) -> Result<VideoTrace, TraceError> {
    let file = std::fs::File::open(path).map_err(|e| TraceError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    read_trace(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(cx: f64, cy: f64, v: [f64; 2]) -> Detection {
        Detection {
            bbox: BBox {
                x: cx - 10.0,
                y: cy - 10.0,
                w: 20.0,
                h: 20.0,
            },
            class_scores: [0.0, -5.0, -5.0, -5.0],
            color_scores: [-1.0, -1.0, -1.0],
            velocity: v,
            heading: None,
            confidence: 0.0,
        }
    }

    #[test]
    fn coherent_motion_scores_zero() {
        let g = motion_coherence(&det(100.0, 100.0, [3.0, 0.0]), &det(103.0, 100.0, [3.0, 0.0]), 4.0);
        assert_eq!(g, 0.0);
    }

    #[test]
    fn opposed_motion_scores_lower() {
        let coherent = motion_coherence(&det(100.0, 100.0, [3.0, 0.0]), &det(103.0, 100.0, [0.0, 0.0]), 4.0);
        let opposed = motion_coherence(&det(100.0, 100.0, [-3.0, 0.0]), &det(103.0, 100.0, [0.0, 0.0]), 4.0);
        assert!(opposed < coherent);
    }

    #[test]
    fn wide_bandwidth_flattens_coherence() {
        let g = motion_coherence(&det(100.0, 100.0, [-3.0, 0.0]), &det(103.0, 100.0, [0.0, 0.0]), 1e9);
        assert!(g.abs() < 1e-12);
    }

    #[test]
    fn coherence_is_mirror_symmetric() {
        let (a, b) = (det(100.0, 100.0, [2.0, 1.0]), det(107.0, 99.0, [0.0, 0.0]));
        let g = motion_coherence(&a, &b, 4.0);
        let gm = motion_coherence(&a.mirrored(1280.0), &b.mirrored(1280.0), 4.0);
        assert!((g - gm).abs() < 1e-12);
    }

    #[test]
    fn iou_of_identical_and_disjoint_boxes() {
        let a = BBox {
            x: 0.0,
            y: 0.0,
            w: 10.0,
            h: 10.0,
        };
        assert_eq!(a.iou(&a), 1.0);
        assert_eq!(a.iou(&BBox { x: 20.0, ..a }), 0.0);
        assert!((a.iou(&BBox { x: 5.0, ..a }) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_frame_file_is_rejected() {
        let text = format!("{{\"schema\":\"{TRACE_SCHEMA}\",\"T\":0,\"width\":1280,\"height\":720}}\n");
        assert!(matches!(read_trace(text.as_bytes()), Err(TraceError::Empty)));
    }

    #[test]
    fn missing_metadata_loads_as_none() {
        let frame = serde_json::to_string(&vec![det(50.0, 50.0, [0.0, 0.0])]).unwrap();
        let text =
            format!("{{\"schema\":\"{TRACE_SCHEMA}\",\"T\":2,\"width\":1280,\"height\":720}}\n{frame}\n{frame}\n");
        let t = read_trace(text.as_bytes()).unwrap();
        assert!(t.metadata.is_none());
        assert_eq!(t.frame_count(), 2);
    }

    #[test]
    fn foreign_schema_is_rejected() {
        let text = "{\"schema\":\"x/2\",\"T\":2,\"width\":1,\"height\":1}\n";
        assert!(matches!(read_trace(text.as_bytes()), Err(TraceError::Schema { .. })));
    }
}
