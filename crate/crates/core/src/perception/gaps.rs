//! Short-gap bridging, the one piece of tracking done before scoring.
//!
//! A detector that drops an object for a frame or two forces every track
//! through a wrong box for those frames, and readings that mention more
//! objects pay for that more often. Bridging fills such gaps with boxes
//! interpolated between the detections on either side.

use super::{BBox, Detection, VideoTrace};

/// IoU above which two boxes are taken to be the same object.
pub const MATCH_IOU: f64 = 0.3;

fn lerp(a: f64, b: f64, s: f64) -> f64 {
    a + (b - a) * s
}

fn best_class(d: &Detection) -> usize {
    let mut best = 0;
    for (i, &s) in d.class_scores.iter().enumerate() {
        if s > d.class_scores[best] {
            best = i;
        }
    }
    best
}

fn interpolate(a: &Detection, b: &Detection, s: f64) -> Detection {
    let bbox = BBox {
        x: lerp(a.bbox.x, b.bbox.x, s),
        y: lerp(a.bbox.y, b.bbox.y, s),
        w: lerp(a.bbox.w, b.bbox.w, s),
        h: lerp(a.bbox.h, b.bbox.h, s),
    };
    let heading = match (a.heading, b.heading) {
        (Some(h), Some(k)) => {
            let v = [lerp(h[0], k[0], s), lerp(h[1], k[1], s)];
            let n = v[0].hypot(v[1]);
            Some(if n > 1e-9 { [v[0] / n, v[1] / n] } else { h })
        }
        (h, k) => h.or(k),
    };
    Detection {
        bbox,
        class_scores: std::array::from_fn(|i| lerp(a.class_scores[i], b.class_scores[i], s)),
        color_scores: std::array::from_fn(|i| lerp(a.color_scores[i], b.color_scores[i], s)),
        velocity: [
            lerp(a.velocity[0], b.velocity[0], s),
            lerp(a.velocity[1], b.velocity[1], s),
        ],
        heading,
        confidence: a.confidence.min(b.confidence),
    }
}

fn covered(frame: &[Detection], probe: &BBox) -> bool {
    frame.iter().any(|d| d.bbox.iou(probe) >= MATCH_IOU)
}

/// Fills gaps of up to `max_gap` frames in which an object vanishes and
/// then reappears at a consistent place with the same best class.
///
/// Only gaps with no overlapping detection in any frame are filled. When a
/// detection could close gaps of several lengths, the shortest is taken.
pub fn bridge_gaps(trace: &VideoTrace, max_gap: usize) -> VideoTrace {
    let mut out = trace.clone();
    let n = trace.frames.len();
    for t in 0..n.saturating_sub(2) {
        for a in &trace.frames[t] {
            // Still there in the next frame: nothing to fill.
            if covered(&out.frames[t + 1], &shifted(a, 1.0)) {
                continue;
            }
            let class = best_class(a);
            'gap: for gap in 1..=max_gap {
                let end = t + gap + 1;
                if end >= n {
                    break;
                }
                let span = (gap + 1) as f64;
                for b in &trace.frames[end] {
                    if best_class(b) != class || shifted(a, span).iou(&b.bbox) < MATCH_IOU {
                        continue;
                    }
                    let fill: Vec<Detection> = (1..=gap).map(|k| interpolate(a, b, k as f64 / span)).collect();
                    let clear = fill
                        .iter()
                        .enumerate()
                        .all(|(k, d)| !covered(&out.frames[t + 1 + k], &d.bbox));
                    if clear {
                        for (k, d) in fill.into_iter().enumerate() {
                            out.frames[t + 1 + k].push(d);
                        }
                    }
                    break 'gap;
                }
            }
        }
    }
    out
}

/// `d`'s box moved `steps` frames along its velocity.
fn shifted(d: &Detection, steps: f64) -> BBox {
    BBox {
        x: d.bbox.x + d.velocity[0] * steps,
        y: d.bbox.y + d.velocity[1] * steps,
        ..d.bbox
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(x: f64, class: usize) -> Detection {
        let mut class_scores = [-5.0; 4];
        class_scores[class] = -0.1;
        Detection {
            bbox: BBox {
                x,
                y: 300.0,
                w: 100.0,
                h: 200.0,
            },
            class_scores,
            color_scores: [-1.0; 3],
            velocity: [10.0, 0.0],
            heading: None,
            confidence: -0.1,
        }
    }

    fn walk(present: &[bool], class_at: impl Fn(usize) -> usize) -> VideoTrace {
        VideoTrace {
            frames: present
                .iter()
                .enumerate()
                .map(|(t, &p)| {
                    let mut f = vec![det(900.0, 2)];
                    if p {
                        f.push(det(100.0 + 10.0 * t as f64, class_at(t)));
                    }
                    f
                })
                .collect(),
            width: 1280.0,
            height: 720.0,
            metadata: None,
        }
    }

    #[test]
    fn complete_traces_are_unchanged() {
        let t = walk(&[true; 6], |_| 0);
        assert_eq!(bridge_gaps(&t, 2), t);
    }

    #[test]
    fn short_dropouts_are_interpolated() {
        let t = walk(&[true, true, false, false, true, true], |_| 0);
        let b = bridge_gaps(&t, 2);
        assert_eq!(b.frames[2].len(), 2);
        assert_eq!(b.frames[3].len(), 2);
        assert!((b.frames[2][1].bbox.x - 120.0).abs() < 1e-9);
        assert!((b.frames[3][1].bbox.x - 130.0).abs() < 1e-9);
        assert_eq!(b.frames[1], t.frames[1]);
    }

    #[test]
    fn long_dropouts_stay_open() {
        let t = walk(&[true, false, false, false, true], |_| 0);
        assert_eq!(bridge_gaps(&t, 2), t);
    }

    #[test]
    fn a_class_change_is_not_a_gap() {
        let t = walk(&[true, false, true], |f| if f == 0 { 0 } else { 1 });
        assert_eq!(bridge_gaps(&t, 2), t);
    }

    #[test]
    fn zero_disables_bridging() {
        let t = walk(&[true, false, true], |_| 0);
        assert_eq!(bridge_gaps(&t, 0), t);
        assert_eq!(bridge_gaps(&t, 1).frames[1].len(), 2);
    }
}
