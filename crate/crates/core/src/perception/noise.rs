use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{BBox, Color, Detection, ObjectClass, IMAGE_HEIGHT, IMAGE_WIDTH};
use crate::error::TraceError;

/// Detector noise applied on top of ground-truth tracks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub name: String,
    /// Box jitter, pixels (center and size).
    pub sigma: f64,
    /// Probability of one spurious detection per frame.
    pub false_positive_rate: f64,
    /// Probability that a true object goes undetected in a frame.
    pub miss_rate: f64,
    /// Softmax temperature turning class/color logits into log-scores.
    pub temperature: f64,
    /// Gaussian perturbation of class/color logits.
    pub logit_sigma: f64,
    /// Velocity-feature noise, pixels per frame.
    pub velocity_sigma: f64,
    /// Heading noise, degrees.
    pub heading_sigma_deg: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub const PRESETS: [&'static str; 4] = ["none", "mild", "moderate", "severe"];

    pub fn none() -> Self {
        NoiseModel {
            name: "none".into(),
            sigma: 0.0,
            false_positive_rate: 0.0,
            miss_rate: 0.0,
            temperature: 0.25,
            logit_sigma: 0.0,
            velocity_sigma: 0.0,
            heading_sigma_deg: 0.0,
            seed: 0,
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        let base = Self::none();
        Some(match name {
            "none" => base,
            "mild" => NoiseModel {
                name: name.into(),
                sigma: 3.0,
                false_positive_rate: 0.2,
                miss_rate: 0.03,
                temperature: 0.3,
                logit_sigma: 0.15,
                velocity_sigma: 0.75,
                heading_sigma_deg: 3.0,
                ..base
            },
            "moderate" => NoiseModel {
                name: name.into(),
                sigma: 8.0,
                false_positive_rate: 0.5,
                miss_rate: 0.10,
                temperature: 0.4,
                logit_sigma: 0.3,
                velocity_sigma: 2.0,
                heading_sigma_deg: 8.0,
                seed: 42,
            },
            "severe" => NoiseModel {
                name: name.into(),
                sigma: 16.0,
                false_positive_rate: 0.9,
                miss_rate: 0.25,
                temperature: 0.6,
                logit_sigma: 0.6,
                velocity_sigma: 4.0,
                heading_sigma_deg: 16.0,
                ..base
            },
            _ => return None,
        })
    }

    pub fn check(&self) -> Result<(), TraceError> {
        let rate = |r: f64, what: &str| {
            if (0.0..1.0).contains(&r) {
                Ok(())
            } else {
                Err(TraceError::Noise(format!("{what} {r} is outside [0, 1)")))
            }
        };
        rate(self.false_positive_rate, "false-positive rate")?;
        rate(self.miss_rate, "miss rate")?;
        for (v, what) in [
            (self.sigma, "sigma"),
            (self.logit_sigma, "logit sigma"),
            (self.velocity_sigma, "velocity sigma"),
            (self.heading_sigma_deg, "heading sigma"),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(TraceError::Noise(format!("{what} must be a finite value ≥ 0")));
            }
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(TraceError::Noise("temperature must be positive".into()));
        }
        Ok(())
    }

    pub fn is_noise_free(&self) -> bool {
        self.sigma == 0.0
            && self.false_positive_rate == 0.0
            && self.miss_rate == 0.0
            && self.logit_sigma == 0.0
            && self.velocity_sigma == 0.0
            && self.heading_sigma_deg == 0.0
    }
}

/// `log_softmax(logits / temperature)`.
pub fn log_softmax<const N: usize>(logits: [f64; N], temperature: f64) -> [f64; N] {
    let scaled = logits.map(|l| l / temperature);
    let m = scaled.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + scaled.iter().map(|s| (s - m).exp()).sum::<f64>().ln();
    scaled.map(|s| s - lse)
}

fn gauss(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    if sigma == 0.0 {
        0.0
    } else {
        Normal::new(0.0, sigma).expect("sigma is finite").sample(rng)
    }
}

fn one_hot<const N: usize>(i: usize) -> [f64; N] {
    let mut out = [0.0; N];
    out[i] = 1.0;
    out
}

/// Class and color log-scores for a detection of `class`/`color`.
pub fn appearance_scores(
    class: ObjectClass,
    color: Color,
    noise: &NoiseModel,
    rng: &mut ChaCha8Rng,
) -> ([f64; 4], [f64; 3]) {
    let mut cl: [f64; 4] = one_hot(class.index());
    let mut co: [f64; 3] = one_hot(color.index());
    for l in cl.iter_mut().chain(co.iter_mut()) {
        *l += gauss(rng, noise.logit_sigma);
    }
    (log_softmax(cl, noise.temperature), log_softmax(co, noise.temperature))
}

/// The observed version of one ground-truth detection.
pub fn perturb(det: &Detection, noise: &NoiseModel, rng: &mut ChaCha8Rng) -> Detection {
    let mut d = det.clone();
    if noise.sigma > 0.0 {
        let [cx, cy] = det.center();
        let w = (det.bbox.w + gauss(rng, noise.sigma * 0.5)).max(4.0);
        let h = (det.bbox.h + gauss(rng, noise.sigma * 0.5)).max(4.0);
        let cx = cx + gauss(rng, noise.sigma);
        let cy = cy + gauss(rng, noise.sigma);
        d.bbox = BBox {
            x: cx - w / 2.0,
            y: cy - h / 2.0,
            w,
            h,
        };
    }
    d.velocity = [
        det.velocity[0] + gauss(rng, noise.velocity_sigma),
        det.velocity[1] + gauss(rng, noise.velocity_sigma),
    ];
    if let Some([hx, hy]) = det.heading {
        let a = gauss(rng, noise.heading_sigma_deg).to_radians();
        let (s, c) = a.sin_cos();
        d.heading = Some([hx * c - hy * s, hx * s + hy * c]);
    }
    d
}

/// A spurious detection placed uniformly over the image with random
/// class and color.
pub fn false_positive(noise: &NoiseModel, rng: &mut ChaCha8Rng) -> Detection {
    let class = ObjectClass::ALL[rng.gen_range(0..4)];
    let color = Color::ALL[rng.gen_range(0..3)];
    let (w, h) = class.size();
    let cx = rng.gen_range(w / 2.0..IMAGE_WIDTH - w / 2.0);
    let cy = rng.gen_range(h / 2.0..IMAGE_HEIGHT - h / 2.0);
    let (mut class_scores, color_scores) = appearance_scores(class, color, noise, rng);
    // Clutter is less confident than a real object.
    let damp = log_softmax([0.5, 0.0, 0.0, 0.0], noise.temperature)[0];
    for s in class_scores.iter_mut() {
        *s += damp;
    }
    let confidence = class_scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let heading = (class == ObjectClass::Person).then(|| {
        let a: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        [a.cos(), a.sin()]
    });
    Detection {
        bbox: BBox::from_bottom_center(cx, cy + h / 2.0, w, h),
        class_scores,
        color_scores,
        velocity: [gauss(rng, 2.0), gauss(rng, 2.0)],
        heading,
        confidence,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid_and_ordered() {
        let ps: Vec<NoiseModel> = NoiseModel::PRESETS
            .iter()
            .map(|n| NoiseModel::preset(n).unwrap())
            .collect();
        for p in &ps {
            p.check().unwrap();
        }
        for w in ps.windows(2) {
            assert!(w[0].sigma <= w[1].sigma);
            assert!(w[0].miss_rate <= w[1].miss_rate);
            assert!(w[0].false_positive_rate <= w[1].false_positive_rate);
        }
        let m = &ps[2];
        assert_eq!(
            (m.sigma, m.miss_rate, m.false_positive_rate, m.seed),
            (8.0, 0.10, 0.5, 42)
        );
        assert!(ps[0].is_noise_free());
    }

    #[test]
    fn rates_must_be_below_one() {
        let mut n = NoiseModel::none();
        n.miss_rate = 1.0;
        assert!(n.check().is_err());
    }

    #[test]
    fn log_softmax_normalizes() {
        let s = log_softmax([1.0, 0.0, 0.0], 0.25);
        let total: f64 = s.iter().map(|v| v.exp()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(s[0] > s[1]);
    }
}
