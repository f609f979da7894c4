//! The scoring lattice: per-frame detection counts plus every potential of
//! the objective, already evaluated. All three decoders work on this.

use serde::{Deserialize, Serialize};

use crate::error::InferenceError;

pub(crate) const NEG_INF: f64 = f64::NEG_INFINITY;

/// One predicate's potentials.
#[derive(Debug, Clone)]
pub(crate) struct PredLattice {
    pub states: usize,
    pub first: usize,
    pub second: Option<usize>,
    /// `h[t][(k * D + j1) * D2 + j2]` with `D2 = 1` for unary predicates.
    pub h: Vec<Vec<f64>>,
    /// `a[k_prev * K + k]`.
    pub a: Vec<f64>,
    /// 0 for allowed initial / accepting states, −∞ otherwise.
    pub init: Vec<f64>,
    pub accept: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct Lattice {
    pub counts: Vec<usize>,
    pub vars: usize,
    /// `f[t][j]`.
    pub f: Vec<Vec<f64>>,
    /// `g[t][i * D_t + j]` for frame t ≥ 1 (prev i, cur j); `g[0]` empty.
    pub g: Vec<Vec<f64>>,
    pub preds: Vec<PredLattice>,
}

/// Detection index per variable and HMM state per predicate in one frame.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct JointState {
    pub detections: Vec<usize>,
    pub states: Vec<usize>,
}

/// Objective split by term. Initial/accepting constraints count towards
/// `a` (as 0 or −∞).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Breakdown {
    pub f: f64,
    pub g: f64,
    pub h: f64,
    pub a: f64,
}

impl Breakdown {
    pub fn total(&self) -> f64 {
        self.f + self.g + self.h + self.a
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapResult {
    pub total: f64,
    pub path: Vec<JointState>,
    pub breakdown: Breakdown,
}

impl Lattice {
    pub fn frames(&self) -> usize {
        self.counts.len()
    }

    /// Radix of each joint-state coordinate in frame `t`.
    pub fn dims(&self, t: usize) -> Vec<usize> {
        let mut d = vec![self.counts[t]; self.vars];
        d.extend(self.preds.iter().map(|p| p.states));
        d
    }

    pub fn state_count(&self, t: usize) -> u128 {
        self.dims(t).iter().map(|&d| d as u128).product()
    }

    pub fn check(&self) -> Result<(), InferenceError> {
        if self.frames() < 2 {
            return Err(InferenceError::TooShort(self.frames()));
        }
        if let Some(t) = self.counts.iter().position(|&c| c == 0) {
            return Err(InferenceError::EmptyFrame(t));
        }
        Ok(())
    }

    /// Node potential of frame `t` for the joint state `c`, without the
    /// initial/accepting masks.
    pub fn node(&self, t: usize, c: &[usize]) -> f64 {
        let d = self.counts[t];
        let mut s = 0.0;
        for &j in &c[..self.vars] {
            s += self.f[t][j];
        }
        for (p, pl) in self.preds.iter().enumerate() {
            let k = c[self.vars + p];
            let j1 = c[pl.first];
            let idx = match pl.second {
                Some(v2) => (k * d + j1) * d + c[v2],
                None => k * d + j1,
            };
            s += pl.h[t][idx];
        }
        s
    }

    /// Mask term of joint state `c` at frame `t`.
    pub fn mask(&self, t: usize, c: &[usize]) -> f64 {
        let last = self.frames() - 1;
        let mut s = 0.0;
        for (p, pl) in self.preds.iter().enumerate() {
            let k = c[self.vars + p];
            if t == 0 {
                s += pl.init[k];
            }
            if t == last {
                s += pl.accept[k];
            }
        }
        s
    }

    /// Edge potential from `prev` (frame t−1) to `cur` (frame t).
    pub fn edge(&self, t: usize, prev: &[usize], cur: &[usize]) -> f64 {
        let d = self.counts[t];
        let mut s = 0.0;
        for v in 0..self.vars {
            s += self.g[t][prev[v] * d + cur[v]];
        }
        for (p, pl) in self.preds.iter().enumerate() {
            s += pl.a[prev[self.vars + p] * pl.states + cur[self.vars + p]];
        }
        s
    }

    pub fn joint(&self, c: &[usize]) -> JointState {
        JointState {
            detections: c[..self.vars].to_vec(),
            states: c[self.vars..].to_vec(),
        }
    }

    /// Recomputes every term along a path, summing in a fixed order.
    pub fn breakdown(&self, path: &[Vec<usize>]) -> Breakdown {
        let mut b = Breakdown::default();
        for (t, c) in path.iter().enumerate() {
            let d = self.counts[t];
            for &j in &c[..self.vars] {
                b.f += self.f[t][j];
            }
            for (p, pl) in self.preds.iter().enumerate() {
                let k = c[self.vars + p];
                let j1 = c[pl.first];
                let idx = match pl.second {
                    Some(v2) => (k * d + j1) * d + c[v2],
                    None => k * d + j1,
                };
                b.h += pl.h[t][idx];
            }
            b.a += self.mask(t, c);
            if t > 0 {
                let prev = &path[t - 1];
                for v in 0..self.vars {
                    b.g += self.g[t][prev[v] * d + c[v]];
                }
                for (p, pl) in self.preds.iter().enumerate() {
                    b.a += pl.a[prev[self.vars + p] * pl.states + c[self.vars + p]];
                }
            }
        }
        b
    }

    pub fn result(&self, path: Vec<Vec<usize>>) -> MapResult {
        let breakdown = self.breakdown(&path);
        MapResult {
            total: breakdown.total(),
            path: path.iter().map(|c| self.joint(c)).collect(),
            breakdown,
        }
    }
}

/// Mixed-radix counter over joint-state coordinates, most significant
/// coordinate first, so counting order is lexicographic order.
pub(crate) struct Odometer {
    pub dims: Vec<usize>,
    pub coords: Vec<usize>,
}

impl Odometer {
    pub fn new(dims: Vec<usize>) -> Self {
        let n = dims.len();
        Odometer {
            dims,
            coords: vec![0; n],
        }
    }

    /// Advances; false once it wraps back to all zeros.
    pub fn step(&mut self) -> bool {
        for i in (0..self.dims.len()).rev() {
            self.coords[i] += 1;
            if self.coords[i] < self.dims[i] {
                return true;
            }
            self.coords[i] = 0;
        }
        false
    }
}

pub(crate) fn decode(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut c = vec![0; dims.len()];
    for i in (0..dims.len()).rev() {
        c[i] = index % dims[i];
        index /= dims[i];
    }
    c
}
