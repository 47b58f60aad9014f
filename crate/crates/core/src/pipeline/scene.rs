//! Constant-velocity block scenes and their contact-state time series.

use serde::{Deserialize, Serialize};

use super::dataset::Sample;
use super::features::extract_features;
use super::PipelineError;
use crate::geometry::{classify_contact, Block, ContactState, GeometryError, Point, DEFAULT_TOL};

fn default_pairs() -> Vec<[usize; 2]> {
    vec![[0, 1]]
}

fn is_default_pairs(p: &[[usize; 2]]) -> bool {
    p == [[0, 1]]
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn is_default_tol(t: &f64) -> bool {
    *t == DEFAULT_TOL
}

/// Blocks translating at constant velocity.
///
/// `pairs` names the block pairs whose contact history feeds the dataset;
/// it defaults to the first two blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub blocks: Vec<Block>,
    /// Per-block velocity in metres per unit time.
    pub velocities: Vec<[f64; 2]>,
    pub steps: usize,
    pub dt: f64,
    #[serde(default = "default_pairs", skip_serializing_if = "is_default_pairs")]
    pub pairs: Vec<[usize; 2]>,
    #[serde(default = "default_tol", skip_serializing_if = "is_default_tol")]
    pub tol: f64,
}

/// Contact state of one block pair at one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairState {
    pub a: usize,
    pub b: usize,
    pub state: ContactState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub step: usize,
    pub t: f64,
    pub blocks: Vec<Block>,
    /// Every pair `a < b`, in lexicographic order.
    pub states: Vec<PairState>,
}

impl Frame {
    pub fn state(&self, a: usize, b: usize) -> Option<ContactState> {
        let (a, b) = (a.min(b), a.max(b));
        self.states.iter().find(|s| s.a == a && s.b == b).map(|s| s.state)
    }
}

impl Scene {
    pub fn new(blocks: Vec<Block>, velocities: Vec<[f64; 2]>, steps: usize, dt: f64) -> Result<Self, PipelineError> {
        let scene = Self { blocks, velocities, steps, dt, pairs: default_pairs(), tol: DEFAULT_TOL };
        scene.validate()?;
        Ok(scene)
    }

    pub fn with_pairs(mut self, pairs: Vec<[usize; 2]>) -> Result<Self, PipelineError> {
        self.pairs = pairs;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::InvalidScene(m));
        let n = self.blocks.len();
        if n < 2 {
            return bad(format!("need at least 2 blocks, got {n}"));
        }
        if self.velocities.len() != n {
            return bad(format!("{} velocities for {n} blocks", self.velocities.len()));
        }
        if self.velocities.iter().flatten().any(|v| !v.is_finite()) {
            return bad("velocities must be finite".into());
        }
        if self.steps == 0 {
            return bad("steps must be positive".into());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if self.pairs.is_empty() {
            return bad("at least one observed pair is required".into());
        }
        for &[a, b] in &self.pairs {
            if a == b || a >= n || b >= n {
                return bad(format!("invalid pair [{a}, {b}]"));
            }
        }
        Ok(())
    }

    /// Block `index` after `step` steps.
    pub fn block_at(&self, index: usize, step: usize) -> Block {
        let [vx, vy] = self.velocities[index];
        let k = step as f64 * self.dt;
        self.blocks[index].translated(Point::new(vx * k, vy * k))
    }

    pub fn blocks_at(&self, step: usize) -> Vec<Block> {
        (0..self.blocks.len()).map(|i| self.block_at(i, step)).collect()
    }

    /// Classify every pair at `step`.
    pub fn frame(&self, step: usize) -> Result<Frame, PipelineError> {
        let blocks = self.blocks_at(step);
        let mut states = Vec::new();
        for a in 0..blocks.len() {
            for b in a + 1..blocks.len() {
                let state = classify_contact(&blocks[a], &blocks[b], self.tol).map_err(|e| match e {
                    GeometryError::Overlap { depth, .. } => PipelineError::Overlap { step, a, b, depth },
                    other => other.into(),
                })?;
                states.push(PairState { a, b, state });
            }
        }
        Ok(Frame { step, t: step as f64 * self.dt, blocks, states })
    }

    /// Lazily evaluated frames `0..steps`.
    pub fn frames(&self) -> impl Iterator<Item = Result<Frame, PipelineError>> + '_ {
        (0..self.steps).map(|s| self.frame(s))
    }

    /// The scene started from its configuration at `step` with every
    /// velocity negated.
    pub fn reversed_from(&self, step: usize) -> Scene {
        Scene {
            blocks: self.blocks_at(step),
            velocities: self.velocities.iter().map(|[x, y]| [-x, -y]).collect(),
            ..self.clone()
        }
    }

    /// Axis-aligned box containing every block over the whole run.
    pub fn bounds(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for step in [0, self.steps - 1] {
            for b in self.blocks_at(step) {
                let (l, h) = b.bounds();
                lo = Point::new(lo.x.min(l.x), lo.y.min(l.y));
                hi = Point::new(hi.x.max(h.x), hi.y.max(h.y));
            }
        }
        (lo, hi)
    }
}

/// The full contact history of a scene.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub frames: Vec<Frame>,
    pub pairs: Vec<[usize; 2]>,
}

/// Run `scene` to completion. Halts with [`PipelineError::Overlap`] at the
/// first step where two blocks interpenetrate beyond tolerance.
pub fn simulate(scene: &Scene) -> Result<Series, PipelineError> {
    scene.validate()?;
    let frames = scene.frames().collect::<Result<Vec<_>, _>>()?;
    Ok(Series { frames, pairs: scene.pairs.clone() })
}

impl Series {
    /// Number of observations (frames times observed pairs).
    pub fn len(&self) -> usize {
        self.frames.len() * self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// One labeled sample per observed pair and frame. Pairs are unrolled
    /// one after another, so sample `step` runs `0..len()` with pair `p`
    /// occupying `p * frames .. (p + 1) * frames`.
    pub fn samples(&self) -> Result<Vec<Sample>, PipelineError> {
        let per_pair = self.frames.len();
        let mut out = Vec::with_capacity(self.len());
        for (p, &[a, b]) in self.pairs.iter().enumerate() {
            for frame in &self.frames {
                let features = extract_features(&frame.blocks[a], &frame.blocks[b])?;
                let label = frame.state(a, b).expect("frames classify every pair");
                out.push(Sample { features, label, step: p * per_pair + frame.step });
            }
        }
        Ok(out)
    }

    /// `(step, t, state)` rows in the same unrolled order as [`Series::samples`].
    pub fn trace(&self) -> Vec<(usize, f64, ContactState)> {
        let per_pair = self.frames.len();
        self.pairs
            .iter()
            .enumerate()
            .flat_map(|(p, &[a, b])| {
                self.frames.iter().map(move |f| (p * per_pair + f.step, f.t, f.state(a, b).expect("pair classified")))
            })
            .collect()
    }
}
