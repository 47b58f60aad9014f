//! Kohonen self-organizing map with post-hoc neuron labeling.
//!
//! Neurons sit on an `nx x ny` grid, stored row-major (`i * ny + j`). The
//! winner for an input is the neuron whose weight vector is closest in
//! Euclidean distance; ties go to the row-major-earlier neuron.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::geometry::ContactState;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SomError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("no data")]
    EmptyData,
    #[error("grid has not been labeled")]
    UnlabeledGrid,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
}

/// Learning-rate and neighborhood-radius schedule. Both decay
/// exponentially from their initial to their final value across epochs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SomSchedule {
    pub epochs: usize,
    pub lr0: f64,
    pub lr_end: f64,
    /// Initial neighborhood radius in grid units.
    pub radius0: f64,
    pub radius_end: f64,
}

/// Radii below this behave as a winner-only update.
const RADIUS_FLOOR: f64 = 1e-3;

impl SomSchedule {
    /// Standard settings for a grid: `lr` 0.5 -> 0.01, radius
    /// `max(nx, ny) / 2` -> 0.5.
    pub fn for_grid(nx: usize, ny: usize, epochs: usize) -> Self {
        Self { epochs, lr0: 0.5, lr_end: 0.01, radius0: nx.max(ny) as f64 / 2.0, radius_end: 0.5 }
    }

    pub fn validate(&self) -> Result<(), SomError> {
        let bad = |m: &str| Err(SomError::InvalidSchedule(m.into()));
        if !(self.lr_end > 0.0 && self.lr0 >= self.lr_end && self.lr0 <= 1.0) {
            return bad("need 1 >= lr0 >= lr_end > 0");
        }
        if !(self.radius_end >= 0.0 && self.radius0 >= self.radius_end && self.radius0.is_finite()) {
            return bad("need radius0 >= radius_end >= 0");
        }
        Ok(())
    }

    fn fraction(&self, epoch: usize) -> f64 {
        if self.epochs <= 1 {
            0.0
        } else {
            epoch as f64 / (self.epochs - 1) as f64
        }
    }

    pub fn learning_rate(&self, epoch: usize) -> f64 {
        self.lr0 * (self.lr_end / self.lr0).powf(self.fraction(epoch))
    }

    pub fn radius(&self, epoch: usize) -> f64 {
        let start = self.radius0.max(RADIUS_FLOOR);
        let end = self.radius_end.max(RADIUS_FLOOR);
        start * (end / start).powf(self.fraction(epoch))
    }
}

/// A rectangular Kohonen map.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SomGrid {
    nx: usize,
    ny: usize,
    d: usize,
    weights: Vec<Vec<f64>>,
    #[serde(serialize_with = "serialize_labels")]
    labels: Option<Vec<ContactState>>,
}

fn serialize_labels<S: serde::Serializer>(labels: &Option<Vec<ContactState>>, s: S) -> Result<S::Ok, S::Error> {
    labels.as_deref().unwrap_or(&[]).serialize(s)
}

#[derive(Deserialize)]
struct RawGrid {
    nx: usize,
    ny: usize,
    d: usize,
    weights: Vec<Vec<f64>>,
    #[serde(default)]
    labels: Vec<ContactState>,
}

impl<'de> Deserialize<'de> for SomGrid {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawGrid::deserialize(d)?;
        let mut grid = SomGrid::new(raw.nx, raw.ny, raw.weights).map_err(serde::de::Error::custom)?;
        if grid.d != raw.d {
            return Err(serde::de::Error::custom(format!("d = {} but weights have dimension {}", raw.d, grid.d)));
        }
        if !raw.labels.is_empty() {
            grid.set_labels(raw.labels).map_err(serde::de::Error::custom)?;
        }
        Ok(grid)
    }
}

/// Per-neuron labeling outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuronLabels {
    pub labels: Vec<ContactState>,
    /// Number of samples each neuron won.
    pub win_counts: Vec<usize>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl SomGrid {
    pub fn new(nx: usize, ny: usize, weights: Vec<Vec<f64>>) -> Result<Self, SomError> {
        if nx == 0 || ny == 0 {
            return Err(SomError::InvalidGrid("grid dimensions must be positive".into()));
        }
        if weights.len() != nx * ny {
            return Err(SomError::InvalidGrid(format!("{} weight vectors for a {nx}x{ny} grid", weights.len())));
        }
        let d = weights[0].len();
        if d == 0 {
            return Err(SomError::InvalidGrid("weight dimension must be positive".into()));
        }
        if let Some(w) = weights.iter().find(|w| w.len() != d) {
            return Err(SomError::DimensionMismatch { expected: d, got: w.len() });
        }
        if weights.iter().flatten().any(|v| !v.is_finite()) {
            return Err(SomError::InvalidGrid("weights must be finite".into()));
        }
        Ok(Self { nx, ny, d, weights, labels: None })
    }

    /// Weights drawn uniformly within the per-dimension range of `data`.
    pub fn random_init(nx: usize, ny: usize, data: &[Vec<f64>], seed: u64) -> Result<Self, SomError> {
        let d = data.first().ok_or(SomError::EmptyData)?.len();
        if let Some(x) = data.iter().find(|x| x.len() != d) {
            return Err(SomError::DimensionMismatch { expected: d, got: x.len() });
        }
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for x in data {
            for (k, v) in x.iter().enumerate() {
                lo[k] = lo[k].min(*v);
                hi[k] = hi[k].max(*v);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights =
            (0..nx * ny).map(|_| (0..d).map(|k| lo[k] + (hi[k] - lo[k]) * rng.gen::<f64>()).collect()).collect();
        Self::new(nx, ny, weights)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn weight(&self, i: usize, j: usize) -> &[f64] {
        &self.weights[i * self.ny + j]
    }

    pub fn labels(&self) -> Option<&[ContactState]> {
        self.labels.as_deref()
    }

    pub fn label(&self, i: usize, j: usize) -> Option<ContactState> {
        self.labels.as_ref().map(|l| l[i * self.ny + j])
    }

    pub fn set_labels(&mut self, labels: Vec<ContactState>) -> Result<(), SomError> {
        if labels.len() != self.weights.len() {
            return Err(SomError::InvalidGrid(format!("{} labels for {} neurons", labels.len(), self.weights.len())));
        }
        self.labels = Some(labels);
        Ok(())
    }

    pub fn position(&self, index: usize) -> (usize, usize) {
        (index / self.ny, index % self.ny)
    }

    fn grid_sq_dist(&self, a: usize, b: usize) -> f64 {
        let (ai, aj) = self.position(a);
        let (bi, bj) = self.position(b);
        let di = ai as f64 - bi as f64;
        let dj = aj as f64 - bj as f64;
        di * di + dj * dj
    }

    fn check(&self, x: &[f64]) -> Result<(), SomError> {
        if x.len() != self.d {
            return Err(SomError::DimensionMismatch { expected: self.d, got: x.len() });
        }
        Ok(())
    }

    fn winner_index(&self, x: &[f64]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (k, w) in self.weights.iter().enumerate() {
            let d = sq_dist(w, x);
            if d < best_d {
                best_d = d;
                best = k;
            }
        }
        best
    }

    /// Grid position `(i, j)` of the best-matching neuron.
    pub fn find_winner(&self, x: &[f64]) -> Result<(usize, usize), SomError> {
        self.check(x)?;
        Ok(self.position(self.winner_index(x)))
    }

    /// Present one sample: every neuron moves toward `x` by
    /// `lr * h * (x - w)` where `h` is a Gaussian over grid distance to the
    /// winner.
    pub fn update(&mut self, x: &[f64], lr: f64, radius: f64) -> Result<(), SomError> {
        self.check(x)?;
        let winner = self.winner_index(x);
        let two_r2 = 2.0 * radius * radius;
        for k in 0..self.weights.len() {
            let h = (-self.grid_sq_dist(k, winner) / two_r2).exp();
            let step = lr * h;
            if step == 0.0 {
                continue;
            }
            for (w, v) in self.weights[k].iter_mut().zip(x) {
                *w += step * (v - *w);
            }
        }
        Ok(())
    }

    /// Train in place. Each epoch presents every sample once, in an order
    /// shuffled by a generator seeded with `seed`.
    pub fn train(&mut self, data: &[Vec<f64>], schedule: &SomSchedule, seed: u64) -> Result<(), SomError> {
        schedule.validate()?;
        if data.is_empty() {
            return Err(SomError::EmptyData);
        }
        for x in data {
            self.check(x)?;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut order: Vec<usize> = (0..data.len()).collect();
        for epoch in 0..schedule.epochs {
            let lr = schedule.learning_rate(epoch);
            let radius = schedule.radius(epoch);
            order.shuffle(&mut rng);
            for &i in &order {
                self.update(&data[i], lr, radius)?;
            }
        }
        self.labels = None;
        Ok(())
    }

    /// Label each neuron with the majority contact state among the samples
    /// it wins (lowest code on ties). Neurons that win nothing take the
    /// label of the nearest winning neuron on the grid (row-major order
    /// breaks distance ties).
    pub fn label_neurons(&mut self, samples: &[(Vec<f64>, ContactState)]) -> Result<NeuronLabels, SomError> {
        if samples.is_empty() {
            return Err(SomError::EmptyData);
        }
        let count = self.weights.len();
        let mut votes = vec![[0usize; 4]; count];
        for (x, label) in samples {
            self.check(x)?;
            votes[self.winner_index(x)][label.code() as usize] += 1;
        }
        let win_counts: Vec<usize> = votes.iter().map(|v| v.iter().sum()).collect();
        let majority: Vec<Option<ContactState>> = votes
            .iter()
            .zip(&win_counts)
            .map(|(v, &total)| {
                (total > 0).then(|| {
                    let code = (1..4).fold(0, |best, c| if v[c] > v[best] { c } else { best });
                    ContactState::ALL[code]
                })
            })
            .collect();
        let labels: Vec<ContactState> = (0..count)
            .map(|k| {
                majority[k].unwrap_or_else(|| {
                    let mut best = None;
                    let mut best_d = f64::INFINITY;
                    for (m, label) in majority.iter().enumerate() {
                        if let Some(label) = label {
                            let d = self.grid_sq_dist(k, m);
                            if d < best_d {
                                best_d = d;
                                best = Some(*label);
                            }
                        }
                    }
                    best.expect("at least one neuron wins a sample")
                })
            })
            .collect();
        self.labels = Some(labels.clone());
        Ok(NeuronLabels { labels, win_counts })
    }

    /// Contact state of the winning neuron.
    pub fn classify(&self, x: &[f64]) -> Result<ContactState, SomError> {
        let labels = self.labels.as_ref().ok_or(SomError::UnlabeledGrid)?;
        self.check(x)?;
        Ok(labels[self.winner_index(x)])
    }
}

pub fn find_winner(grid: &SomGrid, x: &[f64]) -> Result<(usize, usize), SomError> {
    grid.find_winner(x)
}

/// Train a copy of `grid`.
pub fn train_som(grid: &SomGrid, data: &[Vec<f64>], schedule: &SomSchedule, seed: u64) -> Result<SomGrid, SomError> {
    let mut out = grid.clone();
    out.train(data, schedule, seed)?;
    Ok(out)
}

/// Label a copy of `grid`; see [`SomGrid::label_neurons`].
pub fn label_neurons(
    grid: &SomGrid,
    samples: &[(Vec<f64>, ContactState)],
) -> Result<(SomGrid, NeuronLabels), SomError> {
    let mut out = grid.clone();
    let report = out.label_neurons(samples)?;
    Ok((out, report))
}

pub fn som_classify(grid: &SomGrid, x: &[f64]) -> Result<ContactState, SomError> {
    grid.classify(x)
}
