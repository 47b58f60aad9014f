//! Per-feature standardization shared by clustering and inference.

use serde::{Deserialize, Serialize};

/// Spreads below this are treated as constant features and left unscaled.
const MIN_STD: f64 = 1e-12;

/// Zero-mean, unit-variance transform fitted on a training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Standardization {
    pub fn identity(n: usize) -> Self {
        Self { means: vec![0.0; n], stds: vec![1.0; n] }
    }

    /// Fit on `rows` (population variance). Constant columns get a unit
    /// spread so they map to zero instead of dividing by zero.
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let Some(first) = rows.first() else {
            return Self::identity(0);
        };
        let n = first.len();
        let count = rows.len() as f64;
        let mut means = vec![0.0; n];
        for row in rows {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= count);
        let mut stds = vec![0.0; n];
        for row in rows {
            for ((s, v), m) in stds.iter_mut().zip(row).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        for s in &mut stds {
            *s = (*s / count).sqrt();
            if !(*s > MIN_STD) {
                *s = 1.0;
            }
        }
        Self { means, stds }
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(self.means.iter().zip(&self.stds)).map(|(v, (m, s))| (v - m) / s).collect()
    }

    pub fn apply_all(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.apply(r)).collect()
    }

    pub fn invert(&self, z: &[f64]) -> Vec<f64> {
        z.iter().zip(self.means.iter().zip(&self.stds)).map(|(v, (m, s))| v * s + m).collect()
    }
}
