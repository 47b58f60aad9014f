//! Takagi-Sugeno-Kang fuzzy inference with Gaussian membership functions.
//!
//! The network evaluates, for an input `x` of dimension `n`:
//!
//! 1. per-input memberships `mu_kj(x_j) = exp(-(x_j - c_kj)^2 / (2 sigma_kj^2))`
//! 2. rule firing strengths `w_k = prod_j mu_kj(x_j)` (product aggregation)
//! 3. linear consequents `f_k(x) = p_k0 + sum_j p_kj x_j`
//! 4. the normalized weighted sum `y = sum_k w_k f_k(x) / sum_k w_k`
//!
//! A [`TskModel`] owns a feature standardization; [`TskModel::infer`] takes
//! raw features and standardizes them before step 1. The rule-level
//! functions operate on already standardized inputs.

mod train;

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::geometry::ContactState;
use crate::scaling::Standardization;

pub use train::{fit_consequents, rmse, train_hybrid, HybridConfig, TrainingReport};

/// Below this total firing strength the normalization in step 4 is
/// replaced by the consequent of the strongest rule.
pub const FIRING_FLOOR: f64 = 1e-300;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnfisError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("membership width must be positive and finite, got {0}")]
    InvalidSigma(f64),
    #[error("membership center must be finite, got {0}")]
    InvalidCenter(f64),
    #[error("rule consequent must have {expected} weights, got {got}")]
    ConsequentLength { expected: usize, got: usize },
    #[error("a model needs at least one rule")]
    NoRules,
    #[error("input dimension must be at least 1")]
    ZeroDimension,
    #[error("training data is empty")]
    EmptyData,
    #[error("{inputs} inputs but {targets} targets")]
    TargetCount { inputs: usize, targets: usize },
    #[error("least-squares system is singular ({rows}x{cols} design matrix has no usable direction)")]
    SingularSystem { rows: usize, cols: usize },
    #[error("non-finite value during {stage}; the learning rate is probably too high")]
    NonFinite { stage: &'static str },
    #[error("training parameter {name} must be {requirement}")]
    InvalidParameter { name: &'static str, requirement: &'static str },
}

/// Two-parameter Gaussian membership function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianMf {
    c: f64,
    sigma: f64,
}

#[derive(Deserialize)]
struct RawMf {
    c: f64,
    sigma: f64,
}

impl<'de> Deserialize<'de> for GaussianMf {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawMf::deserialize(d)?;
        GaussianMf::new(raw.c, raw.sigma).map_err(serde::de::Error::custom)
    }
}

impl GaussianMf {
    pub fn new(c: f64, sigma: f64) -> Result<Self, AnfisError> {
        if !c.is_finite() {
            return Err(AnfisError::InvalidCenter(c));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(AnfisError::InvalidSigma(sigma));
        }
        Ok(Self { c, sigma })
    }

    pub fn center(&self) -> f64 {
        self.c
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.log_eval(x).exp()
    }

    pub fn log_eval(&self, x: f64) -> f64 {
        let d = x - self.c;
        -(d * d) / (2.0 * self.sigma * self.sigma)
    }
}

pub fn mf_eval(mf: &GaussianMf, x: f64) -> f64 {
    mf.eval(x)
}

/// One fuzzy if-then rule with a linear consequent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TskRule {
    #[serde(rename = "mf")]
    antecedents: Vec<GaussianMf>,
    #[serde(rename = "p")]
    consequent: Vec<f64>,
}

#[derive(Deserialize)]
struct RawRule {
    mf: Vec<GaussianMf>,
    p: Vec<f64>,
}

impl<'de> Deserialize<'de> for TskRule {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawRule::deserialize(d)?;
        TskRule::new(raw.mf, raw.p).map_err(serde::de::Error::custom)
    }
}

impl TskRule {
    /// `consequent` holds `p_0, p_1, ..., p_n` with `p_0` the intercept.
    pub fn new(antecedents: Vec<GaussianMf>, consequent: Vec<f64>) -> Result<Self, AnfisError> {
        if antecedents.is_empty() {
            return Err(AnfisError::ZeroDimension);
        }
        if consequent.len() != antecedents.len() + 1 {
            return Err(AnfisError::ConsequentLength { expected: antecedents.len() + 1, got: consequent.len() });
        }
        Ok(Self { antecedents, consequent })
    }

    /// Rule centered at `centers` with a shared width and a zero consequent.
    pub fn centered(centers: &[f64], sigma: f64) -> Result<Self, AnfisError> {
        let mfs = centers.iter().map(|&c| GaussianMf::new(c, sigma)).collect::<Result<Vec<_>, _>>()?;
        let n = mfs.len();
        Self::new(mfs, vec![0.0; n + 1])
    }

    pub fn dim(&self) -> usize {
        self.antecedents.len()
    }

    pub fn antecedents(&self) -> &[GaussianMf] {
        &self.antecedents
    }

    pub fn consequent(&self) -> &[f64] {
        &self.consequent
    }

    pub fn set_consequent(&mut self, p: &[f64]) -> Result<(), AnfisError> {
        if p.len() != self.consequent.len() {
            return Err(AnfisError::ConsequentLength { expected: self.consequent.len(), got: p.len() });
        }
        self.consequent.copy_from_slice(p);
        Ok(())
    }

    pub(crate) fn antecedents_mut(&mut self) -> &mut [GaussianMf] {
        &mut self.antecedents
    }

    fn check(&self, x: &[f64]) -> Result<(), AnfisError> {
        if x.len() != self.dim() {
            return Err(AnfisError::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(())
    }

    pub fn firing_strength(&self, x: &[f64]) -> Result<f64, AnfisError> {
        self.check(x)?;
        Ok(self.antecedents.iter().zip(x).map(|(mf, &v)| mf.eval(v)).product())
    }

    /// Natural log of the firing strength; finite even where the product
    /// underflows.
    pub fn log_firing_strength(&self, x: &[f64]) -> Result<f64, AnfisError> {
        self.check(x)?;
        Ok(self.antecedents.iter().zip(x).map(|(mf, &v)| mf.log_eval(v)).sum())
    }

    pub fn consequent_eval(&self, x: &[f64]) -> Result<f64, AnfisError> {
        self.check(x)?;
        Ok(self.consequent[0] + self.consequent[1..].iter().zip(x).map(|(p, v)| p * v).sum::<f64>())
    }
}

pub fn firing_strength(rule: &TskRule, x: &[f64]) -> Result<f64, AnfisError> {
    rule.firing_strength(x)
}

pub fn consequent_eval(rule: &TskRule, x: &[f64]) -> Result<f64, AnfisError> {
    rule.consequent_eval(x)
}

/// A TSK rule base with its input standardization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TskModel {
    n: usize,
    standardization: Standardization,
    rules: Vec<TskRule>,
}

#[derive(Deserialize)]
struct RawModel {
    n: usize,
    standardization: Standardization,
    rules: Vec<TskRule>,
}

impl<'de> Deserialize<'de> for TskModel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawModel::deserialize(d)?;
        if raw.n != raw.standardization.dim() || raw.n != raw.standardization.stds.len() {
            return Err(serde::de::Error::custom("standardization dimension does not match n"));
        }
        if raw.standardization.stds.iter().any(|s| !(*s > 0.0)) {
            return Err(serde::de::Error::custom("standardization spreads must be positive"));
        }
        TskModel::with_standardization(raw.rules, raw.standardization).map_err(serde::de::Error::custom)
    }
}

/// Firing-strength-weighted evaluation of one input, shared by inference
/// and training.
#[derive(Debug, Clone)]
pub(crate) struct Evaluation {
    /// Normalized firing strengths (sum to one).
    pub weights: Vec<f64>,
    pub consequents: Vec<f64>,
    pub output: f64,
}

impl TskModel {
    /// Model over identity standardization.
    pub fn new(rules: Vec<TskRule>) -> Result<Self, AnfisError> {
        let n = rules.first().ok_or(AnfisError::NoRules)?.dim();
        Self::with_standardization(rules, Standardization::identity(n))
    }

    pub fn with_standardization(rules: Vec<TskRule>, standardization: Standardization) -> Result<Self, AnfisError> {
        let n = rules.first().ok_or(AnfisError::NoRules)?.dim();
        if let Some(bad) = rules.iter().find(|r| r.dim() != n) {
            return Err(AnfisError::DimensionMismatch { expected: n, got: bad.dim() });
        }
        if standardization.dim() != n {
            return Err(AnfisError::DimensionMismatch { expected: n, got: standardization.dim() });
        }
        Ok(Self { n, standardization, rules })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    pub fn rules(&self) -> &[TskRule] {
        &self.rules
    }

    pub(crate) fn rules_mut(&mut self) -> &mut [TskRule] {
        &mut self.rules
    }

    pub fn standardization(&self) -> &Standardization {
        &self.standardization
    }

    pub fn standardize(&self, x: &[f64]) -> Result<Vec<f64>, AnfisError> {
        if x.len() != self.n {
            return Err(AnfisError::DimensionMismatch { expected: self.n, got: x.len() });
        }
        Ok(self.standardization.apply(x))
    }

    pub(crate) fn evaluate(&self, z: &[f64]) -> Result<Evaluation, AnfisError> {
        if z.len() != self.n {
            return Err(AnfisError::DimensionMismatch { expected: self.n, got: z.len() });
        }
        let mut raw = Vec::with_capacity(self.rules.len());
        let mut consequents = Vec::with_capacity(self.rules.len());
        for rule in &self.rules {
            raw.push(rule.firing_strength(z)?);
            consequents.push(rule.consequent_eval(z)?);
        }
        let total: f64 = raw.iter().sum();
        if total < FIRING_FLOOR {
            let mut best = 0;
            let mut best_log = f64::NEG_INFINITY;
            for (k, rule) in self.rules.iter().enumerate() {
                let l = rule.log_firing_strength(z)?;
                if l > best_log {
                    best_log = l;
                    best = k;
                }
            }
            let mut weights = vec![0.0; self.rules.len()];
            weights[best] = 1.0;
            return Ok(Evaluation { output: consequents[best], weights, consequents });
        }
        let numerator: f64 = raw.iter().zip(&consequents).map(|(w, f)| w * f).sum();
        let weights = raw.iter().map(|w| w / total).collect();
        Ok(Evaluation { weights, consequents, output: numerator / total })
    }

    /// Crisp output for standardized input `z`.
    pub fn infer_standardized(&self, z: &[f64]) -> Result<f64, AnfisError> {
        self.evaluate(z).map(|e| e.output)
    }

    /// Crisp output for raw input `x`.
    pub fn infer(&self, x: &[f64]) -> Result<f64, AnfisError> {
        let z = self.standardize(x)?;
        self.infer_standardized(&z)
    }

    /// Crisp output rounded to the nearest contact code and clamped to 0..=3.
    pub fn predict_contact_state(&self, x: &[f64]) -> Result<ContactState, AnfisError> {
        self.infer(x).map(ContactState::from_real)
    }

    /// Output and its partial derivatives with respect to every premise
    /// parameter, at standardized input `z`.
    pub fn premise_gradients(&self, z: &[f64]) -> Result<PremiseGradients, AnfisError> {
        let eval = self.evaluate(z)?;
        let mut d_center = Vec::with_capacity(self.rules.len());
        let mut d_sigma = Vec::with_capacity(self.rules.len());
        for (k, rule) in self.rules.iter().enumerate() {
            // dy/dw_k * w_k = wbar_k (f_k - y)
            let scale = eval.weights[k] * (eval.consequents[k] - eval.output);
            let mut dc = Vec::with_capacity(self.n);
            let mut ds = Vec::with_capacity(self.n);
            for (mf, &v) in rule.antecedents().iter().zip(z) {
                let d = v - mf.c;
                let s2 = mf.sigma * mf.sigma;
                dc.push(scale * d / s2);
                ds.push(scale * d * d / (s2 * mf.sigma));
            }
            d_center.push(dc);
            d_sigma.push(ds);
        }
        Ok(PremiseGradients { output: eval.output, d_center, d_sigma })
    }
}

/// `d_center[k][j]` is dy/dc for input `j` of rule `k`; likewise `d_sigma`.
#[derive(Debug, Clone)]
pub struct PremiseGradients {
    pub output: f64,
    pub d_center: Vec<Vec<f64>>,
    pub d_sigma: Vec<Vec<f64>>,
}

pub fn infer(model: &TskModel, x: &[f64]) -> Result<f64, AnfisError> {
    model.infer(x)
}

pub fn predict_contact_state(model: &TskModel, x: &[f64]) -> Result<ContactState, AnfisError> {
    model.predict_contact_state(x)
}
