//! Classifier evaluation: accuracy and confusion matrix.

use serde::Serialize;

use super::dataset::Sample;
use super::features::{blocks_from_features, gravity_features};
use super::PipelineError;
use crate::anfis::TskModel;
use crate::geometry::{classify_contact, ContactState, DEFAULT_TOL};
use crate::som::SomGrid;

/// Anything that maps an 18-value pair feature vector to a contact state.
pub trait ContactClassifier {
    fn classify(&self, features: &[f64]) -> Result<ContactState, PipelineError>;
}

impl ContactClassifier for TskModel {
    fn classify(&self, features: &[f64]) -> Result<ContactState, PipelineError> {
        Ok(self.predict_contact_state(features)?)
    }
}

/// A SOM trained on gravity-center features, applied to pair features.
#[derive(Debug, Clone, Copy)]
pub struct SomOnFeatures<'a>(pub &'a SomGrid);

impl ContactClassifier for SomOnFeatures<'_> {
    fn classify(&self, features: &[f64]) -> Result<ContactState, PipelineError> {
        Ok(self.0.classify(&gravity_features(features)?)?)
    }
}

/// The exact geometric classifier, run on blocks rebuilt from features.
#[derive(Debug, Clone, Copy)]
pub struct GeometricOracle {
    pub tol: f64,
}

impl Default for GeometricOracle {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL }
    }
}

impl ContactClassifier for GeometricOracle {
    fn classify(&self, features: &[f64]) -> Result<ContactState, PipelineError> {
        let (a, b) = blocks_from_features(features)?;
        Ok(classify_contact(&a, &b, self.tol)?)
    }
}

impl<F> ContactClassifier for F
where
    F: Fn(&[f64]) -> ContactState,
{
    fn classify(&self, features: &[f64]) -> Result<ContactState, PipelineError> {
        Ok(self(features))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub accuracy: f64,
    pub total: usize,
    /// `confusion[true][predicted]`.
    pub confusion: [[usize; 4]; 4],
}

impl Evaluation {
    pub fn correct(&self) -> usize {
        (0..4).map(|i| self.confusion[i][i]).sum()
    }

    /// True count per class (row sums).
    pub fn support(&self) -> [usize; 4] {
        let mut out = [0; 4];
        for (o, row) in out.iter_mut().zip(&self.confusion) {
            *o = row.iter().sum();
        }
        out
    }
}

pub fn evaluate<C: ContactClassifier + ?Sized>(classifier: &C, data: &[Sample]) -> Result<Evaluation, PipelineError> {
    if data.is_empty() {
        return Err(PipelineError::EmptyData);
    }
    let mut confusion = [[0usize; 4]; 4];
    for s in data {
        let predicted = classifier.classify(&s.features)?;
        confusion[s.label.code() as usize][predicted.code() as usize] += 1;
    }
    let correct: usize = (0..4).map(|i| confusion[i][i]).sum();
    Ok(Evaluation { accuracy: correct as f64 / data.len() as f64, total: data.len(), confusion })
}
