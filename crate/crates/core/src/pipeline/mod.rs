//! Scene generation, feature extraction, datasets, evaluation and window
//! scanning.

mod dataset;
mod eval;
mod features;
mod scan;
mod scene;

use thiserror::Error;

use crate::anfis::AnfisError;
use crate::geometry::GeometryError;
use crate::som::SomError;

pub use dataset::{build_dataset, read_dataset_csv, write_dataset_csv, Dataset, Sample};
pub use eval::{evaluate, ContactClassifier, Evaluation, GeometricOracle, SomOnFeatures};
pub use features::{blocks_from_features, extract_features, gravity_features, FEATURE_DIM, GRAVITY_DIM};
pub use scan::{
    contact_map, random_windows, scan_windows, window_report_csv, Domain, FusedState, Window, WindowReport,
};
pub use scene::{simulate, Frame, PairState, Scene, Series};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("step {step}: blocks {a} and {b} interpenetrate by {depth:e} m")]
    Overlap { step: usize, a: usize, b: usize, depth: f64 },
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("block {block} has {count} vertices; features need quadrilaterals")]
    WrongVertexCount { block: i64, count: usize },
    #[error("expected {expected} features, got {got}")]
    FeatureLength { expected: usize, got: usize },
    #[error("need {needed} samples but the series has {available}")]
    InsufficientData { needed: usize, available: usize },
    #[error("no samples")]
    EmptyData,
    #[error("window {width}x{height} does not fit in the {domain_width}x{domain_height} domain")]
    SizeTooLarge { width: f64, height: f64, domain_width: f64, domain_height: f64 },
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error(transparent)]
    Anfis(#[from] AnfisError),
    #[error(transparent)]
    Som(#[from] SomError),
    #[error("dataset csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for PipelineError {
    fn from(e: csv::Error) -> Self {
        PipelineError::Csv(e.to_string())
    }
}
