//! Labeled samples, train/check splitting and the dataset CSV format.

use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::features::FEATURE_DIM;
use super::PipelineError;
use crate::geometry::ContactState;

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: ContactState,
    pub step: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub train: Vec<Sample>,
    pub check: Vec<Sample>,
}

impl Dataset {
    pub fn inputs(samples: &[Sample]) -> Vec<Vec<f64>> {
        samples.iter().map(|s| s.features.clone()).collect()
    }

    pub fn targets(samples: &[Sample]) -> Vec<f64> {
        samples.iter().map(|s| s.label.code() as f64).collect()
    }
}

/// Draw `n_train + n_check` distinct samples with a seeded shuffle and
/// split them. Every contact state present in `samples` gets at least one
/// representative in the training split (as long as `n_train` allows).
/// Both splits come back ordered by step.
pub fn build_dataset(samples: &[Sample], n_train: usize, n_check: usize, seed: u64) -> Result<Dataset, PipelineError> {
    let needed = n_train + n_check;
    if samples.len() < needed {
        return Err(PipelineError::InsufficientData { needed, available: samples.len() });
    }
    if n_train == 0 {
        return Err(PipelineError::EmptyData);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.shuffle(&mut rng);

    let mut used = vec![false; samples.len()];
    let mut train = Vec::with_capacity(n_train);
    for code in ContactState::ALL {
        if train.len() == n_train {
            break;
        }
        if let Some(&i) = order.iter().find(|&&i| samples[i].label == code) {
            used[i] = true;
            train.push(i);
        }
    }
    let mut rest = order.iter().copied().filter(|&i| !used[i]);
    train.extend(rest.by_ref().take(n_train - train.len()));
    let check: Vec<usize> = rest.take(n_check).collect();

    let collect = |mut idx: Vec<usize>| {
        idx.sort_by_key(|&i| samples[i].step);
        idx.into_iter().map(|i| samples[i].clone()).collect::<Vec<_>>()
    };
    Ok(Dataset { train: collect(train), check: collect(check) })
}

fn header() -> Vec<String> {
    (1..=FEATURE_DIM).map(|k| format!("f{k}")).chain(["label".to_string(), "step".to_string()]).collect()
}

/// Write the training rows followed by the check rows.
pub fn write_dataset_csv<W: Write>(out: W, dataset: &Dataset) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header())?;
    for s in dataset.train.iter().chain(&dataset.check) {
        if s.features.len() != FEATURE_DIM {
            return Err(PipelineError::FeatureLength { expected: FEATURE_DIM, got: s.features.len() });
        }
        let mut row: Vec<String> = s.features.iter().map(|v| v.to_string()).collect();
        row.push(s.label.to_string());
        row.push(s.step.to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| PipelineError::Csv(e.to_string()))?;
    Ok(())
}

/// Read a dataset CSV whose first `n_train` rows are the training split.
pub fn read_dataset_csv<R: Read>(input: R, n_train: usize) -> Result<Dataset, PipelineError> {
    let mut r = csv::Reader::from_reader(input);
    let expected = header();
    let got: Vec<String> = r.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if got != expected {
        return Err(PipelineError::Csv(format!("unexpected header {got:?}")));
    }
    let mut samples = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record?;
        let field = |k: usize| record.get(k).unwrap_or("").trim();
        let bad = |what: &str| PipelineError::Csv(format!("row {}: bad {what}", line + 1));
        let features = (0..FEATURE_DIM)
            .map(|k| field(k).parse::<f64>().map_err(|_| bad(&format!("f{}", k + 1))))
            .collect::<Result<Vec<_>, _>>()?;
        let code: i64 = field(FEATURE_DIM).parse().map_err(|_| bad("label"))?;
        let label = ContactState::from_code(code).map_err(|_| bad("label"))?;
        let step = field(FEATURE_DIM + 1).parse().map_err(|_| bad("step"))?;
        samples.push(Sample { features, label, step });
    }
    if samples.len() < n_train {
        return Err(PipelineError::InsufficientData { needed: n_train, available: samples.len() });
    }
    let check = samples.split_off(n_train);
    Ok(Dataset { train: samples, check })
}
