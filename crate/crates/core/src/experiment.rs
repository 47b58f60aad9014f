//! End-to-end experiment steps shared by the command line tool and the
//! examples: scene to dataset, rule-count calibration plus hybrid training,
//! SOM training and labeling, and window scanning.
//!
//! Every step is a pure function of its inputs and a seed, so repeated runs
//! reproduce their artifacts byte for byte.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::anfis::{train_hybrid, AnfisError, HybridConfig, TskModel};
use crate::geometry::ContactState;
use crate::pipeline::{
    build_dataset, contact_map, evaluate, gravity_features, random_windows, scan_windows, simulate, window_report_csv,
    Dataset, Domain, Evaluation, PipelineError, Scene, SomOnFeatures,
};
use crate::scaling::Standardization;
use crate::som::{NeuronLabels, SomError, SomGrid, SomSchedule};
use crate::subclust::{calibrate_radius, rules_from_clusters, subtractive_cluster, SubclustError, SubclustParams};

/// Scene used when a configuration names none: four block pairs that
/// together exhibit every contact state.
pub const DEFAULT_SCENE_JSON: &str = include_str!("../data/default_scene.json");

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Anfis(#[from] AnfisError),
    #[error(transparent)]
    Subclust(#[from] SubclustError),
    #[error(transparent)]
    Som(#[from] SomError),
    #[error("config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub train: usize,
    pub check: usize,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self { train: 100, check: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NfisConfig {
    pub epochs: usize,
    pub lr: f64,
}

impl Default for NfisConfig {
    fn default() -> Self {
        Self { epochs: 30, lr: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SomConfig {
    pub nx: usize,
    pub ny: usize,
    pub epochs: usize,
    pub lr0: f64,
    pub lr_end: f64,
    /// Defaults to half the longer grid side.
    pub radius0: Option<f64>,
    pub radius_end: f64,
}

impl Default for SomConfig {
    fn default() -> Self {
        Self { nx: 3, ny: 3, epochs: 300, lr0: 0.5, lr_end: 0.01, radius0: None, radius_end: 0.5 }
    }
}

impl SomConfig {
    pub fn schedule(&self) -> SomSchedule {
        let mut s = SomSchedule::for_grid(self.nx, self.ny, self.epochs);
        s.lr0 = self.lr0;
        s.lr_end = self.lr_end;
        if let Some(r) = self.radius0 {
            s.radius0 = r;
        }
        s.radius_end = self.radius_end;
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub windows: usize,
    pub width: f64,
    pub height: f64,
    /// Step of the snapshot to scan; defaults to the middle of the run.
    pub step: Option<usize>,
    /// Border added around the scene bounds to form the scan domain.
    pub margin: f64,
    pub map_resolution: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { windows: 20, width: 4.0, height: 4.0, step: None, margin: 1.0, map_resolution: 0.5 }
    }
}

/// Everything an experiment needs besides the seed override.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Scene JSON; relative paths resolve against the config file.
    pub scene: Option<PathBuf>,
    pub seed: Option<u64>,
    pub dataset: DatasetConfig,
    pub subclust: SubclustParams,
    pub nfis: NfisConfig,
    pub som: SomConfig,
    pub scan: ScanConfig,
}

impl ExperimentConfig {
    /// Read a JSON config. Relative scene paths are resolved against the
    /// file's directory and must exist.
    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: Self =
            serde_json::from_str(&text).map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))?;
        if let Some(scene) = &cfg.scene {
            let resolved =
                if scene.is_relative() { path.parent().unwrap_or(Path::new(".")).join(scene) } else { scene.clone() };
            if !resolved.is_file() {
                return Err(ExperimentError::Config(format!("scene file {} not found", resolved.display())));
            }
            cfg.scene = Some(resolved);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::Config(m.into()));
        if self.dataset.train == 0 {
            return bad("dataset.train must be positive");
        }
        self.subclust.validate()?;
        if !(self.nfis.lr > 0.0 && self.nfis.lr.is_finite()) {
            return bad("nfis.lr must be positive");
        }
        if self.som.nx == 0 || self.som.ny == 0 {
            return bad("som grid sides must be positive");
        }
        self.som.schedule().validate()?;
        if !(self.scan.width > 0.0 && self.scan.height > 0.0) {
            return bad("scan window sides must be positive");
        }
        if !(self.scan.margin >= 0.0) {
            return bad("scan.margin must be non-negative");
        }
        Ok(())
    }

    pub fn load_scene(&self) -> Result<Scene, ExperimentError> {
        let (text, origin) = match &self.scene {
            Some(p) => (
                std::fs::read_to_string(p).map_err(|e| ExperimentError::Config(format!("{}: {e}", p.display())))?,
                p.display().to_string(),
            ),
            None => (DEFAULT_SCENE_JSON.to_string(), "built-in scene".to_string()),
        };
        let scene: Scene =
            serde_json::from_str(&text).map_err(|e| ExperimentError::Config(format!("{origin}: {e}")))?;
        scene.validate()?;
        Ok(scene)
    }
}

/// Simulated scene plus the dataset drawn from it.
#[derive(Debug, Clone)]
pub struct Generated {
    pub dataset: Dataset,
    /// `(step, t, state)` for every observation, pairs unrolled in order.
    pub trace: Vec<(usize, f64, ContactState)>,
}

pub fn generate(scene: &Scene, dataset: &DatasetConfig, seed: u64) -> Result<Generated, ExperimentError> {
    let series = simulate(scene)?;
    let samples = series.samples()?;
    let dataset = build_dataset(&samples, dataset.train, dataset.check, seed)?;
    Ok(Generated { dataset, trace: series.trace() })
}

pub fn trace_csv(trace: &[(usize, f64, ContactState)]) -> String {
    let mut out = String::from("step,t,state\n");
    for (step, t, s) in trace {
        out.push_str(&format!("{step},{t},{s}\n"));
    }
    out
}

/// How many rules the fuzzy model should get.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleTarget {
    /// Search the cluster radius until clustering gives exactly this many.
    Count(usize),
    /// Use whatever the configured radius gives.
    Auto,
}

impl std::str::FromStr for RuleTarget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(RuleTarget::Auto);
        }
        match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(RuleTarget::Count(n)),
            _ => Err(format!("expected a positive rule count or `auto`, got `{s}`")),
        }
    }
}

impl std::fmt::Display for RuleTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RuleTarget::Count(n) => write!(f, "{n}"),
            RuleTarget::Auto => f.write_str("auto"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NfisMetrics {
    pub rules: usize,
    pub radius: f64,
    /// False when the radius search had to drop low-potential centers.
    pub exact_calibration: bool,
    /// Training RMSE after each least-squares pass.
    pub train_rmse_trace: Vec<f64>,
    pub best_train_rmse: f64,
    pub train_accuracy: f64,
    pub check_accuracy: f64,
    /// `confusion[true][predicted]` on the check split.
    pub confusion: [[usize; 4]; 4],
}

#[derive(Debug, Clone)]
pub struct NfisRun {
    pub model: TskModel,
    pub metrics: NfisMetrics,
}

/// Cluster the standardized training inputs, build the initial rule base
/// and refine it with hybrid training.
pub fn train_nfis(
    dataset: &Dataset,
    params: &SubclustParams,
    nfis: &NfisConfig,
    target: RuleTarget,
) -> Result<NfisRun, ExperimentError> {
    let inputs = Dataset::inputs(&dataset.train);
    let targets = Dataset::targets(&dataset.train);
    if inputs.is_empty() {
        return Err(PipelineError::EmptyData.into());
    }
    let standardization = Standardization::fit(&inputs);
    let z = standardization.apply_all(&inputs);
    let (radius, centers, exact) = match target {
        RuleTarget::Count(n) => {
            let cal = calibrate_radius(&z, params, n)?;
            (cal.radius, cal.centers, cal.exact)
        }
        RuleTarget::Auto => (params.radius, subtractive_cluster(&z, params)?, true),
    };
    let centers: Vec<Vec<f64>> = centers.into_iter().map(|c| c.center).collect();
    let initial = rules_from_clusters(&centers, radius, standardization, &inputs, &targets)?;
    let report = train_hybrid(&initial, &inputs, &targets, HybridConfig { epochs: nfis.epochs, lr: nfis.lr })?;
    let model = report.model;
    let train_eval = evaluate(&model, &dataset.train)?;
    let check_eval = if dataset.check.is_empty() { train_eval.clone() } else { evaluate(&model, &dataset.check)? };
    let metrics = NfisMetrics {
        rules: model.rule_count(),
        radius,
        exact_calibration: exact,
        train_rmse_trace: report.lse_rmse,
        best_train_rmse: report.best_rmse,
        train_accuracy: train_eval.accuracy,
        check_accuracy: check_eval.accuracy,
        confusion: check_eval.confusion,
    };
    Ok(NfisRun { model, metrics })
}

#[derive(Debug, Clone)]
pub struct SomRun {
    pub grid: SomGrid,
    pub labels: NeuronLabels,
    pub train: Evaluation,
}

/// Train a SOM on the gravity-center features of the training split and
/// label its neurons by majority vote.
pub fn train_som(dataset: &Dataset, config: &SomConfig, seed: u64) -> Result<SomRun, ExperimentError> {
    let samples = dataset
        .train
        .iter()
        .map(|s| Ok((gravity_features(&s.features)?, s.label)))
        .collect::<Result<Vec<_>, PipelineError>>()?;
    let data: Vec<Vec<f64>> = samples.iter().map(|(x, _)| x.clone()).collect();
    let mut grid = SomGrid::random_init(config.nx, config.ny, &data, seed)?;
    grid.train(&data, &config.schedule(), seed.wrapping_add(1))?;
    let labels = grid.label_neurons(&samples)?;
    let train = evaluate(&SomOnFeatures(&grid), &dataset.train)?;
    Ok(SomRun { grid, labels, train })
}

/// Neuron table: `i,j,label,win_count`, row-major.
pub fn som_labels_csv(grid: &SomGrid, labels: &NeuronLabels) -> String {
    let mut out = String::from("i,j,label,win_count\n");
    for (k, (label, wins)) in labels.labels.iter().zip(&labels.win_counts).enumerate() {
        let (i, j) = grid.position(k);
        out.push_str(&format!("{i},{j},{label},{wins}\n"));
    }
    out
}

#[derive(Debug, Clone)]
pub struct ScanOutput {
    pub step: usize,
    /// Window report CSV.
    pub reports_csv: String,
    /// Gnuplot contact map.
    pub map: String,
    pub windows: usize,
    pub disagreements: usize,
}

/// Scan random windows and a regular map over one scene snapshot.
pub fn scan(
    scene: &Scene,
    config: &ScanConfig,
    som: &SomGrid,
    nfis: &TskModel,
    seed: u64,
) -> Result<ScanOutput, ExperimentError> {
    let step = config.step.unwrap_or(scene.steps / 2);
    if step > scene.steps {
        return Err(ExperimentError::Config(format!("scan step {step} is past the last step {}", scene.steps)));
    }
    let blocks = scene.blocks_at(step);
    let domain = Domain::around(&blocks, config.margin)?;
    let windows = random_windows(&domain, config.windows, config.width, config.height, seed)?;
    let reports = scan_windows(&windows, &blocks, som, nfis)?;
    let map = contact_map(&domain, config.map_resolution, config.width, config.height, &blocks, som, nfis)?;
    Ok(ScanOutput {
        step,
        reports_csv: window_report_csv(&reports),
        map,
        windows: reports.len(),
        disagreements: reports.iter().filter(|r| r.fused.disagrees()).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_scene_parses_and_covers_all_states() {
        let scene = ExperimentConfig::default().load_scene().unwrap();
        let series = simulate(&scene).unwrap();
        let samples = series.samples().unwrap();
        assert!(samples.len() >= 150);
        for code in ContactState::ALL {
            assert!(samples.iter().any(|s| s.label == code), "missing {code}");
        }
    }

    #[test]
    fn rule_target_parsing() {
        assert_eq!("13".parse::<RuleTarget>().unwrap(), RuleTarget::Count(13));
        assert_eq!("auto".parse::<RuleTarget>().unwrap(), RuleTarget::Auto);
        assert!("0".parse::<RuleTarget>().is_err());
        assert!("x".parse::<RuleTarget>().is_err());
    }

    #[test]
    fn config_rejects_unknown_fields() {
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"bogus": 1}"#).is_err());
        let cfg: ExperimentConfig = serde_json::from_str(r#"{"seed": 7, "som": {"epochs": 10}}"#).unwrap();
        assert_eq!(cfg.seed, Some(7));
        assert_eq!(cfg.som.epochs, 10);
        assert_eq!(cfg.som.nx, 3);
    }

    #[test]
    fn shipped_config_matches_defaults() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/default_config.json");
        let cfg = ExperimentConfig::load(&path).unwrap();
        assert_eq!(cfg.load_scene().unwrap(), ExperimentConfig::default().load_scene().unwrap());
        let defaults = ExperimentConfig::default();
        assert_eq!(cfg.seed, Some(DEFAULT_SEED));
        assert_eq!((&cfg.dataset, &cfg.subclust, &cfg.nfis), (&defaults.dataset, &defaults.subclust, &defaults.nfis));
        assert_eq!(cfg.som.schedule(), defaults.som.schedule());
        assert_eq!(cfg.scan.step, Some(20));
    }
}
