//! The `contactlab` command line tool.
//!
//! Every subcommand reads the experiment config (`--config`, else built-in
//! defaults), resolves the seed (`--seed`, then `CONTACTLAB_SEED`, then the
//! config, then 42) and writes its artifacts under `--out`. Outputs are
//! computed in full before anything is written, and each file is written
//! through a temporary sibling and renamed, so a failed run leaves no
//! partial artifacts behind.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::anfis::TskModel;
use crate::experiment::{
    generate, scan, som_labels_csv, trace_csv, train_nfis, train_som, ExperimentConfig, RuleTarget, DEFAULT_SEED,
};
use crate::pipeline::{evaluate, read_dataset_csv, write_dataset_csv, Dataset, GeometricOracle, SomOnFeatures};
use crate::som::SomGrid;

#[derive(Debug, Parser)]
#[command(name = "contactlab", version, about = "Contact-state surrogates for 2D polygonal blocks")]
struct Cli {
    /// Experiment config (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed for dataset splits, SOM initialization and window placement.
    #[arg(long, global = true, env = "CONTACTLAB_SEED", value_name = "INT")]
    seed: Option<u64>,
    /// Artifact directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate the scene and write dataset.csv and trace.csv.
    Gen {
        /// Scene JSON, overriding the config.
        #[arg(long, value_name = "PATH")]
        scene: Option<PathBuf>,
    },
    /// Train a fuzzy model; writes nfis-<rules>.json and its metrics.
    TrainNfis {
        /// Rule count (13, 39, ...) or `auto` for the configured radius.
        #[arg(long)]
        rules: RuleTarget,
        /// Dataset CSV (default: <out>/dataset.csv).
        #[arg(long, value_name = "PATH")]
        dataset: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Train and label the SOM; writes som.json and som-labels.csv.
    TrainSom {
        #[arg(long, value_name = "PATH")]
        dataset: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Print accuracy and confusion matrices as JSON.
    Eval {
        #[arg(long, value_name = "PATH")]
        dataset: Option<PathBuf>,
        /// Fuzzy model(s) to evaluate.
        #[arg(long, value_name = "PATH")]
        nfis: Vec<PathBuf>,
        #[arg(long, value_name = "PATH")]
        som: Option<PathBuf>,
        /// Also evaluate the exact geometric classifier.
        #[arg(long)]
        oracle: bool,
        /// Evaluate on the training split instead of the check split.
        #[arg(long)]
        train: bool,
    },
    /// Fuse SOM and fuzzy predictions over windows of a scene snapshot;
    /// writes scan.csv and contact-map.dat.
    Scan {
        /// Fuzzy model (default: <out>/nfis-13.json).
        #[arg(long, value_name = "PATH")]
        nfis: Option<PathBuf>,
        /// SOM (default: <out>/som.json).
        #[arg(long, value_name = "PATH")]
        som: Option<PathBuf>,
        #[arg(long)]
        windows: Option<usize>,
        /// Snapshot step (default: middle of the run).
        #[arg(long)]
        step: Option<usize>,
    },
}

/// Entry point for the binary; returns the process exit code.
pub fn main() -> i32 {
    match Cli::try_parse() {
        Ok(cli) => match execute(cli) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("error: {e:#}");
                1
            }
        },
        Err(e) => {
            let _ = e.print();
            e.exit_code()
        }
    }
}

/// Parse `args` (program name first) and run the command.
pub fn run<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    execute(Cli::try_parse_from(args)?)
}

struct Session {
    config: ExperimentConfig,
    seed: u64,
    out: PathBuf,
}

impl Session {
    fn dataset_path(&self, given: Option<PathBuf>) -> PathBuf {
        given.unwrap_or_else(|| self.out.join("dataset.csv"))
    }

    fn read_dataset(&self, path: &Path) -> Result<Dataset> {
        let file = fs::File::open(path).with_context(|| format!("opening dataset {}", path.display()))?;
        read_dataset_csv(file, self.config.dataset.train).with_context(|| format!("reading {}", path.display()))
    }
}

fn execute(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let seed = cli.seed.or(config.seed).unwrap_or(DEFAULT_SEED);
    let ctx = Session { config, seed, out: cli.out };
    match cli.command {
        Command::Gen { scene } => cmd_gen(ctx, scene),
        Command::TrainNfis { rules, dataset, epochs } => cmd_train_nfis(ctx, rules, dataset, epochs),
        Command::TrainSom { dataset, epochs } => cmd_train_som(ctx, dataset, epochs),
        Command::Eval { dataset, nfis, som, oracle, train } => cmd_eval(ctx, dataset, nfis, som, oracle, train),
        Command::Scan { nfis, som, windows, step } => cmd_scan(ctx, nfis, som, windows, step),
    }
}

fn cmd_gen(mut ctx: Session, scene: Option<PathBuf>) -> Result<()> {
    if let Some(p) = scene {
        if !p.is_file() {
            bail!("scene file {} not found", p.display());
        }
        ctx.config.scene = Some(p);
    }
    let scene = ctx.config.load_scene()?;
    let generated = generate(&scene, &ctx.config.dataset, ctx.seed)?;
    let mut csv = Vec::new();
    write_dataset_csv(&mut csv, &generated.dataset)?;
    write_all(&ctx.out, &[("dataset.csv", csv), ("trace.csv", trace_csv(&generated.trace).into_bytes())])?;
    println!(
        "wrote {} ({} train, {} check) and trace.csv ({} observations)",
        ctx.out.join("dataset.csv").display(),
        generated.dataset.train.len(),
        generated.dataset.check.len(),
        generated.trace.len()
    );
    Ok(())
}

fn cmd_train_nfis(mut ctx: Session, rules: RuleTarget, dataset: Option<PathBuf>, epochs: Option<usize>) -> Result<()> {
    if let Some(e) = epochs {
        ctx.config.nfis.epochs = e;
    }
    let path = ctx.dataset_path(dataset);
    let data = ctx.read_dataset(&path)?;
    let run = train_nfis(&data, &ctx.config.subclust, &ctx.config.nfis, rules)
        .with_context(|| format!("training the fuzzy model with {rules} rules"))?;
    let stem = format!("nfis-{rules}");
    let (model_name, metrics_name) = (format!("{stem}.json"), format!("{stem}.metrics.json"));
    write_all(
        &ctx.out,
        &[(model_name.as_str(), to_json(&run.model)?), (metrics_name.as_str(), to_json(&run.metrics)?)],
    )?;
    println!(
        "wrote {}: {} rules (radius {:.6}), train rmse {:.6}, check accuracy {:.3}",
        ctx.out.join(format!("{stem}.json")).display(),
        run.metrics.rules,
        run.metrics.radius,
        run.metrics.best_train_rmse,
        run.metrics.check_accuracy
    );
    Ok(())
}

fn cmd_train_som(mut ctx: Session, dataset: Option<PathBuf>, epochs: Option<usize>) -> Result<()> {
    if let Some(e) = epochs {
        ctx.config.som.epochs = e;
    }
    let path = ctx.dataset_path(dataset);
    let data = ctx.read_dataset(&path)?;
    let run = train_som(&data, &ctx.config.som, ctx.seed).context("training the SOM")?;
    write_all(
        &ctx.out,
        &[("som.json", to_json(&run.grid)?), ("som-labels.csv", som_labels_csv(&run.grid, &run.labels).into_bytes())],
    )?;
    println!(
        "wrote {}: {}x{} grid, train accuracy {:.3}",
        ctx.out.join("som.json").display(),
        run.grid.nx(),
        run.grid.ny(),
        run.train.accuracy
    );
    Ok(())
}

#[derive(Serialize)]
struct EvalEntry {
    classifier: String,
    accuracy: f64,
    total: usize,
    confusion: [[usize; 4]; 4],
}

#[derive(Serialize)]
struct EvalOutput {
    split: &'static str,
    results: Vec<EvalEntry>,
}

fn cmd_eval(
    ctx: Session,
    dataset: Option<PathBuf>,
    mut nfis: Vec<PathBuf>,
    mut som: Option<PathBuf>,
    oracle: bool,
    train: bool,
) -> Result<()> {
    let path = ctx.dataset_path(dataset);
    let data = ctx.read_dataset(&path)?;
    if nfis.is_empty() && som.is_none() && !oracle {
        // fall back to whatever the default training commands produced
        for name in ["nfis-13.json", "nfis-39.json", "nfis-auto.json"] {
            let p = ctx.out.join(name);
            if p.is_file() {
                nfis.push(p);
            }
        }
        let p = ctx.out.join("som.json");
        if p.is_file() {
            som = Some(p);
        }
        if nfis.is_empty() && som.is_none() {
            bail!("nothing to evaluate: pass --nfis, --som or --oracle");
        }
    }
    let (split, samples) = if train { ("train", &data.train) } else { ("check", &data.check) };
    let mut results = Vec::new();
    for p in &nfis {
        let model: TskModel = read_json(p)?;
        let e = evaluate(&model, samples)?;
        results.push(EvalEntry {
            classifier: display_name(p),
            accuracy: e.accuracy,
            total: e.total,
            confusion: e.confusion,
        });
    }
    if let Some(p) = &som {
        let grid: SomGrid = read_json(p)?;
        let e = evaluate(&SomOnFeatures(&grid), samples)?;
        results.push(EvalEntry {
            classifier: display_name(p),
            accuracy: e.accuracy,
            total: e.total,
            confusion: e.confusion,
        });
    }
    if oracle {
        let e = evaluate(&GeometricOracle::default(), samples)?;
        results.push(EvalEntry {
            classifier: "oracle".into(),
            accuracy: e.accuracy,
            total: e.total,
            confusion: e.confusion,
        });
    }
    println!("{}", serde_json::to_string_pretty(&EvalOutput { split, results })?);
    Ok(())
}

fn cmd_scan(
    mut ctx: Session,
    nfis: Option<PathBuf>,
    som: Option<PathBuf>,
    windows: Option<usize>,
    step: Option<usize>,
) -> Result<()> {
    if let Some(w) = windows {
        ctx.config.scan.windows = w;
    }
    if step.is_some() {
        ctx.config.scan.step = step;
    }
    let model: TskModel = read_json(&nfis.unwrap_or_else(|| ctx.out.join("nfis-13.json")))?;
    let grid: SomGrid = read_json(&som.unwrap_or_else(|| ctx.out.join("som.json")))?;
    let scene = ctx.config.load_scene()?;
    let result = scan(&scene, &ctx.config.scan, &grid, &model, ctx.seed)?;
    write_all(
        &ctx.out,
        &[("scan.csv", result.reports_csv.into_bytes()), ("contact-map.dat", result.map.into_bytes())],
    )?;
    println!(
        "scanned {} windows at step {}: {} disagreements ({:.1}%); wrote scan.csv and contact-map.dat",
        result.windows,
        result.step,
        result.disagreements,
        100.0 * result.disagreements as f64 / result.windows as f64
    );
    Ok(())
}

fn display_name(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| p.display().to_string())
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s.into_bytes())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Write every file via a temporary sibling and a rename.
fn write_all(dir: &Path, files: &[(&str, Vec<u8>)]) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut staged = Vec::with_capacity(files.len());
    for (name, bytes) in files {
        let tmp = dir.join(format!(".{name}.tmp"));
        if let Err(e) = fs::write(&tmp, bytes) {
            for (t, _) in &staged {
                let _ = fs::remove_file(t);
            }
            let _ = fs::remove_file(&tmp);
            return Err(e).with_context(|| format!("writing {}", tmp.display()));
        }
        staged.push((tmp, dir.join(name)));
    }
    for (tmp, dest) in staged {
        fs::rename(&tmp, &dest).with_context(|| format!("writing {}", dest.display()))?;
    }
    Ok(())
}
