//! The `larseg` command line.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use larseg_core::eval::{precision_recall, pr_curve, response_map, threshold_mask, ConfusionCounts};
use larseg_core::image::resize_bilinear;
use larseg_core::{LabeledDataset, Model, SynthConfig, TrainConfig};
use serde::Serialize;
use serde_json::{json, Value};

use crate::benchmark::{
    run_benchmark, train_model, write_report, BenchmarkConfig, ModelKind, DEFAULT_OPERATING_RATIO,
    DEFAULT_RATIOS, DEFAULT_TREE_GRID,
};
use crate::corpus::{corpus_datasets, generate_corpus, image_files, load_corpus};
use crate::dataset_io::{load_dataset, save_dataset, DatasetFormat};
use crate::export::{importance_csv, pr_csv, save_png16, top_ten_table};
use crate::io::{load_image, save_image, save_mask, write_atomic};
use crate::model_io::{load_model, save_model};
use crate::run::RunRecorder;
use crate::service;
use crate::Error;

#[derive(Debug, Parser)]
#[command(name = "larseg", version, about = "Pixel-wise track/noise segmentation of event images")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic labeled corpus.
    Synth(SynthArgs),
    /// Write train/test descriptor datasets of a corpus.
    Extract(ExtractArgs),
    /// Train a classifier.
    Train(TrainArgs),
    /// Write response maps and thresholded masks for event images.
    Predict(PredictArgs),
    /// Precision-recall evaluation of a model on labeled data.
    Eval(EvalArgs),
    /// Rank the features of a forest model.
    Importance(ImportanceArgs),
    /// Serve the labeling API and UI for a directory of events.
    Serve(ServeArgs),
    /// Run the class-ratio and tree-count sweeps.
    Benchmark(BenchmarkArgs),
    /// Resample an event image.
    Resize(ResizeArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 50)]
    pub events: usize,
    #[arg(long, default_value_t = 64)]
    pub width: usize,
    #[arg(long, default_value_t = 64)]
    pub height: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FileFormat {
    Csv,
    Binary,
}

impl FileFormat {
    fn extension(self) -> &'static str {
        match self {
            FileFormat::Csv => "csv",
            FileFormat::Binary => "lards",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct ExtractArgs {
    /// Corpus directory.
    #[arg(long)]
    pub dir: PathBuf,
    /// Output directory for `train.<ext>` and `test.<ext>`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = FileFormat::Csv)]
    pub format: FileFormat,
}

/// Labeled samples from a dataset file or from one split of a corpus.
#[derive(Debug, Args, Serialize)]
pub struct DataSource {
    /// Corpus directory.
    #[arg(long, conflicts_with = "data", required_unless_present = "data")]
    pub dir: Option<PathBuf>,
    /// Dataset file (`.csv` or binary).
    #[arg(long)]
    pub data: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[command(flatten)]
    pub source: DataSource,
    #[arg(long, value_enum, default_value_t = ModelKind::Forest)]
    pub model: ModelKind,
    #[arg(long, default_value_t = 100)]
    pub trees: usize,
    /// Negatives kept per positive.
    #[arg(long, default_value_t = DEFAULT_OPERATING_RATIO)]
    pub ratio: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Model file to write.
    #[arg(long, default_value = "model.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct PredictArgs {
    #[arg(long)]
    pub model_file: PathBuf,
    /// A `.larimg` file or a directory of them.
    #[arg(long)]
    pub dir: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub model_file: PathBuf,
    #[command(flatten)]
    pub source: DataSource,
    /// Also report precision and recall at this threshold.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Directory for `pr_curve.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ImportanceArgs {
    #[arg(long)]
    pub model_file: PathBuf,
    /// Directory for `importance.csv` and `importance_top10.txt`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ServeArgs {
    #[arg(long)]
    pub dir: PathBuf,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
}

#[derive(Debug, Args, Serialize)]
pub struct BenchmarkArgs {
    /// Existing corpus; a synthetic one is generated when absent.
    #[arg(long)]
    pub dir: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 50)]
    pub events: usize,
    /// Forest size in the ratio sweep.
    #[arg(long, default_value_t = 100)]
    pub trees: usize,
    /// Operating ratio of the tree sweep and the importance ranking.
    #[arg(long, default_value_t = DEFAULT_OPERATING_RATIO)]
    pub ratio: u32,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_RATIOS)]
    pub ratios: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_TREE_GRID)]
    pub tree_grid: Vec<usize>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = ModelKind::ALL)]
    pub models: Vec<ModelKind>,
    #[arg(long, default_value_t = 64)]
    pub width: usize,
    #[arg(long, default_value_t = 64)]
    pub height: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct ResizeArgs {
    /// Source `.larimg` file.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub width: usize,
    #[arg(long)]
    pub height: usize,
}

fn config_of<T: Serialize>(args: &T) -> Value {
    serde_json::to_value(args).expect("arguments serialize")
}

/// `<file><suffix>` next to `path`.
fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

fn create_dir(path: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn print_line(value: Value) {
    println!("{value}");
}

fn load_source(source: &DataSource, split: Split) -> Result<LabeledDataset, Error> {
    match (&source.data, &source.dir) {
        (Some(file), _) => Ok(load_dataset(file)?),
        (None, Some(dir)) => {
            let (manifest, events) = load_corpus(dir)?;
            let (train, test) = corpus_datasets(&manifest, &events)?;
            Ok(match split {
                Split::Train => train,
                Split::Test => test,
            })
        }
        (None, None) => Err(Error::Usage("either --dir or --data is required".into())),
    }
}

fn source_path(source: &DataSource) -> &Path {
    source.data.as_deref().or(source.dir.as_deref()).unwrap_or(Path::new(""))
}

#[derive(Clone, Copy)]
enum Split {
    Train,
    Test,
}

pub fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Synth(a) => synth(a),
        Command::Extract(a) => extract(a),
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::Eval(a) => eval(a),
        Command::Importance(a) => importance(a),
        Command::Serve(a) => serve(a),
        Command::Benchmark(a) => benchmark(a),
        Command::Resize(a) => resize(a),
    }
}

fn synth(a: SynthArgs) -> Result<(), Error> {
    let mut rec = RunRecorder::start("synth", config_of(&a));
    rec.seed(a.seed);
    let config = SynthConfig {
        width: a.width,
        height: a.height,
        seed: a.seed,
        ..SynthConfig::default()
    };
    let manifest = generate_corpus(&config, a.events, &a.out)?;
    for e in &manifest.events {
        rec.output(&a.out.join(&e.image))?;
        rec.output(&a.out.join(&e.mask))?;
    }
    rec.output(&a.out.join(crate::corpus::MANIFEST_FILE))?;
    rec.finish(&a.out.join("run.json"))?;
    print_line(json!({
        "events": manifest.events.len(),
        "track_pixels": manifest.track_pixels,
        "noise_pixels": manifest.noise_pixels,
        "negatives_per_positive": manifest.negatives_per_positive,
    }));
    Ok(())
}

fn extract(a: ExtractArgs) -> Result<(), Error> {
    let mut rec = RunRecorder::start("extract", config_of(&a));
    rec.input(&a.dir);
    let (manifest, events) = load_corpus(&a.dir)?;
    let (train, test) = corpus_datasets(&manifest, &events)?;
    create_dir(&a.out)?;
    let format = match a.format {
        FileFormat::Csv => DatasetFormat::Csv,
        FileFormat::Binary => DatasetFormat::Binary,
    };
    for (name, data) in [("train", &train), ("test", &test)] {
        let path = a.out.join(format!("{name}.{}", a.format.extension()));
        save_dataset(data, &path, format)?;
        rec.output(&path)?;
    }
    rec.finish(&a.out.join("run.json"))?;
    print_line(json!({
        "train_samples": train.n_samples(),
        "test_samples": test.n_samples(),
    }));
    Ok(())
}

fn train(a: TrainArgs) -> Result<(), Error> {
    let mut rec = RunRecorder::start("train", config_of(&a));
    rec.seed(a.seed);
    rec.input(source_path(&a.source));
    let data = load_source(&a.source, Split::Train)?;
    let config = TrainConfig {
        n_trees: a.trees,
        ratio_seed: a.seed,
        forest_seed: a.seed,
        ..TrainConfig::default()
    };
    let data = larseg_core::dataset::downsample_negatives(&data, a.ratio, config.ratio_seed)?;
    let model = train_model(a.model, &data, &config)?;
    save_model(&model, &a.out)?;
    rec.output(&a.out)?;
    rec.finish(&sidecar(&a.out, ".run.json"))?;
    print_line(json!({
        "model": a.model.name(),
        "samples": data.n_samples(),
        "positives": data.n_positives(),
        "negatives": data.n_negatives(),
        "out": a.out,
    }));
    Ok(())
}

fn predict(a: PredictArgs) -> Result<(), Error> {
    let mut rec = RunRecorder::start("predict", config_of(&a));
    rec.input(&a.model_file);
    let model = load_model(&a.model_file)?;
    let inputs: Vec<PathBuf> = if a.dir.is_dir() {
        image_files(&a.dir)?.into_iter().map(|n| a.dir.join(n)).collect()
    } else {
        vec![a.dir.clone()]
    };
    create_dir(&a.out)?;
    for input in &inputs {
        rec.input(input);
        let image = load_image(input)?;
        let map = response_map(&model, &image)?;
        let stem = input.file_stem().unwrap_or_default().to_string_lossy();
        let png = a.out.join(format!("{stem}.response.png"));
        save_png16(&map, Some((0.0, 1.0)), &png)?;
        let mask = a.out.join(format!("{stem}.pred.larmsk"));
        save_mask(&threshold_mask(&map, a.threshold), &mask)?;
        rec.output(&png)?;
        rec.output(&mask)?;
    }
    rec.finish(&a.out.join("run.json"))?;
    print_line(json!({ "images": inputs.len() }));
    Ok(())
}

fn scores_of(model: &Model, data: &LabeledDataset) -> Result<Vec<f64>, Error> {
    Ok(model.predict_proba(data.features())?)
}

fn eval(a: EvalArgs) -> Result<(), Error> {
    let mut rec = RunRecorder::start("eval", config_of(&a));
    rec.input(&a.model_file);
    rec.input(source_path(&a.source));
    let model = load_model(&a.model_file)?;
    let data = load_source(&a.source, Split::Test)?;
    let scores = scores_of(&model, &data)?;
    let curve = pr_curve(&scores, data.labels())?;
    let mut summary = json!({
        "model": model.kind(),
        "auc_pr": curve.auc,
        "positives": curve.positives,
        "negatives": curve.negatives,
    });
    if let Some(t) = a.threshold {
        let counts = ConfusionCounts::at_threshold(&scores, data.labels(), t);
        let pr = precision_recall(&counts);
        summary["threshold"] = json!(t);
        summary["precision"] = json!(pr.precision);
        summary["recall"] = json!(pr.recall);
    }
    match &a.out {
        Some(out) => {
            create_dir(out)?;
            let path = out.join("pr_curve.csv");
            write_atomic(&path, pr_csv(&curve).as_bytes())?;
            rec.output(&path)?;
            rec.finish(&out.join("run.json"))?;
        }
        None => {
            rec.finish(&sidecar(&a.model_file, ".eval.run.json"))?;
        }
    }
    print_line(summary);
    Ok(())
}

fn importance(a: ImportanceArgs) -> Result<(), Error> {
    let mut rec = RunRecorder::start("importance", config_of(&a));
    rec.input(&a.model_file);
    let forest = match load_model(&a.model_file)? {
        Model::Forest(f) => f,
        other => {
            return Err(Error::Usage(format!(
                "feature importance needs a forest model, got {}",
                other.kind()
            )))
        }
    };
    create_dir(&a.out)?;
    let table = top_ten_table(&forest);
    for (name, text) in [
        ("importance.csv", importance_csv(&forest)),
        ("importance_top10.txt", table.clone()),
    ] {
        let path = a.out.join(name);
        write_atomic(&path, text.as_bytes())?;
        rec.output(&path)?;
    }
    rec.finish(&a.out.join("run.json"))?;
    print!("{table}");
    Ok(())
}

fn serve(a: ServeArgs) -> Result<(), Error> {
    if !a.dir.is_dir() {
        return Err(Error::Usage(format!("{} is not a directory", a.dir.display())));
    }
    let mut rec = RunRecorder::start("serve", config_of(&a));
    rec.input(&a.dir);
    rec.finish(&a.dir.join("serve.run.json"))?;
    let runtime = tokio::runtime::Runtime::new().map_err(|source| Error::Io {
        path: a.dir.clone(),
        source,
    })?;
    eprintln!("serving {} on http://127.0.0.1:{}/", a.dir.display(), a.port);
    runtime
        .block_on(service::serve(a.dir.clone(), a.port))
        .map_err(|source| Error::Io { path: a.dir, source })
}

fn benchmark(a: BenchmarkArgs) -> Result<(), Error> {
    let mut rec = RunRecorder::start("benchmark", config_of(&a));
    rec.seed(a.seed);
    if let Some(dir) = &a.dir {
        rec.input(dir);
    }
    let config = BenchmarkConfig {
        seed: a.seed,
        n_events: a.events,
        synth: SynthConfig {
            width: a.width,
            height: a.height,
            ..SynthConfig::default()
        },
        ratios: a.ratios.clone(),
        models: a.models.clone(),
        sweep_trees: a.trees,
        tree_grid: a.tree_grid.clone(),
        operating_ratio: a.ratio,
        train: TrainConfig::default(),
    };
    create_dir(&a.out)?;
    let report = run_benchmark(&config, a.dir.as_deref(), Some(&a.out))?;
    for path in write_report(&report, &a.out)? {
        rec.output(&path)?;
    }
    rec.finish(&a.out.join("run.json"))?;
    print!("{}", report.summary_csv());
    Ok(())
}

fn resize(a: ResizeArgs) -> Result<(), Error> {
    let mut rec = RunRecorder::start("resize", config_of(&a));
    rec.input(&a.input);
    let image = load_image(&a.input)?;
    let resized = resize_bilinear(&image, a.width, a.height)?;
    save_image(&resized, &a.out)?;
    rec.output(&a.out)?;
    rec.finish(&sidecar(&a.out, ".run.json"))?;
    print_line(json!({ "width": a.width, "height": a.height, "out": a.out }));
    Ok(())
}
