//! The comparison experiments: a class-ratio sweep over all three
//! classifiers and a tree-count sweep for the forest, evaluated on the
//! held-out events of a corpus.

use std::fs;
use std::path::{Path, PathBuf};

use larseg_core::classifiers::{train_forest, train_logreg, train_stump, ForestModel};
use larseg_core::dataset::downsample_negatives;
use larseg_core::eval::pr_curve;
use larseg_core::{LabeledDataset, Model, PrCurve, SynthConfig, TrainConfig};
use serde::Serialize;

use crate::corpus::{corpus_datasets, generate_corpus, load_corpus, CorpusManifest};
use crate::export::{importance_csv, pr_csv, top_ten_table};
use crate::io::write_atomic;
use crate::Error;

pub const DEFAULT_RATIOS: [u32; 5] = [1, 10, 20, 50, 100];
pub const DEFAULT_TREE_GRID: [usize; 7] = [10, 20, 50, 100, 200, 500, 1000];
pub const DEFAULT_OPERATING_RATIO: u32 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    #[value(alias = "ds")]
    Stump,
    #[value(alias = "lr")]
    Logreg,
    #[value(alias = "rf")]
    Forest,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Stump, ModelKind::Logreg, ModelKind::Forest];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Stump => "stump",
            ModelKind::Logreg => "logreg",
            ModelKind::Forest => "forest",
        }
    }
}

/// Trains one classifier of `kind` on `data`.
pub fn train_model(kind: ModelKind, data: &LabeledDataset, config: &TrainConfig) -> Result<Model, Error> {
    Ok(match kind {
        ModelKind::Stump => Model::Stump(train_stump(&data.features().column(0), data.labels())?),
        ModelKind::Logreg => Model::LogReg(train_logreg(data, config)?),
        ModelKind::Forest => Model::Forest(train_forest(data, config)?),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchmarkConfig {
    /// Seeds the corpus, the negative downsampling and the forest.
    pub seed: u64,
    pub n_events: usize,
    pub synth: SynthConfig,
    /// Class ratios 1:r of the ratio sweep.
    pub ratios: Vec<u32>,
    /// Classifiers trained at every ratio.
    pub models: Vec<ModelKind>,
    /// Forest size used in the ratio sweep.
    pub sweep_trees: usize,
    /// Forest sizes of the tree sweep; empty skips it.
    pub tree_grid: Vec<usize>,
    /// Ratio of the tree sweep and of the importance ranking.
    pub operating_ratio: u32,
    pub train: TrainConfig,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_events: 50,
            synth: SynthConfig::default(),
            ratios: DEFAULT_RATIOS.to_vec(),
            models: ModelKind::ALL.to_vec(),
            sweep_trees: TrainConfig::default().n_trees,
            tree_grid: DEFAULT_TREE_GRID.to_vec(),
            operating_ratio: DEFAULT_OPERATING_RATIO,
            train: TrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub model: ModelKind,
    pub ratio: u32,
    /// Forest size; `None` for the other classifiers.
    pub trees: Option<usize>,
    pub auc_pr: f64,
}

#[derive(Debug, Clone)]
pub struct NamedCurve {
    /// File stem, e.g. `forest_ratio100_trees200`.
    pub name: String,
    pub curve: PrCurve,
}

#[derive(Debug, Clone)]
pub struct BenchmarkReport {
    pub rows: Vec<SummaryRow>,
    pub curves: Vec<NamedCurve>,
    /// Forest at the operating ratio with `sweep_trees` trees, when trained.
    pub forest: Option<ForestModel>,
    pub corpus: CorpusManifest,
    pub train_positives: usize,
    pub train_negatives: usize,
    pub test_positives: usize,
    pub test_negatives: usize,
}

impl BenchmarkReport {
    pub fn auc(&self, model: ModelKind, ratio: u32, trees: Option<usize>) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.model == model && r.ratio == ratio && r.trees == trees)
            .map(|r| r.auc_pr)
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("model,ratio,trees,auc_pr\n");
        for r in &self.rows {
            let trees = r.trees.map(|t| t.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{},{}\n", r.model.name(), r.ratio, trees, r.auc_pr));
        }
        out
    }
}

fn curve_name(model: ModelKind, ratio: u32, trees: Option<usize>) -> String {
    match trees {
        Some(t) => format!("{}_ratio{}_trees{}", model.name(), ratio, t),
        None => format!("{}_ratio{}", model.name(), ratio),
    }
}

/// AUC-PR of forest prefixes: one pass over the trees, recording the vote
/// fraction at every requested size.
fn prefix_curves(
    forest: &ForestModel,
    sizes: &[usize],
    test: &LabeledDataset,
) -> Result<Vec<(usize, PrCurve)>, Error> {
    let mut sizes: Vec<usize> = sizes.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    let rows: Vec<&[f32]> = test.features().rows().collect();
    let mut votes = vec![0u32; rows.len()];
    let mut out = Vec::with_capacity(sizes.len());
    let mut next = sizes.iter().peekable();
    for (t, tree) in forest.trees.iter().enumerate() {
        for (v, row) in votes.iter_mut().zip(&rows) {
            *v += tree.vote(row) as u32;
        }
        while next.peek() == Some(&&(t + 1)) {
            let n = t + 1;
            let scores: Vec<f64> = votes.iter().map(|&v| v as f64 / n as f64).collect();
            out.push((n, pr_curve(&scores, test.labels())?));
            next.next();
        }
    }
    Ok(out)
}

/// Runs the sweeps on `corpus_dir`, or on a fresh synthetic corpus written
/// to `out/corpus` (a temporary location when `out` is `None`). Nothing else
/// is written; see [`write_report`].
pub fn run_benchmark(
    config: &BenchmarkConfig,
    corpus_dir: Option<&Path>,
    out: Option<&Path>,
) -> Result<BenchmarkReport, Error> {
    let (manifest, events) = match corpus_dir {
        Some(dir) => load_corpus(dir)?,
        None => {
            let synth = SynthConfig {
                seed: config.seed,
                ..config.synth.clone()
            };
            let scratch;
            let dir: PathBuf = match out {
                Some(o) => o.join("corpus"),
                None => {
                    scratch = tempfile::tempdir().map_err(|source| Error::Io {
                        path: std::env::temp_dir(),
                        source,
                    })?;
                    scratch.path().to_path_buf()
                }
            };
            generate_corpus(&synth, config.n_events, &dir)?;
            load_corpus(&dir)?
        }
    };
    let (train, test) = corpus_datasets(&manifest, &events)?;
    drop(events);

    let train_config = TrainConfig {
        ratio_seed: config.seed,
        forest_seed: config.seed,
        ..config.train.clone()
    };
    let mut rows = Vec::new();
    let mut curves = Vec::new();

    // one forest at the operating ratio, truncated for the ratio sweep, the
    // tree sweep and the importance ranking
    let wants_forest_sweep = config.models.contains(&ModelKind::Forest)
        && config.ratios.contains(&config.operating_ratio);
    let largest = config
        .tree_grid
        .iter()
        .copied()
        .chain(wants_forest_sweep.then_some(config.sweep_trees))
        .max();
    let operating = match largest {
        Some(n) => {
            let data = downsample_negatives(&train, config.operating_ratio, train_config.ratio_seed)?;
            let cfg = TrainConfig {
                n_trees: n,
                ..train_config.clone()
            };
            Some(train_forest(&data, &cfg)?)
        }
        None => None,
    };

    for &ratio in &config.ratios {
        let data = downsample_negatives(&train, ratio, train_config.ratio_seed)?;
        for &kind in &config.models {
            let (trees, model) = match kind {
                ModelKind::Forest => {
                    let forest = match (&operating, ratio == config.operating_ratio) {
                        (Some(f), true) => f.truncated(config.sweep_trees),
                        _ => train_forest(
                            &data,
                            &TrainConfig {
                                n_trees: config.sweep_trees,
                                ..train_config.clone()
                            },
                        )?,
                    };
                    (Some(config.sweep_trees), Model::Forest(forest))
                }
                other => (None, train_model(other, &data, &train_config)?),
            };
            let scores = model.predict_proba(test.features())?;
            let curve = pr_curve(&scores, test.labels())?;
            rows.push(SummaryRow {
                model: kind,
                ratio,
                trees,
                auc_pr: curve.auc,
            });
            curves.push(NamedCurve {
                name: curve_name(kind, ratio, trees),
                curve,
            });
        }
    }

    if let (Some(forest), false) = (&operating, config.tree_grid.is_empty()) {
        for (n, curve) in prefix_curves(forest, &config.tree_grid, &test)? {
            let ratio = config.operating_ratio;
            if rows.iter().any(|r| r.model == ModelKind::Forest && r.ratio == ratio && r.trees == Some(n)) {
                continue;
            }
            rows.push(SummaryRow {
                model: ModelKind::Forest,
                ratio: config.operating_ratio,
                trees: Some(n),
                auc_pr: curve.auc,
            });
            curves.push(NamedCurve {
                name: curve_name(ModelKind::Forest, config.operating_ratio, Some(n)),
                curve,
            });
        }
    }

    let report = BenchmarkReport {
        rows,
        curves,
        forest: operating.map(|f| f.truncated(config.sweep_trees)),
        corpus: manifest,
        train_positives: train.n_positives(),
        train_negatives: train.n_negatives(),
        test_positives: test.n_positives(),
        test_negatives: test.n_negatives(),
    };
    Ok(report)
}

/// Writes `summary.csv`, `curves/*.csv` and the importance ranking; returns
/// the written paths.
pub fn write_report(report: &BenchmarkReport, out: &Path) -> Result<Vec<PathBuf>, Error> {
    let curve_dir = out.join("curves");
    fs::create_dir_all(&curve_dir).map_err(|source| Error::Io {
        path: curve_dir.clone(),
        source,
    })?;
    let mut written = Vec::new();
    let mut put = |path: PathBuf, text: String| -> Result<(), Error> {
        write_atomic(&path, text.as_bytes())?;
        written.push(path);
        Ok(())
    };
    put(out.join("summary.csv"), report.summary_csv())?;
    let mut seen = std::collections::BTreeSet::new();
    for c in &report.curves {
        if seen.insert(c.name.clone()) {
            put(curve_dir.join(format!("{}.csv", c.name)), pr_csv(&c.curve))?;
        }
    }
    if let Some(forest) = &report.forest {
        put(out.join("importance.csv"), importance_csv(forest))?;
        put(out.join("importance_top10.txt"), top_ten_table(forest))?;
    }
    Ok(written)
}
