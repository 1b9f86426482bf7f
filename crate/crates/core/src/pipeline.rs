//! End-to-end orchestration: featurize a manifest, split, train, evaluate,
//! and write every artifact of a run to an output directory.
//!
//! All randomness derives from one root seed. The split uses
//! `derive(root, SPLIT_STREAM)` and the forest `derive(root, FOREST_STREAM)`.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embed::{build_clouds, EmbeddingParams};
use crate::error::{Error, Result};
use crate::features::{features_csv, featurize, FeatureVector, FEATURE_LEN};
use crate::forest::{train_forest, ForestConfig, ForestModel};
use crate::ingest::{
    load_manifest, load_trajectory_samples, split_dataset, DatasetSplit, LabeledTrajectory,
    DEFAULT_SAMPLE_RATE_HZ,
};
use crate::io::{fmt_sig17, write_atomic, write_json};
use crate::persistence::{compute_diagrams, pairwise_distances};
use crate::report::{classification_report, ClassificationReport};
use crate::seed;

pub const FEATURES_FILE: &str = "features.csv";
pub const SPLIT_FILE: &str = "split.json";
pub const MODEL_FILE: &str = "model.json";
pub const TEST_REPORT_FILE: &str = "test_report.json";
pub const VALIDATION_REPORT_FILE: &str = "validation_report.json";
pub const RUN_MANIFEST_FILE: &str = "run_manifest.json";
pub const DIAGRAMS_FILE: &str = "diagrams.json";

/// A tabular feature file: numeric columns plus an optional label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<Option<u8>>,
}

impl FeatureTable {
    pub fn from_vectors(vectors: &[FeatureVector]) -> Self {
        Self {
            columns: (0..FEATURE_LEN).map(|i| format!("f{i}")).collect(),
            rows: vectors.iter().map(|v| v.values.to_vec()).collect(),
            labels: vectors.iter().map(|v| v.label).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Read a CSV whose header names a `label` column; every other column
    /// must be numeric.
    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(file);
        let header = reader
            .headers()
            .map_err(|e| Error::parse(path, 1, e.to_string()))?
            .clone();
        let label_col = header
            .iter()
            .position(|h| h == "label")
            .ok_or_else(|| Error::parse(path, 1, "missing `label` column"))?;
        let columns: Vec<String> = header
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != label_col)
            .map(|(_, h)| h.to_string())
            .collect();
        if columns.is_empty() {
            return Err(Error::parse(path, 1, "no feature columns"));
        }
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| {
                Error::parse(
                    path,
                    e.position().map(|p| p.line()).unwrap_or(0),
                    e.to_string(),
                )
            })?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            let mut row = Vec::with_capacity(columns.len());
            for (i, cell) in record.iter().enumerate() {
                if i == label_col {
                    labels.push(match cell {
                        "" => None,
                        s => {
                            let l: u8 = s.parse().map_err(|_| {
                                Error::parse(path, line, format!("bad label `{s}`"))
                            })?;
                            if l as usize >= crate::NUM_CLASSES {
                                return Err(Error::parse(
                                    path,
                                    line,
                                    format!("label {l} out of range"),
                                ));
                            }
                            Some(l)
                        }
                    });
                } else {
                    let v: f64 = cell.parse().map_err(|_| {
                        Error::parse(
                            path,
                            line,
                            format!(
                                "non-numeric cell `{cell}` in column {}",
                                header.get(i).unwrap_or("?")
                            ),
                        )
                    })?;
                    if !v.is_finite() {
                        return Err(Error::parse(path, line, "non-finite feature value"));
                    }
                    row.push(v);
                }
            }
            rows.push(row);
        }
        Ok(Self {
            columns,
            rows,
            labels,
        })
    }

    fn labeled(&self) -> Result<Vec<u8>> {
        self.labels
            .iter()
            .enumerate()
            .map(|(i, l)| l.ok_or_else(|| Error::InvalidArgument(format!("row {i} has no label"))))
            .collect()
    }

    fn select(&self, idx: &[usize]) -> (Vec<Vec<f64>>, Vec<u8>) {
        let labels = self.labeled().expect("labels checked before selection");
        (
            idx.iter().map(|&i| self.rows[i].clone()).collect(),
            idx.iter().map(|&i| labels[i]).collect(),
        )
    }
}

/// Featurize every trajectory of a manifest. Work fans out across samples;
/// output order is manifest order regardless of scheduling. Errors name the
/// offending trajectory file.
pub fn featurize_manifest(manifest: &Path, params: &EmbeddingParams) -> Result<Vec<FeatureVector>> {
    params.validate()?;
    let entries = load_manifest(manifest).map_err(|e| e.in_stage("ingest"))?;
    entries
        .par_iter()
        .map(|entry| {
            let name = entry.path.display().to_string();
            let sample_err = |e: Error| Error::Sample {
                sample: name.clone(),
                source: Box::new(e),
            };
            let samples = load_trajectory_samples(&entry.path).map_err(|e| e.in_stage("ingest"))?;
            let traj = LabeledTrajectory::new(samples, entry.label, DEFAULT_SAMPLE_RATE_HZ)
                .map_err(|e| sample_err(e).in_stage("ingest"))?;
            featurize(&traj, params).map_err(|e| sample_err(e).in_stage("featurize"))
        })
        .collect()
}

/// Featurize a manifest and write `features.csv` into `out_dir`.
pub fn featurize_only(
    manifest: &Path,
    params: &EmbeddingParams,
    out_dir: &Path,
) -> Result<Vec<FeatureVector>> {
    let vectors = featurize_manifest(manifest, params)?;
    write_atomic(
        &out_dir.join(FEATURES_FILE),
        features_csv(&vectors).as_bytes(),
    )?;
    Ok(vectors)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub seed: u64,
    pub validation_fraction: f64,
    pub test_fraction: f64,
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
}

impl Default for TrainOptions {
    fn default() -> Self {
        let forest = ForestConfig::default();
        Self {
            seed: 0,
            validation_fraction: 0.2,
            test_fraction: 0.2,
            n_trees: forest.n_trees,
            max_depth: forest.max_depth,
            min_samples_split: forest.min_samples_split,
        }
    }
}

impl TrainOptions {
    pub fn split_seed(&self) -> u64 {
        seed::derive(self.seed, seed::SPLIT_STREAM)
    }

    pub fn forest_config(&self) -> ForestConfig {
        ForestConfig {
            n_trees: self.n_trees,
            max_depth: self.max_depth,
            min_samples_split: self.min_samples_split,
            seed: seed::derive(self.seed, seed::FOREST_STREAM),
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub split: DatasetSplit,
    pub model: ForestModel,
    pub test: ClassificationReport,
    pub validation: ClassificationReport,
}

pub fn evaluate(
    model: &ForestModel,
    table: &FeatureTable,
    indices: &[usize],
) -> Result<ClassificationReport> {
    let labels = table.labeled()?;
    let y_true: Vec<u8> = indices.iter().map(|&i| labels[i]).collect();
    let y_pred = indices
        .iter()
        .map(|&i| model.predict(&table.rows[i]))
        .collect::<Result<Vec<_>>>()?;
    classification_report(&y_true, &y_pred)
}

/// Split a labeled table, train on the train partition and evaluate on the
/// test and validation partitions.
pub fn train_on_table(table: &FeatureTable, opts: &TrainOptions) -> Result<TrainOutcome> {
    table.labeled().map_err(|e| e.in_stage("train"))?;
    let split = split_dataset(
        table.len(),
        opts.validation_fraction,
        opts.test_fraction,
        opts.split_seed(),
    )
    .map_err(|e| e.in_stage("split"))?;
    let (x, y) = table.select(&split.train);
    let model = train_forest(&x, &y, &opts.forest_config()).map_err(|e| e.in_stage("train"))?;
    let test = evaluate(&model, table, &split.test).map_err(|e| e.in_stage("evaluate"))?;
    let validation =
        evaluate(&model, table, &split.validation).map_err(|e| e.in_stage("evaluate"))?;
    Ok(TrainOutcome {
        split,
        model,
        test,
        validation,
    })
}

/// Write split, model, both reports and both confusion matrices.
pub fn write_outcome(outcome: &TrainOutcome, out_dir: &Path) -> Result<()> {
    write_json(&out_dir.join(SPLIT_FILE), &outcome.split)?;
    write_atomic(
        &out_dir.join(MODEL_FILE),
        outcome.model.to_json()?.as_bytes(),
    )?;
    write_json(&out_dir.join(TEST_REPORT_FILE), &outcome.test)?;
    write_json(&out_dir.join(VALIDATION_REPORT_FILE), &outcome.validation)?;
    write_atomic(
        &out_dir.join("confusion_test.csv"),
        outcome.test.confusion_csv().as_bytes(),
    )?;
    write_atomic(
        &out_dir.join("confusion_validation.csv"),
        outcome.validation.confusion_csv().as_bytes(),
    )?;
    Ok(())
}

pub fn train_on_features(
    features: &Path,
    opts: &TrainOptions,
    out_dir: &Path,
) -> Result<TrainOutcome> {
    let table = FeatureTable::load(features).map_err(|e| e.in_stage("train"))?;
    let outcome = train_on_table(&table, opts)?;
    write_outcome(&outcome, out_dir)?;
    Ok(outcome)
}

/// Every input needed to reproduce a pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub manifest: PathBuf,
    pub embedding: EmbeddingParams,
    pub train: TrainOptions,
    pub split_seed: u64,
    pub forest: ForestConfig,
}

impl RunManifest {
    pub fn new(manifest: &Path, embedding: EmbeddingParams, train: TrainOptions) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").into(),
            manifest: manifest.to_path_buf(),
            embedding,
            split_seed: train.split_seed(),
            forest: train.forest_config(),
            train,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&crate::io::read_to_string(path)?)?)
    }
}

pub fn run_pipeline(
    manifest: &Path,
    params: &EmbeddingParams,
    opts: &TrainOptions,
    out_dir: &Path,
) -> Result<TrainOutcome> {
    let run = RunManifest::new(manifest, *params, opts.clone());
    write_json(&out_dir.join(RUN_MANIFEST_FILE), &run)?;
    let vectors = featurize_only(manifest, params, out_dir)?;
    let outcome = train_on_table(&FeatureTable::from_vectors(&vectors), opts)?;
    write_outcome(&outcome, out_dir)?;
    Ok(outcome)
}

/// Re-run a pipeline from a previously written run manifest.
pub fn rerun(run_manifest: &Path, out_dir: &Path) -> Result<TrainOutcome> {
    let run = RunManifest::load(run_manifest)?;
    run_pipeline(&run.manifest, &run.embedding, &run.train, out_dir)
}

/// Diagrams of the three clouds of one trajectory, as a JSON object keyed
/// by cloud name. Each entry holds the point count, the diameter and the
/// `h0` and `h1` diagrams.
pub fn diagrams_json(trajectory: &LabeledTrajectory, params: &EmbeddingParams) -> Result<String> {
    let clouds = build_clouds(trajectory, params)?;
    let mut parts = Vec::new();
    for (name, cloud) in clouds.iter() {
        let (d0, d1) = compute_diagrams(cloud)?;
        parts.push(format!(
            "  \"{name}\": {{\"points\": {}, \"diameter\": {}, \"h0\": {}, \"h1\": {}}}",
            cloud.len(),
            fmt_sig17(pairwise_distances(cloud).diameter()),
            d0.to_json(),
            d1.to_json()
        ));
    }
    Ok(format!("{{\n{}\n}}\n", parts.join(",\n")))
}

/// Write `diagrams.json` and one `cloud_<name>.csv` per cloud.
pub fn write_diagrams(
    trajectory: &LabeledTrajectory,
    params: &EmbeddingParams,
    out_dir: &Path,
) -> Result<()> {
    write_atomic(
        &out_dir.join(DIAGRAMS_FILE),
        diagrams_json(trajectory, params)?.as_bytes(),
    )?;
    for (name, cloud) in build_clouds(trajectory, params)?.iter() {
        write_atomic(
            &out_dir.join(format!("cloud_{name}.csv")),
            cloud.to_csv().as_bytes(),
        )?;
    }
    Ok(())
}
