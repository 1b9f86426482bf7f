use std::fs;
use std::path::Path;

use gaze_topo::embed::{EmbeddingParams, PointCloud};
use gaze_topo::ingest::{
    generate_synthetic, generate_synthetic_dataset, write_dataset, LabeledTrajectory,
};
use gaze_topo::persistence::compute_diagrams;
use gaze_topo::pipeline::{
    featurize_only, rerun, run_pipeline, train_on_features, TrainOptions, FEATURES_FILE,
    MODEL_FILE, RUN_MANIFEST_FILE, SPLIT_FILE, TEST_REPORT_FILE, VALIDATION_REPORT_FILE,
};

fn params() -> EmbeddingParams {
    EmbeddingParams {
        dim: 3,
        delay: 4,
        reduction: 10,
        normalize: false,
    }
}

fn opts() -> TrainOptions {
    TrainOptions {
        seed: 5,
        n_trees: 25,
        ..Default::default()
    }
}

fn planar_h1_persistence(t: &LabeledTrajectory) -> Vec<f64> {
    let coords = t.samples().iter().flat_map(|p| *p).collect();
    let cloud = PointCloud::from_flat(2, coords).unwrap();
    let (_, d1) = compute_diagrams(&cloud).unwrap();
    d1.bars.iter().map(|b| b.persistence()).collect()
}

#[test]
fn loop_class_has_dominant_h1_bar() {
    for seed in 0..5 {
        let mut pers = planar_h1_persistence(&generate_synthetic(0, 200, 0.01, seed).unwrap());
        pers.sort_by(f64::total_cmp);
        let median = pers[pers.len() / 2];
        let max = *pers.last().unwrap();
        assert!(
            max > 10.0 * median,
            "seed {seed}: max {max} median {median}"
        );

        let scatter = planar_h1_persistence(&generate_synthetic(3, 200, 0.01, seed).unwrap());
        let scatter_max = scatter.into_iter().fold(0.0, f64::max);
        assert!(scatter_max < max, "seed {seed}: {scatter_max} >= {max}");
    }
}

#[test]
fn featurize_only_shapes_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate_synthetic_dataset(1, 600, 0.01, 1).unwrap();
    let manifest = write_dataset(dir.path(), "t", &data[..3]).unwrap();
    let out = tempfile::tempdir().unwrap();
    featurize_only(&manifest, &params(), out.path()).unwrap();
    let text = fs::read_to_string(out.path().join(FEATURES_FILE)).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines.iter().all(|l| l.split(',').count() == 73));
    assert!(lines[1].ends_with(",0"));

    let body = fs::read_to_string(&manifest).unwrap();
    fs::write(
        &manifest,
        body.replace(",0\n", ",\n")
            .replace(",1\n", ",\n")
            .replace(",2\n", ",\n"),
    )
    .unwrap();
    featurize_only(&manifest, &params(), out.path()).unwrap();
    let text = fs::read_to_string(out.path().join(FEATURES_FILE)).unwrap();
    assert!(text.lines().skip(1).all(|l| l.ends_with(',')));

    let short = LabeledTrajectory::new(vec![[0.1, 0.2]; 30], Some(0), 60.0).unwrap();
    let manifest = write_dataset(dir.path(), "short", &[data[0].clone(), short]).unwrap();
    let err = featurize_only(&manifest, &params(), out.path())
        .unwrap_err()
        .to_string();
    assert!(err.contains("short_0001.csv"), "{err}");
    assert!(err.contains("featurize"), "{err}");
}

fn synthetic_manifest(dir: &Path) -> std::path::PathBuf {
    let data = generate_synthetic_dataset(6, 800, 0.01, 2).unwrap();
    write_dataset(dir, "syn", &data).unwrap()
}

#[test]
fn rerun_reproduces_every_byte() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synthetic_manifest(dir.path());
    let first = tempfile::tempdir().unwrap();
    let outcome = run_pipeline(&manifest, &params(), &opts(), first.path()).unwrap();
    assert!(outcome.split.is_partition_of(24));

    let second = tempfile::tempdir().unwrap();
    rerun(&first.path().join(RUN_MANIFEST_FILE), second.path()).unwrap();
    for file in [
        FEATURES_FILE,
        SPLIT_FILE,
        MODEL_FILE,
        TEST_REPORT_FILE,
        VALIDATION_REPORT_FILE,
        RUN_MANIFEST_FILE,
    ] {
        assert_eq!(
            fs::read(first.path().join(file)).unwrap(),
            fs::read(second.path().join(file)).unwrap(),
            "{file} differs"
        );
    }
}

#[test]
fn training_on_written_features_matches_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synthetic_manifest(dir.path());
    let full = tempfile::tempdir().unwrap();
    let a = run_pipeline(&manifest, &params(), &opts(), full.path()).unwrap();
    let from_csv = tempfile::tempdir().unwrap();
    let b = train_on_features(&full.path().join(FEATURES_FILE), &opts(), from_csv.path()).unwrap();
    assert_eq!(a.model, b.model);
    assert_eq!(a.test, b.test);
    assert_eq!(
        fs::read(full.path().join(MODEL_FILE)).unwrap(),
        fs::read(from_csv.path().join(MODEL_FILE)).unwrap()
    );
}

#[test]
fn separable_toy_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("toy.csv");
    let mut csv = String::from("a,b,label\n");
    for i in 0..80 {
        let c = i % 4;
        let jitter = (i % 7) as f64 * 0.1;
        csv.push_str(&format!(
            "{},{},{c}\n",
            c as f64 * 10.0 + jitter,
            5.0 - c as f64 * 3.0 - jitter
        ));
    }
    fs::write(&path, csv).unwrap();
    let out = tempfile::tempdir().unwrap();
    let outcome = train_on_features(&path, &opts(), out.path()).unwrap();
    assert_eq!(outcome.test.accuracy, 1.0);
    assert_eq!(outcome.validation.accuracy, 1.0);
}
