//! Trajectory datasets: CSV loading, deterministic splits and synthetic
//! trajectory classes.
//!
//! A dataset is described by a manifest CSV with header `path,label`, one
//! row per trajectory. Paths are resolved relative to the manifest's
//! directory. Each trajectory file has header `t,x,y` with rows in temporal
//! order.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{seed, NUM_CLASSES};

/// Nominal eye-tracker sampling rate.
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 60.0;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledTrajectory {
    samples: Vec<[f64; 2]>,
    label: Option<u8>,
    sample_rate_hz: f64,
}

impl LabeledTrajectory {
    pub fn new(samples: Vec<[f64; 2]>, label: Option<u8>, sample_rate_hz: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("trajectory has no samples".into()));
        }
        if let Some(i) = samples
            .iter()
            .position(|s| !s[0].is_finite() || !s[1].is_finite())
        {
            return Err(Error::InvalidArgument(format!(
                "non-finite coordinate at sample {i}"
            )));
        }
        check_label(label)?;
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        Ok(Self {
            samples,
            label,
            sample_rate_hz,
        })
    }

    pub fn samples(&self) -> &[[f64; 2]] {
        &self.samples
    }

    pub fn label(&self) -> Option<u8> {
        self.label
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn xs(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s[0]).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s[1]).collect()
    }
}

fn check_label(label: Option<u8>) -> Result<()> {
    match label {
        Some(l) if l as usize >= NUM_CLASSES => Err(Error::InvalidArgument(format!(
            "label {l} outside 0..{NUM_CLASSES}"
        ))),
        _ => Ok(()),
    }
}

/// One manifest row with its path already resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub label: Option<u8>,
}

fn csv_line(pos: Option<&csv::Position>) -> u64 {
    pos.map(|p| p.line()).unwrap_or(0)
}

fn open_csv(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn expect_header(
    reader: &mut csv::Reader<std::fs::File>,
    path: &Path,
    expected: &[&str],
) -> Result<()> {
    let header = reader
        .headers()
        .map_err(|e| Error::parse(path, 1, e.to_string()))?;
    let got: Vec<&str> = header.iter().collect();
    if got != expected {
        return Err(Error::parse(
            path,
            1,
            format!(
                "expected header `{}`, got `{}`",
                expected.join(","),
                got.join(",")
            ),
        ));
    }
    Ok(())
}

pub fn load_manifest(manifest_path: &Path) -> Result<Vec<ManifestEntry>> {
    let mut reader = open_csv(manifest_path)?;
    expect_header(&mut reader, manifest_path, &["path", "label"])?;
    let base = manifest_path.parent().unwrap_or(Path::new(""));
    let mut entries = Vec::new();
    for record in reader.records() {
        let record = record
            .map_err(|e| Error::parse(manifest_path, csv_line(e.position()), e.to_string()))?;
        let line = csv_line(record.position());
        let rel = &record[0];
        if rel.is_empty() {
            return Err(Error::parse(manifest_path, line, "empty path"));
        }
        let label = match &record[1] {
            "" => None,
            s => {
                let l: u8 = s
                    .parse()
                    .map_err(|_| Error::parse(manifest_path, line, format!("bad label `{s}`")))?;
                if l as usize >= NUM_CLASSES {
                    return Err(Error::parse(
                        manifest_path,
                        line,
                        format!("label {l} outside 0..{NUM_CLASSES}"),
                    ));
                }
                Some(l)
            }
        };
        entries.push(ManifestEntry {
            path: base.join(rel),
            label,
        });
    }
    Ok(entries)
}

/// Read the `t,x,y` samples of one trajectory file.
pub fn load_trajectory_samples(path: &Path) -> Result<Vec<[f64; 2]>> {
    let mut reader = open_csv(path)?;
    expect_header(&mut reader, path, &["t", "x", "y"])?;
    let mut samples = Vec::new();
    for record in reader.records() {
        let record =
            record.map_err(|e| Error::parse(path, csv_line(e.position()), e.to_string()))?;
        let line = csv_line(record.position());
        let mut vals = [0.0f64; 3];
        for (k, v) in vals.iter_mut().enumerate() {
            let cell = &record[k];
            *v = cell
                .parse()
                .map_err(|_| Error::parse(path, line, format!("malformed number `{cell}`")))?;
        }
        if !vals.iter().all(|v| v.is_finite()) {
            return Err(Error::parse(path, line, "non-finite value"));
        }
        samples.push([vals[1], vals[2]]);
    }
    if samples.is_empty() {
        return Err(Error::parse(path, 1, "trajectory has no samples"));
    }
    Ok(samples)
}

/// Load every trajectory of a manifest, in manifest order.
pub fn load_dataset(manifest_path: &Path) -> Result<Vec<LabeledTrajectory>> {
    load_manifest(manifest_path)?
        .into_iter()
        .map(|entry| {
            let samples = load_trajectory_samples(&entry.path)?;
            LabeledTrajectory::new(samples, entry.label, DEFAULT_SAMPLE_RATE_HZ)
        })
        .collect()
}

pub fn trajectory_csv(traj: &LabeledTrajectory) -> String {
    let mut out = String::from("t,x,y\n");
    let dt = 1.0 / traj.sample_rate_hz;
    for (i, [x, y]) in traj.samples.iter().enumerate() {
        out.push_str(&format!("{},{x},{y}\n", i as f64 * dt));
    }
    out
}

/// Write trajectories as `<stem>_<index>.csv` next to a `manifest.csv` in
/// `dir`. Returns the manifest path.
pub fn write_dataset(
    dir: &Path,
    stem: &str,
    trajectories: &[LabeledTrajectory],
) -> Result<PathBuf> {
    let mut manifest = String::from("path,label\n");
    for (i, traj) in trajectories.iter().enumerate() {
        let name = format!("{stem}_{i:04}.csv");
        crate::io::write_atomic(&dir.join(&name), trajectory_csv(traj).as_bytes())?;
        let label = traj.label.map(|l| l.to_string()).unwrap_or_default();
        manifest.push_str(&format!("{name},{label}\n"));
    }
    let path = dir.join("manifest.csv");
    crate::io::write_atomic(&path, manifest.as_bytes())?;
    Ok(path)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub seed: u64,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub validation: Vec<usize>,
}

impl DatasetSplit {
    pub fn count(&self) -> usize {
        self.train.len() + self.test.len() + self.validation.len()
    }

    /// Check that the three partitions cover `0..count` exactly once.
    pub fn is_partition_of(&self, count: usize) -> bool {
        let mut seen = vec![false; count];
        for &i in self.train.iter().chain(&self.test).chain(&self.validation) {
            if i >= count || seen[i] {
                return false;
            }
            seen[i] = true;
        }
        seen.into_iter().all(|s| s)
    }
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

/// Partition sizes `(train, test, validation)` for a split.
pub fn split_sizes(
    count: usize,
    validation_fraction: f64,
    test_fraction: f64,
) -> Result<(usize, usize, usize)> {
    for (name, f) in [("validation", validation_fraction), ("test", test_fraction)] {
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "{name} fraction must lie in (0, 1), got {f}"
            )));
        }
    }
    let validation = round_half_up(count as f64 * validation_fraction).min(count);
    let remaining = count - validation;
    let test = round_half_up(remaining as f64 * test_fraction).min(remaining);
    let train = remaining - test;
    if validation == 0 || test == 0 || train == 0 {
        return Err(Error::InvalidArgument(format!(
            "split of {count} samples leaves an empty partition \
             (train {train}, test {test}, validation {validation})"
        )));
    }
    Ok((train, test, validation))
}

/// Seeded uniform shuffle of `0..count`, cut into validation, test and train.
/// Each partition is returned sorted.
pub fn split_dataset(
    count: usize,
    validation_fraction: f64,
    test_fraction: f64,
    seed: u64,
) -> Result<DatasetSplit> {
    if count < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 samples to split, got {count}"
        )));
    }
    let (_, test_n, val_n) = split_sizes(count, validation_fraction, test_fraction)?;
    let mut idx: Vec<usize> = (0..count).collect();
    idx.shuffle(&mut seed::rng(seed));
    let mut validation = idx[..val_n].to_vec();
    let mut test = idx[val_n..val_n + test_n].to_vec();
    let mut train = idx[val_n + test_n..].to_vec();
    validation.sort_unstable();
    test.sort_unstable();
    train.sort_unstable();
    Ok(DatasetSplit {
        seed,
        train,
        test,
        validation,
    })
}

/// Default length of a synthetic trajectory: 40 s at 60 Hz.
pub const DEFAULT_SYNTH_POINTS: usize = 2400;
pub const DEFAULT_SYNTH_NOISE: f64 = 0.01;

/// Generate one synthetic trajectory in the unit square.
///
/// Regimes per class:
/// * 0: a large loop traversed four times
/// * 1: a small dense cluster (a long fixation)
/// * 2: a line swept back and forth
/// * 3: jumps between three to five fixation clusters
///
/// Isotropic Gaussian noise of scale `noise_sigma` is added to every sample.
pub fn generate_synthetic(
    class_id: u8,
    point_count: usize,
    noise_sigma: f64,
    seed: u64,
) -> Result<LabeledTrajectory> {
    if class_id as usize >= NUM_CLASSES {
        return Err(Error::InvalidArgument(format!(
            "class {class_id} outside 0..{NUM_CLASSES}"
        )));
    }
    if point_count < 10 {
        return Err(Error::InvalidArgument(format!(
            "synthetic trajectories need at least 10 points, got {point_count}"
        )));
    }
    if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "noise sigma must be nonnegative, got {noise_sigma}"
        )));
    }
    let mut rng = seed::rng(seed::derive(seed, class_id as u64));
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let n = point_count;
    let cx = 0.5 + rng.gen_range(-0.05..0.05);
    let cy = 0.5 + rng.gen_range(-0.05..0.05);

    let mut samples: Vec<[f64; 2]> = match class_id {
        0 => {
            let radius = 0.3 * rng.gen_range(0.9..1.1);
            let phase = rng.gen_range(0.0..TAU);
            let turns = 4.0;
            (0..n)
                .map(|i| {
                    let theta = phase + TAU * turns * i as f64 / n as f64;
                    [cx + radius * theta.cos(), cy + radius * theta.sin()]
                })
                .collect()
        }
        1 => {
            let spread = 0.02 * rng.gen_range(0.8..1.2);
            (0..n)
                .map(|_| {
                    [
                        cx + spread * std_normal.sample(&mut rng),
                        cy + spread * std_normal.sample(&mut rng),
                    ]
                })
                .collect()
        }
        2 => {
            let angle = rng.gen_range(0.0..std::f64::consts::PI);
            let (dx, dy) = (angle.cos(), angle.sin());
            let half = 0.3 * rng.gen_range(0.9..1.1);
            let sweeps = 3.0;
            (0..n)
                .map(|i| {
                    // triangle wave in [-1, 1]
                    let u = (sweeps * i as f64 / n as f64).fract();
                    let s = if u < 0.5 {
                        4.0 * u - 1.0
                    } else {
                        3.0 - 4.0 * u
                    };
                    [cx + half * s * dx, cy + half * s * dy]
                })
                .collect()
        }
        _ => {
            let k = rng.gen_range(3..=5usize);
            let centers: Vec<[f64; 2]> = (0..k)
                .map(|_| [rng.gen_range(0.15..0.85), rng.gen_range(0.15..0.85)])
                .collect();
            let spread = 0.015;
            let mut out = Vec::with_capacity(n);
            let mut current = 0usize;
            while out.len() < n {
                let dwell = rng.gen_range(n / 10..=n / 5).max(1);
                let c = centers[current];
                for _ in 0..dwell.min(n - out.len()) {
                    out.push([
                        c[0] + spread * std_normal.sample(&mut rng),
                        c[1] + spread * std_normal.sample(&mut rng),
                    ]);
                }
                current = (current + rng.gen_range(1..k)) % k;
            }
            out
        }
    };

    if noise_sigma > 0.0 {
        for s in &mut samples {
            s[0] += noise_sigma * std_normal.sample(&mut rng);
            s[1] += noise_sigma * std_normal.sample(&mut rng);
        }
    }
    LabeledTrajectory::new(samples, Some(class_id), DEFAULT_SAMPLE_RATE_HZ)
}

/// `per_class` trajectories of every class, interleaved by class.
pub fn generate_synthetic_dataset(
    per_class: usize,
    point_count: usize,
    noise_sigma: f64,
    seed: u64,
) -> Result<Vec<LabeledTrajectory>> {
    let mut out = Vec::with_capacity(per_class * NUM_CLASSES);
    for i in 0..per_class {
        for c in 0..NUM_CLASSES as u8 {
            let s = seed::derive(seed, (i * NUM_CLASSES + c as usize) as u64);
            out.push(generate_synthetic(c, point_count, noise_sigma, s)?);
        }
    }
    Ok(out)
}
