#![allow(dead_code)]

use gaze_topo::persistence::DistanceMatrix;
use gaze_topo::report::ClassificationReport;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Four Gaussian blobs with unit spread; class `c` is centered at
/// `separation` along feature `c`, the remaining features are pure noise.
pub fn blobs(n: usize, features: usize, separation: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let c = (i % 4) as u8;
        let row = (0..features)
            .map(|f| normal.sample(&mut rng) + if f == c as usize { separation } else { 0.0 })
            .collect();
        x.push(row);
        y.push(c);
    }
    (x, y)
}

/// Recount a report from scratch and compare every derived number.
pub fn report_violations(y_true: &[u8], y_pred: &[u8], r: &ClassificationReport) -> Vec<String> {
    let mut bad = Vec::new();
    let mut cm = [[0usize; 4]; 4];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        cm[t as usize][p as usize] += 1;
    }
    if cm != r.confusion {
        bad.push(format!("confusion {:?} != {:?}", r.confusion, cm));
    }
    let total: usize = r.confusion.iter().flatten().sum();
    if total != y_true.len() || r.total != total {
        bad.push(format!("total {} vs {}", r.total, y_true.len()));
    }
    let trace: usize = (0..4).map(|c| r.confusion[c][c]).sum();
    if r.accuracy != trace as f64 / total as f64 {
        bad.push(format!("accuracy {} vs trace/total", r.accuracy));
    }
    for m in &r.classes {
        let c = m.class as usize;
        let row: usize = r.confusion[c].iter().sum();
        let col: usize = (0..4).map(|k| r.confusion[k][c]).sum();
        if row != m.support {
            bad.push(format!("class {c}: row sum {row} != support {}", m.support));
        }
        let p = if col == 0 {
            0.0
        } else {
            cm[c][c] as f64 / col as f64
        };
        let rc = if row == 0 {
            0.0
        } else {
            cm[c][c] as f64 / row as f64
        };
        let f = if p + rc > 0.0 {
            2.0 * p * rc / (p + rc)
        } else {
            0.0
        };
        if (m.precision - p).abs() > 1e-12
            || (m.recall - rc).abs() > 1e-12
            || (m.f1 - f).abs() > 1e-12
        {
            bad.push(format!("class {c}: metrics {m:?}"));
        }
    }
    if r.classes.len() != 4 {
        bad.push(format!("{} classes reported", r.classes.len()));
    }
    bad
}

/// Kruskal with a relabel-on-merge component array.
pub fn mst_weights(dist: &DistanceMatrix) -> Vec<f64> {
    let n = dist.len();
    let mut edges: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            edges.push((dist.get(i, j), i, j));
        }
    }
    edges.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut comp: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    for (w, i, j) in edges {
        let (ci, cj) = (comp[i], comp[j]);
        if ci != cj {
            for c in comp.iter_mut() {
                if *c == cj {
                    *c = ci;
                }
            }
            out.push(w);
        }
    }
    out
}
