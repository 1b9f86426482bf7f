//! Persistence statistics: the 72-slot feature vector of a trajectory.
//!
//! Slot layout, outer to inner: cloud (raw, x, y) × homology dimension
//! (0, 1) × value kind (birth, death, persistence) × statistic (mean,
//! entropy, max, cardinality). The slot of a combination is
//! `((cloud * 2 + dim) * 3 + kind) * 4 + stat`.

use serde::{Deserialize, Serialize};

use crate::embed::{build_clouds, EmbeddingParams};
use crate::error::{Error, Result};
use crate::ingest::LabeledTrajectory;
use crate::persistence::{compute_diagrams, PersistenceDiagram};

pub const CLOUDS: [&str; 3] = ["raw", "x", "y"];
pub const HOMOLOGY_DIMS: usize = 2;
pub const STATS: [&str; 4] = ["mean", "entropy", "max", "card"];
pub const FEATURE_LEN: usize = CLOUDS.len() * HOMOLOGY_DIMS * 3 * STATS.len();

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Alpha {
    Birth,
    Death,
    Persistence,
}

impl Alpha {
    pub const ALL: [Alpha; 3] = [Alpha::Birth, Alpha::Death, Alpha::Persistence];

    pub fn name(self) -> &'static str {
        match self {
            Alpha::Birth => "birth",
            Alpha::Death => "death",
            Alpha::Persistence => "pers",
        }
    }
}

/// How bars with infinite death enter the statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InfinitePolicy {
    #[default]
    Drop,
    /// Replace an infinite death by the cloud diameter.
    Diameter,
}

pub fn slot(cloud: usize, dim: usize, alpha: usize, stat: usize) -> usize {
    ((cloud * HOMOLOGY_DIMS + dim) * 3 + alpha) * STATS.len() + stat
}

/// Human-readable name of a slot, e.g. `x_h1_pers_entropy`.
pub fn slot_name(index: usize) -> String {
    let stat = index % 4;
    let alpha = (index / 4) % 3;
    let dim = (index / 12) % 2;
    let cloud = index / 24;
    format!(
        "{}_h{}_{}_{}",
        CLOUDS[cloud],
        dim,
        Alpha::ALL[alpha].name(),
        STATS[stat]
    )
}

/// Per-bar values of the chosen kind; infinite bars are dropped.
pub fn alpha_values(diagram: &PersistenceDiagram, alpha: Alpha) -> Vec<f64> {
    diagram
        .finite()
        .map(|b| match alpha {
            Alpha::Birth => b.birth,
            Alpha::Death => b.death,
            Alpha::Persistence => b.persistence(),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub mean: f64,
    pub entropy: f64,
    pub max: f64,
    pub cardinality: f64,
}

impl Stats {
    pub fn as_array(&self) -> [f64; 4] {
        [self.mean, self.entropy, self.max, self.cardinality]
    }
}

/// Mean, Shannon entropy (nats) of the normalized values, maximum and count.
///
/// An empty list gives all zeros. A list summing to zero has undefined
/// entropy weights and gives `(0, 0, 0, n)`.
pub fn stats(values: &[f64]) -> Stats {
    let n = values.len();
    if n == 0 {
        return Stats {
            mean: 0.0,
            entropy: 0.0,
            max: 0.0,
            cardinality: 0.0,
        };
    }
    let total: f64 = values.iter().sum();
    if total == 0.0 {
        return Stats {
            mean: 0.0,
            entropy: 0.0,
            max: 0.0,
            cardinality: n as f64,
        };
    }
    let entropy = -values
        .iter()
        .map(|&v| v / total)
        .filter(|&p| p > 0.0)
        .map(|p| p * p.ln())
        .sum::<f64>();
    Stats {
        mean: total / n as f64,
        entropy: entropy.max(0.0),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        cardinality: n as f64,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: [f64; FEATURE_LEN],
    pub label: Option<u8>,
}

/// Fill the 12 slots of one diagram starting at `offset`.
fn fill_diagram(
    out: &mut [f64; FEATURE_LEN],
    cloud: usize,
    diagram: &PersistenceDiagram,
    diameter: f64,
    policy: InfinitePolicy,
) {
    let diagram = match policy {
        InfinitePolicy::Drop => diagram.clone(),
        InfinitePolicy::Diameter => PersistenceDiagram::new(
            diagram.dim,
            diagram.bars.iter().map(|b| {
                let mut b = *b;
                if b.is_infinite() {
                    b.death = diameter;
                }
                b
            }),
        ),
    };
    for (a, alpha) in Alpha::ALL.into_iter().enumerate() {
        let s = stats(&alpha_values(&diagram, alpha)).as_array();
        for (k, v) in s.into_iter().enumerate() {
            out[slot(cloud, diagram.dim, a, k)] = v;
        }
    }
}

/// Diagrams `(D0, D1)` for each of the three clouds, in slot order.
pub fn trajectory_diagrams(
    trajectory: &LabeledTrajectory,
    params: &EmbeddingParams,
) -> Result<Vec<(PersistenceDiagram, PersistenceDiagram, f64)>> {
    let clouds = build_clouds(trajectory, params)?;
    clouds
        .iter()
        .map(|(_, cloud)| {
            let (d0, d1) = compute_diagrams(cloud)?;
            let diameter = crate::persistence::pairwise_distances(cloud).diameter();
            Ok((d0, d1, diameter))
        })
        .collect()
}

pub fn featurize(
    trajectory: &LabeledTrajectory,
    params: &EmbeddingParams,
) -> Result<FeatureVector> {
    featurize_with(trajectory, params, InfinitePolicy::Drop)
}

pub fn featurize_with(
    trajectory: &LabeledTrajectory,
    params: &EmbeddingParams,
    policy: InfinitePolicy,
) -> Result<FeatureVector> {
    let mut values = [0.0; FEATURE_LEN];
    for (c, (d0, d1, diameter)) in trajectory_diagrams(trajectory, params)?.iter().enumerate() {
        fill_diagram(&mut values, c, d0, *diameter, policy);
        fill_diagram(&mut values, c, d1, *diameter, policy);
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Invariant(format!("feature slot {i} is not finite")));
    }
    Ok(FeatureVector {
        values,
        label: trajectory.label(),
    })
}

/// Header `f0,...,f71,label`.
pub fn features_csv_header() -> String {
    let mut cols: Vec<String> = (0..FEATURE_LEN).map(|i| format!("f{i}")).collect();
    cols.push("label".into());
    cols.join(",")
}

/// Feature file body, one row per vector. Values use the shortest
/// representation that round-trips exactly.
pub fn features_csv(rows: &[FeatureVector]) -> String {
    let mut out = features_csv_header();
    out.push('\n');
    for row in rows {
        for v in &row.values {
            out.push_str(&v.to_string());
            out.push(',');
        }
        if let Some(l) = row.label {
            out.push_str(&l.to_string());
        }
        out.push('\n');
    }
    out
}
