//! Downsampling and delay embedding of trajectories into point clouds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::LabeledTrajectory;

/// A finite set of points in `R^k`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument(
                "ambient dimension must be >= 1".into(),
            ));
        }
        if coords.is_empty() || !coords.len().is_multiple_of(dim) {
            return Err(Error::InvalidArgument(format!(
                "{} coordinates do not form a non-empty cloud in R^{dim}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coordinate".into()));
        }
        Ok(Self { dim, coords })
    }

    pub fn from_points<P: AsRef<[f64]>>(points: &[P]) -> Result<Self> {
        let dim = points.first().map(|p| p.as_ref().len()).unwrap_or(0);
        if points.iter().any(|p| p.as_ref().len() != dim) {
            return Err(Error::InvalidArgument(
                "points of differing dimension".into(),
            ));
        }
        Self::from_flat(
            dim,
            points
                .iter()
                .flat_map(|p| p.as_ref().iter().copied())
                .collect(),
        )
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// CSV with header `c0,...,c{k-1}`, one point per row.
    pub fn to_csv(&self) -> String {
        let header: Vec<String> = (0..self.dim).map(|c| format!("c{c}")).collect();
        let mut out = header.join(",");
        out.push('\n');
        for p in self.points() {
            let row: Vec<String> = p.iter().map(|v| v.to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingParams {
    pub dim: usize,
    pub delay: usize,
    pub reduction: usize,
    /// Standardize each coordinate to zero mean and unit variance after
    /// downsampling.
    #[serde(default)]
    pub normalize: bool,
}

impl Default for EmbeddingParams {
    fn default() -> Self {
        Self {
            dim: 3,
            delay: 10,
            reduction: 20,
            normalize: false,
        }
    }
}

impl EmbeddingParams {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.delay == 0 || self.reduction == 0 {
            return Err(Error::InvalidArgument(format!(
                "embedding parameters must be >= 1 (dim {}, delay {}, reduction {})",
                self.dim, self.delay, self.reduction
            )));
        }
        Ok(())
    }
}

/// Keep samples `r, 2r, ..., floor(N/r)*r` (1-based), i.e. every r-th sample
/// starting with the r-th.
pub fn downsample(trajectory: &LabeledTrajectory, r: usize) -> Result<LabeledTrajectory> {
    if r == 0 {
        return Err(Error::InvalidArgument(
            "reduction factor must be >= 1".into(),
        ));
    }
    let samples: Vec<[f64; 2]> = trajectory
        .samples()
        .iter()
        .skip(r - 1)
        .step_by(r)
        .copied()
        .collect();
    if samples.is_empty() {
        return Err(Error::EmptyDownsample {
            len: trajectory.len(),
            reduction: r,
        });
    }
    LabeledTrajectory::new(
        samples,
        trajectory.label(),
        trajectory.sample_rate_hz() / r as f64,
    )
}

/// Number of delay vectors a series of length `len` yields.
pub fn embedded_len(len: usize, dim: usize, delay: usize) -> Option<usize> {
    let span = (dim.checked_sub(1)?).checked_mul(delay)?;
    len.checked_sub(span).filter(|&n| n > 0)
}

fn check_embeddable(len: usize, dim: usize, delay: usize) -> Result<usize> {
    if dim == 0 || delay == 0 {
        return Err(Error::InvalidArgument(
            "embedding dimension and delay must be >= 1".into(),
        ));
    }
    embedded_len(len, dim, delay).ok_or(Error::SeriesTooShort { len, dim, delay })
}

/// Point `i` is `(s[i], s[i+delay], ..., s[i+(dim-1)*delay])`.
pub fn delay_embed_coordinate(series: &[f64], dim: usize, delay: usize) -> Result<PointCloud> {
    let count = check_embeddable(series.len(), dim, delay)?;
    let mut coords = Vec::with_capacity(count * dim);
    for i in 0..count {
        coords.extend((0..dim).map(|k| series[i + k * delay]));
    }
    PointCloud::from_flat(dim, coords)
}

/// Concatenation of the x and y delay vectors, a cloud in `R^{2 dim}`.
pub fn combined_embed(
    trajectory: &LabeledTrajectory,
    dim: usize,
    delay: usize,
) -> Result<PointCloud> {
    let count = check_embeddable(trajectory.len(), dim, delay)?;
    let s = trajectory.samples();
    let mut coords = Vec::with_capacity(count * 2 * dim);
    for i in 0..count {
        coords.extend((0..dim).map(|k| s[i + k * delay][0]));
        coords.extend((0..dim).map(|k| s[i + k * delay][1]));
    }
    PointCloud::from_flat(2 * dim, coords)
}

/// The three clouds a trajectory contributes to its feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Clouds {
    pub raw: PointCloud,
    pub x: PointCloud,
    pub y: PointCloud,
}

impl Clouds {
    pub fn iter(&self) -> impl Iterator<Item = (&'static str, &PointCloud)> {
        [("raw", &self.raw), ("x", &self.x), ("y", &self.y)].into_iter()
    }
}

fn standardize(series: &mut [f64]) {
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let var = series.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    for v in series.iter_mut() {
        *v -= mean;
        if sd > 0.0 {
            *v /= sd;
        }
    }
}

/// Downsample by `params.reduction`, then build the raw planar cloud and the
/// x and y delay embeddings.
pub fn build_clouds(trajectory: &LabeledTrajectory, params: &EmbeddingParams) -> Result<Clouds> {
    params.validate()?;
    let down = downsample(trajectory, params.reduction)?;
    let mut xs = down.xs();
    let mut ys = down.ys();
    if params.normalize {
        standardize(&mut xs);
        standardize(&mut ys);
    }
    let x = delay_embed_coordinate(&xs, params.dim, params.delay)?;
    let y = delay_embed_coordinate(&ys, params.dim, params.delay)?;
    let raw_coords = xs.iter().zip(&ys).flat_map(|(&a, &b)| [a, b]).collect();
    Ok(Clouds {
        raw: PointCloud::from_flat(2, raw_coords)?,
        x,
        y,
    })
}
