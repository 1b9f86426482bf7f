use crate::embed::PointCloud;

/// Symmetric Euclidean distance matrix with zero diagonal, stored as the
/// strict lower triangle in row-major order: `d(1,0), d(2,0), d(2,1), ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    lower: Vec<f64>,
}

impl DistanceMatrix {
    /// Build from a strict lower triangle. Panics if the length is not
    /// `n(n-1)/2` or an entry is negative or non-finite.
    pub fn from_lower(n: usize, lower: Vec<f64>) -> Self {
        assert_eq!(
            lower.len(),
            n * n.saturating_sub(1) / 2,
            "lower triangle length"
        );
        assert!(
            lower.iter().all(|d| d.is_finite() && *d >= 0.0),
            "distances must be finite and nonnegative"
        );
        Self { n, lower }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Equal => 0.0,
            Greater => self.lower[i * (i - 1) / 2 + j],
            Less => self.lower[j * (j - 1) / 2 + i],
        }
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    /// Largest pairwise distance; 0 for fewer than two points.
    pub fn diameter(&self) -> f64 {
        self.lower.iter().copied().fold(0.0, f64::max)
    }
}

pub fn pairwise_distances(cloud: &PointCloud) -> DistanceMatrix {
    let n = cloud.len();
    let mut lower = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 1..n {
        let p = cloud.point(i);
        for j in 0..i {
            let q = cloud.point(j);
            let sq: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
            lower.push(sq.sqrt());
        }
    }
    DistanceMatrix { n, lower }
}
