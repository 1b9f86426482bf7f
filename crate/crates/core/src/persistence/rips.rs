use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap};

use crate::embed::PointCloud;
use crate::error::{Error, Result};

use super::{pairwise_distances, Bar, DistanceMatrix, PersistenceDiagram};

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merge the sets of `a` and `b`; false if they were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

#[derive(Debug, Clone, Copy)]
struct Edge {
    value: f64,
    a: u32,
    b: u32,
}

/// Edges with value `<= threshold`, in filtration order.
fn sorted_edges(dist: &DistanceMatrix, threshold: f64) -> Vec<Edge> {
    let n = dist.len();
    let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for a in 0..n {
        for b in a + 1..n {
            let value = dist.get(a, b);
            if value <= threshold {
                edges.push(Edge {
                    value,
                    a: a as u32,
                    b: b as u32,
                });
            }
        }
    }
    edges.sort_by(|x, y| {
        x.value
            .total_cmp(&y.value)
            .then(x.a.cmp(&y.a))
            .then(x.b.cmp(&y.b))
    });
    edges
}

/// Dimension-0 diagram: every vertex is born at 0 and the finite deaths are
/// the minimum-spanning-tree edge weights found by Kruskal's algorithm.
pub fn rips_h0(dist: &DistanceMatrix) -> PersistenceDiagram {
    let n = dist.len();
    if n == 0 {
        return PersistenceDiagram::empty(0);
    }
    let mut uf = UnionFind::new(n);
    let mut bars = Vec::with_capacity(n);
    for e in sorted_edges(dist, f64::INFINITY) {
        if uf.union(e.a as usize, e.b as usize) {
            bars.push(Bar::new(0.0, e.value));
            if bars.len() == n - 1 {
                break;
            }
        }
    }
    bars.push(Bar::new(0.0, f64::INFINITY));
    PersistenceDiagram::new(0, bars)
}

/// Pop the largest entry that survives Z/2 cancellation of equal keys.
fn pop_pivot(heap: &mut BinaryHeap<u128>) -> Option<u128> {
    loop {
        let top = heap.pop()?;
        let mut odd = true;
        while heap.peek() == Some(&top) {
            heap.pop();
            odd = !odd;
        }
        if odd {
            return Some(top);
        }
    }
}

/// Drain a heap into an ascending vector, cancelling equal pairs.
fn drain_column(heap: &mut BinaryHeap<u128>, pivot: u128) -> Vec<u128> {
    let mut out = Vec::with_capacity(heap.len() + 1);
    out.push(pivot);
    while let Some(k) = pop_pivot(heap) {
        out.push(k);
    }
    out.reverse();
    out
}

/// Filtration key of a triangle: value bits, then sorted vertices. For
/// nonnegative floats the bit pattern orders like the value, so comparing
/// keys compares `(value, a, b, c)` lexicographically.
#[inline]
fn triangle_key(value: f64, mut v: [u32; 3]) -> u128 {
    v.sort_unstable();
    ((value.to_bits() as u128) << 64)
        | ((v[0] as u128) << 42)
        | ((v[1] as u128) << 21)
        | v[2] as u128
}

#[inline]
fn key_value(key: u128) -> f64 {
    f64::from_bits((key >> 64) as u64)
}

/// Dimension-1 diagram of the Rips filtration truncated at `threshold`.
///
/// Works on the anti-transposed boundary matrix between edges and
/// triangles: edge columns hold their cofacet triangles and are reduced from
/// the youngest edge to the oldest, the pivot of a column being its oldest
/// triangle. This yields the same persistence pairs as reducing the boundary
/// matrix directly. Edges that kill a component in dimension 0 have zero
/// reduced columns and are cleared without being built. An edge whose column
/// reduces to zero starts a loop still alive at `threshold` (infinite death).
pub fn rips_h1(dist: &DistanceMatrix, threshold: f64) -> Result<PersistenceDiagram> {
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "threshold must be positive, got {threshold}"
        )));
    }
    let n = dist.len();
    if n < 3 {
        return Ok(PersistenceDiagram::empty(1));
    }
    if n >= 1 << 21 {
        return Err(Error::InvalidArgument(format!(
            "{n} points exceed the vertex index range"
        )));
    }

    let edges = sorted_edges(dist, threshold);

    // Clearing: edges that merge components are paired in dimension 0.
    let mut uf = UnionFind::new(n);
    let merging: Vec<bool> = edges
        .iter()
        .map(|e| uf.union(e.a as usize, e.b as usize))
        .collect();

    // Columns hold complemented keys so that the oldest triangle (the
    // pivot) is the largest entry. Stored columns are ascending vectors.
    let mut pivots: HashMap<u128, Vec<u128>> = HashMap::new();
    let mut bars = Vec::new();
    let mut column: Vec<u128> = Vec::with_capacity(n);
    let mut heap: BinaryHeap<u128> = BinaryHeap::new();
    for (e, _) in edges.iter().zip(&merging).rev().filter(|(_, &m)| !m) {
        let (a, b) = (e.a as usize, e.b as usize);
        column.clear();
        for c in 0..n {
            if c == a || c == b {
                continue;
            }
            let value = e.value.max(dist.get(a, c)).max(dist.get(b, c));
            if value <= threshold {
                column.push(!triangle_key(value, [e.a, e.b, c as u32]));
            }
        }
        column.sort_unstable();
        let Some(&first) = column.last() else {
            bars.push(Bar::new(e.value, f64::INFINITY));
            continue;
        };
        if let Entry::Vacant(slot) = pivots.entry(first) {
            // pivot is free: the column is already reduced
            bars.push(Bar::new(e.value, key_value(!first)));
            slot.insert(std::mem::replace(&mut column, Vec::with_capacity(n)));
            continue;
        }
        // Lazy reduction: entries pile up in a heap and cancel in pairs
        // only when they surface as a candidate pivot.
        heap.clear();
        heap.extend(column.iter().copied());
        let mut pivot = pop_pivot(&mut heap);
        while let Some(p) = pivot {
            match pivots.get(&p) {
                Some(reduced) => {
                    heap.extend(reduced[..reduced.len() - 1].iter().copied());
                    pivot = pop_pivot(&mut heap);
                }
                None => break,
            }
        }
        match pivot {
            Some(p) => {
                bars.push(Bar::new(e.value, key_value(!p)));
                pivots.insert(p, drain_column(&mut heap, p));
            }
            None => bars.push(Bar::new(e.value, f64::INFINITY)),
        }
    }

    Ok(PersistenceDiagram::new(1, bars))
}

/// `D0` and `D1` of a cloud, with the H1 filtration built up to the cloud
/// diameter so that every loop dies.
pub fn compute_diagrams(cloud: &PointCloud) -> Result<(PersistenceDiagram, PersistenceDiagram)> {
    let dist = pairwise_distances(cloud);
    let d0 = rips_h0(&dist);
    let diameter = dist.diameter();
    let d1 = if dist.len() < 3 || diameter == 0.0 {
        PersistenceDiagram::empty(1)
    } else {
        rips_h1(&dist, diameter)?
    };
    Ok((d0, d1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(points: &[[f64; 2]]) -> PointCloud {
        PointCloud::from_points(points).unwrap()
    }

    fn square() -> PointCloud {
        cloud(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    }

    #[test]
    fn equilateral_h0() {
        let d = DistanceMatrix::from_lower(3, vec![1.0, 1.0, 1.0]);
        let h0 = rips_h0(&d);
        assert_eq!(
            h0.bars,
            vec![
                Bar::new(0.0, 1.0),
                Bar::new(0.0, 1.0),
                Bar::new(0.0, f64::INFINITY)
            ]
        );
    }

    #[test]
    fn single_point_h0() {
        let h0 = rips_h0(&DistanceMatrix::from_lower(1, vec![]));
        assert_eq!(h0.bars, vec![Bar::new(0.0, f64::INFINITY)]);
    }

    #[test]
    fn square_loop() {
        let (d0, d1) = compute_diagrams(&square()).unwrap();
        let deaths: Vec<f64> = d0.finite().map(|b| b.death).collect();
        assert_eq!(deaths, vec![1.0, 1.0, 1.0]);
        assert_eq!(d1.bars, vec![Bar::new(1.0, 2f64.sqrt())]);
    }

    #[test]
    fn square_below_diagonal_threshold_is_essential() {
        let dist = pairwise_distances(&square());
        let d1 = rips_h1(&dist, 1.2).unwrap();
        assert_eq!(d1.bars, vec![Bar::new(1.0, f64::INFINITY)]);
    }

    #[test]
    fn collinear_has_no_loop() {
        let dist = pairwise_distances(&cloud(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]));
        assert!(rips_h1(&dist, 2.0).unwrap().is_empty());
    }

    #[test]
    fn small_clouds() {
        let (d0, d1) = compute_diagrams(&cloud(&[[0.0, 0.0], [0.0, 2.5]])).unwrap();
        assert_eq!(
            d0.bars,
            vec![Bar::new(0.0, 2.5), Bar::new(0.0, f64::INFINITY)]
        );
        assert!(d1.is_empty());
        let dist = pairwise_distances(&cloud(&[[0.0, 0.0], [0.0, 2.5]]));
        assert!(rips_h1(&dist, 1.0).unwrap().is_empty());
        assert!(rips_h1(&dist, 0.0).is_err());
    }

    #[test]
    fn duplicate_points_suppress_zero_bars() {
        let (d0, d1) =
            compute_diagrams(&cloud(&[[0.0, 0.0], [0.0, 0.0], [3.0, 0.0], [3.0, 0.0]])).unwrap();
        assert_eq!(
            d0.bars,
            vec![Bar::new(0.0, 3.0), Bar::new(0.0, f64::INFINITY)]
        );
        assert!(d1.is_empty());

        let (d0, d1) = compute_diagrams(&cloud(&[[1.0, 1.0]; 5])).unwrap();
        assert_eq!(d0.bars, vec![Bar::new(0.0, f64::INFINITY)]);
        assert!(d1.is_empty());
    }

    #[test]
    fn heap_pivot_cancels_pairs() {
        let mut heap: BinaryHeap<u128> = [1, 3, 5, 9, 3, 4, 9, 11, 11].into_iter().collect();
        assert_eq!(pop_pivot(&mut heap), Some(5));
        assert_eq!(drain_column(&mut heap, 5), vec![1, 4, 5]);
        let mut heap: BinaryHeap<u128> = [2, 2].into_iter().collect();
        assert_eq!(pop_pivot(&mut heap), None);
    }
}
