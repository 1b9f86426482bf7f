use std::collections::HashMap;

use crate::error::{Error, Result};

use super::{Bar, DistanceMatrix, PersistenceDiagram};

/// Simplex enumeration grows combinatorially; beyond this the oracle refuses.
pub const ORACLE_MAX_POINTS: usize = 14;

struct Simplex {
    value: f64,
    vertices: Vec<usize>,
}

fn subsets_of_size(n: usize, k: usize, out: &mut Vec<Vec<usize>>) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            cur.push(v);
            rec(v + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::with_capacity(k), out);
}

/// Persistence by textbook reduction of the full boundary matrix.
///
/// Every simplex of dimension up to `max_dim + 1` is enumerated with no
/// threshold, sorted by `(value, dimension, lexicographic vertices)`, and
/// the boundary matrix is reduced left to right: a column is added to
/// whenever some earlier column shares its lowest nonzero row. No clearing,
/// no early exit. Returns diagrams for dimensions `0..=max_dim`.
pub fn oracle_persistence(
    dist: &DistanceMatrix,
    max_dim: usize,
) -> Result<Vec<PersistenceDiagram>> {
    let n = dist.len();
    if n > ORACLE_MAX_POINTS {
        return Err(Error::OracleTooLarge {
            max: ORACLE_MAX_POINTS,
            got: n,
        });
    }

    let mut simplices = Vec::new();
    for size in 1..=(max_dim + 2).min(n) {
        let mut subsets = Vec::new();
        subsets_of_size(n, size, &mut subsets);
        for vertices in subsets {
            let mut value = 0.0f64;
            for (i, &a) in vertices.iter().enumerate() {
                for &b in &vertices[i + 1..] {
                    value = value.max(dist.get(a, b));
                }
            }
            simplices.push(Simplex { value, vertices });
        }
    }
    simplices.sort_by(|x, y| {
        x.value
            .total_cmp(&y.value)
            .then(x.vertices.len().cmp(&y.vertices.len()))
            .then(x.vertices.cmp(&y.vertices))
    });

    let position: HashMap<&[usize], usize> = simplices
        .iter()
        .enumerate()
        .map(|(i, s)| (s.vertices.as_slice(), i))
        .collect();

    // Columns as dense Z/2 vectors over simplex positions.
    let total = simplices.len();
    let mut columns: Vec<Vec<bool>> = simplices
        .iter()
        .map(|s| {
            let mut col = vec![false; total];
            if s.vertices.len() > 1 {
                for skip in 0..s.vertices.len() {
                    let face: Vec<usize> = s
                        .vertices
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != skip)
                        .map(|(_, &v)| v)
                        .collect();
                    col[position[face.as_slice()]] = true;
                }
            }
            col
        })
        .collect();

    let low = |col: &[bool]| col.iter().rposition(|&x| x);
    for j in 0..total {
        while let Some(l) = low(&columns[j]) {
            let Some(k) = (0..j).find(|&k| low(&columns[k]) == Some(l)) else {
                break;
            };
            let (left, right) = columns.split_at_mut(j);
            for (t, s) in right[0].iter_mut().zip(&left[k]) {
                *t ^= *s;
            }
        }
    }

    let mut bars: Vec<Vec<Bar>> = vec![Vec::new(); max_dim + 1];
    let mut paired = vec![false; total];
    for j in 0..total {
        if let Some(l) = low(&columns[j]) {
            paired[l] = true;
            paired[j] = true;
            let dim = simplices[l].vertices.len() - 1;
            if dim <= max_dim {
                bars[dim].push(Bar::new(simplices[l].value, simplices[j].value));
            }
        }
    }
    for j in 0..total {
        let dim = simplices[j].vertices.len() - 1;
        if !paired[j] && dim <= max_dim && low(&columns[j]).is_none() {
            bars[dim].push(Bar::new(simplices[j].value, f64::INFINITY));
        }
    }

    Ok(bars
        .into_iter()
        .enumerate()
        .map(|(dim, b)| PersistenceDiagram::new(dim, b))
        .collect())
}
