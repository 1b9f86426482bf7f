use serde_json::Value;

use crate::error::{Error, Result};
use crate::io::fmt_sig17;

/// One interval `[birth, death)`; `death` may be `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bar {
    pub birth: f64,
    pub death: f64,
}

impl Bar {
    pub fn new(birth: f64, death: f64) -> Self {
        Self { birth, death }
    }

    pub fn is_infinite(&self) -> bool {
        self.death.is_infinite()
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram {
    pub dim: usize,
    pub bars: Vec<Bar>,
}

impl PersistenceDiagram {
    /// Build a diagram, dropping zero-length bars and sorting the rest by
    /// `(birth, death)`.
    pub fn new(dim: usize, bars: impl IntoIterator<Item = Bar>) -> Self {
        let mut bars: Vec<Bar> = bars.into_iter().filter(|b| b.death > b.birth).collect();
        bars.sort_by(|a, b| {
            a.birth
                .total_cmp(&b.birth)
                .then(a.death.total_cmp(&b.death))
        });
        Self { dim, bars }
    }

    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            bars: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn finite(&self) -> impl Iterator<Item = &Bar> {
        self.bars.iter().filter(|b| !b.is_infinite())
    }

    pub fn infinite_count(&self) -> usize {
        self.bars.iter().filter(|b| b.is_infinite()).count()
    }

    /// Multiset equality with a per-coordinate tolerance. Both diagrams are
    /// kept sorted, so bars are compared pairwise.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let close = |a: f64, b: f64| {
            if a.is_infinite() || b.is_infinite() {
                a == b
            } else {
                (a - b).abs() <= tol
            }
        };
        self.dim == other.dim
            && self.bars.len() == other.bars.len()
            && self
                .bars
                .iter()
                .zip(&other.bars)
                .all(|(a, b)| close(a.birth, b.birth) && close(a.death, b.death))
    }

    /// `{"dim": p, "bars": [[birth, death], ...]}` with infinite deaths as
    /// the string `"inf"` and 17 significant digits per value.
    pub fn to_json(&self) -> String {
        let bars: Vec<String> = self
            .bars
            .iter()
            .map(|b| {
                let death = if b.is_infinite() {
                    "\"inf\"".to_string()
                } else {
                    fmt_sig17(b.death)
                };
                format!("[{}, {}]", fmt_sig17(b.birth), death)
            })
            .collect();
        format!("{{\"dim\": {}, \"bars\": [{}]}}", self.dim, bars.join(", "))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text)?;
        Self::from_json_value(&v)
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::InvalidArgument(format!("diagram json: {m}"));
        let dim = v["dim"].as_u64().ok_or_else(|| bad("missing dim"))? as usize;
        let bars = v["bars"].as_array().ok_or_else(|| bad("missing bars"))?;
        let value = |x: &Value| -> Result<f64> {
            match x {
                Value::String(s) if s == "inf" => Ok(f64::INFINITY),
                _ => x.as_f64().ok_or_else(|| bad("bar value is not a number")),
            }
        };
        let bars = bars
            .iter()
            .map(|b| match b.as_array().map(Vec::as_slice) {
                Some([birth, death]) => Ok(Bar::new(value(birth)?, value(death)?)),
                _ => Err(bad("bar must be a pair")),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(dim, bars))
    }
}
