//! Vietoris–Rips persistent homology in dimensions 0 and 1.
//!
//! [`rips_h0`] and [`rips_h1`] are the working engine. [`oracle_persistence`]
//! is a deliberately naive full boundary-matrix reduction used only to
//! cross-check the engine on small clouds.
//!
//! Coefficients are in Z/2. Simplices are ordered by
//! `(filtration value, dimension, lexicographic vertices)`; diagrams do not
//! depend on this tie-break as multisets. Bars of zero length are never
//! emitted.

mod diagram;
mod distance;
mod oracle;
mod rips;

pub use diagram::{Bar, PersistenceDiagram};
pub use distance::{pairwise_distances, DistanceMatrix};
pub use oracle::{oracle_persistence, ORACLE_MAX_POINTS};
pub use rips::{compute_diagrams, rips_h0, rips_h1, UnionFind};
