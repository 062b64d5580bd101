//! Classification by label propagation over a persistence-selected
//! sub-complex of a Vietoris–Rips filtration.
//!
//! The pipeline: [`rips::build_rips`] builds the filtered complex over all
//! points, [`persistence::boundary_reduce`] computes its barcode,
//! [`selection`] picks one interval and recovers the matching sub-complex, and
//! [`classifier`] propagates training labels through the star of every test
//! vertex, weighting each coface by the inverse of its filtration value.
//! [`baselines`], [`datasets`] and [`evaluation`] provide the experimental
//! harness around it.

pub mod baselines;
pub mod classifier;
pub mod complex;
pub mod datasets;
pub mod error;
pub mod evaluation;
pub mod persistence;
pub mod rips;
pub mod rng;
pub mod selection;

pub use classifier::{AssociationTable, LabelVector, Prediction, Provenance};
pub use complex::{FilteredComplex, Simplex, VertexId};
pub use error::{Error, Result};
pub use persistence::{boundary_reduce, Diagram, PersistenceInterval};
pub use rips::{build_rips, pairwise_distances, DistanceMatrix, EdgeCap, Metric, PointCloud, RipsConfig};
pub use selection::{EpsilonMode, Recovery, SelectionPolicy, Selector};
