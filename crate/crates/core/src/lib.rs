//! Exact random-current and multigraph machinery for the XY model.
//!
//! - [`graph`]: finite simple graphs with exact couplings and vertex sources.
//! - [`current`]: currents on oriented edges, their amplitude, source, and weight.
//! - [`multigraph`]: two-color oriented configurations of 𝔾_N and their counts.
//! - [`bijection`]: the split/merge bijection and its exhaustive verifier.
//! - [`series`]: truncated series for Z, ⟨σ^φ⟩, and the Ginibre gap.
//! - [`oracle`]: floating-point quadrature and Monte Carlo cross-checks.

pub mod bijection;
pub mod current;
pub mod error;
pub mod graph;
pub mod multigraph;
pub mod oracle;
pub mod rational;
pub mod series;

pub use bijection::{merge, split, verify_bijection, BijectionReport, SplitPair};
pub use current::{enumerate_currents, Current, CurrentConstraint, EdgeAmplitude};
pub use error::{Error, GraphError, Result};
pub use graph::{Graph, OrientedEdge, SourceFunction};
pub use multigraph::{count_one_color, count_two_color, ColoredConfig, CountMethod, Multigraph, OrientedConfig};
pub use oracle::{hamiltonian, mc_correlation, quadrature_correlation, AngleConfig, Gauge, McEstimate};
pub use series::{
    coefficient_identity_check, correlation, ginibre_gap_counts, ginibre_gap_series, partition_function, GapTables,
    TruncatedSeries,
};
