//! Graph Wasserstein correlation analysis.
//!
//! Graph signals are encoded with polynomial Laplacian filters, compared as
//! 1-D Gaussians under the 2-Wasserstein distance, and the filters are
//! learned in closed form as canonical correlations between two views of
//! matched graph pairs. The crate also carries the pieces needed to run the
//! method end to end: a deterministic synthetic pair generator, similarity
//! graphs from node embeddings, ranked retrieval with Recall@K, an
//! invariant checker and order/dimension sweeps.

pub mod ablation;
pub mod check;
pub mod error;
pub mod filter;
pub mod graph;
pub mod io;
pub mod par;
pub mod retrieval;
pub mod solver;
pub mod synth;
pub mod wasserstein;

pub use error::{GwcaError, Result, View};
pub use graph::{build_laplacian, laplacian_powers, pad_pair, Graph, GraphJson, Laplacian};
pub use retrieval::{evaluate, pairwise_distance, rank, recall_at_k, DistanceMode, QueryResult, RecallReport};
pub use solver::{accumulate, solve, CorrelationMatrices, CorrelationModel, ModelJson, OrderConfig};
