//! Permutation-based causal structure learning.
//!
//! The crate recovers the equivalence class (CPDAG) of a causal DAG from
//! observational data by searching over variable orderings: every ordering
//! is scored by letting each variable pick parents from its predecessors
//! via grow-shrink selection, and the search repeatedly re-inserts each
//! variable at its best position until the total score stops improving.
//! Grow-shrink trees cache the selection trajectories so revisited
//! orderings never re-score.
//!
//! - [`graph`]: DAGs, partially directed graphs, class completion
//!   (compelled-edge labeling), consistent extensions, d-connection.
//! - [`score`]: the local-score interface, a Gaussian BIC score over
//!   covariance matrices, and a d-separation oracle score for testing
//!   against known ground truth.
//! - [`gst`]: grow-shrink trees, the per-variable score cache.
//! - [`search`]: permutations, best-insertion sweeps, the full search,
//!   and the backward edge-deletion pass.
//! - [`simgen`]: random graphs, linear structural-equation sampling,
//!   column standardization and shuffling.
//! - [`metrics`]: adjacency/orientation confusion, precision/recall,
//!   and score gaps against the truth.
//! - [`data`]: a minimal row-major matrix.

pub mod data;
pub mod graph;
pub mod gst;
pub mod metrics;
pub mod score;
pub mod search;
pub mod simgen;

pub use data::DataMatrix;
pub use graph::{
    consistent_extension, cpdag_equal, d_connected, find_compelled, is_acyclic, Dag, GraphError,
    Pdag,
};
pub use gst::GrowShrinkTree;
pub use metrics::{
    confusion, delta_bic, evaluate, precision_recall, ConfusionCounts, Counts, EvalReport,
    MetricsError,
};
pub use score::{
    covariance_from_data, score_dag, BicScore, CovarianceModel, LocalScore, OracleScore,
    ScoreError,
};
pub use search::{
    bes, best_move, boss, forest_score, project, BossOutcome, GstForest, Permutation,
    SearchConfig, SearchError, SearchStats, MAX_SWEEPS,
};
pub use simgen::{
    er_dag, mix_seed, noise_draw, rep_seeds, sample_sem, sf_dag, sf_dag_with_hidden,
    shuffle_columns, GraphFamily, NoiseFamily, SemModel, SimError,
};
