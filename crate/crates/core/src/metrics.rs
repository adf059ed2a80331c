//! Structure-recovery metrics: adjacency and orientation confusion counts
//! over unordered variable pairs, precision/recall, and the score gap
//! between the true graph and an estimate.

use crate::graph::{consistent_extension, find_compelled, Dag, GraphError, Pdag};
use crate::score::{score_dag, LocalScore, ScoreError};

#[derive(Debug, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("graphs have {0} and {1} variables; they must match")]
    SizeMismatch(usize, usize),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub true_positive: u64,
    pub false_positive: u64,
    pub false_negative: u64,
    pub true_negative: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub adjacency: Counts,
    pub orientation: Counts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PairState {
    Absent,
    /// Directed edge from the pair's lower-indexed variable to the higher.
    Forward,
    /// Directed edge from the pair's higher-indexed variable to the lower.
    Backward,
    Undirected,
}

fn pair_state(g: &Pdag, a: usize, b: usize) -> PairState {
    if g.has_directed(a, b) {
        PairState::Forward
    } else if g.has_directed(b, a) {
        PairState::Backward
    } else if g.has_undirected(a, b) {
        PairState::Undirected
    } else {
        PairState::Absent
    }
}

/// Per-pair confusion counts of `estimate` against the true class `truth`
/// (both as completed partially directed graphs).
///
/// Adjacency compares skeletons. Orientation scores only pairs that are
/// directed in the truth or spuriously directed in the estimate: a
/// correctly directed edge counts one true positive and one true negative,
/// a reversed edge one false positive and one false negative, a missing or
/// undirected version of a truly directed edge one false negative, and a
/// directed edge over a truly absent pair one false positive. Pairs that
/// are undirected in the truth contribute nothing to orientation.
pub fn confusion(truth: &Pdag, estimate: &Pdag) -> Result<ConfusionCounts, MetricsError> {
    let p = truth.num_vars();
    if estimate.num_vars() != p {
        return Err(MetricsError::SizeMismatch(p, estimate.num_vars()));
    }
    let mut counts = ConfusionCounts::default();
    for a in 0..p {
        for b in a + 1..p {
            let t = pair_state(truth, a, b);
            let e = pair_state(estimate, a, b);

            match (t != PairState::Absent, e != PairState::Absent) {
                (true, true) => counts.adjacency.true_positive += 1,
                (true, false) => counts.adjacency.false_negative += 1,
                (false, true) => counts.adjacency.false_positive += 1,
                (false, false) => counts.adjacency.true_negative += 1,
            }

            let o = &mut counts.orientation;
            match t {
                PairState::Forward | PairState::Backward => match e {
                    same if same == t => {
                        o.true_positive += 1;
                        o.true_negative += 1;
                    }
                    PairState::Forward | PairState::Backward => {
                        o.false_positive += 1;
                        o.false_negative += 1;
                    }
                    PairState::Undirected | PairState::Absent => o.false_negative += 1,
                },
                PairState::Absent => {
                    if matches!(e, PairState::Forward | PairState::Backward) {
                        o.false_positive += 1;
                    }
                }
                PairState::Undirected => {}
            }
        }
    }
    Ok(counts)
}

/// (precision, recall); either is None when its denominator is zero.
pub fn precision_recall(c: &Counts) -> (Option<f64>, Option<f64>) {
    let precision = match c.true_positive + c.false_positive {
        0 => None,
        d => Some(c.true_positive as f64 / d as f64),
    };
    let recall = match c.true_positive + c.false_negative {
        0 => None,
        d => Some(c.true_positive as f64 / d as f64),
    };
    (precision, recall)
}

/// Score of the true DAG minus the score of a consistent extension of the
/// estimated class; negative means the estimate fits at least as well.
pub fn delta_bic<S: LocalScore + ?Sized>(
    score: &S,
    truth: &Dag,
    estimate: &Pdag,
) -> Result<f64, MetricsError> {
    if truth.num_vars() != estimate.num_vars() {
        return Err(MetricsError::SizeMismatch(
            truth.num_vars(),
            estimate.num_vars(),
        ));
    }
    let extension = consistent_extension(estimate)?;
    Ok(score_dag(score, truth)? - score_dag(score, &extension)?)
}

#[derive(Debug, Clone)]
pub struct EvalReport {
    pub counts: ConfusionCounts,
    pub adjacency_precision: Option<f64>,
    pub adjacency_recall: Option<f64>,
    pub orientation_precision: Option<f64>,
    pub orientation_recall: Option<f64>,
    pub delta_bic: f64,
}

/// Full report for an estimated class against a true DAG: the truth is
/// completed to its equivalence class first, then compared pairwise, and
/// the score gap is computed under `score`.
pub fn evaluate<S: LocalScore + ?Sized>(
    score: &S,
    truth: &Dag,
    estimate: &Pdag,
) -> Result<EvalReport, MetricsError> {
    let order = truth.topological_order();
    let truth_class = find_compelled(truth, &order)?;
    let counts = confusion(&truth_class, estimate)?;
    let (adjacency_precision, adjacency_recall) = precision_recall(&counts.adjacency);
    let (orientation_precision, orientation_recall) = precision_recall(&counts.orientation);
    let delta = delta_bic(score, truth, estimate)?;
    Ok(EvalReport {
        counts,
        adjacency_precision,
        adjacency_recall,
        orientation_precision,
        orientation_recall,
        delta_bic: delta,
    })
}
