//! Decomposable local scores over variables and candidate parent sets.
//!
//! [`BicScore`] is the linear-Gaussian BIC evaluated from a covariance model;
//! [`OracleScore`] is a graphical stand-in used by correctness tests, scoring
//! parent sets by how much d-connection to the rest of a known true DAG they
//! leave unexplained.

use crate::data::DataMatrix;
use crate::graph::{d_connected, Dag};
use thiserror::Error;

/// Errors from covariance construction and score evaluation.
#[derive(Debug, Error, PartialEq)]
pub enum ScoreError {
    #[error("data matrix has no rows")]
    EmptyData,
    #[error("covariance must be square: got {0} values for {1} variables")]
    BadShape(usize, usize),
    #[error("variable {0} out of range for score over {1} variables")]
    IndexOutOfRange(usize, usize),
    #[error("parent set for variable {0} repeats variable {1}")]
    RepeatedParent(usize, usize),
    #[error("parent set for variable {0} contains the variable itself")]
    SelfParent(usize),
    #[error("degenerate parent set for variable {0}: the parent covariance is singular at the working tolerance")]
    DegenerateParentSet(usize),
}

/// A decomposable score: the total score of a DAG is the sum over variables
/// of `local(v, parents(v))`. Implementations are deterministic functions of
/// the variable and its parent *set* (order-insensitive).
pub trait LocalScore {
    fn num_vars(&self) -> usize;
    fn local(&self, v: usize, parents: &[usize]) -> Result<f64, ScoreError>;

    /// Score of `parents` for `v` judged only against the `visible`
    /// candidate pool (a membership mask over all variables). Data-driven
    /// scores depend on nothing but the parent set and fall back to
    /// [`LocalScore::local`]; the graphical test oracle penalizes only the
    /// unexplained dependence it can see inside the pool, mirroring how a
    /// regression score can explain variation only with the regressors it
    /// was offered.
    fn local_within(
        &self,
        v: usize,
        parents: &[usize],
        visible: &[bool],
    ) -> Result<f64, ScoreError> {
        let _ = visible;
        self.local(v, parents)
    }

    /// Whether [`LocalScore::local_within`] actually varies with the
    /// visible pool. Pool-sensitive scores cannot have per-parent-set
    /// values cached and reused across different pools.
    fn pool_sensitive(&self) -> bool {
        false
    }
}

/// Sample covariance (1/n moments) plus the sample size it came from.
#[derive(Clone, Debug)]
pub struct CovarianceModel {
    num_vars: usize,
    sample_size: usize,
    cov: Vec<f64>, // row-major num_vars x num_vars
}

impl CovarianceModel {
    /// Wraps an explicit covariance matrix (row-major, p × p).
    pub fn new(num_vars: usize, sample_size: usize, cov: Vec<f64>) -> Result<Self, ScoreError> {
        if cov.len() != num_vars * num_vars {
            return Err(ScoreError::BadShape(cov.len(), num_vars));
        }
        if sample_size == 0 {
            return Err(ScoreError::EmptyData);
        }
        Ok(CovarianceModel {
            num_vars,
            sample_size,
            cov,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn sample_size(&self) -> usize {
        self.sample_size
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.cov[i * self.num_vars + j]
    }
}

/// Sample covariance of the columns of `data`, using 1/n (population-style)
/// moments.
pub fn covariance_from_data(data: &DataMatrix) -> Result<CovarianceModel, ScoreError> {
    let n = data.num_rows();
    let p = data.num_cols();
    if n == 0 {
        return Err(ScoreError::EmptyData);
    }
    let mut means = vec![0.0f64; p];
    for r in 0..n {
        let row = data.row(r);
        for (m, &x) in means.iter_mut().zip(row) {
            *m += x;
        }
    }
    for m in &mut means {
        *m /= n as f64;
    }
    let mut cov = vec![0.0f64; p * p];
    for r in 0..n {
        let row = data.row(r);
        for i in 0..p {
            let di = row[i] - means[i];
            for j in i..p {
                cov[i * p + j] += di * (row[j] - means[j]);
            }
        }
    }
    let nf = n as f64;
    for i in 0..p {
        for j in i..p {
            let v = cov[i * p + j] / nf;
            cov[i * p + j] = v;
            cov[j * p + i] = v;
        }
    }
    CovarianceModel::new(p, n, cov)
}

/// Relative pivot tolerance for the symmetric positive-definite solve.
const PIVOT_RTOL: f64 = 1e-10;

/// In-place lower-Cholesky factorization with a relative pivot floor.
/// Returns false when any pivot falls below `tol` (singular at tolerance).
fn cholesky_in_place(a: &mut [f64], k: usize, tol: f64) -> bool {
    for j in 0..k {
        let mut d = a[j * k + j];
        for m in 0..j {
            d -= a[j * k + m] * a[j * k + m];
        }
        if !(d > tol) {
            return false;
        }
        let ljj = d.sqrt();
        a[j * k + j] = ljj;
        for i in (j + 1)..k {
            let mut s = a[i * k + j];
            for m in 0..j {
                s -= a[i * k + m] * a[j * k + m];
            }
            a[i * k + j] = s / ljj;
        }
    }
    true
}

/// Solves L Lᵀ x = b in place given the factor from `cholesky_in_place`.
fn cholesky_solve(l: &[f64], k: usize, b: &mut [f64]) {
    for i in 0..k {
        let mut s = b[i];
        for m in 0..i {
            s -= l[i * k + m] * b[m];
        }
        b[i] = s / l[i * k + i];
    }
    for i in (0..k).rev() {
        let mut s = b[i];
        for m in (i + 1)..k {
            s -= l[m * k + i] * b[m];
        }
        b[i] = s / l[i * k + i];
    }
}

/// Linear-Gaussian BIC with penalty discount λ:
/// `local(v, W) = -(n/2)·ln(residual variance of v given W)
///               - (λ/2)·(|W|+1)·ln(n)`,
/// constants dropped. Singular parent covariance (at the relative pivot
/// tolerance) is a hard error, never a silent -∞.
#[derive(Clone, Debug)]
pub struct BicScore {
    model: CovarianceModel,
    penalty_discount: f64,
}

impl BicScore {
    pub fn new(model: CovarianceModel, penalty_discount: f64) -> Self {
        BicScore {
            model,
            penalty_discount,
        }
    }

    pub fn model(&self) -> &CovarianceModel {
        &self.model
    }

    pub fn penalty_discount(&self) -> f64 {
        self.penalty_discount
    }

    /// Residual variance of `v` regressed on the (sorted, checked) set `w`.
    fn residual_variance(&self, v: usize, w: &[usize]) -> Result<f64, ScoreError> {
        let c = &self.model;
        let k = w.len();
        if k == 0 {
            return Ok(c.entry(v, v));
        }
        let mut a = vec![0.0f64; k * k];
        let mut max_diag = 0.0f64;
        for (i, &wi) in w.iter().enumerate() {
            for (j, &wj) in w.iter().enumerate() {
                a[i * k + j] = c.entry(wi, wj);
            }
            max_diag = max_diag.max(c.entry(wi, wi));
        }
        let tol = PIVOT_RTOL * max_diag;
        if !(max_diag > 0.0) || !cholesky_in_place(&mut a, k, tol) {
            return Err(ScoreError::DegenerateParentSet(v));
        }
        let mut b: Vec<f64> = w.iter().map(|&wi| c.entry(wi, v)).collect();
        let rhs = b.clone();
        cholesky_solve(&a, k, &mut b);
        let explained: f64 = rhs.iter().zip(&b).map(|(r, x)| r * x).sum();
        Ok(c.entry(v, v) - explained)
    }
}

/// Validates and sorts a parent set for deterministic evaluation.
fn checked_sorted_parents(
    p: usize,
    v: usize,
    parents: &[usize],
) -> Result<Vec<usize>, ScoreError> {
    if v >= p {
        return Err(ScoreError::IndexOutOfRange(v, p));
    }
    let mut w = parents.to_vec();
    w.sort_unstable();
    for (i, &x) in w.iter().enumerate() {
        if x >= p {
            return Err(ScoreError::IndexOutOfRange(x, p));
        }
        if x == v {
            return Err(ScoreError::SelfParent(v));
        }
        if i > 0 && w[i - 1] == x {
            return Err(ScoreError::RepeatedParent(v, x));
        }
    }
    Ok(w)
}

impl LocalScore for BicScore {
    fn num_vars(&self) -> usize {
        self.model.num_vars()
    }

    fn local(&self, v: usize, parents: &[usize]) -> Result<f64, ScoreError> {
        let w = checked_sorted_parents(self.num_vars(), v, parents)?;
        let sigma2 = self.residual_variance(v, &w)?;
        if !(sigma2 > 0.0) {
            return Err(ScoreError::DegenerateParentSet(v));
        }
        let n = self.model.sample_size() as f64;
        let lambda = self.penalty_discount;
        Ok(-(n / 2.0) * sigma2.ln() - (lambda / 2.0) * (w.len() as f64 + 1.0) * n.ln())
    }
}

/// Graphical oracle score for correctness tests: with a known true DAG,
/// a parent set W for v is charged `-BIG` for every visible variable that
/// remains d-connected to v given W, minus `|W|`, with BIG = p + 1 so one
/// unexplained dependence outweighs any parent-count difference.
///
/// The plain [`LocalScore::local`] form counts against all other
/// variables, so its zero-penalty minimizers are Markov blankets. The
/// pool-restricted [`LocalScore::local_within`] form counts only inside
/// the visible pool, which makes grow/shrink over a permutation prefix
/// choose exactly the parent sets an infinite-sample BIC would choose on
/// a faithful distribution: the minimal subset of the prefix that blocks
/// the rest of the prefix. Under that form every variable of a true DAG
/// scores `-|parents|` against its topological predecessors, so a DAG
/// that is an independence map of the truth totals minus its edge count,
/// and sparser maps strictly win.
#[derive(Clone, Debug)]
pub struct OracleScore {
    dag: Dag,
    big: f64,
}

impl OracleScore {
    pub fn new(true_dag: Dag) -> Self {
        let big = (true_dag.num_vars() + 1) as f64;
        OracleScore { dag: true_dag, big }
    }

    pub fn true_dag(&self) -> &Dag {
        &self.dag
    }

    /// `-BIG·#{u visible, u ∉ W∪{v} : u d-connected to v given W} - |W|`,
    /// with `None` meaning every other variable is visible.
    fn penalized_count(
        &self,
        v: usize,
        parents: &[usize],
        visible: Option<&[bool]>,
    ) -> Result<f64, ScoreError> {
        let p = self.num_vars();
        let w = checked_sorted_parents(p, v, parents)?;
        let mut connected = 0usize;
        for u in 0..p {
            if u == v || w.binary_search(&u).is_ok() {
                continue;
            }
            if let Some(mask) = visible {
                if !mask[u] {
                    continue;
                }
            }
            if d_connected(&self.dag, u, v, &w) {
                connected += 1;
            }
        }
        Ok(-self.big * connected as f64 - w.len() as f64)
    }
}

impl LocalScore for OracleScore {
    fn num_vars(&self) -> usize {
        self.dag.num_vars()
    }

    fn local(&self, v: usize, parents: &[usize]) -> Result<f64, ScoreError> {
        self.penalized_count(v, parents, None)
    }

    fn local_within(
        &self,
        v: usize,
        parents: &[usize],
        visible: &[bool],
    ) -> Result<f64, ScoreError> {
        assert_eq!(
            visible.len(),
            self.num_vars(),
            "visibility mask must cover every variable"
        );
        self.penalized_count(v, parents, Some(visible))
    }

    fn pool_sensitive(&self) -> bool {
        true
    }
}

/// Total decomposable score of a DAG: Σ_v local(v, parents(v)), with each
/// variable scored against the variables preceding it in a topological
/// order of `g`. Pool-free scores are unaffected by that context; for
/// pool-sensitive scores it makes the total of an independence map equal
/// minus its edge count, comparable across graphs.
pub fn score_dag<S: LocalScore + ?Sized>(score: &S, g: &Dag) -> Result<f64, ScoreError> {
    let p = g.num_vars();
    if p != score.num_vars() {
        return Err(ScoreError::IndexOutOfRange(p, score.num_vars()));
    }
    let mut visible = vec![false; p];
    let mut total = 0.0;
    for &v in &g.topological_order() {
        let parents: Vec<usize> = g.parents(v).iter().copied().collect();
        total += score.local_within(v, &parents, &visible)?;
        visible[v] = true;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn covariance_of_perfectly_correlated_pair() {
        // Columns (x, 2x) for x = 1,2,3,4 with 1/n moments.
        let data = DataMatrix::from_values(
            4,
            2,
            vec![1.0, 2.0, 2.0, 4.0, 3.0, 6.0, 4.0, 8.0],
        );
        let c = covariance_from_data(&data).unwrap();
        assert_relative_eq!(c.entry(0, 0), 1.25);
        assert_relative_eq!(c.entry(0, 1), 2.5);
        assert_relative_eq!(c.entry(1, 0), 2.5);
        assert_relative_eq!(c.entry(1, 1), 5.0);
        assert_eq!(c.sample_size(), 4);
    }

    #[test]
    fn covariance_rejects_empty_data() {
        let data = DataMatrix::zeros(0, 3);
        let err = covariance_from_data(&data).unwrap_err();
        assert_eq!(err, ScoreError::EmptyData);
    }

    #[test]
    fn bic_of_unit_variance_variable_with_no_parents() {
        // Unit variance, empty parent set, λ = 2, n = 1000: score = -ln(1000).
        let c = CovarianceModel::new(1, 1000, vec![1.0]).unwrap();
        let s = BicScore::new(c, 2.0);
        let got = s.local(0, &[]).unwrap();
        assert_relative_eq!(got, -(1000.0f64).ln(), max_relative = 1e-12);
    }

    #[test]
    fn bic_is_order_insensitive_and_validates_parents() {
        let cov = vec![
            1.0, 0.3, 0.2, //
            0.3, 1.0, 0.1, //
            0.2, 0.1, 1.0,
        ];
        let s = BicScore::new(CovarianceModel::new(3, 500, cov).unwrap(), 2.0);
        let a = s.local(0, &[1, 2]).unwrap();
        let b = s.local(0, &[2, 1]).unwrap();
        assert_eq!(a.to_bits(), b.to_bits(), "set semantics must be exact");
        assert_eq!(s.local(0, &[0]), Err(ScoreError::SelfParent(0)));
        assert_eq!(s.local(0, &[1, 1]), Err(ScoreError::RepeatedParent(0, 1)));
        assert_eq!(s.local(3, &[]), Err(ScoreError::IndexOutOfRange(3, 3)));
    }

    #[test]
    fn perfectly_collinear_parents_are_a_hard_error() {
        // Variables 1 and 2 identical: conditioning on both is singular.
        let cov = vec![
            1.0, 0.5, 0.5, //
            0.5, 1.0, 1.0, //
            0.5, 1.0, 1.0,
        ];
        let s = BicScore::new(CovarianceModel::new(3, 100, cov).unwrap(), 2.0);
        assert!(s.local(0, &[1]).is_ok());
        assert_eq!(
            s.local(0, &[1, 2]),
            Err(ScoreError::DegenerateParentSet(0))
        );
    }

    #[test]
    fn oracle_score_on_the_diamond() {
        // True graph b->a, d->a, c->b, c->d (a,b,c,d = 0,1,2,3).
        let g = Dag::from_edges(4, &[(1, 0), (3, 0), (2, 1), (2, 3)]).unwrap();
        let s = OracleScore::new(g);
        // With parents {b, d}, nothing else is d-connected to a: score -2.
        assert_eq!(s.local(0, &[1, 3]).unwrap(), -2.0);
        // That is the unique maximum over subsets of {b, c, d}.
        let mut best = Vec::new();
        for mask in 0u32..8 {
            let w: Vec<usize> = [1usize, 2, 3]
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &v)| v)
                .collect();
            best.push((s.local(0, &w).unwrap(), w));
        }
        best.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        assert_eq!(best[0].1, vec![1, 3]);
        assert!(best[0].0 > best[1].0);
    }

    #[test]
    fn score_dag_charges_the_truth_its_edge_count() {
        let g = Dag::from_edges(4, &[(1, 0), (3, 0), (2, 1), (2, 3)]).unwrap();
        let s = OracleScore::new(g.clone());
        // Scored against its topological predecessors, every variable of
        // the true DAG pays only its parent count, so the total is minus
        // the number of edges.
        assert_eq!(score_dag(&s, &g).unwrap(), -4.0);
        // A denser independence map (same graph plus b -> d) pays one more.
        let denser =
            Dag::from_edges(4, &[(1, 0), (3, 0), (2, 1), (2, 3), (1, 3)]).unwrap();
        assert_eq!(score_dag(&s, &denser).unwrap(), -5.0);
        // A graph missing a real dependence is charged at least one
        // unexplained connection, which outweighs every edge saving.
        let empty = Dag::from_edges(4, &[]).unwrap();
        assert!(score_dag(&s, &empty).unwrap() <= -5.0);
    }
}
