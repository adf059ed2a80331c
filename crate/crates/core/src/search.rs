//! Permutation search: repeated best-insertion sweeps over a variable
//! ordering, scored through a forest of grow-shrink trees, followed by
//! projection to a DAG, completion to a CPDAG, and an optional backward
//! edge-deletion pass.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::graph::{consistent_extension, find_compelled, Dag, GraphError, Pdag};
use crate::gst::GrowShrinkTree;
use crate::score::{score_dag, LocalScore, ScoreError};

/// Hard cap on full sweeps per start; exceeding it is an error rather than
/// a silent truncation, since each sweep must strictly improve the score.
pub const MAX_SWEEPS: usize = 100;

#[derive(Debug, PartialEq, thiserror::Error)]
pub enum SearchError {
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("search did not converge within {limit} sweeps")]
    TooManySweeps { limit: usize },
    #[error("invalid search configuration: {0}")]
    BadConfig(String),
}

/// A variable ordering together with its inverse (variable -> index).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    order: Vec<usize>,
    pos: Vec<usize>,
}

impl Permutation {
    pub fn identity(num_vars: usize) -> Self {
        Permutation {
            order: (0..num_vars).collect(),
            pos: (0..num_vars).collect(),
        }
    }

    /// Builds a permutation from an explicit ordering of 0..p.
    pub fn from_order(order: &[usize]) -> Result<Self, SearchError> {
        let p = order.len();
        let mut pos = vec![usize::MAX; p];
        for (i, &v) in order.iter().enumerate() {
            if v >= p || pos[v] != usize::MAX {
                return Err(SearchError::BadConfig(format!(
                    "order is not a permutation of 0..{p}"
                )));
            }
            pos[v] = i;
        }
        Ok(Permutation {
            order: order.to_vec(),
            pos,
        })
    }

    /// A uniformly random ordering drawn from `rng`.
    pub fn random<R: Rng + ?Sized>(num_vars: usize, rng: &mut R) -> Self {
        let mut order: Vec<usize> = (0..num_vars).collect();
        order.shuffle(rng);
        let mut pos = vec![0usize; num_vars];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        Permutation { order, pos }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Index of variable `v` in the ordering.
    pub fn position(&self, v: usize) -> usize {
        self.pos[v]
    }

    /// Moves variable `v` to index `i`, shifting the variables in between.
    pub fn move_to(&mut self, v: usize, i: usize) {
        let a = self.pos[v];
        if a == i {
            return;
        }
        if a < i {
            self.order[a..=i].rotate_left(1);
            for j in a..=i {
                self.pos[self.order[j]] = j;
            }
        } else {
            self.order[i..=a].rotate_right(1);
            for j in i..=a {
                self.pos[self.order[j]] = j;
            }
        }
    }
}

/// One grow-shrink tree per variable, sharing a score.
pub struct GstForest<S: LocalScore> {
    trees: Vec<GrowShrinkTree<S>>,
}

impl<S: LocalScore> GstForest<S> {
    pub fn new(score: Arc<S>) -> Result<Self, ScoreError> {
        let trees = (0..score.num_vars())
            .map(|v| GrowShrinkTree::new(Arc::clone(&score), v))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(GstForest { trees })
    }

    pub fn num_vars(&self) -> usize {
        self.trees.len()
    }

    pub fn query(&mut self, v: usize, prefix: &[bool]) -> Result<(Vec<usize>, f64), ScoreError> {
        self.trees[v].query(prefix)
    }

    /// Total local-score evaluations across all trees.
    pub fn score_calls(&self) -> u64 {
        self.trees.iter().map(|t| t.score_calls()).sum()
    }

    /// Total cached nodes across all trees.
    pub fn node_count(&self) -> usize {
        self.trees.iter().map(|t| t.node_count()).sum()
    }

    /// Clears every tree back to its root. Evaluation counters persist,
    /// so cleared work honestly shows up as repeated score calls.
    pub fn clear(&mut self) {
        for t in &mut self.trees {
            t.clear();
        }
    }
}

/// Clears the forest when its cached node count exceeds the cap.
fn enforce_node_cap<S: LocalScore>(forest: &mut GstForest<S>, cap: Option<usize>) {
    if let Some(cap) = cap {
        if forest.node_count() > cap {
            forest.clear();
        }
    }
}

fn prefix_mask(perm: &Permutation, v: usize, buf: &mut [bool]) {
    buf.fill(false);
    for &u in &perm.order()[..perm.position(v)] {
        buf[u] = true;
    }
}

fn total(vals: &[f64]) -> f64 {
    vals.iter().sum()
}

/// Sum of grow-shrink local scores of every variable given its prefix.
pub fn forest_score<S: LocalScore>(
    forest: &mut GstForest<S>,
    perm: &Permutation,
) -> Result<f64, SearchError> {
    let p = forest.num_vars();
    assert_eq!(perm.len(), p, "permutation must cover every variable");
    let mut mask = vec![false; p];
    let mut sum = vec![0.0; p];
    for v in 0..p {
        prefix_mask(perm, v, &mut mask);
        sum[v] = forest.query(v, &mask)?.1;
    }
    Ok(total(&sum))
}

/// DAG induced by the ordering: each variable keeps the parents its
/// grow-shrink query selects from the variables before it.
pub fn project<S: LocalScore>(
    forest: &mut GstForest<S>,
    perm: &Permutation,
) -> Result<Dag, SearchError> {
    let p = forest.num_vars();
    assert_eq!(perm.len(), p, "permutation must cover every variable");
    let mut mask = vec![false; p];
    let mut edges = Vec::new();
    for v in 0..p {
        prefix_mask(perm, v, &mut mask);
        let (parents, _) = forest.query(v, &mask)?;
        for w in parents {
            edges.push((w, v));
        }
    }
    Dag::from_edges(p, &edges).map_err(Into::into)
}

/// Tries every insertion index for `v` and keeps the first position whose
/// total score strictly beats everything seen so far (including the
/// starting position); otherwise `v` returns to where it began.
///
/// `vals[u]` must hold the current grow-shrink score of `u` given its
/// prefix; it is kept consistent and reflects the final ordering on return.
/// Returns whether `v` ended up at a new index.
pub fn best_move<S: LocalScore>(
    forest: &mut GstForest<S>,
    perm: &mut Permutation,
    v: usize,
    vals: &mut [f64],
) -> Result<bool, SearchError> {
    let p = forest.num_vars();
    assert_eq!(perm.len(), p, "permutation must cover every variable");
    assert_eq!(vals.len(), p, "vals must cover every variable");
    let start = perm.position(v);
    let mut best_total = total(vals);
    let mut best_index = start;
    let mut mask = vec![false; p];

    let mut refresh = |forest: &mut GstForest<S>,
                       perm: &Permutation,
                       vals: &mut [f64],
                       u: usize|
     -> Result<(), SearchError> {
        prefix_mask(perm, u, &mut mask);
        vals[u] = forest.query(u, &mask)?.1;
        Ok(())
    };

    // Walk v to the front, then swap it rightwards one slot at a time so
    // each candidate placement only changes two prefixes.
    if start != 0 {
        perm.move_to(v, 0);
        for j in 0..=start {
            let u = perm.order()[j];
            refresh(forest, perm, vals, u)?;
        }
        let t = total(vals);
        if t > best_total {
            best_total = t;
            best_index = 0;
        }
    }
    for i in 1..p {
        let w = perm.order()[i];
        perm.move_to(v, i);
        refresh(forest, perm, vals, v)?;
        refresh(forest, perm, vals, w)?;
        if i == start {
            continue;
        }
        let t = total(vals);
        if t > best_total {
            best_total = t;
            best_index = i;
        }
    }
    let end = perm.position(v);
    perm.move_to(v, best_index);
    for j in best_index..=end {
        let u = perm.order()[j];
        refresh(forest, perm, vals, u)?;
    }
    Ok(best_index != start)
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    /// Number of restarts; the best-scoring final model wins, earliest first.
    pub num_starts: usize,
    /// Seed for the deterministic stream of random initial orderings.
    pub seed: u64,
    /// Run the backward edge-deletion pass on each start's CPDAG.
    pub use_bes: bool,
    /// Explicit ordering for the first start; later starts are random.
    pub initial_order: Option<Vec<usize>>,
    /// Clear the grow-shrink forest whenever its cached node count
    /// exceeds this value; `None` leaves the cache unbounded. Capping
    /// trades repeated score evaluations for bounded memory at large
    /// variable counts and never changes the search result.
    pub gst_node_cap: Option<usize>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            num_starts: 1,
            seed: 0,
            use_bes: false,
            initial_order: None,
            gst_node_cap: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchStats {
    /// Local-score evaluations made through the grow-shrink forest.
    pub score_calls: u64,
    /// Full sweeps each start took to converge.
    pub sweeps: Vec<usize>,
    /// Per start: total score at the start and after every move attempt.
    pub trajectories: Vec<Vec<f64>>,
    /// Per start: score gain of every backward deletion that was applied
    /// (empty when the backward pass is disabled).
    pub bes_deltas: Vec<Vec<f64>>,
    /// Index of the start whose model was returned.
    pub best_start: usize,
}

#[derive(Debug, Clone)]
pub struct BossOutcome {
    pub cpdag: Pdag,
    /// Score of a consistent extension of `cpdag`.
    pub score: f64,
    pub stats: SearchStats,
}

/// Best-order score search: per start, sweep `best_move` over all
/// variables until the total score stops changing, then project the
/// ordering to a DAG and complete it to a CPDAG (optionally pruned by
/// [`bes`]). All starts share one grow-shrink forest.
pub fn boss<S: LocalScore>(score: Arc<S>, cfg: &SearchConfig) -> Result<BossOutcome, SearchError> {
    let p = score.num_vars();
    if p == 0 {
        return Err(SearchError::BadConfig("score has no variables".into()));
    }
    if cfg.num_starts == 0 {
        return Err(SearchError::BadConfig("num_starts must be at least 1".into()));
    }
    if let Some(order) = &cfg.initial_order {
        if order.len() != p {
            return Err(SearchError::BadConfig(format!(
                "initial order has {} entries but the score has {p} variables",
                order.len()
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut forest = GstForest::new(Arc::clone(&score))?;
    let mut best: Option<(usize, f64, Pdag)> = None;
    let mut sweeps_per_start = Vec::with_capacity(cfg.num_starts);
    let mut trajectories = Vec::with_capacity(cfg.num_starts);
    let mut bes_deltas = Vec::with_capacity(cfg.num_starts);

    for s in 0..cfg.num_starts {
        let mut perm = match (&cfg.initial_order, s) {
            (Some(order), 0) => Permutation::from_order(order)?,
            _ => Permutation::random(p, &mut rng),
        };

        let mut vals = vec![0.0; p];
        let mut mask = vec![false; p];
        for v in 0..p {
            prefix_mask(&perm, v, &mut mask);
            vals[v] = forest.query(v, &mask)?.1;
        }
        enforce_node_cap(&mut forest, cfg.gst_node_cap);
        let mut trajectory = vec![total(&vals)];
        let mut sweeps = 0usize;
        loop {
            if sweeps == MAX_SWEEPS {
                return Err(SearchError::TooManySweeps { limit: MAX_SWEEPS });
            }
            let before = total(&vals);
            // Visit variables in their current order; the permutation
            // mutates mid-sweep, so the visit list is snapshotted here.
            let visit = perm.order().to_vec();
            for &v in &visit {
                best_move(&mut forest, &mut perm, v, &mut vals)?;
                enforce_node_cap(&mut forest, cfg.gst_node_cap);
                trajectory.push(total(&vals));
            }
            sweeps += 1;
            if total(&vals) == before {
                break;
            }
        }

        let dag = project(&mut forest, &perm)?;
        enforce_node_cap(&mut forest, cfg.gst_node_cap);
        let mut cpdag = find_compelled(&dag, perm.order())?;
        let mut deltas = Vec::new();
        if cfg.use_bes {
            let (pruned, gains) = bes(score.as_ref(), &cpdag)?;
            cpdag = pruned;
            deltas = gains;
        }
        let extension = consistent_extension(&cpdag)?;
        let model_score = score_dag(score.as_ref(), &extension)?;
        sweeps_per_start.push(sweeps);
        trajectories.push(trajectory);
        bes_deltas.push(deltas);
        if best
            .as_ref()
            .map_or(true, |(_, best_score, _)| model_score > *best_score)
        {
            best = Some((s, model_score, cpdag));
        }
    }

    let (best_start, score_value, cpdag) = best.expect("at least one start ran");
    let score_calls = forest.score_calls();
    Ok(BossOutcome {
        cpdag,
        score: score_value,
        stats: SearchStats {
            score_calls,
            sweeps: sweeps_per_start,
            trajectories,
            bes_deltas,
            best_start,
        },
    })
}

/// One candidate deletion for the backward pass.
struct Delete {
    x: usize,
    y: usize,
    h: Vec<usize>,
}

/// Score of an equivalence class: the score of its deterministic
/// consistent extension.
fn class_score<S: LocalScore + ?Sized>(score: &S, g: &Pdag) -> Result<f64, SearchError> {
    Ok(score_dag(score, &consistent_extension(g)?)?)
}

/// Re-completes a partially directed pattern to the equivalence class of
/// one of its consistent extensions.
fn recomplete(g: &Pdag) -> Result<Pdag, SearchError> {
    let dag = consistent_extension(g)?;
    let order = dag.topological_order();
    Ok(find_compelled(&dag, &order)?)
}

/// Backward edge-deletion pass over equivalence classes: repeatedly apply
/// the valid single-edge deletion whose re-completed class scores highest,
/// as long as that strictly improves on the current class's score. Returns
/// the pruned class and the score gain of each applied deletion, in order.
pub fn bes<S: LocalScore + ?Sized>(
    score: &S,
    cpdag: &Pdag,
) -> Result<(Pdag, Vec<f64>), SearchError> {
    let mut g = cpdag.clone();
    let mut current = class_score(score, &g)?;
    let mut gains = Vec::new();
    loop {
        match best_delete(score, &g)? {
            Some((class, class_value)) if class_value > current => {
                gains.push(class_value - current);
                g = class;
                current = class_value;
            }
            _ => break,
        }
    }
    Ok((g, gains))
}

/// Scans every edge, deletion direction, and valid collider set; applies
/// each candidate to a copy, re-completes it, and keeps the candidate
/// whose class scores highest. Ties keep the earliest candidate in a
/// fixed deterministic enumeration.
fn best_delete<S: LocalScore + ?Sized>(
    score: &S,
    g: &Pdag,
) -> Result<Option<(Pdag, f64)>, SearchError> {
    let mut best: Option<(Pdag, f64)> = None;
    let mut consider = |x: usize, y: usize| -> Result<(), SearchError> {
        for d in deletions(g, x, y) {
            let mut pattern = g.clone();
            apply_delete(&mut pattern, &d);
            let class = recomplete(&pattern)?;
            let value = class_score(score, &class)?;
            if best.as_ref().map_or(true, |(_, b)| value > *b) {
                best = Some((class, value));
            }
        }
        Ok(())
    };
    for (x, y) in g.directed_edges() {
        consider(x, y)?;
    }
    for (a, b) in g.undirected_edges() {
        consider(a, b)?;
        consider(b, a)?;
    }
    Ok(best)
}

/// All valid deletions of the edge between `x` and `y` (removing it from
/// `y`'s side), one per subset H of the undirected neighbors of `y` that
/// are adjacent to `x`, valid when the kept ones form a clique.
fn deletions(g: &Pdag, x: usize, y: usize) -> Vec<Delete> {
    let na: Vec<usize> = g
        .neighbors(y)
        .iter()
        .copied()
        .filter(|&u| g.adjacent(u, x))
        .collect();
    let mut out = Vec::new();
    for bits in 0u64..(1u64 << na.len()) {
        let kept: Vec<usize> = (0..na.len())
            .filter(|&k| bits & (1 << k) == 0)
            .map(|k| na[k])
            .collect();
        if !is_clique(g, &kept) {
            continue;
        }
        let h: Vec<usize> = (0..na.len())
            .filter(|&k| bits & (1 << k) != 0)
            .map(|k| na[k])
            .collect();
        out.push(Delete { x, y, h });
    }
    out
}

fn is_clique(g: &Pdag, vars: &[usize]) -> bool {
    for (i, &a) in vars.iter().enumerate() {
        for &b in &vars[i + 1..] {
            if !g.adjacent(a, b) {
                return false;
            }
        }
    }
    true
}

/// Removes the x~y edge and directs y->h (and x->h where undirected)
/// for every h in the chosen collider set.
fn apply_delete(g: &mut Pdag, d: &Delete) {
    g.remove_between(d.x, d.y);
    for &h in &d.h {
        g.remove_between(d.y, h);
        g.add_directed(d.y, h).expect("re-adding a removed edge");
        if g.has_undirected(d.x, h) {
            g.remove_between(d.x, h);
            g.add_directed(d.x, h).expect("re-adding a removed edge");
        }
    }
}
