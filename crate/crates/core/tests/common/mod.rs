//! Independent oracles for the integration tests. Everything here is
//! implemented from first principles with different algorithms than the
//! library: d-separation via moralized ancestral graphs (the library uses
//! reachability with collider states), equivalence classes via brute-force
//! orientation enumeration, grow-shrink without any cache, and BIC via
//! least squares on the raw data rather than covariance submatrices.

#![allow(dead_code)]

use boss_core::{is_acyclic, Dag, DataMatrix, LocalScore, Pdag, Permutation};
use rand::Rng;

/// d-separation of `x` and `y` given `z`, decided on the moralized
/// subgraph over the ancestors of {x, y} ∪ z.
pub fn dsep_moral(g: &Dag, x: usize, y: usize, z: &[usize]) -> bool {
    let p = g.num_vars();
    let mut ancestral = vec![false; p];
    let mut stack: Vec<usize> = vec![x, y];
    stack.extend_from_slice(z);
    while let Some(v) = stack.pop() {
        if ancestral[v] {
            continue;
        }
        ancestral[v] = true;
        for &u in g.parents(v) {
            stack.push(u);
        }
    }

    let mut adjacent = vec![vec![false; p]; p];
    let link = |a: usize, b: usize, adjacent: &mut Vec<Vec<bool>>| {
        adjacent[a][b] = true;
        adjacent[b][a] = true;
    };
    for v in 0..p {
        if !ancestral[v] {
            continue;
        }
        let parents: Vec<usize> = g.parents(v).iter().copied().collect();
        for &u in &parents {
            link(u, v, &mut adjacent);
        }
        for (i, &a) in parents.iter().enumerate() {
            for &b in &parents[i + 1..] {
                link(a, b, &mut adjacent);
            }
        }
    }

    let mut closed = vec![false; p];
    for &v in z {
        closed[v] = true;
    }
    let mut seen = vec![false; p];
    let mut queue = vec![x];
    seen[x] = true;
    while let Some(v) = queue.pop() {
        if v == y {
            return false;
        }
        for w in 0..p {
            if adjacent[v][w] && !seen[w] && !closed[w] {
                seen[w] = true;
                queue.push(w);
            }
        }
    }
    true
}

/// Visits every (x, y, z) query with x < y and z ⊆ V \ {x, y} in a fixed
/// order, feeding `f` the query and stopping early if `f` returns false.
fn for_each_query(p: usize, mut f: impl FnMut(usize, usize, &[usize]) -> bool) -> bool {
    for x in 0..p {
        for y in x + 1..p {
            for mask in 0u32..(1 << p) {
                if mask & (1 << x) != 0 || mask & (1 << y) != 0 {
                    continue;
                }
                let z: Vec<usize> = (0..p).filter(|&v| mask & (1 << v) != 0).collect();
                if !f(x, y, &z) {
                    return false;
                }
            }
        }
    }
    true
}

/// All d-separation answers of `g` in the fixed query order.
pub fn dsep_signature(g: &Dag) -> Vec<bool> {
    let mut sig = Vec::new();
    for_each_query(g.num_vars(), |x, y, z| {
        sig.push(dsep_moral(g, x, y, z));
        true
    });
    sig
}

fn matches_signature(g: &Dag, sig: &[bool]) -> bool {
    let mut i = 0;
    for_each_query(g.num_vars(), |x, y, z| {
        let same = dsep_moral(g, x, y, z) == sig[i];
        i += 1;
        same
    })
}

/// Brute-force equivalence class of `truth`: every acyclic orientation of
/// its skeleton with identical d-separations, unioned into one partially
/// directed graph (directions kept only where all members agree).
pub fn mec_cpdag(truth: &Dag) -> Pdag {
    let p = truth.num_vars();
    let skeleton: Vec<(usize, usize)> = truth.edges();
    let m = skeleton.len();
    assert!(m <= 20, "orientation enumeration needs a small graph");
    let sig = dsep_signature(truth);
    let mut forward_seen = vec![false; m];
    let mut backward_seen = vec![false; m];
    let mut members = 0u64;
    for mask in 0u64..(1 << m) {
        let edges: Vec<(usize, usize)> = skeleton
            .iter()
            .enumerate()
            .map(|(k, &(u, v))| if mask >> k & 1 == 0 { (u, v) } else { (v, u) })
            .collect();
        if !is_acyclic(p, &edges) {
            continue;
        }
        let candidate = Dag::from_edges(p, &edges).expect("acyclic orientation");
        if !matches_signature(&candidate, &sig) {
            continue;
        }
        members += 1;
        for k in 0..m {
            if mask >> k & 1 == 0 {
                forward_seen[k] = true;
            } else {
                backward_seen[k] = true;
            }
        }
    }
    assert!(members >= 1, "the true DAG itself must match");
    let mut class = Pdag::new(p);
    for (k, &(u, v)) in skeleton.iter().enumerate() {
        match (forward_seen[k], backward_seen[k]) {
            (true, true) => class.add_undirected(u, v).expect("fresh edge"),
            (true, false) => class.add_directed(u, v).expect("fresh edge"),
            (false, true) => class.add_directed(v, u).expect("fresh edge"),
            (false, false) => unreachable!("edge must appear in some member"),
        }
    }
    class
}

/// Grow-shrink with no cache: greedily add the strictly best-scoring
/// in-prefix candidate, then greedily remove parents while that strictly
/// helps, ties to the lowest variable index. Returns the selected set,
/// its score, and the number of score evaluations.
pub fn grow_shrink_direct<S: LocalScore + ?Sized>(
    score: &S,
    target: usize,
    prefix: &[bool],
) -> (Vec<usize>, f64, u64) {
    let p = score.num_vars();
    let mut calls = 0u64;
    let mut set: Vec<usize> = Vec::new();
    let mut best = score
        .local_within(target, &set, prefix)
        .expect("scorable target");
    calls += 1;
    loop {
        let mut pick: Option<(f64, usize)> = None;
        for w in 0..p {
            if w == target || !prefix[w] || set.binary_search(&w).is_ok() {
                continue;
            }
            let mut extended = set.clone();
            let at = extended.binary_search(&w).unwrap_err();
            extended.insert(at, w);
            let s = score
                .local_within(target, &extended, prefix)
                .expect("scorable set");
            calls += 1;
            if s > best && pick.map_or(true, |(current, _)| s > current) {
                pick = Some((s, w));
            }
        }
        let Some((s, w)) = pick else { break };
        let at = set.binary_search(&w).unwrap_err();
        set.insert(at, w);
        best = s;
    }
    loop {
        let mut pick: Option<(f64, usize)> = None;
        for i in 0..set.len() {
            let mut reduced = set.clone();
            reduced.remove(i);
            let s = score
                .local_within(target, &reduced, prefix)
                .expect("scorable set");
            calls += 1;
            if s > best && pick.map_or(true, |(current, _)| s > current) {
                pick = Some((s, i));
            }
        }
        let Some((s, i)) = pick else { break };
        set.remove(i);
        best = s;
    }
    (set, best, calls)
}

/// Gaussian BIC from the raw data by explicit least squares with an
/// intercept: modified Gram-Schmidt orthogonalization of the regressor
/// columns, residual variance with 1/n, and the same penalized form the
/// library uses.
pub fn ols_bic(data: &DataMatrix, v: usize, parents: &[usize], penalty: f64) -> f64 {
    let n = data.num_rows();
    let nf = n as f64;
    let mut regressors: Vec<Vec<f64>> = Vec::with_capacity(parents.len() + 1);
    regressors.push(vec![1.0; n]);
    for &u in parents {
        regressors.push(data.column(u));
    }
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for mut column in regressors {
        for _ in 0..2 {
            for b in &basis {
                let d = dot(&column, b);
                for (c, &bb) in column.iter_mut().zip(b) {
                    *c -= d * bb;
                }
            }
        }
        let norm = dot(&column, &column).sqrt();
        if norm > 1e-9 * nf.sqrt() {
            for c in &mut column {
                *c /= norm;
            }
            basis.push(column);
        }
    }
    let mut residual = data.column(v);
    for _ in 0..2 {
        for b in &basis {
            let d = dot(&residual, b);
            for (r, &bb) in residual.iter_mut().zip(b) {
                *r -= d * bb;
            }
        }
    }
    let sigma2 = dot(&residual, &residual) / nf;
    -(nf / 2.0) * sigma2.ln() - (penalty / 2.0) * (parents.len() + 1) as f64 * nf.ln()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Random DAG over a random causal order: each position pair is an edge
/// independently with probability `edge_prob`.
pub fn random_order_dag<R: Rng + ?Sized>(p: usize, edge_prob: f64, rng: &mut R) -> Dag {
    let order = Permutation::random(p, rng);
    let mut edges = Vec::new();
    for i in 0..p {
        for j in i + 1..p {
            if rng.gen_bool(edge_prob) {
                edges.push((order.order()[i], order.order()[j]));
            }
        }
    }
    Dag::from_edges(p, &edges).expect("order-consistent edges are acyclic")
}

/// Every DAG on `p` labeled vertices (each vertex pair absent, forward,
/// or backward; cyclic assignments skipped). Only feasible for tiny `p`.
pub fn all_dags(p: usize) -> Vec<Dag> {
    let pairs: Vec<(usize, usize)> = (0..p)
        .flat_map(|a| ((a + 1)..p).map(move |b| (a, b)))
        .collect();
    let mut out = Vec::new();
    let mut states = vec![0u8; pairs.len()];
    loop {
        let edges: Vec<(usize, usize)> = pairs
            .iter()
            .zip(&states)
            .filter_map(|(&(a, b), &s)| match s {
                0 => None,
                1 => Some((a, b)),
                _ => Some((b, a)),
            })
            .collect();
        if is_acyclic(p, &edges) {
            out.push(Dag::from_edges(p, &edges).expect("checked acyclic"));
        }
        let mut k = 0;
        loop {
            if k == states.len() {
                return out;
            }
            states[k] += 1;
            if states[k] < 3 {
                break;
            }
            states[k] = 0;
            k += 1;
        }
    }
}

/// Linear-interpolated percentile (values need not be pre-sorted).
pub fn percentile(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = q / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}
