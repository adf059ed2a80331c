//! Grow-shrink trees: per-variable caches of grow-shrink trajectories.
//!
//! A tree's root is the empty parent set; each child extends its parent node
//! by one candidate variable, with children kept sorted by grow score. A
//! query descends along the best strictly-improving in-prefix child at every
//! node, so previously scored prefixes replay without touching the score,
//! and caches the shrink result at the stopping node.
//!
//! Caching a node's score is only sound when the score of a parent set does
//! not depend on which other variables are visible. For pool-sensitive
//! scores every query runs grow-shrink directly against its prefix instead.

use std::sync::Arc;

use crate::score::{LocalScore, ScoreError};

struct Node {
    /// Variable added by this node; usize::MAX at the root.
    var: usize,
    /// Grown set: sorted variables on the path from the root.
    grown: Vec<usize>,
    grow_score: f64,
    /// Child node ids ordered by (grow score desc, variable asc);
    /// None until first traversal expands the node.
    children: Option<Vec<u32>>,
    /// Cached shrink outcome: (final parent set, final score).
    shrink: Option<(Vec<usize>, f64)>,
}

/// A lazily expanded grow-shrink cache for one target variable.
pub struct GrowShrinkTree<S: LocalScore> {
    score: Arc<S>,
    target: usize,
    nodes: Vec<Node>,
    score_calls: u64,
}

impl<S: LocalScore> GrowShrinkTree<S> {
    /// Builds a tree rooted at the empty parent set (scores it once).
    pub fn new(score: Arc<S>, target: usize) -> Result<Self, ScoreError> {
        let root_score = score.local(target, &[])?;
        Ok(GrowShrinkTree {
            score,
            target,
            nodes: vec![Node {
                var: usize::MAX,
                grown: Vec::new(),
                grow_score: root_score,
                children: None,
                shrink: None,
            }],
            score_calls: 1,
        })
    }

    pub fn target(&self) -> usize {
        self.target
    }

    /// Number of local-score evaluations performed so far.
    pub fn score_calls(&self) -> u64 {
        self.score_calls
    }

    /// Number of cached nodes currently held (root included).
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Drops every cached node except the root, releasing the tree's
    /// memory; later queries rebuild paths on demand. Results are
    /// unaffected because a query is a deterministic function of its
    /// prefix; only the evaluation count can grow.
    pub fn clear(&mut self) {
        self.nodes.truncate(1);
        self.nodes[0].children = None;
        self.nodes[0].shrink = None;
    }

    /// Grow-shrink for `prefix` (a membership mask over all variables):
    /// returns the selected parent set (sorted) and its local score.
    pub fn query(&mut self, prefix: &[bool]) -> Result<(Vec<usize>, f64), ScoreError> {
        let p = self.score.num_vars();
        assert_eq!(prefix.len(), p, "prefix mask must cover every variable");
        if self.score.pool_sensitive() {
            return self.query_uncached(prefix);
        }
        let mut cur = 0usize;
        loop {
            self.expand(cur)?;
            let here = self.nodes[cur].grow_score;
            let mut next = None;
            for &c in self.nodes[cur].children.as_ref().expect("expanded") {
                let child = &self.nodes[c as usize];
                if child.grow_score <= here {
                    // Children are sorted by score descending: nothing
                    // further down can strictly improve.
                    break;
                }
                if prefix[child.var] {
                    next = Some(c as usize);
                    break;
                }
            }
            match next {
                Some(c) => cur = c,
                None => break,
            }
        }
        self.shrink(cur)
    }

    /// Grow-shrink evaluated directly against the prefix, for scores whose
    /// value depends on the visible pool: grow the best strictly-improving
    /// in-prefix candidate (ties to the lowest variable), then drop the
    /// best strictly-improving parent (ties to the lowest index). Nothing
    /// is cached because the scores would not transfer to other prefixes.
    fn query_uncached(&mut self, prefix: &[bool]) -> Result<(Vec<usize>, f64), ScoreError> {
        let p = self.score.num_vars();
        let mut set: Vec<usize> = Vec::new();
        let mut best = self.score.local_within(self.target, &set, prefix)?;
        self.score_calls += 1;
        loop {
            let mut pick: Option<(f64, usize)> = None;
            for u in 0..p {
                if u == self.target || !prefix[u] || set.binary_search(&u).is_ok() {
                    continue;
                }
                let mut cand = set.clone();
                let at = cand.binary_search(&u).unwrap_err();
                cand.insert(at, u);
                let s = self.score.local_within(self.target, &cand, prefix)?;
                self.score_calls += 1;
                if s > best && pick.map_or(true, |(current, _)| s > current) {
                    pick = Some((s, u));
                }
            }
            let Some((s, u)) = pick else { break };
            let at = set.binary_search(&u).unwrap_err();
            set.insert(at, u);
            best = s;
        }
        loop {
            let mut pick: Option<(f64, usize)> = None;
            for i in 0..set.len() {
                let mut cand = set.clone();
                cand.remove(i);
                let s = self.score.local_within(self.target, &cand, prefix)?;
                self.score_calls += 1;
                if s > best && pick.map_or(true, |(current, _)| s > current) {
                    pick = Some((s, i));
                }
            }
            let Some((s, i)) = pick else { break };
            set.remove(i);
            best = s;
        }
        Ok((set, best))
    }

    /// Scores all unexplored single-variable extensions of a node once.
    fn expand(&mut self, idx: usize) -> Result<(), ScoreError> {
        if self.nodes[idx].children.is_some() {
            return Ok(());
        }
        let p = self.score.num_vars();
        let grown = self.nodes[idx].grown.clone();
        let mut ids = Vec::new();
        for w in 0..p {
            if w == self.target || grown.binary_search(&w).is_ok() {
                continue;
            }
            let mut set = grown.clone();
            let at = set.binary_search(&w).unwrap_err();
            set.insert(at, w);
            let s = self.score.local(self.target, &set)?;
            self.score_calls += 1;
            self.nodes.push(Node {
                var: w,
                grown: set,
                grow_score: s,
                children: None,
                shrink: None,
            });
            ids.push((self.nodes.len() - 1) as u32);
        }
        ids.sort_by(|&a, &b| {
            let na = &self.nodes[a as usize];
            let nb = &self.nodes[b as usize];
            nb.grow_score
                .total_cmp(&na.grow_score)
                .then(na.var.cmp(&nb.var))
        });
        self.nodes[idx].children = Some(ids);
        Ok(())
    }

    /// Shrink from a node's grown set, cached at the node: repeatedly drop
    /// the parent whose removal most improves the score (strictly; ties to
    /// the lowest index) until no removal improves.
    fn shrink(&mut self, idx: usize) -> Result<(Vec<usize>, f64), ScoreError> {
        if let Some((w, s)) = &self.nodes[idx].shrink {
            return Ok((w.clone(), *s));
        }
        let mut set = self.nodes[idx].grown.clone();
        let mut best = self.nodes[idx].grow_score;
        loop {
            let mut pick: Option<(f64, usize)> = None;
            for i in 0..set.len() {
                let mut cand = set.clone();
                cand.remove(i);
                let s = self.score.local(self.target, &cand)?;
                self.score_calls += 1;
                if pick.map_or(true, |(ps, _)| s > ps) {
                    pick = Some((s, i));
                }
            }
            match pick {
                Some((s, i)) if s > best => {
                    set.remove(i);
                    best = s;
                }
                _ => break,
            }
        }
        self.nodes[idx].shrink = Some((set.clone(), best));
        Ok((set, best))
    }
}
