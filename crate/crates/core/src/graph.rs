//! Directed and partially directed acyclic graphs over dense variable indices.
//!
//! `Dag` maintains acyclicity as a construction invariant; `Pdag` holds the
//! mixed directed/undirected output of equivalence-class operations. The
//! compelled-edge labelling ([`find_compelled`]) maps a DAG to the CPDAG of
//! its Markov equivalence class, and [`consistent_extension`] goes back from
//! a partially directed graph to one of its DAG members.

use std::collections::BTreeSet;

use thiserror::Error;

/// Errors from graph construction and equivalence-class operations.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {0} out of range for graph with {1} variables")]
    IndexOutOfRange(usize, usize),
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge between {0} and {1}")]
    DuplicateEdge(usize, usize),
    #[error("edge {0} -> {1} would create a directed cycle")]
    WouldCycle(usize, usize),
    #[error("supplied order is not a topological order of the graph")]
    NotTopological,
    #[error("graphs have different variable counts: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("partially directed graph admits no consistent extension")]
    NoConsistentExtension,
}

/// Checks whether a directed edge list over `num_vars` vertices is acyclic.
pub fn is_acyclic(num_vars: usize, edges: &[(usize, usize)]) -> bool {
    let mut indeg = vec![0usize; num_vars];
    let mut children = vec![Vec::new(); num_vars];
    for &(u, v) in edges {
        indeg[v] += 1;
        children[u].push(v);
    }
    let mut ready: Vec<usize> = (0..num_vars).filter(|&v| indeg[v] == 0).collect();
    let mut seen = 0;
    while let Some(v) = ready.pop() {
        seen += 1;
        for &w in &children[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                ready.push(w);
            }
        }
    }
    seen == num_vars
}

/// A directed acyclic graph; edges are (parent, child) pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dag {
    parents: Vec<BTreeSet<usize>>,
    children: Vec<BTreeSet<usize>>,
}

impl Dag {
    /// An edgeless graph on `num_vars` variables.
    pub fn new(num_vars: usize) -> Self {
        Dag {
            parents: vec![BTreeSet::new(); num_vars],
            children: vec![BTreeSet::new(); num_vars],
        }
    }

    /// Builds a graph from an edge list, rejecting cycles and duplicates.
    pub fn from_edges(num_vars: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Dag::new(num_vars);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn num_vars(&self) -> usize {
        self.parents.len()
    }

    pub fn num_edges(&self) -> usize {
        self.parents.iter().map(|s| s.len()).sum()
    }

    fn check_index(&self, v: usize) -> Result<(), GraphError> {
        if v >= self.num_vars() {
            Err(GraphError::IndexOutOfRange(v, self.num_vars()))
        } else {
            Ok(())
        }
    }

    /// Adds `parent -> child`, rejecting self-loops, duplicates, and any edge
    /// that would close a directed cycle.
    pub fn add_edge(&mut self, parent: usize, child: usize) -> Result<(), GraphError> {
        self.check_index(parent)?;
        self.check_index(child)?;
        if parent == child {
            return Err(GraphError::SelfLoop(parent));
        }
        if self.parents[child].contains(&parent) {
            return Err(GraphError::DuplicateEdge(parent, child));
        }
        if self.reaches(child, parent) {
            return Err(GraphError::WouldCycle(parent, child));
        }
        self.parents[child].insert(parent);
        self.children[parent].insert(child);
        Ok(())
    }

    /// True when a directed path from `from` to `to` exists.
    fn reaches(&self, from: usize, to: usize) -> bool {
        if from == to {
            return true;
        }
        let mut seen = vec![false; self.num_vars()];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(v) = stack.pop() {
            for &w in &self.children[v] {
                if w == to {
                    return true;
                }
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        false
    }

    pub fn has_edge(&self, parent: usize, child: usize) -> bool {
        child < self.num_vars() && self.parents[child].contains(&parent)
    }

    /// Parent set of `v`.
    ///
    /// Panics if `v` is out of range, like slice indexing.
    pub fn parents(&self, v: usize) -> &BTreeSet<usize> {
        assert!(v < self.num_vars(), "vertex {v} out of range");
        &self.parents[v]
    }

    /// Child set of `v`. Panics if `v` is out of range.
    pub fn children(&self, v: usize) -> &BTreeSet<usize> {
        assert!(v < self.num_vars(), "vertex {v} out of range");
        &self.children[v]
    }

    /// All edges as (parent, child), ascending.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.num_edges());
        for (u, ch) in self.children.iter().enumerate() {
            for &v in ch {
                out.push((u, v));
            }
        }
        out.sort_unstable();
        out
    }

    /// A topological order, lowest index first among ready vertices.
    pub fn topological_order(&self) -> Vec<usize> {
        let mut indeg: Vec<usize> = self.parents.iter().map(|s| s.len()).collect();
        let mut ready: BTreeSet<usize> =
            (0..self.num_vars()).filter(|&v| indeg[v] == 0).collect();
        let mut out = Vec::with_capacity(self.num_vars());
        while let Some(&v) = ready.iter().next() {
            ready.remove(&v);
            out.push(v);
            for &w in &self.children[v] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    ready.insert(w);
                }
            }
        }
        debug_assert_eq!(out.len(), self.num_vars());
        out
    }
}

/// A partially directed graph: directed edges plus undirected adjacencies,
/// with each vertex pair linked by at most one edge of either kind.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pdag {
    dir_parents: Vec<BTreeSet<usize>>,
    dir_children: Vec<BTreeSet<usize>>,
    undirected: Vec<BTreeSet<usize>>,
}

impl Pdag {
    pub fn new(num_vars: usize) -> Self {
        Pdag {
            dir_parents: vec![BTreeSet::new(); num_vars],
            dir_children: vec![BTreeSet::new(); num_vars],
            undirected: vec![BTreeSet::new(); num_vars],
        }
    }

    /// Views a DAG as a fully directed Pdag.
    pub fn from_dag(g: &Dag) -> Self {
        let mut out = Pdag::new(g.num_vars());
        for (u, v) in g.edges() {
            out.add_directed(u, v).expect("DAG edges are valid");
        }
        out
    }

    pub fn num_vars(&self) -> usize {
        self.dir_parents.len()
    }

    pub fn num_edges(&self) -> usize {
        let dir: usize = self.dir_parents.iter().map(|s| s.len()).sum();
        let und: usize = self.undirected.iter().map(|s| s.len()).sum();
        dir + und / 2
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<(), GraphError> {
        let p = self.num_vars();
        if a >= p {
            return Err(GraphError::IndexOutOfRange(a, p));
        }
        if b >= p {
            return Err(GraphError::IndexOutOfRange(b, p));
        }
        if a == b {
            return Err(GraphError::SelfLoop(a));
        }
        if self.adjacent(a, b) {
            return Err(GraphError::DuplicateEdge(a, b));
        }
        Ok(())
    }

    pub fn add_directed(&mut self, from: usize, to: usize) -> Result<(), GraphError> {
        self.check_pair(from, to)?;
        self.dir_children[from].insert(to);
        self.dir_parents[to].insert(from);
        Ok(())
    }

    pub fn add_undirected(&mut self, a: usize, b: usize) -> Result<(), GraphError> {
        self.check_pair(a, b)?;
        self.undirected[a].insert(b);
        self.undirected[b].insert(a);
        Ok(())
    }

    /// Removes whatever edge joins `a` and `b`; true if one existed.
    pub fn remove_between(&mut self, a: usize, b: usize) -> bool {
        let mut hit = false;
        hit |= self.dir_children[a].remove(&b) && self.dir_parents[b].remove(&a);
        hit |= self.dir_children[b].remove(&a) && self.dir_parents[a].remove(&b);
        hit |= self.undirected[a].remove(&b) && self.undirected[b].remove(&a);
        hit
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.dir_children[a].contains(&b)
            || self.dir_children[b].contains(&a)
            || self.undirected[a].contains(&b)
    }

    pub fn has_directed(&self, from: usize, to: usize) -> bool {
        self.dir_children[from].contains(&to)
    }

    pub fn has_undirected(&self, a: usize, b: usize) -> bool {
        self.undirected[a].contains(&b)
    }

    /// Directed parents of `v`. Panics if `v` is out of range.
    pub fn parents(&self, v: usize) -> &BTreeSet<usize> {
        assert!(v < self.num_vars(), "vertex {v} out of range");
        &self.dir_parents[v]
    }

    /// Undirected neighbours of `v`. Panics if `v` is out of range.
    pub fn neighbors(&self, v: usize) -> &BTreeSet<usize> {
        assert!(v < self.num_vars(), "vertex {v} out of range");
        &self.undirected[v]
    }

    /// Directed edges as (from, to), ascending.
    pub fn directed_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, ch) in self.dir_children.iter().enumerate() {
            for &v in ch {
                out.push((u, v));
            }
        }
        out.sort_unstable();
        out
    }

    /// Undirected edges as (low, high), ascending.
    pub fn undirected_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, nb) in self.undirected.iter().enumerate() {
            for &v in nb {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Structural equality of two partially directed graphs.
pub fn cpdag_equal(x: &Pdag, y: &Pdag) -> bool {
    x.num_vars() == y.num_vars()
        && x.directed_edges() == y.directed_edges()
        && x.undirected_edges() == y.undirected_edges()
}

/// Labels the compelled (direction-forced) edges of `g` and returns the
/// CPDAG of its Markov equivalence class: compelled edges stay directed,
/// reversible edges become undirected.
///
/// `order` must be a topological order of `g`; edges are processed in the
/// order it induces ((child position ascending, parent position descending)),
/// which fixes the iteration deterministically. The output does not depend on
/// which topological order is supplied.
pub fn find_compelled(g: &Dag, order: &[usize]) -> Result<Pdag, GraphError> {
    let p = g.num_vars();
    if order.len() != p {
        return Err(GraphError::SizeMismatch(order.len(), p));
    }
    let mut pos = vec![usize::MAX; p];
    for (i, &v) in order.iter().enumerate() {
        if v >= p || pos[v] != usize::MAX {
            return Err(GraphError::NotTopological);
        }
        pos[v] = i;
    }
    let mut edges = g.edges();
    if edges.iter().any(|&(u, v)| pos[u] >= pos[v]) {
        return Err(GraphError::NotTopological);
    }
    // Processing order: child position ascending, then parent position
    // descending, so edges into earlier vertices come first and, within a
    // vertex, edges from later parents come first.
    edges.sort_unstable_by_key(|&(u, v)| (pos[v], usize::MAX - pos[u]));

    #[derive(Clone, Copy, PartialEq)]
    enum Label {
        Unknown,
        Compelled,
        Reversible,
    }
    let index_of: std::collections::BTreeMap<(usize, usize), usize> = edges
        .iter()
        .enumerate()
        .map(|(i, &e)| (e, i))
        .collect();
    let mut label = vec![Label::Unknown; edges.len()];
    for e in 0..edges.len() {
        if label[e] != Label::Unknown {
            continue;
        }
        let (x, y) = edges[e];
        let mut decided = false;
        for &w in g.parents(x) {
            if label[index_of[&(w, x)]] != Label::Compelled {
                continue;
            }
            if !g.parents(y).contains(&w) {
                // w -> x compelled and w not a parent of y: every unknown
                // edge into y is compelled, including x -> y itself.
                for &z in g.parents(y) {
                    let zy = index_of[&(z, y)];
                    if label[zy] == Label::Unknown {
                        label[zy] = Label::Compelled;
                    }
                }
                decided = true;
                break;
            } else {
                label[index_of[&(w, y)]] = Label::Compelled;
            }
        }
        if decided {
            continue;
        }
        let external = g
            .parents(y)
            .iter()
            .any(|&z| z != x && !g.parents(x).contains(&z));
        let mark = if external {
            Label::Compelled
        } else {
            Label::Reversible
        };
        for &z in g.parents(y) {
            let zy = index_of[&(z, y)];
            if label[zy] == Label::Unknown {
                label[zy] = mark;
            }
        }
    }

    let mut out = Pdag::new(p);
    for (i, &(u, v)) in edges.iter().enumerate() {
        match label[i] {
            Label::Compelled => out.add_directed(u, v)?,
            Label::Reversible => out.add_undirected(u, v)?,
            Label::Unknown => unreachable!("all edges are labelled"),
        }
    }
    Ok(out)
}

/// Orients a partially directed graph into a DAG that preserves all directed
/// edges and the skeleton while creating no new v-structures, by repeatedly
/// extracting a potential sink whose undirected neighbours form a clique with
/// its full adjacency set. Lowest-index candidates are taken first, making
/// the extension deterministic.
pub fn consistent_extension(g: &Pdag) -> Result<Dag, GraphError> {
    let p = g.num_vars();
    let mut dir_children: Vec<BTreeSet<usize>> =
        (0..p).map(|v| g.dir_children[v].clone()).collect();
    let mut dir_parents: Vec<BTreeSet<usize>> =
        (0..p).map(|v| g.dir_parents[v].clone()).collect();
    let mut und: Vec<BTreeSet<usize>> = (0..p).map(|v| g.undirected[v].clone()).collect();
    let mut alive: BTreeSet<usize> = (0..p).collect();
    let mut out = Dag::new(p);
    for (u, v) in g.directed_edges() {
        out.add_edge(u, v).map_err(|_| GraphError::NoConsistentExtension)?;
    }
    while !alive.is_empty() {
        let adjacent = |a: usize, b: usize,
                        dc: &Vec<BTreeSet<usize>>,
                        un: &Vec<BTreeSet<usize>>| {
            dc[a].contains(&b) || dc[b].contains(&a) || un[a].contains(&b)
        };
        let mut pick = None;
        for &v in &alive {
            if !dir_children[v].is_empty() {
                continue; // not a sink
            }
            let mut adj_v: BTreeSet<usize> = und[v].iter().copied().collect();
            adj_v.extend(dir_parents[v].iter().copied());
            let ok = und[v].iter().all(|&w| {
                adj_v
                    .iter()
                    .all(|&o| o == w || adjacent(w, o, &dir_children, &und))
            });
            if ok {
                pick = Some(v);
                break;
            }
        }
        let v = pick.ok_or(GraphError::NoConsistentExtension)?;
        for w in und[v].clone() {
            out.add_edge(w, v).map_err(|_| GraphError::NoConsistentExtension)?;
            und[w].remove(&v);
        }
        und[v].clear();
        for w in dir_parents[v].clone() {
            dir_children[w].remove(&v);
        }
        for w in dir_children[v].clone() {
            dir_parents[w].remove(&v);
        }
        dir_parents[v].clear();
        alive.remove(&v);
    }
    Ok(out)
}

/// True when `x` and `y` are d-connected given the conditioning set `given`,
/// via reachability with collider openings (a small-instance oracle utility,
/// not a bulk query engine).
pub fn d_connected(g: &Dag, x: usize, y: usize, given: &[usize]) -> bool {
    let p = g.num_vars();
    assert!(x < p && y < p, "vertex out of range");
    if x == y {
        return true;
    }
    let mut in_z = vec![false; p];
    for &z in given {
        assert!(z < p, "conditioning vertex out of range");
        in_z[z] = true;
    }
    // Ancestors of the conditioning set open colliders.
    let mut an_z = in_z.clone();
    let mut stack: Vec<usize> = given.to_vec();
    while let Some(v) = stack.pop() {
        for &w in g.parents(v) {
            if !an_z[w] {
                an_z[w] = true;
                stack.push(w);
            }
        }
    }
    // States: (vertex, entered-from-child?). Starting state behaves like
    // having entered from a child.
    let mut seen_up = vec![false; p];
    let mut seen_down = vec![false; p];
    let mut states = vec![(x, true)];
    seen_up[x] = true;
    while let Some((v, up)) = states.pop() {
        if v == y {
            return true;
        }
        if up && !in_z[v] {
            for &w in g.parents(v) {
                if !seen_up[w] {
                    seen_up[w] = true;
                    states.push((w, true));
                }
            }
            for &w in g.children(v) {
                if !seen_down[w] {
                    seen_down[w] = true;
                    states.push((w, false));
                }
            }
        } else if !up {
            if !in_z[v] {
                for &w in g.children(v) {
                    if !seen_down[w] {
                        seen_down[w] = true;
                        states.push((w, false));
                    }
                }
            }
            if an_z[v] {
                for &w in g.parents(v) {
                    if !seen_up[w] {
                        seen_up[w] = true;
                        states.push((w, true));
                    }
                }
            }
        }
    }
    false
}
