//! Synthetic benchmarks: random DAGs (uniform and preferential-attachment
//! flavors), linear structural-equation sampling with several noise
//! families, per-column standardization, and column shuffling.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp, Gumbel, StandardNormal};

use crate::data::DataMatrix;
use crate::graph::{Dag, GraphError};
use crate::search::Permutation;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Mixes a base seed with an index into a decorrelated 64-bit seed
/// (splitmix64 finalizer), so repetition streams never overlap.
pub fn mix_seed(base: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// (simulation seed, search seed) for one repetition of a benchmark run.
pub fn rep_seeds(base: u64, rep: u64) -> (u64, u64) {
    (mix_seed(base, 2 * rep), mix_seed(base, 2 * rep + 1))
}

#[derive(Debug, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid simulation configuration: {0}")]
    BadConfig(String),
    #[error("sampled column {0} has zero variance and cannot be standardized")]
    DegenerateColumn(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFamily {
    ErdosRenyi,
    ScaleFree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseFamily {
    Gaussian,
    Gumbel,
    Exponential,
}

fn edge_budget(num_vars: usize, avg_degree: f64) -> Result<usize, SimError> {
    if num_vars == 0 {
        return Err(SimError::BadConfig("graph needs at least one variable".into()));
    }
    if !(avg_degree >= 0.0) {
        return Err(SimError::BadConfig(format!(
            "average degree must be non-negative, got {avg_degree}"
        )));
    }
    let m = (avg_degree * num_vars as f64 / 2.0).round() as usize;
    let max = num_vars * (num_vars - 1) / 2;
    if m > max {
        return Err(SimError::BadConfig(format!(
            "average degree {avg_degree} asks for {m} edges but {num_vars} variables admit at most {max}"
        )));
    }
    Ok(m)
}

/// Uniform random DAG: exactly round(avg_degree * p / 2) distinct ordered
/// pairs, drawn uniformly by rejection and oriented from the earlier to
/// the later variable under `order`.
pub fn er_dag<R: Rng + ?Sized>(
    num_vars: usize,
    order: &Permutation,
    avg_degree: f64,
    rng: &mut R,
) -> Result<Dag, SimError> {
    assert_eq!(order.len(), num_vars, "order must cover every variable");
    let m = edge_budget(num_vars, avg_degree)?;
    let mut chosen = std::collections::BTreeSet::new();
    while chosen.len() < m {
        let a = rng.gen_range(0..num_vars);
        let b = rng.gen_range(0..num_vars);
        if a == b {
            continue;
        }
        let pair = (a.min(b), a.max(b));
        chosen.insert(pair);
    }
    let edges: Vec<(usize, usize)> = chosen
        .into_iter()
        .map(|(i, j)| (order.order()[i], order.order()[j]))
        .collect();
    Ok(Dag::from_edges(num_vars, &edges)?)
}

/// Preferential-attachment DAG: draws a hidden uniform DAG for the parent
/// counts, then re-draws each variable's parents from its predecessors
/// with integer weights 1 + (current out-degree). Returns the new graph
/// and the hidden one (their per-variable parent counts match).
pub fn sf_dag_with_hidden<R: Rng + ?Sized>(
    num_vars: usize,
    order: &Permutation,
    avg_degree: f64,
    rng: &mut R,
) -> Result<(Dag, Dag), SimError> {
    let hidden = er_dag(num_vars, order, avg_degree, rng)?;
    let mut out_degree = vec![0u64; num_vars];
    let mut edges = Vec::with_capacity(hidden.num_edges());
    for t in 1..num_vars {
        let v = order.order()[t];
        let want = hidden.parents(v).len();
        let mut pool: Vec<usize> = order.order()[..t].to_vec();
        for _ in 0..want {
            let total: u64 = pool.iter().map(|&u| 1 + out_degree[u]).sum();
            let mut x = rng.gen_range(0..total);
            let mut pick = pool.len() - 1;
            for (k, &u) in pool.iter().enumerate() {
                let w = 1 + out_degree[u];
                if x < w {
                    pick = k;
                    break;
                }
                x -= w;
            }
            let u = pool.remove(pick);
            out_degree[u] += 1;
            edges.push((u, v));
        }
    }
    let sf = Dag::from_edges(num_vars, &edges)?;
    Ok((sf, hidden))
}

pub fn sf_dag<R: Rng + ?Sized>(
    num_vars: usize,
    order: &Permutation,
    avg_degree: f64,
    rng: &mut R,
) -> Result<Dag, SimError> {
    Ok(sf_dag_with_hidden(num_vars, order, avg_degree, rng)?.0)
}

/// One unit-variance, zero-mean noise draw from the given family.
pub fn noise_draw<R: Rng + ?Sized>(family: NoiseFamily, rng: &mut R) -> f64 {
    match family {
        NoiseFamily::Gaussian => StandardNormal.sample(rng),
        NoiseFamily::Gumbel => {
            let g = Gumbel::new(0.0, 1.0).expect("unit Gumbel is valid");
            let x: f64 = g.sample(rng);
            (x - EULER_GAMMA) / (std::f64::consts::PI / 6.0_f64.sqrt())
        }
        NoiseFamily::Exponential => {
            let e = Exp::new(1.0).expect("unit exponential is valid");
            let x: f64 = e.sample(rng);
            x - 1.0
        }
    }
}

/// A sampled linear structural-equation model over standardized columns.
#[derive(Debug, Clone)]
pub struct SemModel {
    num_vars: usize,
    topo_order: Vec<usize>,
    /// Per variable: (parent, coefficient), sorted by parent.
    coefficients: Vec<Vec<(usize, f64)>>,
    sigmas: Vec<f64>,
    noise: NoiseFamily,
}

impl SemModel {
    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn topological_order(&self) -> &[usize] {
        &self.topo_order
    }

    pub fn coefficients(&self, v: usize) -> &[(usize, f64)] {
        &self.coefficients[v]
    }

    pub fn sigma(&self, v: usize) -> f64 {
        self.sigmas[v]
    }

    pub fn noise(&self) -> NoiseFamily {
        self.noise
    }

    /// Population covariance (= correlation) matrix of the model, row
    /// major, accounting for each column being standardized before its
    /// children are generated.
    pub fn implied_covariance(&self) -> Vec<f64> {
        let p = self.num_vars;
        let mut c = vec![0.0; p * p];
        for &v in &self.topo_order {
            let coef = &self.coefficients[v];
            let mut var_raw = self.sigmas[v] * self.sigmas[v];
            for &(u1, b1) in coef {
                for &(u2, b2) in coef {
                    var_raw += b1 * b2 * c[u1 * p + u2];
                }
            }
            let scale = var_raw.sqrt();
            for w in 0..p {
                if w == v {
                    continue;
                }
                let mut cov = 0.0;
                for &(u, b) in coef {
                    cov += b * c[u * p + w];
                }
                c[v * p + w] = cov / scale;
                c[w * p + v] = cov / scale;
            }
            c[v * p + v] = 1.0;
        }
        c
    }
}

/// Samples `sample_size` rows from a linear structural-equation model on
/// `g`: noise scales are uniform on [1, 2), edge coefficients uniform on
/// [-1, 1), and every column is standardized (zero mean, unit variance,
/// 1/n moments) as soon as it is generated, so children combine the
/// standardized values of their parents.
pub fn sample_sem<R: Rng + ?Sized>(
    g: &Dag,
    sample_size: usize,
    noise: NoiseFamily,
    rng: &mut R,
) -> Result<(DataMatrix, SemModel), SimError> {
    let p = g.num_vars();
    if p == 0 {
        return Err(SimError::BadConfig("graph needs at least one variable".into()));
    }
    if sample_size < 2 {
        return Err(SimError::BadConfig(format!(
            "sample size must be at least 2 to standardize, got {sample_size}"
        )));
    }
    let n = sample_size;
    let sigmas: Vec<f64> = (0..p).map(|_| rng.gen_range(1.0..2.0)).collect();
    let mut coefficients: Vec<Vec<(usize, f64)>> = vec![Vec::new(); p];
    for (u, v) in g.edges() {
        let beta = rng.gen_range(-1.0..1.0);
        coefficients[v].push((u, beta));
    }
    for coef in &mut coefficients {
        coef.sort_by_key(|&(u, _)| u);
    }
    let topo_order = g.topological_order();

    let mut data = DataMatrix::zeros(n, p);
    for &v in &topo_order {
        let mut column = vec![0.0; n];
        for (r, x) in column.iter_mut().enumerate() {
            let mut value = sigmas[v] * noise_draw(noise, rng);
            for &(u, beta) in &coefficients[v] {
                value += beta * data.get(r, u);
            }
            *x = value;
        }
        let mean = column.iter().sum::<f64>() / n as f64;
        let var = column.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        let sd = var.sqrt();
        if !(sd > 0.0) {
            return Err(SimError::DegenerateColumn(v));
        }
        for (r, x) in column.iter().enumerate() {
            data.set(r, v, (x - mean) / sd);
        }
    }

    Ok((
        data,
        SemModel {
            num_vars: p,
            topo_order,
            coefficients,
            sigmas,
            noise,
        },
    ))
}

/// Randomly relabels the columns of `data`. Returns the shuffled matrix
/// and the map where entry `j` is the new index of original column `j`.
pub fn shuffle_columns<R: Rng + ?Sized>(
    data: &DataMatrix,
    rng: &mut R,
) -> (DataMatrix, Vec<usize>) {
    let mut map: Vec<usize> = (0..data.num_cols()).collect();
    map.shuffle(rng);
    (data.permute_columns(&map), map)
}
