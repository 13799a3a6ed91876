//! Random DAG families and linear Gaussian structural equation models.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::SynthError;
use crate::graph::{Dag, NodeId};

pub type Seed = u64;

/// Independent generator streams derived from one seed.
const STREAM_GRAPH: u64 = 0;
const STREAM_WEIGHTS: u64 = 1;
const STREAM_SAMPLES: u64 = 2;

fn rng(seed: Seed, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Edge density of an Erdős–Rényi DAG.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Density {
    /// Probability of each forward pair.
    EdgeProb(f64),
    /// Expected number of neighbours per node; maps to `k / (p - 1)`.
    ExpectedNeighbors(f64),
}

impl Density {
    fn edge_prob(self, p: usize) -> Result<f64, SynthError> {
        match self {
            Density::EdgeProb(q) if (0.0..=1.0).contains(&q) => Ok(q),
            Density::EdgeProb(q) => Err(SynthError::InvalidDensity(format!("edge probability {q} not in [0, 1]"))),
            Density::ExpectedNeighbors(k) if k >= 0.0 && k <= p.saturating_sub(1) as f64 => {
                Ok(if p <= 1 { 0.0 } else { k / (p - 1) as f64 })
            }
            Density::ExpectedNeighbors(k) => Err(SynthError::InvalidDensity(format!(
                "expected neighbourhood {k} not in [0, {}]",
                p.saturating_sub(1)
            ))),
        }
    }
}

/// Erdős–Rényi DAG: each pair is an edge independently, oriented along a
/// uniformly random node permutation.
pub fn erdos_renyi_dag(p: usize, density: Density, seed: Seed) -> Result<Dag, SynthError> {
    if p == 0 {
        return Err(SynthError::TooFewNodes { min: 1, p });
    }
    let q = density.edge_prob(p)?;
    let mut r = rng(seed, STREAM_GRAPH);
    let mut perm: Vec<NodeId> = (0..p).collect();
    perm.shuffle(&mut r);
    let mut edges = Vec::new();
    for i in 0..p {
        for j in (i + 1)..p {
            if r.random::<f64>() < q {
                edges.push((perm[i], perm[j]));
            }
        }
    }
    Ok(Dag::new(p, &edges).expect("forward edges along a permutation are acyclic"))
}

/// Barabási–Albert DAG. Starts from `m` isolated nodes; each later node links
/// to `m` distinct earlier nodes chosen with probability proportional to
/// `degree + 1`. The undirected graph (with `m (p - m)` edges) is then
/// oriented along a random permutation.
pub fn barabasi_albert_dag(p: usize, m: usize, seed: Seed) -> Result<Dag, SynthError> {
    if m == 0 || m >= p {
        return Err(SynthError::InvalidAttachment { m, p });
    }
    let mut r = rng(seed, STREAM_GRAPH);
    let mut degree = vec![0usize; p];
    let mut pairs = Vec::with_capacity(m * (p - m));
    for t in m..p {
        let mut chosen: Vec<NodeId> = Vec::with_capacity(m);
        for _ in 0..m {
            let total: usize = (0..t).filter(|v| !chosen.contains(v)).map(|v| degree[v] + 1).sum();
            let mut ticket = r.random_range(0..total);
            let pick = (0..t)
                .filter(|v| !chosen.contains(v))
                .find(|&v| {
                    let w = degree[v] + 1;
                    if ticket < w {
                        true
                    } else {
                        ticket -= w;
                        false
                    }
                })
                .expect("ticket falls inside the total weight");
            chosen.push(pick);
        }
        for &v in &chosen {
            degree[v] += 1;
            degree[t] += 1;
            pairs.push((v, t));
        }
    }
    let mut rank: Vec<usize> = (0..p).collect();
    rank.shuffle(&mut r);
    let edges: Vec<(NodeId, NodeId)> = pairs
        .into_iter()
        .map(|(a, b)| if rank[a] < rank[b] { (a, b) } else { (b, a) })
        .collect();
    Ok(Dag::new(p, &edges).expect("edges oriented by rank are acyclic"))
}

/// Two hubs joined by `p - 2` parallel two-edge paths: `0 -> k -> 1` for
/// every `k` in `2..p`. Maximum degree is `p - 2` while the largest
/// undirected clique of the essential graph has two nodes.
pub fn parallel_paths_dag(p: usize) -> Result<Dag, SynthError> {
    if p < 3 {
        return Err(SynthError::TooFewNodes { min: 3, p });
    }
    let edges: Vec<(NodeId, NodeId)> = (2..p).flat_map(|k| [(0, k), (k, 1)]).collect();
    Ok(Dag::new(p, &edges).expect("parallel paths are acyclic"))
}

/// Linear Gaussian SEM: `X_j = Σ a_ij X_i + ε_j`, `ε_j ~ N(0, σ_j²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SemModel {
    dag: Dag,
    weights: BTreeMap<(NodeId, NodeId), f64>,
    noise_std: Vec<f64>,
}

impl SemModel {
    /// Weights with a random sign and magnitude uniform on `[0.25, 1]`; unit
    /// noise.
    pub fn random(dag: Dag, seed: Seed) -> Self {
        let mut r = rng(seed, STREAM_WEIGHTS);
        let weights = dag
            .edges()
            .into_iter()
            .map(|e| {
                let mag = r.random_range(0.25..=1.0);
                let sign = if r.random::<bool>() { 1.0 } else { -1.0 };
                (e, sign * mag)
            })
            .collect();
        let p = dag.num_nodes();
        SemModel {
            dag,
            weights,
            noise_std: vec![1.0; p],
        }
    }

    /// Explicit weights; the keys must be exactly the DAG's edges.
    pub fn with_weights(dag: Dag, weights: &[((NodeId, NodeId), f64)]) -> Result<Self, SynthError> {
        let map: BTreeMap<(NodeId, NodeId), f64> = weights.iter().copied().collect();
        if map.len() != weights.len() || map.keys().copied().ne(dag.edges()) {
            return Err(SynthError::InvalidDensity(
                "weight keys must match the DAG's edges".to_string(),
            ));
        }
        let p = dag.num_nodes();
        Ok(SemModel {
            dag,
            weights: map,
            noise_std: vec![1.0; p],
        })
    }

    pub fn with_noise_std(mut self, noise_std: Vec<f64>) -> Result<Self, SynthError> {
        if noise_std.len() != self.dag.num_nodes() || noise_std.iter().any(|s| !(*s > 0.0)) {
            return Err(SynthError::InvalidNoise);
        }
        self.noise_std = noise_std;
        Ok(self)
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn weights(&self) -> &BTreeMap<(NodeId, NodeId), f64> {
        &self.weights
    }

    pub fn noise_std(&self) -> &[f64] {
        &self.noise_std
    }

    /// Weighted adjacency `A` with `A[i][j] = a_ij`.
    pub fn weight_matrix(&self) -> DMatrix<f64> {
        let p = self.dag.num_nodes();
        let mut a = DMatrix::zeros(p, p);
        for (&(i, j), &w) in &self.weights {
            a[(i, j)] = w;
        }
        a
    }

    /// `Σ = (I - A)^{-T} D (I - A)^{-1}`.
    pub fn population_covariance(&self) -> DMatrix<f64> {
        let p = self.dag.num_nodes();
        let ia = DMatrix::<f64>::identity(p, p) - self.weight_matrix();
        // I - A is unit triangular up to a permutation, so always invertible.
        let inv = ia.try_inverse().expect("I - A is invertible for a DAG");
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            p,
            self.noise_std.iter().map(|s| s * s),
        ));
        inv.transpose() * d * inv
    }

    /// Text sidecar with one `u v a_uv` line per edge.
    pub fn weights_to_string(&self) -> String {
        self.weights
            .iter()
            .map(|(&(u, v), w)| format!("{u} {v} {w}\n"))
            .collect()
    }
}

/// Ancestral sampling of `n` rows from the SEM.
pub fn sample_sem(model: &SemModel, n: usize, seed: Seed) -> DMatrix<f64> {
    let p = model.dag.num_nodes();
    let mut r = rng(seed, STREAM_SAMPLES);
    let mut x = DMatrix::zeros(n, p);
    let order = model.dag.topological_order().to_vec();
    for i in 0..n {
        for &j in &order {
            let eps: f64 = r.sample(StandardNormal);
            let mut val = model.noise_std[j] * eps;
            for &pa in model.dag.parents(j) {
                val += model.weights[&(pa, j)] * x[(i, pa)];
            }
            x[(i, j)] = val;
        }
    }
    x
}
