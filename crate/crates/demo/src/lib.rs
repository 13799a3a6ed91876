//! Browser bindings. Every export returns a JSON string; the `*_json`
//! functions hold the logic so native tests can call them directly.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use gas_core::bench::{Algo, Family};
use gas_core::citest::{CachedTester, DSepOracle, FisherZ};
use gas_core::cpdag::{essential_graph, normalized_shd, shd};
use gas_core::gas::ExpansionTrace;
use gas_core::graph::{Dag, NodeSet, Pdag};
use gas_core::lowerbound::certify_lower_bound;
use gas_core::synth::{barabasi_albert_dag, erdos_renyi_dag, parallel_paths_dag, sample_sem, Density, SemModel};

/// PC on the parallel family grows fast; beyond this size the curve stops.
const PC_CURVE_MAX_P: usize = 14;

#[derive(Serialize)]
struct Edges {
    directed: Vec<(usize, usize)>,
    undirected: Vec<(usize, usize)>,
}

impl From<&Pdag> for Edges {
    fn from(g: &Pdag) -> Self {
        Edges {
            directed: g.directed_edges(),
            undirected: g.undirected_edges(),
        }
    }
}

#[derive(Serialize)]
struct Discovery {
    p: usize,
    truth: Edges,
    essential: Edges,
    learned: Edges,
    components: Vec<NodeSet>,
    trace: Vec<ExpansionTrace>,
    distinct_ci: usize,
    total_ci: usize,
    max_level: usize,
    shd: usize,
    normalized_shd: f64,
}

#[derive(Serialize)]
struct CurvePoint {
    p: usize,
    gas: usize,
    gas_plus: usize,
    pc: Option<usize>,
}

fn make_dag(family: &str, p: usize, density: f64, seed: u64) -> Result<Dag, String> {
    let family: Family = family.parse()?;
    let dag = match family {
        Family::Er => erdos_renyi_dag(p, Density::ExpectedNeighbors(density), seed),
        Family::Ba => barabasi_albert_dag(p, density.max(1.0) as usize, seed),
        Family::Parallel => parallel_paths_dag(p),
    };
    dag.map_err(|e| e.to_string())
}

/// Samples a graph, runs one algorithm and reports the output with its trace.
/// `n == 0` uses the d-separation oracle, otherwise Fisher-z on `n` samples.
pub fn discover_json(family: &str, p: usize, density: f64, seed: u64, algo: &str, n: usize, alpha: f64) -> Result<String, String> {
    let algo: Algo = algo.parse()?;
    let dag = make_dag(family, p, density, seed)?;
    let truth = essential_graph(&dag);
    let res = if n == 0 {
        algo.run(&mut CachedTester::new(DSepOracle::new(dag.clone())))
    } else {
        let data = sample_sem(&SemModel::random(dag.clone(), seed), n, seed);
        let fz = FisherZ::new(&data, alpha).map_err(|e| e.to_string())?;
        algo.run(&mut CachedTester::new(fz))
    }
    .map_err(|e| e.to_string())?;
    let out = Discovery {
        p,
        truth: (&dag.to_pdag()).into(),
        essential: (&truth).into(),
        learned: (&res.graph).into(),
        shd: shd(&res.graph, &truth).map_err(|e| e.to_string())?,
        normalized_shd: normalized_shd(&res.graph, &truth).map_err(|e| e.to_string())?,
        components: res.components,
        trace: res.trace,
        distinct_ci: res.ci.distinct_queries,
        total_ci: res.ci.total_calls,
        max_level: res.max_level,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

/// Distinct oracle queries of each algorithm on the parallel-paths family.
pub fn ci_curve_json(max_p: usize) -> Result<String, String> {
    let mut points = Vec::new();
    for p in (4..=max_p).step_by(2) {
        let dag = parallel_paths_dag(p).map_err(|e| e.to_string())?;
        let count = |algo: Algo| {
            algo.run(&mut CachedTester::new(DSepOracle::new(dag.clone())))
                .map(|r| r.ci.distinct_queries)
                .map_err(|e| e.to_string())
        };
        points.push(CurvePoint {
            p,
            gas: count(Algo::Gas)?,
            gas_plus: count(Algo::GasPlus)?,
            pc: if p <= PC_CURVE_MAX_P { Some(count(Algo::Pc)?) } else { None },
        });
    }
    serde_json::to_string(&points).map_err(|e| e.to_string())
}

pub fn lower_bound_json(s: usize) -> Result<String, String> {
    let rep = certify_lower_bound(s).map_err(|e| e.to_string())?;
    serde_json::to_string(&rep).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn discover(family: &str, p: usize, density: f64, seed: u32, algo: &str, n: usize, alpha: f64) -> Result<String, JsError> {
    discover_json(family, p, density, seed.into(), algo, n, alpha).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn ci_curve(max_p: usize) -> Result<String, JsError> {
    ci_curve_json(max_p).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn lower_bound(s: usize) -> Result<String, JsError> {
    lower_bound_json(s).map_err(|e| JsError::new(&e))
}
