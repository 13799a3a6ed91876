//! Essential graphs (CPDAGs), Meek orientation rules, Markov equivalence and
//! structural comparison metrics.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{GraphError, MeekError};
use crate::graph::{Dag, NodeId, Pdag};

/// `(a, collider, b)` with `a < b`.
pub type VStructure = (NodeId, NodeId, NodeId);

pub fn v_structures(dag: &Dag) -> BTreeSet<VStructure> {
    let mut out = BTreeSet::new();
    for c in 0..dag.num_nodes() {
        let pa = dag.parents(c);
        for (i, &a) in pa.iter().enumerate() {
            for &b in &pa[i + 1..] {
                if !dag.is_adjacent(a, b) {
                    out.insert((a, c, b));
                }
            }
        }
    }
    out
}

/// The essential graph of `dag`: its skeleton with v-structures oriented and
/// the Meek rules applied to a fixpoint.
pub fn essential_graph(dag: &Dag) -> Pdag {
    let p = dag.num_nodes();
    let mut g = Pdag::new(p);
    for (u, v) in dag.edges() {
        g.set_undirected(u, v);
    }
    for (a, c, b) in v_structures(dag) {
        g.set_directed(a, c);
        g.set_directed(b, c);
    }
    meek_closure(&g).expect("orientations derived from a DAG are consistent")
}

/// Applies Meek rules R1–R4 until none fires. Directed edges are never
/// touched; an undirected edge that two rules would orient in opposite
/// directions is an error.
pub fn meek_closure(pdag: &Pdag) -> Result<Pdag, MeekError> {
    if pdag.has_directed_cycle() {
        return Err(MeekError::DirectedCycle);
    }
    closure(pdag, true)
}

/// Like [`meek_closure`], but leaves conflicting edges undirected and skips
/// the acyclicity check. Used on finite-sample outputs, which may contain
/// contradictory orientations.
pub(crate) fn meek_closure_lenient(pdag: &Pdag) -> Pdag {
    closure(pdag, false).expect("lenient closure never fails")
}

fn closure(pdag: &Pdag, strict: bool) -> Result<Pdag, MeekError> {
    let mut g = pdag.clone();
    loop {
        let mut changed = false;
        for (a, b) in g.undirected_edges() {
            let fwd = implied(&g, a, b);
            let bwd = implied(&g, b, a);
            match (fwd, bwd) {
                (true, true) if strict => return Err(MeekError::Conflict(a, b)),
                (true, false) => {
                    g.set_directed(a, b);
                    changed = true;
                }
                (false, true) => {
                    g.set_directed(b, a);
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            return Ok(g);
        }
    }
}

/// Whether some rule orients the undirected edge `x - y` as `x -> y`.
fn implied(g: &Pdag, x: NodeId, y: NodeId) -> bool {
    rule1(g, x, y) || rule2(g, x, y) || rule3(g, x, y) || rule4(g, x, y)
}

// z -> x - y, z !~ y
fn rule1(g: &Pdag, x: NodeId, y: NodeId) -> bool {
    g.parents(x).any(|z| z != y && !g.is_adjacent(z, y))
}

// x -> z -> y, x - y
fn rule2(g: &Pdag, x: NodeId, y: NodeId) -> bool {
    g.children(x).any(|z| g.has_directed(z, y))
}

// x - z1 -> y, x - z2 -> y, z1 !~ z2
fn rule3(g: &Pdag, x: NodeId, y: NodeId) -> bool {
    let zs: Vec<NodeId> = g
        .undirected_neighbors(x)
        .filter(|&z| z != y && g.has_directed(z, y))
        .collect();
    zs.iter()
        .enumerate()
        .any(|(i, &z1)| zs[i + 1..].iter().any(|&z2| !g.is_adjacent(z1, z2)))
}

// x - k -> l -> y, k !~ y, x ~ l
fn rule4(g: &Pdag, x: NodeId, y: NodeId) -> bool {
    g.parents(y).any(|l| {
        l != x
            && g.is_adjacent(x, l)
            && g.parents(l)
                .any(|k| k != x && k != y && g.has_undirected(x, k) && !g.is_adjacent(k, y))
    })
}

/// True iff the two DAGs share skeleton and v-structures.
pub fn same_mec(g: &Dag, h: &Dag) -> Result<bool, GraphError> {
    if g.num_nodes() != h.num_nodes() {
        return Err(GraphError::SizeMismatch(g.num_nodes(), h.num_nodes()));
    }
    Ok(g.to_pdag().skeleton() == h.to_pdag().skeleton() && v_structures(g) == v_structures(h))
}

/// Structural Hamming distance: the number of node pairs whose status
/// (absent, undirected, `u -> v`, `v -> u`) differs.
pub fn shd(a: &Pdag, b: &Pdag) -> Result<usize, GraphError> {
    let p = a.num_nodes();
    if p != b.num_nodes() {
        return Err(GraphError::SizeMismatch(p, b.num_nodes()));
    }
    let mut d = 0;
    for u in 0..p {
        for v in (u + 1)..p {
            if a.mark(u, v) != b.mark(u, v) {
                d += 1;
            }
        }
    }
    Ok(d)
}

/// SHD divided by the number of node pairs `p(p-1)/2` (0 when `p < 2`).
pub fn normalized_shd(a: &Pdag, b: &Pdag) -> Result<f64, GraphError> {
    let d = shd(a, b)?;
    let pairs = num_pairs(a.num_nodes());
    Ok(if pairs == 0 { 0.0 } else { d as f64 / pairs as f64 })
}

pub(crate) fn num_pairs(p: usize) -> usize {
    p * p.saturating_sub(1) / 2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkeletonMetrics {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl SkeletonMetrics {
    /// Edges in the truth that the prediction misses.
    pub fn missing(&self) -> usize {
        self.false_negatives
    }

    /// Predicted edges absent from the truth.
    pub fn extra(&self) -> usize {
        self.false_positives
    }
}

pub fn skeleton_metrics(predicted: &Pdag, truth: &Pdag) -> Result<SkeletonMetrics, GraphError> {
    let p = predicted.num_nodes();
    if p != truth.num_nodes() {
        return Err(GraphError::SizeMismatch(p, truth.num_nodes()));
    }
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for u in 0..p {
        for v in (u + 1)..p {
            match (predicted.is_adjacent(u, v), truth.is_adjacent(u, v)) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
        }
    }
    let ratio = |num: usize, den: usize| if den == 0 { 1.0 } else { num as f64 / den as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(SkeletonMetrics {
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
        precision,
        recall,
        f1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dag(p: usize, e: &[(usize, usize)]) -> Dag {
        Dag::new(p, e).unwrap()
    }

    #[test]
    fn essential_graph_examples() {
        let chain = essential_graph(&dag(3, &[(0, 1), (1, 2)]));
        assert_eq!(chain.undirected_edges(), vec![(0, 1), (1, 2)]);
        assert!(chain.directed_edges().is_empty());

        let col = essential_graph(&dag(3, &[(0, 1), (2, 1)]));
        assert_eq!(col.directed_edges(), vec![(0, 1), (2, 1)]);

        let app_c = dag(5, &[(0, 2), (1, 2), (1, 4), (2, 3), (3, 4)]);
        assert_eq!(essential_graph(&app_c), app_c.to_pdag());
    }

    #[test]
    fn meek_rule_examples() {
        // R1: a -> b - c, a !~ c
        let mut g = Pdag::new(3);
        g.set_directed(0, 1);
        g.set_undirected(1, 2);
        let out = meek_closure(&g).unwrap();
        assert!(out.has_directed(1, 2));

        // R2: a -> b -> c, a - c
        let mut g = Pdag::new(3);
        g.set_directed(0, 1);
        g.set_directed(1, 2);
        g.set_undirected(0, 2);
        assert!(meek_closure(&g).unwrap().has_directed(0, 2));

        // undirected triangle is left alone
        let tri = Pdag::complete_undirected(3);
        assert_eq!(meek_closure(&tri).unwrap(), tri);
    }

    #[test]
    fn meek_rule3_and_rule4() {
        // R3: 0 - 1 -> 3, 0 - 2 -> 3, 0 - 3, 1 !~ 2
        let mut g = Pdag::new(4);
        g.set_undirected(0, 1);
        g.set_undirected(0, 2);
        g.set_undirected(0, 3);
        g.set_directed(1, 3);
        g.set_directed(2, 3);
        assert!(meek_closure(&g).unwrap().has_directed(0, 3));

        // R4: 0 - 1 -> 2 -> 3, 0 - 3, 0 ~ 2, 1 !~ 3
        let mut g = Pdag::new(4);
        g.set_undirected(0, 1);
        g.set_directed(1, 2);
        g.set_directed(2, 3);
        g.set_undirected(0, 3);
        g.set_undirected(0, 2);
        let out = meek_closure(&g).unwrap();
        assert!(out.has_directed(0, 3));
    }

    #[test]
    fn meek_rejects_inconsistent_input() {
        let mut g = Pdag::new(3);
        g.set_directed(0, 1);
        g.set_directed(1, 2);
        g.set_directed(2, 0);
        assert_eq!(meek_closure(&g).unwrap_err(), MeekError::DirectedCycle);

        // 0 -> 1 - 2 <- 3 with 0 !~ 2 and 3 !~ 1: R1 fires both ways.
        let mut g = Pdag::new(4);
        g.set_directed(0, 1);
        g.set_undirected(1, 2);
        g.set_directed(3, 2);
        assert_eq!(meek_closure(&g).unwrap_err(), MeekError::Conflict(1, 2));
        assert!(meek_closure_lenient(&g).has_undirected(1, 2));
    }

    #[test]
    fn same_mec_examples() {
        let a = dag(3, &[(0, 1), (1, 2)]);
        let b = dag(3, &[(1, 0), (1, 2)]);
        let c = dag(3, &[(0, 1), (2, 1)]);
        assert!(same_mec(&a, &b).unwrap());
        assert!(!same_mec(&c, &a).unwrap());
        assert!(same_mec(&c, &c).unwrap());
        assert!(same_mec(&a, &Dag::empty(4)).is_err());
    }

    #[test]
    fn shd_examples() {
        let mut a = Pdag::new(2);
        a.set_undirected(0, 1);
        let mut b = Pdag::new(2);
        b.set_directed(0, 1);
        assert_eq!(shd(&a, &a).unwrap(), 0);
        assert_eq!(shd(&a, &b).unwrap(), 1);
        let p = 6;
        assert_eq!(shd(&Pdag::new(p), &Pdag::complete_undirected(p)).unwrap(), 15);
        assert_eq!(normalized_shd(&Pdag::new(p), &Pdag::complete_undirected(p)).unwrap(), 1.0);
    }

    #[test]
    fn skeleton_metric_examples() {
        let truth = dag(4, &[(0, 1), (1, 2), (2, 3)]).to_pdag();
        let m = skeleton_metrics(&truth, &truth).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));

        let m = skeleton_metrics(&Pdag::new(4), &truth).unwrap();
        assert_eq!(m.recall, 0.0);
        assert_eq!(m.precision, 1.0);
        assert_eq!(m.f1, 0.0);
        assert_eq!(m.missing(), 3);

        let m = skeleton_metrics(&Pdag::complete_undirected(4), &truth).unwrap();
        assert_eq!(m.recall, 1.0);
        assert!((m.precision - 3.0 / 6.0).abs() < 1e-15);
        assert_eq!(m.extra(), 3);
    }
}
