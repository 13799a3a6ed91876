mod common;

use gas_core::cpdag::essential_graph;
use gas_core::graph::{Dag, NodeSet};
use gas_core::lowerbound::{all_queries, build_adversarial_pair, lemma7_in_scope, verify_indistinguishable_sets};
use itertools::Itertools;

/// Maximal undirected cliques of size >= 3 in the essential graph of `g`.
fn undirected_cliques(g: &Dag) -> Vec<NodeSet> {
    let e = essential_graph(g);
    let p = g.num_nodes();
    let mut out = Vec::new();
    for k in (3..=p).rev() {
        for c in (0..p).combinations(k) {
            let is_clique = c.iter().tuple_combinations().all(|(&a, &b)| e.has_undirected(a, b));
            let c: NodeSet = c.into();
            if is_clique && !out.iter().any(|o: &NodeSet| c.is_subset(o)) {
                out.push(c);
            }
        }
    }
    out
}

#[test]
fn disagreements_fall_inside_the_sandwich() {
    let mut pairs_checked = 0;
    for p in 3..=5 {
        for g in common::all_dags(p).into_iter().step_by(if p == 5 { 97 } else { 1 }) {
            for clique in undirected_cliques(&g) {
                for w in clique.iter().powerset().filter(|w| w.len() + 2 <= clique.len()) {
                    let pair = build_adversarial_pair(&g, &clique, &w.into()).unwrap();
                    pairs_checked += 1;
                    for q in all_queries(p) {
                        let (a, b) = (NodeSet::singleton(q.u()), NodeSet::singleton(q.v()));
                        let f = pair.f.d_separated(&a, &b, q.cond()).unwrap();
                        let h = pair.h.d_separated(&a, &b, q.cond()).unwrap();
                        if f != h {
                            assert!(
                                lemma7_in_scope(&pair.f, pair.u, pair.v, &clique, q.cond()).unwrap(),
                                "{:?} vs {:?} on {q}",
                                pair.f,
                                pair.h
                            );
                        }
                    }
                }
            }
        }
    }
    assert!(pairs_checked > 100, "{pairs_checked}");
}

#[test]
fn sampled_set_valued_statements_agree_off_trace() {
    let g = Dag::new(5, &(0..5).tuple_combinations().collect::<Vec<_>>()).unwrap();
    let clique = NodeSet::full(5);
    for w in (0..5).powerset().filter(|w| w.len() <= 3) {
        let w: NodeSet = w.into();
        let pair = build_adversarial_pair(&g, &clique, &w).unwrap();
        let mut stmts = Vec::new();
        for mask in 0..3u32.pow(5) {
            let (mut a, mut b, mut c) = (NodeSet::new(), NodeSet::new(), NodeSet::new());
            let mut m = mask;
            for x in 0..5 {
                match m % 3 {
                    0 => a.insert(x),
                    1 => b.insert(x),
                    _ => c.insert(x),
                };
                m /= 3;
            }
            if !a.is_empty() && !b.is_empty() && c != w {
                stmts.push((a, b, c));
            }
        }
        assert!(verify_indistinguishable_sets(&pair, &stmts).unwrap(), "trace {w}");
    }
}
