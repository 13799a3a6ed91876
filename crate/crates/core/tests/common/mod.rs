#![allow(dead_code)]

use std::collections::BTreeMap;

use gas_core::graph::{Dag, NodeSet, Pdag};
use itertools::Itertools;

/// Every DAG on `p` labelled nodes.
pub fn all_dags(p: usize) -> Vec<Dag> {
    let pairs: Vec<(usize, usize)> = (0..p).tuple_combinations().collect();
    let mut out = Vec::new();
    for code in 0..3usize.pow(pairs.len() as u32) {
        let mut c = code;
        let mut edges = Vec::new();
        for &(a, b) in &pairs {
            match c % 3 {
                1 => edges.push((a, b)),
                2 => edges.push((b, a)),
                _ => {}
            }
            c /= 3;
        }
        if let Ok(g) = Dag::new(p, &edges) {
            out.push(g);
        }
    }
    out
}

/// The full list of d-separation answers for singleton pairs.
pub fn independence_model(g: &Dag) -> Vec<bool> {
    let p = g.num_nodes();
    let mut out = Vec::new();
    for (a, b) in (0..p).tuple_combinations() {
        let rest: Vec<usize> = (0..p).filter(|&x| x != a && x != b).collect();
        for c in rest.into_iter().powerset() {
            let c: NodeSet = c.into();
            out.push(g.d_separated(&NodeSet::singleton(a), &NodeSet::singleton(b), &c).unwrap());
        }
    }
    out
}

/// Groups DAGs into classes by their independence model.
pub fn classes(dags: &[Dag]) -> BTreeMap<Vec<bool>, Vec<usize>> {
    let mut m: BTreeMap<Vec<bool>, Vec<usize>> = BTreeMap::new();
    for (i, g) in dags.iter().enumerate() {
        m.entry(independence_model(g)).or_default().push(i);
    }
    m
}

/// An edge is directed iff every member orients it the same way.
pub fn intersect_class(members: &[&Dag]) -> Pdag {
    let p = members[0].num_nodes();
    let mut out = Pdag::new(p);
    for (a, b) in (0..p).tuple_combinations() {
        if !members[0].is_adjacent(a, b) {
            continue;
        }
        let fwd = members.iter().filter(|g| g.has_edge(a, b)).count();
        if fwd == members.len() {
            out.set_directed(a, b);
        } else if fwd == 0 {
            out.set_directed(b, a);
        } else {
            out.set_undirected(a, b);
        }
    }
    out
}
