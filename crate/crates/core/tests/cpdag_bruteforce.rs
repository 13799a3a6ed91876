mod common;

use gas_core::cpdag::{essential_graph, same_mec};
use gas_core::graph::Dag;

#[test]
fn essential_graphs_of_all_four_node_dags() {
    let dags = common::all_dags(4);
    assert_eq!(dags.len(), 543);
    let classes = common::classes(&dags);
    assert_eq!(classes.len(), 185);
    let mut class_of = vec![0; dags.len()];
    for (ci, members) in classes.values().enumerate() {
        let refs: Vec<&Dag> = members.iter().map(|&i| &dags[i]).collect();
        let want = common::intersect_class(&refs);
        for &i in members {
            class_of[i] = ci;
            assert_eq!(essential_graph(&dags[i]), want, "{:?}", dags[i]);
        }
    }
    let essentials: Vec<_> = dags.iter().map(essential_graph).collect();
    for i in 0..dags.len() {
        for j in 0..dags.len() {
            let same = class_of[i] == class_of[j];
            assert_eq!(same_mec(&dags[i], &dags[j]).unwrap(), same);
            assert_eq!(essentials[i] == essentials[j], same);
        }
    }
}

#[test]
fn essential_graphs_of_all_three_node_dags() {
    let dags = common::all_dags(3);
    assert_eq!(dags.len(), 25);
    assert_eq!(common::classes(&dags).len(), 11);
    for members in common::classes(&dags).values() {
        let refs: Vec<&Dag> = members.iter().map(|&i| &dags[i]).collect();
        let want = common::intersect_class(&refs);
        for g in refs {
            assert_eq!(essential_graph(g), want);
        }
    }
}
