//! Greedy ancestral search.
//!
//! The search grows a prefix node set `S` (closed under ancestors) one
//! component at a time. Each expansion works on `V' = V \ S` and raises a
//! conditioning-set size `ℓ` while the working graph restricted to `V'` still
//! holds a clique of size `ℓ`. At every level it
//!
//! 1. removes edges `u - v` (`v ∈ V'`) separated by `S ∪ W`, `W ⊆ V'`, `|W| = ℓ`;
//! 2. collects the v-set: colliders of newly visible v-structures and the
//!    nodes whose conditioning re-opens a separated pair;
//! 3. for `ℓ > 0`, collects the f-set: nodes that a prefix node can be
//!    separated from by `ℓ` nodes of `V'` (orientations forced by Meek's
//!    first rule);
//!
//! and drops both sets from `V'`. What survives becomes the next component.
//! Remaining edges between components are finally oriented from the earlier
//! component to the later one.

use std::collections::BTreeMap;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::citest::{CiStats, CiTester};
use crate::error::CiError;
use crate::graph::{NodeId, NodeSet, Pdag};

/// Separating sets found while removing edges, keyed by the unordered pair.
/// Each entry holds only the part drawn from the working set, not the prefix
/// it was tested with.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SepsetMap(BTreeMap<(NodeId, NodeId), NodeSet>);

fn key(u: NodeId, v: NodeId) -> (NodeId, NodeId) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

impl SepsetMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, u: NodeId, v: NodeId) -> Option<&NodeSet> {
        self.0.get(&key(u, v))
    }

    pub fn insert(&mut self, u: NodeId, v: NodeId, w: NodeSet) {
        self.0.insert(key(u, v), w);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Entries in ascending pair order.
    pub fn iter(&self) -> impl Iterator<Item = ((NodeId, NodeId), &NodeSet)> {
        self.0.iter().map(|(k, w)| (*k, w))
    }
}

/// Search state between levels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrefixState {
    pub prefix: NodeSet,
    pub components: Vec<NodeSet>,
    pub working: NodeSet,
    pub level: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovedEdge {
    pub u: NodeId,
    pub v: NodeId,
    pub sepset: NodeSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelTrace {
    pub level: usize,
    pub removed: Vec<RemovedEdge>,
    pub v_set: NodeSet,
    pub f_set: NodeSet,
    /// Working set after dropping the v- and f-sets.
    pub working: NodeSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionTrace {
    /// Prefix set at the start of the expansion.
    pub prefix: NodeSet,
    pub levels: Vec<LevelTrace>,
    /// The component appended at the end of the expansion.
    pub component: NodeSet,
    /// Set when dropping the v- and f-sets would have emptied the working
    /// set at some level, so only the least flagged nodes were kept. Only
    /// possible with a tester that is not faithful to any DAG.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasResult {
    pub graph: Pdag,
    /// Ordered partition of the nodes (empty for PC).
    pub components: Vec<NodeSet>,
    pub ci: CiStats,
    /// Largest conditioning-set size reached.
    pub max_level: usize,
    pub sepsets: SepsetMap,
    pub trace: Vec<ExpansionTrace>,
}

/// Removes every edge `u - v` with `v ∈ working` for which some `W ⊆ working \
/// {u, v}` of size `m` gives `u ⟂ v | prefix ∪ W`. Pairs are scanned in
/// ascending order and subsets lexicographically; the first separating `W`
/// is recorded.
pub fn remove_edges<T: CiTester + ?Sized>(
    graph: &mut Pdag,
    prefix: &NodeSet,
    working: &NodeSet,
    m: usize,
    tester: &mut T,
    sepsets: &mut SepsetMap,
) -> Result<Vec<RemovedEdge>, CiError> {
    let p = graph.num_nodes();
    let mut removed = Vec::new();
    for u in 0..p {
        for v in (u + 1)..p {
            if !(working.contains(u) || working.contains(v)) || !graph.is_adjacent(u, v) {
                continue;
            }
            let pool: Vec<NodeId> = working.iter().filter(|&x| x != u && x != v).collect();
            for w in pool.into_iter().combinations(m) {
                let w = NodeSet::from_sorted_unchecked(w);
                if tester.independent(u, v, &prefix.union(&w))? {
                    graph.remove_edge(u, v);
                    sepsets.insert(u, v, w.clone());
                    removed.push(RemovedEdge { u, v, sepset: w });
                    break;
                }
            }
        }
    }
    Ok(removed)
}

/// Nodes of `working` identified as colliders (or their descendants) by
/// separating sets with `m` nodes outside the prefix.
///
/// Stage one reads v-structures off the stored separating sets: a common
/// neighbour of a separated pair that is not in the pair's separating set.
/// Sets stored in earlier expansions count only their part outside the
/// current prefix, so a collider seen then is seen again.
/// Stage two adds every other working node whose conditioning makes such a
/// pair dependent again.
pub fn compute_v_set<T: CiTester + ?Sized>(
    graph: &Pdag,
    prefix: &NodeSet,
    working: &NodeSet,
    m: usize,
    tester: &mut T,
    sepsets: &SepsetMap,
) -> Result<NodeSet, CiError> {
    Ok(v_set_votes(graph, prefix, working, m, tester, sepsets)?.into_keys().collect())
}

/// The v-set with, for each member, the number of separated pairs that
/// flagged it.
fn v_set_votes<T: CiTester + ?Sized>(
    graph: &Pdag,
    prefix: &NodeSet,
    working: &NodeSet,
    m: usize,
    tester: &mut T,
    sepsets: &SepsetMap,
) -> Result<BTreeMap<NodeId, usize>, CiError> {
    let mut votes: BTreeMap<NodeId, usize> = BTreeMap::new();
    let mut colliding_pairs: Vec<((NodeId, NodeId), &NodeSet)> = Vec::new();
    for ((u, v), sep) in sepsets.iter() {
        if sep.difference(prefix).len() != m || !(working.contains(u) || working.contains(v)) {
            continue;
        }
        let mut found = false;
        for w in working.iter() {
            if w != u && w != v && graph.is_adjacent(u, w) && graph.is_adjacent(v, w) && !sep.contains(w) {
                *votes.entry(w).or_default() += 1;
                found = true;
            }
        }
        if found {
            colliding_pairs.push(((u, v), sep));
        }
    }
    let first_stage: NodeSet = votes.keys().copied().collect();
    for ((u, v), sep) in colliding_pairs {
        let base = prefix.union(sep);
        for w in working.iter() {
            if w == u || w == v || sep.contains(w) || first_stage.contains(w) {
                continue;
            }
            let mut cond = base.clone();
            cond.insert(w);
            if !tester.independent(u, v, &cond)? {
                *votes.entry(w).or_default() += 1;
            }
        }
    }
    Ok(votes)
}

/// Nodes `v ∈ working` with a prefix node `u` such that `u` and `v` are
/// dependent given the rest of the prefix but separated by `prefix ∪ W`,
/// `W ⊆ working`, `|W| = m`. Only pairs already separated by a nonempty set
/// are scanned.
pub fn compute_f_set<T: CiTester + ?Sized>(
    prefix: &NodeSet,
    working: &NodeSet,
    m: usize,
    tester: &mut T,
    sepsets: &SepsetMap,
) -> Result<NodeSet, CiError> {
    let mut fset = NodeSet::new();
    if m == 0 || prefix.is_empty() {
        return Ok(fset);
    }
    for ((a, b), sep) in sepsets.iter() {
        let (u, v) = if prefix.contains(a) && working.contains(b) {
            (a, b)
        } else if prefix.contains(b) && working.contains(a) {
            (b, a)
        } else {
            continue;
        };
        if fset.contains(v) || sep.is_empty() || tester.independent(u, v, prefix)? {
            continue;
        }
        let pool: Vec<NodeId> = working.iter().filter(|&x| x != u && x != v).collect();
        for w in pool.into_iter().combinations(m) {
            let w = NodeSet::from_sorted_unchecked(w);
            if tester.independent(u, v, &prefix.union(&w))? {
                fset.insert(v);
                break;
            }
        }
    }
    Ok(fset)
}

struct Expansion {
    graph: Pdag,
    components: Vec<NodeSet>,
    max_level: usize,
    sepsets: SepsetMap,
    trace: Vec<ExpansionTrace>,
}

fn expand<T: CiTester + ?Sized>(tester: &mut T) -> Result<Expansion, CiError> {
    let p = tester.num_vars();
    let all = NodeSet::full(p);
    let mut graph = Pdag::complete_undirected(p);
    let mut sepsets = SepsetMap::new();
    let mut state = PrefixState {
        prefix: NodeSet::new(),
        components: Vec::new(),
        working: NodeSet::new(),
        level: 0,
    };
    let mut max_level = 0;
    let mut trace = Vec::new();

    if p <= 1 {
        if p == 1 {
            state.components.push(all);
        }
        return Ok(Expansion {
            graph,
            components: state.components,
            max_level,
            sepsets,
            trace,
        });
    }

    while state.prefix != all {
        state.working = all.difference(&state.prefix);
        state.level = 0;
        let mut exp = ExpansionTrace {
            prefix: state.prefix.clone(),
            levels: Vec::new(),
            component: NodeSet::new(),
            fallback: false,
        };
        while graph.has_clique_of_size(&state.working, state.level) {
            let m = state.level;
            let removed = remove_edges(&mut graph, &state.prefix, &state.working, m, tester, &mut sepsets)?;
            let votes = v_set_votes(&graph, &state.prefix, &state.working, m, tester, &sepsets)?;
            let v_set: NodeSet = votes.keys().copied().collect();
            let after_v = state.working.difference(&v_set);
            let f_set = if m > 0 {
                compute_f_set(&state.prefix, &after_v, m, tester, &sepsets)?
            } else {
                NodeSet::new()
            };
            max_level = max_level.max(m);
            let mut next = after_v.difference(&f_set);
            if next.is_empty() {
                // contradictory answers: keep the nodes flagged least often
                let count = |v: NodeId| votes.get(&v).copied().unwrap_or(0) + usize::from(f_set.contains(v));
                let least = state.working.iter().map(count).min().unwrap_or(0);
                next = state.working.iter().filter(|&v| count(v) == least).collect();
                log::warn!(
                    "expansion from prefix {} would drop every working node at level {m}; keeping {}",
                    state.prefix,
                    next
                );
                exp.fallback = true;
            }
            state.working = next;
            exp.levels.push(LevelTrace {
                level: m,
                removed,
                v_set,
                f_set,
                working: state.working.clone(),
            });
            state.level += 1;
        }
        state.prefix = state.prefix.union(&state.working);
        state.components.push(state.working.clone());
        exp.component = state.working.clone();
        trace.push(exp);
    }

    Ok(Expansion {
        graph,
        components: state.components,
        max_level,
        sepsets,
        trace,
    })
}

fn component_index(p: usize, components: &[NodeSet]) -> Vec<usize> {
    let mut idx = vec![0; p];
    for (i, c) in components.iter().enumerate() {
        for v in c.iter() {
            idx[v] = i;
        }
    }
    idx
}

/// Runs the search and orients every remaining cross-component edge from
/// the earlier component to the later one.
pub fn run_gas<T: CiTester + ?Sized>(tester: &mut T) -> Result<GasResult, CiError> {
    let Expansion {
        mut graph,
        components,
        max_level,
        sepsets,
        trace,
    } = expand(tester)?;
    let idx = component_index(graph.num_nodes(), &components);
    for (a, b) in graph.undirected_edges() {
        if idx[a] < idx[b] {
            graph.set_directed(a, b);
        } else if idx[b] < idx[a] {
            graph.set_directed(b, a);
        }
    }
    Ok(GasResult {
        graph,
        components,
        ci: tester.stats(),
        max_level,
        sepsets,
        trace,
    })
}

/// Same expansion as [`run_gas`], but the output graph is rebuilt from
/// scratch: `v - w` inside component `i` iff `v` and `w` are dependent given
/// the rest of `S_1 ∪ … ∪ S_i`, and `v -> w` across components `i < j` iff
/// they are dependent given the rest of `S_1 ∪ … ∪ S_j`.
pub fn run_gas_plus<T: CiTester + ?Sized>(tester: &mut T) -> Result<GasResult, CiError> {
    let Expansion {
        graph: working_graph,
        components,
        max_level,
        sepsets,
        trace,
    } = expand(tester)?;
    let p = working_graph.num_nodes();
    let mut graph = Pdag::new(p);
    let mut unions = Vec::with_capacity(components.len());
    let mut acc = NodeSet::new();
    for c in &components {
        acc = acc.union(c);
        unions.push(acc.clone());
    }
    for (i, comp) in components.iter().enumerate() {
        for (a, b) in comp.as_slice().iter().copied().tuple_combinations() {
            if !tester.independent(a, b, &unions[i])? {
                graph.set_undirected(a, b);
            }
        }
    }
    for (i, ci) in components.iter().enumerate() {
        for (j, cj) in components.iter().enumerate().skip(i + 1) {
            for v in ci.iter() {
                for w in cj.iter() {
                    if !tester.independent(v, w, &unions[j])? {
                        graph.set_directed(v, w);
                    }
                }
            }
        }
    }
    Ok(GasResult {
        graph,
        components,
        ci: tester.stats(),
        max_level,
        sepsets,
        trace,
    })
}
