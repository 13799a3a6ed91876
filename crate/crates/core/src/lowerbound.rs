//! Query lower bounds through pairs of graphs that no sparse set of CI tests
//! can tell apart.
//!
//! Given an undirected clique of the essential graph and a conditioning
//! trace `w` inside it, the clique is reordered so some `u` comes first,
//! `w` right after it and `v` next. Dropping `u -> v` from that member `F`
//! yields `H`, outside the equivalence class, which disagrees with `F` only
//! on statements `u ⟂ v | C` with `C ∩ clique = w`. An algorithm must
//! therefore probe every trace, i.e. `2^s - s - 1` of them for a clique of
//! size `s`.

use itertools::Itertools;
use serde::Serialize;

use crate::citest::CiQuery;
use crate::cpdag::{essential_graph, same_mec};
use crate::error::{GraphError, LowerBoundError};
use crate::graph::{Dag, NodeId, NodeSet, Pdag};

/// Largest clique handled by [`certify_lower_bound`].
pub const MAX_CERTIFIED_S: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdversarialPair {
    /// Member of the class with the clique ordered `u, w.., v, ..`.
    pub f: Dag,
    /// `f` without `u -> v`.
    pub h: Dag,
    pub u: NodeId,
    pub v: NodeId,
    pub w: NodeSet,
}

/// Number of conditioning traces a clique of size `s` forces: `2^s - s - 1`.
pub fn required_test_count(s: usize) -> Result<u64, LowerBoundError> {
    if !(2..64).contains(&s) {
        return Err(LowerBoundError::OutOfRange(s));
    }
    Ok((1u64 << s) - s as u64 - 1)
}

fn check_undirected_clique(e: &Pdag, clique: &NodeSet) -> Result<(), LowerBoundError> {
    let p = e.num_nodes();
    if let Some(&bad) = clique.as_slice().iter().find(|&&x| x >= p) {
        return Err(GraphError::NodeOutOfRange { node: bad, p }.into());
    }
    for (a, b) in clique.as_slice().iter().copied().tuple_combinations() {
        if !e.has_undirected(a, b) {
            return Err(LowerBoundError::NotUndirectedClique(a, b));
        }
    }
    Ok(())
}

/// Whether `C` falls in the window where `g` and `g` minus `u -> v` can
/// disagree: `Pa(v) ∩ Ch(u) ∩ K ⊆ C ∩ K ⊆ (Pa(v) \ {u}) ∩ K`.
pub fn lemma7_in_scope(
    g: &Dag,
    u: NodeId,
    v: NodeId,
    clique: &NodeSet,
    c: &NodeSet,
) -> Result<bool, LowerBoundError> {
    let p = g.num_nodes();
    for x in [u, v] {
        if x >= p {
            return Err(GraphError::NodeOutOfRange { node: x, p }.into());
        }
    }
    if !g.has_edge(u, v) {
        return Err(LowerBoundError::MissingEdge(u, v));
    }
    if !clique.contains(u) || !clique.contains(v) {
        return Err(LowerBoundError::EndpointsOutsideClique);
    }
    check_undirected_clique(&essential_graph(g), clique)?;
    let pa_v: NodeSet = g.parents(v).iter().copied().collect();
    let ch_u: NodeSet = g.children(u).iter().copied().collect();
    let lower = pa_v.intersection(&ch_u).intersection(clique);
    let mid = c.intersection(clique);
    let mut upper = pa_v.intersection(clique);
    upper.remove(u);
    Ok(lower.is_subset(&mid) && mid.is_subset(&upper))
}

/// Orients every clique pair by `order`, keeping all other edges of `g`.
fn reorder_clique(g: &Dag, clique: &NodeSet, order: &[NodeId]) -> Result<Dag, GraphError> {
    let rank = |x: NodeId| order.iter().position(|&y| y == x);
    let edges: Vec<(NodeId, NodeId)> = g
        .edges()
        .into_iter()
        .map(|(a, b)| {
            if clique.contains(a) && clique.contains(b) && rank(a) > rank(b) {
                (b, a)
            } else {
                (a, b)
            }
        })
        .collect();
    Dag::new(g.num_nodes(), &edges)
}

/// Re-orients the chain component holding the clique by maximum
/// cardinality search seeded with `order`; everything else follows `e`'s
/// directed edges and `g`.
fn mcs_orientation(g: &Dag, e: &Pdag, order: &[NodeId]) -> Result<Dag, GraphError> {
    let p = g.num_nodes();
    // chain component of the first clique node
    let mut comp = NodeSet::singleton(order[0]);
    let mut stack = vec![order[0]];
    while let Some(x) = stack.pop() {
        for y in e.undirected_neighbors(x) {
            if comp.insert(y) {
                stack.push(y);
            }
        }
    }
    let mut visited: Vec<NodeId> = Vec::with_capacity(comp.len());
    let mut weight = vec![0usize; p];
    let mut done = vec![false; p];
    for _ in 0..comp.len() {
        let next = comp
            .iter()
            .filter(|&x| !done[x])
            .max_by_key(|&x| {
                let pref = order.iter().position(|&y| y == x).map_or(0, |i| order.len() - i);
                (weight[x], pref, std::cmp::Reverse(x))
            })
            .expect("component not exhausted");
        done[next] = true;
        visited.push(next);
        for y in e.undirected_neighbors(next) {
            weight[y] += 1;
        }
    }
    let rank = |x: NodeId| visited.iter().position(|&y| y == x);
    let edges: Vec<(NodeId, NodeId)> = g
        .edges()
        .into_iter()
        .map(|(a, b)| {
            if e.has_undirected(a, b) && comp.contains(a) && rank(a) > rank(b) {
                (b, a)
            } else {
                (a, b)
            }
        })
        .collect();
    Dag::new(p, &edges)
}

/// Builds `(F, H)` for trace `w` inside `clique`. `u` is the smallest clique
/// node outside `w` and `v` the next one.
pub fn build_adversarial_pair(g: &Dag, clique: &NodeSet, w: &NodeSet) -> Result<AdversarialPair, LowerBoundError> {
    if !w.is_subset(clique) {
        return Err(LowerBoundError::TraceOutsideClique);
    }
    if clique.len() < 2 || w.len() > clique.len() - 2 {
        return Err(LowerBoundError::TraceTooLarge {
            w: w.len(),
            max: clique.len().saturating_sub(2),
        });
    }
    let e = essential_graph(g);
    check_undirected_clique(&e, clique)?;
    let mut rest = clique.difference(w).into_vec().into_iter();
    let (u, v) = (rest.next().unwrap(), rest.next().unwrap());
    let order: Vec<NodeId> = std::iter::once(u)
        .chain(w.iter())
        .chain(std::iter::once(v))
        .chain(rest)
        .collect();

    let direct = reorder_clique(g, clique, &order).ok().filter(|f| same_mec(f, g).unwrap_or(false));
    let f = match direct {
        Some(f) => f,
        None => {
            let f = mcs_orientation(g, &e, &order).map_err(|_| LowerBoundError::NoConsistentOrdering)?;
            if !same_mec(&f, g)? {
                return Err(LowerBoundError::NoConsistentOrdering);
            }
            f
        }
    };
    let h_edges: Vec<_> = f.edges().into_iter().filter(|&e| e != (u, v)).collect();
    let h = Dag::new(f.num_nodes(), &h_edges)?;
    Ok(AdversarialPair {
        f,
        h,
        u,
        v,
        w: w.clone(),
    })
}

/// `true` iff `F` and `H` answer every performed singleton query alike.
pub fn verify_indistinguishable(pair: &AdversarialPair, performed: &[CiQuery]) -> bool {
    performed.iter().all(|q| {
        let (a, b) = (NodeSet::singleton(q.u()), NodeSet::singleton(q.v()));
        pair.f.d_separated(&a, &b, q.cond()).ok() == pair.h.d_separated(&a, &b, q.cond()).ok()
    })
}

/// Set-valued form of [`verify_indistinguishable`] for `A ⟂ B | C` statements.
pub fn verify_indistinguishable_sets(
    pair: &AdversarialPair,
    performed: &[(NodeSet, NodeSet, NodeSet)],
) -> Result<bool, GraphError> {
    for (a, b, c) in performed {
        if pair.f.d_separated(a, b, c)? != pair.h.d_separated(a, b, c)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Every singleton statement on `p` nodes: all pairs, all conditioning sets.
pub fn all_queries(p: usize) -> Vec<CiQuery> {
    let mut out = Vec::new();
    for (a, b) in (0..p).tuple_combinations() {
        let rest: Vec<NodeId> = (0..p).filter(|&x| x != a && x != b).collect();
        for c in rest.iter().copied().powerset() {
            out.push(CiQuery::new(a, b, &c.into()).expect("distinct endpoints"));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceCertificate {
    pub w: NodeSet,
    pub u: NodeId,
    pub v: NodeId,
    pub f_in_class: bool,
    pub h_outside_class: bool,
    /// `F` dependent and `H` independent on `u ⟂ v | w`.
    pub disagrees_on_trace: bool,
    /// Statements with conditioning set different from the trace.
    pub statements_checked: usize,
    pub indistinguishable: bool,
}

impl TraceCertificate {
    pub fn certified(&self) -> bool {
        self.f_in_class && self.h_outside_class && self.disagrees_on_trace && self.indistinguishable
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LowerBoundReport {
    pub s: usize,
    pub required: u64,
    pub traces: Vec<TraceCertificate>,
}

impl LowerBoundReport {
    pub fn all_certified(&self) -> bool {
        self.traces.len() as u64 == self.required && self.traces.iter().all(TraceCertificate::certified)
    }
}

/// Certifies every trace of the complete DAG on `s` nodes.
pub fn certify_lower_bound(s: usize) -> Result<LowerBoundReport, LowerBoundError> {
    if !(2..=MAX_CERTIFIED_S).contains(&s) {
        return Err(LowerBoundError::OutOfRange(s));
    }
    let edges: Vec<(NodeId, NodeId)> = (0..s).tuple_combinations().collect();
    let g = Dag::new(s, &edges)?;
    let clique = NodeSet::full(s);
    let queries = all_queries(s);
    let mut traces = Vec::new();
    for w in (0..s).powerset().filter(|w| w.len() + 2 <= s) {
        let w: NodeSet = w.into();
        let pair = build_adversarial_pair(&g, &clique, &w)?;
        let avoiding: Vec<CiQuery> = queries
            .iter()
            .filter(|q| q.cond().intersection(&clique) != w)
            .cloned()
            .collect();
        let (a, b) = (NodeSet::singleton(pair.u), NodeSet::singleton(pair.v));
        let disagrees = !pair.f.d_separated(&a, &b, &w)? && pair.h.d_separated(&a, &b, &w)?;
        traces.push(TraceCertificate {
            u: pair.u,
            v: pair.v,
            f_in_class: same_mec(&pair.f, &g)?,
            h_outside_class: !same_mec(&pair.h, &g)?,
            disagrees_on_trace: disagrees,
            statements_checked: avoiding.len(),
            indistinguishable: verify_indistinguishable(&pair, &avoiding),
            w,
        });
    }
    Ok(LowerBoundReport {
        s,
        required: required_test_count(s)?,
        traces,
    })
}
