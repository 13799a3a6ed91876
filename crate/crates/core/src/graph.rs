//! Directed and partially directed graphs over dense node ids, ancestral
//! queries, d-separation and clique search.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GraphError;

/// Dense node index in `0..p`.
pub type NodeId = usize;

/// Sorted, deduplicated set of node ids.
///
/// The canonical representation makes equality and hashing structural, which
/// the CI query cache relies on.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeSet(Vec<NodeId>);

impl NodeSet {
    pub fn new() -> Self {
        NodeSet(Vec::new())
    }

    /// All nodes `0..p`.
    pub fn full(p: usize) -> Self {
        NodeSet((0..p).collect())
    }

    pub fn singleton(v: NodeId) -> Self {
        NodeSet(vec![v])
    }

    /// Builds a set from an already sorted, duplicate-free vector.
    pub(crate) fn from_sorted_unchecked(v: Vec<NodeId>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        NodeSet(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = NodeId> + ExactSizeIterator + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[NodeId] {
        &self.0
    }

    pub fn max_node(&self) -> Option<NodeId> {
        self.0.last().copied()
    }

    /// Returns `true` if the node was not present.
    pub fn insert(&mut self, v: NodeId) -> bool {
        match self.0.binary_search(&v) {
            Ok(_) => false,
            Err(pos) => {
                self.0.insert(pos, v);
                true
            }
        }
    }

    pub fn remove(&mut self, v: NodeId) -> bool {
        match self.0.binary_search(&v) {
            Ok(pos) => {
                self.0.remove(pos);
                true
            }
            Err(_) => false,
        }
    }

    pub fn union(&self, other: &NodeSet) -> NodeSet {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.0, &other.0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        NodeSet(out)
    }

    pub fn intersection(&self, other: &NodeSet) -> NodeSet {
        NodeSet(self.0.iter().copied().filter(|v| other.contains(*v)).collect())
    }

    pub fn difference(&self, other: &NodeSet) -> NodeSet {
        NodeSet(self.0.iter().copied().filter(|v| !other.contains(*v)).collect())
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.0.iter().all(|v| other.contains(*v))
    }

    pub fn is_disjoint(&self, other: &NodeSet) -> bool {
        self.0.iter().all(|v| !other.contains(*v))
    }

    pub fn into_vec(self) -> Vec<NodeId> {
        self.0
    }
}

impl FromIterator<NodeId> for NodeSet {
    fn from_iter<I: IntoIterator<Item = NodeId>>(iter: I) -> Self {
        let mut v: Vec<NodeId> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        NodeSet(v)
    }
}

impl From<Vec<NodeId>> for NodeSet {
    fn from(v: Vec<NodeId>) -> Self {
        v.into_iter().collect()
    }
}

impl<const N: usize> From<[NodeId; N]> for NodeSet {
    fn from(v: [NodeId; N]) -> Self {
        v.into_iter().collect()
    }
}

impl<'a> IntoIterator for &'a NodeSet {
    type Item = NodeId;
    type IntoIter = std::iter::Copied<std::slice::Iter<'a, NodeId>>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter().copied()
    }
}

impl fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}

impl fmt::Display for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// Which relatives [`Dag::relatives`] returns. All sets are exclusive of the
/// queried node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Ancestors,
    Descendants,
    Parents,
    Children,
}

/// Directed acyclic graph. Parent and child lists are sorted.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "PdagRepr", try_from = "PdagRepr")]
pub struct Dag {
    parents: Vec<Vec<NodeId>>,
    children: Vec<Vec<NodeId>>,
    topo: Vec<NodeId>,
}

impl Dag {
    /// Builds a DAG on `p` nodes, rejecting self-loops, duplicate edges,
    /// out-of-range endpoints and directed cycles.
    pub fn new(p: usize, edges: &[(NodeId, NodeId)]) -> Result<Self, GraphError> {
        let mut parents = vec![Vec::new(); p];
        let mut children = vec![Vec::new(); p];
        for &(u, v) in edges {
            if u >= p {
                return Err(GraphError::NodeOutOfRange { node: u, p });
            }
            if v >= p {
                return Err(GraphError::NodeOutOfRange { node: v, p });
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            children[u].push(v);
            parents[v].push(u);
        }
        for list in parents.iter_mut().chain(children.iter_mut()) {
            list.sort_unstable();
        }
        for (v, list) in children.iter().enumerate() {
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(GraphError::DuplicateEdge(v, w[0]));
            }
        }
        let topo = topological_order(&parents, &children).ok_or(GraphError::Cycle)?;
        Ok(Dag {
            parents,
            children,
            topo,
        })
    }

    /// Edgeless DAG on `p` nodes.
    pub fn empty(p: usize) -> Self {
        Dag {
            parents: vec![Vec::new(); p],
            children: vec![Vec::new(); p],
            topo: (0..p).collect(),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.parents.len()
    }

    pub fn num_edges(&self) -> usize {
        self.children.iter().map(Vec::len).sum()
    }

    /// Edges `(u, v)` meaning `u -> v`, sorted.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        self.children
            .iter()
            .enumerate()
            .flat_map(|(u, ch)| ch.iter().map(move |&v| (u, v)))
            .collect()
    }

    pub fn parents(&self, v: NodeId) -> &[NodeId] {
        &self.parents[v]
    }

    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.children[v]
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.children[u].binary_search(&v).is_ok()
    }

    pub fn is_adjacent(&self, u: NodeId, v: NodeId) -> bool {
        self.has_edge(u, v) || self.has_edge(v, u)
    }

    /// A topological order (parents before children).
    pub fn topological_order(&self) -> &[NodeId] {
        &self.topo
    }

    fn check(&self, v: NodeId) -> Result<(), GraphError> {
        if v < self.num_nodes() {
            Ok(())
        } else {
            Err(GraphError::NodeOutOfRange {
                node: v,
                p: self.num_nodes(),
            })
        }
    }

    fn check_set(&self, s: &NodeSet) -> Result<(), GraphError> {
        match s.max_node() {
            Some(v) => self.check(v),
            None => Ok(()),
        }
    }

    pub fn relatives(&self, v: NodeId, kind: Relation) -> Result<NodeSet, GraphError> {
        self.check(v)?;
        Ok(match kind {
            Relation::Parents => NodeSet::from_sorted_unchecked(self.parents[v].clone()),
            Relation::Children => NodeSet::from_sorted_unchecked(self.children[v].clone()),
            Relation::Ancestors => self.closure(std::iter::once(v), &self.parents, false),
            Relation::Descendants => self.closure(std::iter::once(v), &self.children, false),
        })
    }

    pub fn ancestors(&self, v: NodeId) -> NodeSet {
        self.closure(std::iter::once(v), &self.parents, false)
    }

    pub fn descendants(&self, v: NodeId) -> NodeSet {
        self.closure(std::iter::once(v), &self.children, false)
    }

    /// `Anc[S]`: the set together with all of its ancestors.
    pub fn ancestral_closure(&self, s: &NodeSet) -> NodeSet {
        self.closure(s.iter(), &self.parents, true)
    }

    fn closure(
        &self,
        start: impl Iterator<Item = NodeId>,
        next: &[Vec<NodeId>],
        inclusive: bool,
    ) -> NodeSet {
        let p = self.num_nodes();
        let mut seen = vec![false; p];
        let mut stack: Vec<NodeId> = Vec::new();
        for s in start {
            if inclusive {
                seen[s] = true;
            }
            stack.push(s);
        }
        while let Some(x) = stack.pop() {
            for &y in &next[x] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        NodeSet::from_sorted_unchecked((0..p).filter(|&v| seen[v]).collect())
    }

    /// `src(W)`: the members of `w` without an ancestor in `w`.
    pub fn sources(&self, w: &NodeSet) -> NodeSet {
        w.iter()
            .filter(|&v| self.ancestors(v).is_disjoint(w))
            .collect()
    }

    /// True iff `s` is closed under ancestors.
    pub fn is_prefix_set(&self, s: &NodeSet) -> bool {
        s.iter().all(|v| self.parents[v].iter().all(|&q| s.contains(q)))
    }

    /// d-separation of `a` and `b` given `c`, via an active-trail reachability
    /// pass. Overlap of `c` with `a ∪ b` is dropped before the query.
    pub fn d_separated(&self, a: &NodeSet, b: &NodeSet, c: &NodeSet) -> Result<bool, GraphError> {
        let c = self.prepare_separation(a, b, c)?;
        Ok(!self.reachable_given(a, &c).iter().any(|v| b.contains(v)))
    }

    fn prepare_separation(
        &self,
        a: &NodeSet,
        b: &NodeSet,
        c: &NodeSet,
    ) -> Result<NodeSet, GraphError> {
        self.check_set(a)?;
        self.check_set(b)?;
        self.check_set(c)?;
        if a.is_empty() || b.is_empty() {
            return Err(GraphError::EmptyEndpointSet);
        }
        let overlap = a.intersection(b);
        if let Some(v) = overlap.iter().next() {
            return Err(GraphError::OverlappingEndpoints(v));
        }
        Ok(c.difference(&a.union(b)))
    }

    /// Nodes reachable from `a` along trails that are active given `c`.
    fn reachable_given(&self, a: &NodeSet, c: &NodeSet) -> NodeSet {
        let p = self.num_nodes();
        let anc_c = self.ancestral_closure(c);
        // visited[v][0]: entered v from a child (moving up)
        // visited[v][1]: entered v from a parent (moving down)
        let mut visited = vec![[false; 2]; p];
        let mut reached = vec![false; p];
        let mut queue: VecDeque<(NodeId, usize)> = a.iter().map(|v| (v, 0)).collect();
        while let Some((y, dir)) = queue.pop_front() {
            if visited[y][dir] {
                continue;
            }
            visited[y][dir] = true;
            let in_c = c.contains(y);
            if !in_c {
                reached[y] = true;
            }
            if dir == 0 {
                if !in_c {
                    queue.extend(self.parents[y].iter().map(|&z| (z, 0)));
                    queue.extend(self.children[y].iter().map(|&z| (z, 1)));
                }
            } else {
                if !in_c {
                    queue.extend(self.children[y].iter().map(|&z| (z, 1)));
                }
                if anc_c.contains(y) {
                    queue.extend(self.parents[y].iter().map(|&z| (z, 0)));
                }
            }
        }
        NodeSet::from_sorted_unchecked((0..p).filter(|&v| reached[v]).collect())
    }

    /// Separation of `a` from `b` by `c` in the moral graph of the ancestral
    /// subgraph on `Anc[a ∪ b ∪ c]`. Agrees with [`Dag::d_separated`].
    pub fn moral_separated(
        &self,
        a: &NodeSet,
        b: &NodeSet,
        c: &NodeSet,
    ) -> Result<bool, GraphError> {
        let c = self.prepare_separation(a, b, c)?;
        let p = self.num_nodes();
        let keep = self.ancestral_closure(&a.union(b).union(&c));
        let mut adj = vec![Vec::new(); p];
        for v in keep.iter() {
            let pa = &self.parents[v];
            for &u in pa {
                adj[u].push(v);
                adj[v].push(u);
            }
            for (i, &x) in pa.iter().enumerate() {
                for &y in &pa[i + 1..] {
                    adj[x].push(y);
                    adj[y].push(x);
                }
            }
        }
        let mut seen = vec![false; p];
        let mut stack: Vec<NodeId> = a.iter().collect();
        for v in a.iter() {
            seen[v] = true;
        }
        while let Some(x) = stack.pop() {
            if b.contains(x) {
                return Ok(false);
            }
            for &y in &adj[x] {
                if !seen[y] && !c.contains(y) {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        Ok(true)
    }

    /// Converts to a partially directed graph with every edge directed.
    pub fn to_pdag(&self) -> Pdag {
        let mut g = Pdag::new(self.num_nodes());
        for (u, v) in self.edges() {
            g.set_directed(u, v);
        }
        g
    }
}

impl fmt::Debug for Dag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dag(p={}, ", self.num_nodes())?;
        f.debug_list()
            .entries(self.edges().iter().map(|(u, v)| format!("{u}->{v}")))
            .finish()?;
        write!(f, ")")
    }
}

fn topological_order(parents: &[Vec<NodeId>], children: &[Vec<NodeId>]) -> Option<Vec<NodeId>> {
    let p = parents.len();
    let mut indeg: Vec<usize> = parents.iter().map(Vec::len).collect();
    // Smallest ready node first, so the order is deterministic.
    let mut ready: std::collections::BinaryHeap<std::cmp::Reverse<NodeId>> = (0..p)
        .filter(|&v| indeg[v] == 0)
        .map(std::cmp::Reverse)
        .collect();
    let mut order = Vec::with_capacity(p);
    while let Some(std::cmp::Reverse(v)) = ready.pop() {
        order.push(v);
        for &c in &children[v] {
            indeg[c] -= 1;
            if indeg[c] == 0 {
                ready.push(std::cmp::Reverse(c));
            }
        }
    }
    (order.len() == p).then_some(order)
}

/// Status of an unordered node pair in a [`Pdag`], seen from the smaller id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeMark {
    Undirected,
    /// `u -> v` for the pair read as `(u, v)`.
    Forward,
    /// `v -> u` for the pair read as `(u, v)`.
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
enum Cell {
    #[default]
    Absent,
    Undirected,
    Out,
    In,
}

/// Partially directed graph. Each unordered pair is absent, undirected or
/// directed one way.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "PdagRepr", try_from = "PdagRepr")]
pub struct Pdag {
    p: usize,
    cells: Vec<Cell>,
}

impl Pdag {
    /// Edgeless graph on `p` nodes.
    pub fn new(p: usize) -> Self {
        Pdag {
            p,
            cells: vec![Cell::Absent; p * p],
        }
    }

    /// Complete undirected graph on `p` nodes.
    pub fn complete_undirected(p: usize) -> Self {
        let mut g = Pdag::new(p);
        for u in 0..p {
            for v in (u + 1)..p {
                g.set_undirected(u, v);
            }
        }
        g
    }

    pub fn num_nodes(&self) -> usize {
        self.p
    }

    fn cell(&self, u: NodeId, v: NodeId) -> Cell {
        self.cells[u * self.p + v]
    }

    fn set_cell(&mut self, u: NodeId, v: NodeId, c: Cell) {
        let mirror = match c {
            Cell::Out => Cell::In,
            Cell::In => Cell::Out,
            other => other,
        };
        self.cells[u * self.p + v] = c;
        self.cells[v * self.p + u] = mirror;
    }

    fn check_pair(&self, u: NodeId, v: NodeId) -> Result<(), GraphError> {
        for x in [u, v] {
            if x >= self.p {
                return Err(GraphError::NodeOutOfRange { node: x, p: self.p });
            }
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        Ok(())
    }

    /// Adds `u - v`; fails if the pair already has an edge.
    pub fn add_undirected(&mut self, u: NodeId, v: NodeId) -> Result<(), GraphError> {
        self.check_pair(u, v)?;
        if self.is_adjacent(u, v) {
            return Err(GraphError::DuplicateEdge(u, v));
        }
        self.set_undirected(u, v);
        Ok(())
    }

    /// Adds `u -> v`; fails if the pair already has an edge.
    pub fn add_directed(&mut self, u: NodeId, v: NodeId) -> Result<(), GraphError> {
        self.check_pair(u, v)?;
        if self.is_adjacent(u, v) {
            return Err(GraphError::DuplicateEdge(u, v));
        }
        self.set_directed(u, v);
        Ok(())
    }

    /// Sets the pair to `u - v`, replacing whatever was there.
    pub fn set_undirected(&mut self, u: NodeId, v: NodeId) {
        debug_assert!(u != v);
        self.set_cell(u, v, Cell::Undirected);
    }

    /// Sets the pair to `u -> v`, replacing whatever was there.
    pub fn set_directed(&mut self, u: NodeId, v: NodeId) {
        debug_assert!(u != v);
        self.set_cell(u, v, Cell::Out);
    }

    pub fn remove_edge(&mut self, u: NodeId, v: NodeId) {
        self.set_cell(u, v, Cell::Absent);
    }

    pub fn is_adjacent(&self, u: NodeId, v: NodeId) -> bool {
        self.cell(u, v) != Cell::Absent
    }

    pub fn has_directed(&self, u: NodeId, v: NodeId) -> bool {
        self.cell(u, v) == Cell::Out
    }

    pub fn has_undirected(&self, u: NodeId, v: NodeId) -> bool {
        self.cell(u, v) == Cell::Undirected
    }

    /// Edge status of the pair read as `(u, v)`.
    pub fn mark(&self, u: NodeId, v: NodeId) -> Option<EdgeMark> {
        match self.cell(u, v) {
            Cell::Absent => None,
            Cell::Undirected => Some(EdgeMark::Undirected),
            Cell::Out => Some(EdgeMark::Forward),
            Cell::In => Some(EdgeMark::Backward),
        }
    }

    /// All adjacent nodes, regardless of edge type.
    pub fn neighbors(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.p).filter(move |&u| self.cells[v * self.p + u] != Cell::Absent)
    }

    pub fn adjacent_set(&self, v: NodeId) -> NodeSet {
        NodeSet::from_sorted_unchecked(self.neighbors(v).collect())
    }

    pub fn undirected_neighbors(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.p).filter(move |&u| self.cells[v * self.p + u] == Cell::Undirected)
    }

    pub fn parents(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.p).filter(move |&u| self.cells[v * self.p + u] == Cell::In)
    }

    pub fn children(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.p).filter(move |&u| self.cells[v * self.p + u] == Cell::Out)
    }

    /// Directed edges `(u, v)` sorted lexicographically.
    pub fn directed_edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for u in 0..self.p {
            for v in 0..self.p {
                if self.cell(u, v) == Cell::Out {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Undirected edges `(u, v)` with `u < v`, sorted.
    pub fn undirected_edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for u in 0..self.p {
            for v in (u + 1)..self.p {
                if self.cell(u, v) == Cell::Undirected {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Skeleton pairs `(u, v)` with `u < v`, sorted.
    pub fn skeleton(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for u in 0..self.p {
            for v in (u + 1)..self.p {
                if self.is_adjacent(u, v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn num_edges(&self) -> usize {
        self.cells.iter().filter(|c| **c != Cell::Absent).count() / 2
    }

    /// True iff the directed part contains a directed cycle.
    pub fn has_directed_cycle(&self) -> bool {
        let parents: Vec<Vec<NodeId>> = (0..self.p).map(|v| self.parents(v).collect()).collect();
        let children: Vec<Vec<NodeId>> = (0..self.p).map(|v| self.children(v).collect()).collect();
        topological_order(&parents, &children).is_none()
    }

    /// Converts to a [`Dag`] if every edge is directed and acyclic.
    pub fn to_dag(&self) -> Result<Dag, GraphError> {
        if let Some(&(u, v)) = self.undirected_edges().first() {
            return Err(GraphError::UndirectedEdge(u, v));
        }
        Dag::new(self.p, &self.directed_edges())
    }

    /// The graph restricted to `nodes` (other nodes keep their ids but lose
    /// all edges).
    pub fn induced(&self, nodes: &NodeSet) -> Pdag {
        let mut g = Pdag::new(self.p);
        for u in nodes.iter() {
            for v in nodes.iter() {
                if u != v {
                    let c = self.cell(u, v);
                    g.cells[u * self.p + v] = c;
                }
            }
        }
        g
    }

    /// True iff the skeleton restricted to `nodes` contains a clique of at
    /// least `k` nodes.
    ///
    /// Pivoting Bron–Kerbosch that stops at the first clique reaching size
    /// `k`. Candidates with fewer than `k - 1` neighbours inside `nodes` are
    /// pruned up front.
    pub fn has_clique_of_size(&self, nodes: &NodeSet, k: usize) -> bool {
        if k == 0 {
            return true;
        }
        if nodes.len() < k {
            return false;
        }
        if k == 1 {
            return true;
        }
        // Iteratively strip nodes whose degree inside the candidate set is too
        // small to be part of a k-clique.
        let mut cand: Vec<NodeId> = nodes.iter().collect();
        loop {
            let before = cand.len();
            let snapshot = cand.clone();
            cand.retain(|&v| {
                snapshot.iter().filter(|&&u| u != v && self.is_adjacent(u, v)).count() + 1 >= k
            });
            if cand.len() == before {
                break;
            }
        }
        if cand.len() < k {
            return false;
        }
        let mut r = Vec::new();
        self.bron_kerbosch(&mut r, cand, Vec::new(), k)
    }

    fn bron_kerbosch(
        &self,
        r: &mut Vec<NodeId>,
        mut cand: Vec<NodeId>,
        mut excl: Vec<NodeId>,
        k: usize,
    ) -> bool {
        if r.len() >= k {
            return true;
        }
        if r.len() + cand.len() < k {
            return false;
        }
        if cand.is_empty() {
            return false;
        }
        let pivot = cand
            .iter()
            .chain(excl.iter())
            .copied()
            .max_by_key(|&u| cand.iter().filter(|&&v| self.is_adjacent(u, v)).count())
            .expect("candidate set is nonempty");
        let branch: Vec<NodeId> = cand
            .iter()
            .copied()
            .filter(|&v| !self.is_adjacent(pivot, v))
            .collect();
        for v in branch {
            let next_cand: Vec<NodeId> = cand.iter().copied().filter(|&u| self.is_adjacent(u, v)).collect();
            let next_excl: Vec<NodeId> = excl.iter().copied().filter(|&u| self.is_adjacent(u, v)).collect();
            r.push(v);
            if self.bron_kerbosch(r, next_cand, next_excl, k) {
                return true;
            }
            r.pop();
            cand.retain(|&u| u != v);
            excl.push(v);
        }
        false
    }

    /// Size of the largest clique in the skeleton restricted to `nodes`.
    pub fn max_clique_size(&self, nodes: &NodeSet) -> usize {
        let mut k = 0;
        while self.has_clique_of_size(nodes, k + 1) {
            k += 1;
        }
        k
    }

    /// Size of the largest clique formed by undirected edges only.
    pub fn max_undirected_clique_size(&self) -> usize {
        let mut und = Pdag::new(self.p);
        for (u, v) in self.undirected_edges() {
            und.set_undirected(u, v);
        }
        // Isolated nodes form cliques of size 1.
        und.max_clique_size(&NodeSet::full(self.p))
    }
}

impl fmt::Debug for Pdag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pdag(p={}, ", self.p)?;
        let mut items: Vec<String> = self
            .directed_edges()
            .iter()
            .map(|(u, v)| format!("{u}->{v}"))
            .collect();
        items.extend(self.undirected_edges().iter().map(|(u, v)| format!("{u}--{v}")));
        f.debug_list().entries(items).finish()?;
        write!(f, ")")
    }
}

/// Wire form shared by [`Dag`] and [`Pdag`].
#[derive(Serialize, Deserialize)]
struct PdagRepr {
    p: usize,
    #[serde(default)]
    directed: Vec<(NodeId, NodeId)>,
    #[serde(default)]
    undirected: Vec<(NodeId, NodeId)>,
}

impl From<Pdag> for PdagRepr {
    fn from(g: Pdag) -> Self {
        PdagRepr {
            p: g.p,
            directed: g.directed_edges(),
            undirected: g.undirected_edges(),
        }
    }
}

impl TryFrom<PdagRepr> for Pdag {
    type Error = GraphError;

    fn try_from(r: PdagRepr) -> Result<Self, GraphError> {
        let mut g = Pdag::new(r.p);
        for (u, v) in r.directed {
            g.add_directed(u, v)?;
        }
        for (u, v) in r.undirected {
            g.add_undirected(u, v)?;
        }
        Ok(g)
    }
}

impl From<Dag> for PdagRepr {
    fn from(g: Dag) -> Self {
        g.to_pdag().into()
    }
}

impl TryFrom<PdagRepr> for Dag {
    type Error = GraphError;

    fn try_from(r: PdagRepr) -> Result<Self, GraphError> {
        Pdag::try_from(r)?.to_dag()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn worked_example() -> Dag {
        Dag::new(5, &[(0, 2), (1, 2), (1, 4), (2, 3), (3, 4)]).unwrap()
    }

    fn chain() -> Dag {
        Dag::new(3, &[(0, 1), (1, 2)]).unwrap()
    }

    fn collider() -> Dag {
        Dag::new(3, &[(0, 1), (2, 1)]).unwrap()
    }

    fn s(v: &[usize]) -> NodeSet {
        v.iter().copied().collect()
    }

    #[test]
    fn node_set_is_canonical() {
        let a: NodeSet = vec![3, 1, 3, 2].into();
        assert_eq!(a.as_slice(), &[1, 2, 3]);
        assert_eq!(a.union(&s(&[0, 2])), s(&[0, 1, 2, 3]));
        assert_eq!(a.difference(&s(&[2])), s(&[1, 3]));
        assert_eq!(a.to_string(), "{1,2,3}");
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert_eq!(Dag::new(2, &[(0, 1), (1, 0)]).unwrap_err(), GraphError::Cycle);
        assert_eq!(Dag::new(2, &[(0, 0)]).unwrap_err(), GraphError::SelfLoop(0));
        assert_eq!(
            Dag::new(2, &[(0, 1), (0, 1)]).unwrap_err(),
            GraphError::DuplicateEdge(0, 1)
        );
        assert!(matches!(
            Dag::new(2, &[(0, 5)]),
            Err(GraphError::NodeOutOfRange { node: 5, p: 2 })
        ));
    }

    #[test]
    fn ancestral_queries() {
        assert_eq!(chain().relatives(2, Relation::Ancestors).unwrap(), s(&[0, 1]));
        assert_eq!(worked_example().relatives(4, Relation::Ancestors).unwrap(), s(&[0, 1, 2, 3]));
        assert_eq!(worked_example().relatives(0, Relation::Ancestors).unwrap(), s(&[]));
        assert_eq!(worked_example().relatives(1, Relation::Children).unwrap(), s(&[2, 4]));
        assert_eq!(worked_example().relatives(2, Relation::Descendants).unwrap(), s(&[3, 4]));
        assert_eq!(worked_example().relatives(4, Relation::Parents).unwrap(), s(&[1, 3]));
        assert!(chain().relatives(3, Relation::Parents).is_err());
    }

    #[test]
    fn sources_and_prefix_sets() {
        let g = worked_example();
        assert_eq!(g.sources(&s(&[2, 3, 4])), s(&[2]));
        assert_eq!(g.sources(&s(&[])), s(&[]));
        assert_eq!(Dag::empty(4).sources(&NodeSet::full(4)), NodeSet::full(4));
        assert!(g.is_prefix_set(&s(&[])));
        assert!(g.is_prefix_set(&NodeSet::full(5)));
        assert!(!g.is_prefix_set(&s(&[2])));
        assert!(g.is_prefix_set(&s(&[0, 1, 2])));
    }

    #[test]
    fn d_separation_examples() {
        let c = chain();
        assert!(c.d_separated(&s(&[0]), &s(&[2]), &s(&[1])).unwrap());
        assert!(!c.d_separated(&s(&[0]), &s(&[2]), &s(&[])).unwrap());
        let v = collider();
        assert!(v.d_separated(&s(&[0]), &s(&[2]), &s(&[])).unwrap());
        assert!(!v.d_separated(&s(&[0]), &s(&[2]), &s(&[1])).unwrap());
        let g = worked_example();
        assert!(g.d_separated(&s(&[0]), &s(&[1]), &s(&[])).unwrap());
        assert!(!g.d_separated(&s(&[0]), &s(&[1]), &s(&[3])).unwrap());
        assert!(!g.d_separated(&s(&[0]), &s(&[1]), &s(&[4])).unwrap());
    }

    #[test]
    fn d_separation_reduces_overlap() {
        let g = worked_example();
        // 0 ⟂ 3 | {0,1,2} reads as 0 ⟂ 3 | {1,2}
        assert!(g.d_separated(&s(&[0]), &s(&[3]), &s(&[0, 1, 2])).unwrap());
        assert_eq!(
            g.d_separated(&s(&[0, 1]), &s(&[1, 3]), &s(&[])).unwrap_err(),
            GraphError::OverlappingEndpoints(1)
        );
        assert_eq!(
            g.d_separated(&s(&[]), &s(&[1]), &s(&[])).unwrap_err(),
            GraphError::EmptyEndpointSet
        );
    }

    #[test]
    fn moral_separation_examples() {
        let v = collider();
        assert!(v.moral_separated(&s(&[0]), &s(&[2]), &s(&[])).unwrap());
        assert!(!v.moral_separated(&s(&[0]), &s(&[2]), &s(&[1])).unwrap());
    }

    #[test]
    fn clique_examples() {
        let mut tri = Pdag::new(3);
        tri.add_undirected(0, 1).unwrap();
        tri.add_undirected(1, 2).unwrap();
        tri.add_directed(0, 2).unwrap();
        let all = NodeSet::full(3);
        assert!(tri.has_clique_of_size(&all, 3));
        assert!(!tri.has_clique_of_size(&all, 4));

        let mut star = Pdag::new(4);
        for leaf in 1..4 {
            star.add_undirected(0, leaf).unwrap();
        }
        assert!(!star.has_clique_of_size(&NodeSet::full(4), 3));
        assert!(star.has_clique_of_size(&NodeSet::full(4), 2));
        assert!(star.has_clique_of_size(&NodeSet::full(4), 0));
        assert!(star.has_clique_of_size(&NodeSet::full(4), 1));
        assert!(star.has_clique_of_size(&NodeSet::new(), 0));
        assert!(!star.has_clique_of_size(&NodeSet::new(), 1));
        // restricted to leaves only
        assert!(!star.has_clique_of_size(&s(&[1, 2, 3]), 2));
    }

    #[test]
    fn pdag_marks_are_mirrored() {
        let mut g = Pdag::new(3);
        g.add_directed(2, 0).unwrap();
        assert_eq!(g.mark(0, 2), Some(EdgeMark::Backward));
        assert_eq!(g.mark(2, 0), Some(EdgeMark::Forward));
        assert!(g.add_undirected(0, 2).is_err());
        assert_eq!(g.parents(0).collect::<Vec<_>>(), vec![2]);
        g.remove_edge(0, 2);
        assert_eq!(g.num_edges(), 0);
    }

    #[test]
    fn directed_cycle_detection() {
        let mut g = Pdag::new(3);
        g.set_directed(0, 1);
        g.set_directed(1, 2);
        assert!(!g.has_directed_cycle());
        g.set_directed(2, 0);
        assert!(g.has_directed_cycle());
    }
}
