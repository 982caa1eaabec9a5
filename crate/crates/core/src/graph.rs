//! Labeled simple undirected graphs: the GA genome and the Hamiltonian skeleton.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Edge = (usize, usize);

/// Standard graph families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    Path,
    Cycle,
    Complete,
}

impl FromStr for GraphKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "path" => Ok(GraphKind::Path),
            "cycle" => Ok(GraphKind::Cycle),
            "complete" => Ok(GraphKind::Complete),
            other => Err(Error::InvalidParameter(format!("unknown graph kind `{other}`"))),
        }
    }
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphKind::Path => "path",
            GraphKind::Cycle => "cycle",
            GraphKind::Complete => "complete",
        })
    }
}

/// A labeled simple graph on nodes `0..n`.
///
/// Edges are kept normalized (`u < v`), deduplicated and sorted, so two
/// graphs compare equal exactly when their canonical keys are equal.
/// Graphs are values: every mutator returns a new graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
}

#[derive(Serialize, Deserialize)]
struct RawGraph {
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<RawGraph> for Graph {
    type Error = Error;

    fn try_from(raw: RawGraph) -> Result<Self> {
        Graph::new(raw.n, raw.edges.into_iter().map(|[u, v]| (u, v)))
    }
}

impl From<Graph> for RawGraph {
    fn from(g: Graph) -> Self {
        RawGraph {
            n: g.n,
            edges: g.edges.into_iter().map(|(u, v)| [u, v]).collect(),
        }
    }
}

impl Graph {
    /// Builds a graph from edges given in any order or orientation.
    /// Repeated pairs collapse; self-loops and out-of-range endpoints are errors.
    pub fn new(n: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize("graph needs at least one node".into()));
        }
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge ({u},{v}) out of range for {n} nodes"
                )));
            }
            if u == v {
                return Err(Error::InvalidParameter(format!("self-loop at node {u}")));
            }
            set.insert((u.min(v), u.max(v)));
        }
        Ok(Graph {
            n,
            edges: set.into_iter().collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Canonically ordered edges.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.binary_search(&(u.min(v), u.max(v))).is_ok()
    }

    pub fn is_complete(&self) -> bool {
        self.edges.len() == self.n * (self.n - 1) / 2
    }

    /// Lexicographically sorted normalized edge list; equal graphs have equal keys.
    pub fn canonical_key(&self) -> Vec<Edge> {
        self.edges.clone()
    }

    /// Node pairs not joined by an edge, in canonical order.
    pub fn missing_edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in (u + 1)..self.n {
                if !self.has_edge(u, v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn with_edge(&self, u: usize, v: usize) -> Result<Graph> {
        Graph::new(self.n, self.edges.iter().copied().chain([(u, v)]))
    }

    /// Adjacency lists, each sorted.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Component label per node; labels are numbered in order of their smallest node.
    pub fn components(&self) -> Vec<usize> {
        let adj = self.adjacency();
        let mut label = vec![usize::MAX; self.n];
        let mut next = 0;
        for start in 0..self.n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = next;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if label[v] == usize::MAX {
                        label[v] = next;
                        queue.push_back(v);
                    }
                }
            }
            next += 1;
        }
        label
    }

    /// Breadth-first reachability from node 0 covers every node.
    pub fn is_connected(&self) -> bool {
        self.components().iter().all(|&c| c == 0)
    }

    /// Relabels node `i` as `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Graph> {
        if perm.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: perm.len(),
            });
        }
        let mut seen = vec![false; self.n];
        for &p in perm {
            if p >= self.n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidParameter("not a permutation".into()));
            }
        }
        Graph::new(self.n, self.edges.iter().map(|&(u, v)| (perm[u], perm[v])))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serialization is infallible")
    }

    pub fn from_json(s: &str) -> Result<Graph> {
        serde_json::from_str(s).map_err(|e| Error::InvalidParameter(format!("graph JSON: {e}")))
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} [", self.n)?;
        for (k, (u, v)) in self.edges.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{u}-{v}")?;
        }
        f.write_str("]")
    }
}

pub fn standard_graph(kind: GraphKind, n: usize) -> Result<Graph> {
    if n == 0 {
        return Err(Error::InvalidSize("graph needs at least one node".into()));
    }
    let path = (0..n.saturating_sub(1)).map(|i| (i, i + 1));
    match kind {
        GraphKind::Path => Graph::new(n, path),
        // n = 2 collapses to the single edge
        GraphKind::Cycle if n >= 2 => Graph::new(n, path.chain([(0, n - 1)])),
        GraphKind::Cycle => Graph::new(n, path),
        GraphKind::Complete => {
            Graph::new(n, (0..n).flat_map(|u| ((u + 1)..n).map(move |v| (u, v))))
        }
    }
}

/// Path graph plus `k` distinct uniformly chosen extra edges, `k` uniform in
/// `0..=extra_edge_budget` (capped by the number of missing pairs).
pub fn random_connected_init<R: Rng + ?Sized>(
    n: usize,
    extra_edge_budget: usize,
    rng: &mut R,
) -> Result<Graph> {
    let mut g = standard_graph(GraphKind::Path, n)?;
    let k = rng.random_range(0..=extra_edge_budget);
    for _ in 0..k {
        let next = add_random_missing_edge(&g, rng);
        if next.edge_count() == g.edge_count() {
            break;
        }
        g = next;
    }
    Ok(g)
}

/// Adds one uniformly chosen missing edge; complete graphs come back unchanged.
pub fn add_random_missing_edge<R: Rng + ?Sized>(g: &Graph, rng: &mut R) -> Graph {
    let missing = g.missing_edges();
    if missing.is_empty() {
        return g.clone();
    }
    let (u, v) = missing[rng.random_range(0..missing.len())];
    g.with_edge(u, v).expect("missing edge is in range")
}
