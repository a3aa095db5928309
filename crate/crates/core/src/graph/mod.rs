//! Simple undirected graphs on vertices `0..n`, with the exact
//! combinatorial quantities the bound machinery relies on.

mod families;
mod io;
mod stable;

use std::collections::BTreeSet;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{CoposError, Result};
use crate::matrix::SymMatrix;

pub use families::{gk_u, gk_v, gk_w, lk_triple, Family, GRAPH_B_MARKED, GRAPH_C_MARKED};
pub use io::{parse_dimacs, parse_graph, to_dimacs};
pub use stable::{StableMode, StableSetFamily};

/// Default cap on the vertex count for exact (exponential-time) enumeration.
pub const DEFAULT_VERTEX_CAP: usize = 64;
/// Bitset width used by the enumeration kernels; caps above this are clamped.
pub const MAX_VERTEX_CAP: usize = 128;

/// An immutable simple graph. Vertices are `0..n`; edges are stored as
/// sorted pairs `(i, j)` with `i < j`.
#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<bool>>,
    name: Option<String>,
    alpha: OnceLock<usize>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.edges == other.edges
    }
}

impl Eq for Graph {}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    n: usize,
    edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
}

impl Serialize for Graph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GraphRepr {
            n: self.n,
            edges: self.edges.iter().map(|&(i, j)| [i, j]).collect(),
            name: self.name.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = GraphRepr::deserialize(d)?;
        let g = Graph::new(repr.n, repr.edges.iter().map(|e| (e[0], e[1])))
            .map_err(serde::de::Error::custom)?;
        Ok(match repr.name {
            Some(name) => g.with_name(name),
            None => g,
        })
    }
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicate edges and
    /// out-of-range endpoints.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(CoposError::InvalidParameter(format!(
                    "edge ({a},{b}) has an endpoint outside 0..{n}"
                )));
            }
            if a == b {
                return Err(CoposError::InvalidParameter(format!("self-loop at {a}")));
            }
            let e = (a.min(b), a.max(b));
            if !set.insert(e) {
                return Err(CoposError::InvalidParameter(format!(
                    "duplicate edge ({},{})",
                    e.0, e.1
                )));
            }
        }
        Ok(Self::from_edge_set(n, set))
    }

    /// Builds a graph from a set of normalized pairs; duplicates are
    /// impossible by construction.
    fn from_edge_set(n: usize, set: BTreeSet<(usize, usize)>) -> Self {
        let mut adj = vec![vec![false; n]; n];
        for &(a, b) in &set {
            adj[a][b] = true;
            adj[b][a] = true;
        }
        Self {
            n,
            edges: set.into_iter().collect(),
            adj,
            name: None,
            alpha: OnceLock::new(),
        }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_edge_set(n, BTreeSet::new())
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.adj[i][j]
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&j| self.adj[i][j])
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].iter().filter(|&&b| b).count()
    }

    pub fn is_complete(&self) -> bool {
        self.edges.len() == self.n * self.n.saturating_sub(1) / 2
    }

    pub fn is_stable(&self, set: &[usize]) -> bool {
        set.iter()
            .enumerate()
            .all(|(a, &i)| set[a + 1..].iter().all(|&j| i != j && !self.adj[i][j]))
    }

    pub fn is_clique(&self, set: &[usize]) -> bool {
        set.iter()
            .enumerate()
            .all(|(a, &i)| set[a + 1..].iter().all(|&j| self.adj[i][j]))
    }

    /// `S^⊥`: the set together with all its neighbours, sorted.
    pub fn extended_neighborhood(&self, set: &[usize]) -> Vec<usize> {
        (0..self.n)
            .filter(|&v| set.iter().any(|&s| s == v || self.adj[s][v]))
            .collect()
    }

    /// Induced subgraph on `keep` (relabelled `0..keep.len()` in the given
    /// order). Returns the graph and the map from new to old labels.
    pub fn induced(&self, keep: &[usize]) -> (Graph, Vec<usize>) {
        let mut set = BTreeSet::new();
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate().skip(a + 1) {
                if self.adj[i][j] {
                    set.insert((a, b));
                }
            }
        }
        (Self::from_edge_set(keep.len(), set), keep.to_vec())
    }

    /// `G \ S`: deletes the given vertices.
    pub fn delete_vertices(&self, remove: &[usize]) -> (Graph, Vec<usize>) {
        let keep: Vec<usize> = (0..self.n).filter(|v| !remove.contains(v)).collect();
        self.induced(&keep)
    }

    /// `G \ S^⊥`.
    pub fn delete_extended_neighborhood(&self, set: &[usize]) -> (Graph, Vec<usize>) {
        self.delete_vertices(&self.extended_neighborhood(set))
    }

    /// `G_i = (G \ i^⊥) ⊕ K_{i^⊥}` on the original vertex labels.
    pub fn local_graph(&self, i: usize) -> Result<Graph> {
        if i >= self.n {
            return Err(CoposError::InvalidParameter(format!(
                "vertex {i} out of range 0..{}",
                self.n
            )));
        }
        let closed = self.extended_neighborhood(&[i]);
        let inside = |v: usize| closed.binary_search(&v).is_ok();
        let mut set: BTreeSet<(usize, usize)> = self
            .edges
            .iter()
            .copied()
            .filter(|&(a, b)| !inside(a) && !inside(b))
            .collect();
        for (k, &a) in closed.iter().enumerate() {
            for &b in &closed[k + 1..] {
                set.insert((a, b));
            }
        }
        Ok(Self::from_edge_set(self.n, set))
    }

    pub fn without_edge(&self, e: (usize, usize)) -> Graph {
        let e = (e.0.min(e.1), e.0.max(e.1));
        let set = self.edges.iter().copied().filter(|&f| f != e).collect();
        Self::from_edge_set(self.n, set)
    }

    pub fn complement(&self) -> Graph {
        let mut set = BTreeSet::new();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if !self.adj[i][j] {
                    set.insert((i, j));
                }
            }
        }
        Self::from_edge_set(self.n, set)
    }

    /// `G ⊕ H`, with the vertices of `h` shifted by `g.n()`.
    pub fn disjoint_union(&self, h: &Graph) -> Graph {
        let off = self.n;
        let set = self
            .edges
            .iter()
            .copied()
            .chain(h.edges.iter().map(|&(a, b)| (a + off, b + off)))
            .collect();
        Self::from_edge_set(self.n + h.n, set)
    }

    /// Connected components, each sorted, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut k = 0;
            while k < comp.len() {
                let v = comp[k];
                for u in 0..self.n {
                    if self.adj[v][u] && !seen[u] {
                        seen[u] = true;
                        comp.push(u);
                    }
                }
                k += 1;
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.components().len() == 1
    }

    pub fn adjacency_matrix(&self) -> SymMatrix {
        SymMatrix::from_fn(self.n, |i, j| if self.adj[i][j] { 1.0 } else { 0.0 })
    }

    /// `t (A_G + I) - J`; `t` defaults to `α(G)`.
    pub fn m_matrix(&self, t: Option<f64>) -> Result<SymMatrix> {
        if self.n == 0 {
            return Err(CoposError::InvalidParameter(
                "M_G is undefined for the empty vertex set".into(),
            ));
        }
        let t = match t {
            Some(t) => t,
            None => self.alpha()? as f64,
        };
        Ok(SymMatrix::from_fn(self.n, |i, j| {
            if i == j || self.adj[i][j] {
                t - 1.0
            } else {
                -1.0
            }
        }))
    }

    /// Neighbour bitmasks for the enumeration kernels.
    pub(crate) fn masks(&self, cap: usize) -> Result<Vec<u128>> {
        let limit = cap.min(MAX_VERTEX_CAP);
        if self.n > limit {
            return Err(CoposError::ResourceCap {
                what: "vertices for exact enumeration",
                size: self.n,
                limit,
            });
        }
        Ok((0..self.n)
            .map(|i| {
                (0..self.n)
                    .filter(|&j| self.adj[i][j])
                    .fold(0u128, |m, j| m | (1u128 << j))
            })
            .collect())
    }

    /// A cheap labelled-graph fingerprint mixing vertex count, edge list
    /// and a few rounds of degree refinement. Equal graphs hash equally;
    /// callers must compare graphs directly on a hit.
    pub fn fingerprint(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut colors: Vec<u64> = (0..self.n).map(|v| self.degree(v) as u64).collect();
        for _ in 0..3 {
            colors = (0..self.n)
                .map(|v| {
                    let mut neigh: Vec<u64> = self.neighbors(v).map(|u| colors[u]).collect();
                    neigh.sort_unstable();
                    let mut h = std::collections::hash_map::DefaultHasher::new();
                    colors[v].hash(&mut h);
                    neigh.hash(&mut h);
                    h.finish()
                })
                .collect();
        }
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.n.hash(&mut h);
        colors.hash(&mut h);
        self.edges.hash(&mut h);
        h.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c5() -> Graph {
        Family::Cycle(5).build().unwrap()
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(Graph::new(3, [(0, 0)]).is_err());
        assert!(Graph::new(3, [(0, 1), (1, 0)]).is_err());
        assert!(Graph::new(3, [(0, 3)]).is_err());
    }

    #[test]
    fn extended_neighborhood_examples() {
        let g = c5();
        assert_eq!(g.extended_neighborhood(&[0]), vec![0, 1, 4]);
        assert!(g.extended_neighborhood(&[]).is_empty());
        let star = Family::Star(3).build().unwrap();
        assert_eq!(star.extended_neighborhood(&[0]), vec![0, 1, 2, 3]);
    }

    #[test]
    fn local_graph_examples() {
        let g = c5();
        let g0 = g.local_graph(0).unwrap();
        let expected = Graph::new(5, [(0, 1), (0, 4), (1, 4), (2, 3)]).unwrap();
        assert_eq!(g0, expected);

        let with_isolated = Graph::new(4, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(with_isolated.local_graph(3).unwrap(), with_isolated);

        let k4 = Family::Complete(4).build().unwrap();
        assert_eq!(k4.local_graph(2).unwrap(), k4);
        assert!(k4.local_graph(4).is_err());
    }

    #[test]
    fn m_matrix_examples() {
        let k1 = Graph::empty(1);
        assert_eq!(k1.m_matrix(Some(1.0)).unwrap().get(0, 0), 0.0);
        let e2 = Graph::empty(2).m_matrix(Some(2.0)).unwrap();
        assert_eq!(e2.rows(), vec![vec![1.0, -1.0], vec![-1.0, 1.0]]);
        assert_eq!(c5().m_matrix(Some(2.0)).unwrap(), SymMatrix::horn());
        assert_eq!(c5().m_matrix(None).unwrap(), SymMatrix::horn());
        assert!(Graph::empty(0).m_matrix(Some(1.0)).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let g = Family::GraphB.build().unwrap();
        let s = serde_json::to_string(&g).unwrap();
        let h: Graph = serde_json::from_str(&s).unwrap();
        assert_eq!(g, h);
        assert!(serde_json::from_str::<Graph>(r#"{"n":2,"edges":[[0,0]]}"#).is_err());
    }

    #[test]
    fn components_of_union() {
        let g = c5().disjoint_union(&Graph::empty(2));
        assert_eq!(g.components().len(), 3);
        assert!(!g.is_connected());
        assert!(c5().is_connected());
    }
}
