//! Finite base graph with its edge involution, spanning tree and homology
//! coordinates.
//!
//! Directed edges are indexed densely: positive edge `i` (declaration order)
//! is `2i`, its reversal is `2i + 1`.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Suffix appended to a positive edge id to name its reversal.
pub const REVERSED_SUFFIX: &str = ".rev";

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EdgeSpec {
    pub id: String,
    pub from: String,
    pub to: String,
}

/// JSON shape of a graph file.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GraphSpec {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeSpec>,
}

impl GraphSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// A directed edge as seen from the outside.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientedEdge {
    pub id: String,
    pub origin: String,
    pub terminus: String,
    pub reversed: String,
    pub is_positive: bool,
}

#[derive(Debug, Clone)]
pub struct BaseGraph {
    vertices: Vec<String>,
    vertex_index: HashMap<String, usize>,
    edge_ids: Vec<String>,
    edge_index: HashMap<String, usize>,
    origin: Vec<usize>,
    terminus: Vec<usize>,
    /// Directed edges leaving each vertex, increasing index.
    outgoing: Vec<Vec<usize>>,
}

#[inline]
pub fn reversed(d: usize) -> usize {
    d ^ 1
}

#[inline]
pub fn is_positive(d: usize) -> bool {
    d & 1 == 0
}

impl BaseGraph {
    pub fn build(spec: &GraphSpec) -> Result<Self> {
        if spec.vertices.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut vertex_index = HashMap::new();
        for (i, v) in spec.vertices.iter().enumerate() {
            if vertex_index.insert(v.clone(), i).is_some() {
                return Err(Error::DuplicateEdgeId(v.clone()));
            }
        }
        let mut edge_ids = Vec::with_capacity(2 * spec.edges.len());
        let mut edge_index = HashMap::new();
        let mut origin = Vec::new();
        let mut terminus = Vec::new();
        for e in &spec.edges {
            let lookup = |v: &String| {
                vertex_index.get(v).copied().ok_or_else(|| Error::DanglingEndpoint {
                    edge: e.id.clone(),
                    vertex: v.clone(),
                })
            };
            let (o, t) = (lookup(&e.from)?, lookup(&e.to)?);
            let rev = format!("{}{}", e.id, REVERSED_SUFFIX);
            for (id, a, b) in [(e.id.clone(), o, t), (rev, t, o)] {
                if edge_index.insert(id.clone(), edge_ids.len()).is_some() {
                    return Err(Error::DuplicateEdgeId(id));
                }
                edge_ids.push(id);
                origin.push(a);
                terminus.push(b);
            }
        }
        let mut outgoing = vec![Vec::new(); spec.vertices.len()];
        for (d, &o) in origin.iter().enumerate() {
            outgoing[o].push(d);
        }
        let g = BaseGraph {
            vertices: spec.vertices.clone(),
            vertex_index,
            edge_ids,
            edge_index,
            origin,
            terminus,
            outgoing,
        };
        g.check_connected()?;
        Ok(g)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::build(&GraphSpec::from_json(text)?)
    }

    fn check_connected(&self) -> Result<()> {
        let root = self.root();
        let mut seen = vec![false; self.n_vertices()];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &d in &self.outgoing[v] {
                let w = self.terminus[d];
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(v) => Err(Error::DisconnectedGraph(self.vertices[v].clone())),
            None => Ok(()),
        }
    }

    /// Lexicographically smallest vertex id.
    pub fn root(&self) -> usize {
        (0..self.n_vertices())
            .min_by(|&a, &b| self.vertices[a].cmp(&self.vertices[b]))
            .expect("graph has vertices")
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_positive(&self) -> usize {
        self.edge_ids.len() / 2
    }

    pub fn n_directed(&self) -> usize {
        self.edge_ids.len()
    }

    pub fn betti(&self) -> usize {
        self.n_positive() + 1 - self.n_vertices()
    }

    pub fn origin(&self, d: usize) -> usize {
        self.origin[d]
    }

    pub fn terminus(&self, d: usize) -> usize {
        self.terminus[d]
    }

    pub fn outgoing(&self, v: usize) -> &[usize] {
        &self.outgoing[v]
    }

    pub fn vertex_id(&self, v: usize) -> &str {
        &self.vertices[v]
    }

    pub fn vertex_ids(&self) -> &[String] {
        &self.vertices
    }

    pub fn edge_id(&self, d: usize) -> &str {
        &self.edge_ids[d]
    }

    pub fn vertex(&self, id: &str) -> Result<usize> {
        self.vertex_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(id.to_string()))
    }

    pub fn edge(&self, id: &str) -> Result<usize> {
        self.edge_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownEdge(id.to_string()))
    }

    pub fn oriented_edge(&self, d: usize) -> OrientedEdge {
        OrientedEdge {
            id: self.edge_ids[d].clone(),
            origin: self.vertices[self.origin[d]].clone(),
            terminus: self.vertices[self.terminus[d]].clone(),
            reversed: self.edge_ids[reversed(d)].clone(),
            is_positive: is_positive(d),
        }
    }

    /// Directed edges touching `v` in either direction.
    pub fn incident(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_directed()).filter(move |&d| self.origin[d] == v || self.terminus[d] == v)
    }

    /// Validates a sequence of directed edges as a path.
    pub fn path(&self, edges: Vec<usize>) -> Result<Path> {
        for &d in &edges {
            if d >= self.n_directed() {
                return Err(Error::UnknownEdge(d.to_string()));
            }
        }
        for w in edges.windows(2) {
            if self.terminus[w[0]] != self.origin[w[1]] {
                return Err(Error::NotConcatenated(
                    self.edge_ids[w[0]].clone(),
                    self.edge_ids[w[1]].clone(),
                ));
            }
        }
        Ok(Path { edges })
    }

    pub fn path_from_ids<S: AsRef<str>>(&self, ids: &[S]) -> Result<Path> {
        let edges = ids
            .iter()
            .map(|id| self.edge(id.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        self.path(edges)
    }

    /// Component `i` counts passes through positive edge `i` minus passes
    /// through its reversal.
    pub fn incidence_vector(&self, p: &Path) -> Vec<i64> {
        let mut v = vec![0; self.n_positive()];
        for &d in &p.edges {
            v[d / 2] += if is_positive(d) { 1 } else { -1 };
        }
        v
    }

    /// Breadth-first spanning tree from the root; edges are scanned in
    /// declaration order.
    pub fn spanning_tree(&self) -> SpanningTree {
        let n = self.n_vertices();
        let root = self.root();
        let mut parent_edge = vec![None; n];
        let mut seen = vec![false; n];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            // positive edges in declaration order, either orientation
            for d in 0..self.n_directed() {
                if self.origin[d] != v {
                    continue;
                }
                let w = self.terminus[d];
                if !seen[w] {
                    seen[w] = true;
                    parent_edge[w] = Some(d);
                    queue.push_back(w);
                }
            }
        }
        let mut in_tree = vec![false; self.n_positive()];
        for d in parent_edge.iter().flatten() {
            in_tree[d / 2] = true;
        }
        SpanningTree {
            root,
            parent_edge,
            in_tree,
        }
    }
}

/// A concatenated edge sequence.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Path {
    pub edges: Vec<usize>,
}

impl Path {
    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_closed(&self, g: &BaseGraph) -> bool {
        match (self.edges.first(), self.edges.last()) {
            (Some(&a), Some(&b)) => g.origin(a) == g.terminus(b),
            _ => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpanningTree {
    pub root: usize,
    /// Directed tree edge entering each vertex from its parent.
    pub parent_edge: Vec<Option<usize>>,
    /// Per positive edge: membership in the tree.
    pub in_tree: Vec<bool>,
}

impl SpanningTree {
    pub fn positive_edges(&self) -> Vec<usize> {
        (0..self.in_tree.len()).filter(|&i| self.in_tree[i]).collect()
    }

    pub fn contains(&self, d: usize) -> bool {
        self.in_tree[d / 2]
    }

    /// Tree path from `v` up to the root, as directed edges.
    fn path_to_root(&self, g: &BaseGraph, mut v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        while let Some(d) = self.parent_edge[v] {
            out.push(reversed(d));
            v = g.origin(d);
        }
        out
    }

    /// Tree path between two vertices (through the root, with cancellation
    /// left to the caller's incidence count).
    pub fn tree_path(&self, g: &BaseGraph, from: usize, to: usize) -> Vec<usize> {
        let mut up = self.path_to_root(g, from);
        let down = self.path_to_root(g, to);
        up.extend(down.into_iter().rev().map(reversed));
        up
    }
}

/// Integer homology coordinates of every directed edge.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaMap {
    pub tree: SpanningTree,
    pub betti: usize,
    /// Positive non-tree edges, in declaration order (positive indices).
    pub basis_edges: Vec<usize>,
    theta: Vec<Vec<i64>>,
    /// Incidence vector of the fundamental circuit through each basis edge.
    circuits: Vec<Vec<i64>>,
}

impl ThetaMap {
    pub fn new(g: &BaseGraph, tree: SpanningTree) -> Self {
        let basis_edges: Vec<usize> = (0..g.n_positive()).filter(|&i| !tree.in_tree[i]).collect();
        let b = basis_edges.len();
        let mut theta = vec![vec![0; b]; g.n_directed()];
        let mut circuits = Vec::with_capacity(b);
        for (j, &i) in basis_edges.iter().enumerate() {
            let d = 2 * i;
            theta[d][j] = 1;
            theta[d + 1][j] = -1;
            let mut edges = vec![d];
            edges.extend(tree.tree_path(g, g.terminus(d), g.origin(d)));
            circuits.push(g.incidence_vector(&Path { edges }));
        }
        ThetaMap {
            tree,
            betti: b,
            basis_edges,
            theta,
            circuits,
        }
    }

    pub fn of(g: &BaseGraph) -> Self {
        Self::new(g, g.spanning_tree())
    }

    pub fn theta(&self, d: usize) -> &[i64] {
        &self.theta[d]
    }

    pub fn circuit(&self, j: usize) -> &[i64] {
        &self.circuits[j]
    }

    pub fn rotation_vector(&self, p: &Path) -> Vec<i64> {
        let mut r = vec![0; self.betti];
        for &d in &p.edges {
            for (x, t) in r.iter_mut().zip(&self.theta[d]) {
                *x += t;
            }
        }
        r
    }

    /// θ applied to an incidence vector over positive edges.
    pub fn apply(&self, incidence: &[i64]) -> Vec<i64> {
        let mut r = vec![0; self.betti];
        for (i, &c) in incidence.iter().enumerate() {
            for (x, t) in r.iter_mut().zip(&self.theta[2 * i]) {
                *x += c * t;
            }
        }
        r
    }

    /// Cycle with the given coordinates in the circuit basis, as an
    /// incidence vector.
    pub fn cycle_from_coordinates(&self, coords: &[i64]) -> Vec<i64> {
        let m = self.circuits.first().map_or(0, Vec::len);
        let mut out = vec![0; m];
        for (c, circ) in coords.iter().zip(&self.circuits) {
            for (x, y) in out.iter_mut().zip(circ) {
                *x += c * y;
            }
        }
        out
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn honeycomb_homology() {
        let g = honeycomb();
        assert_eq!(g.n_directed(), 6);
        assert_eq!(g.betti(), 2);
        let tm = ThetaMap::of(&g);
        assert_eq!(tm.tree.positive_edges(), vec![0]);
        assert_eq!(tm.theta(g.edge("e0").unwrap()), &[0, 0]);
        assert_eq!(tm.theta(g.edge("e1").unwrap()), &[1, 0]);
        assert_eq!(tm.theta(g.edge("e2").unwrap()), &[0, 1]);
        assert_eq!(tm.theta(g.edge("e1.rev").unwrap()), &[-1, 0]);
        assert_eq!(tm.circuit(0), &[-1, 1, 0]);
    }

    #[test]
    fn bouquet_tree_is_a_point() {
        let g = bouquet();
        let tm = ThetaMap::of(&g);
        assert_eq!(tm.betti, 2);
        assert!(tm.tree.positive_edges().is_empty());
        let p = g.path_from_ids(&["f1", "f1", "f2"]).unwrap();
        assert_eq!(tm.rotation_vector(&p), vec![2, 1]);
    }

    #[test]
    fn structural_errors() {
        let e = BaseGraph::build(&spec(&["a", "b"], &[])).unwrap_err();
        assert!(matches!(e, Error::DisconnectedGraph(_)));
        let e = BaseGraph::build(&spec(&["a"], &[("x", "a", "a"), ("x", "a", "a")])).unwrap_err();
        assert_eq!(e, Error::DuplicateEdgeId("x".into()));
        let e = BaseGraph::build(&spec(&["a"], &[("x", "a", "q")])).unwrap_err();
        assert!(matches!(e, Error::DanglingEndpoint { .. }));
        let e = BaseGraph::build(&spec(&["a"], &[("x", "a", "a"), ("x.rev", "a", "a")])).unwrap_err();
        assert_eq!(e, Error::DuplicateEdgeId("x.rev".into()));
        assert_eq!(BaseGraph::build(&spec(&[], &[])).unwrap_err(), Error::EmptyGraph);
    }

    #[test]
    fn tree_graphs() {
        let g = BaseGraph::build(&spec(&["a", "b", "c"], &[("p", "a", "b"), ("q", "c", "b")])).unwrap();
        assert_eq!(g.betti(), 0);
        let tm = ThetaMap::of(&g);
        assert_eq!(tm.tree.positive_edges(), vec![0, 1]);
        let single = BaseGraph::build(&spec(&["a", "b"], &[("p", "a", "b")])).unwrap();
        assert_eq!(single.betti(), 0);
    }

    #[test]
    fn incidence_of_paths() {
        let g = honeycomb();
        let p = g.path_from_ids(&["e1", "e0.rev"]).unwrap();
        assert_eq!(g.incidence_vector(&p), vec![-1, 1, 0]);
        assert_eq!(ThetaMap::of(&g).rotation_vector(&p), vec![1, 0]);
        let back = g.path_from_ids(&["e2", "e2.rev"]).unwrap();
        assert_eq!(g.incidence_vector(&back), vec![0, 0, 0]);
        assert_eq!(g.incidence_vector(&Path::default()), vec![0, 0, 0]);
        assert!(matches!(
            g.path_from_ids(&["e1", "e2"]),
            Err(Error::NotConcatenated(_, _))
        ));
    }

    #[test]
    fn oriented_edge_view() {
        let g = honeycomb();
        let e = g.oriented_edge(g.edge("e1.rev").unwrap());
        assert_eq!(e.origin, "x2");
        assert_eq!(e.reversed, "e1");
        assert!(!e.is_positive);
    }
}
